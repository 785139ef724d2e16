//! Finite sinked multigraphs and their reduced Laplacians.
//!
//! Non-sink vertices are `0..n`; the sink has id `n`. Out-edges of a vertex are
//! listed neighbor by neighbor in increasing id (the sink therefore last), with
//! parallel copies adjacent. That list is both the edge order used by the burning
//! bijection and the cyclic order of rotors.

use crate::error::{invalid, too_big, Result, SandlabError};
use crate::linalg::{bareiss_det, cg_solve, rational_inverse, smith_invariants, to_big, Lu};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// Largest vertex count handled by exact determinant, Smith form and rational Green modes.
pub const EXACT_LIMIT: usize = 64;
/// Largest vertex count handled by dense LU.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub gamma: u32,
}

impl GridSpec {
    /// The box [-n, n]^d.
    pub fn centered(dim: usize, n: i64, gamma: u32) -> GridSpec {
        GridSpec { dim, lo: vec![-n; dim], hi: vec![n; dim], gamma }
    }
}

/// Coordinates of the vertices of a wired box, row-major (first axis slowest).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    pub dim: usize,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    strides: Vec<usize>,
}

impl Lattice {
    fn new(lo: Vec<i64>, hi: Vec<i64>) -> Lattice {
        let dim = lo.len();
        let mut strides = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (hi[k + 1] - lo[k + 1] + 1) as usize;
        }
        Lattice { dim, lo, hi, strides }
    }

    pub fn side(&self, k: usize) -> usize {
        (self.hi[k] - self.lo[k] + 1) as usize
    }

    pub fn len(&self) -> usize {
        (0..self.dim).map(|k| self.side(k)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        let mut i = 0;
        for k in 0..self.dim {
            if x[k] < self.lo[k] || x[k] > self.hi[k] {
                return None;
            }
            i += (x[k] - self.lo[k]) as usize * self.strides[k];
        }
        Some(i)
    }

    pub fn coords(&self, mut i: usize) -> Vec<i64> {
        let mut x = vec![0; self.dim];
        for k in 0..self.dim {
            x[k] = self.lo[k] + (i / self.strides[k]) as i64;
            i %= self.strides[k];
        }
        x
    }
}

#[derive(Clone, Debug)]
pub struct SinkedMultigraph {
    n: usize,
    off: Vec<usize>,
    nbr: Vec<usize>,
    mult: Vec<u32>,
    /// flattened out-edge heads, `deg(x)` entries per vertex
    eoff: Vec<usize>,
    heads: Vec<usize>,
    deg: Vec<u32>,
    sink_edges: Vec<u32>,
    lattice: Option<Lattice>,
}

impl SinkedMultigraph {
    /// Builds from an undirected edge list over ids `0..=n` (id `n` is the sink).
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<SinkedMultigraph> {
        let mut adj: Vec<std::collections::BTreeMap<usize, u32>> = vec![Default::default(); n + 1];
        for &(a, b, m) in edges {
            if a > n || b > n {
                return invalid(format!("edge ({a},{b}) out of range"));
            }
            if a == b {
                if a == n {
                    continue;
                }
                return invalid(format!("loop edge at {a}"));
            }
            if m == 0 {
                continue;
            }
            *adj[a].entry(b).or_default() += m;
            *adj[b].entry(a).or_default() += m;
        }
        Self::from_adjacency(n, &adj[..n], None)
    }

    fn from_adjacency(
        n: usize,
        adj: &[std::collections::BTreeMap<usize, u32>],
        lattice: Option<Lattice>,
    ) -> Result<SinkedMultigraph> {
        let mut off = vec![0];
        let mut nbr = Vec::new();
        let mut mult = Vec::new();
        let mut eoff = vec![0];
        let mut heads = Vec::new();
        let mut deg = Vec::with_capacity(n);
        let mut sink_edges = Vec::with_capacity(n);
        for row in adj.iter().take(n) {
            let mut d = 0;
            let mut s = 0;
            for (&y, &m) in row {
                nbr.push(y);
                mult.push(m);
                d += m;
                if y == n {
                    s += m;
                }
                heads.extend(std::iter::repeat(y).take(m as usize));
            }
            off.push(nbr.len());
            eoff.push(heads.len());
            deg.push(d);
            sink_edges.push(s);
        }
        let g = SinkedMultigraph { n, off, nbr, mult, eoff, heads, deg, sink_edges, lattice };
        if !g.is_connected() {
            return invalid("graph is not connected to the sink");
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n + 1];
        seen[self.n] = true;
        // reverse reachability from the sink: symmetric, so forward search suffices
        let mut stack: Vec<usize> = (0..self.n).filter(|&x| self.sink_edges[x] > 0).collect();
        for &x in &stack {
            seen[x] = true;
        }
        while let Some(x) = stack.pop() {
            for &(y, _) in &self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn sink(&self) -> usize {
        self.n
    }

    pub fn deg(&self, x: usize) -> u32 {
        self.deg[x]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.deg
    }

    pub fn sink_edges(&self, x: usize) -> u32 {
        self.sink_edges[x]
    }

    pub fn deg_sink(&self) -> u32 {
        self.sink_edges.iter().sum()
    }

    /// Number of undirected edges, sink edges included.
    pub fn edge_count(&self) -> u32 {
        let inner: u32 = (0..self.n)
            .flat_map(|x| self.neighbors(x).into_iter().filter(move |&(y, _)| y > x && y < self.n))
            .map(|(_, m)| m)
            .sum();
        inner + self.deg_sink()
    }

    /// (neighbor, multiplicity) in canonical order.
    pub fn neighbors(&self, x: usize) -> Vec<(usize, u32)> {
        (self.off[x]..self.off[x + 1]).map(|k| (self.nbr[k], self.mult[k])).collect()
    }

    pub fn neighbor_slices(&self, x: usize) -> (&[usize], &[u32]) {
        (&self.nbr[self.off[x]..self.off[x + 1]], &self.mult[self.off[x]..self.off[x + 1]])
    }

    /// Heads of the out-edges of x in edge order; entry i is edge i.
    pub fn out_heads(&self, x: usize) -> &[usize] {
        &self.heads[self.eoff[x]..self.eoff[x + 1]]
    }

    /// Index of the first parallel copy of edge x→y in the out-edge list.
    pub fn first_edge_to(&self, x: usize, y: usize) -> Option<usize> {
        self.out_heads(x).iter().position(|&h| h == y)
    }

    pub fn multiplicity(&self, x: usize, y: usize) -> u32 {
        if x == self.n {
            return if y < self.n { self.sink_edges[y] } else { 0 };
        }
        let (ns, ms) = self.neighbor_slices(x);
        ns.binary_search(&y).map(|k| ms[k]).unwrap_or(0)
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    /// Lattice index of a point, for wired boxes.
    pub fn vertex_at(&self, x: &[i64]) -> Option<usize> {
        self.lattice.as_ref().and_then(|l| l.index(x))
    }

    pub fn coords(&self, v: usize) -> Option<Vec<i64>> {
        self.lattice.as_ref().map(|l| l.coords(v))
    }

    /// Δ′ as a dense integer matrix.
    pub fn reduced_laplacian(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.n]; self.n];
        for x in 0..self.n {
            m[x][x] = self.deg[x] as i64;
            for (y, a) in self.neighbors(x) {
                if y < self.n {
                    m[x][y] -= a as i64;
                }
            }
        }
        m
    }

    /// y = Δ′ v
    pub fn laplacian_apply(&self, v: &[f64], out: &mut [f64]) {
        for x in 0..self.n {
            let mut s = self.deg[x] as f64 * v[x];
            for k in self.off[x]..self.off[x + 1] {
                let y = self.nbr[k];
                if y < self.n {
                    s -= self.mult[k] as f64 * v[y];
                }
            }
            out[x] = s;
        }
    }

    /// Exact det Δ′ (= number of spanning trees).
    pub fn det_exact(&self) -> Result<BigInt> {
        if self.n > EXACT_LIMIT {
            return too_big(format!("exact determinant limited to {EXACT_LIMIT} vertices"));
        }
        Ok(bareiss_det(to_big(&self.reduced_laplacian())))
    }

    /// log det Δ′ in double precision.
    pub fn log_det(&self) -> Result<f64> {
        if self.n > DENSE_LIMIT {
            return too_big(format!("dense log-determinant limited to {DENSE_LIMIT} vertices"));
        }
        let m: Vec<Vec<f64>> =
            self.reduced_laplacian().iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        let lu = Lu::new(&m);
        let (l, s) = lu.log_abs_det();
        if lu.is_singular() || s < 0.0 {
            return Err(SandlabError::Internal("reduced Laplacian not positive definite".into()));
        }
        Ok(l)
    }

    pub fn group_invariants(&self) -> Result<Vec<BigInt>> {
        if self.n > EXACT_LIMIT {
            return too_big(format!("Smith form limited to {EXACT_LIMIT} vertices"));
        }
        let d = smith_invariants(to_big(&self.reduced_laplacian()));
        Ok(d.into_iter().filter(|v| *v != BigInt::from(1)).collect())
    }

    /// Exact (Δ′)⁻¹.
    pub fn green_exact(&self) -> Result<Vec<Vec<BigRational>>> {
        if self.n > EXACT_LIMIT {
            return too_big(format!("rational inverse limited to {EXACT_LIMIT} vertices"));
        }
        rational_inverse(&self.reduced_laplacian())
            .ok_or_else(|| SandlabError::Internal("singular reduced Laplacian".into()))
    }

    /// Column x of (Δ′)⁻¹, i.e. G(·, x).
    pub fn green_column(&self, x: usize) -> Result<Vec<f64>> {
        if x >= self.n {
            return invalid(format!("vertex {x} out of range"));
        }
        let mut b = vec![0.0; self.n];
        b[x] = 1.0;
        Ok(self.solve(&b))
    }

    pub fn green(&self, z: usize, x: usize) -> Result<f64> {
        if z >= self.n {
            return invalid(format!("vertex {z} out of range"));
        }
        Ok(self.green_column(x)?[z])
    }

    /// Solves Δ′ u = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        if self.n <= DENSE_LIMIT {
            let m: Vec<Vec<f64>> = self
                .reduced_laplacian()
                .iter()
                .map(|r| r.iter().map(|&v| v as f64).collect())
                .collect();
            let lu = Lu::new(&m);
            let mut x = lu.solve(b);
            // one step of iterative refinement
            let mut r = vec![0.0; self.n];
            self.laplacian_apply(&x, &mut r);
            for i in 0..self.n {
                r[i] = b[i] - r[i];
            }
            let dx = lu.solve(&r);
            for i in 0..self.n {
                x[i] += dx[i];
            }
            x
        } else {
            let diag: Vec<f64> = self.deg.iter().map(|&d| d as f64).collect();
            let (x, _) = cg_solve(|v, o| self.laplacian_apply(v, o), &diag, b, 1e-14, 20 * self.n);
            x
        }
    }

    /// Text dump "x y multiplicity", one line per undirected edge, sink written as `s`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for x in 0..self.n {
            for (y, m) in self.neighbors(x) {
                if y == self.n {
                    out.push_str(&format!("{x} s {m}\n"));
                } else if y > x {
                    out.push_str(&format!("{x} {y} {m}\n"));
                }
            }
        }
        out
    }

    /// Parses the dump format. Vertex count is one more than the largest id seen.
    pub fn parse_dump(text: &str) -> Result<SinkedMultigraph> {
        let mut raw = Vec::new();
        let mut maxv = 0usize;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return invalid(format!("line {}: expected `x y multiplicity`", ln + 1));
            }
            let p = |s: &str| -> Result<Option<usize>> {
                if s == "s" {
                    Ok(None)
                } else {
                    s.parse::<usize>()
                        .map(Some)
                        .map_err(|_| SandlabError::InvalidArgument(format!("line {}: bad vertex {s}", ln + 1)))
                }
            };
            let a = p(f[0])?;
            let b = p(f[1])?;
            let m: u32 = f[2]
                .parse()
                .map_err(|_| SandlabError::InvalidArgument(format!("line {}: bad multiplicity", ln + 1)))?;
            for v in [a, b].into_iter().flatten() {
                maxv = maxv.max(v + 1);
            }
            raw.push((a, b, m));
        }
        let n = maxv;
        let edges: Vec<(usize, usize, u32)> =
            raw.into_iter().map(|(a, b, m)| (a.unwrap_or(n), b.unwrap_or(n), m)).collect();
        SinkedMultigraph::from_edges(n, &edges)
    }
}

/// The wired graph of an integer box, with γ extra sink edges per vertex.
pub fn wired_box(spec: &GridSpec) -> Result<SinkedMultigraph> {
    let d = spec.dim;
    if d == 0 || spec.lo.len() != d || spec.hi.len() != d {
        return invalid("box dimension mismatch");
    }
    if (0..d).any(|k| spec.lo[k] > spec.hi[k]) {
        return invalid("empty box");
    }
    let lat = Lattice::new(spec.lo.clone(), spec.hi.clone());
    let n = lat.len();
    let mut adj: Vec<std::collections::BTreeMap<usize, u32>> = vec![Default::default(); n];
    let mut x = vec![0i64; d];
    for (i, row) in adj.iter_mut().enumerate() {
        x.copy_from_slice(&lat.coords(i));
        let mut sink = spec.gamma;
        for k in 0..d {
            for s in [-1i64, 1] {
                x[k] += s;
                match lat.index(&x) {
                    Some(j) => *row.entry(j).or_default() += 1,
                    None => sink += 1,
                }
                x[k] -= s;
            }
        }
        if sink > 0 {
            row.insert(n, sink);
        }
    }
    SinkedMultigraph::from_adjacency(n, &adj, Some(lat))
}

/// Box(n) = [-n, n]^d wired, no dissipation.
pub fn box_graph(dim: usize, n: i64) -> SinkedMultigraph {
    wired_box(&GridSpec::centered(dim, n, 0)).expect("nonempty box")
}

/// Spanning tree count by exhaustive search over edge subsets (small graphs only).
pub fn count_spanning_trees_brute(g: &SinkedMultigraph) -> u64 {
    let n = g.len();
    let mut edges = Vec::new();
    for x in 0..n {
        for (y, m) in g.neighbors(x) {
            if y > x {
                for _ in 0..m {
                    edges.push((x, y));
                }
            }
        }
    }
    // choose exactly n edges forming a forest on n+1 vertices
    fn rec(
        edges: &[(usize, usize)],
        start: usize,
        left: usize,
        uf: &mut Vec<usize>,
        count: &mut u64,
    ) {
        if left == 0 {
            *count += 1;
            return;
        }
        if edges.len() - start < left {
            return;
        }
        for i in start..edges.len() {
            if edges.len() - i < left {
                break;
            }
            let (a, b) = edges[i];
            let (ra, rb) = (find(uf, a), find(uf, b));
            if ra != rb {
                let saved = uf.clone();
                uf[ra] = rb;
                rec(edges, i + 1, left - 1, uf, count);
                *uf = saved;
            }
        }
    }
    fn find(uf: &mut [usize], mut a: usize) -> usize {
        while uf[a] != a {
            a = uf[a];
        }
        a
    }
    let mut uf: Vec<usize> = (0..=n).collect();
    let mut count = 0;
    rec(&edges, 0, n, &mut uf, &mut count);
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: i64, hi: i64) -> SinkedMultigraph {
        wired_box(&GridSpec { dim: 1, lo: vec![lo], hi: vec![hi], gamma: 0 }).unwrap()
    }

    #[test]
    fn single_vertex() {
        let g = box_graph(2, 0);
        assert_eq!(g.len(), 1);
        assert_eq!(g.deg(0), 4);
        assert_eq!(g.multiplicity(0, 1), 4);
        assert_eq!(g.reduced_laplacian(), vec![vec![4]]);
        assert_eq!(g.det_exact().unwrap(), BigInt::from(4));
        assert_eq!(g.group_invariants().unwrap(), vec![BigInt::from(4)]);
        assert!((g.green(0, 0).unwrap() - 0.25).abs() < 1e-15);
        let g = wired_box(&GridSpec::centered(2, 0, 2)).unwrap();
        assert_eq!(g.deg(0), 6);
    }

    #[test]
    fn one_dimensional_pair() {
        let g = line(1, 2);
        assert_eq!(g.reduced_laplacian(), vec![vec![2, -1], vec![-1, 2]]);
        assert_eq!(g.det_exact().unwrap(), BigInt::from(3));
        assert_eq!(g.group_invariants().unwrap(), vec![BigInt::from(3)]);
        let gi = g.green_exact().unwrap();
        assert_eq!(gi[0][0], BigRational::new(2.into(), 3.into()));
        assert_eq!(gi[0][1], BigRational::new(1.into(), 3.into()));
    }

    #[test]
    fn path_is_tridiagonal() {
        let m = line(1, 3).reduced_laplacian();
        assert_eq!(m, vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]]);
    }

    #[test]
    fn empty_box_rejected() {
        let r = wired_box(&GridSpec { dim: 2, lo: vec![0, 1], hi: vec![0, 0], gamma: 0 });
        assert!(matches!(r, Err(SandlabError::InvalidArgument(_))));
    }

    #[test]
    fn three_by_three_tree_count() {
        let g = box_graph(2, 1);
        assert_eq!(g.det_exact().unwrap(), BigInt::from(count_spanning_trees_brute(&g)));
        assert_eq!(g.det_exact().unwrap(), BigInt::from(100352));
    }

    #[test]
    fn two_by_two_smith_product() {
        let g = wired_box(&GridSpec { dim: 2, lo: vec![0, 0], hi: vec![1, 1], gamma: 0 }).unwrap();
        let prod: BigInt = g.group_invariants().unwrap().iter().product();
        assert_eq!(prod, g.det_exact().unwrap());
    }

    #[test]
    fn row_major_order() {
        let g = box_graph(2, 1);
        let l = g.lattice().unwrap();
        assert_eq!(l.coords(0), vec![-1, -1]);
        assert_eq!(l.coords(1), vec![-1, 0]);
        assert_eq!(l.coords(3), vec![0, -1]);
        assert_eq!(g.vertex_at(&[0, 0]), Some(4));
        // sink edges come last in the out-edge list
        assert_eq!(g.out_heads(0), &[1, 3, 9, 9]);
    }

    #[test]
    fn green_solvers_agree() {
        let g = box_graph(2, 3);
        let col = g.green_column(24).unwrap();
        let mut r = vec![0.0; g.len()];
        g.laplacian_apply(&col, &mut r);
        for (i, v) in r.iter().enumerate() {
            assert!((v - if i == 24 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        // symmetry
        assert!((g.green(3, 17).unwrap() - g.green(17, 3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn dump_round_trip() {
        let g = box_graph(2, 1);
        let h = SinkedMultigraph::parse_dump(&g.dump()).unwrap();
        assert_eq!(h.reduced_laplacian(), g.reduced_laplacian());
    }

    #[test]
    fn disconnected_rejected() {
        let r = SinkedMultigraph::from_edges(2, &[(0, 2, 1)]);
        assert!(r.is_err());
    }
}
