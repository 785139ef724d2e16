//! Loop-erased random walk, Wilson's algorithm, exact stationary sampling,
//! transfer currents and the looping-constant estimator.

use crate::algebra::{tree_to_sandpile, SpanningTree};
use crate::error::{invalid, Result, SandlabError};
use crate::graphcore::SinkedMultigraph;
use crate::linalg::det_f64;
use crate::rng::{par_replicas, stream, Rng};
use crate::sandpile::Config;
use rand::{Rng as _, RngCore};
use serde::Serialize;
use std::collections::HashMap;
use std::hash::Hash;

/// Chronological loop erasure.
pub fn loop_erase<T: Clone + Eq + Hash>(path: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(path.len());
    let mut pos: HashMap<T, usize> = HashMap::new();
    for v in path {
        if let Some(&k) = pos.get(v) {
            for w in out.drain(k + 1..) {
                pos.remove(&w);
            }
        } else {
            pos.insert(v.clone(), out.len());
            out.push(v.clone());
        }
    }
    out
}

/// Loop erasure after checking that consecutive entries are adjacent.
pub fn loop_erase_checked<T: Clone + Eq + Hash>(path: &[T], adjacent: impl Fn(&T, &T) -> bool) -> Result<Vec<T>> {
    for w in path.windows(2) {
        if !adjacent(&w[0], &w[1]) {
            return invalid("path has a step between non-adjacent vertices");
        }
    }
    Ok(loop_erase(path))
}

/// Nearest-neighbor adjacency on Z^d.
pub fn lattice_adjacent(a: &Vec<i64>, b: &Vec<i64>) -> bool {
    a.len() == b.len() && a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i64>() == 1
}

/// Uniform spanning tree rooted at the sink. Vertices are swept in canonical order.
pub fn wilson_ust(g: &SinkedMultigraph, rng: &mut Rng) -> SpanningTree {
    let n = g.len();
    let mut in_tree = vec![false; n + 1];
    in_tree[n] = true;
    let mut next = vec![usize::MAX; n];
    let mut edge = vec![0usize; n];
    // power-of-two degrees draw their choice from a buffered 64-bit word
    let mut bits = 0u64;
    let mut avail = 0u32;
    let mut pick = |len: usize, rng: &mut Rng| -> usize {
        if len.is_power_of_two() {
            let b = len.trailing_zeros();
            if avail < b {
                bits = rng.next_u64();
                avail = 64;
            }
            let k = (bits & (len as u64 - 1)) as usize;
            bits >>= b;
            avail -= b;
            k
        } else {
            rng.gen_range(0..len)
        }
    };
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let heads = g.out_heads(u);
            let k = pick(heads.len(), rng);
            edge[u] = k;
            next[u] = heads[k];
            u = heads[k];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    SpanningTree::from_edges(g, edge).expect("Wilson output is a tree")
}

/// Wilson's algorithm rooted at an arbitrary vertex; returns the parent of
/// every other vertex (ids 0..=n, sink = n).
pub fn wilson_rooted(g: &SinkedMultigraph, root: usize, rng: &mut Rng) -> Vec<usize> {
    let n = g.len();
    let mut in_tree = vec![false; n + 1];
    in_tree[root] = true;
    let mut next = vec![usize::MAX; n + 1];
    let step = |u: usize, rng: &mut Rng| -> usize {
        if u == n {
            // the sink's out-edges: one per sink edge of each neighbor
            let total = g.deg_sink();
            let mut k = rng.gen_range(0..total);
            for x in 0..n {
                let s = g.sink_edges(x);
                if k < s {
                    return x;
                }
                k -= s;
            }
            unreachable!()
        } else {
            let h = g.out_heads(u);
            h[rng.gen_range(0..h.len())]
        }
    };
    for start in 0..=n {
        let mut u = start;
        while !in_tree[u] {
            next[u] = step(u, rng);
            u = next[u];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    next
}

/// Exact sample from the uniform measure on recurrent configurations.
pub fn sample_recurrent(g: &SinkedMultigraph, rng: &mut Rng) -> Config {
    tree_to_sandpile(g, &wilson_ust(g, rng))
}

/// Oriented edge; `tail`/`head` in 0..=n with the sink as n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    pub fn new(tail: usize, head: usize) -> Edge {
        Edge { tail, head }
    }
}

/// Transfer-current kernel from grounded voltages: Y(e,f) = v_e(f⁻) − v_e(f⁺)
/// with v_e = Green potential of a unit source at e⁻ and sink at e⁺.
pub struct TransferCurrent<'a> {
    g: &'a SinkedMultigraph,
    cols: HashMap<usize, Vec<f64>>,
}

impl<'a> TransferCurrent<'a> {
    pub fn new(g: &'a SinkedMultigraph) -> Self {
        TransferCurrent { g, cols: HashMap::new() }
    }

    fn col(&mut self, x: usize) -> &[f64] {
        let n = self.g.len();
        let g = self.g;
        self.cols.entry(x).or_insert_with(|| if x == n { vec![0.0; n + 1] } else {
            let mut c = g.green_column(x).expect("vertex in range");
            c.push(0.0);
            c
        })
    }

    fn check(&self, e: Edge) -> Result<()> {
        if e.tail == e.head || self.g.multiplicity(e.tail.min(e.head), e.tail.max(e.head)) == 0 {
            return invalid(format!("({}, {}) is not an edge", e.tail, e.head));
        }
        Ok(())
    }

    pub fn y(&mut self, e: Edge, f: Edge) -> Result<f64> {
        self.check(e)?;
        self.check(f)?;
        let a = self.col(e.tail).to_vec();
        let b = self.col(e.head);
        // symmetric Green function: G(a, c) = col(a)[c]
        Ok((a[f.tail] - a[f.head]) - (b[f.tail] - b[f.head]))
    }
}

pub fn transfer_current(g: &SinkedMultigraph, e: Edge, f: Edge) -> Result<f64> {
    TransferCurrent::new(g).y(e, f)
}

/// Pr[present ⊆ T, absent ∩ T = ∅] for the uniform spanning tree T.
/// Parallel copies are distinct edges; list a copy at most once.
pub fn tree_event_probability(g: &SinkedMultigraph, present: &[Edge], absent: &[Edge]) -> Result<f64> {
    let norm = |e: &Edge| (e.tail.min(e.head), e.tail.max(e.head));
    for a in absent {
        if present.iter().any(|p| norm(p) == norm(a)) && g.multiplicity(norm(a).0, norm(a).1) == 1 {
            return invalid("present and absent sets overlap");
        }
    }
    let all: Vec<Edge> = present.iter().chain(absent).copied().collect();
    let mut tc = TransferCurrent::new(g);
    let k = all.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let y = tc.y(all[i], all[j])?;
            m[i][j] = if i < present.len() { y } else { (if i == j { 1.0 } else { 0.0 }) - y };
        }
    }
    Ok(det_f64(&m))
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopingEstimate {
    pub radius: i64,
    pub samples: usize,
    pub mean: f64,
    pub std_err: f64,
    /// ζ̂ = 2 + (ξ̂ − 1)/2
    pub mean_height: f64,
    /// (radius, mean, std_err) at R/4, R/2, R from the same walks
    pub diagnostic: Vec<(i64, f64, f64)>,
}

/// LERW from o on Z² stopped on leaving the box of radius R; counts neighbors of o on the erased path.
pub fn looping_constant_estimate(radius: i64, samples: usize, seed: u64) -> Result<LoopingEstimate> {
    if radius < 2 {
        return invalid("radius must be at least 2");
    }
    if samples == 0 {
        return invalid("need at least one sample");
    }
    let radii = [radius / 4, radius / 2, radius];
    let counts = par_replicas(samples, |i| {
        let mut rng = stream(seed, i as u64);
        lerw_neighbor_counts(radius, &radii, &mut rng)
    });
    let stats = |k: usize| {
        let m = samples as f64;
        let mean = counts.iter().map(|c| c[k] as f64).sum::<f64>() / m;
        let var = if samples > 1 {
            counts.iter().map(|c| (c[k] as f64 - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        (mean, (var / m).sqrt())
    };
    let diagnostic: Vec<(i64, f64, f64)> = (0..3)
        .filter(|&k| radii[k] >= 1)
        .map(|k| {
            let (m, s) = stats(k);
            (radii[k], m, s)
        })
        .collect();
    let (mean, se) = stats(2);
    Ok(LoopingEstimate { radius, samples, mean, std_err: se, mean_height: 2.0 + (mean - 1.0) / 2.0, diagnostic })
}

/// For each radius in `radii` (nondecreasing, last = r), the number of
/// neighbors of o on the loop erasure of the walk stopped at that exit.
pub fn lerw_neighbor_counts(r: i64, radii: &[i64; 3], rng: &mut Rng) -> [u32; 3] {
    let side = (2 * r + 3) as usize;
    let idx = |x: i64, y: i64| ((x + r + 1) as usize) * side + (y + r + 1) as usize;
    // the position array is allocated per call; a thread-local would save time
    // but the walk dominates for large r
    let mut pos = vec![u32::MAX; side * side];
    let mut path: Vec<(i64, i64)> = Vec::with_capacity(1024);
    path.push((0, 0));
    pos[idx(0, 0)] = 0;
    let nb = [idx(1, 0), idx(-1, 0), idx(0, 1), idx(0, -1)];
    let mut out = [0u32; 3];
    let mut next_radius = 0;
    let (mut x, mut y) = (0i64, 0i64);
    let mut bits = 0u64;
    let mut left = 0;
    let count = |pos: &Vec<u32>| nb.iter().filter(|&&k| pos[k] != u32::MAX).count() as u32;
    while next_radius < 3 && radii[next_radius] < 1 {
        out[next_radius] = 0;
        next_radius += 1;
    }
    loop {
        if left == 0 {
            bits = rng.next_u64();
            left = 32;
        }
        match bits & 3 {
            0 => x += 1,
            1 => x -= 1,
            2 => y += 1,
            _ => y -= 1,
        }
        bits >>= 2;
        left -= 1;
        let norm = x.abs().max(y.abs());
        while next_radius < 3 && norm > radii[next_radius] {
            out[next_radius] = count(&pos);
            next_radius += 1;
        }
        if next_radius == 3 {
            // clear for reuse is unnecessary: the array is dropped
            return out;
        }
        let k = idx(x, y);
        let p = pos[k];
        if p != u32::MAX {
            for &(a, b) in &path[p as usize + 1..] {
                pos[idx(a, b)] = u32::MAX;
            }
            path.truncate(p as usize + 1);
        } else {
            pos[k] = path.len() as u32;
            path.push((x, y));
        }
    }
}

/// All spanning trees of a small graph as sets of undirected edge indices
/// into `algebra::edge_list`.
pub fn enumerate_spanning_trees(g: &SinkedMultigraph) -> Result<Vec<Vec<usize>>> {
    let edges = crate::algebra::edge_list(g);
    if edges.len() > 24 {
        return Err(SandlabError::Size("tree enumeration limited to 24 edges".into()));
    }
    let n = g.len();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        edges: &[(usize, usize)],
        start: usize,
        left: usize,
        uf: &mut Vec<usize>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..edges.len() {
            if edges.len() - i < left {
                break;
            }
            let (a, b) = edges[i];
            let fa = root(uf, a);
            let fb = root(uf, b);
            if fa != fb {
                let saved = uf.clone();
                uf[fa] = fb;
                cur.push(i);
                rec(edges, i + 1, left - 1, uf, cur, out);
                cur.pop();
                *uf = saved;
            }
        }
    }
    fn root(uf: &[usize], mut a: usize) -> usize {
        while uf[a] != a {
            a = uf[a];
        }
        a
    }
    let mut uf: Vec<usize> = (0..=n).collect();
    rec(&edges, 0, n, &mut uf, &mut cur, &mut out);
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeightStats {
    pub n: i64,
    pub window: i64,
    pub samples: usize,
    pub counts: [u64; 4],
    pub p: [f64; 4],
    /// Standard errors from per-sample window frequencies.
    pub std_err: [f64; 4],
    pub mean_height: f64,
    pub mean_height_std_err: f64,
}

/// Height frequencies in the window |x|∞ ≤ w of exact stationary samples on Box(n) ⊂ Z².
pub fn height_statistics(n: i64, window: i64, samples: usize, seed: u64) -> Result<HeightStats> {
    if n < 0 || window < 0 || window > n {
        return invalid("need 0 ≤ window ≤ n");
    }
    if samples < 2 {
        return invalid("need at least two samples");
    }
    let g = crate::graphcore::box_graph(2, n);
    let sites: Vec<usize> = (-window..=window)
        .flat_map(|x| (-window..=window).map(move |y| [x, y]))
        .map(|c| g.vertex_at(&c).unwrap())
        .collect();
    let per = par_replicas(samples, |i| {
        let mut rng = stream(seed, i as u64);
        let tree = wilson_ust(&g, &mut rng);
        let mut c = [0u64; 4];
        for &v in &sites {
            c[crate::algebra::height_from_tree(&g, &tree, v).clamp(0, 3) as usize] += 1;
        }
        c
    });
    let k = sites.len() as f64;
    let m = samples as f64;
    let mut counts = [0u64; 4];
    let mut p = [0.0; 4];
    let mut se = [0.0; 4];
    for h in 0..4 {
        counts[h] = per.iter().map(|c| c[h]).sum();
        let f: Vec<f64> = per.iter().map(|c| c[h] as f64 / k).collect();
        p[h] = f.iter().sum::<f64>() / m;
        se[h] = (f.iter().map(|x| (x - p[h]).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt();
    }
    let means: Vec<f64> = per.iter().map(|c| (c[1] + 2 * c[2] + 3 * c[3]) as f64 / k).collect();
    let mean_height = means.iter().sum::<f64>() / m;
    let mse = (means.iter().map(|x| (x - mean_height).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt();
    Ok(HeightStats { n, window, samples, counts, p, std_err: se, mean_height, mean_height_std_err: mse })
}
