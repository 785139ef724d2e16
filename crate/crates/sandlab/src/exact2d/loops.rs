//! Loop counting by ω-weighted Laplacian determinants on directed graphs.

use crate::error::{invalid, too_big, Result};
use crate::linalg::{bareiss_det, interpolate_integer_nodes};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng as _;

/// Simple directed graph on vertices 0..n; vertex n is the sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    pub n: usize,
    pub out: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Digraph> {
        let mut out = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b > n || a == b {
                return invalid(format!("bad edge {a}->{b}"));
            }
            if out[a].contains(&b) {
                return invalid(format!("parallel edge {a}->{b}"));
            }
            out[a].push(b);
        }
        for o in &mut out {
            o.sort_unstable();
        }
        if out.iter().any(|o| o.is_empty()) {
            return invalid("every vertex needs an out-edge");
        }
        Ok(Digraph { n, out })
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && self.out[a].contains(&b)
    }

    /// Random digraph in which every vertex reaches the sink.
    pub fn random(n: usize, p: f64, rng: &mut crate::rng::Rng) -> Digraph {
        loop {
            let mut edges = Vec::new();
            for a in 0..n {
                for b in 0..=n {
                    if a != b && rng.gen::<f64>() < p {
                        edges.push((a, b));
                    }
                }
            }
            if let Ok(d) = Digraph::new(n, &edges) {
                if d.reaches_sink() {
                    return d;
                }
            }
        }
    }

    fn reaches_sink(&self) -> bool {
        let mut ok = vec![false; self.n + 1];
        ok[self.n] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..self.n {
                if !ok[a] && self.out[a].iter().any(|&b| ok[b]) {
                    ok[a] = true;
                    changed = true;
                }
            }
        }
        ok.iter().all(|&b| b)
    }

    /// Reduced Laplacian: out-degree on the diagonal, −1 per edge between non-sink vertices.
    pub fn reduced_laplacian(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.n]; self.n];
        for a in 0..self.n {
            m[a][a] = self.out[a].len() as i64;
            for &b in &self.out[a] {
                if b < self.n {
                    m[a][b] -= 1;
                }
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct LoopCountMatrix {
    pub base: Vec<Vec<i64>>,
    /// Entries (x, y) replaced by −ω.
    pub marked: Vec<(usize, usize)>,
}

impl LoopCountMatrix {
    pub fn new(d: &Digraph, marked: &[(usize, usize)]) -> Result<LoopCountMatrix> {
        for (i, &(a, b)) in marked.iter().enumerate() {
            if b >= d.n || !d.has_edge(a, b) {
                return invalid(format!("marked entry ({a},{b}) is not an edge between non-sink vertices"));
            }
            if marked[..i].contains(&(a, b)) {
                return invalid("marked entries must be distinct");
            }
        }
        Ok(LoopCountMatrix { base: d.reduced_laplacian(), marked: marked.to_vec() })
    }

    fn at(&self, omega: i64) -> Vec<Vec<BigInt>> {
        let mut m: Vec<Vec<BigInt>> =
            self.base.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        for &(a, b) in &self.marked {
            m[a][b] = BigInt::from(-omega);
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopPolynomial {
    /// Coefficients of det in increasing powers of ω.
    pub coeffs: Vec<BigInt>,
}

impl LoopPolynomial {
    /// Value at ω = 1, the unperturbed determinant N₀.
    pub fn n0(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// Coefficient of ω^k for k = number of marked entries.
    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn coefficient(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }
}

/// det as an exact polynomial in ω, by evaluation at ω = 0..k and interpolation.
pub fn loop_counts_via_det(m: &LoopCountMatrix) -> Result<LoopPolynomial> {
    let k = m.marked.len();
    let ys: Vec<BigInt> = (0..=k as i64).map(|w| bareiss_det(m.at(w))).collect();
    let c = interpolate_integer_nodes(&ys);
    let mut coeffs = Vec::with_capacity(c.len());
    for v in c {
        if !v.is_integer() {
            return Err(crate::SandlabError::Internal("non-integral determinant coefficient".into()));
        }
        coeffs.push(v.to_integer());
    }
    Ok(LoopPolynomial { coeffs })
}

/// Enumeration oracle: `counts[0]` = rotor configurations without loops; `counts[i]` for i ≥ 1
/// = configurations with exactly i loops, each containing a marked edge and covering all of them.
pub fn brute_loop_counts(d: &Digraph, marked: &[(usize, usize)]) -> Result<Vec<u64>> {
    let total: f64 = d.out.iter().map(|o| o.len() as f64).product();
    if total > 1e7 {
        return too_big("more than 10⁷ rotor configurations");
    }
    let n = d.n;
    let mut choice = vec![0usize; n];
    let mut counts = vec![0u64; n + 1];
    let mut state = vec![0u8; n];
    loop {
        let succ = |x: usize| d.out[x][choice[x]];
        // find cycles of the functional graph
        state.iter_mut().for_each(|s| *s = 0);
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for s in 0..n {
            let mut path = Vec::new();
            let mut x = s;
            while x < n && state[x] == 0 {
                state[x] = 1;
                path.push(x);
                x = succ(x);
            }
            if x < n && state[x] == 1 {
                let at = path.iter().position(|&p| p == x).unwrap();
                cycles.push(path[at..].to_vec());
            }
            for p in path {
                state[p] = 2;
            }
        }
        if cycles.is_empty() {
            counts[0] += 1;
        } else if !marked.is_empty() {
            let on = |c: &Vec<usize>, (a, b): (usize, usize)| c.contains(&a) && succ(a) == b;
            let each = cycles.iter().all(|c| marked.iter().any(|&f| on(c, f)));
            let covered = marked.iter().all(|&f| cycles.iter().any(|c| on(c, f)));
            if each && covered {
                counts[cycles.len()] += 1;
            }
        }
        // next configuration
        let mut i = 0;
        while i < n {
            choice[i] += 1;
            if choice[i] < d.out[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    Ok(counts)
}

/// Alternating sum Σ_{i≥1} (−1)^i N_i, the predicted leading coefficient.
pub fn alternating_loop_sum(counts: &[u64]) -> BigInt {
    counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| if i % 2 == 1 { -BigInt::from(c) } else { BigInt::from(c) })
        .fold(BigInt::zero(), |a, b| a + b)
}

/// det Δ′ = number of loop-free rotor configurations.
pub fn spanning_count(d: &Digraph) -> BigInt {
    bareiss_det(crate::linalg::to_big(&d.reduced_laplacian()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> Digraph {
        Digraph::new(2, &[(0, 1), (1, 0), (0, 2), (1, 2)]).unwrap()
    }

    #[test]
    fn two_vertex_example() {
        let d = pair();
        let none = loop_counts_via_det(&LoopCountMatrix::new(&d, &[]).unwrap()).unwrap();
        assert_eq!(none.coeffs, vec![BigInt::from(3)]);
        let p = loop_counts_via_det(&LoopCountMatrix::new(&d, &[(0, 1)]).unwrap()).unwrap();
        assert_eq!(p.coeffs, vec![BigInt::from(4), BigInt::from(-1)]);
        assert_eq!(p.n0(), BigInt::from(3));
        let b = brute_loop_counts(&d, &[(0, 1)]).unwrap();
        assert_eq!(b[0], 3);
        assert_eq!(b[1], 1);
        assert_eq!(-p.leading(), BigInt::from(b[1]));
        assert!(LoopCountMatrix::new(&d, &[(0, 2)]).is_err());
    }

    #[test]
    fn random_digraphs() {
        let mut rng = crate::rng::rng(11);
        for trial in 0..40 {
            let n = 2 + trial % 4;
            let d = Digraph::random(n, 0.55, &mut rng);
            let edges: Vec<(usize, usize)> =
                (0..n).flat_map(|a| d.out[a].iter().filter(|&&b| b < n).map(move |&b| (a, b))).collect();
            let b0 = brute_loop_counts(&d, &[]).unwrap();
            assert_eq!(spanning_count(&d), BigInt::from(b0[0]));
            for &h in &edges {
                let p = loop_counts_via_det(&LoopCountMatrix::new(&d, &[h]).unwrap()).unwrap();
                assert_eq!(p.coeffs.len(), 2);
                let b = brute_loop_counts(&d, &[h]).unwrap();
                assert_eq!(-p.leading(), BigInt::from(b[1]));
            }
            if edges.len() >= 3 {
                let f = [edges[0], edges[edges.len() / 2], edges[edges.len() - 1]];
                if f[0] != f[1] && f[1] != f[2] {
                    let p = loop_counts_via_det(&LoopCountMatrix::new(&d, &f).unwrap()).unwrap();
                    let b = brute_loop_counts(&d, &f).unwrap();
                    assert_eq!(p.leading(), alternating_loop_sum(&b));
                }
            }
        }
    }
}
