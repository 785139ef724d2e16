//! Single-site height probabilities and minimal events.

use crate::algebra::{burning_test, is_recurrent};
use crate::error::{invalid, Result};
use crate::graphcore::{box_graph, SinkedMultigraph};
use crate::linalg::det_f64;
use crate::sandpile::max_stable;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// A number p₀ + p₁/π + p₂/π² + p₃/π³ with rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct InvPiPoly(pub [BigRational; 4]);

impl InvPiPoly {
    fn from_ints(num: [i64; 4], den: [i64; 4]) -> Self {
        InvPiPoly(std::array::from_fn(|i| BigRational::new(num[i].into(), den[i].into())))
    }

    pub fn value(&self) -> f64 {
        let ip = 1.0 / std::f64::consts::PI;
        self.0.iter().rev().fold(0.0, |acc, c| acc * ip + c.to_f64().unwrap())
    }

    pub fn add(&self, o: &InvPiPoly) -> InvPiPoly {
        InvPiPoly(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }

    pub fn scale(&self, k: i64) -> InvPiPoly {
        InvPiPoly(std::array::from_fn(|i| &self.0[i] * BigRational::from_integer(k.into())))
    }

    pub fn is_rational(&self) -> bool {
        self.0[1..].iter().all(|c| c.is_zero())
    }
}

#[derive(Clone, Debug)]
pub struct HeightLaw {
    pub p: [InvPiPoly; 4],
    pub zeta: InvPiPoly,
}

/// Infinite-volume single-site height probabilities on Z² and the mean height.
pub fn height_probabilities_closed_form() -> HeightLaw {
    let p = [
        InvPiPoly::from_ints([0, 0, 2, -4], [1, 1, 1, 1]),
        InvPiPoly::from_ints([1, -1, -3, 12], [4, 2, 1, 1]),
        InvPiPoly::from_ints([3, 1, 0, -12], [8, 1, 1, 1]),
        InvPiPoly::from_ints([3, -1, 1, 4], [8, 2, 1, 1]),
    ];
    let zeta = p[1].add(&p[2].scale(2)).add(&p[3].scale(3));
    HeightLaw { p, zeta }
}

/// p(0) in floating point.
pub fn p0() -> f64 {
    let ip = 1.0 / std::f64::consts::PI;
    2.0 * ip * ip - 4.0 * ip * ip * ip
}

/// det(I + B G) for the reduced Laplacian perturbation B of deleting the listed edges
/// (`g.sink()` allowed as an endpoint). Equals τ(G − E)/τ(G).
pub fn deletion_ratio(g: &SinkedMultigraph, deleted: &[(usize, usize)]) -> Result<f64> {
    let n = g.len();
    let mut count: std::collections::BTreeMap<(usize, usize), u32> = Default::default();
    for &(a, b) in deleted {
        if a == b || a > n || b > n || (a == n && b == n) {
            return invalid(format!("bad edge ({a},{b})"));
        }
        *count.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    for (&(a, b), &c) in &count {
        if c > g.multiplicity(a, b) {
            return invalid(format!("edge ({a},{b}) deleted more often than present"));
        }
    }
    let mut support: Vec<usize> = deleted.iter().flat_map(|&(a, b)| [a, b]).filter(|&v| v < n).collect();
    support.sort_unstable();
    support.dedup();
    let k = support.len();
    if k == 0 {
        return Ok(1.0);
    }
    let pos = |v: usize| support.binary_search(&v).ok();
    let mut b = vec![vec![0.0; k]; k];
    for &(x, y) in deleted {
        match (pos(x), pos(y)) {
            (Some(i), Some(j)) => {
                b[i][i] -= 1.0;
                b[j][j] -= 1.0;
                b[i][j] += 1.0;
                b[j][i] += 1.0;
            }
            (Some(i), None) | (None, Some(i)) => b[i][i] -= 1.0,
            (None, None) => unreachable!(),
        }
    }
    let cols: Vec<Vec<f64>> = support.iter().map(|&s| g.green_column(s)).collect::<Result<_>>()?;
    // M = I + B · G_SS
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for l in 0..k {
                s += b[i][l] * cols[j][support[l]];
            }
            m[i][j] = s;
        }
    }
    Ok(det_f64(&m))
}

/// Edges removed by the minimal-event construction, as (x, neighbor) pairs.
pub fn minimal_event_deletions(g: &SinkedMultigraph, w: &[usize], xi: &[i64]) -> Result<Vec<(usize, usize)>> {
    let n = g.len();
    if w.len() != xi.len() {
        return invalid("W and ξ differ in length");
    }
    let mut sorted = w.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != w.len() || w.iter().any(|&x| x >= n) {
        return invalid("W must be distinct vertices of G");
    }
    let mut eta = max_stable(g);
    for (&x, &h) in w.iter().zip(xi) {
        if h < 0 || h >= g.deg(x) as i64 {
            return invalid(format!("height {h} at {x} is not a stable height"));
        }
        eta[x] = h;
    }
    let (rec, record) = burning_test(g, &eta)?;
    if !rec {
        return invalid("pattern is not recurrent (extension by maximal heights fails the burning test)");
    }
    for &x in w {
        if eta[x] > 0 {
            eta[x] -= 1;
            let still = is_recurrent(g, &eta);
            eta[x] += 1;
            if still {
                return invalid(format!("pattern is not minimal at vertex {x}"));
            }
        }
    }
    let mut t = vec![0usize; n + 1];
    for (r, round) in record.rounds.iter().enumerate() {
        for &v in round {
            t[v] = r + 1;
        }
    }
    let in_w = |v: usize| w.contains(&v);
    let mut out = Vec::new();
    for (&x, &h) in w.iter().zip(xi) {
        let (ns, ms) = g.neighbor_slices(x);
        let mut later = 0i64;
        let mut earlier: Vec<usize> = Vec::new();
        for (&y, &m) in ns.iter().zip(ms) {
            for _ in 0..m {
                if t[y] >= t[x] {
                    later += 1;
                } else {
                    earlier.push(y);
                }
            }
        }
        if later > h {
            return Err(crate::SandlabError::Internal("burn order inconsistent with heights".into()));
        }
        earlier.sort_by_key(|&y| (!in_w(y), y));
        let keep = (h + 1 - later) as usize;
        out.extend(earlier.into_iter().skip(keep).map(|y| (x, y)));
    }
    Ok(out)
}

/// ν_G[η_W = ξ] for a minimal pattern ξ on W.
pub fn minimal_event_probability(g: &SinkedMultigraph, w: &[usize], xi: &[i64]) -> Result<f64> {
    let del = minimal_event_deletions(g, w, xi)?;
    deletion_ratio(g, &del)
}

#[derive(Clone, Debug, Serialize)]
pub struct Height0 {
    pub n: i64,
    pub value: f64,
}

/// Probability of height 0 at the origin of Box(n) under the uniform recurrent measure.
pub fn height0_probability(n: i64) -> Result<f64> {
    if n < 1 {
        return invalid("height0_probability needs n ≥ 1");
    }
    let g = box_graph(2, n);
    let o = g.vertex_at(&[0, 0]).unwrap();
    let del: Vec<(usize, usize)> =
        [[0, -1], [-1, 0], [0, 1]].iter().map(|j| (o, g.vertex_at(j).unwrap())).collect();
    deletion_ratio(&g, &del)
}
