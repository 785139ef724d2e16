//! Growth from a point source, divisible sandpile, explosions and stabilizability.

use crate::error::{invalid, too_big, Result};
use crate::graphcore::{wired_box, GridSpec};
use crate::rng::splitmix64;
use crate::rotor::unit_ball_volume;
use crate::sandpile::{dhar_formula_check, DharRow};
use serde::Serialize;
use std::collections::VecDeque;

/// Largest window side length tried before giving up.
const MAX_CELLS: usize = 60_000_000;

/// Cube |x|∞ ≤ r stored with one absorbing padding layer.
#[derive(Clone, Debug)]
struct Grid {
    d: usize,
    r: i64,
    strides: Vec<usize>,
    /// 0 padding, 1 interior, 2 outer layer |x|∞ = r.
    kind: Vec<u8>,
}

impl Grid {
    fn new(d: usize, r: i64) -> Result<Grid> {
        let side = (2 * r + 3) as usize;
        let len = (side as f64).powi(d as i32);
        if len > MAX_CELLS as f64 {
            return too_big(format!("window of radius {r} in dimension {d} exceeds the memory budget"));
        }
        let len = len as usize;
        let mut strides = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * side;
        }
        let mut g = Grid { d, r, strides, kind: vec![0; len] };
        for i in 0..len {
            let x = g.coords(i);
            let m = x.iter().map(|c| c.abs()).max().unwrap_or(0);
            g.kind[i] = if m > r {
                0
            } else if m == r {
                2
            } else {
                1
            };
        }
        Ok(g)
    }

    fn len(&self) -> usize {
        self.kind.len()
    }

    fn index(&self, x: &[i64]) -> usize {
        x.iter().zip(&self.strides).map(|(&c, &s)| (c + self.r + 1) as usize * s).sum()
    }

    fn coords(&self, mut i: usize) -> Vec<i64> {
        let mut x = vec![0; self.d];
        for k in 0..self.d {
            x[k] = (i / self.strides[k]) as i64 - self.r - 1;
            i %= self.strides[k];
        }
        x
    }

}

/// Topples every site with height ≥ 2d until stable. Returns false, leaving the
/// state partially relaxed, as soon as a site of the outer layer topples and `stop_on_edge` is set.
fn relax_grid(g: &Grid, h: &mut [i64], odo: &mut [u64], seeds: &[usize], stop_on_edge: bool, budget: u64) -> Result<bool> {
    let two_d = 2 * g.d as i64;
    let mut queued = vec![false; g.len()];
    let mut q: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        if g.kind[s] != 0 && h[s] >= two_d && !queued[s] {
            queued[s] = true;
            q.push_back(s);
        }
    }
    let mut edge_hit = false;
    let mut total: u64 = 0;
    while let Some(x) = q.pop_front() {
        queued[x] = false;
        let k = h[x] / two_d;
        if k <= 0 {
            continue;
        }
        if g.kind[x] == 2 {
            edge_hit = true;
            if stop_on_edge {
                return Ok(false);
            }
        }
        h[x] -= k * two_d;
        odo[x] += k as u64;
        total += k as u64;
        if total > budget {
            return too_big(format!("more than {budget} topplings"));
        }
        for &s in &g.strides {
            for y in [x - s, x + s] {
                h[y] += k;
                if g.kind[y] != 0 && !queued[y] && h[y] >= two_d {
                    queued[y] = true;
                    q.push_back(y);
                }
            }
        }
    }
    Ok(!edge_hit)
}

#[derive(Clone, Debug, Serialize)]
pub struct RelaxationResult {
    pub dim: usize,
    pub n: u64,
    pub background: i64,
    /// Window half-width used.
    pub window: i64,
    /// Sites of |x|∞ ≤ window in row-major order.
    pub heights: Vec<i64>,
    pub odometer: Vec<u64>,
    pub visited: Vec<bool>,
}

impl RelaxationResult {
    pub fn side(&self) -> usize {
        (2 * self.window + 1) as usize
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.dim || x.iter().any(|c| c.abs() > self.window) {
            return None;
        }
        let s = self.side();
        Some(x.iter().fold(0, |acc, &c| acc * s + (c + self.window) as usize))
    }

    pub fn coords(&self, mut i: usize) -> Vec<i64> {
        let s = self.side();
        let mut x = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            x[k] = (i % s) as i64 - self.window;
            i /= s;
        }
        x
    }

    pub fn height(&self, x: &[i64]) -> i64 {
        self.index(x).map_or(self.background, |i| self.heights[i])
    }

    pub fn odometer_at(&self, x: &[i64]) -> u64 {
        self.index(x).map_or(0, |i| self.odometer[i])
    }

    pub fn visited_sites(&self) -> Vec<Vec<i64>> {
        (0..self.visited.len()).filter(|&i| self.visited[i]).map(|i| self.coords(i)).collect()
    }
}

/// Stabilizes n particles at o on the background h̄ of Z^d.
pub fn relax_point_mass(n: u64, h: i64, d: usize) -> Result<RelaxationResult> {
    if d == 0 {
        return invalid("dimension must be positive");
    }
    let top = 2 * d as i64 - 1;
    if h >= top {
        return invalid(format!("background {h} ≥ 2d−1 is explosive; refusing"));
    }
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let r = (d as f64 + 1.0) / (top - h) as f64 * (n as f64 / unit_ball_volume(d)).powf(1.0 / d as f64);
    let mut radius = (r.ceil() as i64 + 2).max(2);
    loop {
        let g = Grid::new(d, radius)?;
        let mut heights: Vec<i64> = g.kind.iter().map(|&k| if k == 0 { 0 } else { h }).collect();
        let o = g.index(&vec![0; d]);
        heights[o] += n as i64;
        let mut odo = vec![0u64; g.len()];
        if relax_grid(&g, &mut heights, &mut odo, &[o], true, u64::MAX)? {
            return Ok(extract(&g, n, h, &heights, &odo));
        }
        radius *= 2;
    }
}

fn extract(g: &Grid, n: u64, h: i64, heights: &[i64], odo: &[u64]) -> RelaxationResult {
    let side = (2 * g.r + 1) as usize;
    let len = side.pow(g.d as u32);
    let mut res = RelaxationResult {
        dim: g.d,
        n,
        background: h,
        window: g.r,
        heights: vec![0; len],
        odometer: vec![0; len],
        visited: vec![false; len],
    };
    for i in 0..len {
        let x = res.coords(i);
        let j = g.index(&x);
        res.heights[i] = heights[j];
        res.odometer[i] = odo[j];
        let mut vis = odo[j] > 0 || x.iter().all(|&c| c == 0);
        for (k, &s) in g.strides.iter().enumerate() {
            let _ = k;
            vis |= odo[j - s] > 0 || odo[j + s] > 0;
        }
        res.visited[i] = vis;
    }
    res
}

/// Euclidean inradius min{|x| : x ∉ A} and outradius max{|x| : x ∈ A} of a finite set.
pub fn shape_radii(dim: usize, sites: &[Vec<i64>]) -> (f64, f64) {
    let norm = |x: &[i64]| x.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
    let outer = sites.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let r = sites.iter().flat_map(|x| x.iter().map(|c| c.abs())).max().unwrap_or(0) + 1;
    let set: std::collections::HashSet<&Vec<i64>> = sites.iter().collect();
    let mut inner = f64::INFINITY;
    let side = 2 * r + 1;
    let total = side.pow(dim as u32);
    let mut x = vec![0i64; dim];
    for mut i in 0..total {
        for c in x.iter_mut() {
            *c = i % side - r;
            i /= side;
        }
        if !set.contains(&x) {
            inner = inner.min(norm(&x));
        }
    }
    (inner, outer)
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisibleResult {
    pub dim: usize,
    pub m: f64,
    pub window: i64,
    pub mass: Vec<f64>,
    pub occupied: Vec<Vec<i64>>,
    pub sweeps: usize,
    pub total_mass: f64,
}

/// Divisible sandpile from mass m at o: excess above 1 is split equally among the 2d neighbors.
pub fn divisible_sandpile(m: f64, d: usize, tol: f64) -> Result<DivisibleResult> {
    if !(tol > 0.0) {
        return invalid("tol must be positive");
    }
    if !(m >= 0.0 && m.is_finite()) || d == 0 {
        return invalid("need finite m ≥ 0 and d ≥ 1");
    }
    let mut radius = ((m / unit_ball_volume(d)).powf(1.0 / d as f64).ceil() as i64 + 3).max(2);
    loop {
        let g = Grid::new(d, radius)?;
        let mut mass = vec![0.0f64; g.len()];
        let o = g.index(&vec![0; d]);
        mass[o] = m;
        let share = 1.0 / (2 * d) as f64;
        let mut active: Vec<usize> = vec![o];
        let mut flag = vec![false; g.len()];
        let mut sweeps = 0;
        let mut escaped = false;
        loop {
            sweeps += 1;
            let mut worst: f64 = 0.0;
            let mut next = Vec::with_capacity(active.len());
            active.sort_unstable();
            for &x in &active {
                flag[x] = false;
            }
            for &x in &active {
                let e = mass[x] - 1.0;
                if e <= 0.0 {
                    continue;
                }
                if g.kind[x] == 2 {
                    escaped = true;
                    break;
                }
                mass[x] = 1.0;
                let part = e * share;
                for &s in &g.strides {
                    for y in [x - s, x + s] {
                        mass[y] += part;
                    }
                }
                worst = worst.max(e);
                for &s in &g.strides {
                    for y in [x - s, x + s] {
                        if !flag[y] && mass[y] > 1.0 {
                            flag[y] = true;
                            next.push(y);
                        }
                    }
                }
                if !flag[x] && mass[x] > 1.0 {
                    flag[x] = true;
                    next.push(x);
                }
            }
            if escaped {
                break;
            }
            let max_excess = next.iter().map(|&y| mass[y] - 1.0).fold(0.0, f64::max);
            active = next;
            if max_excess < tol || active.is_empty() {
                let _ = worst;
                break;
            }
        }
        if escaped || g.kind.iter().zip(&mass).any(|(&k, &v)| k == 2 && v >= 1.0 - tol) {
            radius *= 2;
            continue;
        }
        let side = (2 * radius + 1) as usize;
        let len = side.pow(d as u32);
        let mut out = vec![0.0; len];
        let mut occupied = Vec::new();
        let mut x = vec![0i64; d];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut t = i;
            for k in (0..d).rev() {
                x[k] = (t % side) as i64 - radius;
                t /= side;
            }
            *slot = mass[g.index(&x)];
            if *slot >= 1.0 - tol {
                occupied.push(x.clone());
            }
        }
        let total_mass = mass.iter().sum();
        return Ok(DivisibleResult { dim: d, m, window: radius, mass: out, occupied, sweeps, total_mass });
    }
}

/// Cubic mesh [−a, a]^d cut into k^d equal cells.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Mesh {
    pub half_width: f64,
    pub cells: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Profile {
    pub n: u64,
    pub dim: usize,
    pub mesh: Mesh,
    /// Cell averages of the rescaled final configuration, row-major.
    pub values: Vec<f64>,
    pub integral: f64,
}

impl Profile {
    pub fn l1_distance(&self, other: &Profile) -> Result<f64> {
        if self.values.len() != other.values.len() || self.mesh.cells != other.mesh.cells {
            return invalid("profiles live on different meshes");
        }
        let vol = (2.0 * self.mesh.half_width / self.mesh.cells as f64).powi(self.dim as i32);
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * vol)
    }
}

/// s̄_n(x) = s_n(n^{1/d} x) averaged over mesh cells by exact overlap.
pub fn scaled_profile(n: u64, d: usize, mesh: Mesh) -> Result<Profile> {
    if mesh.cells == 0 || !(mesh.half_width > 0.0) {
        return invalid("mesh needs cells and a positive half width");
    }
    let res = relax_point_mass(n, 0, d)?;
    let scale = (n as f64).powf(1.0 / d as f64);
    let delta = 2.0 * mesh.half_width / mesh.cells as f64;
    let cell_vol = delta.powi(d as i32);
    let mut values = vec![0.0; mesh.cells.pow(d as u32)];
    for (i, &h) in res.heights.iter().enumerate() {
        if h == 0 {
            continue;
        }
        let x = res.coords(i);
        // per-axis list of (cell, overlap length)
        let axes: Vec<Vec<(usize, f64)>> = x
            .iter()
            .map(|&c| {
                let lo = (c as f64 - 0.5) / scale + mesh.half_width;
                let hi = (c as f64 + 0.5) / scale + mesh.half_width;
                let a = (lo / delta).floor().max(0.0) as usize;
                let b = ((hi / delta).ceil() as usize).min(mesh.cells);
                (a..b)
                    .filter_map(|j| {
                        let l = (lo.max(j as f64 * delta) - hi.min((j + 1) as f64 * delta)).min(0.0).abs();
                        (l > 0.0).then_some((j, l))
                    })
                    .collect()
            })
            .collect();
        let mut stack: Vec<(usize, usize, f64)> = vec![(0, 0, 1.0)];
        while let Some((k, idx, w)) = stack.pop() {
            if k == d {
                values[idx] += h as f64 * w / cell_vol;
                continue;
            }
            for &(j, l) in &axes[k] {
                stack.push((k + 1, idx * mesh.cells + j, w * l));
            }
        }
    }
    let integral = values.iter().sum::<f64>() * cell_vol;
    Ok(Profile { n, dim: d, mesh, values, integral })
}

/// Stable backgrounds for the explosion probe.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum Background {
    Constant(i64),
    /// h + 1 on sites none of whose coordinates is divisible by m.
    Lattice { h: i64, m: i64 },
    /// h + Bernoulli(ε), drawn from a hash of (seed, site).
    Bernoulli { h: i64, eps: f64, seed: u64 },
}

fn site_uniform(seed: u64, x: &[i64]) -> f64 {
    let mut z = splitmix64(seed);
    for &c in x {
        z = splitmix64(z ^ c as u64);
    }
    (z >> 11) as f64 / (1u64 << 53) as f64
}

impl Background {
    pub fn at(&self, x: &[i64]) -> i64 {
        match *self {
            Background::Constant(h) => h,
            Background::Lattice { h, m } => h + x.iter().all(|&c| c.rem_euclid(m) != 0) as i64,
            Background::Bernoulli { h, eps, seed } => h + (site_uniform(seed, x) < eps) as i64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    StabilizedWithin,
    ReachedBoundary,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExplosionVerdict {
    pub outcome: Outcome,
    pub radius: i64,
    pub topplings: u64,
    pub caveat: &'static str,
}

const CAVEAT: &str = "finite-window evidence only: reaching the boundary suggests but does not prove explosion";

/// Adds n chips at o on the background inside |x|∞ ≤ max_radius and reports whether topplings reach the edge.
pub fn explosion_probe(bg: Background, n: u64, max_radius: i64, d: usize) -> Result<ExplosionVerdict> {
    if d == 0 || max_radius < 1 {
        return invalid("need d ≥ 1 and a positive radius");
    }
    if let Background::Lattice { m, .. } = bg {
        if m < 1 {
            return invalid("Λ(m) needs m ≥ 1");
        }
    }
    if let Background::Bernoulli { eps, .. } = bg {
        if !(0.0..=1.0).contains(&eps) {
            return invalid("ε must lie in [0, 1]");
        }
    }
    let g = Grid::new(d, max_radius)?;
    let mut h = vec![0i64; g.len()];
    for i in 0..g.len() {
        if g.kind[i] != 0 {
            let v = bg.at(&g.coords(i));
            if v < 0 || v >= 2 * d as i64 {
                return invalid("background must be stable and nonnegative");
            }
            h[i] = v;
        }
    }
    let o = g.index(&vec![0; d]);
    h[o] += n as i64;
    let mut odo = vec![0u64; g.len()];
    let inside = relax_grid(&g, &mut h, &mut odo, &[o], true, u64::MAX)?;
    Ok(ExplosionVerdict {
        outcome: if inside { Outcome::StabilizedWithin } else { Outcome::ReachedBoundary },
        radius: max_radius,
        topplings: odo.iter().sum(),
        caveat: CAVEAT,
    })
}

/// I.i.d. law of initial heights: (height, probability).
#[derive(Clone, Debug, Serialize)]
pub struct MassLaw(pub Vec<(i64, f64)>);

impl MassLaw {
    pub fn mean(&self) -> f64 {
        self.0.iter().map(|&(h, p)| h as f64 * p).sum()
    }

    fn validate(&self) -> Result<()> {
        let s: f64 = self.0.iter().map(|p| p.1).sum();
        if self.0.is_empty() || (s - 1.0).abs() > 1e-9 || self.0.iter().any(|&(h, p)| h < 0 || p < 0.0) {
            return invalid("mass law needs nonnegative heights and probabilities summing to 1");
        }
        Ok(())
    }

    fn sample(&self, u: f64) -> i64 {
        let mut acc = 0.0;
        for &(h, p) in &self.0 {
            acc += p;
            if u < acc {
                return h;
            }
        }
        self.0.last().unwrap().0
    }

    /// Height at site x; nested boxes share one sample.
    pub fn at(&self, seed: u64, x: &[i64]) -> i64 {
        self.sample(site_uniform(seed, x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TraceVerdict {
    Bounded,
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeTrace {
    pub dim: usize,
    pub seed: u64,
    pub sizes: Vec<i64>,
    pub odometer_at_origin: Vec<u64>,
    pub verdict: TraceVerdict,
    pub caveat: &'static str,
}

/// Bounded if the largest box leaves the origin odometer unchanged; diverging if the
/// trace is nondecreasing and the largest box still raises it.
pub fn classify_trace(t: &[u64]) -> TraceVerdict {
    let k = t.len();
    if k < 2 || t.windows(2).any(|w| w[1] < w[0]) {
        TraceVerdict::Inconclusive
    } else if t[k - 1] == t[k - 2] {
        TraceVerdict::Bounded
    } else {
        TraceVerdict::Diverging
    }
}

/// Odometer of the stabilization of η on {0..n−1} with absorbing ends (d = 1, threshold 2).
///
/// Starts from the floor of the real obstacle solution, which never exceeds the
/// odometer, then finishes with legal topplings.
pub fn odometer_1d(eta: &[i64]) -> Vec<u64> {
    let n = eta.len();
    if n == 0 {
        return Vec::new();
    }
    // p(−1) = p(0) = 0, p(i+1) = 2p(i) − p(i−1) + f(i), f = 1 − η; positions −1..=n
    let mut p = vec![0i128; n + 2];
    for i in 0..n {
        p[i + 2] = 2 * p[i + 1] - p[i] + (1 - eta[i]) as i128;
    }
    let big_n = (n + 1) as i128;
    // (n+1)·w at position j ∈ 0..=n+1 (j = i + 1)
    let w: Vec<i128> = (0..n + 2).map(|j| big_n * p[j] - p[n + 1] * j as i128).collect();
    // least concave majorant of −w
    let mut hull: Vec<usize> = Vec::new();
    for j in 0..n + 2 {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or below the chord a–j
            let lhs = (-w[b] + w[a]) * (j - a) as i128;
            let rhs = (-w[j] + w[a]) * (b - a) as i128;
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut u = vec![0i64; n + 2];
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = (b - a) as i128;
        for j in a..=b {
            // (n+1)(b−a)·u_R = (b−a)w(j) + (b−a)(−w(a)) + (−w(b) + w(a))(j − a)
            let num = len * w[j] - len * w[a] + (w[a] - w[b]) * (j - a) as i128;
            let den = big_n * len;
            u[j] = num.div_euclid(den).max(0) as i64;
        }
    }
    u[0] = 0;
    u[n + 1] = 0;
    let mut h: Vec<i64> = (0..n).map(|i| eta[i] + u[i] + u[i + 2] - 2 * u[i + 1]).collect();
    let mut odo: Vec<u64> = (0..n).map(|i| u[i + 1] as u64).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| h[i] >= 2).collect();
    while let Some(i) = stack.pop() {
        let k = h[i] / 2;
        if k <= 0 {
            continue;
        }
        h[i] -= 2 * k;
        odo[i] += k as u64;
        if i > 0 {
            h[i - 1] += k;
            if h[i - 1] >= 2 {
                stack.push(i - 1);
            }
        }
        if i + 1 < n {
            h[i + 1] += k;
            if h[i + 1] >= 2 {
                stack.push(i + 1);
            }
        }
    }
    odo
}

/// Odometer at o after stabilizing an i.i.d. sample on Box(L) with absorbing boundary, for each L.
pub fn stabilizability_probe(d: usize, law: &MassLaw, sizes: &[i64], seed: u64) -> Result<ProbeTrace> {
    law.validate()?;
    if sizes.iter().any(|&l| l < 0) || sizes.windows(2).any(|w| w[1] < w[0]) {
        return invalid("box sizes must be nonnegative and nondecreasing");
    }
    let mut trace = Vec::with_capacity(sizes.len());
    for &l in sizes {
        if d == 1 {
            let eta: Vec<i64> = (-l..=l).map(|x| law.at(seed, &[x])).collect();
            trace.push(odometer_1d(&eta)[l as usize]);
        } else {
            let g = Grid::new(d, l)?;
            let mut h = vec![0i64; g.len()];
            let mut seeds = Vec::new();
            for i in 0..g.len() {
                if g.kind[i] != 0 {
                    h[i] = law.at(seed, &g.coords(i));
                    seeds.push(i);
                }
            }
            let mut odo = vec![0u64; g.len()];
            relax_grid(&g, &mut h, &mut odo, &seeds, false, 1 << 40)?;
            trace.push(odo[g.index(&vec![0; d])]);
        }
    }
    Ok(ProbeTrace {
        dim: d,
        seed,
        sizes: sizes.to_vec(),
        verdict: classify_trace(&trace),
        odometer_at_origin: trace,
        caveat: "finite boxes only: a bounded or growing trace is consistent with, not proof of, (non-)stabilizability",
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DissipativeCheck {
    pub gamma: u32,
    pub rows: Vec<DharRow>,
    /// Exact expected avalanche size Σ_y G(x, y).
    pub mean_size_exact: f64,
    /// Green values G(x, y) against the sup-distance |y − x|∞.
    pub decay: Vec<(i64, f64)>,
}

/// Dhar's formula on the dissipative box with γ extra sink edges per site.
pub fn dissipative_green_check(gamma: u32, d: usize, n: i64, x: &[i64], samples: usize, seed: u64) -> Result<DissipativeCheck> {
    if gamma < 1 {
        return invalid("γ must be at least 1");
    }
    let g = wired_box(&GridSpec::centered(d, n, gamma))?;
    let Some(xi) = g.vertex_at(x) else {
        return invalid("x outside the box");
    };
    let col = g.green_column(xi)?;
    let mut best: std::collections::BTreeMap<i64, f64> = Default::default();
    for (v, &val) in col.iter().enumerate() {
        let y = g.coords(v).unwrap();
        let dist = y.iter().zip(x).map(|(a, b)| (a - b).abs()).max().unwrap_or(0);
        let e = best.entry(dist).or_insert(0.0);
        *e = e.max(val);
    }
    let rows = if samples >= 2 { dhar_formula_check(&g, xi, samples, seed)? } else { Vec::new() };
    Ok(DissipativeCheck { gamma, rows, mean_size_exact: col.iter().sum(), decay: best.into_iter().collect() })
}
