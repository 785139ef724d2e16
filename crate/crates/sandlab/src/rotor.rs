//! Rotor-router walks, chip-and-rotor stabilization, the sandpile group action
//! on acyclic rotor configurations, and rotor aggregation on Z^d.

use crate::error::{invalid, too_big, Result, SandlabError};
use crate::graphcore::SinkedMultigraph;
use crate::rng::splitmix64;
use serde::Serialize;
use std::collections::{HashSet, VecDeque};

/// Rotor at each non-sink vertex, as an index into its out-edge list.
pub type RotorConfig = Vec<usize>;

/// Advances the rotor at w and moves the chip along it.
pub fn rotor_step(g: &SinkedMultigraph, rho: &[usize], w: usize) -> Result<(RotorConfig, usize)> {
    if w >= g.len() {
        return invalid("chips stop at the sink");
    }
    let mut r = rho.to_vec();
    let heads = g.out_heads(w);
    r[w] = (r[w] + 1) % heads.len();
    let next = heads[r[w]];
    Ok((r, next))
}

/// Routes all chips of η to the sink. Full turns are taken in one go.
pub fn chip_stabilize(g: &SinkedMultigraph, rho: &[usize], eta: &[i64]) -> Result<RotorConfig> {
    let n = g.len();
    if eta.len() != n || rho.len() != n {
        return invalid("length mismatch");
    }
    if eta.iter().any(|&c| c < 0) {
        return invalid("chip counts must be nonnegative");
    }
    let mut r = rho.to_vec();
    let mut chips = eta.to_vec();
    let mut queue: Vec<usize> = (0..n).filter(|&x| chips[x] > 0).collect();
    let mut queued = vec![false; n];
    for &x in &queue {
        queued[x] = true;
    }
    while let Some(x) = queue.pop() {
        queued[x] = false;
        let c = chips[x];
        if c == 0 {
            continue;
        }
        chips[x] = 0;
        let heads = g.out_heads(x);
        let d = heads.len() as i64;
        let (q, rem) = (c / d, c % d);
        let mut send = |y: usize, k: i64, chips: &mut Vec<i64>, queue: &mut Vec<usize>| {
            if y < n && k > 0 {
                chips[y] += k;
                if !queued[y] {
                    queued[y] = true;
                    queue.push(y);
                }
            }
        };
        if q > 0 {
            for &y in heads {
                send(y, q, &mut chips, &mut queue);
            }
        }
        for _ in 0..rem {
            r[x] = (r[x] + 1) % heads.len();
            send(heads[r[x]], 1, &mut chips, &mut queue);
        }
    }
    Ok(r)
}

/// Chip routing one chip at a time in a random order; used to test order independence.
pub fn chip_stabilize_random(g: &SinkedMultigraph, rho: &[usize], eta: &[i64], rng: &mut crate::rng::Rng) -> RotorConfig {
    use rand::Rng as _;
    let n = g.len();
    let mut r = rho.to_vec();
    let mut chips = eta.to_vec();
    loop {
        let live: Vec<usize> = (0..n).filter(|&x| chips[x] > 0).collect();
        if live.is_empty() {
            return r;
        }
        let x = live[rng.gen_range(0..live.len())];
        chips[x] -= 1;
        let (r2, y) = rotor_step(g, &r, x).unwrap();
        r = r2;
        if y < n {
            chips[y] += 1;
        }
    }
}

/// True iff following rotors from every vertex reaches the sink.
pub fn is_acyclic(g: &SinkedMultigraph, rho: &[usize]) -> bool {
    let n = g.len();
    let mut state = vec![0u8; n]; // 0 new, 1 on current path, 2 reaches sink
    for x in 0..n {
        let mut path = Vec::new();
        let mut y = x;
        while y != n && state[y] != 2 {
            if state[y] == 1 {
                return false;
            }
            state[y] = 1;
            path.push(y);
            y = g.out_heads(y)[rho[y]];
        }
        for v in path {
            state[v] = 2;
        }
    }
    true
}

/// Smallest vector ≡ 0 with every entry positive: ε = δ − δ°.
fn zero_class_positive(g: &SinkedMultigraph) -> Result<Vec<i64>> {
    let delta: Vec<i64> = g.degrees().iter().map(|&d| d as i64).collect();
    let (ds, _) = crate::sandpile::stabilize(g, &delta)?;
    Ok(delta.iter().zip(&ds).map(|(a, b)| a - b).collect())
}

/// Action of the class of η (any integer vector) on an acyclic rotor configuration.
pub fn group_action(g: &SinkedMultigraph, eta: &[i64], rho: &[usize]) -> Result<RotorConfig> {
    if !is_acyclic(g, rho) {
        return Err(SandlabError::Precondition("rotor configuration has a cycle".into()));
    }
    if eta.len() != g.len() {
        return invalid("length mismatch");
    }
    let mut rep = eta.to_vec();
    if rep.iter().any(|&c| c < 0) {
        let eps = zero_class_positive(g)?;
        let k = (0..rep.len()).map(|x| (-rep[x] + eps[x] - 1).max(0) / eps[x]).max().unwrap_or(0);
        for x in 0..rep.len() {
            rep[x] += k * eps[x];
        }
    }
    chip_stabilize(g, rho, &rep)
}

/// All acyclic rotor configurations, by brute force.
pub fn enumerate_acyclic(g: &SinkedMultigraph) -> Result<Vec<RotorConfig>> {
    match crate::algebra::stable_count(g) {
        Some(c) if c <= 10_000_000 => {}
        _ => return too_big("rotor enumeration limited to 1e7 configurations"),
    }
    let n = g.len();
    let mut r = vec![0usize; n];
    let mut out = Vec::new();
    loop {
        if is_acyclic(g, &r) {
            out.push(r.clone());
        }
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            r[k] += 1;
            if r[k] < g.deg(k) as usize {
                break;
            }
            r[k] = 0;
        }
    }
}

/// Orbit of ρ under the generators 1_x.
pub fn orbit(g: &SinkedMultigraph, rho: &[usize]) -> Result<HashSet<RotorConfig>> {
    let n = g.len();
    let mut seen = HashSet::new();
    let mut q = VecDeque::new();
    seen.insert(rho.to_vec());
    q.push_back(rho.to_vec());
    while let Some(r) = q.pop_front() {
        for x in 0..n {
            let mut e = vec![0i64; n];
            e[x] = 1;
            let r2 = group_action(g, &e, &r)?;
            if seen.insert(r2.clone()) {
                q.push_back(r2);
            }
        }
    }
    Ok(seen)
}

/// Initial rotor field for aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RotorInit {
    /// Every rotor points in the given direction index.
    Uniform(u8),
    /// Direction drawn from a hash of (seed, site); independent of window size.
    Random(u64),
}

/// Direction k of Z^d in canonical cyclic order: −e_1, …, −e_d, +e_d, …, +e_1.
pub fn direction(d: usize, k: usize) -> (usize, i64) {
    if k < d {
        (k, -1)
    } else {
        (2 * d - 1 - k, 1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub dim: usize,
    /// Occupied sites, sorted.
    pub occupied: Vec<Vec<i64>>,
    /// Final window half-width.
    pub window: i64,
}

/// Unit ball volume ω_d.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

struct Window {
    d: usize,
    r: i64,
    side: usize,
    occ: Vec<bool>,
    rot: Vec<u8>,
}

impl Window {
    fn new(d: usize, r: i64) -> Window {
        let side = (2 * r + 1) as usize;
        let len = side.pow(d as u32);
        Window { d, r, side, occ: vec![false; len], rot: vec![u8::MAX; len] }
    }

    fn index(&self, x: &[i64]) -> usize {
        x.iter().fold(0, |acc, &c| acc * self.side + (c + self.r) as usize)
    }

    fn coords(&self, mut i: usize) -> Vec<i64> {
        let mut x = vec![0; self.d];
        for k in (0..self.d).rev() {
            x[k] = (i % self.side) as i64 - self.r;
            i /= self.side;
        }
        x
    }

    fn grow(&self) -> Window {
        let mut w = Window::new(self.d, 2 * self.r);
        for i in 0..self.occ.len() {
            if self.occ[i] || self.rot[i] != u8::MAX {
                let j = w.index(&self.coords(i));
                w.occ[j] = self.occ[i];
                w.rot[j] = self.rot[i];
            }
        }
        w
    }
}

fn initial_rotor(init: RotorInit, d: usize, x: &[i64]) -> u8 {
    match init {
        RotorInit::Uniform(k) => k % (2 * d) as u8,
        RotorInit::Random(seed) => {
            let mut h = splitmix64(seed);
            for &c in x {
                h = splitmix64(h ^ c as u64);
            }
            (h % (2 * d) as u64) as u8
        }
    }
}

/// Releases n chips one by one from o; each follows rotors until it finds an empty site.
pub fn rotor_aggregate(n: u64, init: RotorInit, d: usize) -> Result<Aggregate> {
    if n == 0 {
        return invalid("need at least one chip");
    }
    if d == 0 {
        return invalid("dimension must be positive");
    }
    if let RotorInit::Uniform(k) = init {
        if k as usize >= 2 * d {
            return invalid("direction index out of range");
        }
    }
    let r0 = (2.0 * (n as f64 / unit_ball_volume(d)).powf(1.0 / d as f64)).ceil() as i64;
    let mut w = Window::new(d, r0.max(2));
    let mut x = vec![0i64; d];
    for _ in 0..n {
        x.iter_mut().for_each(|c| *c = 0);
        loop {
            let i = w.index(&x);
            if !w.occ[i] {
                w.occ[i] = true;
                break;
            }
            if w.rot[i] == u8::MAX {
                w.rot[i] = initial_rotor(init, d, &x);
            }
            w.rot[i] = (w.rot[i] + 1) % (2 * d) as u8;
            let (axis, s) = direction(d, w.rot[i] as usize);
            x[axis] += s;
            if x[axis].abs() >= w.r {
                w = w.grow();
            }
        }
    }
    let mut occupied: Vec<Vec<i64>> = (0..w.occ.len()).filter(|&i| w.occ[i]).map(|i| w.coords(i)).collect();
    occupied.sort();
    Ok(Aggregate { dim: d, occupied, window: w.r })
}
