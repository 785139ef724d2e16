//! Toppling, stabilization, addition operators and avalanche observables.

use crate::error::{invalid, too_big, Result, SandlabError};
use crate::graphcore::SinkedMultigraph;
use crate::rng::{par_replicas, stream};
use crate::treewalk::sample_recurrent;
use rand::Rng as _;
use serde::Serialize;
use std::collections::BTreeMap;

/// Particle counts on the non-sink vertices. Negative entries are only produced
/// by callers that deliberately topple illegally.
pub type Config = Vec<i64>;

pub fn is_stable(g: &SinkedMultigraph, eta: &[i64]) -> bool {
    eta.iter().enumerate().all(|(x, &h)| h < g.deg(x) as i64)
}

/// η^max(x) = deg(x) − 1.
pub fn max_stable(g: &SinkedMultigraph) -> Config {
    g.degrees().iter().map(|&d| d as i64 - 1).collect()
}

pub fn mass(eta: &[i64]) -> i64 {
    eta.iter().sum()
}

fn check_len(g: &SinkedMultigraph, eta: &[i64]) -> Result<()> {
    if eta.len() != g.len() {
        return invalid(format!("configuration has {} entries, graph has {} vertices", eta.len(), g.len()));
    }
    Ok(())
}

fn check_nonneg(eta: &[i64]) -> Result<()> {
    if let Some(x) = eta.iter().position(|&h| h < 0) {
        return invalid(format!("negative height at vertex {x}"));
    }
    Ok(())
}

/// One legal toppling at x.
pub fn topple(g: &SinkedMultigraph, eta: &[i64], x: usize) -> Result<Config> {
    check_len(g, eta)?;
    if x >= g.len() {
        return invalid(format!("vertex {x} out of range"));
    }
    if eta[x] < g.deg(x) as i64 {
        return Err(SandlabError::Precondition(format!(
            "illegal toppling at {x}: {} < deg {}",
            eta[x],
            g.deg(x)
        )));
    }
    let mut out = eta.to_vec();
    apply_topplings(g, &mut out, x, 1);
    Ok(out)
}

#[inline]
fn apply_topplings(g: &SinkedMultigraph, h: &mut [i64], x: usize, k: i64) {
    let n = g.len();
    h[x] -= k * g.deg(x) as i64;
    let (ns, ms) = g.neighbor_slices(x);
    for (&y, &m) in ns.iter().zip(ms) {
        if y < n {
            h[y] += k * m as i64;
        }
    }
}

/// Toppling schedule. Both give the same result by the abelian property.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Topple every currently unstable vertex, round by round.
    Sweep,
    /// One toppling at a time, last in first out.
    Stack,
}

/// Stabilizes in place, adding topplings into `odo`. Vertices listed in
/// `frozen` never topple. Only vertices in `seeds` (or reached from them)
/// are inspected.
pub fn relax_from(
    g: &SinkedMultigraph,
    h: &mut [i64],
    odo: &mut [u64],
    seeds: &[usize],
    frozen: Option<usize>,
    schedule: Schedule,
) -> Result<()> {
    let deg = g.degrees();
    let unstable = |h: &[i64], x: usize| h[x] >= deg[x] as i64 && Some(x) != frozen;
    let mut queued = vec![false; g.len()];
    let mut cur: Vec<usize> = Vec::new();
    for &x in seeds {
        if unstable(h, x) && !queued[x] {
            queued[x] = true;
            cur.push(x);
        }
    }
    let n = g.len();
    match schedule {
        Schedule::Sweep => {
            let mut next = Vec::new();
            while !cur.is_empty() {
                for &x in &cur {
                    queued[x] = false;
                }
                for &x in &cur {
                    let d = deg[x] as i64;
                    if h[x] < d {
                        continue;
                    }
                    let k = h[x] / d;
                    odo[x] = odo[x]
                        .checked_add(k as u64)
                        .ok_or_else(|| SandlabError::Size("odometer overflow".into()))?;
                    h[x] -= k * d;
                    let (ns, ms) = g.neighbor_slices(x);
                    for (&y, &m) in ns.iter().zip(ms) {
                        if y < n {
                            h[y] += k * m as i64;
                            if !queued[y] && unstable(h, y) {
                                queued[y] = true;
                                next.push(y);
                            }
                        }
                    }
                }
                std::mem::swap(&mut cur, &mut next);
                next.clear();
            }
        }
        Schedule::Stack => {
            while let Some(x) = cur.pop() {
                queued[x] = false;
                if !unstable(h, x) {
                    continue;
                }
                odo[x] = odo[x]
                    .checked_add(1)
                    .ok_or_else(|| SandlabError::Size("odometer overflow".into()))?;
                apply_topplings(g, h, x, 1);
                if unstable(h, x) {
                    queued[x] = true;
                    cur.push(x);
                }
                let (ns, _) = g.neighbor_slices(x);
                for &y in ns {
                    if y < n && !queued[y] && unstable(h, y) {
                        queued[y] = true;
                        cur.push(y);
                    }
                }
            }
        }
    }
    Ok(())
}

/// (ξ°, odometer)
pub fn stabilize(g: &SinkedMultigraph, xi: &[i64]) -> Result<(Config, Vec<u64>)> {
    stabilize_with(g, xi, Schedule::Sweep)
}

pub fn stabilize_with(g: &SinkedMultigraph, xi: &[i64], schedule: Schedule) -> Result<(Config, Vec<u64>)> {
    check_len(g, xi)?;
    check_nonneg(xi)?;
    let mut h = xi.to_vec();
    let mut odo = vec![0u64; g.len()];
    let seeds: Vec<usize> = (0..g.len()).collect();
    relax_from(g, &mut h, &mut odo, &seeds, None, schedule)?;
    Ok((h, odo))
}

/// Stabilizes by legal topplings chosen uniformly at random among unstable vertices.
pub fn stabilize_random_order(g: &SinkedMultigraph, xi: &[i64], rng: &mut crate::rng::Rng) -> (Config, Vec<u64>) {
    let mut h = xi.to_vec();
    let mut odo = vec![0u64; g.len()];
    loop {
        let unstable: Vec<usize> = (0..g.len()).filter(|&x| h[x] >= g.deg(x) as i64).collect();
        if unstable.is_empty() {
            return (h, odo);
        }
        let x = unstable[rng.gen_range(0..unstable.len())];
        apply_topplings(g, &mut h, x, 1);
        odo[x] += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvalancheReport {
    pub site: usize,
    pub odometer: Vec<u64>,
    /// Vertices that toppled at least once, increasing id.
    pub toppled: Vec<usize>,
    pub size: u64,
    /// Largest Euclidean distance from the addition site over the toppled set
    /// (lattice graphs); None for general graphs.
    pub radius: Option<f64>,
    pub waves: Vec<Vec<usize>>,
}

impl AvalancheReport {
    fn from_odometer(g: &SinkedMultigraph, site: usize, odometer: Vec<u64>, waves: Vec<Vec<usize>>) -> Self {
        let toppled: Vec<usize> = (0..g.len()).filter(|&x| odometer[x] > 0).collect();
        let size = odometer.iter().sum();
        let radius = g.coords(site).map(|z| {
            toppled
                .iter()
                .map(|&x| {
                    let c = g.coords(x).unwrap();
                    c.iter().zip(&z).map(|(a, b)| ((a - b) * (a - b)) as f64).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max)
        });
        AvalancheReport { site, odometer, toppled, size, radius, waves }
    }

    pub fn cluster_size(&self) -> usize {
        self.toppled.len()
    }
}

/// E_x η = (η + 1_x)° with its avalanche.
pub fn add(g: &SinkedMultigraph, eta: &[i64], x: usize) -> Result<(Config, AvalancheReport)> {
    check_len(g, eta)?;
    check_nonneg(eta)?;
    if x >= g.len() {
        return invalid(format!("vertex {x} out of range"));
    }
    if !is_stable(g, eta) {
        return Err(SandlabError::Precondition("addition operator needs a stable configuration".into()));
    }
    let mut h = eta.to_vec();
    h[x] += 1;
    let mut odo = vec![0u64; g.len()];
    relax_from(g, &mut h, &mut odo, &[x], None, Schedule::Sweep)?;
    let rep = AvalancheReport::from_odometer(g, x, odo, Vec::new());
    Ok((h, rep))
}

/// Adds at x and splits the avalanche into waves: each wave releases one
/// toppling of x and relaxes everything else with x held.
pub fn wave_decompose(g: &SinkedMultigraph, eta: &[i64], x: usize) -> Result<(Config, AvalancheReport)> {
    check_len(g, eta)?;
    check_nonneg(eta)?;
    if x >= g.len() {
        return invalid(format!("vertex {x} out of range"));
    }
    if !is_stable(g, eta) {
        return Err(SandlabError::Precondition("wave decomposition needs a stable configuration".into()));
    }
    let mut h = eta.to_vec();
    h[x] += 1;
    let mut odo = vec![0u64; g.len()];
    let mut waves = Vec::new();
    let d = g.deg(x) as i64;
    while h[x] >= d {
        let mut wave_odo = vec![0u64; g.len()];
        apply_topplings(g, &mut h, x, 1);
        wave_odo[x] = 1;
        let (ns, _) = g.neighbor_slices(x);
        let seeds: Vec<usize> = ns.iter().copied().filter(|&y| y < g.len()).collect();
        relax_from(g, &mut h, &mut wave_odo, &seeds, Some(x), Schedule::Sweep)?;
        let mut wave = Vec::new();
        for (v, &k) in wave_odo.iter().enumerate() {
            if k > 0 {
                if k > 1 {
                    return Err(SandlabError::Internal(format!("vertex {v} toppled {k} times in one wave")));
                }
                wave.push(v);
                odo[v] += k;
            }
        }
        waves.push(wave);
    }
    let rep = AvalancheReport::from_odometer(g, x, odo, waves);
    Ok((h, rep))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainSummary {
    pub steps: u64,
    pub final_state: Config,
    /// Visit frequencies keyed by comma-joined heights; only kept for graphs with at most 16 vertices.
    pub state_frequencies: BTreeMap<String, f64>,
    pub mean_avalanche_size: f64,
    pub mean_cluster_size: f64,
    pub warnings: Vec<String>,
}

fn state_key(eta: &[i64]) -> String {
    eta.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs the sandpile Markov chain from the empty configuration.
/// Frequencies count the states after each step (the initial state when steps = 0).
pub fn markov_run(g: &SinkedMultigraph, p: Option<&[f64]>, steps: u64, seed: u64) -> Result<ChainSummary> {
    let n = g.len();
    let probs: Vec<f64> = match p {
        Some(p) => {
            if p.len() != n || p.iter().any(|&v| !(v >= 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return invalid("p must be a probability vector on the vertices");
            }
            p.to_vec()
        }
        None => vec![1.0 / n as f64; n],
    };
    let mut warnings = Vec::new();
    if probs.iter().any(|&v| v == 0.0) {
        warnings.push("p has zeros; uniform stationarity is only guaranteed for positive p".into());
    }
    let mut cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    for v in &probs {
        acc += v;
        cdf.push(acc);
    }
    let track = n <= 16;
    let mut rng = stream(seed, 0);
    let mut eta = vec![0i64; n];
    let mut freq: BTreeMap<String, u64> = BTreeMap::new();
    let mut sum_s = 0u64;
    let mut sum_av = 0u64;
    let mut odo = vec![0u64; n];
    if steps == 0 && track {
        freq.insert(state_key(&eta), 1);
    }
    for _ in 0..steps {
        let u: f64 = rng.gen::<f64>() * acc;
        let x = cdf.partition_point(|&c| c <= u).min(n - 1);
        eta[x] += 1;
        odo.iter_mut().for_each(|v| *v = 0);
        relax_from(g, &mut eta, &mut odo, &[x], None, Schedule::Sweep)?;
        sum_s += odo.iter().sum::<u64>();
        sum_av += odo.iter().filter(|&&k| k > 0).count() as u64;
        if track {
            *freq.entry(state_key(&eta)).or_default() += 1;
        }
    }
    let total = steps.max(1) as f64;
    Ok(ChainSummary {
        steps,
        final_state: eta,
        state_frequencies: freq.into_iter().map(|(k, v)| (k, v as f64 / total)).collect(),
        mean_avalanche_size: if steps > 0 { sum_s as f64 / steps as f64 } else { 0.0 },
        mean_cluster_size: if steps > 0 { sum_av as f64 / steps as f64 } else { 0.0 },
        warnings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DharRow {
    pub vertex: usize,
    pub mean_topplings: f64,
    pub green: f64,
    pub std_err: f64,
    pub z: f64,
}

/// Mean odometer of an avalanche from x under exact stationary samples, against (Δ′)⁻¹_{x·}.
pub fn dhar_formula_check(g: &SinkedMultigraph, x: usize, samples: usize, seed: u64) -> Result<Vec<DharRow>> {
    if x >= g.len() {
        return invalid(format!("vertex {x} out of range"));
    }
    if samples < 2 {
        return invalid("need at least two samples");
    }
    let green = g.green_column(x)?;
    let n = g.len();
    let workers = crate::rng::thread_budget().max(1);
    let per = samples.div_ceil(workers);
    let partial = par_replicas(workers, |w| {
        let mut s1 = vec![0f64; n];
        let mut s2 = vec![0f64; n];
        let lo = w * per;
        let hi = ((w + 1) * per).min(samples);
        for i in lo..hi {
            let mut rng = stream(seed, i as u64);
            let eta = sample_recurrent(g, &mut rng);
            let (_, rep) = add(g, &eta, x).expect("recurrent input is stable");
            for (v, &k) in rep.odometer.iter().enumerate() {
                let k = k as f64;
                s1[v] += k;
                s2[v] += k * k;
            }
        }
        (s1, s2)
    });
    let mut s1 = vec![0f64; n];
    let mut s2 = vec![0f64; n];
    for (a, b) in partial {
        for v in 0..n {
            s1[v] += a[v];
            s2[v] += b[v];
        }
    }
    let m = samples as f64;
    Ok((0..n)
        .map(|v| {
            let mean = s1[v] / m;
            let var = ((s2[v] / m - mean * mean) * m / (m - 1.0)).max(0.0);
            let se = (var / m).sqrt();
            let diff = mean - green[v];
            let z = if se > 0.0 {
                diff / se
            } else if diff.abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            DharRow { vertex: v, mean_topplings: mean, green: green[v], std_err: se, z }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct AvalancheRow {
    pub n: i64,
    pub samples: usize,
    pub mean_size: f64,
    pub mean_size_sq: f64,
    pub mean_cluster: f64,
    pub mean_radius: f64,
    pub size_q50: u64,
    pub size_q90: u64,
    pub size_q99: u64,
}

/// Avalanche statistics for an addition at the origin of Box(n) under exact stationary samples.
pub fn avalanche_statistics(n_list: &[i64], dim: usize, samples: usize, seed: u64) -> Result<Vec<AvalancheRow>> {
    if samples == 0 {
        return Ok(Vec::new());
    }
    let mut rows = Vec::new();
    for &n in n_list {
        if n < 0 {
            return invalid("box radius must be nonnegative");
        }
        let g = crate::graphcore::box_graph(dim, n);
        let o = g.vertex_at(&vec![0; dim]).unwrap();
        let base = seed ^ crate::rng::splitmix64(n as u64);
        let obs = par_replicas(samples, |i| {
            let mut rng = stream(base, i as u64);
            let eta = sample_recurrent(&g, &mut rng);
            let (_, rep) = add(&g, &eta, o).expect("recurrent input is stable");
            (rep.size, rep.cluster_size(), rep.radius.unwrap_or(0.0))
        });
        let m = samples as f64;
        let mut sizes: Vec<u64> = obs.iter().map(|o| o.0).collect();
        sizes.sort_unstable();
        let q = |p: f64| sizes[((p * (samples - 1) as f64).round() as usize).min(samples - 1)];
        rows.push(AvalancheRow {
            n,
            samples,
            mean_size: obs.iter().map(|o| o.0 as f64).sum::<f64>() / m,
            mean_size_sq: obs.iter().map(|o| (o.0 as f64).powi(2)).sum::<f64>() / m,
            mean_cluster: obs.iter().map(|o| o.1 as f64).sum::<f64>() / m,
            mean_radius: obs.iter().map(|o| o.2).sum::<f64>() / m,
            size_q50: q(0.5),
            size_q90: q(0.9),
            size_q99: q(0.99),
        });
    }
    Ok(rows)
}

/// Exhaustive check of the least action principle for ξ: the legal odometer is
/// below every toppling vector u ≥ 0 for which ξ − uΔ′ is stable.
///
/// The feasible set is closed under pointwise minimum, so a violating u exists
/// iff one exists inside the box [0, max odometer]^V; only that box is searched.
pub fn least_action_check(g: &SinkedMultigraph, xi: &[i64]) -> Result<bool> {
    check_len(g, xi)?;
    if g.len() > 8 {
        return too_big("least action search limited to 8 vertices");
    }
    let (_, odo) = stabilize(g, xi)?;
    let top = odo.iter().copied().max().unwrap_or(0) as usize;
    let n = g.len();
    let space = (top + 1).checked_pow(n as u32).unwrap_or(usize::MAX);
    if space > 10_000_000 {
        return too_big(format!("search space {space} exceeds 1e7"));
    }
    let lap = g.reduced_laplacian();
    let mut u = vec![0usize; n];
    loop {
        let stable = (0..n).all(|x| {
            let h = xi[x] - (0..n).map(|y| u[y] as i64 * lap[y][x]).sum::<i64>();
            h < g.deg(x) as i64
        });
        if stable && (0..n).any(|x| (u[x] as u64) < odo[x]) {
            return Ok(false);
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(true);
            }
            u[k] += 1;
            if u[k] <= top {
                break;
            }
            u[k] = 0;
            k += 1;
        }
    }
}
