//! `sandlab` command line: one subcommand per library area, artifacts written
//! atomically into `--out` together with a `manifest.json`.

use clap::{Args, Parser, Subcommand, ValueEnum};
use sandlab::error::{Result, SandlabError};
use sandlab::exact2d;
use sandlab::growth::{self, Background, MassLaw, Mesh};
use sandlab::io::{csv, json, pgm, write_atomic, RunManifest};
use sandlab::{algebra, graphcore, rotor, sandpile, treewalk, GridSpec, SinkedMultigraph};
use serde_json::{json as j, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "sandlab", version, about = "Abelian sandpile laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Box radius n of [-n, n]^d.
    #[arg(long = "box", global = true, default_value_t = 4)]
    pub box_n: i64,
    #[arg(long, global = true, default_value_t = 2)]
    pub dim: usize,
    /// Extra sink edges per vertex.
    #[arg(long, global = true, default_value_t = 0)]
    pub gamma: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Format of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a wired box, dump it and report det Δ′ and the group invariants.
    Graph,
    /// Stabilize `--add` chips at the origin on a constant background.
    Stabilize {
        #[arg(long, default_value_t = 0)]
        add: i64,
        #[arg(long, default_value_t = 0)]
        background: i64,
    },
    /// Run the sandpile Markov chain from the empty configuration.
    Chain {
        #[arg(long, default_value_t = 1000)]
        steps: u64,
    },
    /// Exact stationary samples: height frequencies in a central window.
    Sample {
        /// Window half-width (default box/4).
        #[arg(long)]
        window: Option<i64>,
    },
    /// Burning bijection of a sampled recurrent configuration.
    Bijection,
    /// Sandpile group: identity image, invariants, order of a sample.
    Group,
    /// Uniform spanning tree; with --samples also the looping constant estimate.
    Tree,
    /// Rotor-router aggregation from the origin.
    Rotor {
        #[arg(long, default_value_t = 1000)]
        n: u64,
        /// Initial rotor direction index, or omit for hashed random rotors.
        #[arg(long)]
        direction: Option<u8>,
    },
    /// Exact planar quantities.
    Exact2d {
        /// Write the full constants report.
        #[arg(long)]
        report: bool,
        /// Box radius of the height-zero determinant.
        #[arg(long, default_value_t = 64)]
        n: i64,
        /// Radius of the kernel table written as CSV.
        #[arg(long, default_value_t = 10)]
        kernel_radius: usize,
        /// Truncation of the M^o sum.
        #[arg(long, default_value_t = 100)]
        mo_l: i64,
    },
    /// Point sources, divisible sandpile, explosions and stabilizability.
    Growth {
        #[arg(long, value_enum, default_value_t = GrowthKind::Point)]
        kind: GrowthKind,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        /// Background height.
        #[arg(long, default_value_t = 0)]
        h: i64,
        /// Divisible sandpile mass.
        #[arg(long, default_value_t = 100.0)]
        m: f64,
        /// Probe radius.
        #[arg(long, default_value_t = 100)]
        radius: i64,
        /// Bernoulli density of the explosion background (uses h + Bernoulli(eps)).
        #[arg(long)]
        eps: Option<f64>,
        /// Λ(m) period for the explosion background (uses h + 1_Λ(m)).
        #[arg(long)]
        lattice: Option<i64>,
        /// Mass law "height:prob,height:prob".
        #[arg(long, default_value = "0:0.5,2:0.5")]
        law: String,
        /// Nested box sizes for the stabilizability probe.
        #[arg(long, default_value = "100,1000,10000")]
        sizes: String,
        /// Mesh cells per axis for the scaled profile.
        #[arg(long, default_value_t = 40)]
        cells: usize,
    },
    /// Short table of the closed-form constants and a few exact checks.
    Report,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthKind {
    Point,
    Divisible,
    Profile,
    Explosion,
    Probe,
    Dissipative,
}

struct Output {
    dir: Option<PathBuf>,
    manifest: RunManifest,
}

impl Output {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            write_atomic(&dir.join(name), contents)?;
            self.manifest.outputs.push(name.to_string());
        }
        Ok(())
    }

    fn finish(mut self, summary: Value, format: Format) -> Result<String> {
        self.manifest.finish();
        if let Some(dir) = &self.dir {
            write_atomic(&dir.join("manifest.json"), &json(&self.manifest)?)?;
        }
        match format {
            Format::Json => json(&summary),
            Format::Text => Ok(text_summary(&summary, "")),
        }
    }
}

fn text_summary(v: &Value, prefix: &str) -> String {
    match v {
        Value::Object(m) => m
            .iter()
            .map(|(k, x)| {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_summary(x, &p)
            })
            .collect(),
        other => format!("{prefix} = {other}\n"),
    }
}

fn flags(cli: &Cli) -> BTreeMap<String, String> {
    let c = &cli.common;
    let mut f = BTreeMap::new();
    f.insert("box".into(), c.box_n.to_string());
    f.insert("dim".into(), c.dim.to_string());
    f.insert("gamma".into(), c.gamma.to_string());
    f.insert("command".into(), format!("{:?}", cli.command));
    if let Some(s) = c.samples {
        f.insert("samples".into(), s.to_string());
    }
    if let Some(t) = c.tol {
        f.insert("tol".into(), t.to_string());
    }
    if let Some(r) = c.r {
        f.insert("r".into(), r.to_string());
    }
    f
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Graph => "graph",
        Command::Stabilize { .. } => "stabilize",
        Command::Chain { .. } => "chain",
        Command::Sample { .. } => "sample",
        Command::Bijection => "bijection",
        Command::Group => "group",
        Command::Tree => "tree",
        Command::Rotor { .. } => "rotor",
        Command::Exact2d { .. } => "exact2d",
        Command::Growth { .. } => "growth",
        Command::Report => "report",
    }
}

fn grid(c: &Common) -> Result<SinkedMultigraph> {
    if c.box_n < 0 || c.dim == 0 {
        return Err(SandlabError::InvalidArgument("need --box ≥ 0 and --dim ≥ 1".into()));
    }
    let side = (2 * c.box_n + 1) as f64;
    if side.powi(c.dim as i32) > 5e6 {
        return Err(SandlabError::Size("box has more than 5·10⁶ vertices".into()));
    }
    graphcore::wired_box(&GridSpec::centered(c.dim, c.box_n, c.gamma))
}

/// Heights of a configuration on a 2-D box as a PGM; column = first coordinate, top row = largest second coordinate.
pub fn box_image(g: &SinkedMultigraph, n: i64, values: &[i64], maxval: u16) -> Result<String> {
    let side = (2 * n + 1) as usize;
    let mut px = vec![0u16; side * side];
    for row in 0..side {
        for col in 0..side {
            let x = [col as i64 - n, n - row as i64];
            let v = g.vertex_at(&x).ok_or_else(|| SandlabError::Internal("image outside box".into()))?;
            px[row * side + col] = values[v].clamp(0, maxval as i64) as u16;
        }
    }
    pgm(side, side, maxval, &px)
}

/// PGM of the identity of the sandpile group of Box(n) ⊂ Z², checked to satisfy I ⊕ I = I.
pub fn identity_image(n: i64) -> Result<String> {
    if n < 0 {
        return Err(SandlabError::InvalidArgument("n must be nonnegative".into()));
    }
    if n > 100 {
        return Err(SandlabError::Size("identity images limited to n ≤ 100".into()));
    }
    let g = graphcore::box_graph(2, n);
    let id = algebra::group_identity(&g)?;
    if algebra::group_add(&g, &id, &id)? != id {
        return Err(SandlabError::Internal("identity is not idempotent".into()));
    }
    box_image(&g, n, &id, 3)
}

fn mask_image(sites: &[Vec<i64>]) -> Result<String> {
    let r = sites.iter().flat_map(|x| x.iter().map(|c| c.abs())).max().unwrap_or(0);
    let side = (2 * r + 1) as usize;
    let mut px = vec![0u16; side * side];
    for x in sites {
        if x.len() == 2 {
            px[((r - x[1]) as usize) * side + (x[0] + r) as usize] = 1;
        }
    }
    pgm(side, side, 1, &px)
}

fn parse_law(s: &str) -> Result<MassLaw> {
    let mut v = Vec::new();
    for part in s.split(',') {
        let (h, p) = part
            .split_once(':')
            .ok_or_else(|| SandlabError::InvalidArgument(format!("bad law entry '{part}'")))?;
        let h = h.trim().parse().map_err(|_| SandlabError::InvalidArgument(format!("bad height '{h}'")))?;
        let p = p.trim().parse().map_err(|_| SandlabError::InvalidArgument(format!("bad probability '{p}'")))?;
        v.push((h, p));
    }
    Ok(MassLaw(v))
}

fn parse_sizes(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| SandlabError::InvalidArgument(format!("bad size '{t}'"))))
        .collect()
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| SandlabError::Internal(e.to_string()))
}

/// Runs one command; returns the stdout summary.
pub fn run(cli: &Cli) -> Result<String> {
    let c = &cli.common;
    let mut out = Output {
        dir: c.out.clone(),
        manifest: RunManifest::start(command_name(&cli.command), flags(cli), c.seed),
    };
    let summary = match &cli.command {
        Command::Graph => {
            let g = grid(c)?;
            out.write("graph.txt", &g.dump())?;
            let mut s = j!({ "vertices": g.len(), "edges": g.edge_count(), "log_det": g.log_det()? });
            if g.len() <= 64 {
                s["det"] = j!(g.det_exact()?.to_string());
                let inv: Vec<String> = g.group_invariants()?.iter().map(|d| d.to_string()).collect();
                s["invariants"] = j!(inv);
            }
            s
        }
        Command::Stabilize { add, background } => {
            let g = grid(c)?;
            let o = g.vertex_at(&vec![0; c.dim]).unwrap();
            let mut xi = vec![*background; g.len()];
            xi[o] += add;
            let (fin, odo) = sandpile::stabilize(&g, &xi)?;
            let rows: Vec<Vec<String>> = (0..g.len())
                .map(|v| {
                    let x = g.coords(v).unwrap();
                    let mut r: Vec<String> = x.iter().map(|c| c.to_string()).collect();
                    r.push(fin[v].to_string());
                    r.push(odo[v].to_string());
                    r
                })
                .collect();
            let mut header: Vec<String> = (0..c.dim).map(|k| format!("x{k}")).collect();
            header.push("height".into());
            header.push("odometer".into());
            let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            out.write("final.csv", &csv(&h, &rows)?)?;
            if c.dim == 2 {
                out.write("final.pgm", &box_image(&g, c.box_n, &fin, 2 * c.dim as u16 - 1)?)?;
            }
            j!({
                "height_at_origin": fin[o],
                "odometer_at_origin": odo[o],
                "total_topplings": odo.iter().sum::<u64>(),
                "toppled_sites": odo.iter().filter(|&&k| k > 0).count(),
            })
        }
        Command::Chain { steps } => {
            let g = grid(c)?;
            let s = sandpile::markov_run(&g, None, *steps, c.seed)?;
            let v = to_value(&s)?;
            out.write("chain.json", &json(&v)?)?;
            j!({ "steps": s.steps, "mean_avalanche_size": s.mean_avalanche_size, "warnings": s.warnings })
        }
        Command::Sample { window } => {
            if c.dim != 2 {
                return Err(SandlabError::InvalidArgument("sample works on Z² boxes".into()));
            }
            let w = window.unwrap_or(c.box_n / 4);
            let samples = c.samples.unwrap_or(1000);
            let s = treewalk::height_statistics(c.box_n, w, samples, c.seed)?;
            let law = exact2d::height_probabilities_closed_form();
            let rows: Vec<Vec<String>> = (0..4)
                .map(|h| {
                    vec![h.to_string(), s.counts[h].to_string(), format!("{:.10}", s.p[h]), format!("{:.3e}", s.std_err[h])]
                })
                .collect();
            out.write("heights.csv", &csv(&["height", "count", "p", "std_err"], &rows)?)?;
            let v = j!({
                "empirical": to_value(&s)?,
                "closed_form": law.p.iter().map(|p| p.value()).collect::<Vec<_>>(),
                "closed_form_mean": law.zeta.value(),
            });
            out.write("p.json", &json(&v)?)?;
            v
        }
        Command::Bijection => {
            let g = grid(c)?;
            let mut rng = sandlab::rng::rng(c.seed);
            let eta = treewalk::sample_recurrent(&g, &mut rng);
            let tree = algebra::bijection_to_tree(&g, &eta)?;
            let back = algebra::tree_to_sandpile(&g, &tree);
            if back != eta {
                return Err(SandlabError::Internal("bijection round trip failed".into()));
            }
            out.write("tree.json", &json(&j!({ "parent": tree.parent, "sink": g.sink() }))?)?;
            out.write("config.json", &json(&eta)?)?;
            j!({ "vertices": g.len(), "round_trip": true, "depth": tree.burn_time.iter().max() })
        }
        Command::Group => {
            let g = grid(c)?;
            let id = algebra::group_identity(&g)?;
            if c.dim == 2 {
                out.write("identity.pgm", &identity_image(c.box_n)?)?;
            }
            out.write("identity.json", &json(&id)?)?;
            let mut s = j!({ "vertices": g.len(), "identity_mass": sandpile::mass(&id) });
            if g.len() <= 64 {
                s["order"] = j!(g.det_exact()?.to_string());
                let inv: Vec<String> = g.group_invariants()?.iter().map(|d| d.to_string()).collect();
                s["invariants"] = j!(inv);
            }
            s
        }
        Command::Tree => {
            let g = grid(c)?;
            let mut rng = sandlab::rng::rng(c.seed);
            let t = treewalk::wilson_ust(&g, &mut rng);
            out.write("tree.json", &json(&j!({ "parent": t.parent, "sink": g.sink() }))?)?;
            let mut s = j!({ "vertices": g.len(), "depth": t.burn_time.iter().max() });
            if let Some(samples) = c.samples {
                let est = treewalk::looping_constant_estimate(c.box_n, samples, c.seed)?;
                out.write("looping.json", &json(&est)?)?;
                s["looping"] = to_value(&est)?;
                s["looping_reference"] = j!(1.25);
            }
            s
        }
        Command::Rotor { n, direction } => {
            let init = match direction {
                Some(k) => rotor::RotorInit::Uniform(*k),
                None => rotor::RotorInit::Random(c.seed),
            };
            let a = rotor::rotor_aggregate(*n, init, c.dim)?;
            let (inner, outer) = growth::shape_radii(c.dim, &a.occupied);
            if c.dim == 2 {
                out.write("aggregate.pgm", &mask_image(&a.occupied)?)?;
            }
            let r = (*n as f64 / rotor::unit_ball_volume(c.dim)).powf(1.0 / c.dim as f64);
            j!({ "chips": n, "inradius": inner, "outradius": outer, "ball_radius": r })
        }
        Command::Exact2d { report, n, kernel_radius, mo_l } => {
            let k = exact2d::potential_kernel((*kernel_radius).max(2))?;
            out.write("kernel.csv", &k.to_csv())?;
            let refs = j!({
                "A(0,-1)": k.a(0, -1),
                "A(-1,-1)": k.a(-1, -1),
                "A(0,-2)": k.a(0, -2),
                "A(-1,-2)": k.a(-1, -2),
            });
            if *report {
                let law = exact2d::height_probabilities_closed_form();
                let p0_det = exact2d::height0_probability(*n)?;
                let mo = exact2d::sum_mo_truncated(*mo_l)?;
                let r = c.r.unwrap_or(0.5);
                let tol = c.tol.unwrap_or(1e-6);
                let pr = exact2d::priezzhev_cross_check(r, if r > 0.8 { 60 } else { 30 }, tol)?;
                let corr = exact2d::pair_correlation_00([50, 0])?;
                let v = j!({
                    "p0_determinant": { "n": n, "value": p0_det, "closed_form": exact2d::p0() },
                    "closed_forms": law.p.iter().map(|p| p.value()).collect::<Vec<_>>(),
                    "mean_height": law.zeta.value(),
                    "kernel_reference": refs,
                    "kernel_asymptotic_constant": { "fitted": k.asymptotic_constant(), "exact": exact2d::kernel::c0_exact() },
                    "sum_Mo": to_value(&mo)?,
                    "cross_check": to_value(&pr)?,
                    "pair_correlation": to_value(&corr)?,
                    "tolerances": { "cross_check": tol, "kernel": 1e-10 },
                    "mesh": { "fourier_points_per_axis": pr.mesh, "lattice_truncation": pr.l },
                });
                out.manifest.tolerances.insert("cross_check".into(), tol);
                out.write("report.json", &json(&v)?)?;
                v
            } else {
                j!({ "kernel_reference": refs, "kernel_radius": k.radius })
            }
        }
        Command::Growth { kind, n, h, m, radius, eps, lattice, law, sizes, cells } => match kind {
            GrowthKind::Point => {
                let r = growth::relax_point_mass(*n, *h, c.dim)?;
                let s = r.visited_sites();
                let (inner, outer) = growth::shape_radii(c.dim, &s);
                if c.dim == 2 {
                    out.write("visited.pgm", &mask_image(&s)?)?;
                    let side = r.side();
                    let px: Vec<u16> = (0..side * side)
                        .map(|i| {
                            let (row, col) = (i / side, i % side);
                            let x = [col as i64 - r.window, r.window - row as i64];
                            r.height(&x).clamp(0, 3) as u16
                        })
                        .collect();
                    out.write("heights.pgm", &pgm(side, side, 3, &px)?)?;
                }
                let rr = (*n as f64 / rotor::unit_ball_volume(c.dim)).powf(1.0 / c.dim as f64);
                let c1 = ((2 * c.dim) as f64 - 1.0 - *h as f64).powf(-1.0 / c.dim as f64);
                j!({
                    "visited": s.len(),
                    "inradius": inner,
                    "outradius": outer,
                    "r": rr,
                    "c1": c1,
                    "fitted_c2": (c1 * rr - inner).max(0.0),
                    "odometer_at_origin": r.odometer_at(&vec![0; c.dim]),
                    "window": r.window,
                })
            }
            GrowthKind::Divisible => {
                let tol = c.tol.unwrap_or(1e-8);
                let d = growth::divisible_sandpile(*m, c.dim, tol)?;
                let (inner, outer) = growth::shape_radii(c.dim, &d.occupied);
                if c.dim == 2 {
                    out.write("occupied.pgm", &mask_image(&d.occupied)?)?;
                }
                out.manifest.tolerances.insert("excess".into(), tol);
                j!({
                    "m": m,
                    "occupied": d.occupied.len(),
                    "inradius": inner,
                    "outradius": outer,
                    "r": (*m / rotor::unit_ball_volume(c.dim)).powf(1.0 / c.dim as f64),
                    "total_mass": d.total_mass,
                    "sweeps": d.sweeps,
                    "tol": tol,
                })
            }
            GrowthKind::Profile => {
                let mesh = Mesh { half_width: 1.0, cells: *cells };
                let p = growth::scaled_profile(*n, c.dim, mesh)?;
                let k = mesh.cells;
                let rows: Vec<Vec<String>> =
                    p.values.iter().enumerate().map(|(i, v)| vec![i.to_string(), format!("{v:.12e}")]).collect();
                out.write("profile.csv", &csv(&["cell", "value"], &rows)?)?;
                j!({ "n": n, "cells_per_axis": k, "half_width": mesh.half_width, "integral": p.integral })
            }
            GrowthKind::Explosion => {
                let bg = match (eps, lattice) {
                    (Some(_), Some(_)) => {
                        return Err(SandlabError::InvalidArgument("choose one of --eps and --lattice".into()))
                    }
                    (Some(e), None) => Background::Bernoulli { h: *h, eps: *e, seed: c.seed },
                    (None, Some(m)) => Background::Lattice { h: *h, m: *m },
                    (None, None) => Background::Constant(*h),
                };
                let v = growth::explosion_probe(bg, *n, *radius, c.dim)?;
                let val = to_value(&v)?;
                out.write("verdict.json", &json(&val)?)?;
                val
            }
            GrowthKind::Probe => {
                let law = parse_law(law)?;
                let sizes = parse_sizes(sizes)?;
                let t = growth::stabilizability_probe(c.dim, &law, &sizes, c.seed)?;
                let rows: Vec<Vec<String>> =
                    t.sizes.iter().zip(&t.odometer_at_origin).map(|(l, o)| vec![l.to_string(), o.to_string()]).collect();
                out.write("trace.csv", &csv(&["L", "odometer_at_origin"], &rows)?)?;
                let val = to_value(&t)?;
                out.write("verdict.json", &json(&val)?)?;
                val
            }
            GrowthKind::Dissipative => {
                let gamma = c.gamma.max(1);
                let x = vec![0; c.dim];
                let chk = growth::dissipative_green_check(gamma, c.dim, c.box_n, &x, c.samples.unwrap_or(0), c.seed)?;
                let val = to_value(&chk)?;
                out.write("dissipative.json", &json(&val)?)?;
                let resolved = chk.rows.iter().filter(|r| r.std_err > 0.0);
                j!({ "gamma": gamma, "mean_size_exact": chk.mean_size_exact,
                     "max_abs_z": resolved.map(|r| r.z.abs()).fold(0.0, f64::max),
                     "unresolved_sites": chk.rows.iter().filter(|r| r.std_err == 0.0).count() })
            }
        },
        Command::Report => {
            let law = exact2d::height_probabilities_closed_form();
            let k = exact2d::potential_kernel(4)?;
            let v = j!({
                "p": law.p.iter().map(|p| p.value()).collect::<Vec<_>>(),
                "mean_height": law.zeta.value(),
                "looping_constant": 1.25,
                "A(0,-1)": k.a(0, -1),
                "A(-1,-1)": k.a(-1, -1),
                "p0_box8": exact2d::height0_probability(8)?,
            });
            out.write("report.json", &json(&v)?)?;
            v
        }
    };
    out.finish(summary, c.format)
}
