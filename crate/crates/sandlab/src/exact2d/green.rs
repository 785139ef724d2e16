//! Box Green functions and the geometrically killed walk.

use super::kernel::potential_kernel;
use super::quad::integrate_breaks;
use crate::error::{invalid, Result};
use crate::graphcore::box_graph;
use std::f64::consts::PI;

/// G_n(z, x) on Box(n) = [-n, n]² with wired boundary.
pub fn box_green(n: i64, z: [i64; 2], x: [i64; 2]) -> Result<f64> {
    if n < 0 {
        return invalid("box radius must be nonnegative");
    }
    let g = box_graph(2, n);
    let (Some(zi), Some(xi)) = (g.vertex_at(&z), g.vertex_at(&x)) else {
        return invalid(format!("points {z:?}, {x:?} must lie in Box({n})"));
    };
    g.green(zi, xi)
}

/// Breakpoints clustering geometrically at 0 on the scale sqrt(1 − r).
fn breaks(r: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut s = (1.0 - r).max(1e-300).sqrt();
    while s < PI {
        b.push(s);
        s *= 2.0;
    }
    b.push(PI);
    b
}

/// (sqrt(t² − r²), z) for t = 2 − r cos α, with z = (t − sqrt(t² − r²))/r.
#[inline]
fn root_and_ratio(alpha: f64, r: f64) -> (f64, f64) {
    let s = (0.5 * alpha).sin();
    let t_minus = 2.0 * (1.0 - r) + 2.0 * r * s * s;
    let t = t_minus + r;
    let root = (t_minus * (t + r)).sqrt();
    (root, r / (t + root))
}

/// Killed Green function G_{k,l}(r) = Σ_m r^m P[S(m) = (k,l)] / 4, for 0 < r < 1.
pub fn killed_green(k: i64, l: i64, r: f64, tol: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return invalid("killed_green needs 0 < r < 1");
    }
    let (k, l) = (k.abs().max(l.abs()), k.abs().min(l.abs()));
    let f = |a: f64| {
        let (root, z) = root_and_ratio(a, r);
        (k as f64 * a).cos() * (l as f64 * z.ln()).exp() / root
    };
    let (v, _) = integrate_breaks(f, &breaks(r), tol * 2.0 * PI);
    Ok(v / (2.0 * PI))
}

/// A(z, o; r) = G_{0,0}(r) − G_z(r); at r = 1 the potential kernel.
pub fn killed_potential(z: [i64; 2], r: f64, tol: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return invalid("killed_potential needs 0 < r ≤ 1");
    }
    let (k, l) = (z[0].abs().max(z[1].abs()), z[0].abs().min(z[1].abs()));
    if r == 1.0 {
        return Ok(potential_kernel((k as usize).max(1))?.a(k, l));
    }
    // 1 − cos(kα) zˡ = (1 − zˡ) + zˡ · 2 sin²(kα/2)
    let f = |a: f64| {
        let (root, zr) = root_and_ratio(a, r);
        let lz = l as f64 * zr.ln();
        let s = (0.5 * k as f64 * a).sin();
        (-lz.exp_m1() + lz.exp() * 2.0 * s * s) / root
    };
    let (v, _) = integrate_breaks(f, &breaks(r), tol * 2.0 * PI);
    Ok(v / (2.0 * PI))
}

/// Direct series Σ_m r^m P[S(m) = (k,l)] / 4, truncated once r^m < tol.
pub fn killed_green_series(k: i64, l: i64, r: f64, tol: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return invalid("series needs 0 < r < 1");
    }
    let steps = ((tol * (1.0 - r)).ln() / r.ln()).ceil().max(1.0) as usize;
    if steps > 4000 {
        return crate::error::too_big("series would need more than 4000 steps");
    }
    let m = steps as i64;
    let side = (2 * m + 1) as usize;
    let idx = |x: i64, y: i64| ((x + m) as usize) * side + (y + m) as usize;
    let mut p = vec![0.0f64; side * side];
    let mut q = vec![0.0f64; side * side];
    p[idx(0, 0)] = 1.0;
    let mut sum = 0.0;
    let mut rm = 1.0;
    for step in 0..=steps {
        if k.abs() + l.abs() <= step as i64 && (k + l + step as i64) % 2 == 0 {
            sum += rm * p[idx(k, l)];
        }
        if step == steps {
            break;
        }
        let reach = step as i64;
        for x in -reach - 1..=reach + 1 {
            for y in -reach - 1..=reach + 1 {
                if x.abs() + y.abs() > reach + 1 {
                    continue;
                }
                let mut s = 0.0;
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let (a, b) = (x + dx, y + dy);
                    if a.abs() + b.abs() <= reach {
                        s += p[idx(a, b)];
                    }
                }
                q[idx(x, y)] = 0.25 * s;
            }
        }
        std::mem::swap(&mut p, &mut q);
        rm *= r;
    }
    Ok(sum / 4.0)
}

/// Table G_{k,l}(r) for |k|, |l| ≤ m, filled from killed_green using the dihedral symmetry.
pub struct KilledTable {
    m: i64,
    vals: Vec<f64>,
}

impl KilledTable {
    pub fn new(m: i64, r: f64, tol: f64) -> Result<KilledTable> {
        let side = (m + 1) as usize;
        let mut vals = vec![0.0; side * side];
        let rows: Vec<Result<Vec<(usize, f64)>>> = crate::rng::par_replicas(side, |a| {
            (0..=a)
                .map(|b| killed_green(a as i64, b as i64, r, tol).map(|v| (b, v)))
                .collect()
        });
        for (a, row) in rows.into_iter().enumerate() {
            for (b, v) in row? {
                vals[a * side + b] = v;
                vals[b * side + a] = v;
            }
        }
        Ok(KilledTable { m, vals })
    }

    pub fn get(&self, k: i64, l: i64) -> f64 {
        let (a, b) = (k.unsigned_abs() as usize, l.unsigned_abs() as usize);
        assert!(a as i64 <= self.m && b as i64 <= self.m, "outside killed table");
        self.vals[a * (self.m as usize + 1) + b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_box() {
        assert!((box_green(0, [0, 0], [0, 0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(box_green(2, [3, 0], [0, 0]).is_err());
    }

    #[test]
    fn box_green_symmetric() {
        let a = box_green(6, [1, 2], [-3, 0]).unwrap();
        let b = box_green(6, [-3, 0], [1, 2]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_series() {
        for (k, l) in [(0, 0), (1, 0), (2, 1), (3, 3)] {
            let q = killed_green(k, l, 0.5, 1e-13).unwrap();
            let s = killed_green_series(k, l, 0.5, 1e-14).unwrap();
            assert!((q - s).abs() < 1e-10, "{k},{l}: {q} vs {s}");
        }
        let tiny = killed_green(0, 0, 1e-6, 1e-14).unwrap();
        assert!((tiny - 0.25).abs() < 1e-6);
        assert!(killed_green(0, 0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn killed_potential_limit() {
        let k = potential_kernel(4).unwrap();
        let r = 1.0 - 1e-4;
        let v = killed_potential([1, 0], r, 1e-12).unwrap();
        assert!((v - 0.25).abs() < 1e-4, "{v}");
        for x in -3i64..=3 {
            for y in -3i64..=3 {
                let v = killed_potential([x, y], 1.0 - 1e-6, 1e-12).unwrap();
                assert!((v - k.a(x, y)).abs() < 1e-4, "{x},{y}: {v}");
            }
        }
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5]
            .iter()
            .map(|e| (killed_potential([3, 3], 1.0 - e, 1e-12).unwrap() - k.a(3, 3)).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        let direct = killed_green(0, 0, 0.7, 1e-13).unwrap() - killed_green(2, 1, 0.7, 1e-13).unwrap();
        assert!((killed_potential([2, 1], 0.7, 1e-13).unwrap() - direct).abs() < 1e-11);
    }
}
