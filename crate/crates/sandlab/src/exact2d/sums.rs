//! Regularized lattice sums of small determinants and their Fourier counterparts.

use super::green::KilledTable;
use super::kernel::{potential_kernel, KernelTable};
use crate::error::{invalid, too_big, Result};
use crate::linalg::det3;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// ∂¹_e ∂²_f A(z, o) with A(z, w) = A(w − z).
fn mixed(k: &KernelTable, z: [i64; 2], e: [i64; 2], f: [i64; 2]) -> f64 {
    let a2 = |z: [i64; 2], w: [i64; 2]| k.a(w[0] - z[0], w[1] - z[1]);
    let ze = [z[0] + e[0], z[1] + e[1]];
    a2(ze, f) - a2(ze, [0, 0]) - a2(z, f) + a2(z, [0, 0])
}

/// The 3×3 matrix M^o(z).
pub fn m_o(k: &KernelTable, z: [i64; 2]) -> [[f64; 3]; 3] {
    let ip = 1.0 / PI;
    let fs = [[0, 1], [-1, 0], [1, 0]];
    let mut m = [[0.5, ip - 0.5, ip - 0.5], [0.0; 3], [0.0; 3]];
    for (j, &f) in fs.iter().enumerate() {
        m[1][j] = mixed(k, z, [1, 0], f);
        m[2][j] = mixed(k, z, [0, -1], f) - mixed(k, z, [0, 1], f);
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct MoSum {
    pub l: i64,
    pub value: f64,
    /// max over the outer ring |z|∞ = L of |det M^o(z)|·|z|⁴.
    pub decay_constant: f64,
}

/// Σ_{|z|∞ ≤ L} det M^o(z) with a kernel table of radius ≥ L + 3.
pub fn sum_mo_truncated_with(k: &KernelTable, l: i64) -> Result<MoSum> {
    if l < 0 {
        return invalid("L must be nonnegative");
    }
    if (k.radius as i64) < l + 3 {
        return too_big(format!("kernel window {} smaller than L + 3 = {}", k.radius, l + 3));
    }
    let rows: Vec<(f64, f64)> = crate::rng::par_replicas((2 * l + 1) as usize, |i| {
        let x = i as i64 - l;
        let mut row = Vec::with_capacity((2 * l + 1) as usize);
        let mut worst: f64 = 0.0;
        for y in -l..=l {
            let d = det3(&m_o(k, [x, y]));
            row.push(d);
            if x.abs().max(y.abs()) == l && l > 0 {
                let r2 = (x * x + y * y) as f64;
                worst = worst.max(d.abs() * r2 * r2);
            }
        }
        (pairwise_sum(&row), worst)
    });
    let sums: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let decay_constant = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(MoSum { l, value: pairwise_sum(&sums), decay_constant })
}

pub fn sum_mo_truncated(l: i64) -> Result<MoSum> {
    let k = potential_kernel((l + 3).max(1) as usize)?;
    sum_mo_truncated_with(&k, l)
}

/// Largest r accepted by the Fourier cross-check.
pub const R_MAX: f64 = 0.95;

/// Constant first row of C_{k,l}(r).
pub fn first_row() -> [f64; 4] {
    let ip = 1.0 / PI;
    [0.75, 0.25, ip - 0.25, ip - 0.25]
}

/// C_{k,l}(r) from a killed Green table.
pub fn c_matrix(g: &KilledTable, k: i64, l: i64) -> [[f64; 4]; 4] {
    let g = |a: i64, b: i64| g.get(a, b);
    [
        first_row(),
        [g(k, l - 1), g(k, l), g(k + 1, l), g(k - 1, l)],
        [g(k + 1, l - 1), g(k + 1, l), g(k + 2, l), g(k, l)],
        [
            g(k, l) - g(k, l - 2),
            g(k, l + 1) - g(k, l - 1),
            g(k + 1, l + 1) - g(k + 1, l - 1),
            g(k - 1, l + 1) - g(k - 1, l - 1),
        ],
    ]
}

fn det4<T>(m: &[[T; 4]; 4]) -> T
where
    T: Copy + std::ops::Mul<Output = T> + std::ops::Sub<Output = T> + std::ops::Add<Output = T>,
{
    // expansion along the first row with 3×3 minors of rows 1..3
    let minor = |skip: usize| {
        let c: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
        let r = |i: usize, j: usize| m[i][c[j]];
        r(1, 0) * (r(2, 1) * r(3, 2) - r(2, 2) * r(3, 1)) - r(1, 1) * (r(2, 0) * r(3, 2) - r(2, 2) * r(3, 0))
            + r(1, 2) * (r(2, 0) * r(3, 1) - r(2, 1) * r(3, 0))
    };
    m[0][0] * minor(0) - m[0][1] * minor(1) + m[0][2] * minor(2) - m[0][3] * minor(3)
}

#[derive(Clone, Debug, Serialize)]
pub struct PriezzhevCheck {
    pub r: f64,
    pub l: i64,
    pub lattice: f64,
    pub fourier: f64,
    pub difference: f64,
    /// Trapezoid points per axis used by the Fourier side.
    pub mesh: usize,
    pub imaginary_residual: f64,
}

/// Truncated Σ_{|k|,|l| ≤ L} det C_{k,l}(r).
pub fn lattice_side(r: f64, l: i64, tol: f64) -> Result<f64> {
    let table = KilledTable::new(l + 2, r, tol)?;
    let rows: Vec<f64> = crate::rng::par_replicas((2 * l + 1) as usize, |i| {
        let k = i as i64 - l;
        let row: Vec<f64> = (-l..=l).map(|j| det4(&c_matrix(&table, k, j))).collect();
        pairwise_sum(&row)
    });
    Ok(pairwise_sum(&rows))
}

/// Periodic trapezoid rule with `n` points per axis for the four-fold Fourier integral.
pub fn fourier_side(r: f64, n: usize) -> (f64, f64) {
    let h = 2.0 * PI / n as f64;
    let e: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, h * j as f64)).collect();
    let cs: Vec<f64> = e.iter().map(|z| z.re).collect();
    let d = |a: usize, b: usize| 2.0 - r * (cs[a % n] + cs[b % n]);
    let ip = 1.0 / PI;
    let one = Complex64::new(1.0, 0.0);
    let re = |x: f64| Complex64::new(x, 0.0);
    let row0 = [re(0.75), re(0.25), re(ip - 0.25), re(ip - 0.25)];
    let neg = |j: usize| (n - j % n) % n;
    let parts: Vec<Complex64> = crate::rng::par_replicas(n, |a1| {
        let mut acc = Vec::with_capacity(n);
        for b1 in 0..n {
            let s1 = e[b1].im;
            if s1 == 0.0 {
                acc.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let d1 = d(a1, b1);
            let row3 = [e[neg(b1)], one, e[a1], e[neg(a1)]];
            let mut inner = Complex64::new(0.0, 0.0);
            for a2 in 0..n {
                let aa = (a1 + a2) % n;
                for b2 in 0..n {
                    let bb = (b1 + b2) % n;
                    let m = [
                        row0,
                        [e[bb], one, e[neg(aa)], e[aa]],
                        [e[(a2 + n - b2) % n], e[a2], e[(2 * a2) % n], one],
                        row3,
                    ];
                    inner += det4(&m) / (d(a2, b2) * d(aa, bb));
                }
            }
            acc.push(Complex64::new(0.0, s1) * inner / d1);
        }
        acc.into_iter().sum()
    });
    let total: Complex64 = parts.into_iter().sum();
    let scale = h.powi(4) / (64.0 * PI.powi(4));
    let v = total * scale;
    (v.re, v.im.abs())
}

/// Compares the lattice sum with the Fourier integral, refining the mesh by doubling.
pub fn priezzhev_cross_check(r: f64, l: i64, tol: f64) -> Result<PriezzhevCheck> {
    if !(r > 0.0) {
        return invalid("r must be positive");
    }
    if r > R_MAX {
        return invalid(format!("r = {r} too close to 1: tolerance not certifiable above {R_MAX}"));
    }
    if l < 1 {
        return invalid("L must be positive");
    }
    let lattice = lattice_side(r, l, tol * 1e-3)?;
    let mut mesh = 16;
    let (mut prev, mut im) = fourier_side(r, mesh);
    loop {
        if mesh >= 128 {
            break;
        }
        let (next, im2) = fourier_side(r, mesh * 2);
        mesh *= 2;
        let done = (next - prev).abs() < 0.1 * tol;
        prev = next;
        im = im2;
        if done {
            break;
        }
    }
    Ok(PriezzhevCheck { r, l, lattice, fourier: prev, difference: (lattice - prev).abs(), mesh, imaginary_residual: im })
}
