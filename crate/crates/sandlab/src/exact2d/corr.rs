//! Height-zero pair correlations on Z² and in the unit disk.

use super::height::p0;
use super::kernel::{potential_kernel, KernelTable};
use crate::error::{invalid, too_big, Result};
use crate::linalg::{det3, det_i_minus_minus_one3, inv3, mul3};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Directions of the three deleted edges at a height-zero site.
pub const DELETED: [[i64; 2]; 3] = [[0, -1], [-1, 0], [0, 1]];

/// Second differences K(v,w)[i][j] = ∇_{e_i}∇_{f_j} A(w − v).
pub fn k_block(k: &KernelTable, v: [i64; 2], w: [i64; 2]) -> [[f64; 3]; 3] {
    let d = [w[0] - v[0], w[1] - v[1]];
    let mut m = [[0.0; 3]; 3];
    for (i, e) in DELETED.iter().enumerate() {
        for (j, f) in DELETED.iter().enumerate() {
            m[i][j] = k.a(d[0] + f[0] - e[0], d[1] + f[1] - e[1]) - k.a(d[0] - e[0], d[1] - e[1])
                - k.a(d[0] + f[0], d[1] + f[1])
                + k.a(d[0], d[1]);
        }
    }
    m
}

/// The one-point block I + K(o,o); its determinant is p(0).
pub fn one_point_block(k: &KernelTable) -> [[f64; 3]; 3] {
    let mut m = k_block(k, [0, 0], [0, 0]);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    m
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCorrelation {
    pub y: [i64; 2],
    pub covariance: f64,
    pub asymptote: f64,
    pub ratio: f64,
}

/// Cov(1[η(o)=0], 1[η(y)=0]) on Z² with its large-|y| asymptote −p(0)²/(2|y|⁴).
pub fn pair_correlation_00_with(k: &KernelTable, y: [i64; 2]) -> Result<PairCorrelation> {
    if y == [0, 0] {
        return invalid("y must differ from the origin");
    }
    let reach = y[0].abs().max(y[1].abs()) + 2;
    if reach > k.radius as i64 {
        return too_big(format!("kernel window {} does not cover |y|∞ + 2 = {reach}", k.radius));
    }
    let a11 = one_point_block(k);
    let inv = inv3(&a11);
    let k_yo = k_block(k, y, [0, 0]);
    let k_oy = k_block(k, [0, 0], y);
    // det [[A, B],[C, A]] = det(A)² det(I − A⁻¹C A⁻¹B)
    let e = mul3(&mul3(&inv, &k_yo), &mul3(&inv, &k_oy));
    let d = det3(&a11);
    let covariance = d * d * det_i_minus_minus_one3(&e);
    let r2 = (y[0] * y[0] + y[1] * y[1]) as f64;
    let asymptote = -p0() * p0() / (2.0 * r2 * r2);
    Ok(PairCorrelation { y, covariance, asymptote, ratio: covariance / asymptote })
}

pub fn pair_correlation_00(y: [i64; 2]) -> Result<PairCorrelation> {
    let reach = (y[0].abs().max(y[1].abs()) + 2) as usize;
    let k = potential_kernel(reach.max(2))?;
    pair_correlation_00_with(&k, y)
}

/// Normalization c of the disk formula, fixed by the lattice asymptote.
pub fn disk_constant() -> f64 {
    PI * PI * p0() * p0()
}

/// Matrix of mixed partials ∂²g/∂v_i∂w_j of g(v,w) = −(1/2π) log|(v − w)/(1 − v w̄)|.
pub fn disk_green_mixed_partials(v: Complex64, w: Complex64) -> [[f64; 2]; 2] {
    // log|v − w| contributes a reflection-type block, log|1 − v w̄| a rotation-type block
    let q = -(v - w).powi(-2);
    let s = (Complex64::new(1.0, 0.0) - v * w.conj()).powi(-2);
    let h1 = [[-q.re, q.im], [q.im, q.re]];
    let h2 = [[-s.re, -s.im], [s.im, -s.re]];
    let c = 1.0 / (2.0 * PI);
    [
        [c * (-h1[0][0] + h2[0][0]), c * (-h1[0][1] + h2[0][1])],
        [c * (-h1[1][0] + h2[1][0]), c * (-h1[1][1] + h2[1][1])],
    ]
}

/// g(v, w) for the unit disk.
pub fn disk_green(v: Complex64, w: Complex64) -> f64 {
    -((v - w) / (Complex64::new(1.0, 0.0) - v * w.conj())).norm().ln() / (2.0 * PI)
}

/// Height-zero pair correlation E_U(v,w) in the unit disk.
pub fn disk_pair_correlation(v: Complex64, w: Complex64) -> Result<f64> {
    if v.norm() >= 1.0 || w.norm() >= 1.0 {
        return invalid("points must lie in the open unit disk");
    }
    if (v - w).norm() == 0.0 {
        return invalid("points must be distinct");
    }
    let h = disk_green_mixed_partials(v, w);
    let sq: f64 = h.iter().flatten().map(|x| x * x).sum();
    Ok(-disk_constant() * sq)
}
