//! Exact potential kernel A = a/4 of the planar simple random walk.
//!
//! Every value has the form p + q/π with rationals p, q. Diagonal values come
//! from the odd harmonic sums, the rest of the octant from harmonicity.

use crate::error::{invalid, too_big, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt::Write as _;

/// Largest supported window radius.
pub const MAX_RADIUS: usize = 600;

#[derive(Clone, Debug, PartialEq)]
pub struct PiLinear {
    pub rational: BigRational,
    pub inv_pi: BigRational,
}

impl PiLinear {
    fn zero() -> Self {
        PiLinear { rational: BigRational::zero(), inv_pi: BigRational::zero() }
    }
    fn lin(&self, a: i64, other: &PiLinear, b: i64) -> PiLinear {
        let ab = BigRational::from_integer(a.into());
        let bb = BigRational::from_integer(b.into());
        PiLinear {
            rational: &self.rational * &ab + &other.rational * &bb,
            inv_pi: &self.inv_pi * &ab + &other.inv_pi * &bb,
        }
    }
    fn sub(&self, other: &PiLinear) -> PiLinear {
        PiLinear { rational: &self.rational - &other.rational, inv_pi: &self.inv_pi - &other.inv_pi }
    }
}

/// floor(2^bits / π) by Machin's formula.
pub fn inv_pi_fixed(bits: u64) -> BigInt {
    let guard = 32;
    let one = BigInt::one() << (bits + guard);
    let atan_inv = |x: i64| {
        let x2 = BigInt::from(x * x);
        let mut term = &one / BigInt::from(x);
        let mut sum = term.clone();
        let mut k = 1i64;
        while !term.is_zero() {
            term = &term / &x2;
            let t = &term / BigInt::from(2 * k + 1);
            if k % 2 == 1 {
                sum -= t;
            } else {
                sum += t;
            }
            k += 1;
        }
        sum
    };
    let pi = (atan_inv(5) * 16) - (atan_inv(239) * 4);
    // 2^(2(bits+guard)) / pi, then drop the guard bits
    ((BigInt::one() << (2 * (bits + guard))) / pi) >> guard
}

impl PiLinear {
    /// Numerical value, correctly rounded to about 1e-16 relative for moderate magnitudes.
    pub fn value(&self, inv_pi: &BigInt, bits: u64) -> f64 {
        // floor(q · 2^bits / π) + floor(p · 2^bits)
        let q = &self.inv_pi;
        let p = &self.rational;
        let qpart = (q.numer() * inv_pi) / q.denom();
        let ppart = (p.numer() << bits) / p.denom();
        let total = qpart + ppart;
        let shift = bits.saturating_sub(60);
        let top = (total >> shift).to_f64().unwrap_or(f64::NAN);
        top / 2f64.powi((bits - shift) as i32)
    }
}

#[derive(Clone, Debug)]
pub struct KernelTable {
    pub radius: usize,
    exact: Vec<PiLinear>,
    values: Vec<f64>,
}

#[inline]
fn oct(x: usize, y: usize) -> usize {
    x * (x + 1) / 2 + y
}

/// Builds A on |x|_∞ ≤ R.
pub fn potential_kernel(radius: usize) -> Result<KernelTable> {
    if radius < 1 {
        return invalid("kernel radius must be at least 1");
    }
    if radius > MAX_RADIUS {
        return too_big(format!("kernel radius limited to {MAX_RADIUS} by the precision budget"));
    }
    let r = radius + 1;
    let mut t: Vec<PiLinear> = vec![PiLinear::zero(); oct(r, r) + 1];
    // A(1,0) = 1/4
    t[oct(1, 0)].rational = BigRational::new(1.into(), 4.into());
    let mut harmonic = BigRational::zero();
    for k in 1..=r {
        harmonic += BigRational::new(1.into(), BigInt::from(2 * k as i64 - 1));
        t[oct(k, k)].inv_pi = harmonic.clone();
    }
    let get = |t: &Vec<PiLinear>, x: i64, y: i64| -> PiLinear {
        let (a, b) = (x.unsigned_abs() as usize, y.unsigned_abs() as usize);
        let (a, b) = if a >= b { (a, b) } else { (b, a) };
        t[oct(a, b)].clone()
    };
    for k in 1..r {
        // harmonic at (k,k): A(k+1,k) = 2A(k,k) − A(k,k−1)
        let v = get(&t, k as i64, k as i64).lin(2, &get(&t, k as i64, k as i64 - 1), -1);
        t[oct(k + 1, k)] = v;
        for j in (0..k).rev() {
            let (ki, ji) = (k as i64, j as i64);
            let c = get(&t, ki, ji);
            let s = get(&t, ki - 1, ji).lin(1, &get(&t, ki, ji + 1), 1).lin(1, &get(&t, ki, ji - 1), 1);
            let v = c.lin(4, &PiLinear::zero(), 0).sub(&s);
            t[oct(k + 1, j)] = v;
        }
    }
    let maxbits = t
        .iter()
        .map(|v| v.inv_pi.numer().bits().max(v.rational.numer().bits()))
        .max()
        .unwrap_or(0);
    let bits = maxbits + 128;
    let ip = inv_pi_fixed(bits);
    let n = oct(radius, radius) + 1;
    t.truncate(n);
    let values = t.iter().map(|v| v.value(&ip, bits)).collect();
    Ok(KernelTable { radius, exact: t, values })
}

impl KernelTable {
    fn key(&self, x: i64, y: i64) -> Option<usize> {
        let (a, b) = (x.unsigned_abs() as usize, y.unsigned_abs() as usize);
        let (a, b) = if a >= b { (a, b) } else { (b, a) };
        (a <= self.radius).then(|| oct(a, b))
    }

    pub fn covers(&self, x: i64, y: i64) -> bool {
        self.key(x, y).is_some()
    }

    /// A(x, y); panics outside the window.
    pub fn a(&self, x: i64, y: i64) -> f64 {
        self.values[self.key(x, y).expect("point outside kernel window")]
    }

    pub fn get(&self, x: i64, y: i64) -> Option<f64> {
        self.key(x, y).map(|k| self.values[k])
    }

    /// Exact representation p + q/π.
    pub fn exact(&self, x: i64, y: i64) -> Option<&PiLinear> {
        self.key(x, y).map(|k| &self.exact[k])
    }

    /// Largest |mean of the four neighbors − center| over the window interior, o excluded,
    /// and the mean-value defect at o.
    pub fn harmonicity_residual(&self) -> (f64, f64) {
        let r = self.radius as i64 - 1;
        let mut worst: f64 = 0.0;
        for x in -r..=r {
            for y in -r..=r {
                if x == 0 && y == 0 {
                    continue;
                }
                let m = (self.a(x + 1, y) + self.a(x - 1, y) + self.a(x, y + 1) + self.a(x, y - 1)) / 4.0;
                worst = worst.max((m - self.a(x, y)).abs());
            }
        }
        let m0 = (self.a(1, 0) + self.a(-1, 0) + self.a(0, 1) + self.a(0, -1)) / 4.0;
        (worst, self.a(0, 0) - m0)
    }

    /// CSV "x,y,A" over the full square window.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,y,A\n");
        let r = self.radius as i64;
        for x in -r..=r {
            for y in -r..=r {
                let _ = writeln!(s, "{x},{y},{:.17e}", self.a(x, y));
            }
        }
        s
    }

    /// Fitted constant c0 in A(y) ≈ log|y|/(2π) + c0 along the axis, using the outermost value.
    pub fn asymptotic_constant(&self) -> f64 {
        let r = self.radius as i64;
        self.a(r, 0) - (r as f64).ln() / (2.0 * std::f64::consts::PI)
    }
}

/// Exact value of the constant c0 = (2γ + log 8)/(4π).
pub fn c0_exact() -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    (2.0 * EULER + 8f64.ln()) / (4.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reference_values() {
        let k = potential_kernel(12).unwrap();
        assert_eq!(k.a(0, 0), 0.0);
        assert!((k.a(0, -1) - 0.25).abs() < 1e-15);
        assert!((k.a(-1, -1) - 1.0 / PI).abs() < 1e-15);
        assert!((k.a(0, -2) - (1.0 - 2.0 / PI)).abs() < 1e-15);
        assert!((k.a(-1, -2) - (2.0 / PI - 0.25)).abs() < 1e-15);
        let e = k.exact(1, 1).unwrap();
        assert_eq!(e.rational, BigRational::zero());
        assert_eq!(e.inv_pi, BigRational::one());
    }

    #[test]
    fn inverse_pi_digits() {
        let ip = inv_pi_fixed(200);
        let top = (ip >> 140u32).to_f64().unwrap() / 2f64.powi(60);
        assert!((top - 1.0 / PI).abs() < 1e-16);
    }

    #[test]
    fn symmetric_and_harmonic() {
        let k = potential_kernel(40).unwrap();
        for x in -20..=20 {
            for y in -20..=20 {
                assert_eq!(k.a(x, y), k.a(y, x));
                assert_eq!(k.a(x, y), k.a(-x, y));
            }
        }
        let (res, defect) = k.harmonicity_residual();
        assert!(res < 1e-12, "{res}");
        assert!((defect + 0.25).abs() < 1e-15);
    }

    #[test]
    fn asymptotic_constant() {
        let k = potential_kernel(80).unwrap();
        assert!((k.asymptotic_constant() - c0_exact()).abs() < 1e-4);
        assert!(potential_kernel(0).is_err());
        assert!(potential_kernel(MAX_RADIUS + 1).is_err());
    }
}
