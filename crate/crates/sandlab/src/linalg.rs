//! Dense exact and floating point linear algebra helpers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Fraction-free Gaussian elimination. Exact for integer matrices.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

pub fn to_big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
}

/// Invariant factors d_1 | d_2 | ... of a nonsingular integer matrix.
pub fn smith_invariants(mut m: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let n = m.len();
    let mut diag = Vec::with_capacity(n);
    for t in 0..n {
        loop {
            // pivot: smallest nonzero absolute value in the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if !m[i][j].is_zero()
                        && best.map_or(true, |(a, b)| m[i][j].abs() < m[a][b].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                diag.push(BigInt::zero());
                break;
            };
            m.swap(t, pi);
            for row in m.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..n {
                if !m[i][t].is_zero() {
                    let q = m[i][t].div_floor(&m[t][t]);
                    for j in t..n {
                        let v = &m[t][j] * &q;
                        m[i][j] -= v;
                    }
                    if !m[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..n {
                if !m[t][j].is_zero() {
                    let q = m[t][j].div_floor(&m[t][t]);
                    for i in t..n {
                        let v = &m[i][t] * &q;
                        m[i][j] -= v;
                    }
                    if !m[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                continue;
            }
            // divisibility of the remaining block by the pivot
            let mut fix = None;
            'outer: for i in t + 1..n {
                for j in t + 1..n {
                    if !(&m[i][j] % &m[t][t]).is_zero() {
                        fix = Some(i);
                        break 'outer;
                    }
                }
            }
            match fix {
                Some(i) => {
                    for j in t..n {
                        let v = m[i][j].clone();
                        m[t][j] += v;
                    }
                }
                None => {
                    diag.push(m[t][t].abs());
                    break;
                }
            }
        }
    }
    diag
}

/// Inverse of an integer matrix over the rationals (Gauss-Jordan).
pub fn rational_inverse(m: &[Vec<i64>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<BigRational> =
                r.iter().map(|&v| BigRational::from_integer(v.into())).collect();
            row.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for v in a[c].iter_mut() {
            *v *= &inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..2 * n {
                    let v = &a[c][j] * &f;
                    a[i][j] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves x·m = b over the rationals, i.e. mᵀ x = b.
pub fn rational_solve_left(m: &[Vec<i64>], b: &[i64]) -> Option<Vec<BigRational>> {
    let inv = rational_inverse(m)?;
    let n = m.len();
    Some(
        (0..n)
            .map(|j| {
                (0..n).fold(BigRational::zero(), |acc, i| {
                    acc + BigRational::from_integer(b[i].into()) * &inv[i][j]
                })
            })
            .collect(),
    )
}

/// Dense LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(m: &[Vec<f64>]) -> Lu {
        let n = m.len();
        let mut a: Vec<f64> = m.iter().flat_map(|r| r.iter().copied()).collect();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if a[i * n + k].abs() > a[p * n + k].abs() {
                    p = i;
                }
            }
            if a[p * n + k] == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                }
            }
        }
        Lu { n, a, piv, sign, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        (0..self.n).fold(self.sign, |acc, i| acc * self.a[i * self.n + i])
    }

    /// (log |det|, sign)
    pub fn log_abs_det(&self) -> (f64, f64) {
        let mut s = self.sign;
        let mut l = 0.0;
        for i in 0..self.n {
            let d = self.a[i * self.n + i];
            if d < 0.0 {
                s = -s;
            }
            l += d.abs().ln();
        }
        (l, s)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.a[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.a[i * n + j] * x[j];
            }
            x[i] /= self.a[i * n + i];
        }
        x
    }
}

pub fn det_f64(m: &[Vec<f64>]) -> f64 {
    Lu::new(m).det()
}

/// Conjugate gradient for a symmetric positive definite operator with Jacobi preconditioning.
/// Returns the solution and the final relative residual.
pub fn cg_solve(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return (x, 0.0);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut res = 1.0;
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if res < tol {
            break;
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz2: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz2 / rz;
        rz = rz2;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, res)
}

/// Coefficients of the unique polynomial of degree < n through (i, ys[i]), i = 0..n.
pub fn interpolate_integer_nodes(ys: &[BigInt]) -> Vec<BigRational> {
    let n = ys.len();
    let mut coeffs = vec![BigRational::zero(); n];
    for i in 0..n {
        // basis polynomial prod_{j != i} (x - j) / (i - j)
        let mut basis = vec![BigRational::one()];
        let mut denom = BigInt::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (k, c) in basis.iter().enumerate() {
                next[k + 1] += c.clone();
                next[k] -= c * BigRational::from_integer(BigInt::from(j));
            }
            basis = next;
            denom *= BigInt::from(i as i64 - j as i64);
        }
        let scale = BigRational::new(ys[i].clone(), denom);
        for (k, c) in basis.into_iter().enumerate() {
            coeffs[k] += c * &scale;
        }
    }
    coeffs
}

/// det(I - E) - 1 for a 3×3 matrix, expanded in elementary symmetric functions
/// so that small E loses no digits.
pub fn det_i_minus_minus_one3(e: &[[f64; 3]; 3]) -> f64 {
    let tr = e[0][0] + e[1][1] + e[2][2];
    let m2 = e[0][0] * e[1][1] - e[0][1] * e[1][0] + e[0][0] * e[2][2] - e[0][2] * e[2][0]
        + e[1][1] * e[2][2]
        - e[1][2] * e[2][1];
    -tr + m2 - det3(e)
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn inv3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let d = det3(m);
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, e) = ((i + 1) % 3, (i + 2) % 3);
            r[i][j] = (m[a][c] * m[b][e] - m[a][e] * m[b][c]) / d;
        }
    }
    r
}

pub fn mul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_small() {
        let m = to_big(&[vec![2, -1], vec![-1, 2]]);
        assert_eq!(bareiss_det(m), BigInt::from(3));
        let m = to_big(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(bareiss_det(m), BigInt::from(-1));
    }

    #[test]
    fn smith_known() {
        let m = to_big(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(smith_invariants(m), vec![BigInt::from(1), BigInt::from(6)]);
        let m = to_big(&[vec![4, -1, -1], vec![-1, 4, -1], vec![-1, -1, 4]]);
        let d = smith_invariants(m);
        assert_eq!(d, vec![BigInt::from(1), BigInt::from(5), BigInt::from(10)]);
    }

    #[test]
    fn inverse_3x3() {
        let m = [[4.0, -1.0, 0.5], [-1.0, 4.0, -1.0], [0.0, -1.0, 4.0]];
        let p = mul3(&m, &inv3(&m));
        for i in 0..3 {
            for j in 0..3 {
                assert!((p[i][j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let ys: Vec<BigInt> = (0..4).map(|x: i64| BigInt::from(4 - 3 * x + x * x * x)).collect();
        let c = interpolate_integer_nodes(&ys);
        let want = [4, -3, 0, 1];
        for (a, b) in c.iter().zip(want) {
            assert_eq!(*a, BigRational::from_integer(b.into()));
        }
    }

    #[test]
    fn lu_solve_and_det() {
        let m = vec![vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]];
        let lu = Lu::new(&m);
        assert!((lu.det() - 4.0).abs() < 1e-12);
        let x = lu.solve(&[1.0, 0.0, 0.0]);
        assert!((x[0] - 0.75).abs() < 1e-12 && (x[2] - 0.25).abs() < 1e-12);
    }
}
