//! Truncated power series and polynomial helpers over `C64`.
//!
//! Series and polynomials are coefficient vectors in ascending degree.

use nalgebra::DMatrix;

use crate::C64;

/// Cauchy product truncated to `len` coefficients.
pub fn mul(a: &[C64], b: &[C64], len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.norm_sqr() == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients of `∏ (1 − a_i z)` (full degree).
pub fn product_of_linear(roots_inv: &[C64]) -> Vec<C64> {
    let mut p = vec![C64::new(1.0, 0.0)];
    for a in roots_inv {
        let mut next = vec![C64::new(0.0, 0.0); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= a * c;
        }
        p = next;
    }
    p
}

/// Horner evaluation.
pub fn eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

pub fn derivative(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Drops trailing coefficients whose modulus is at most `tol · max|p_k|`.
pub fn trim(p: &[C64], tol: f64) -> Vec<C64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut end = p.len();
    while end > 0 && p[end - 1].norm() <= tol * scale {
        end -= 1;
    }
    p[..end].to_vec()
}

/// Roots of a polynomial through the eigenvalues of its companion matrix,
/// each polished by a few Newton steps.
pub fn roots(p: &[C64]) -> Vec<C64> {
    let p = trim(p, 0.0);
    if p.len() <= 1 {
        return Vec::new();
    }
    let deg = p.len() - 1;
    let lead = p[deg];
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for k in 0..deg {
        comp[(0, k)] = -p[deg - 1 - k] / lead;
    }
    for k in 1..deg {
        comp[(k, k - 1)] = C64::new(1.0, 0.0);
    }
    let eig = comp.schur().unpack().1;
    let dp = derivative(&p);
    (0..deg)
        .map(|k| {
            let mut z = eig[(k, k)];
            for _ in 0..3 {
                let d = eval(&dp, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = eval(&p, z) / d;
                if !step.re.is_finite() || !step.im.is_finite() {
                    break;
                }
                z -= step;
            }
            z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn product_and_eval() {
        // (1 − z/2)(1 − z/3) = 1 − 5z/6 + z²/6
        let p = product_of_linear(&[c(0.5), c(1.0 / 3.0)]);
        assert!((p[1] - c(-5.0 / 6.0)).norm() < 1e-15);
        assert!((p[2] - c(1.0 / 6.0)).norm() < 1e-15);
        assert!(eval(&p, c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn roots_of_quadratic() {
        // (z − i)(z + 0.5) = z² + (0.5 − i) z − 0.5i
        let p = vec![C64::new(0.0, -0.5), C64::new(0.5, -1.0), c(1.0)];
        let mut r = roots(&p);
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((r[0] - c(-0.5)).norm() < 1e-13);
        assert!((r[1] - C64::new(0.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn series_product_inverts_geometric() {
        let g: Vec<C64> = (0..10).map(|k| c(0.5f64.powi(k))).collect();
        let one = mul(&g, &[c(1.0), c(-0.5)], 10);
        assert!((one[0] - c(1.0)).norm() < 1e-15);
        assert!(one[1..].iter().all(|x| x.norm() < 1e-15));
    }
}
