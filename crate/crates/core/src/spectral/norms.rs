//! Schatten norms, the nuclear-norm bound for Cauchy kernel sums and the
//! dyadic block estimator used for the Schatten-class dichotomy.

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::build_circle_hankel;
use crate::spectral::svd::singular_values;
use crate::symbols::{CauchyKernelSum, CoefficientSource, DEFAULT_TAIL_TOL};
use crate::C64;

pub fn schatten_from_singular_values(s: &[f64], p: f64) -> Result<f64> {
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("Schatten exponent must be positive, got {p}")));
    }
    Ok(s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `(Σ σ_j^p)^{1/p}` of the truncation.
pub fn schatten_norm(h: &DMatrix<C64>, p: f64) -> Result<f64> {
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("Schatten exponent must be positive, got {p}")));
    }
    schatten_from_singular_values(&singular_values(h)?, p)
}

/// Absolute slack allowed above the certified trace-norm bound.
pub const NUCLEAR_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearReport {
    pub size: usize,
    pub s1_norm: f64,
    pub certified_bound: f64,
    pub tail_bound: f64,
    pub pass: bool,
}

/// Trace norm of the `N × N` truncation against `Σ |c_k|/(1 − |λ_k|²)`.
pub fn nuclear_bound_check(cks: &CauchyKernelSum, size: usize) -> Result<NuclearReport> {
    let tail = cks.tail_bound(size);
    let bound = cks.trace_norm_bound();
    if tail > DEFAULT_TAIL_TOL * bound.max(1.0) {
        return Err(Error::TailTooLarge { tail, tol: DEFAULT_TAIL_TOL * bound.max(1.0) });
    }
    let c = cks.coefficients(2 * size - 1);
    let h = build_circle_hankel(&c, size);
    let s1 = schatten_norm(&h.entries, 1.0)?;
    Ok(NuclearReport { size, s1_norm: s1, certified_bound: bound, tail_bound: tail, pass: s1 <= bound + NUCLEAR_SLACK })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovEstimate {
    pub p: f64,
    /// `2^k ‖Δ_k φ₁‖_p^p` for each dyadic block.
    pub block_norms: Vec<f64>,
    /// Running `(Σ_{j≤k} 2^j ‖Δ_j φ₁‖_p^p)^{1/p}`.
    pub partial_sums: Vec<f64>,
    pub partial_quasinorm: f64,
    pub blocks_used: usize,
}

/// Dyadic block estimator: block `k` holds `c_n` for `n ∈ [2^k, 2^{k+1})`,
/// its `L^p` norm is taken by the trapezoidal rule on `2^{k+3}` points.
/// `c[0]` is `c_1`.
pub fn besov_quasinorm(c: &[C64], p: f64, blocks: usize) -> Result<BesovEstimate> {
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(p > 0.0) {
        return Err(Error::InvalidArgument(format!("Besov exponent must be positive, got {p}")));
    }
    let needed = (1usize << blocks) - 1;
    if c.len() < needed {
        return Err(Error::InvalidArgument(format!("{blocks} blocks need {needed} coefficients, got {}", c.len())));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut block_norms = Vec::with_capacity(blocks);
    let mut partial_sums = Vec::with_capacity(blocks);
    let mut acc = 0.0;
    for k in 0..blocks {
        let samples = 1usize << (k + 3);
        let mut buf = vec![C64::new(0.0, 0.0); samples];
        let (lo, hi) = (1usize << k, 1usize << (k + 1));
        buf[lo..hi].copy_from_slice(&c[lo - 1..hi - 1]);
        // forward transform evaluates Σ c_n e^{−inθ} at θ_s = 2πs/S
        planner.plan_fft_forward(samples).process(&mut buf);
        let mean: f64 = buf.iter().map(|v| v.norm().powf(p)).sum::<f64>() / samples as f64;
        let contribution = (1u64 << k) as f64 * mean;
        acc += contribution;
        block_norms.push(contribution);
        partial_sums.push(acc.powf(1.0 / p));
    }
    Ok(BesovEstimate { p, block_norms, partial_quasinorm: acc.powf(1.0 / p), partial_sums, blocks_used: blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn schatten_two_is_frobenius() {
        let h = DMatrix::from_fn(6, 5, |i, j| C64::new((i as f64 - j as f64).sin(), (i * j) as f64 / 7.0));
        let s2 = schatten_norm(&h, 2.0).unwrap();
        let fro = h.iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!((s2 * s2 - fro).abs() <= 1e-10 * fro);
        assert!(schatten_norm(&h, 0.0).is_err());
        assert!(schatten_norm(&h, -1.0).is_err());
    }

    #[test]
    fn nuclear_single_term() {
        let k = CauchyKernelSum::new(vec![(c(1.0), c(0.5))]).unwrap();
        let r = nuclear_bound_check(&k, 128).unwrap();
        assert!((r.certified_bound - 4.0 / 3.0).abs() < 1e-15);
        assert!((r.s1_norm - 4.0 / 3.0).abs() < 1e-12, "{r:?}");
        assert!(r.pass);
    }

    #[test]
    fn nuclear_zero_and_two_terms() {
        let k = CauchyKernelSum::new(vec![]).unwrap();
        let r = nuclear_bound_check(&k, 16).unwrap();
        assert_eq!((r.s1_norm, r.certified_bound), (0.0, 0.0));
        assert!(r.pass);

        let k = CauchyKernelSum::new(vec![(c(1.0), c(0.5)), (c(1.0), c(1.0 / 3.0))]).unwrap();
        let r = nuclear_bound_check(&k, 128).unwrap();
        assert!((r.certified_bound - (4.0 / 3.0 + 9.0 / 8.0)).abs() < 1e-14);
        assert!(r.pass);
        // both rank-one terms are positive semidefinite, so the trace norm
        // is the trace and the bound is attained
        assert!((r.s1_norm - r.certified_bound).abs() < 1e-12);
    }

    #[test]
    fn besov_geometric_converges() {
        let coeffs: Vec<C64> = (1..=1024).map(|n| c(0.5f64.powi(n))).collect();
        let est = besov_quasinorm(&coeffs, 1.0, 10).unwrap();
        for (k, b) in est.block_norms.iter().enumerate() {
            // 2^k Σ_{n∈block} |c_n| ≤ 2^k · 2^{1−2^k}
            let majorant = 2f64.powi(k as i32) * 2f64.powf(1.0 - 2f64.powi(k as i32));
            assert!(*b <= majorant * (1.0 + 1e-12), "block {k}: {b} > {majorant}");
        }
        let last = est.partial_sums[9] - est.partial_sums[8];
        assert!(last < 1e-100);
    }

    #[test]
    fn besov_harmonic_diverges() {
        let coeffs: Vec<C64> = (1..=4096).map(|n| c(1.0 / n as f64)).collect();
        let est = besov_quasinorm(&coeffs, 1.0, 12).unwrap();
        // quadrature oracle: direct evaluation of one block on its grid
        let k = 6usize;
        let samples = 1usize << (k + 3);
        let direct: f64 = (0..samples)
            .map(|s| {
                let th = 2.0 * PI * s as f64 / samples as f64;
                (1usize << k..1usize << (k + 1))
                    .map(|n| C64::from_polar(1.0 / n as f64, -(n as f64) * th))
                    .sum::<C64>()
                    .norm()
            })
            .sum::<f64>()
            / samples as f64;
        assert!((est.block_norms[k] - (1u64 << k) as f64 * direct).abs() < 1e-10);
        // block norms of 1/n grow like the L¹ norm of a Dirichlet kernel,
        // linearly in k, so the partial sums grow quadratically
        let steps: Vec<f64> = est.block_norms.windows(2).skip(4).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|d| (0.15..0.35).contains(d)), "{steps:?}");
        assert!(est.partial_quasinorm > 20.0);
    }

    #[test]
    fn besov_zero_and_errors() {
        let est = besov_quasinorm(&vec![c(0.0); 15], 1.5, 4).unwrap();
        assert_eq!(est.partial_quasinorm, 0.0);
        assert!(besov_quasinorm(&vec![c(0.0); 14], 1.0, 4).is_err());
        assert!(besov_quasinorm(&vec![c(0.0); 15], 0.0, 4).is_err());
    }
}
