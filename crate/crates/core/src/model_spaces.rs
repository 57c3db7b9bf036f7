//! Model spaces `K_Θ = H² ⊖ ΘH²` for Blaschke pullbacks, and the
//! eigenvectors and root vectors of the backward shift `S*_{χ₁}`.
//!
//! Everything lives on the cyclic coordinates `χ₁ᵐ, m ≥ 0`; the complement
//! of `Xⁱ` in `X₊` is only checked at the index level.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::build_circle_hankel;
use crate::ordered_group::{ConeSign, OrderSpec, TruncationBox};
use crate::spectral::svd::{numerical_rank, singular_values};
use crate::symbols::{
    annihilating_blaschke, antianalytic_residual, blaschke_coefficients, BlaschkePullback, CoefficientSource,
    RationalPullback,
};
use crate::C64;

/// Largest admissible tail of a stored Cauchy vector.
pub const CAUCHY_TAIL_TOL: f64 = 1e-12;
/// Threshold for counting directions of `K_Θ`.
pub const MODEL_SPACE_TOL: f64 = 1e-8;
/// Largest box used for the index-level complement check.
pub const COMPLEMENT_BOX: u32 = 8;

fn check_disc(l: C64) -> Result<()> {
    if l.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisc { re: l.re, im: l.im })
    }
}

fn binom(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

fn l2(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Taylor coefficients of `zᵏ/(1 − λz)^{k+1}`, i.e. `binom(m, k)·λ^{m−k}`
/// at `m ≥ k`, stored to length `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyVector {
    pub lambda: C64,
    pub k: usize,
    pub coeffs: Vec<C64>,
    /// Bound on the `ℓ²` norm of the coefficients at indices `≥ N`.
    pub tail_bound: f64,
}

impl CauchyVector {
    /// Fails unless the tail bound is below [`CAUCHY_TAIL_TOL`].
    pub fn new(lambda: C64, k: usize, len: usize) -> Result<Self> {
        let v = Self::unchecked(lambda, k, len)?;
        if v.tail_bound >= CAUCHY_TAIL_TOL {
            return Err(Error::TailTooLarge { tail: v.tail_bound, tol: CAUCHY_TAIL_TOL });
        }
        Ok(v)
    }

    pub fn unchecked(lambda: C64, k: usize, len: usize) -> Result<Self> {
        check_disc(lambda)?;
        let coeffs = (0..len)
            .map(|m| if m < k { C64::new(0.0, 0.0) } else { lambda.powu((m - k) as u32) * binom(m, k) })
            .collect();
        Ok(CauchyVector { lambda, k, coeffs, tail_bound: Self::tail(lambda.norm(), k, len) })
    }

    /// Geometric majorant of `(Σ_{m≥N} |binom(m,k) λ^{m−k}|²)^{1/2}`.
    fn tail(r: f64, k: usize, len: usize) -> f64 {
        let start = len.max(k);
        if r == 0.0 {
            return if start == k && len <= k { 1.0 } else { 0.0 };
        }
        // consecutive terms shrink at least by `ratio` once m ≥ start
        let ratio = (start + 1) as f64 / (start + 1 - k) as f64 * r;
        if ratio >= 1.0 {
            return f64::INFINITY;
        }
        let first = binom(start, k) * r.powi((start - k) as i32);
        first / (1.0 - ratio * ratio).sqrt()
    }

    /// Shortest length meeting [`CAUCHY_TAIL_TOL`].
    pub fn length_for(lambda: C64, k: usize) -> Result<usize> {
        check_disc(lambda)?;
        let mut n = k + 1;
        while Self::tail(lambda.norm(), k, n) >= CAUCHY_TAIL_TOL {
            n += 1;
        }
        Ok(n)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2(&self.coeffs)
    }
}

/// Truncated `S* − λ`: `(S*v − λv)[m] = v[m+1] − λ v[m]` for `m < N − 1`.
fn shift_minus(v: &[C64], lambda: C64) -> Vec<C64> {
    v.windows(2).map(|w| w[1] - lambda * w[0]).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCheck {
    pub residual: f64,
    pub tail_bound: f64,
    /// Tail bound plus the rounding allowance of the closed-form
    /// coefficients.
    pub declared_bound: f64,
    pub pass: bool,
}

fn rounding_allowance(v: &CauchyVector) -> f64 {
    8.0 * f64::EPSILON * (v.k + 1) as f64 * v.norm()
}

/// `‖S*k_λ − λ k_λ‖₂` on the indices that survive truncation.
pub fn beurling_eigencheck(lambda: C64, spec: &OrderSpec, len: usize) -> Result<EigenCheck> {
    spec.least_positive().ok_or(Error::NoLeastPositive)?;
    let v = CauchyVector::new(lambda, 0, len)?;
    let residual = l2(&shift_minus(&v.coeffs, lambda));
    let declared_bound = v.tail_bound + rounding_allowance(&v);
    Ok(EigenCheck { residual, tail_bound: v.tail_bound, declared_bound, pass: residual <= declared_bound })
}

/// `{CauchyVector(λ, k) : 0 ≤ k < n}`, a basis of `Ker (S* − λ)ⁿ`.
pub fn root_subspace_basis(lambda: C64, n: usize, spec: &OrderSpec, len: usize) -> Result<Vec<CauchyVector>> {
    spec.least_positive().ok_or(Error::NoLeastPositive)?;
    if n == 0 {
        return Err(Error::InvalidArgument("root subspace order must be at least 1".into()));
    }
    (0..n).map(|k| CauchyVector::new(lambda, k, len)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCheck {
    /// `‖(S* − λ)v_k − v_{k−1}‖₂` for `k = 0..n` (with `v_{−1} = 0`).
    pub chain_residuals: Vec<f64>,
    /// `max_k ‖(S* − λ)ⁿ v_k‖₂`.
    pub power_residual: f64,
    pub declared_bound: f64,
    pub pass: bool,
}

pub fn chain_check(basis: &[CauchyVector]) -> Result<ChainCheck> {
    let Some(first) = basis.first() else {
        return Err(Error::InvalidArgument("empty basis".into()));
    };
    let lambda = first.lambda;
    let n = basis.len();
    let mut chain = Vec::with_capacity(n);
    for (k, v) in basis.iter().enumerate() {
        let img = shift_minus(&v.coeffs, lambda);
        let r = if k == 0 {
            l2(&img)
        } else {
            let prev = &basis[k - 1].coeffs;
            img.iter().zip(prev).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
        };
        chain.push(r);
    }
    let power_residual = basis
        .iter()
        .map(|v| {
            let mut w = v.coeffs.clone();
            for _ in 0..n {
                w = shift_minus(&w, lambda);
            }
            l2(&w)
        })
        .fold(0.0, f64::max);
    let bound = n as f64 * basis.iter().map(|v| v.tail_bound + rounding_allowance(v)).fold(0.0, f64::max);
    let pass = chain.iter().all(|&r| r <= bound) && power_residual <= bound;
    Ok(ChainCheck { chain_residuals: chain, power_residual, declared_bound: bound, pass })
}

/// Root vectors of `S*` spanning `K_Θ`: for each zero `λ` of multiplicity
/// `m`, the vectors `CauchyVector(λ̄, k)` with `k < m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpaceBasis {
    pub entries: Vec<CauchyVector>,
    /// Ratio of extreme eigenvalues of the Gram matrix.
    pub gram_condition: f64,
}

impl ModelSpaceBasis {
    pub fn new(theta: &BlaschkePullback, len: usize) -> Result<Self> {
        let mut entries = Vec::with_capacity(theta.degree());
        for (z, m) in theta.zero_multiplicities() {
            for k in 0..m {
                entries.push(CauchyVector::unchecked(z.conj(), k, len)?);
            }
        }
        let d = entries.len();
        let gram_condition = if d == 0 {
            1.0
        } else {
            let g = DMatrix::from_fn(d, d, |i, j| {
                entries[i].coeffs.iter().zip(&entries[j].coeffs).map(|(a, b)| a.conj() * b).sum::<C64>()
            });
            let ev = SymmetricEigen::new(g).eigenvalues;
            let (lo, hi) = ev.iter().fold((f64::MAX, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
            if lo <= 0.0 {
                f64::INFINITY
            } else {
                hi / lo
            }
        };
        Ok(ModelSpaceBasis { entries, gram_condition })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Largest relative tail among the entries.
    pub fn relative_tail(&self) -> f64 {
        self.entries.iter().map(|v| v.tail_bound / v.norm().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpaceReport {
    pub size: usize,
    pub numerical_dim: usize,
    pub predicted_dim: usize,
    /// Leading eigenvalues of `I − T_N T_N*`.
    pub leading_eigenvalues: Vec<f64>,
    pub basis: ModelSpaceBasis,
    /// `max |(I − T T*)v − v|` over the normalised basis vectors.
    pub basis_residual: f64,
    pub complement_box: u32,
    pub complement_pairs: usize,
    pub complement_violations: usize,
    pub pass: bool,
}

/// Dimension of `K_Θ` read off the truncated multiplication operator.
///
/// With `T_N` the `N × N` lower-triangular Toeplitz matrix of the Taylor
/// coefficients of `B`, `I − T_N T_N*` is the compression of the projection
/// onto `K_Θ`, so its rank is `dim K_Θ` once `N` resolves the root vectors.
pub fn model_space_dim(theta: &BlaschkePullback, spec: &OrderSpec, bx: TruncationBox) -> Result<ModelSpaceReport> {
    let chi1 = spec.least_positive().ok_or(Error::NoLeastPositive)?;
    let n = bx.bound as usize + 1;
    let basis = ModelSpaceBasis::new(theta, n)?;
    let tail = basis.relative_tail();
    if tail > MODEL_SPACE_TOL {
        return Err(Error::TailTooLarge { tail, tol: MODEL_SPACE_TOL });
    }
    let b = blaschke_coefficients(theta, n.saturating_sub(1).max(theta.degree()))?;
    let t = DMatrix::from_fn(n, n, |i, j| if i >= j { b[i - j] } else { C64::new(0.0, 0.0) });
    let proj = DMatrix::<C64>::identity(n, n) - &t * t.adjoint();
    let s = singular_values(&proj)?;
    let numerical_dim = s.iter().filter(|&&x| x > MODEL_SPACE_TOL).count();

    let basis_residual = basis
        .entries
        .iter()
        .map(|v| {
            let x = nalgebra::DVector::from_iterator(n, v.coeffs.iter().map(|c| c / v.norm()));
            (&proj * &x - &x).camax()
        })
        .fold(0.0, f64::max);

    // Θ has support {jχ₁ : j ≥ 0}; multiplication must keep X₊ ∖ Xⁱ inside itself
    let sub = TruncationBox::new(bx.bound.min(COMPLEMENT_BOX));
    let mut pairs = 0;
    let mut violations = 0;
    for chi in spec.enumerate_cone(sub, ConeSign::Nonneg) {
        if spec.cyclic_index(&chi)?.is_some() {
            continue;
        }
        for j in 0..=theta.degree().max(1) as i64 {
            let moved = spec.add(&chi, &spec.scale(&chi1, j)?)?;
            pairs += 1;
            if !spec.is_nonneg(&moved)? || spec.cyclic_index(&moved)?.is_some() {
                violations += 1;
            }
        }
    }

    let predicted_dim = theta.degree();
    Ok(ModelSpaceReport {
        size: n,
        numerical_dim,
        predicted_dim,
        leading_eigenvalues: s.iter().take(predicted_dim + 2).copied().collect(),
        basis,
        basis_residual,
        complement_box: sub.bound,
        complement_pairs: pairs,
        complement_violations: violations,
        pass: numerical_dim == predicted_dim && violations == 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnihilationReport {
    pub theta_degree: usize,
    /// Largest `z̄ⁿ` coefficient of `B·R` for `1 ≤ n ≤ 2N`.
    pub residual: f64,
    pub numerical_rank: usize,
    pub degree: usize,
    pub rank_bound_pass: bool,
}

/// Checks that the annihilating Blaschke product clears the antianalytic
/// part of `R∘χ₁`, and that `rank H = deg R ≤ deg Θ`.
pub fn annihilation_check(r: &RationalPullback, spec: &OrderSpec, len: usize) -> Result<AnnihilationReport> {
    spec.least_positive().ok_or(Error::NoLeastPositive)?;
    let theta = annihilating_blaschke(r)?;
    let upto = 2 * len;
    let b = blaschke_coefficients(&theta, upto)?;
    let c = r.coefficients(2 * upto + 1);
    let residual = antianalytic_residual(&b, &c, upto);
    let h = build_circle_hankel(&r.coefficients(2 * len - 1), len);
    let (rank, _) = numerical_rank(&singular_values(&h.entries)?);
    let degree = r.degree();
    Ok(AnnihilationReport {
        theta_degree: theta.degree(),
        residual,
        numerical_rank: rank,
        degree,
        rank_bound_pass: rank == degree && degree <= theta.degree(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::PoleTerm;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn lex(n: usize) -> OrderSpec {
        OrderSpec::IntLex { n }
    }

    #[test]
    fn cauchy_vector_matches_series_division() {
        // oracle: expand z^k/(1 − λz)^{k+1} by repeated multiplication with
        // the geometric series
        let lambda = C64::new(0.3, -0.45);
        let n = 40;
        let geo: Vec<C64> = (0..n).map(|m| lambda.powu(m as u32)).collect();
        for k in 0..4 {
            let mut s = vec![c(0.0); n];
            s[k] = c(1.0);
            for _ in 0..=k {
                s = crate::series::mul(&s, &geo, n);
            }
            let v = CauchyVector::unchecked(lambda, k, n).unwrap();
            let err = s.iter().zip(&v.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-13, "k = {k}: {err}");
        }
    }

    #[test]
    fn eigencheck_examples() {
        let r = beurling_eigencheck(c(0.0), &lex(1), 8).unwrap();
        assert_eq!(r.residual, 0.0);
        let r = beurling_eigencheck(c(0.5), &lex(1), 64).unwrap();
        assert!(r.residual < 1e-12 && r.pass);
        let r = beurling_eigencheck(c(0.9), &lex(2), 512).unwrap();
        assert!(r.residual < 1e-12 && r.pass);
        assert!(beurling_eigencheck(c(0.9), &lex(1), 64).is_err());
        assert!(beurling_eigencheck(c(1.0), &lex(1), 64).is_err());
        assert!(beurling_eigencheck(c(0.5), &OrderSpec::RatNatural, 64).is_err());
    }

    #[test]
    fn root_subspace_examples() {
        let b = root_subspace_basis(c(0.0), 2, &lex(1), 6).unwrap();
        assert_eq!(b[0].coeffs[..3], [c(1.0), c(0.0), c(0.0)]);
        assert_eq!(b[1].coeffs[..3], [c(0.0), c(1.0), c(0.0)]);

        let b = root_subspace_basis(c(0.5), 1, &lex(1), 64).unwrap();
        for (m, x) in b[0].coeffs.iter().enumerate() {
            assert_eq!(*x, c(0.5f64.powi(m as i32)));
        }

        let b = root_subspace_basis(c(0.5), 3, &lex(1), 128).unwrap();
        let ch = chain_check(&b).unwrap();
        assert!(ch.pass);
        assert!(ch.chain_residuals.iter().all(|&r| r < 1e-11));
        assert!(ch.power_residual < 1e-11);
        assert!(root_subspace_basis(c(0.5), 0, &lex(1), 64).is_err());
    }

    #[test]
    fn tail_length_is_enough() {
        for k in 0..4 {
            let l = C64::new(0.0, 0.95);
            let n = CauchyVector::length_for(l, k).unwrap();
            assert!(CauchyVector::new(l, k, n).is_ok());
            assert!(CauchyVector::new(l, k, n - 1).is_err());
            // the majorant dominates the actual tail
            let long = CauchyVector::unchecked(l, k, n + 2000).unwrap();
            let actual = l2(&long.coeffs[n..]);
            assert!(actual <= CauchyVector::unchecked(l, k, n).unwrap().tail_bound);
        }
    }

    #[test]
    fn model_space_examples() {
        let one = c(1.0);
        let r = model_space_dim(&BlaschkePullback::new(vec![c(0.0)], one).unwrap(), &lex(1), TruncationBox::new(16))
            .unwrap();
        assert_eq!((r.numerical_dim, r.predicted_dim), (1, 1));
        assert_eq!(r.basis.entries[0].coeffs[0], one);
        assert!(r.basis.entries[0].coeffs[1..].iter().all(|x| *x == c(0.0)));

        let theta = BlaschkePullback::new(vec![c(0.0), c(0.5)], one).unwrap();
        let r = model_space_dim(&theta, &lex(1), TruncationBox::new(63)).unwrap();
        assert_eq!(r.numerical_dim, 2);
        assert!(r.pass && r.basis_residual < 1e-12);

        let r = model_space_dim(
            &BlaschkePullback::new(vec![], C64::new(0.0, 1.0)).unwrap(),
            &lex(2),
            TruncationBox::new(10),
        )
        .unwrap();
        assert_eq!(r.numerical_dim, 0);
        assert!(r.pass && r.complement_pairs > 0);
    }

    #[test]
    fn model_space_repeated_and_complex_zeros() {
        let theta = BlaschkePullback::new(
            vec![C64::new(0.4, 0.3), C64::new(0.4, 0.3), C64::new(-0.7, 0.1), c(0.0)],
            C64::from_polar(1.0, 0.3),
        )
        .unwrap();
        let r = model_space_dim(&theta, &lex(2), TruncationBox::new(160)).unwrap();
        assert_eq!(r.numerical_dim, 4);
        assert!(r.pass);
        assert!(r.basis.gram_condition.is_finite());
        assert!(r.basis_residual < 1e-10);
        assert!(model_space_dim(&theta, &lex(2), TruncationBox::new(10)).is_err());
    }

    #[test]
    fn annihilation_examples() {
        let r = RationalPullback::simple(&[c(0.5)], &[c(1.0)]).unwrap();
        let a = annihilation_check(&r, &lex(1), 64).unwrap();
        assert!(a.residual < 1e-12);
        assert!(a.rank_bound_pass && a.numerical_rank == 1);

        let r = RationalPullback::new(vec![PoleTerm { pole: c(0.0), power: 2, coef: c(1.0) }]).unwrap();
        let a = annihilation_check(&r, &lex(1), 16).unwrap();
        assert_eq!(a.residual, 0.0);
        assert_eq!(a.theta_degree, 2);

        let r = RationalPullback::simple(&[c(0.5), c(-1.0 / 3.0)], &[c(1.0), c(1.0)]).unwrap();
        let a = annihilation_check(&r, &lex(2), 64).unwrap();
        assert!(a.residual < 1e-11);
        assert_eq!(a.numerical_rank, 2);
        assert!(a.rank_bound_pass);
    }
}
