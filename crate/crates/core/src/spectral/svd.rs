use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Relative part of the numerical-rank tolerance.
pub const RANK_REL_TOL: f64 = 1e-9;
/// Absolute floor of the numerical-rank tolerance.
pub const RANK_ABS_TOL: f64 = 1e-12;

/// `max(1e−9·σ_max, 1e−12)`.
pub fn rank_tolerance(s_max: f64) -> f64 {
    (RANK_REL_TOL * s_max).max(RANK_ABS_TOL)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    pub tol_used: f64,
    pub matrix_dims: (usize, usize),
    /// `‖H − UΣV*‖_max`.
    pub reconstruction_residual: f64,
}

impl SpectralReport {
    pub fn s(&self, k: usize) -> f64 {
        self.singular_values.get(k).copied().unwrap_or(0.0)
    }
}

/// Full singular value decomposition with singular values sorted
/// descending. `u` has the left and `v` the right singular vectors as columns.
pub struct Decomposition {
    pub u: DMatrix<C64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<C64>,
}

fn check_finite(h: &DMatrix<C64>) -> Result<()> {
    if h.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Svd("matrix has non-finite entries".into()))
    }
}

pub fn decompose(h: &DMatrix<C64>) -> Result<Decomposition> {
    check_finite(h)?;
    let (m, n) = h.shape();
    if m == 0 || n == 0 {
        return Ok(Decomposition { u: DMatrix::zeros(m, 0), sigma: Vec::new(), v: DMatrix::zeros(n, 0) });
    }
    let svd = h.clone().try_svd(true, true, f64::EPSILON, 0).ok_or_else(|| Error::Svd("no convergence".into()))?;
    let u = svd.u.ok_or_else(|| Error::Svd("missing U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Svd("missing V*".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let k = order.len();
    let u_sorted = DMatrix::from_fn(m, k, |i, j| u[(i, order[j])]);
    let v_sorted = DMatrix::from_fn(n, k, |i, j| v_t[(order[j], i)].conj());
    let sigma = order.iter().map(|&j| svd.singular_values[j]).collect();
    Ok(Decomposition { u: u_sorted, sigma, v: v_sorted })
}

fn is_real(h: &DMatrix<C64>) -> bool {
    h.iter().all(|v| v.im == 0.0)
}

/// Singular values, descending. Real symmetric matrices go through a
/// symmetric eigendecomposition, other real matrices through a real SVD.
pub fn singular_values(h: &DMatrix<C64>) -> Result<Vec<f64>> {
    check_finite(h)?;
    let (m, n) = h.shape();
    if m == 0 || n == 0 {
        return Ok(Vec::new());
    }
    let mut s: Vec<f64> = if is_real(h) {
        let r = h.map(|v| v.re);
        let eig = if m == n && r == r.transpose() {
            let e = SymmetricEigen::new(r.clone()).eigenvalues;
            // the symmetric QR iteration can break down on heavily graded
            // matrices; fall back to the SVD then
            e.iter().all(|x| x.is_finite()).then(|| e.iter().map(|x| x.abs()).collect())
        } else {
            None
        };
        match eig {
            Some(e) => e,
            None => r
                .try_svd(false, false, f64::EPSILON, 0)
                .ok_or_else(|| Error::Svd("no convergence".into()))?
                .singular_values
                .iter()
                .copied()
                .collect(),
        }
    } else {
        h.clone()
            .try_svd(false, false, f64::EPSILON, 0)
            .ok_or_else(|| Error::Svd("no convergence".into()))?
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Spectral norm.
pub fn operator_norm(h: &DMatrix<C64>) -> Result<f64> {
    Ok(singular_values(h)?.first().copied().unwrap_or(0.0))
}

pub fn numerical_rank(s: &[f64]) -> (usize, f64) {
    let tol = rank_tolerance(s.first().copied().unwrap_or(0.0));
    (s.iter().filter(|&&x| x > tol).count(), tol)
}

pub fn svd_report(h: &DMatrix<C64>) -> Result<SpectralReport> {
    let d = decompose(h)?;
    let (rank, tol) = numerical_rank(&d.sigma);
    let sig = DVector::from_iterator(d.sigma.len(), d.sigma.iter().map(|s| C64::new(*s, 0.0)));
    let residual = if d.sigma.is_empty() {
        0.0
    } else {
        let rebuilt = &d.u * DMatrix::from_diagonal(&sig) * d.v.adjoint();
        (h - rebuilt).iter().map(|v| v.norm()).fold(0.0, f64::max)
    };
    Ok(SpectralReport {
        singular_values: d.sigma,
        numerical_rank: rank,
        tol_used: tol,
        matrix_dims: h.shape(),
        reconstruction_residual: residual,
    })
}
