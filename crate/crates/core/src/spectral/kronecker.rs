use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::build_hankel;
use crate::ordered_group::{OrderSpec, TruncationBox};
use crate::spectral::svd::{numerical_rank, singular_values};
use crate::symbols::{pullback_support, CoefficientSource, RationalPullback};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KroneckerReport {
    pub predicted_rank: usize,
    pub numerical_rank: usize,
    pub tol_used: f64,
    pub tail_bound: f64,
    pub leading_singular_values: Vec<f64>,
    pub pass: bool,
}

/// Compares `deg R` with the numerical rank of the truncated `H_{R∘χ₁}`.
pub fn kronecker_check(r: &RationalPullback, spec: &OrderSpec, bx: TruncationBox) -> Result<KroneckerReport> {
    r.validate()?;
    spec.least_positive().ok_or(Error::NoLeastPositive)?;
    let visible = 2 * bx.bound as usize + 1;
    let coeffs = r.coefficients(visible);
    let tail = r.tail_bound(visible);
    let h = build_hankel(&pullback_support(&coeffs, spec)?, spec, bx)?;
    let s = singular_values(&h.entries)?;
    let (rank, tol) = numerical_rank(&s);
    if tail >= tol {
        return Err(Error::TailTooLarge { tail, tol });
    }
    let predicted = r.degree();
    Ok(KroneckerReport {
        predicted_rank: predicted,
        numerical_rank: rank,
        tol_used: tol,
        tail_bound: tail,
        leading_singular_values: s.iter().take(predicted + 2).copied().collect(),
        pass: predicted == rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::PoleTerm;
    use crate::C64;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn single_pole() {
        let r = RationalPullback::simple(&[c(0.5)], &[c(1.0)]).unwrap();
        let rep = kronecker_check(&r, &OrderSpec::IntLex { n: 1 }, TruncationBox::new(64)).unwrap();
        assert_eq!((rep.predicted_rank, rep.numerical_rank), (1, 1));
        assert!(rep.pass);
        assert!((rep.leading_singular_values[0] - 4.0 / 3.0).abs() < 1e-12);

        let rep = kronecker_check(&r, &OrderSpec::IntLex { n: 2 }, TruncationBox::new(22)).unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn two_poles() {
        let r = RationalPullback::simple(&[c(0.5), c(1.0 / 3.0)], &[c(1.0), c(1.0)]).unwrap();
        let rep = kronecker_check(&r, &OrderSpec::IntLex { n: 1 }, TruncationBox::new(64)).unwrap();
        assert_eq!(rep.numerical_rank, 2);
        assert!(rep.pass);
    }

    #[test]
    fn triple_pole_at_origin() {
        let r = RationalPullback::new(vec![PoleTerm { pole: c(0.0), power: 3, coef: c(1.0) }]).unwrap();
        let rep = kronecker_check(&r, &OrderSpec::IntLex { n: 1 }, TruncationBox::new(8)).unwrap();
        assert_eq!(rep.numerical_rank, 3);
        // anti-diagonal of ones: three unit singular values
        assert!(rep.leading_singular_values[..3].iter().all(|s| (s - 1.0).abs() < 1e-14));
    }

    #[test]
    fn small_box_rejected() {
        let r = RationalPullback::simple(&[c(0.8)], &[c(1.0)]).unwrap();
        let err = kronecker_check(&r, &OrderSpec::IntLex { n: 2 }, TruncationBox::new(4));
        assert!(matches!(err, Err(Error::TailTooLarge { .. })));
        assert!(kronecker_check(&r, &OrderSpec::RatNatural, TruncationBox::new(4)).is_err());
    }
}
