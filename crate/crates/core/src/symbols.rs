//! Symbols of Hankel operators and their Fourier coefficients.
//!
//! Every symbol reduces to a finite map from group elements to complex
//! coefficients. Symbols that factor through the least positive character
//! `χ₁` (rational pullbacks, Cauchy kernel sums) are described by the
//! coefficient sequence `c_1, c_2, …` of their antianalytic part
//! `Σ_{n≥1} c_n χ̄₁ⁿ`, together with a certified bound on the discarded tail.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordered_group::{GroupElement, OrderSpec};
use crate::series;
use crate::C64;

/// Coefficients below this modulus are dropped from Fourier symbols.
pub const COEFF_DROP: f64 = 1e-15;
/// Maximum deviation of `|B|` from 1 on the unit circle.
pub const BLASCHKE_MODULUS_TOL: f64 = 1e-10;
/// Default truncation target for coefficient tails.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

const CIRCLE_SAMPLES: usize = 256;

fn check_disc(z: C64) -> Result<()> {
    if z.norm() < 1.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::OutsideDisc { re: z.re, im: z.im })
    }
}

/// A finitely supported function on the dual group.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierSymbol {
    terms: BTreeMap<GroupElement, C64>,
}

impl FourierSymbol {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a symbol, summing repeated elements and dropping coefficients
    /// below [`COEFF_DROP`].
    pub fn from_terms(terms: impl IntoIterator<Item = (GroupElement, C64)>) -> Self {
        let mut s = Self::new();
        for (e, c) in terms {
            *s.terms.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        s.terms.retain(|_, c| c.norm() >= COEFF_DROP);
        s
    }

    pub fn get(&self, e: &GroupElement) -> C64 {
        self.terms.get(e).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn validate(&self, spec: &OrderSpec) -> Result<()> {
        self.terms.keys().try_for_each(|e| spec.check(e))
    }

    pub fn add(&self, other: &FourierSymbol) -> FourierSymbol {
        FourierSymbol::from_terms(self.terms.iter().chain(other.terms.iter()).map(|(e, c)| (e.clone(), *c)))
    }

    /// `P₋`: keeps the strictly negative part of the support.
    pub fn project_minus(&self, spec: &OrderSpec) -> Result<FourierSymbol> {
        self.split(spec, false)
    }

    /// `P₊`: keeps the nonnegative part of the support.
    pub fn project_plus(&self, spec: &OrderSpec) -> Result<FourierSymbol> {
        self.split(spec, true)
    }

    fn split(&self, spec: &OrderSpec, nonneg: bool) -> Result<FourierSymbol> {
        let mut out = FourierSymbol::new();
        for (e, c) in &self.terms {
            if spec.is_nonneg(e)? == nonneg {
                out.terms.insert(e.clone(), *c);
            }
        }
        Ok(out)
    }

    /// Sum of `|coefficient|` over support elements outside `{−n·χ₁}`.
    pub fn off_cyclic_mass(&self, spec: &OrderSpec) -> Result<f64> {
        let mut mass = 0.0;
        for (e, c) in &self.terms {
            match spec.cyclic_index(e)? {
                Some(k) if k < 0 => {}
                _ => mass += c.norm(),
            }
        }
        Ok(mass)
    }

    /// Coefficients `c_n` at `−n·χ₁` for `n = 1..=len`.
    pub fn cyclic_coefficients(&self, spec: &OrderSpec, len: usize) -> Result<Vec<C64>> {
        let mut c = vec![C64::new(0.0, 0.0); len];
        for (e, v) in &self.terms {
            if let Some(k) = spec.cyclic_index(e)? {
                if k < 0 && ((-k) as usize) <= len {
                    c[(-k) as usize - 1] = *v;
                }
            }
        }
        Ok(c)
    }
}

/// A source of the coefficients `c_1, c_2, …` of an antianalytic function
/// `Σ_{n≥1} c_n z̄ⁿ` on the circle.
pub trait CoefficientSource: Send + Sync {
    /// `c_1..=c_len`.
    fn coefficients(&self, len: usize) -> Vec<C64>;

    /// Upper bound on `Σ_{n>len} |c_n|`; `f64::INFINITY` when unknown.
    fn tail_bound(&self, len: usize) -> f64;

    /// Smallest `len` with `tail_bound(len) < tol`, capped at `cap`.
    fn truncation_for(&self, tol: f64, cap: usize) -> usize {
        let mut n = 1;
        while n < cap && self.tail_bound(n) >= tol {
            n += 1;
        }
        n
    }
}

/// One partial-fraction term `coef / (z − pole)^power`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleTerm {
    pub pole: C64,
    pub power: u32,
    pub coef: C64,
}

/// The symbol `R∘χ₁` for a rational `R` with all poles in the open unit disc,
/// vanishing at infinity, stored in partial-fraction form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RationalPullback {
    pub terms: Vec<PoleTerm>,
}

/// Distinct poles with multiplicities (highest power carrying a nonzero
/// coefficient).
pub type PoleMultiplicities = Vec<(C64, u32)>;

impl RationalPullback {
    pub fn new(terms: Vec<PoleTerm>) -> Result<Self> {
        let r = RationalPullback { terms };
        r.validate()?;
        Ok(r)
    }

    /// `Σ residues_i / (z − poles_i)`.
    pub fn simple(poles: &[C64], residues: &[C64]) -> Result<Self> {
        Self::new(poles.iter().zip(residues).map(|(&pole, &coef)| PoleTerm { pole, power: 1, coef }).collect())
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            check_disc(t.pole)?;
            if t.power == 0 {
                return Err(Error::InvalidArgument("pole power must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn poles(&self) -> PoleMultiplicities {
        let mut out: PoleMultiplicities = Vec::new();
        for t in &self.terms {
            if t.coef.norm() == 0.0 {
                continue;
            }
            match out.iter_mut().find(|(p, _)| *p == t.pole) {
                Some((_, m)) => *m = (*m).max(t.power),
                None => out.push((t.pole, t.power)),
            }
        }
        out
    }

    /// `deg R`, the sum of pole multiplicities.
    pub fn degree(&self) -> usize {
        self.poles().iter().map(|(_, m)| *m as usize).sum()
    }

    pub fn radius(&self) -> f64 {
        self.terms.iter().map(|t| t.pole.norm()).fold(0.0, f64::max)
    }

    /// Denominator `∏ (1 − λ_i z̄)^{m_i}` as a polynomial in `z̄`.
    pub fn denominator_in_conj(&self) -> Vec<C64> {
        let mut inv = Vec::new();
        for (p, m) in self.poles() {
            inv.extend(std::iter::repeat_n(p, m as usize));
        }
        series::product_of_linear(&inv)
    }

    /// Evaluates `R(z)` away from the poles.
    pub fn eval(&self, z: C64) -> C64 {
        self.terms.iter().map(|t| t.coef / (z - t.pole).powu(t.power)).sum()
    }
}

/// Certified `Σ_{n>len} binom(n−1, m−1) r^{n−m}`.
fn pole_tail(r: f64, m: u32, len: usize) -> f64 {
    let m_us = m as usize;
    if r == 0.0 {
        return if m_us > len { 1.0 } else { 0.0 };
    }
    let start = len.max(m_us - 1) + 1;
    // term at n = start
    let mut t = 1.0f64;
    for n in m_us..start {
        t *= r * n as f64 / (n - m_us + 1) as f64;
    }
    let mut sum = 0.0;
    let mut n = start;
    loop {
        let ratio = r * n as f64 / (n - m_us + 1) as f64;
        if ratio < 1.0 {
            // ratios decrease in n, so the rest is dominated by a geometric series
            return sum + t / (1.0 - ratio);
        }
        sum += t;
        t *= ratio;
        n += 1;
        if !t.is_finite() {
            return f64::INFINITY;
        }
    }
}

impl CoefficientSource for RationalPullback {
    fn coefficients(&self, len: usize) -> Vec<C64> {
        let mut c = vec![C64::new(0.0, 0.0); len];
        for t in &self.terms {
            // 1/(z−λ)^m = Σ_{n≥m} binom(n−1, m−1) λ^{n−m} z̄ⁿ
            let m = t.power as usize;
            if m > len {
                continue;
            }
            let mut v = t.coef;
            c[m - 1] += v;
            for n in m..len {
                v *= t.pole * (n as f64 / (n - m + 1) as f64);
                c[n] += v;
            }
        }
        c
    }

    fn tail_bound(&self, len: usize) -> f64 {
        self.terms.iter().map(|t| t.coef.norm() * pole_tail(t.pole.norm(), t.power, len)).sum()
    }
}

/// `Σ c_k · χ̄₁/(1 − λ_k χ̄₁)`: sums of Cauchy kernels in `H²₋`, each
/// contributing `c_k λ_k^{n−1}` to the coefficient of `χ̄₁ⁿ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CauchyKernelSum {
    pub terms: Vec<(C64, C64)>,
}

impl CauchyKernelSum {
    pub fn new(terms: Vec<(C64, C64)>) -> Result<Self> {
        for (_, l) in &terms {
            check_disc(*l)?;
        }
        Ok(CauchyKernelSum { terms })
    }

    /// `Σ |c_k| / (1 − |λ_k|²)`, the sum of the trace norms of the rank-one terms.
    pub fn trace_norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, l)| c.norm() / (1.0 - l.norm_sqr())).sum()
    }

    pub fn to_rational(&self) -> RationalPullback {
        RationalPullback { terms: self.terms.iter().map(|&(coef, pole)| PoleTerm { pole, power: 1, coef }).collect() }
    }
}

impl CoefficientSource for CauchyKernelSum {
    fn coefficients(&self, len: usize) -> Vec<C64> {
        self.to_rational().coefficients(len)
    }

    fn tail_bound(&self, len: usize) -> f64 {
        self.to_rational().tail_bound(len)
    }
}

/// An explicit coefficient list with a declared tail bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientList {
    pub coeffs: Vec<C64>,
    /// Bound on `Σ |c_n|` beyond the stored coefficients.
    pub tail: f64,
}

impl CoefficientList {
    /// A finitely supported sequence (zero tail).
    pub fn finite(coeffs: Vec<C64>) -> Self {
        CoefficientList { coeffs, tail: 0.0 }
    }
}

impl CoefficientSource for CoefficientList {
    fn coefficients(&self, len: usize) -> Vec<C64> {
        let mut c = self.coeffs.clone();
        c.resize(len, C64::new(0.0, 0.0));
        c
    }

    fn tail_bound(&self, len: usize) -> f64 {
        let stored: f64 = self.coeffs.iter().skip(len).map(|c| c.norm()).sum();
        stored + self.tail
    }
}

/// Coefficients `c_n = f(n)` of an infinite sequence with no known tail bound
/// (for instance `1/n`).
pub struct CoefficientFn<F>(pub F);

impl<F: Fn(usize) -> C64 + Send + Sync> CoefficientSource for CoefficientFn<F> {
    fn coefficients(&self, len: usize) -> Vec<C64> {
        (1..=len).map(&self.0).collect()
    }

    fn tail_bound(&self, _len: usize) -> f64 {
        f64::INFINITY
    }
}

/// `c_1..c_N` with the certified tail bound.
pub fn expand_coefficients(src: &dyn CoefficientSource, len: usize) -> Result<(Vec<C64>, f64)> {
    if len == 0 {
        return Err(Error::InvalidArgument("expansion length must be at least 1".into()));
    }
    Ok((src.coefficients(len), src.tail_bound(len)))
}

/// The symbol `Σ c_n · (−n·χ₁)`.
pub fn pullback_support(c: &[C64], spec: &OrderSpec) -> Result<FourierSymbol> {
    let chi1 = spec.least_positive().ok_or(Error::NoLeastPositive)?;
    let mut terms = Vec::new();
    for (i, v) in c.iter().enumerate() {
        if v.norm() >= COEFF_DROP {
            terms.push((spec.scale(&chi1, -(i as i64 + 1))?, *v));
        }
    }
    Ok(FourierSymbol::from_terms(terms))
}

/// `Θ = B∘χ₁` with `B(z) = c·∏ (z − λ_j)/(1 − λ̄_j z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlaschkePullback {
    pub zeros: Vec<C64>,
    pub constant: C64,
}

impl BlaschkePullback {
    pub fn new(zeros: Vec<C64>, constant: C64) -> Result<Self> {
        for z in &zeros {
            check_disc(*z)?;
        }
        if (constant.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "Blaschke constant must be unimodular, got modulus {}",
                constant.norm()
            )));
        }
        Ok(BlaschkePullback { zeros, constant })
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.zeros.iter().fold(self.constant, |acc, l| acc * (z - l) / (1.0 - l.conj() * z))
    }

    /// Largest `||B(e^{iθ})| − 1|` over uniform samples.
    pub fn modulus_deviation(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| {
                let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64);
                (self.eval(z).norm() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Multiplicities of the distinct zeros.
    pub fn zero_multiplicities(&self) -> Vec<(C64, usize)> {
        let mut out: Vec<(C64, usize)> = Vec::new();
        for z in &self.zeros {
            match out.iter_mut().find(|(p, _)| p == z) {
                Some((_, m)) => *m += 1,
                None => out.push((*z, 1)),
            }
        }
        out
    }
}

/// Taylor coefficients `b_0..=b_N` of `B` at the origin.
pub fn blaschke_coefficients(b: &BlaschkePullback, degree: usize) -> Result<Vec<C64>> {
    for z in &b.zeros {
        check_disc(*z)?;
    }
    if degree < b.degree() {
        return Err(Error::InvalidArgument(format!(
            "need at least {} coefficients for a degree-{} product",
            b.degree(),
            b.degree()
        )));
    }
    let len = degree + 1;
    let mut acc = vec![C64::new(0.0, 0.0); len];
    acc[0] = b.constant;
    for l in &b.zeros {
        // (z − λ)/(1 − λ̄z) = (z − λ)·Σ (λ̄z)^k
        let mut geo = vec![C64::new(0.0, 0.0); len];
        let mut p = C64::new(1.0, 0.0);
        for g in geo.iter_mut() {
            *g = p;
            p *= l.conj();
        }
        let factor = series::mul(&[-l, C64::new(1.0, 0.0)], &geo, len);
        acc = series::mul(&acc, &factor, len);
    }
    let dev = b.modulus_deviation(CIRCLE_SAMPLES);
    if dev >= BLASCHKE_MODULUS_TOL {
        return Err(Error::Verification(format!("|B| deviates from 1 by {dev:e} on the circle")));
    }
    Ok(acc)
}

/// The Blaschke pullback whose zeros are the poles of `R` (with
/// multiplicity), so that `Θ·R∘χ₁` is analytic.
pub fn annihilating_blaschke(r: &RationalPullback) -> Result<BlaschkePullback> {
    r.validate()?;
    let mut zeros = Vec::new();
    for (p, m) in r.poles() {
        zeros.extend(std::iter::repeat_n(p, m as usize));
    }
    BlaschkePullback::new(zeros, C64::new(1.0, 0.0))
}

/// Largest modulus among the `z̄ⁿ` coefficients (`1 ≤ n ≤ upto`) of the
/// product `B·φ₁`, with `B` analytic and `φ₁ = Σ c_n z̄ⁿ`.
pub fn antianalytic_residual(b: &[C64], c: &[C64], upto: usize) -> f64 {
    (1..=upto)
        .map(|n| {
            b.iter().enumerate().filter(|(k, _)| n + k <= c.len()).map(|(k, bk)| bk * c[n + k - 1]).sum::<C64>().norm()
        })
        .fold(0.0, f64::max)
}

/// Any symbol the operators can be built from.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    Fourier(FourierSymbol),
    Rational(RationalPullback),
    Cauchy(CauchyKernelSum),
    Blaschke(BlaschkePullback),
}

impl Symbol {
    /// Coefficient source when the antianalytic part factors through `χ₁`.
    pub fn coefficient_source(&self, spec: &OrderSpec) -> Result<Option<Box<dyn CoefficientSource>>> {
        Ok(match self {
            Symbol::Rational(r) => Some(Box::new(r.clone())),
            Symbol::Cauchy(c) => Some(Box::new(c.clone())),
            Symbol::Blaschke(_) => Some(Box::new(CoefficientList::finite(Vec::new()))),
            Symbol::Fourier(f) => {
                let minus = f.project_minus(spec)?;
                if spec.least_positive().is_none() || minus.off_cyclic_mass(spec)? > 0.0 {
                    None
                } else {
                    let len = minus
                        .iter()
                        .filter_map(|(e, _)| spec.cyclic_index(e).ok().flatten())
                        .map(|k| (-k) as usize)
                        .max()
                        .unwrap_or(0);
                    Some(Box::new(CoefficientList::finite(minus.cyclic_coefficients(spec, len)?)))
                }
            }
        })
    }

    /// `P₋φ` restricted to `{−n·χ₁ : n ≤ len}` for pullback symbols, or the
    /// full `P₋φ` for finite Fourier symbols, plus the discarded tail mass.
    pub fn antianalytic(&self, spec: &OrderSpec, len: usize) -> Result<(FourierSymbol, f64)> {
        match self {
            Symbol::Fourier(f) => {
                f.validate(spec)?;
                Ok((f.project_minus(spec)?, 0.0))
            }
            other => {
                let src = other.coefficient_source(spec)?.expect("pullback symbols always have a coefficient source");
                let (c, tail) = expand_coefficients(src.as_ref(), len.max(1))?;
                Ok((pullback_support(&c, spec)?, tail))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn lex(n: usize) -> OrderSpec {
        OrderSpec::IntLex { n }
    }

    fn close(a: &[C64], b: &[C64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    /// Independent oracle: long division of `num(u)/den(u)` as power series
    /// in `u = z̄`.
    fn series_division(num: &[C64], den: &[C64], len: usize) -> Vec<C64> {
        let mut q = vec![c(0.0); len];
        let mut rem: Vec<C64> = num.to_vec();
        rem.resize(len + den.len(), c(0.0));
        for k in 0..len {
            q[k] = rem[k] / den[0];
            for (j, d) in den.iter().enumerate() {
                rem[k + j] -= q[k] * d;
            }
        }
        q
    }

    #[test]
    fn projections() {
        let spec = lex(2);
        let s = FourierSymbol::from_terms(vec![
            (GroupElement::int(&[0, -1]), c(1.0)),
            (GroupElement::int(&[0, 0]), c(2.0)),
            (GroupElement::int(&[1, 0]), c(3.0)),
        ]);
        let minus = s.project_minus(&spec).unwrap();
        assert_eq!(minus, FourierSymbol::from_terms(vec![(GroupElement::int(&[0, -1]), c(1.0))]));
        assert_eq!(minus.add(&s.project_plus(&spec).unwrap()), s);
        assert_eq!(minus.project_minus(&spec).unwrap(), minus);
        assert!(FourierSymbol::new().project_minus(&spec).unwrap().is_empty());

        let s = FourierSymbol::from_terms(vec![(GroupElement::int(&[-1, 5]), c(1.0))]);
        assert_eq!(s.project_minus(&spec).unwrap(), s);
    }

    #[test]
    fn tiny_coefficients_dropped() {
        let s = FourierSymbol::from_terms(vec![(GroupElement::int(&[-1]), c(1e-16))]);
        assert!(s.is_empty());
    }

    #[test]
    fn expand_simple_pole() {
        let r = RationalPullback::simple(&[c(0.5)], &[c(1.0)]).unwrap();
        let (coef, tail) = expand_coefficients(&r, 4).unwrap();
        // 1/(z − λ) = u/(1 − λu) with u = z̄
        let oracle = series_division(&[c(0.0), c(1.0)], &[c(1.0), c(-0.5)], 5);
        assert!(close(&coef, &oracle[1..], 1e-15));
        assert!(close(&coef, &[c(1.0), c(0.5), c(0.25), c(0.125)], 1e-15));
        // Σ_{n>4} 2^{1−n} = 1/8
        assert!(tail >= 0.125 - 1e-15 && tail < 0.125 + 1e-12);
    }

    #[test]
    fn expand_monomial_and_cauchy_constant() {
        let r = RationalPullback::new(vec![PoleTerm { pole: c(0.0), power: 1, coef: c(1.0) }]).unwrap();
        let (coef, tail) = expand_coefficients(&r, 5).unwrap();
        assert!(close(&coef, &[c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)], 0.0));
        assert_eq!(tail, 0.0);

        let k = CauchyKernelSum::new(vec![(c(1.0), c(0.0))]).unwrap();
        let (coef, _) = expand_coefficients(&k, 3).unwrap();
        assert!(close(&coef, &[c(1.0), c(0.0), c(0.0)], 0.0));

        assert!(expand_coefficients(&r, 0).is_err());
        assert!(RationalPullback::simple(&[c(1.0)], &[c(1.0)]).is_err());
        assert!(CauchyKernelSum::new(vec![(c(1.0), C64::new(0.0, -1.2))]).is_err());
    }

    #[test]
    fn expand_higher_order_pole_matches_division() {
        // 2/(z − 0.3)^3 + (0.5 i)/(z + 0.6)
        let r = RationalPullback::new(vec![
            PoleTerm { pole: c(0.3), power: 3, coef: c(2.0) },
            PoleTerm { pole: c(-0.6), power: 1, coef: C64::new(0.0, 0.5) },
        ])
        .unwrap();
        let n = 40;
        let (coef, _) = expand_coefficients(&r, n).unwrap();
        // u³/(1 − 0.3u)³
        let den3 = series::product_of_linear(&[c(0.3), c(0.3), c(0.3)]);
        let a = series_division(&[c(0.0), c(0.0), c(0.0), c(2.0)], &den3, n + 1);
        let b = series_division(&[c(0.0), C64::new(0.0, 0.5)], &[c(1.0), c(0.6)], n + 1);
        let oracle: Vec<C64> = (1..=n).map(|k| a[k] + b[k]).collect();
        assert!(close(&coef, &oracle, 1e-13));
        assert_eq!(r.degree(), 4);
    }

    #[test]
    fn tail_bound_dominates_long_expansion() {
        let cases = vec![
            RationalPullback::simple(&[c(0.5), C64::new(0.0, 0.8)], &[c(1.0), c(-2.0)]).unwrap(),
            RationalPullback::new(vec![PoleTerm { pole: C64::new(0.7, 0.1), power: 4, coef: c(1.0) }]).unwrap(),
            RationalPullback::new(vec![PoleTerm { pole: c(0.9), power: 2, coef: c(0.3) }]).unwrap(),
        ];
        for r in cases {
            for n in [4usize, 16, 40] {
                let long = r.coefficients(4 * n + 400);
                let true_tail: f64 = long[n..].iter().map(|x| x.norm()).sum();
                let bound = r.tail_bound(n);
                assert!(bound >= true_tail * (1.0 - 1e-12), "n={n}: {bound} < {true_tail}");
            }
        }
    }

    #[test]
    fn pullback_support_examples() {
        let s = pullback_support(&[c(1.0), c(2.0)], &lex(2)).unwrap();
        assert_eq!(
            s,
            FourierSymbol::from_terms(vec![
                (GroupElement::int(&[0, -1]), c(1.0)),
                (GroupElement::int(&[0, -2]), c(2.0)),
            ])
        );
        assert!(pullback_support(&[], &lex(1)).unwrap().is_empty());
        let s = pullback_support(&[c(0.0), c(5.0)], &lex(3)).unwrap();
        assert_eq!(s, FourierSymbol::from_terms(vec![(GroupElement::int(&[0, 0, -2]), c(5.0))]));
        assert!(pullback_support(&[c(1.0)], &OrderSpec::RatNatural).is_err());
    }

    #[test]
    fn blaschke_examples() {
        let b = BlaschkePullback::new(vec![c(0.0)], c(1.0)).unwrap();
        let coef = blaschke_coefficients(&b, 3).unwrap();
        assert!(close(&coef, &[c(0.0), c(1.0), c(0.0), c(0.0)], 0.0));

        let b = BlaschkePullback::new(vec![c(0.5)], c(1.0)).unwrap();
        let coef = blaschke_coefficients(&b, 4).unwrap();
        // series division of (z − 1/2) by (1 − z/2)
        let oracle = series_division(&[c(-0.5), c(1.0)], &[c(1.0), c(-0.5)], 5);
        assert!(close(&coef, &oracle, 1e-15));
        assert!(close(&coef[..4], &[c(-0.5), c(0.75), c(0.375), c(0.1875)], 1e-15));

        let b = BlaschkePullback::new(vec![], C64::new(0.0, 1.0)).unwrap();
        let coef = blaschke_coefficients(&b, 2).unwrap();
        assert!(close(&coef, &[C64::new(0.0, 1.0), c(0.0), c(0.0)], 0.0));

        let b = BlaschkePullback::new(vec![C64::new(0.3, -0.4), c(-0.8), c(0.1)], c(-1.0)).unwrap();
        assert!(b.modulus_deviation(256) < BLASCHKE_MODULUS_TOL);
        assert!(BlaschkePullback::new(vec![c(1.0)], c(1.0)).is_err());
        assert!(blaschke_coefficients(&b, 2).is_err());
    }

    #[test]
    fn annihilating_blaschke_examples() {
        let r = RationalPullback::simple(&[c(0.5)], &[c(1.0)]).unwrap();
        let b = annihilating_blaschke(&r).unwrap();
        assert_eq!(b.zeros, vec![c(0.5)]);
        let n = 60;
        let bc = blaschke_coefficients(&b, 2 * n).unwrap();
        let rc = r.coefficients(4 * n);
        assert!(antianalytic_residual(&bc, &rc, 2 * n) < 1e-12);

        let r = RationalPullback::new(vec![PoleTerm { pole: c(0.0), power: 2, coef: c(1.0) }]).unwrap();
        let b = annihilating_blaschke(&r).unwrap();
        let bc = blaschke_coefficients(&b, 4).unwrap();
        assert!(close(&bc, &[c(0.0), c(0.0), c(1.0), c(0.0), c(0.0)], 0.0));

        let r = RationalPullback::new(vec![
            PoleTerm { pole: c(1.0 / 3.0), power: 1, coef: c(1.0) },
            PoleTerm { pole: c(1.0 / 3.0), power: 2, coef: c(0.5) },
        ])
        .unwrap();
        let b = annihilating_blaschke(&r).unwrap();
        assert_eq!(b.degree(), 2);
        let bc = blaschke_coefficients(&b, 2 * n).unwrap();
        let rc = r.coefficients(4 * n);
        assert!(antianalytic_residual(&bc, &rc, 2 * n) < 1e-12);
    }

    #[test]
    fn truncation_for_meets_tolerance() {
        let r = RationalPullback::simple(&[c(0.8)], &[c(1.0)]).unwrap();
        let n = r.truncation_for(DEFAULT_TAIL_TOL, 10_000);
        assert!(r.tail_bound(n) < DEFAULT_TAIL_TOL);
        assert!(r.tail_bound(n - 1) >= DEFAULT_TAIL_TOL);
    }
}
