//! Best approximation of a finite-rank Hankel operator by Hankel operators of
//! rank at most `n`, and its lift to a group with a least positive element.
//!
//! Construction strategies are looked up by name; whatever a strategy
//! returns is checked against the two-sided bound
//! `s_n − 1e−8 ≤ ‖H − H_n‖ ≤ s_n·(1 + 1e−6)` before it is accepted.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::hankel::{block_decomposition, build_circle_hankel, build_hankel, commutation_residual, CircleHankel};
use crate::ordered_group::{ConeSign, OrderSpec, TruncationBox};
use crate::series;
use crate::spectral::svd::{decompose, numerical_rank, operator_norm, Decomposition};
use crate::symbols::{pullback_support, CoefficientSource, RationalPullback, COEFF_DROP};
use crate::C64;

/// Absolute slack below `s_n`.
pub const LOWER_TOL: f64 = 1e-8;
/// Relative slack above `s_n`.
pub const UPPER_REL_TOL: f64 = 1e-6;
pub const DEFAULT_SIZE: usize = 128;
pub const DEFAULT_LIFT_BOUND: u32 = 6;
pub const DEFAULT_STRATEGIES: [&str; 2] = ["schmidt_pair", "pole_search"];

/// Everything a strategy may look at.
pub struct AakProblem {
    pub r: RationalPullback,
    pub n: usize,
    pub size: usize,
    /// `N × N` truncation of `H_r`.
    pub h: DMatrix<C64>,
    pub decomposition: Decomposition,
    pub sigma: f64,
    pub seed: u64,
}

impl AakProblem {
    fn new(r: &RationalPullback, n: usize, size: usize, seed: u64) -> Result<Self> {
        let h = build_circle_hankel(&r.coefficients(2 * size - 1), size).entries;
        let decomposition = decompose(&h)?;
        let sigma = decomposition.sigma.get(n).copied().unwrap_or(0.0);
        Ok(AakProblem { r: r.clone(), n, size, h, decomposition, sigma, seed })
    }

    /// `‖H − H_n‖` on the full truncation.
    pub fn error_of(&self, approx: &RationalPullback) -> Result<f64> {
        let hn = build_circle_hankel(&approx.coefficients(2 * self.size - 1), self.size).entries;
        operator_norm(&(&self.h - hn))
    }

    pub fn within_bounds(&self, err: f64) -> bool {
        err >= self.sigma - LOWER_TOL && err <= self.sigma * (1.0 + UPPER_REL_TOL)
    }
}

pub trait AakStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    /// Proposes a rational symbol of degree at most `n`. `warm` is the best
    /// candidate of earlier strategies, if any.
    fn construct(&self, problem: &AakProblem, warm: Option<&RationalPullback>) -> Result<RationalPullback>;
}

pub fn strategy(name: &str) -> Option<Box<dyn AakStrategy>> {
    match name {
        "schmidt_pair" => Some(Box::new(SchmidtPair)),
        "pole_search" => Some(Box::new(PoleSearch::default())),
        _ => None,
    }
}

/// Reads the approximant off the Schmidt pair `(v, w)` of `s_n`.
///
/// With `ξ(z) = Σ v_k zᵏ` and `η(z) = Σ w_j z^{−j−1}`, the error symbol is
/// `σ η/ξ` and the poles of the approximant are the zeros of `ξ` in the
/// disc. Both functions are rational with known denominators, so only the
/// first `deg R` coefficients of `v` and `w` enter.
pub struct SchmidtPair;

impl AakStrategy for SchmidtPair {
    fn name(&self) -> &'static str {
        "schmidt_pair"
    }

    fn construct(&self, p: &AakProblem, _warm: Option<&RationalPullback>) -> Result<RationalPullback> {
        let d = p.r.degree();
        let sigma = p.sigma;
        if sigma == 0.0 {
            return Err(Error::Verification("s_n vanishes; no Schmidt pair".into()));
        }
        let v: Vec<C64> = p.decomposition.v.column(p.n).iter().copied().collect();
        let hv = &p.h * p.decomposition.v.column(p.n);
        let w: Vec<C64> = hv.iter().map(|x| x / sigma).collect();

        let mut poles = Vec::with_capacity(d);
        for (l, m) in p.r.poles() {
            poles.extend(std::iter::repeat_n(l, m as usize));
        }
        let conj_poles: Vec<C64> = poles.iter().map(|l| l.conj()).collect();
        // ξ = nv / dv
        let dv = series::product_of_linear(&conj_poles);
        let nv = series::trim(&series::mul(&v, &dv, d), 1e-14);
        // Σ w_j u^j · ∏(1 − λ u), a polynomial of degree < d
        let pw = series::mul(&w, &series::product_of_linear(&poles), d);
        // η = wz / ∏(z − λ)
        let wz: Vec<C64> = (0..d).map(|j| pw[d - 1 - j]).collect();

        let inside: Vec<C64> = series::roots(&nv).into_iter().filter(|z| z.norm() < 1.0).collect();
        if inside.len() > p.n {
            return Err(Error::Verification(format!(
                "Schmidt function has {} zeros in the disc, expected at most {}",
                inside.len(),
                p.n
            )));
        }
        let dnv = series::derivative(&nv);
        let mut residues = Vec::with_capacity(inside.len());
        for (i, &z) in inside.iter().enumerate() {
            let slope = series::eval(&dnv, z);
            let crowded = inside[..i].iter().any(|y| (y - z).norm() < 1e-8);
            if crowded || slope.norm() < 1e-12 * series::eval(&nv, z).norm().max(1e-300) {
                return Err(Error::Verification("Schmidt function has a multiple zero".into()));
            }
            let den: C64 = poles.iter().map(|l| z - l).product();
            let res = sigma * series::eval(&wz, z) * series::eval(&dv, z) / (den * slope);
            residues.push(-res);
        }
        RationalPullback::simple(&inside, &residues)
    }
}

/// Derivative-free search over `n` poles and `n` residues.
pub struct PoleSearch {
    pub restarts: usize,
    pub max_iters: u64,
    /// Cap on the truncation used inside the objective.
    pub inner_size: usize,
}

impl Default for PoleSearch {
    fn default() -> Self {
        PoleSearch { restarts: 8, max_iters: 1500, inner_size: 96 }
    }
}

/// Packs `(ζ, a)` pairs into `4n` reals; poles are mapped to the disc by
/// `w ↦ w/(1 + |w|)`.
fn pack(r: &RationalPullback) -> Vec<f64> {
    let mut out = Vec::new();
    for t in &r.terms {
        let m = t.pole.norm();
        let w = if m == 0.0 { t.pole } else { t.pole * (1.0 / (1.0 - m.min(0.999))) };
        out.extend([w.re, w.im, t.coef.re, t.coef.im]);
    }
    out
}

fn unpack(x: &[f64]) -> (Vec<C64>, Vec<C64>) {
    x.chunks(4)
        .map(|q| {
            let w = C64::new(q[0], q[1]);
            (w / (1.0 + w.norm()), C64::new(q[2], q[3]))
        })
        .unzip()
}

struct InnerObjective {
    h: DMatrix<C64>,
}

impl CostFunction for InnerObjective {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let (poles, res) = unpack(x);
        let n = self.h.nrows();
        let mut c = vec![C64::new(0.0, 0.0); 2 * n - 1];
        for (z, a) in poles.iter().zip(&res) {
            let mut pw = *a;
            for ck in c.iter_mut() {
                *ck += pw;
                pw *= z;
            }
        }
        let hn = build_circle_hankel(&c, n).entries;
        operator_norm(&(&self.h - hn)).map_err(|e| argmin::core::Error::msg(e.to_string()))
    }
}

impl AakStrategy for PoleSearch {
    fn name(&self) -> &'static str {
        "pole_search"
    }

    fn construct(&self, p: &AakProblem, warm: Option<&RationalPullback>) -> Result<RationalPullback> {
        if p.n == 0 {
            return Ok(RationalPullback::default());
        }
        let inner = p.size.min(self.inner_size);
        let objective_h = p.h.view((0, 0), (inner, inner)).into_owned();
        let scale = p.h[(0, 0)].norm().max(p.sigma).max(1e-3);

        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut starts: Vec<Vec<f64>> = Vec::with_capacity(self.restarts + 1);
        if let Some(w) = warm.filter(|w| w.terms.len() == p.n && w.terms.iter().all(|t| t.power == 1)) {
            starts.push(pack(w));
        }
        while starts.len() < self.restarts.max(1) + usize::from(warm.is_some()) {
            let mut x = Vec::with_capacity(4 * p.n);
            for _ in 0..p.n {
                let rad: f64 = 0.9 * rng.random::<f64>().sqrt();
                let arg: f64 = std::f64::consts::TAU * rng.random::<f64>();
                let z = C64::from_polar(rad, arg);
                let w = z / (1.0 - rad);
                x.extend([
                    w.re,
                    w.im,
                    scale * (2.0 * rng.random::<f64>() - 1.0),
                    scale * (2.0 * rng.random::<f64>() - 1.0),
                ]);
            }
            starts.push(x);
        }

        let runs: Vec<(f64, Vec<f64>)> = starts
            .par_iter()
            .map(|x0| {
                let simplex: Vec<Vec<f64>> = std::iter::once(x0.clone())
                    .chain((0..x0.len()).map(|i| {
                        let mut y = x0.clone();
                        y[i] += if i % 4 < 2 { 0.1 } else { 0.1 * scale };
                        y
                    }))
                    .collect();
                let solver = NelderMead::new(simplex).with_sd_tolerance(1e-15).expect("tolerance is positive");
                let obj = InnerObjective { h: objective_h.clone() };
                match Executor::new(obj, solver).configure(|s| s.max_iters(self.max_iters)).run() {
                    Ok(res) => {
                        let st = res.state();
                        (st.get_best_cost(), st.get_best_param().cloned().unwrap_or_else(|| x0.clone()))
                    }
                    Err(_) => (f64::INFINITY, x0.clone()),
                }
            })
            .collect();
        let best = runs
            .into_iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.0.total_cmp(&b.0).then(i.cmp(j)))
            .map(|(_, r)| r.1)
            .ok_or_else(|| Error::Verification("no optimisation run".into()))?;
        let (poles, res) = unpack(&best);
        RationalPullback::simple(&poles, &res)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub strategy: String,
    pub achieved_error: Option<f64>,
    pub accepted: bool,
    pub note: String,
}

/// Residuals of the lifted operator: its cyclic block against the circle
/// matrix of the approximant, its complement block, and the commutation
/// identity for `χ ∈ Xⁱ ∩ X₊` (case a) and `χ ∈ X₊ ∖ Xⁱ` (case b).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftCheck {
    pub bound: u32,
    pub cyclic_block_residual: f64,
    pub complement_norm: f64,
    pub case_a_residual: f64,
    pub case_a_count: usize,
    pub case_b_residual: f64,
    pub case_b_count: usize,
    pub pass: bool,
}

pub fn lift_check(approx: &RationalPullback, spec: &OrderSpec, bound: u32) -> Result<LiftCheck> {
    let bx = TruncationBox::new(bound);
    // pullback_support drops negligible coefficients; compare against the
    // same sequence
    let c: Vec<C64> = approx
        .coefficients(2 * bound as usize + 1)
        .into_iter()
        .map(|v| if v.norm() >= COEFF_DROP { v } else { C64::new(0.0, 0.0) })
        .collect();
    let h = build_hankel(&pullback_support(&c, spec)?, spec, bx)?;
    let blocks = block_decomposition(&h)?;
    let circle = CircleHankel::rect(&c, blocks.cyclic.nrows(), blocks.cyclic.ncols()).entries;
    let cyclic_block_residual = (&blocks.cyclic - circle).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let complement_norm = blocks.complement_cols_norm.max(blocks.complement_rows_norm);

    let (mut a, mut a_count, mut b, mut b_count) = (0.0f64, 0, 0.0f64, 0);
    for chi in spec.enumerate_cone(bx, ConeSign::Nonneg) {
        let res = commutation_residual(&h, &chi)?;
        if spec.cyclic_index(&chi)?.is_some() {
            a = a.max(res);
            a_count += 1;
        } else {
            b = b.max(res);
            b_count += 1;
        }
    }
    Ok(LiftCheck {
        bound,
        cyclic_block_residual,
        complement_norm,
        case_a_residual: a,
        case_a_count: a_count,
        case_b_residual: b,
        case_b_count: b_count,
        pass: cyclic_block_residual == 0.0 && complement_norm == 0.0 && a == 0.0 && b == 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AakResult {
    pub n: usize,
    pub size: usize,
    /// `s_n` of the `N × N` truncation, 0-indexed.
    pub sigma: f64,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub approximant: RationalPullback,
    pub achieved_error: f64,
    /// Numerical rank of the approximant's truncation.
    pub approximant_rank: usize,
    /// Anti-diagonal defect of the approximant's truncation.
    pub approximant_structure_residual: f64,
    pub strategy: String,
    pub seed: u64,
    pub attempts: Vec<Attempt>,
    pub lift_check: LiftCheck,
}

impl AakResult {
    pub fn report(&self) -> serde_json::Value {
        json!({
            "singular_values": self.singular_values,
            "rank": self.rank,
            "aak": {
                "n": self.n,
                "sigma": self.sigma,
                "poles": self.approximant.terms.iter().map(|t| json!({"re": t.pole.re, "im": t.pole.im})).collect::<Vec<_>>(),
                "achieved": self.achieved_error,
                "seed": self.seed,
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct AakOptions {
    pub size: usize,
    pub seed: u64,
    pub strategies: Vec<String>,
    pub lift_bound: u32,
}

impl Default for AakOptions {
    fn default() -> Self {
        AakOptions {
            size: DEFAULT_SIZE,
            seed: 0,
            strategies: DEFAULT_STRATEGIES.iter().map(|s| s.to_string()).collect(),
            lift_bound: DEFAULT_LIFT_BOUND,
        }
    }
}

pub fn aak_approximate(r: &RationalPullback, n: usize, spec: &OrderSpec, size: usize) -> Result<AakResult> {
    aak_approximate_with(r, n, spec, &AakOptions { size, ..AakOptions::default() })
}

pub fn aak_approximate_with(r: &RationalPullback, n: usize, spec: &OrderSpec, opts: &AakOptions) -> Result<AakResult> {
    r.validate()?;
    spec.least_positive().ok_or(Error::NoLeastPositive)?;
    if opts.size == 0 {
        return Err(Error::InvalidArgument("truncation size must be positive".into()));
    }
    let strategies = opts
        .strategies
        .iter()
        .map(|name| strategy(name).ok_or_else(|| Error::InvalidArgument(format!("unknown AAK strategy `{name}`"))))
        .collect::<Result<Vec<_>>>()?;

    let problem = AakProblem::new(r, n, opts.size, opts.seed)?;
    let (rank, _) = numerical_rank(&problem.decomposition.sigma);
    let singular_values = problem.decomposition.sigma.clone();
    let finish = |approx: RationalPullback, sigma: f64, achieved: f64, strategy: &str, attempts: Vec<Attempt>| {
        let hn = build_circle_hankel(&approx.coefficients(2 * opts.size - 1), opts.size);
        let s = crate::spectral::svd::singular_values(&hn.entries)?;
        // rank is judged on the scale of H, so that tiny residue noise in
        // a low-rank approximant is not counted
        let tol = crate::spectral::svd::rank_tolerance(problem.decomposition.sigma[0]);
        Ok(AakResult {
            n,
            size: opts.size,
            sigma,
            singular_values: singular_values.clone(),
            rank,
            approximant_rank: s.iter().filter(|&&x| x > tol).count(),
            approximant_structure_residual: hn.antidiagonal_residual(),
            lift_check: lift_check(&approx, spec, opts.lift_bound)?,
            approximant: approx,
            achieved_error: achieved,
            strategy: strategy.to_string(),
            seed: opts.seed,
            attempts,
        })
    };

    if n >= r.degree() {
        return finish(r.clone(), 0.0, 0.0, "exact", Vec::new());
    }
    let tail = r.tail_bound(opts.size);
    if tail > 0.1 * UPPER_REL_TOL * problem.sigma {
        return Err(Error::TailTooLarge { tail, tol: 0.1 * UPPER_REL_TOL * problem.sigma });
    }

    let mut attempts = Vec::new();
    let mut best: Option<(f64, RationalPullback)> = None;
    for s in &strategies {
        let outcome = s.construct(&problem, best.as_ref().map(|b| &b.1));
        match outcome {
            Ok(approx) => {
                let err = problem.error_of(&approx)?;
                let ok = problem.within_bounds(err) && approx.degree() <= n;
                attempts.push(Attempt {
                    strategy: s.name().into(),
                    achieved_error: Some(err),
                    accepted: ok,
                    note: String::new(),
                });
                if ok {
                    return finish(approx, problem.sigma, err, s.name(), attempts);
                }
                if best.as_ref().is_none_or(|b| err < b.0) {
                    best = Some((err, approx));
                }
            }
            Err(e) => attempts.push(Attempt {
                strategy: s.name().into(),
                achieved_error: None,
                accepted: false,
                note: e.to_string(),
            }),
        }
    }
    Err(Error::Verification(format!(
        "no strategy met s_n = {:e} within bounds; attempts: {}",
        problem.sigma,
        attempts
            .iter()
            .map(|a| format!("{} -> {:?} {}", a.strategy, a.achieved_error, a.note))
            .collect::<Vec<_>>()
            .join("; ")
    )))
}
