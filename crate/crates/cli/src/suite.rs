//! The acceptance battery behind `grouphankel suite`.
//!
//! Every criterion draws its random inputs from a ChaCha stream keyed by the
//! suite seed and the criterion id, so reruns are byte-identical.

use std::cmp::Ordering;

use grouphankel::hankel::{
    block_decomposition, build_circle_hankel, build_g, build_hankel, gamma_equivalence, CircleHankel, DiscreteKernel,
};
use grouphankel::model_spaces::{beurling_eigencheck, chain_check, model_space_dim, root_subspace_basis, CauchyVector};
use grouphankel::ordered_group::{ConeSign, GroupElement, OrderSpec, TruncationBox};
use grouphankel::spectral::aak::{LOWER_TOL, UPPER_REL_TOL};
use grouphankel::spectral::{
    aak_approximate, compactness_witness, decompose, kronecker_check, nehari_distance_lower, nuclear_bound_check,
    operator_norm, singular_values, CircleTruncations, GroupTruncations, TruncationFamily, Verdict,
};
use grouphankel::symbols::{
    pullback_support, BlaschkePullback, CauchyKernelSum, CoefficientSource, FourierSymbol, RationalPullback, Symbol,
};
use grouphankel::C64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: Value,
}

type Check = fn(&mut ChaCha8Rng) -> anyhow::Result<(bool, Value)>;

pub const CRITERIA: [(u32, &str, Check); 11] = [
    (1, "order axioms and ideal structure", order_axioms),
    (2, "block exactness", block_exactness),
    (3, "finite rank of rational symbols", kronecker),
    (4, "compactness witnesses", compactness),
    (5, "nuclear bound", nuclear),
    (6, "best rank-n Hankel approximation", aak),
    (7, "unstructured rank-n lower bound", eckart_young),
    (8, "backward shift eigenvectors", beurling),
    (9, "model space dimension", model_spaces),
    (10, "discrete equivalences", discrete),
    (11, "Nehari lower bounds", nehari),
];

pub fn run_criterion(id: u32, seed: u64) -> Option<CriterionResult> {
    let &(id, name, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    let (pass, detail) = match check(&mut rng) {
        Ok(v) => v,
        Err(e) => (false, json!({ "error": format!("{e:#}") })),
    };
    Some(CriterionResult { id, name, pass, detail })
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    CRITERIA.par_iter().map(|c| run_criterion(c.0, seed).expect("listed")).collect()
}

fn in_disc(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())
}

/// `n` points of the disc of `radius`, pairwise at least `sep` apart.
fn separated(rng: &mut ChaCha8Rng, n: usize, radius: f64, sep: f64) -> Vec<C64> {
    let mut pts: Vec<C64> = Vec::with_capacity(n);
    while pts.len() < n {
        let z = in_disc(rng, radius);
        if pts.iter().all(|p| (p - z).norm() >= sep) {
            pts.push(z);
        }
    }
    pts
}

fn complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0)
}

/// Residues bounded away from zero so no pole is numerically absent.
fn residues(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::from_polar(0.5 + rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>())).collect()
}

fn random_rational(rng: &mut ChaCha8Rng, deg: usize) -> anyhow::Result<RationalPullback> {
    let poles = separated(rng, deg, 0.8, 0.2);
    Ok(RationalPullback::simple(&poles, &residues(rng, deg))?)
}

fn box_element(rng: &mut ChaCha8Rng, rank: usize, bound: i64) -> GroupElement {
    let coords: Vec<i64> = (0..rank).map(|_| rng.random_range(-bound..=bound)).collect();
    GroupElement::int(&coords)
}

fn order_axioms(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    const TRIPLES: usize = 6000;
    const BOUND: u32 = 8;
    let mut groups = Vec::new();
    let mut pass = true;
    for n in [2usize, 3] {
        let g = OrderSpec::IntLex { n };
        let zero = g.identity();
        let mut violations = 0usize;
        for _ in 0..TRIPLES {
            let [x, y, z] = [(); 3].map(|_| box_element(rng, n, BOUND as i64));
            let xy = g.compare(&x, &y)?;
            // totality and antisymmetry
            violations += usize::from(xy != g.compare(&y, &x)?.reverse());
            violations += usize::from((xy == Ordering::Equal) != (x == y));
            // transitivity
            if xy != Ordering::Greater && g.compare(&y, &z)? != Ordering::Greater {
                violations += usize::from(g.compare(&x, &z)? == Ordering::Greater);
            }
            // translation invariance
            violations += usize::from(g.compare(&g.add(&x, &z)?, &g.add(&y, &z)?)? != xy);
            // the cone is closed under addition and splits the group
            if g.is_nonneg(&x)? && g.is_nonneg(&y)? {
                violations += usize::from(!g.is_nonneg(&g.add(&x, &y)?)?);
            }
            let signs = [g.is_positive(&x)?, x == zero, g.is_positive(&g.negate(&x)?)?];
            violations += usize::from(signs.iter().filter(|&&s| s).count() != 1);
        }
        let ideal = g.ideal_check(TruncationBox::new(BOUND))?;
        pass &= violations == 0 && ideal.passed();
        groups.push(json!({
            "group": g,
            "triples": TRIPLES,
            "axiom_violations": violations,
            "ideal_pairs": ideal.ideal_pairs,
            "translate_pairs": ideal.translate_pairs,
            "ideal_violations": ideal.violations.len(),
        }));
    }
    Ok((pass, json!({ "bound": BOUND, "groups": groups })))
}

fn block_exactness(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    const BOUND: u32 = 6;
    let g = OrderSpec::IntLex { n: 2 };
    let mut failures = 0usize;
    let mut entries = 0usize;
    for _ in 0..20 {
        // random finitely supported coefficients, some of them zero
        let len = rng.random_range(1..=2 * BOUND as usize + 1);
        let c: Vec<C64> =
            (0..len).map(|_| if rng.random::<f64>() < 0.2 { C64::new(0.0, 0.0) } else { complex(rng) }).collect();
        let h = build_hankel(&pullback_support(&c, &g)?, &g, TruncationBox::new(BOUND))?;
        let b = block_decomposition(&h)?;
        let circle = CircleHankel::rect(&c, b.cyclic.nrows(), b.cyclic.ncols()).entries;
        entries += h.entries.len();
        let exact = b.complement_cols_norm == 0.0 && b.complement_rows_norm == 0.0 && b.cyclic == circle;
        failures += usize::from(!exact);
    }
    Ok((failures == 0, json!({ "symbols": 20, "bound": BOUND, "entries_checked": entries, "failures": failures })))
}

fn kronecker(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    const BOUND: u32 = 128;
    let g = OrderSpec::IntLex { n: 1 };
    let bx = TruncationBox::new(BOUND);
    let mut rows = Vec::new();
    let mut pass = true;
    for _ in 0..25 {
        let deg = rng.random_range(1..=6);
        let r = random_rational(rng, deg)?;
        let rep = kronecker_check(&r, &g, bx)?;
        pass &= rep.pass && rep.numerical_rank == deg;
        rows.push(json!([deg, rep.numerical_rank]));
    }
    let one = RationalPullback::simple(&[C64::new(0.5, 0.0)], &[C64::new(1.0, 0.0)])?;
    let rep = kronecker_check(&one, &g, bx)?;
    let s0 = rep.leading_singular_values.first().copied().unwrap_or(0.0);
    let rel = (s0 - 4.0 / 3.0).abs() / (4.0 / 3.0);
    pass &= rep.pass && rep.numerical_rank == 1 && rel <= 1e-9;
    Ok((pass, json!({ "bound": BOUND, "degree_vs_rank": rows, "rank_one_s0": s0, "rank_one_rel_error": rel })))
}

fn compactness(_rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    let g = OrderSpec::IntLex { n: 2 };
    let levels = [3, 5, 7];
    let off = Symbol::Fourier(FourierSymbol::from_terms([(GroupElement::int(&[-1, 0]), C64::new(1.0, 0.0))]));
    let off_rep = compactness_witness(&GroupTruncations::new(off, g)?, &levels)?;
    let geo = Symbol::Rational(RationalPullback::simple(&[C64::new(0.5, 0.0)], &[C64::new(1.0, 0.0)])?);
    let geo_family = GroupTruncations::new(geo, g)?;
    let geo_rep = compactness_witness(&geo_family, &levels)?;
    let mut s1 = Vec::new();
    for &l in &levels {
        s1.push(singular_values(&geo_family.matrix(l)?)?.get(1).copied().unwrap_or(0.0));
    }
    let pass = off_rep.verdict == Verdict::NoncompactWitness
        && geo_rep.verdict == Verdict::CompactConsistent
        && s1.iter().all(|&s| s < 1e-10);
    let counts: Vec<usize> = off_rep.evidence.iter().map(|e| e.large_count).collect();
    Ok((
        pass,
        json!({
            "levels": levels,
            "off_cyclic_verdict": off_rep.verdict,
            "off_cyclic_unit_counts": counts,
            "geometric_verdict": geo_rep.verdict,
            "geometric_s1": s1,
        }),
    ))
}

fn nuclear(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    const SIZE: usize = 256;
    let mut pass = true;
    let mut rows = Vec::new();
    // ten random sums followed by three single terms for the equality case
    for i in 0..13 {
        let terms = if i < 10 { rng.random_range(1..=4) } else { 1 };
        let cks = CauchyKernelSum::new((0..terms).map(|_| (complex(rng), in_disc(rng, 0.8))).collect())?;
        let rep = nuclear_bound_check(&cks, SIZE)?;
        let rel = (rep.s1_norm - rep.certified_bound).abs() / rep.certified_bound;
        pass &= rep.pass && (terms > 1 || rel <= 1e-8);
        rows.push(json!({ "terms": terms, "s1": rep.s1_norm, "bound": rep.certified_bound, "pass": rep.pass }));
    }
    Ok((pass, json!({ "size": SIZE, "sums": rows })))
}

fn aak(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    const SIZE: usize = 128;
    let g = OrderSpec::IntLex { n: 2 };
    let problems: Vec<RationalPullback> = (0..10).map(|_| random_rational(rng, 3)).collect::<anyhow::Result<_>>()?;
    let runs: Vec<anyhow::Result<Value>> = problems
        .par_iter()
        .map(|r| {
            let mut cases = Vec::new();
            for n in 0..3 {
                let res = aak_approximate(r, n, &g, SIZE)?;
                let ok = res.achieved_error >= res.sigma - LOWER_TOL
                    && res.achieved_error <= res.sigma * (1.0 + UPPER_REL_TOL)
                    && res.approximant_rank <= n
                    && res.approximant_structure_residual == 0.0
                    && res.lift_check.pass;
                cases.push(json!({
                    "n": n,
                    "sigma": res.sigma,
                    "achieved": res.achieved_error,
                    "strategy": res.strategy,
                    "rank": res.approximant_rank,
                    "structure_residual": res.approximant_structure_residual,
                    "lift_pass": res.lift_check.pass,
                    "pass": ok,
                }));
            }
            Ok(Value::Array(cases))
        })
        .collect();
    let mut pass = true;
    let mut rows = Vec::new();
    for run in runs {
        let cases = run?;
        pass &= cases.as_array().is_some_and(|c| c.iter().all(|v| v["pass"] == true));
        rows.push(cases);
    }
    Ok((pass, json!({ "size": SIZE, "problems": rows })))
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

fn eckart_young(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    const SIZE: usize = 32;
    let r = random_rational(rng, 5)?;
    let h = build_circle_hankel(&r.coefficients(2 * SIZE - 1), SIZE).entries;
    let d = decompose(&h)?;
    let mut worst_margin = f64::INFINITY;
    for i in 0..100 {
        let n = rng.random_range(0..=5);
        let m = if i % 2 == 0 {
            random_matrix(rng, SIZE, n) * random_matrix(rng, n, SIZE)
        } else {
            // near the optimum: perturbed leading singular triples
            let delta = 1e-3 * rng.random::<f64>();
            let u = d.u.columns(0, n) + random_matrix(rng, SIZE, n) * C64::new(delta, 0.0);
            let v = d.v.columns(0, n) + random_matrix(rng, SIZE, n) * C64::new(delta, 0.0);
            let s = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                d.sigma[..n].iter().map(|&x| C64::new(x, 0.0)),
            ));
            u * s * v.adjoint()
        };
        worst_margin = worst_margin.min(operator_norm(&(&h - m))? - d.sigma[n]);
    }
    Ok((worst_margin >= -1e-10, json!({ "size": SIZE, "matrices": 100, "worst_margin": worst_margin })))
}

fn beurling(_rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    let g = OrderSpec::IntLex { n: 1 };
    let mut pass = true;
    let mut rows = Vec::new();
    for radius in [0.1, 0.4, 0.7, 0.95] {
        for j in 0..4 {
            let lambda = C64::from_polar(radius, std::f64::consts::FRAC_PI_2 * j as f64 + 0.3);
            let eig = beurling_eigencheck(lambda, &g, CauchyVector::length_for(lambda, 0)?)?;
            let chain = chain_check(&root_subspace_basis(lambda, 4, &g, CauchyVector::length_for(lambda, 3)?)?)?;
            pass &= eig.pass && chain.pass;
            rows.push(json!({
                "lambda": [lambda.re, lambda.im],
                "residual": eig.residual,
                "declared_bound": eig.declared_bound,
                "chain_pass": chain.pass,
            }));
        }
    }
    Ok((pass, json!({ "grid": rows })))
}

fn model_spaces(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    const BOUND: u32 = 128;
    let mut cases = Vec::new();
    for n in [1usize, 2] {
        for deg in 1..=5 {
            let zeros = separated(rng, deg, 0.8, 0.2);
            cases.push((OrderSpec::IntLex { n }, BlaschkePullback::new(zeros, C64::new(1.0, 0.0))?));
        }
    }
    let runs: Vec<_> =
        cases.par_iter().map(|(g, theta)| model_space_dim(theta, g, TruncationBox::new(BOUND))).collect();
    let mut pass = true;
    let mut rows = Vec::new();
    for ((g, _), rep) in cases.iter().zip(runs) {
        let rep = rep?;
        pass &= rep.pass && rep.numerical_dim == rep.predicted_dim;
        rows.push(json!({ "rank": g.rank(), "degree": rep.predicted_dim, "dim": rep.numerical_dim, "pass": rep.pass }));
    }
    Ok((pass, json!({ "bound": BOUND, "cases": rows })))
}

fn discrete(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    let mut pass = true;
    let mut rows = Vec::new();
    for i in 0..20 {
        let (g, bound) = if i < 10 { (OrderSpec::IntLex { n: 1 }, 8) } else { (OrderSpec::IntLex { n: 2 }, 3) };
        let bx = TruncationBox::new(bound);
        let wide = TruncationBox::new(2 * bound);
        let mut terms = |sign| {
            let mut out = Vec::new();
            for e in g.enumerate_cone(wide, sign) {
                if rng.random::<f64>() < 0.5 {
                    out.push((e, complex(rng)));
                }
            }
            out
        };
        let a = DiscreteKernel::from_terms(terms(ConeSign::Nonneg));
        let gamma = gamma_equivalence(&a, &g, bx)?;
        // ν may live anywhere; only its values on X₋ are visible
        let mut nu_terms = terms(ConeSign::Neg);
        nu_terms.extend(terms(ConeSign::Nonneg));
        let nu = DiscreteKernel::from_terms(nu_terms);
        let gm = build_g(&nu, &g, bx)?;
        let phi = FourierSymbol::from_terms(nu.values.iter().map(|(e, v)| (e.clone(), *v)));
        let h = build_hankel(&phi.project_minus(&g)?, &g, bx)?;
        let g_equal = gm.rows == h.rows && gm.cols == h.cols && gm.entries == h.entries;
        pass &= gamma.mismatches == 0 && gamma.rows_compared > 0 && g_equal;
        rows.push(json!({
            "rank": g.rank(),
            "gamma_rows": gamma.rows_compared,
            "gamma_mismatches": gamma.mismatches,
            "g_equal": g_equal,
        }));
    }
    Ok((pass, json!({ "kernels": rows })))
}

fn nehari(rng: &mut ChaCha8Rng) -> anyhow::Result<(bool, Value)> {
    let g = OrderSpec::IntLex { n: 2 };
    let unit = Symbol::Fourier(FourierSymbol::from_terms([(GroupElement::int(&[0, -1]), C64::new(1.0, 0.0))]));
    let unit_rep = nehari_distance_lower(&GroupTruncations::new(unit, g)?, &[1, 2, 3, 4, 5])?;
    let unit_ok = unit_rep.nondecreasing && unit_rep.lower_bounds.iter().all(|&v| (v - 1.0).abs() <= 1e-12);

    let levels = [4, 8, 16, 32, 64];
    let geo = RationalPullback::simple(&[C64::new(0.5, 0.0)], &[C64::new(1.0, 0.0)])?;
    let geo_rep = nehari_distance_lower(&CircleTruncations::new(Box::new(geo)), &levels)?;
    let last = geo_rep.lower_bounds.last().copied().unwrap_or(0.0);
    let geo_ok = geo_rep.nondecreasing && (last - 4.0 / 3.0).abs() <= 1e-6;

    let r = random_rational(rng, 3)?;
    let rand_rep = nehari_distance_lower(&CircleTruncations::new(Box::new(r)), &levels)?;

    Ok((
        unit_ok && geo_ok && rand_rep.nondecreasing,
        json!({
            "unit": unit_rep.lower_bounds,
            "geometric": geo_rep.lower_bounds,
            "random_nondecreasing": rand_rep.nondecreasing,
        }),
    ))
}
