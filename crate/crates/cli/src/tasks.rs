//! Named tasks. Each task owns a parameter type; the registry validates
//! parameters before anything runs and dispatches by name afterwards.

use std::marker::PhantomData;

use anyhow::{anyhow, Context as _};
use grouphankel::hankel::{
    block_decomposition, build_circle_hankel, build_g, build_hankel, commutation_residual, gamma_equivalence,
    CircleHankel, DiscreteKernel, HankelMatrix,
};
use grouphankel::model_spaces::{
    annihilation_check, beurling_eigencheck, chain_check, model_space_dim, root_subspace_basis, CauchyVector,
};
use grouphankel::ordered_group::{ConeSign, GroupElement, OrderSpec, TruncationBox};
use grouphankel::spectral::aak::DEFAULT_STRATEGIES;
use grouphankel::spectral::{
    aak_approximate_with, besov_quasinorm, compactness_witness, kronecker_check, nehari_distance_lower,
    nuclear_bound_check, schatten_norm, svd_report, AakOptions, CircleTruncations, GroupTruncations, TruncationFamily,
    Verdict,
};
use grouphankel::symbols::{CoefficientSource, Symbol};
use grouphankel::C64;
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::experiment::{ComplexJson, SchemaError, SymbolSpec, TaskSpec};

pub struct Context<'a> {
    pub group: OrderSpec,
    pub symbol: &'a SymbolSpec,
    pub seed: u64,
    pub max_n: Option<usize>,
}

impl Context<'_> {
    /// Applies `--max-n` to a truncation parameter.
    pub fn cap(&self, n: usize) -> usize {
        self.max_n.map_or(n, |m| n.min(m))
    }

    fn cap_u32(&self, n: u32) -> u32 {
        self.cap(n as usize) as u32
    }

    fn symbol(&self, len: usize) -> anyhow::Result<Symbol> {
        Ok(self.symbol.symbol(&self.group, len)?)
    }

    fn group_matrix(&self, bound: u32) -> anyhow::Result<HankelMatrix> {
        let len = 2 * bound as usize + 1;
        let (s, _) = self.symbol(len)?.antianalytic(&self.group, len)?;
        Ok(build_hankel(&s, &self.group, TruncationBox::new(bound))?)
    }

    /// Circle coefficients of `P₋φ`, when it is supported in `Xⁱ`.
    fn source(&self) -> anyhow::Result<Option<Box<dyn CoefficientSource>>> {
        if let Some(src) = self.symbol.source()? {
            return Ok(Some(src));
        }
        Ok(self.symbol(1)?.coefficient_source(&self.group)?)
    }

    fn circle_source(&self) -> anyhow::Result<Box<dyn CoefficientSource>> {
        self.source()?.ok_or_else(|| anyhow!("symbol is not supported in the cyclic subgroup"))
    }

    fn circle_matrix(&self, size: usize) -> anyhow::Result<DMatrix<C64>> {
        let src = self.circle_source()?;
        Ok(build_circle_hankel(&src.coefficients((2 * size).saturating_sub(1)), size).entries)
    }

    fn family(&self, circle: bool, levels: &[u32]) -> anyhow::Result<Box<dyn TruncationFamily>> {
        if circle {
            Ok(Box::new(CircleTruncations::new(self.circle_source()?)))
        } else {
            let top = levels.iter().copied().max().unwrap_or(0) as usize;
            Ok(Box::new(GroupTruncations::new(self.symbol(2 * top + 1)?, self.group)?))
        }
    }
}

pub struct TaskOutput {
    pub pass: bool,
    pub result: Value,
    /// Table for `--format csv`.
    pub csv: Option<String>,
}

pub trait Task: Send + Sync {
    fn name(&self) -> &'static str;
    /// Subcommand the task belongs to.
    fn verb(&self) -> &'static str;
    fn check_params(&self, params: &Value) -> Result<(), String>;
    fn run(&self, ctx: &Context, params: &Value) -> anyhow::Result<TaskOutput>;
}

type RunFn<P> = fn(&Context, P) -> anyhow::Result<TaskOutput>;

struct Op<P> {
    name: &'static str,
    verb: &'static str,
    run: RunFn<P>,
    _params: PhantomData<fn() -> P>,
}

fn op<P: DeserializeOwned + 'static>(name: &'static str, verb: &'static str, run: RunFn<P>) -> Box<dyn Task> {
    Box::new(Op { name, verb, run, _params: PhantomData })
}

impl<P: DeserializeOwned> Task for Op<P> {
    fn name(&self) -> &'static str {
        self.name
    }

    fn verb(&self) -> &'static str {
        self.verb
    }

    fn check_params(&self, params: &Value) -> Result<(), String> {
        serde_json::from_value::<P>(params.clone()).map(|_| ()).map_err(|e| e.to_string())
    }

    fn run(&self, ctx: &Context, params: &Value) -> anyhow::Result<TaskOutput> {
        let p = serde_json::from_value::<P>(params.clone()).context("parameters")?;
        (self.run)(ctx, p)
    }
}

/// All tasks, in the order `--help` lists them. The first task of each
/// verb is what the subcommand runs when the experiment lists none.
pub fn registry() -> Vec<Box<dyn Task>> {
    vec![
        op("ideal_check", "check-group", ideal_check),
        op("build", "build", build),
        op("block_check", "build", block_check),
        op("svd", "svd", svd),
        op("compactness", "svd", compactness),
        op("kronecker_check", "rank", kronecker),
        op("aak", "aak", aak),
        op("nehari", "nehari", nehari),
        op("schatten", "schatten", schatten),
        op("nuclear_check", "schatten", nuclear),
        op("besov", "besov", besov),
        op("model_space", "model-space", model_space),
        op("beurling", "model-space", beurling),
        op("annihilation", "model-space", annihilation),
        op("discrete", "discrete", discrete),
    ]
}

pub fn lookup(name: &str) -> Option<Box<dyn Task>> {
    registry().into_iter().find(|t| t.name() == name)
}

pub fn validate(t: &TaskSpec) -> Result<(), SchemaError> {
    let task = lookup(&t.task).ok_or_else(|| SchemaError::UnknownTask(t.task.clone()))?;
    task.check_params(&t.params).map_err(|message| SchemaError::Params { task: t.task.clone(), message })
}

fn to_json<T: serde::Serialize>(v: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(v)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BoundParams {
    bound: u32,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams { bound: 4 }
    }
}

fn ideal_check(ctx: &Context, p: BoundParams) -> anyhow::Result<TaskOutput> {
    let rep = ctx.group.ideal_check(TruncationBox::new(ctx.cap_u32(p.bound)))?;
    Ok(TaskOutput { pass: rep.passed(), result: to_json(&rep)?, csv: None })
}

fn build(ctx: &Context, p: BoundParams) -> anyhow::Result<TaskOutput> {
    let bound = ctx.cap_u32(p.bound);
    let h = ctx.group_matrix(bound)?;
    let violations = h.structure_violations()?;
    let mut commutation = 0.0f64;
    for chi in ctx.group.enumerate_cone(TruncationBox::new(bound), ConeSign::Nonneg) {
        commutation = commutation.max(commutation_residual(&h, &chi)?);
    }
    Ok(TaskOutput {
        pass: violations == 0 && commutation == 0.0,
        result: json!({
            "bound": bound,
            "matrix": h.to_json(),
            "structure_violations": violations,
            "commutation_residual": commutation,
        }),
        csv: Some(h.to_csv()),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BlockParams {
    bound: u32,
}

impl Default for BlockParams {
    fn default() -> Self {
        BlockParams { bound: 6 }
    }
}

fn block_check(ctx: &Context, p: BlockParams) -> anyhow::Result<TaskOutput> {
    let bound = ctx.cap_u32(p.bound);
    let h = ctx.group_matrix(bound)?;
    let b = block_decomposition(&h)?;
    // exactness is only claimed for symbols supported in Xⁱ
    let circle_residual = match ctx.source()? {
        Some(src) => {
            let c = src.coefficients(2 * bound as usize + 1);
            let m = CircleHankel::rect(&c, b.cyclic.nrows(), b.cyclic.ncols()).entries;
            Some((&b.cyclic - m).iter().map(|v| v.norm()).fold(0.0, f64::max))
        }
        None => None,
    };
    Ok(TaskOutput {
        pass: circle_residual
            .is_none_or(|r| r == 0.0 && b.complement_cols_norm == 0.0 && b.complement_rows_norm == 0.0),
        result: json!({
            "bound": bound,
            "cyclic_shape": [b.cyclic.nrows(), b.cyclic.ncols()],
            "complement_cols_norm": b.complement_cols_norm,
            "complement_rows_norm": b.complement_rows_norm,
            "cyclic_support": circle_residual.is_some(),
            "cyclic_vs_circle_residual": circle_residual,
        }),
        csv: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MatrixParams {
    bound: u32,
    circle: bool,
    size: usize,
}

impl Default for MatrixParams {
    fn default() -> Self {
        MatrixParams { bound: 4, circle: false, size: 64 }
    }
}

impl MatrixParams {
    fn matrix(&self, ctx: &Context) -> anyhow::Result<DMatrix<C64>> {
        if self.circle {
            ctx.circle_matrix(ctx.cap(self.size))
        } else {
            Ok(ctx.group_matrix(ctx.cap_u32(self.bound))?.entries)
        }
    }
}

fn svd(ctx: &Context, p: MatrixParams) -> anyhow::Result<TaskOutput> {
    let rep = svd_report(&p.matrix(ctx)?)?;
    let pass = rep.reconstruction_residual <= 1e-10 * rep.s(0).max(f64::MIN_POSITIVE);
    let csv = rep
        .singular_values
        .iter()
        .enumerate()
        .fold(String::from("k,s_k\n"), |acc, (k, s)| acc + &format!("{k},{s:e}\n"));
    Ok(TaskOutput { pass, result: to_json(&rep)?, csv: Some(csv) })
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SequenceParams {
    levels: Option<Vec<u32>>,
    circle: bool,
    expect: Option<Verdict>,
}

impl SequenceParams {
    fn levels(&self, ctx: &Context) -> Vec<u32> {
        let raw = self.levels.clone().unwrap_or_else(|| if self.circle { vec![32, 64, 128] } else { vec![3, 5, 7] });
        let mut v: Vec<u32> = raw.into_iter().map(|l| ctx.cap_u32(l)).collect();
        v.dedup();
        v
    }
}

fn compactness(ctx: &Context, p: SequenceParams) -> anyhow::Result<TaskOutput> {
    let levels = p.levels(ctx);
    let rep = compactness_witness(ctx.family(p.circle, &levels)?.as_ref(), &levels)?;
    Ok(TaskOutput { pass: p.expect.is_none_or(|v| v == rep.verdict), csv: Some(rep.to_csv()), result: to_json(&rep)? })
}

fn nehari(ctx: &Context, p: SequenceParams) -> anyhow::Result<TaskOutput> {
    let levels = p.levels(ctx);
    let rep = nehari_distance_lower(ctx.family(p.circle, &levels)?.as_ref(), &levels)?;
    let csv = levels
        .iter()
        .zip(&rep.lower_bounds)
        .fold(String::from("N,norm\n"), |acc, (l, v)| acc + &format!("{l},{v:e}\n"));
    Ok(TaskOutput { pass: rep.nondecreasing, result: to_json(&rep)?, csv: Some(csv) })
}

fn kronecker(ctx: &Context, p: KroneckerParams) -> anyhow::Result<TaskOutput> {
    let r = ctx.symbol.rational()?.ok_or_else(|| anyhow!("kronecker_check needs a rational symbol"))?;
    let rep = kronecker_check(&r, &ctx.group, TruncationBox::new(ctx.cap_u32(p.bound)))?;
    Ok(TaskOutput { pass: rep.pass, result: to_json(&rep)?, csv: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct KroneckerParams {
    bound: u32,
}

impl Default for KroneckerParams {
    fn default() -> Self {
        KroneckerParams { bound: 64 }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AakParams {
    n: usize,
    size: usize,
    lift_bound: u32,
    strategies: Vec<String>,
}

impl Default for AakParams {
    fn default() -> Self {
        AakParams {
            n: 1,
            size: 128,
            lift_bound: 6,
            strategies: DEFAULT_STRATEGIES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn aak(ctx: &Context, p: AakParams) -> anyhow::Result<TaskOutput> {
    let r = ctx.symbol.rational()?.ok_or_else(|| anyhow!("aak needs a rational symbol"))?;
    let opts = AakOptions {
        size: ctx.cap(p.size),
        seed: ctx.seed,
        strategies: p.strategies,
        lift_bound: ctx.cap_u32(p.lift_bound),
    };
    let res = aak_approximate_with(&r, p.n, &ctx.group, &opts)?;
    let mut result = res.report();
    result["sigma"] = json!(res.sigma);
    result["achieved_error"] = json!(res.achieved_error);
    result["details"] = to_json(&res)?;
    Ok(TaskOutput {
        pass: res.lift_check.pass && res.approximant_rank <= p.n && res.approximant_structure_residual == 0.0,
        result,
        csv: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SchattenParams {
    p: f64,
    bound: u32,
    circle: bool,
    size: usize,
}

impl Default for SchattenParams {
    fn default() -> Self {
        SchattenParams { p: 1.0, bound: 4, circle: false, size: 64 }
    }
}

fn schatten(ctx: &Context, p: SchattenParams) -> anyhow::Result<TaskOutput> {
    let m = MatrixParams { bound: p.bound, circle: p.circle, size: p.size }.matrix(ctx)?;
    let norm = schatten_norm(&m, p.p)?;
    Ok(TaskOutput { pass: norm.is_finite(), result: json!({"p": p.p, "norm": norm, "dims": m.shape()}), csv: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SizeParams {
    size: usize,
}

impl Default for SizeParams {
    fn default() -> Self {
        SizeParams { size: 256 }
    }
}

fn nuclear(ctx: &Context, p: SizeParams) -> anyhow::Result<TaskOutput> {
    let cks = ctx.symbol.cauchy()?.ok_or_else(|| anyhow!("nuclear_check needs a cauchy_sum symbol"))?;
    let rep = nuclear_bound_check(&cks, ctx.cap(p.size))?;
    Ok(TaskOutput { pass: rep.pass, result: to_json(&rep)?, csv: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct BesovParams {
    p: f64,
    blocks: usize,
}

impl Default for BesovParams {
    fn default() -> Self {
        BesovParams { p: 1.0, blocks: 10 }
    }
}

fn besov(ctx: &Context, p: BesovParams) -> anyhow::Result<TaskOutput> {
    let src = ctx.circle_source()?;
    let blocks = match ctx.max_n {
        // the last block ends at 2^blocks − 1
        Some(m) => p.blocks.min((usize::BITS - (m + 1).leading_zeros() - 1) as usize),
        None => p.blocks,
    };
    let est = besov_quasinorm(&src.coefficients((1 << blocks) - 1), p.p, blocks)?;
    let csv = est
        .block_norms
        .iter()
        .zip(&est.partial_sums)
        .enumerate()
        .fold(String::from("k,block,partial\n"), |acc, (k, (b, s))| acc + &format!("{k},{b:e},{s:e}\n"));
    Ok(TaskOutput { pass: est.partial_quasinorm.is_finite(), result: to_json(&est)?, csv: Some(csv) })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ModelSpaceParams {
    bound: u32,
}

impl Default for ModelSpaceParams {
    fn default() -> Self {
        ModelSpaceParams { bound: 128 }
    }
}

fn model_space(ctx: &Context, p: ModelSpaceParams) -> anyhow::Result<TaskOutput> {
    let theta = ctx.symbol.blaschke()?.ok_or_else(|| anyhow!("model_space needs a blaschke_pullback symbol"))?;
    let rep = model_space_dim(&theta, &ctx.group, TruncationBox::new(ctx.cap_u32(p.bound)))?;
    Ok(TaskOutput { pass: rep.pass, result: to_json(&rep)?, csv: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BeurlingParams {
    #[serde(default = "zero")]
    lambda: ComplexJson,
    #[serde(default = "one_usize")]
    n: usize,
    #[serde(default)]
    size: Option<usize>,
}

fn zero() -> ComplexJson {
    ComplexJson { re: 0.0, im: 0.0 }
}

fn one_usize() -> usize {
    1
}

fn beurling(ctx: &Context, p: BeurlingParams) -> anyhow::Result<TaskOutput> {
    let lambda: C64 = p.lambda.into();
    let size = match p.size {
        Some(s) => ctx.cap(s),
        None => CauchyVector::length_for(lambda, p.n.saturating_sub(1))?,
    };
    let eig = beurling_eigencheck(lambda, &ctx.group, size)?;
    let chain = chain_check(&root_subspace_basis(lambda, p.n, &ctx.group, size)?)?;
    Ok(TaskOutput {
        pass: eig.pass && chain.pass,
        result: json!({"size": size, "eigencheck": to_json(&eig)?, "chain": to_json(&chain)?}),
        csv: None,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct AnnihilationParams {
    size: usize,
}

impl Default for AnnihilationParams {
    fn default() -> Self {
        AnnihilationParams { size: 64 }
    }
}

fn annihilation(ctx: &Context, p: AnnihilationParams) -> anyhow::Result<TaskOutput> {
    let r = ctx.symbol.rational()?.ok_or_else(|| anyhow!("annihilation needs a rational symbol"))?;
    let rep = annihilation_check(&r, &ctx.group, ctx.cap(p.size))?;
    Ok(TaskOutput { pass: rep.residual < 1e-11 && rep.rank_bound_pass, result: to_json(&rep)?, csv: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelTerm {
    element: GroupElement,
    value: ComplexJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscreteParams {
    #[serde(default = "four")]
    bound: u32,
    /// Kernel of `Γ` on `X₊`; derived from the symbol when absent.
    #[serde(default)]
    kernel: Option<Vec<KernelTerm>>,
}

fn four() -> u32 {
    4
}

fn discrete(ctx: &Context, p: DiscreteParams) -> anyhow::Result<TaskOutput> {
    let bound = ctx.cap_u32(p.bound);
    let bx = TruncationBox::new(bound);
    let len = 2 * bound as usize + 1;
    let (minus, _) = ctx.symbol(len)?.antianalytic(&ctx.group, len)?;
    let kernel = match p.kernel {
        Some(terms) => DiscreteKernel::from_terms(terms.into_iter().map(|t| (t.element, t.value.into()))),
        None => {
            // a(χ) = φ̂(−(χ + χ₁)) reproduces H_φ through the row bijection
            let chi1 = ctx.group.least_positive().ok_or_else(|| anyhow!("group has no least positive element"))?;
            let mut terms = Vec::new();
            for (xi, v) in minus.iter() {
                let chi = ctx.group.sub(&ctx.group.negate(xi)?, &chi1)?;
                terms.push((chi, *v));
            }
            DiscreteKernel::from_terms(terms)
        }
    };
    let gamma = gamma_equivalence(&kernel, &ctx.group, bx)?;
    // 𝒢_ν with ν = P₋φ is H_φ on the same indices
    let nu = DiscreteKernel::from_terms(minus.iter().map(|(e, v)| (e.clone(), *v)));
    let g = build_g(&nu, &ctx.group, bx)?;
    let h = build_hankel(&minus, &ctx.group, bx)?;
    let g_mismatches = g.entries.iter().zip(h.entries.iter()).filter(|(a, b)| a != b).count()
        + usize::from(g.rows != h.rows || g.cols != h.cols);
    Ok(TaskOutput {
        pass: gamma.mismatches == 0 && gamma.rows_compared > 0 && g_mismatches == 0,
        result: json!({"bound": bound, "gamma": to_json(&gamma)?, "g_mismatches": g_mismatches}),
        csv: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let names: Vec<_> = registry().iter().map(|t| t.name()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        assert!(lookup("aak").is_some());
        assert!(lookup("frobnicate").is_none());
    }

    #[test]
    fn parameters_are_checked() {
        let t = lookup("aak").unwrap();
        assert!(t.check_params(&json!({})).is_ok());
        assert!(t.check_params(&json!({"n": 2, "size": 64})).is_ok());
        assert!(t.check_params(&json!({"n": -1})).is_err());
        assert!(t.check_params(&json!({"rank": 1})).is_err());
        assert!(lookup("compactness").unwrap().check_params(&json!({"expect": "noncompact_witness"})).is_ok());
        assert!(lookup("compactness").unwrap().check_params(&json!({"expect": "maybe"})).is_err());
    }
}
