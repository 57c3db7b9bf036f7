//! Experiment files: the group, one symbol, and a list of tasks.

use grouphankel::ordered_group::{GroupElement, OrderSpec};
use grouphankel::symbols::{
    pullback_support, BlaschkePullback, CauchyKernelSum, CoefficientFn, CoefficientList, CoefficientSource,
    FourierSymbol, PoleTerm, RationalPullback, Symbol,
};
use grouphankel::C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Problems with the experiment file itself, reported with exit code 2.
#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed experiment: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("task `{task}`: {message}")]
    Params { task: String, message: String },
    #[error("invalid experiment: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexJson> for C64 {
    fn from(c: ComplexJson) -> C64 {
        C64::new(c.re, c.im)
    }
}

fn one() -> ComplexJson {
    ComplexJson { re: 1.0, im: 0.0 }
}

fn default_mult() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    pub element: GroupElement,
    pub coef: ComplexJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleJson {
    pub pole: ComplexJson,
    #[serde(default = "default_mult")]
    pub mult: u32,
    pub coef: ComplexJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyTerm {
    pub coef: ComplexJson,
    pub lambda: ComplexJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSpec {
    Fourier {
        terms: Vec<FourierTerm>,
    },
    RationalPullback {
        terms: Vec<PoleJson>,
    },
    CauchySum {
        terms: Vec<CauchyTerm>,
    },
    BlaschkePullback {
        zeros: Vec<ComplexJson>,
        #[serde(rename = "const", default = "one")]
        constant: ComplexJson,
    },
    /// Circle coefficients `c_1, c_2, …`, pulled back along `χ₁`.
    Coefficients {
        values: Vec<ComplexJson>,
    },
    /// `c_n = scale · n^{−exponent}`.
    PowerLaw {
        exponent: f64,
        #[serde(default = "unit_scale")]
        scale: f64,
    },
}

fn unit_scale() -> f64 {
    1.0
}

impl SymbolSpec {
    /// Group symbol; infinite coefficient sequences are cut after `len`
    /// terms.
    pub fn symbol(&self, spec: &OrderSpec, len: usize) -> grouphankel::Result<Symbol> {
        Ok(match self {
            SymbolSpec::Fourier { terms } => {
                let f = FourierSymbol::from_terms(terms.iter().map(|t| (t.element.clone(), t.coef.into())));
                f.validate(spec)?;
                Symbol::Fourier(f)
            }
            SymbolSpec::RationalPullback { .. } => Symbol::Rational(self.rational()?.expect("rational")),
            SymbolSpec::CauchySum { .. } => Symbol::Cauchy(self.cauchy()?.expect("cauchy")),
            SymbolSpec::BlaschkePullback { .. } => Symbol::Blaschke(self.blaschke()?.expect("blaschke")),
            SymbolSpec::Coefficients { .. } | SymbolSpec::PowerLaw { .. } => {
                let src = self.source()?.expect("coefficient symbol");
                Symbol::Fourier(pullback_support(&src.coefficients(len), spec)?)
            }
        })
    }

    pub fn rational(&self) -> grouphankel::Result<Option<RationalPullback>> {
        match self {
            SymbolSpec::RationalPullback { terms } => RationalPullback::new(
                terms.iter().map(|t| PoleTerm { pole: t.pole.into(), power: t.mult, coef: t.coef.into() }).collect(),
            )
            .map(Some),
            SymbolSpec::CauchySum { .. } => Ok(self.cauchy()?.map(|c| c.to_rational())),
            _ => Ok(None),
        }
    }

    pub fn cauchy(&self) -> grouphankel::Result<Option<CauchyKernelSum>> {
        match self {
            SymbolSpec::CauchySum { terms } => {
                CauchyKernelSum::new(terms.iter().map(|t| (t.coef.into(), t.lambda.into())).collect()).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn blaschke(&self) -> grouphankel::Result<Option<BlaschkePullback>> {
        match self {
            SymbolSpec::BlaschkePullback { zeros, constant } => {
                BlaschkePullback::new(zeros.iter().map(|&z| z.into()).collect(), (*constant).into()).map(Some)
            }
            _ => Ok(None),
        }
    }

    /// Circle coefficients, when the symbol has them without reference to a
    /// group.
    pub fn source(&self) -> grouphankel::Result<Option<Box<dyn CoefficientSource>>> {
        Ok(match self {
            SymbolSpec::RationalPullback { .. } => self.rational()?.map(|r| Box::new(r) as Box<dyn CoefficientSource>),
            SymbolSpec::CauchySum { .. } => self.cauchy()?.map(|c| Box::new(c) as Box<dyn CoefficientSource>),
            SymbolSpec::BlaschkePullback { .. } => Some(Box::new(CoefficientList::finite(Vec::new()))),
            SymbolSpec::Coefficients { values } => {
                Some(Box::new(CoefficientList::finite(values.iter().map(|&v| v.into()).collect())))
            }
            SymbolSpec::PowerLaw { exponent, scale } => {
                let (e, s) = (*exponent, *scale);
                Some(Box::new(CoefficientFn(move |n: usize| C64::new(s * (n as f64).powf(-e), 0.0))))
            }
            SymbolSpec::Fourier { .. } => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub task: String,
    #[serde(default = "empty_params")]
    pub params: Value,
}

fn empty_params() -> Value {
    Value::Object(Default::default())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default)]
    pub format: Format,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_dir(), format: Format::Json }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub group: OrderSpec,
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.group.validate().map_err(|e| SchemaError::Invalid(e.to_string()))?;
        // building the symbol catches elements of the wrong group and poles
        // outside the disc before any task runs
        spec.symbol.symbol(&spec.group, 1).map_err(|e| SchemaError::Invalid(e.to_string()))?;
        for t in &spec.tasks {
            crate::tasks::validate(t)?;
        }
        Ok(spec)
    }

    pub fn load(path: &str) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path).map_err(|source| SchemaError::Io { path: path.into(), source })?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "group": {"kind": "int_lex", "n": 2},
        "symbol": {"kind": "rational_pullback", "terms": [{"pole": {"re": 0.5}, "coef": {"re": 1, "im": 0}}]},
        "tasks": [{"task": "ideal_check", "params": {"bound": 3}}, {"task": "kronecker_check"}],
        "seed": 11
    }"#;

    #[test]
    fn parses_and_defaults() {
        let s = ExperimentSpec::parse(GOOD).unwrap();
        assert_eq!(s.group, OrderSpec::IntLex { n: 2 });
        assert_eq!(s.tasks.len(), 2);
        assert_eq!(s.output.dir, "out");
        assert_eq!(s.seed, 11);
        let r = s.symbol.rational().unwrap().unwrap();
        assert_eq!(r.terms[0].power, 1);
    }

    #[test]
    fn rejects_bad_files() {
        let unknown_task = GOOD.replace("kronecker_check", "frobnicate");
        assert!(matches!(ExperimentSpec::parse(&unknown_task), Err(SchemaError::UnknownTask(_))));
        let unknown_field = GOOD.replace("\"seed\"", "\"sed\"");
        assert!(matches!(ExperimentSpec::parse(&unknown_field), Err(SchemaError::Json(_))));
        let bad_param = GOOD.replace("\"bound\": 3", "\"bound\": -3");
        assert!(matches!(ExperimentSpec::parse(&bad_param), Err(SchemaError::Params { .. })));
        let outside = GOOD.replace("\"re\": 0.5", "\"re\": 1.5");
        assert!(matches!(ExperimentSpec::parse(&outside), Err(SchemaError::Invalid(_))));
        let wrong_rank = r#"{"group": {"kind": "int_lex", "n": 2},
            "symbol": {"kind": "fourier", "terms": [{"element": [-1], "coef": {"re": 1}}]}}"#;
        assert!(matches!(ExperimentSpec::parse(wrong_rank), Err(SchemaError::Invalid(_))));
    }

    #[test]
    fn other_symbol_kinds() {
        let s: SymbolSpec = serde_json::from_str(r#"{"kind": "blaschke_pullback", "zeros": [{"re": 0.5}]}"#).unwrap();
        assert_eq!(s.blaschke().unwrap().unwrap().constant, C64::new(1.0, 0.0));
        let s: SymbolSpec = serde_json::from_str(r#"{"kind": "power_law", "exponent": 1}"#).unwrap();
        let c = s.source().unwrap().unwrap().coefficients(3);
        assert_eq!(c[2], C64::new(1.0 / 3.0, 0.0));
        let s: SymbolSpec = serde_json::from_str(
            r#"{"kind": "fourier", "terms": [{"element": {"num": -1, "den": 2}, "coef": {"re": 1}}]}"#,
        )
        .unwrap();
        assert!(s.symbol(&OrderSpec::RatNatural, 1).is_ok());
    }
}
