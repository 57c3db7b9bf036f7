//! Batch runner for `grouphankel` experiments.
//!
//! An experiment file names a group, a symbol and a list of tasks. Tasks run
//! in parallel; the combined report lists them in file order so identical
//! inputs give identical bytes.

pub mod experiment;
pub mod suite;
pub mod tasks;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use grouphankel::model_spaces::{CAUCHY_TAIL_TOL, MODEL_SPACE_TOL};
use grouphankel::spectral::aak::{LOWER_TOL, UPPER_REL_TOL};
use grouphankel::spectral::norms::NUCLEAR_SLACK;
use grouphankel::spectral::svd::{RANK_ABS_TOL, RANK_REL_TOL};
use rayon::prelude::*;
use serde_json::{json, Value};

pub use experiment::{ExperimentSpec, Format, SchemaError, TaskSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_TASK_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;

pub fn tolerances() -> Value {
    json!({
        "rank_rel": RANK_REL_TOL,
        "rank_abs": RANK_ABS_TOL,
        "aak_lower": LOWER_TOL,
        "aak_upper_rel": UPPER_REL_TOL,
        "nuclear_slack": NUCLEAR_SLACK,
        "model_space": MODEL_SPACE_TOL,
        "cauchy_tail": CAUCHY_TAIL_TOL,
    })
}

/// Command-line overrides of the experiment file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub max_n: Option<usize>,
}

pub struct RunSummary {
    pub report: Value,
    pub pass: bool,
    pub out_dir: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            EXIT_OK
        } else {
            EXIT_TASK_FAILED
        }
    }
}

/// Serialized exactly as written to disk.
pub fn to_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("reports are plain JSON");
    s.push('\n');
    s.into_bytes()
}

fn file_names(tasks: &[TaskSpec]) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    tasks
        .iter()
        .map(|t| {
            let n = seen.entry(&t.task).or_insert(0);
            *n += 1;
            if *n == 1 {
                t.task.clone()
            } else {
                format!("{}_{}", t.task, n)
            }
        })
        .collect()
}

/// Runs `tasks` against the group and symbol of `spec` and writes the
/// report files. Task errors become failed sections; I/O errors abort.
pub fn run(spec: &ExperimentSpec, tasks: &[TaskSpec], opts: &RunOptions) -> anyhow::Result<RunSummary> {
    for t in tasks {
        tasks::validate(t)?;
    }
    let seed = opts.seed.unwrap_or(spec.seed);
    let format = opts.format.unwrap_or(spec.output.format);
    let out_dir = opts.out.clone().unwrap_or_else(|| PathBuf::from(&spec.output.dir));
    let ctx = tasks::Context { group: spec.group, symbol: &spec.symbol, seed, max_n: opts.max_n };

    let outputs: Vec<_> = tasks
        .par_iter()
        .map(|t| {
            let task = tasks::lookup(&t.task).expect("validated");
            task.run(&ctx, &t.params)
        })
        .collect();

    fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let names = file_names(tasks);
    let mut sections = Vec::new();
    let mut all_pass = true;
    for ((t, name), out) in tasks.iter().zip(&names).zip(outputs) {
        let section = match out {
            Ok(o) => {
                all_pass &= o.pass;
                if format == Format::Csv {
                    if let Some(csv) = &o.csv {
                        write(&out_dir.join(format!("{name}.csv")), csv.as_bytes())?;
                    }
                }
                json!({"task": t.task, "params": t.params, "pass": o.pass, "result": o.result})
            }
            Err(e) => {
                all_pass = false;
                json!({"task": t.task, "params": t.params, "pass": false, "error": format!("{e:#}")})
            }
        };
        write(&out_dir.join(format!("{name}.json")), &to_bytes(&section))?;
        sections.push(section);
    }
    let report = json!({
        "version": VERSION,
        "seed": seed,
        "group": spec.group,
        "symbol": spec.symbol,
        "max_n": opts.max_n,
        "tolerances": tolerances(),
        "sections": sections,
        "pass": all_pass,
    });
    write(&out_dir.join("report.json"), &to_bytes(&report))?;
    Ok(RunSummary { report, pass: all_pass, out_dir })
}

/// Tasks of `verb` listed in the experiment, or the verb's first task with
/// default parameters when none are listed.
pub fn tasks_for_verb(spec: &ExperimentSpec, verb: &str) -> Vec<TaskSpec> {
    let reg = tasks::registry();
    let in_verb = |name: &str| reg.iter().any(|t| t.name() == name && t.verb() == verb);
    let listed: Vec<TaskSpec> = spec.tasks.iter().filter(|t| in_verb(&t.task)).cloned().collect();
    if !listed.is_empty() {
        return listed;
    }
    reg.iter()
        .find(|t| t.verb() == verb)
        .map(|t| vec![TaskSpec { task: t.name().into(), params: json!({}) }])
        .unwrap_or_default()
}

/// Runs the acceptance battery and writes `suite.json`.
pub fn run_suite(seed: u64, out: &Path) -> anyhow::Result<RunSummary> {
    let results = suite::run_all(seed);
    let pass = results.iter().all(|r| r.pass);
    let report = json!({
        "version": VERSION,
        "seed": seed,
        "tolerances": tolerances(),
        "criteria": results,
        "pass": pass,
    });
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write(&out.join("suite.json"), &to_bytes(&report))?;
    Ok(RunSummary { report, pass, out_dir: out.to_path_buf() })
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_tasks_get_distinct_files() {
        let t = |n: &str| TaskSpec { task: n.into(), params: json!({}) };
        let names = file_names(&[t("svd"), t("aak"), t("svd"), t("svd")]);
        assert_eq!(names, ["svd", "aak", "svd_2", "svd_3"]);
    }

    #[test]
    fn verb_selection() {
        let spec = ExperimentSpec::parse(
            r#"{"group": {"kind": "int_lex", "n": 1},
                "symbol": {"kind": "rational_pullback", "terms": [{"pole": {"re": 0.5}, "coef": {"re": 1}}]},
                "tasks": [{"task": "beurling"}, {"task": "svd"}, {"task": "annihilation"}]}"#,
        )
        .unwrap();
        let names = |v: &str| tasks_for_verb(&spec, v).into_iter().map(|t| t.task).collect::<Vec<_>>();
        assert_eq!(names("model-space"), ["beurling", "annihilation"]);
        assert_eq!(names("rank"), ["kronecker_check"]);
        assert!(names("nope").is_empty());
    }
}
