//! TOML study configuration files.
//!
//! Schema (all sections optional unless noted):
//!
//! ```toml
//! name = "desk1-demo"          # required
//! max_trials = 300             # required
//! parallelism = 2              # default 1
//! seed = 42                    # default 0
//! questions = 50               # default 50
//! objective = "cost"           # or "latency"
//! storage = "runs/desk1.log"   # required unless FLOWOPT_STORAGE is set
//!
//! [evaluator]                  # required
//! type = "builtin"             # or "external"
//! benchmark = "desk-1"         # builtin only
//! # command = ["python3", "eval.py"]   # external only
//! # timeout_ms = 60000
//! # max_retries = 5
//! # backoff_ms = 200
//!
//! [space]
//! source = "evaluator"         # benchmark's own space (default), or "default"
//!
//! [seeding]
//! static = true                # include the static recipe set
//! random = 100                 # random seed count
//! transfer_from = ["runs/prior.log"]
//! k_fronts = 3
//! n_transfer = 10
//!
//! [tpe]
//! gamma = 0.25
//! n_candidates = 24
//! prior_weight = 1.0
//! min_history = 10
//!
//! [pruner]
//! enabled = true
//! z = 1.645
//! min_evals = 10
//! check_interval = 5
//! cost_model = "normal"        # or "lognormal"
//! ```
//!
//! Environment overrides: `FLOWOPT_STORAGE` replaces the storage path and
//! `FLOWOPT_PARALLELISM` replaces the parallelism.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::motpe::TpeConfig;
use crate::pruner::{CostModel, PrunerConfig};
use crate::seeding::{static_seeds, SeedPlan};
use crate::space::{default_space, SearchSpace};
use crate::study::{
    builtin_benchmark, default_backoff_ms, default_max_retries, default_timeout_ms,
    transfer_from_logs, EvaluatorBinding, StudyConfig,
};
use crate::harness::SecondObjective;
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StudyFile {
    name: String,
    max_trials: u64,
    #[serde(default = "one")]
    parallelism: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "fifty")]
    questions: usize,
    #[serde(default)]
    objective: SecondObjective,
    storage: Option<PathBuf>,
    evaluator: EvaluatorSection,
    #[serde(default)]
    space: SpaceSection,
    #[serde(default)]
    seeding: SeedingSection,
    #[serde(default)]
    tpe: TpeSection,
    #[serde(default)]
    pruner: PrunerSection,
}

fn one() -> usize {
    1
}

fn fifty() -> usize {
    50
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum EvaluatorSection {
    Builtin {
        benchmark: String,
    },
    External {
        command: Vec<String>,
        timeout_ms: Option<u64>,
        max_retries: Option<u32>,
        backoff_ms: Option<u64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceSection {
    /// "evaluator" (builtin benchmark's own space) or "default".
    source: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedingSection {
    #[serde(rename = "static", default = "yes")]
    static_set: bool,
    #[serde(default = "hundred")]
    random: usize,
    #[serde(default)]
    transfer_from: Vec<PathBuf>,
    #[serde(default = "three")]
    k_fronts: usize,
    #[serde(default = "ten")]
    n_transfer: usize,
}

fn yes() -> bool {
    true
}

fn hundred() -> usize {
    100
}

fn three() -> usize {
    3
}

fn ten() -> usize {
    10
}

impl Default for SeedingSection {
    fn default() -> Self {
        SeedingSection {
            static_set: true,
            random: 100,
            transfer_from: Vec::new(),
            k_fronts: 3,
            n_transfer: 10,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TpeSection {
    gamma: Option<f64>,
    n_candidates: Option<usize>,
    prior_weight: Option<f64>,
    min_history: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrunerSection {
    enabled: Option<bool>,
    z: Option<f64>,
    min_evals: Option<u64>,
    check_interval: Option<u64>,
    cost_model: Option<String>,
}

/// Loads and resolves a TOML study file into a runnable configuration,
/// applying `FLOWOPT_STORAGE` and `FLOWOPT_PARALLELISM` overrides.
pub fn load_study_file(path: &Path) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(path)?;
    resolve_study_file(&text)
}

/// Same as [`load_study_file`] but from in-memory text.
pub fn resolve_study_file(text: &str) -> Result<StudyConfig> {
    let file: StudyFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("study file: {e}")))?;

    let evaluator = match &file.evaluator {
        EvaluatorSection::Builtin { benchmark } => EvaluatorBinding::Builtin {
            benchmark: benchmark.clone(),
        },
        EvaluatorSection::External {
            command,
            timeout_ms,
            max_retries,
            backoff_ms,
        } => EvaluatorBinding::External {
            command: command.clone(),
            timeout_ms: timeout_ms.unwrap_or_else(default_timeout_ms),
            max_retries: max_retries.unwrap_or_else(default_max_retries),
            backoff_ms: backoff_ms.unwrap_or_else(default_backoff_ms),
        },
    };

    let space: SearchSpace = match file.space.source.as_deref() {
        Some("default") => default_space(),
        None | Some("evaluator") => match &file.evaluator {
            EvaluatorSection::Builtin { benchmark } => builtin_benchmark(benchmark)?.space,
            EvaluatorSection::External { .. } => default_space(),
        },
        Some(other) => {
            return Err(Error::Config(format!(
                "space.source must be \"evaluator\" or \"default\", got `{other}`"
            )))
        }
    };

    let static_configs = if file.seeding.static_set {
        static_seeds(&space).configs
    } else {
        Vec::new()
    };
    let transfer = if file.seeding.transfer_from.is_empty() {
        Vec::new()
    } else {
        transfer_from_logs(
            &file.seeding.transfer_from,
            &space,
            file.seeding.k_fronts,
            file.seeding.n_transfer,
            file.seed,
        )?
    };
    let seed_plan = SeedPlan {
        static_configs,
        random_count: file.seeding.random,
        transfer,
    };

    let tpe_defaults = TpeConfig::default();
    let tpe = TpeConfig {
        gamma: file.tpe.gamma.unwrap_or(tpe_defaults.gamma),
        n_candidates: file.tpe.n_candidates.unwrap_or(tpe_defaults.n_candidates),
        prior_weight: file.tpe.prior_weight.unwrap_or(tpe_defaults.prior_weight),
        min_history: file.tpe.min_history.unwrap_or(tpe_defaults.min_history),
    };

    let pruner = if file.pruner.enabled.unwrap_or(true) {
        let defaults = PrunerConfig::default();
        let cost_model = match file.pruner.cost_model.as_deref() {
            None | Some("normal") => CostModel::Normal,
            Some("lognormal") => CostModel::Lognormal,
            Some(other) => {
                return Err(Error::Config(format!(
                    "pruner.cost_model must be \"normal\" or \"lognormal\", got `{other}`"
                )))
            }
        };
        Some(PrunerConfig {
            z: file.pruner.z.unwrap_or(defaults.z),
            min_evals: file.pruner.min_evals.unwrap_or(defaults.min_evals),
            check_interval: file.pruner.check_interval.unwrap_or(defaults.check_interval),
            cost_model,
        })
    } else {
        None
    };

    let storage = match std::env::var_os("FLOWOPT_STORAGE") {
        Some(v) => PathBuf::from(v),
        None => file
            .storage
            .ok_or_else(|| Error::Config("storage path missing (set it or FLOWOPT_STORAGE)".into()))?,
    };
    let parallelism = match std::env::var("FLOWOPT_PARALLELISM") {
        Ok(v) => v
            .parse()
            .map_err(|_| Error::Config(format!("FLOWOPT_PARALLELISM=`{v}` is not a count")))?,
        Err(_) => file.parallelism,
    };

    let config = StudyConfig {
        name: file.name,
        space,
        objective: file.objective,
        seed_plan,
        tpe,
        pruner,
        max_trials: file.max_trials,
        parallelism,
        seed: file.seed,
        questions: file.questions,
        evaluator,
        storage,
    };
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "t"
        max_trials = 200
        storage = "runs/t.log"
        seed = 9

        [evaluator]
        type = "builtin"
        benchmark = "desk-2"

        [seeding]
        static = false
        random = 10
    "#;

    #[test]
    fn minimal_file_resolves_with_defaults() {
        let cfg = resolve_study_file(MINIMAL).unwrap();
        assert_eq!(cfg.name, "t");
        assert_eq!(cfg.max_trials, 200);
        assert_eq!(cfg.parallelism, 1);
        assert_eq!(cfg.questions, 50);
        assert_eq!(cfg.seed_plan.random_count, 10);
        assert!(cfg.seed_plan.static_configs.is_empty());
        assert!(cfg.pruner.is_some());
        assert_eq!(cfg.storage, PathBuf::from("runs/t.log"));
        // desk-2's own space, not the shipped default.
        assert!(cfg.space.param("flow").is_none() || cfg.space.param("strategy").is_some());
    }

    #[test]
    fn pruner_can_be_disabled() {
        let text = MINIMAL.replace("[seeding]", "[pruner]\nenabled = false\n\n[seeding]");
        let cfg = resolve_study_file(&text).unwrap();
        assert!(cfg.pruner.is_none());
    }

    #[test]
    fn default_space_with_static_recipes() {
        let text = r#"
            name = "d"
            max_trials = 200
            storage = "runs/d.log"

            [evaluator]
            type = "builtin"
            benchmark = "desk-1"

            [space]
            source = "default"

            [seeding]
            random = 20
        "#;
        let cfg = resolve_study_file(text).unwrap();
        assert_eq!(cfg.seed_plan.static_configs.len(), 46);
        assert_eq!(cfg.seed_plan.len(), 66);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("seed = 9", "seed = 9\nbudget = 3");
        assert!(matches!(
            resolve_study_file(&text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bad_cost_model_is_rejected() {
        let text = MINIMAL.replace("[seeding]", "[pruner]\ncost_model = \"cauchy\"\n\n[seeding]");
        assert!(matches!(resolve_study_file(&text), Err(Error::Config(_))));
    }

    #[test]
    fn external_evaluator_fills_connection_defaults() {
        let text = r#"
            name = "x"
            max_trials = 150
            storage = "runs/x.log"

            [evaluator]
            type = "external"
            command = ["my-eval", "--flag"]

            [seeding]
            random = 4
        "#;
        let cfg = resolve_study_file(text).unwrap();
        match cfg.evaluator {
            EvaluatorBinding::External {
                timeout_ms,
                max_retries,
                backoff_ms,
                ..
            } => {
                assert_eq!(timeout_ms, 60_000);
                assert_eq!(max_retries, 5);
                assert_eq!(backoff_ms, 200);
            }
            _ => panic!("expected external binding"),
        }
    }
}
