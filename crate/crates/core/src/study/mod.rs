//! Study orchestration: seeding, the ask/tell loop with MO-TPE, concurrent
//! trial execution, frontier maintenance, append-only persistence, and
//! resume.

pub mod file;
pub mod log;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::harness::external::{ConnectionSettings, ExternalEvaluator};
use crate::harness::sim::{desk1, desk2, SimBenchmarkSpec, SimEvaluator};
use crate::harness::{
    evaluate_trial, mix_seed, EvalRecord, Evaluator, PruningHook, SecondObjective, TrialEvaluation,
    TrialStatus,
};
use crate::motpe::{propose, HistoryItem, TpeConfig};
use crate::pareto::{pareto_area, ObjectiveVector, ParetoFront};
use crate::pruner::PrunerConfig;
use crate::seeding::{transfer_seeds, PriorStudy, SeedKind, SeedPlan};
use crate::space::{FlowConfig, SearchSpace};
use crate::study::log::{now_ts, read_log, replay, LogRecord, LogWriter, LOG_VERSION};
use crate::{Error, Result};

/// Domain separation tags for deriving sub-seeds from the study seed.
const SEED_PLAN_TAG: u64 = 0x5eed;
const TRANSFER_TAG: u64 = 0x7a53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialOrigin {
    StaticSeed,
    RandomSeed,
    TransferSeed,
    Sampler,
}

impl From<SeedKind> for TrialOrigin {
    fn from(kind: SeedKind) -> TrialOrigin {
        match kind {
            SeedKind::Static => TrialOrigin::StaticSeed,
            SeedKind::Random => TrialOrigin::RandomSeed,
            SeedKind::Transfer => TrialOrigin::TransferSeed,
        }
    }
}

/// One attempted configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub id: u64,
    pub config: FlowConfig,
    pub origin: TrialOrigin,
    pub status: TrialStatus,
    pub records: Vec<EvalRecord>,
    pub objectives: Option<ObjectiveVector>,
    pub mean_cost_usd: Option<f64>,
    pub mean_latency_s: Option<f64>,
    pub pruned_corner: Option<(f64, f64)>,
    pub started_at: u64,
    pub ended_at: Option<u64>,
}

/// How trials are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EvaluatorBinding {
    /// A shipped simulated benchmark: "desk-1" or "desk-2".
    Builtin { benchmark: String },
    /// External process speaking the line-delimited JSON protocol.
    External {
        command: Vec<String>,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
        #[serde(default = "default_max_retries")]
        max_retries: u32,
        #[serde(default = "default_backoff_ms")]
        backoff_ms: u64,
    },
}

pub(crate) fn default_timeout_ms() -> u64 {
    60_000
}

pub(crate) fn default_max_retries() -> u32 {
    5
}

pub(crate) fn default_backoff_ms() -> u64 {
    200
}

/// RNG used to materialize a study's seed plan, derived from the study
/// seed. Exposed so seed exports match what the study actually runs.
pub fn seed_plan_rng(study_seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(mix_seed(&[study_seed, SEED_PLAN_TAG]))
}

/// Shipped benchmark by name.
pub fn builtin_benchmark(name: &str) -> Result<SimBenchmarkSpec> {
    match name {
        "desk-1" => Ok(desk1()),
        "desk-2" => Ok(desk2()),
        other => Err(Error::Config(format!("unknown benchmark `{other}`"))),
    }
}

/// Fully resolved study configuration, as persisted in the log's study-meta
/// record. The storage path is deliberately not persisted: it is wherever
/// the log lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub name: String,
    pub space: SearchSpace,
    #[serde(default)]
    pub objective: SecondObjective,
    pub seed_plan: SeedPlan,
    #[serde(default)]
    pub tpe: TpeConfig,
    /// None disables pruning.
    #[serde(default)]
    pub pruner: Option<PrunerConfig>,
    pub max_trials: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_questions")]
    pub questions: usize,
    pub evaluator: EvaluatorBinding,
    #[serde(skip)]
    pub storage: PathBuf,
}

fn default_parallelism() -> usize {
    1
}

fn default_questions() -> usize {
    50
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.parallelism < 1 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        if self.max_trials < self.seed_plan.len() as u64 {
            return Err(Error::Config(format!(
                "max_trials {} is below the seed plan size {}",
                self.max_trials,
                self.seed_plan.len()
            )));
        }
        if self.questions == 0 {
            return Err(Error::Config("questions must be positive".into()));
        }
        let report = self.space.validate();
        if !report.violations.is_empty() {
            return Err(Error::InvalidSpace(format!(
                "{} violations, first: {}",
                report.violations.len(),
                report.violations[0].message
            )));
        }
        self.seed_plan.validate(&self.space)?;
        Ok(())
    }

    fn question_set(&self) -> Vec<String> {
        (1..=self.questions).map(|i| format!("q{i:04}")).collect()
    }
}

/// A finished (or loaded) study.
#[derive(Debug, Clone)]
pub struct Study {
    pub config: StudyConfig,
    pub trials: Vec<Trial>,
    pub front: ParetoFront,
    pub warnings: Vec<String>,
}

impl Study {
    pub fn trial(&self, id: u64) -> Option<&Trial> {
        self.trials.iter().find(|t| t.id == id)
    }

    /// Evaluation calls actually spent, across all trials.
    pub fn total_evaluations(&self) -> u64 {
        self.trials.iter().map(|t| t.records.len() as u64).sum()
    }

    /// Total USD spent on evaluation calls.
    pub fn total_cost(&self) -> f64 {
        self.trials
            .iter()
            .flat_map(|t| &t.records)
            .map(|r| r.cost)
            .sum()
    }

    pub fn count_with_status(&self, status: TrialStatus) -> usize {
        self.trials.iter().filter(|t| t.status == status).count()
    }

    /// Sampler view of the history: completed and pruned trials that carry
    /// objectives, in id order.
    pub fn history_items(&self) -> Vec<HistoryItem> {
        self.trials
            .iter()
            .filter_map(|t| {
                let objectives = t.objectives?;
                match t.status {
                    TrialStatus::Completed | TrialStatus::Pruned => Some(HistoryItem {
                        id: t.id,
                        config: t.config.clone(),
                        objectives,
                        pruned: t.status == TrialStatus::Pruned,
                    }),
                    _ => None,
                }
            })
            .collect()
    }

    /// Completed trials as transfer-seeding input.
    pub fn as_prior(&self) -> PriorStudy {
        PriorStudy {
            trials: self
                .trials
                .iter()
                .filter(|t| t.status == TrialStatus::Completed)
                .filter_map(|t| Some((t.config.clone(), t.objectives?)))
                .collect(),
        }
    }
}

fn build_evaluator(config: &StudyConfig) -> Result<Arc<dyn Evaluator>> {
    match &config.evaluator {
        EvaluatorBinding::Builtin { benchmark } => {
            Ok(Arc::new(SimEvaluator::new(builtin_benchmark(benchmark)?)))
        }
        EvaluatorBinding::External {
            command,
            timeout_ms,
            max_retries,
            backoff_ms,
        } => {
            let evaluator = ExternalEvaluator::connect(ConnectionSettings {
                command: command.clone(),
                timeout: Duration::from_millis(*timeout_ms),
                max_retries: *max_retries,
                backoff_base: Duration::from_millis(*backoff_ms),
                seed: config.seed,
            })?;
            Ok(Arc::new(evaluator))
        }
    }
}

/// Builds transfer seeds for a study from previously persisted logs.
pub fn transfer_from_logs(
    paths: &[PathBuf],
    space: &SearchSpace,
    k_fronts: usize,
    n_select: usize,
    seed: u64,
) -> Result<Vec<FlowConfig>> {
    let mut prior = Vec::new();
    for path in paths {
        prior.push(load_study(path)?.as_prior());
    }
    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(&[seed, TRANSFER_TAG]));
    Ok(transfer_seeds(&prior, space, k_fronts, n_select, &mut rng)?.configs)
}

/// Loads a persisted study without continuing it.
pub fn load_study(path: &Path) -> Result<Study> {
    let (records, warnings) = read_log(path)?;
    let state = replay(records, warnings)?;
    let mut config = state.config;
    config.storage = path.to_path_buf();
    Ok(Study {
        config,
        trials: state.trials.into_values().collect(),
        front: state.front,
        warnings: state.warnings,
    })
}

/// Runs a fresh study to completion. Fails if the storage path already
/// holds a log (resume that instead).
pub fn run_study(config: StudyConfig) -> Result<Study> {
    config.validate()?;
    let mut log = LogWriter::create(&config.storage)?;
    log.append(&LogRecord::StudyMeta {
        v: LOG_VERSION,
        config: config.clone(),
        ts: now_ts(),
    })?;
    drive(config, BTreeMap::new(), ParetoFront::new(), log, Vec::new())
}

/// Resumes a persisted study and continues to max_trials. Interrupted
/// trials are re-executed against the deterministic built-in benchmarks
/// (same id, same config, hence the same record stream); with an external
/// evaluator they are marked failed instead, since their lost records are
/// not reproducible.
pub fn resume(path: &Path) -> Result<Study> {
    let (records, warnings) = read_log(path)?;
    let state = replay(records, warnings)?;
    let mut config = state.config;
    config.storage = path.to_path_buf();
    let mut trials = state.trials;
    let mut log = LogWriter::append_to(path)?;
    let mut warnings = state.warnings;

    if !matches!(config.evaluator, EvaluatorBinding::Builtin { .. }) {
        for trial in trials.values_mut() {
            if trial.status == TrialStatus::Running {
                warnings.push(format!("trial {} interrupted; marked failed", trial.id));
                trial.status = TrialStatus::Failed;
                trial.records.clear();
                let ts = now_ts();
                trial.ended_at = Some(ts);
                log.append(&LogRecord::TrialEnd {
                    v: LOG_VERSION,
                    trial: trial.id,
                    status: TrialStatus::Failed,
                    objectives: None,
                    mean_cost_usd: None,
                    mean_latency_s: None,
                    stats: Default::default(),
                    pruned_corner: None,
                    ts,
                })?;
            }
        }
    }

    drive(config, trials, state.front, log, warnings)
}

struct Task {
    id: u64,
    config: FlowConfig,
}

struct TaskResult {
    id: u64,
    outcome: Result<TrialEvaluation>,
}

/// The coordinator loop: dispatches seed-plan entries then sampler
/// proposals to P workers, folds results into the log, trials, history, and
/// front.
fn drive(
    config: StudyConfig,
    mut trials: BTreeMap<u64, Trial>,
    front: ParetoFront,
    mut log: LogWriter,
    mut warnings: Vec<String>,
) -> Result<Study> {
    let evaluator = build_evaluator(&config)?;
    let questions = config.question_set();
    let mut seed_rng = seed_plan_rng(config.seed);
    let seeds = config.seed_plan.materialize(&config.space, &mut seed_rng);
    let front = Arc::new(RwLock::new(front));

    // Interrupted trials (running, built-in evaluator) are re-executed with
    // their logged config and id; determinism reproduces the lost records.
    let mut requeue: Vec<(u64, FlowConfig, TrialOrigin)> = trials
        .values()
        .filter(|t| t.status == TrialStatus::Running)
        .map(|t| (t.id, t.config.clone(), t.origin))
        .collect();
    requeue.sort_by_key(|(id, _, _)| *id);
    for trial in trials.values_mut() {
        if trial.status == TrialStatus::Running {
            trial.records.clear();
        }
    }

    let mut history: Vec<HistoryItem> = {
        let snapshot = Study {
            config: config.clone(),
            trials: trials.values().cloned().collect(),
            front: ParetoFront::new(),
            warnings: Vec::new(),
        };
        snapshot.history_items()
    };

    let mut next_id: u64 = trials.keys().max().map(|m| m + 1).unwrap_or(0);
    let workers = config.parallelism;

    let (task_tx, task_rx) = mpsc::channel::<Task>();
    let task_rx = Arc::new(Mutex::new(task_rx));
    let (done_tx, done_rx) = mpsc::channel::<TaskResult>();

    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let task_rx = Arc::clone(&task_rx);
            let done_tx = done_tx.clone();
            let evaluator = Arc::clone(&evaluator);
            let front = Arc::clone(&front);
            let questions = &questions;
            let config = &config;
            scope.spawn(move || loop {
                let task = {
                    let rx = task_rx.lock().expect("task queue");
                    rx.recv()
                };
                let Ok(task) = task else { break };
                let snapshot = || front.read().expect("front lock").clone();
                let outcome = match &config.pruner {
                    Some(pruner) => evaluate_trial(
                        &task.config,
                        evaluator.as_ref(),
                        questions,
                        task.id,
                        config.seed,
                        config.objective,
                        Some(PruningHook {
                            config: pruner,
                            front: &snapshot,
                        }),
                    ),
                    None => evaluate_trial(
                        &task.config,
                        evaluator.as_ref(),
                        questions,
                        task.id,
                        config.seed,
                        config.objective,
                        None,
                    ),
                };
                if done_tx.send(TaskResult {
                    id: task.id,
                    outcome,
                })
                .is_err()
                {
                    break;
                }
            });
        }
        drop(done_tx);

        let mut in_flight = 0usize;
        loop {
            // Dispatch until the budget or the worker pool is full.
            while in_flight < workers {
                let (id, trial_config, origin) = if let Some(item) = requeue.first().cloned() {
                    requeue.remove(0);
                    (item.0, item.1, item.2)
                } else if next_id < config.max_trials {
                    let id = next_id;
                    next_id += 1;
                    let (cfg, origin) = if (id as usize) < seeds.len() {
                        let (cfg, kind) = seeds[id as usize].clone();
                        (cfg, TrialOrigin::from(kind))
                    } else {
                        let mut rng =
                            ChaCha12Rng::seed_from_u64(mix_seed(&[config.seed, id]));
                        (
                            propose(&history, &config.space, &config.tpe, &mut rng),
                            TrialOrigin::Sampler,
                        )
                    };
                    (id, cfg, origin)
                } else {
                    break;
                };
                let ts = now_ts();
                log.append(&LogRecord::TrialStart {
                    v: LOG_VERSION,
                    trial: id,
                    origin,
                    config: trial_config.clone(),
                    ts,
                })?;
                trials.insert(
                    id,
                    Trial {
                        id,
                        config: trial_config.clone(),
                        origin,
                        status: TrialStatus::Running,
                        records: Vec::new(),
                        objectives: None,
                        mean_cost_usd: None,
                        mean_latency_s: None,
                        pruned_corner: None,
                        started_at: ts,
                        ended_at: None,
                    },
                );
                task_tx
                    .send(Task {
                        id,
                        config: trial_config,
                    })
                    .map_err(|_| Error::Storage("worker pool shut down".into()))?;
                in_flight += 1;
            }
            if in_flight == 0 {
                break;
            }

            let result = done_rx
                .recv()
                .map_err(|_| Error::Storage("all workers exited".into()))?;
            in_flight -= 1;
            let trial = trials.get_mut(&result.id).expect("dispatched trial");
            let eval = match result.outcome {
                Ok(eval) => eval,
                Err(e) => {
                    // Evaluator failures degrade to failed trials.
                    warnings.push(format!("trial {} failed: {e}", result.id));
                    TrialEvaluation {
                        status: TrialStatus::Failed,
                        records: Vec::new(),
                        stats: Default::default(),
                        objectives: None,
                        mean_cost_usd: None,
                        mean_latency_s: None,
                        pruned_corner: None,
                    }
                }
            };
            let ts = now_ts();
            log.append(&LogRecord::EvalBatch {
                v: LOG_VERSION,
                trial: result.id,
                records: eval.records.clone(),
                ts,
            })?;
            log.append(&LogRecord::TrialEnd {
                v: LOG_VERSION,
                trial: result.id,
                status: eval.status,
                objectives: eval.objectives,
                mean_cost_usd: eval.mean_cost_usd,
                mean_latency_s: eval.mean_latency_s,
                stats: eval.stats.summary(),
                pruned_corner: eval.pruned_corner,
                ts,
            })?;
            trial.status = eval.status;
            trial.records = eval.records;
            trial.objectives = eval.objectives;
            trial.mean_cost_usd = eval.mean_cost_usd;
            trial.mean_latency_s = eval.mean_latency_s;
            trial.pruned_corner = eval.pruned_corner;
            trial.ended_at = Some(ts);

            if let Some(objectives) = eval.objectives {
                match eval.status {
                    TrialStatus::Completed => {
                        let mut updated = front.read().expect("front lock").clone();
                        if updated.insert(result.id, objectives) {
                            log.append(&LogRecord::FrontUpdate {
                                v: LOG_VERSION,
                                trial: result.id,
                                objectives,
                                ts: now_ts(),
                            })?;
                            *front.write().expect("front lock") = updated;
                        }
                        history.push(HistoryItem {
                            id: result.id,
                            config: trial.config.clone(),
                            objectives,
                            pruned: false,
                        });
                    }
                    TrialStatus::Pruned => {
                        // Censored objectives: bad-set history only.
                        history.push(HistoryItem {
                            id: result.id,
                            config: trial.config.clone(),
                            objectives,
                            pruned: true,
                        });
                    }
                    _ => {}
                }
                history.sort_by_key(|h| h.id);
            }
        }
        drop(task_tx);
        Ok(())
    })?;

    let front = Arc::try_unwrap(front)
        .expect("workers joined")
        .into_inner()
        .expect("front lock");
    Ok(Study {
        config,
        trials: trials.into_values().collect(),
        front,
        warnings,
    })
}

/// One repetition arm of a pruner ablation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationPoint {
    pub trial: u64,
    pub cumulative_evaluations: u64,
    pub cumulative_cost: f64,
    pub pareto_area: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationArm {
    pub seed: u64,
    pub pruner_enabled: bool,
    pub total_evaluations: u64,
    pub total_cost: f64,
    pub final_pareto_area: f64,
    pub curve: Vec<AblationPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AblationReport {
    pub pruner_on: Vec<AblationArm>,
    pub pruner_off: Vec<AblationArm>,
    /// Median over repetitions of 1 − evals(on)/evals(off).
    pub median_eval_savings: f64,
    /// Median over repetitions of area(on)/area(off).
    pub median_area_ratio: f64,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn arm_curve(study: &Study, bounds: (f64, f64)) -> Vec<AblationPoint> {
    let mut front = ParetoFront::new();
    let mut evals = 0u64;
    let mut cost = 0.0;
    let mut curve = Vec::with_capacity(study.trials.len());
    let mut trials: Vec<&Trial> = study.trials.iter().collect();
    trials.sort_by_key(|t| t.id);
    for t in trials {
        evals += t.records.len() as u64;
        cost += t.records.iter().map(|r| r.cost).sum::<f64>();
        if t.status == TrialStatus::Completed {
            if let Some(obj) = t.objectives {
                front.insert(t.id, obj);
            }
        }
        let area = pareto_area(&front, bounds).unwrap_or(0.0);
        curve.push(AblationPoint {
            trial: t.id,
            cumulative_evaluations: evals,
            cumulative_cost: cost,
            pareto_area: area,
        });
    }
    curve
}

/// Runs paired studies (pruner on/off) per repetition seed on a simulated
/// benchmark and reports cumulative cost and pareto_area trajectories.
pub fn ablate_pruner(template: &StudyConfig, rep_seeds: &[u64]) -> Result<AblationReport> {
    let EvaluatorBinding::Builtin { benchmark } = &template.evaluator else {
        return Err(Error::Config(
            "pruner ablation requires a simulated evaluator".into(),
        ));
    };
    let spec = builtin_benchmark(benchmark)?;
    let all = spec.enumerate();
    let (mut c_min, mut c_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, obj) in &all {
        c_min = c_min.min(obj.cost);
        c_max = c_max.max(obj.cost);
    }
    let bounds = (c_min, c_max);

    let pruner = template.pruner.unwrap_or_default();
    let mut report = AblationReport {
        pruner_on: Vec::new(),
        pruner_off: Vec::new(),
        median_eval_savings: 0.0,
        median_area_ratio: 0.0,
    };
    let mut savings = Vec::new();
    let mut ratios = Vec::new();
    for &seed in rep_seeds {
        let mut arms = Vec::with_capacity(2);
        for enabled in [true, false] {
            let mut cfg = template.clone();
            cfg.seed = seed;
            cfg.pruner = enabled.then_some(pruner);
            cfg.name = format!("{}-{}-{seed}", template.name, if enabled { "on" } else { "off" });
            let file = format!(
                "{}-{}-{seed}.log",
                template
                    .storage
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_else(|| "ablation".into()),
                if enabled { "on" } else { "off" }
            );
            cfg.storage = template
                .storage
                .parent()
                .map(|p| p.join(&file))
                .unwrap_or_else(|| PathBuf::from(&file));
            let study = run_study(cfg)?;
            let curve = arm_curve(&study, bounds);
            arms.push(AblationArm {
                seed,
                pruner_enabled: enabled,
                total_evaluations: study.total_evaluations(),
                total_cost: study.total_cost(),
                final_pareto_area: curve.last().map(|p| p.pareto_area).unwrap_or(0.0),
                curve,
            });
        }
        let off = arms.pop().expect("off arm");
        let on = arms.pop().expect("on arm");
        if off.total_evaluations > 0 {
            savings.push(1.0 - on.total_evaluations as f64 / off.total_evaluations as f64);
        }
        if off.final_pareto_area > 0.0 {
            ratios.push(on.final_pareto_area / off.final_pareto_area);
        }
        report.pruner_on.push(on);
        report.pruner_off.push(off);
    }
    report.median_eval_savings = median(&mut savings);
    report.median_area_ratio = median(&mut ratios);
    Ok(report)
}
