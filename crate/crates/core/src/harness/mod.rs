//! Trial evaluation: drive a pluggable evaluator (simulated or external)
//! over a question set, stream records through the pruner, and produce
//! final objectives.

pub mod external;
pub mod protocol;
pub mod sim;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::pareto::{ObjectiveVector, ParetoFront};
use crate::pruner::{confidence_corner, should_prune, PartialEvalStats, PruneDecision, PrunerConfig};
use crate::space::FlowConfig;
use crate::{Error, Result};

/// Failure class of a single evaluation call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorTag {
    ContentFilter,
    RateLimit,
    ToolFailure,
    Protocol,
}

impl ErrorTag {
    pub fn as_wire(&self) -> &'static str {
        match self {
            ErrorTag::ContentFilter => "content-filter",
            ErrorTag::RateLimit => "rate-limit",
            ErrorTag::ToolFailure => "tool-failure",
            ErrorTag::Protocol => "protocol",
        }
    }

    /// Unknown tags map to `Protocol`: the peer spoke, but not our dialect.
    pub fn from_wire(s: &str) -> ErrorTag {
        match s {
            "content-filter" => ErrorTag::ContentFilter,
            "rate-limit" => ErrorTag::RateLimit,
            "tool-failure" => ErrorTag::ToolFailure,
            _ => ErrorTag::Protocol,
        }
    }
}

/// Outcome of evaluating one question against one flow. Errored calls carry
/// zero cost and latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub question: String,
    pub passed: bool,
    pub cost: f64,
    pub latency: f64,
    pub error: Option<ErrorTag>,
}

impl EvalRecord {
    pub fn success(question: &str, passed: bool, cost: f64, latency: f64) -> EvalRecord {
        EvalRecord {
            question: question.to_string(),
            passed,
            cost,
            latency,
            error: None,
        }
    }

    pub fn errored(question: &str, tag: ErrorTag) -> EvalRecord {
        EvalRecord {
            question: question.to_string(),
            passed: false,
            cost: 0.0,
            latency: 0.0,
            error: Some(tag),
        }
    }
}

/// Capability descriptor advertised by an evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capabilities {
    pub batch_size: u32,
    pub timeout_s: f64,
}

impl Default for Capabilities {
    fn default() -> Self {
        Capabilities {
            batch_size: 1,
            timeout_s: 60.0,
        }
    }
}

/// A pluggable evaluation backend. Implementations never mutate study state
/// and must be safe for concurrent calls from distinct trials.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, config: &FlowConfig, trial: u64, question: &str) -> EvalRecord;

    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }
}

/// The objective paired with accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondObjective {
    #[default]
    Cost,
    Latency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Running,
    Completed,
    Pruned,
    Failed,
}

/// Everything evaluate_trial learns about one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialEvaluation {
    pub status: TrialStatus,
    pub records: Vec<EvalRecord>,
    /// Streaming stats over the second objective (what the pruner saw).
    pub stats: PartialEvalStats,
    /// Final (or, for pruned trials, partial) objectives; None when every
    /// call errored.
    pub objectives: Option<ObjectiveVector>,
    pub mean_cost_usd: Option<f64>,
    pub mean_latency_s: Option<f64>,
    /// The confidence corner that was dominated, for pruned trials.
    pub pruned_corner: Option<(f64, f64)>,
}

/// Pruning inputs: configuration plus an accessor producing a fresh front
/// snapshot at each check.
pub struct PruningHook<'a> {
    pub config: &'a PrunerConfig,
    pub front: &'a dyn Fn() -> ParetoFront,
}

/// Splitmix64-style mixing of seed components, used everywhere a
/// reproducible sub-seed is derived.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        let mut z = h ^ p.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

/// Stable hash of a question id for seed derivation.
pub fn hash_str(s: &str) -> u64 {
    // FNV-1a.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Evaluates one configuration over a question set in a per-trial shuffled
/// order, streaming records through the pruner when a hook is given.
pub fn evaluate_trial(
    config: &FlowConfig,
    evaluator: &dyn Evaluator,
    questions: &[String],
    trial: u64,
    study_seed: u64,
    objective: SecondObjective,
    pruning: Option<PruningHook<'_>>,
) -> Result<TrialEvaluation> {
    if questions.is_empty() {
        return Err(Error::EmptyInput("question set".into()));
    }
    let mut order: Vec<&String> = questions.iter().collect();
    let mut shuffle_rng = ChaCha12Rng::seed_from_u64(mix_seed(&[study_seed, trial]));
    order.shuffle(&mut shuffle_rng);

    let mut stats = PartialEvalStats::new();
    let mut records: Vec<EvalRecord> = Vec::new();
    let mut status = TrialStatus::Completed;
    let mut pruned_corner = None;

    for question in order {
        let record = evaluator.evaluate(config, trial, question);
        // The pruner tracks whichever objective is paired with accuracy.
        let tracked = match objective {
            SecondObjective::Cost => record.clone(),
            SecondObjective::Latency => EvalRecord {
                cost: record.latency,
                ..record.clone()
            },
        };
        stats.update(&tracked)?;
        records.push(record);

        if let Some(hook) = &pruning {
            let front = (hook.front)();
            if should_prune(&stats, &front, hook.config) == PruneDecision::Prune {
                status = TrialStatus::Pruned;
                pruned_corner = confidence_corner(&stats, hook.config).ok();
                break;
            }
        }
    }

    let succeeded: Vec<&EvalRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    if succeeded.is_empty() {
        return Ok(TrialEvaluation {
            status: TrialStatus::Failed,
            records,
            stats,
            objectives: None,
            mean_cost_usd: None,
            mean_latency_s: None,
            pruned_corner: None,
        });
    }

    let n = succeeded.len() as f64;
    let mean_cost = succeeded.iter().map(|r| r.cost).sum::<f64>() / n;
    let mean_latency = succeeded.iter().map(|r| r.latency).sum::<f64>() / n;
    let accuracy = stats.accuracy();
    let second = match objective {
        SecondObjective::Cost => mean_cost,
        SecondObjective::Latency => mean_latency,
    };
    Ok(TrialEvaluation {
        status,
        records,
        stats,
        objectives: Some(ObjectiveVector {
            accuracy,
            cost: second,
            latency: Some(mean_latency),
        }),
        mean_cost_usd: Some(mean_cost),
        mean_latency_s: Some(mean_latency),
        pruned_corner,
    })
}
