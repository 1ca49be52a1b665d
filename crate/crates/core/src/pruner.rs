//! Confidence-box early stopping: a trial is halted when the optimistic
//! corner of its running-statistics bounding box is already dominated by the
//! current Pareto-front.

use serde::{Deserialize, Serialize};

use crate::harness::EvalRecord;
use crate::pareto::{ObjectiveVector, ParetoFront};
use crate::{Error, Result};

/// Running evaluation statistics of one trial.
///
/// `total` counts every evaluation attempt including errors; `successes`
/// only those that returned an answer with a cost.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialEvalStats {
    pub total: u64,
    pub successes: u64,
    pub passes: u64,
    pub costs: Vec<f64>,
}

impl PartialEvalStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one evaluation record in. Errors increment only the attempt
    /// count.
    pub fn update(&mut self, record: &EvalRecord) -> Result<()> {
        if record.error.is_none() && record.cost < 0.0 {
            return Err(Error::NegativeCost);
        }
        self.total += 1;
        if record.error.is_none() {
            self.successes += 1;
            self.costs.push(record.cost);
            if record.passed {
                self.passes += 1;
            }
        }
        Ok(())
    }

    /// Mean accuracy with errors counted as failures: passes / total.
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.passes as f64 / self.total as f64
        }
    }

    /// 80th percentile of observed costs (nearest-rank).
    pub fn p80_cost(&self) -> f64 {
        if self.costs.is_empty() {
            return 0.0;
        }
        let mut sorted = self.costs.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = ((0.8 * sorted.len() as f64).ceil() as usize).max(1);
        sorted[rank - 1]
    }

    pub fn mean_cost(&self) -> f64 {
        if self.costs.is_empty() {
            0.0
        } else {
            self.costs.iter().sum::<f64>() / self.costs.len() as f64
        }
    }

    /// Sample standard deviation of costs (0 below two observations).
    pub fn sigma_cost(&self) -> f64 {
        sample_std(&self.costs)
    }

    pub fn summary(&self) -> StatsSummary {
        StatsSummary {
            total: self.total,
            successes: self.successes,
            passes: self.passes,
            accuracy: self.accuracy(),
            p80_cost: self.p80_cost(),
            sigma_cost: self.sigma_cost(),
        }
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Compact form of the running statistics, used in the study log.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub total: u64,
    pub successes: u64,
    pub passes: u64,
    pub accuracy: f64,
    pub p80_cost: f64,
    pub sigma_cost: f64,
}

/// How the cost lower bound is derived from the observed costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CostModel {
    /// Closed-form normal bound: c_low = c_p80 - z * sigma_c / sqrt(L).
    #[default]
    Normal,
    /// Log-normal fit: c_low = exp(mean(ln c) - z * std(ln c) / sqrt(L)).
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrunerConfig {
    /// Standard score controlling the confidence level (1.645 is the 90%
    /// interval).
    pub z: f64,
    /// Evaluations required before pruning is permitted.
    pub min_evals: u64,
    /// Evaluations between pruning checks.
    pub check_interval: u64,
    pub cost_model: CostModel,
}

impl Default for PrunerConfig {
    fn default() -> Self {
        PrunerConfig {
            z: 1.645,
            min_evals: 10,
            check_interval: 5,
            cost_model: CostModel::Normal,
        }
    }
}

/// Optimistic corner (c_low, a_high) of the confidence bounding box.
pub fn confidence_corner(stats: &PartialEvalStats, cfg: &PrunerConfig) -> Result<(f64, f64)> {
    if stats.successes == 0 {
        return Err(Error::NoSuccesses);
    }
    let a = stats.accuracy();
    let n = stats.total as f64;
    let l = stats.successes as f64;
    let a_high = (a + cfg.z * (a * (1.0 - a) / n).sqrt()).min(1.0);
    let c_low = match cfg.cost_model {
        CostModel::Normal => (stats.p80_cost() - cfg.z * stats.sigma_cost() / l.sqrt()).max(0.0),
        CostModel::Lognormal => {
            let logs: Vec<f64> = stats.costs.iter().map(|c| c.max(1e-300).ln()).collect();
            let mean = logs.iter().sum::<f64>() / l;
            let std = sample_std(&logs);
            (mean - cfg.z * std / l.sqrt()).exp()
        }
    };
    Ok((c_low, a_high))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneDecision {
    Continue,
    Prune,
}

/// Pruning check at the configured cadence against a front snapshot.
///
/// Stale (smaller) snapshots are conservative: adding front entries can only
/// flip continue into prune.
pub fn should_prune(
    stats: &PartialEvalStats,
    front: &ParetoFront,
    cfg: &PrunerConfig,
) -> PruneDecision {
    if stats.total < cfg.min_evals || stats.total % cfg.check_interval != 0 {
        return PruneDecision::Continue;
    }
    let Ok((c_low, a_high)) = confidence_corner(stats, cfg) else {
        return PruneDecision::Continue;
    };
    let corner = ObjectiveVector::new(a_high, c_low);
    if front.dominates_point(&corner) {
        PruneDecision::Prune
    } else {
        PruneDecision::Continue
    }
}
