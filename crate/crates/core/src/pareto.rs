//! Dominance, Pareto-front maintenance, and front metrics (hypervolume,
//! Pareto-area, baseline gains, front shift).
//!
//! Objectives are fixed to two: accuracy (maximize) and cost (minimize).
//! When a study optimizes latency instead, latency occupies the cost slot.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One point in objective space.
///
/// `cost` is whatever the study minimizes (USD per call by default, seconds
/// when configured for latency). `latency` tags along for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub accuracy: f64,
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<f64>,
}

impl ObjectiveVector {
    pub fn new(accuracy: f64, cost: f64) -> Self {
        ObjectiveVector {
            accuracy,
            cost,
            latency: None,
        }
    }

    pub fn with_latency(mut self, latency: f64) -> Self {
        self.latency = Some(latency);
        self
    }
}

/// True iff `a` is at least as good in both objectives and strictly better
/// in one.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    a.accuracy >= b.accuracy
        && a.cost <= b.cost
        && (a.accuracy > b.accuracy || a.cost < b.cost)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontEntry {
    pub trial: u64,
    pub objectives: ObjectiveVector,
}

/// A nondominated set, kept sorted by ascending cost (and therefore
/// ascending accuracy).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    entries: Vec<FrontEntry>,
}

impl ParetoFront {
    pub fn new() -> Self {
        ParetoFront::default()
    }

    pub fn entries(&self) -> &[FrontEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains_trial(&self, trial: u64) -> bool {
        self.entries.iter().any(|e| e.trial == trial)
    }

    /// Inserts a point, evicting entries it dominates. Returns true when the
    /// point joined the front. Equal-objective duplicates keep the earliest
    /// trial id.
    pub fn insert(&mut self, trial: u64, objectives: ObjectiveVector) -> bool {
        let dominated_or_equal = self.entries.iter().any(|e| {
            dominates(&e.objectives, &objectives) || e.objectives == objectives
        });
        if dominated_or_equal {
            return false;
        }
        self.entries
            .retain(|e| !dominates(&objectives, &e.objectives));
        self.entries.push(FrontEntry { trial, objectives });
        self.entries
            .sort_by(|a, b| a.objectives.cost.total_cmp(&b.objectives.cost));
        true
    }

    /// True iff some front entry strictly dominates `point` (the point lies
    /// below/right of the staircase).
    pub fn dominates_point(&self, point: &ObjectiveVector) -> bool {
        self.entries.iter().any(|e| dominates(&e.objectives, point))
    }
}

/// The nondominated subset of `points`, stable with respect to input order.
/// Duplicate vectors keep the first (lowest-id) representative.
pub fn front_of(points: &[(u64, ObjectiveVector)]) -> ParetoFront {
    let mut front = ParetoFront::new();
    for (trial, obj) in points {
        front.insert(*trial, *obj);
    }
    front
}

/// Dominated 2-D area between `front` and `reference`, by a sorted sweep
/// over cost. Entries with cost at or beyond the reference contribute
/// nothing.
pub fn hypervolume(front: &ParetoFront, reference: &ObjectiveVector) -> Result<f64> {
    if reference.accuracy < 0.0 || !reference.cost.is_finite() {
        return Err(Error::InvalidReference(format!(
            "reference (accuracy {}, cost {})",
            reference.accuracy, reference.cost
        )));
    }
    let mut hv = 0.0;
    let mut bound = reference.cost;
    for e in front.entries.iter().rev() {
        let o = &e.objectives;
        if o.cost >= bound {
            continue;
        }
        if o.accuracy <= reference.accuracy {
            break; // accuracy only decreases leftwards
        }
        hv += (bound - o.cost) * (o.accuracy - reference.accuracy);
        bound = o.cost;
    }
    Ok(hv)
}

/// Normalized hypervolume in (log10 cost, accuracy) coordinates over the
/// window `[c_min, c_max]`. A front achieving accuracy 1 at or below `c_min`
/// scores exactly 1.
pub fn pareto_area(front: &ParetoFront, cost_bounds: (f64, f64)) -> Result<f64> {
    let (c_min, c_max) = cost_bounds;
    if !(c_min > 0.0 && c_min < c_max) {
        return Err(Error::InvalidBounds(format!(
            "cost bounds ({c_min}, {c_max})"
        )));
    }
    let lo = c_min.log10();
    let hi = c_max.log10();
    let clipped: Vec<(u64, ObjectiveVector)> = front
        .entries
        .iter()
        .filter(|e| e.objectives.cost < c_max)
        .map(|e| {
            (
                e.trial,
                ObjectiveVector::new(e.objectives.accuracy, e.objectives.cost.max(c_min).log10()),
            )
        })
        .collect();
    // Clipping to c_min can create dominated duplicates; reduce again.
    let clipped_front = front_of(&clipped);
    let hv = hypervolume(&clipped_front, &ObjectiveVector::new(0.0, hi))?;
    Ok(hv / (hi - lo))
}

/// Gains of a front over a single baseline point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineGains {
    /// Best front accuracy at less-or-equal cost, minus baseline accuracy.
    pub accuracy_delta: f64,
    /// True when no front entry was at or below the baseline cost, so the
    /// delta was taken against the cheapest entry instead.
    pub accuracy_delta_extrapolated: bool,
    /// 1 - (cheapest front cost at greater-or-equal accuracy) / baseline
    /// cost. `None` when no entry reaches the baseline accuracy.
    pub cost_reduction: Option<f64>,
}

/// Iso-cost accuracy gain and iso-accuracy cost reduction relative to a
/// baseline point, using staircase (achieved-points) interpolation.
pub fn baseline_gains(front: &ParetoFront, baseline: &ObjectiveVector) -> Result<BaselineGains> {
    if front.is_empty() {
        return Err(Error::EmptyInput("baseline_gains on empty front".into()));
    }
    let at_or_below: Option<f64> = front
        .entries
        .iter()
        .filter(|e| e.objectives.cost <= baseline.cost)
        .map(|e| e.objectives.accuracy)
        .fold(None, |m, a| Some(m.map_or(a, |m: f64| m.max(a))));
    let (best_acc, extrapolated) = match at_or_below {
        Some(a) => (a, false),
        // The whole front is more expensive than the baseline: report
        // against the nearest (cheapest) endpoint and flag it.
        None => (front.entries[0].objectives.accuracy, true),
    };
    let cheapest_at_acc: Option<f64> = front
        .entries
        .iter()
        .filter(|e| e.objectives.accuracy >= baseline.accuracy)
        .map(|e| e.objectives.cost)
        .fold(None, |m, c| Some(m.map_or(c, |m: f64| m.min(c))));
    Ok(BaselineGains {
        accuracy_delta: best_acc - baseline.accuracy,
        accuracy_delta_extrapolated: extrapolated,
        cost_reduction: cheapest_at_acc.map(|c| 1.0 - c / baseline.cost),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftRow {
    pub trial: u64,
    /// (after - before) accuracy, in percentage points.
    pub accuracy_delta_pp: f64,
    /// after cost / before cost.
    pub cost_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontShift {
    pub rows: Vec<ShiftRow>,
    pub mean_accuracy_delta_pp: f64,
    pub mean_cost_multiplier: f64,
}

/// Per-entry accuracy/cost movement between a front and re-evaluated
/// versions of the same trials, matched by trial id.
pub fn front_shift(
    before: &ParetoFront,
    after: &[(u64, ObjectiveVector)],
) -> Result<FrontShift> {
    let mut rows = Vec::with_capacity(after.len());
    for (trial, obj) in after {
        let prev = before
            .entries
            .iter()
            .find(|e| e.trial == *trial)
            .ok_or(Error::UnmatchedTrial(*trial))?;
        rows.push(ShiftRow {
            trial: *trial,
            accuracy_delta_pp: (obj.accuracy - prev.objectives.accuracy) * 100.0,
            cost_multiplier: obj.cost / prev.objectives.cost,
        });
    }
    let n = rows.len().max(1) as f64;
    Ok(FrontShift {
        mean_accuracy_delta_pp: rows.iter().map(|r| r.accuracy_delta_pp).sum::<f64>() / n,
        mean_cost_multiplier: rows.iter().map(|r| r.cost_multiplier).sum::<f64>() / n,
        rows,
    })
}

/// Quadratic pairwise-dominance oracle for cross-checking `front_of`.
pub fn front_oracle(points: &[(u64, ObjectiveVector)]) -> Vec<(u64, ObjectiveVector)> {
    let mut out: Vec<(u64, ObjectiveVector)> = Vec::new();
    'outer: for (i, (id, p)) in points.iter().enumerate() {
        for (j, (jid, q)) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            if dominates(q, p) {
                continue 'outer;
            }
            if q == p && (jid < id || (jid == id && j < i)) {
                continue 'outer; // duplicate keeps first representative
            }
        }
        out.push((*id, *p));
    }
    out.sort_by(|a, b| a.1.cost.total_cmp(&b.1.cost));
    out
}
