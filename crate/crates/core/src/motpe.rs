//! Multi-objective tree-structured Parzen estimator sampler.
//!
//! History is split into good and bad subsets (nondominated rank, then
//! greedy hypervolume contribution inside the boundary rank). Per-parameter
//! densities l(x) and g(x) are fit over the two subsets, candidates are
//! drawn ancestrally from l, and the candidate maximizing the l/g ratio is
//! proposed.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::pareto::{front_of, hypervolume, ObjectiveVector};
use crate::space::{FlowConfig, ParamKind, ParamSpec, ParamValue, SearchSpace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpeConfig {
    /// Fraction of completed trials forming the good subset.
    pub gamma: f64,
    /// Candidates drawn from l per proposal.
    pub n_candidates: usize,
    /// Smoothing mass added to every density.
    pub prior_weight: f64,
    /// Completed-trial count below which proposals fall back to random
    /// sampling.
    pub min_history: usize,
}

impl Default for TpeConfig {
    fn default() -> Self {
        TpeConfig {
            gamma: 0.25,
            n_candidates: 24,
            prior_weight: 1.0,
            min_history: 10,
        }
    }
}

/// One past trial as seen by the sampler. Pruned trials carry their censored
/// partial objectives and always land in the bad subset; trials that failed
/// before producing objectives are excluded by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryItem {
    pub id: u64,
    pub config: FlowConfig,
    pub objectives: ObjectiveVector,
    pub pruned: bool,
}

/// Splits history into (good, bad). |good| = ceil(gamma * n_completed),
/// selected by nondominated rank and, inside the boundary rank, by greedy
/// hypervolume contribution.
pub fn split_observations(
    items: &[HistoryItem],
    gamma: f64,
) -> Result<(Vec<&HistoryItem>, Vec<&HistoryItem>)> {
    if items.is_empty() {
        return Err(Error::EmptyInput("split_observations".into()));
    }
    let completed: Vec<&HistoryItem> = items.iter().filter(|t| !t.pruned).collect();
    let n = completed.len();
    let k = ((gamma * n as f64).ceil() as usize).min(n);

    let good_ids = select_good(&completed, k);
    let mut good = Vec::with_capacity(k);
    let mut bad = Vec::new();
    for item in items {
        if !item.pruned && good_ids.contains(&item.id) {
            good.push(item);
        } else {
            bad.push(item);
        }
    }
    Ok((good, bad))
}

fn select_good(completed: &[&HistoryItem], k: usize) -> Vec<u64> {
    let mut chosen: Vec<u64> = Vec::with_capacity(k);
    if k == 0 {
        return chosen;
    }
    // Peel successive nondominated ranks.
    let mut remaining: Vec<&HistoryItem> = completed.to_vec();
    while chosen.len() < k && !remaining.is_empty() {
        let pts: Vec<(u64, ObjectiveVector)> =
            remaining.iter().map(|t| (t.id, t.objectives)).collect();
        let front = front_of(&pts);
        let rank_ids: Vec<u64> = remaining
            .iter()
            .map(|t| t.id)
            .filter(|id| front.contains_trial(*id))
            .collect();
        let need = k - chosen.len();
        if rank_ids.len() <= need {
            chosen.extend(rank_ids.iter().copied());
        } else {
            let rank_items: Vec<&HistoryItem> = remaining
                .iter()
                .copied()
                .filter(|t| rank_ids.contains(&t.id))
                .collect();
            chosen.extend(greedy_hv_order(&rank_items, need, completed));
        }
        remaining.retain(|t| !rank_ids.contains(&t.id));
    }
    chosen
}

/// Contribution ordering works in log10-cost coordinates: trial costs span
/// decades, and linear-cost contributions starve the cheap end of the
/// front even though cheap accurate flows are exactly what the search is
/// after (the Pareto-area metric weights cost per decade for the same
/// reason).
fn contribution_point(objectives: &ObjectiveVector) -> ObjectiveVector {
    ObjectiveVector::new(objectives.accuracy, objectives.cost.max(1e-12).log10())
}

/// Reference point for contribution ordering: componentwise worst over all
/// completed trials with a 10%-of-span margin, in log10-cost coordinates.
fn contribution_reference(all: &[&HistoryItem]) -> ObjectiveVector {
    let mut min_logc = f64::INFINITY;
    let mut max_logc = f64::NEG_INFINITY;
    let mut min_acc = f64::INFINITY;
    let mut max_acc = f64::NEG_INFINITY;
    for t in all {
        let p = contribution_point(&t.objectives);
        min_logc = min_logc.min(p.cost);
        max_logc = max_logc.max(p.cost);
        min_acc = min_acc.min(p.accuracy);
        max_acc = max_acc.max(p.accuracy);
    }
    let acc_span = (max_acc - min_acc).max(1e-9);
    let cost_span = (max_logc - min_logc).max(1e-9);
    ObjectiveVector::new(
        (min_acc - 0.1 * acc_span).max(0.0),
        max_logc + 0.1 * cost_span,
    )
}

/// Greedy forward selection: repeatedly add the point that maximizes the
/// hypervolume of the selected set. Ties break toward the lower trial id.
fn greedy_hv_order(rank_items: &[&HistoryItem], need: usize, all: &[&HistoryItem]) -> Vec<u64> {
    let reference = contribution_reference(all);
    let mut selected: Vec<(u64, ObjectiveVector)> = Vec::new();
    let mut pool: Vec<&HistoryItem> = rank_items.to_vec();
    pool.sort_by_key(|t| t.id);
    while selected.len() < need && !pool.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (i, cand) in pool.iter().enumerate() {
            let mut trial_set = selected.clone();
            trial_set.push((cand.id, contribution_point(&cand.objectives)));
            let hv = hypervolume(&front_of(&trial_set), &reference).unwrap_or(0.0);
            if best.map(|(_, b)| hv > b).unwrap_or(true) {
                best = Some((i, hv));
            }
        }
        let (i, _) = best.expect("pool non-empty");
        let item = pool.remove(i);
        selected.push((item.id, contribution_point(&item.objectives)));
    }
    selected.into_iter().map(|(id, _)| id).collect()
}

/// Per-parameter density component of l(x) or g(x).
#[derive(Debug, Clone, PartialEq)]
pub enum DensityComponent {
    Categorical {
        values: Vec<String>,
        probs: Vec<f64>,
    },
    Numeric {
        /// Working-domain bounds (log domain when the param is log-scaled).
        lo: f64,
        hi: f64,
        log_scale: bool,
        int_step: Option<(i64, i64, i64)>, // (lo, hi, step) of an integer grid
        centers: Vec<f64>,
        bandwidth: f64,
        /// Mass of the uniform prior component.
        prior_mass: f64,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DensityModel {
    pub components: BTreeMap<String, DensityComponent>,
}

/// Fits one per-parameter density from the observations of a subset.
/// Observations must come only from trials where the parameter was active.
pub fn fit_density(
    param: &ParamSpec,
    observations: &[ParamValue],
    prior_weight: f64,
) -> DensityComponent {
    debug_assert!(observations.iter().all(|v| param.contains(v)));
    let n = observations.len() as f64;
    match &param.kind {
        ParamKind::Categorical { values } => {
            let k = values.len() as f64;
            let probs = values
                .iter()
                .map(|v| {
                    let count = observations
                        .iter()
                        .filter(|o| o.as_str() == Some(v.as_str()))
                        .count() as f64;
                    (count + prior_weight) / (n + prior_weight * k)
                })
                .collect();
            DensityComponent::Categorical {
                values: values.clone(),
                probs,
            }
        }
        ParamKind::Integer { lo, hi, step } => numeric_component(
            *lo as f64,
            *hi as f64,
            false,
            Some((*lo, *hi, *step)),
            observations,
            prior_weight,
        ),
        ParamKind::Real {
            lo, hi, log_scale, ..
        } => {
            let (wlo, whi) = if *log_scale {
                (lo.ln(), hi.ln())
            } else {
                (*lo, *hi)
            };
            numeric_component(wlo, whi, *log_scale, None, observations, prior_weight)
        }
    }
}

fn numeric_component(
    lo: f64,
    hi: f64,
    log_scale: bool,
    int_step: Option<(i64, i64, i64)>,
    observations: &[ParamValue],
    prior_weight: f64,
) -> DensityComponent {
    let centers: Vec<f64> = observations
        .iter()
        .filter_map(|v| v.as_f64())
        .map(|v| if log_scale { v.ln() } else { v })
        .collect();
    let n = centers.len() as f64;
    let width = hi - lo;
    // Deterministic scale-aware bandwidth rule.
    let raw = width / n.powf(1.0 / 1.2).max(1.0);
    let min_bw = width / (100.0f64).min(10.0 * n.max(1.0));
    let bandwidth = raw.clamp(min_bw, width);
    DensityComponent::Numeric {
        lo,
        hi,
        log_scale,
        int_step,
        centers,
        bandwidth,
        prior_mass: prior_weight / (n + prior_weight),
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

impl DensityComponent {
    /// Density (or probability for categoricals) at a value in the
    /// parameter's native domain.
    pub fn density(&self, value: &ParamValue) -> Result<f64> {
        match self {
            DensityComponent::Categorical { values, probs } => {
                let v = value.as_str().ok_or_else(|| Error::InvalidConfig(
                    "categorical density on non-categorical value".into(),
                ))?;
                values
                    .iter()
                    .position(|x| x == v)
                    .map(|i| probs[i])
                    .ok_or_else(|| Error::InvalidValue {
                        param: String::new(),
                        reason: format!("`{v}` outside domain"),
                    })
            }
            DensityComponent::Numeric {
                lo,
                hi,
                log_scale,
                centers,
                bandwidth,
                prior_mass,
                ..
            } => {
                let raw = value.as_f64().ok_or_else(|| Error::InvalidConfig(
                    "numeric density on categorical value".into(),
                ))?;
                let x = if *log_scale { raw.ln() } else { raw };
                if x < *lo - 1e-9 || x > *hi + 1e-9 {
                    return Err(Error::InvalidValue {
                        param: String::new(),
                        reason: format!("`{raw}` outside domain"),
                    });
                }
                let width = hi - lo;
                let mut pdf = prior_mass / width;
                if !centers.is_empty() {
                    let norm = std_normal();
                    let kernel_mass = (1.0 - prior_mass) / centers.len() as f64;
                    for c in centers {
                        let z = (x - c) / bandwidth;
                        let trunc = norm.cdf((hi - c) / bandwidth) - norm.cdf((lo - c) / bandwidth);
                        pdf += kernel_mass * norm.pdf(z) / (bandwidth * trunc);
                    }
                }
                Ok(pdf)
            }
        }
    }

    /// Draws a value in the parameter's native domain.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> ParamValue {
        match self {
            DensityComponent::Categorical { values, probs } => {
                let mut u = rng.random_range(0.0..1.0);
                for (v, p) in values.iter().zip(probs) {
                    if u < *p {
                        return ParamValue::Cat(v.clone());
                    }
                    u -= p;
                }
                ParamValue::Cat(values.last().expect("non-empty domain").clone())
            }
            DensityComponent::Numeric {
                lo,
                hi,
                log_scale,
                int_step,
                centers,
                bandwidth,
                prior_mass,
            } => {
                let x = if centers.is_empty() || rng.random_range(0.0..1.0) < *prior_mass {
                    rng.random_range(*lo..*hi)
                } else {
                    let c = centers[rng.random_range(0..centers.len())];
                    let norm = std_normal();
                    let (a, b) = (norm.cdf((lo - c) / bandwidth), norm.cdf((hi - c) / bandwidth));
                    let u = rng.random_range(a..b);
                    c + bandwidth * norm.inverse_cdf(u)
                };
                let x = x.clamp(*lo, *hi);
                match int_step {
                    Some((ilo, ihi, step)) => {
                        let steps = ((x - *ilo as f64) / *step as f64).round() as i64;
                        let top = ilo + (ihi - ilo) / step * step;
                        ParamValue::Int((ilo + steps * step).clamp(*ilo, top))
                    }
                    None => ParamValue::Real(if *log_scale { x.exp() } else { x }),
                }
            }
        }
    }
}

/// Fits l or g over a subset: every space parameter gets a component, from
/// the observations of trials where it was active (zero observations yield
/// the pure prior).
pub fn fit_model(space: &SearchSpace, subset: &[&HistoryItem], prior_weight: f64) -> DensityModel {
    let mut model = DensityModel::default();
    for param in &space.params {
        let obs: Vec<ParamValue> = subset
            .iter()
            .filter_map(|t| t.config.get(&param.name).cloned())
            .collect();
        model
            .components
            .insert(param.name.clone(), fit_density(param, &obs, prior_weight));
    }
    model
}

/// l/g ratio of a configuration: product over its active params; inactive
/// params contribute factor 1.
pub fn acquisition(config: &FlowConfig, l: &DensityModel, g: &DensityModel) -> Result<f64> {
    let mut score = 1.0;
    for (name, value) in &config.assignments {
        let lp = l
            .components
            .get(name)
            .ok_or_else(|| Error::UnknownParam(name.clone()))?
            .density(value)?;
        let gp = g
            .components
            .get(name)
            .ok_or_else(|| Error::UnknownParam(name.clone()))?
            .density(value)?;
        score *= lp / gp;
    }
    Ok(score)
}

/// Ancestral draw from a density model: parameters sampled in topological
/// order, respecting activation.
pub fn sample_from_model<R: Rng>(
    space: &SearchSpace,
    model: &DensityModel,
    rng: &mut R,
) -> FlowConfig {
    let order = space.topo_order().expect("space validates");
    let mut cfg = FlowConfig::new();
    for spec in order {
        let active = space
            .active_params(&cfg)
            .map(|a| a.contains(&spec.name))
            .unwrap_or(false);
        if !active {
            continue;
        }
        let value = model
            .components
            .get(&spec.name)
            .expect("component per param")
            .sample(rng);
        cfg.set(&spec.name, value);
    }
    cfg
}

/// One MO-TPE proposal. Falls back to uniform random sampling until
/// `min_history` completed trials exist.
pub fn propose<R: Rng>(
    history: &[HistoryItem],
    space: &SearchSpace,
    cfg: &TpeConfig,
    rng: &mut R,
) -> FlowConfig {
    let completed = history.iter().filter(|t| !t.pruned).count();
    if completed < cfg.min_history {
        return space.sample_random(rng);
    }
    let (good, bad) = split_observations(history, cfg.gamma).expect("non-empty history");
    let l = fit_model(space, &good, cfg.prior_weight);
    let g = fit_model(space, &bad, cfg.prior_weight);
    let mut best: Option<(FlowConfig, f64)> = None;
    for _ in 0..cfg.n_candidates.max(1) {
        let cand = sample_from_model(space, &l, rng);
        let score = acquisition(&cand, &l, &g).unwrap_or(0.0);
        if best.as_ref().map(|(_, s)| score > *s).unwrap_or(true) {
            best = Some((cand, score));
        }
    }
    best.expect("at least one candidate").0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{ActivationRule, ParamSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn item(id: u64, acc: f64, cost: f64, cfg: FlowConfig) -> HistoryItem {
        HistoryItem {
            id,
            config: cfg,
            objectives: ObjectiveVector::new(acc, cost),
            pruned: false,
        }
    }

    fn two_param_space() -> SearchSpace {
        SearchSpace::new(
            vec![
                ParamSpec::categorical("root", &["A", "B"]),
                ParamSpec::real("x", 0.0, 1.0),
            ],
            vec![],
            "root",
        )
    }

    fn cfg_of(root: &str, x: f64) -> FlowConfig {
        FlowConfig::new()
            .with("root", ParamValue::Cat(root.into()))
            .with("x", ParamValue::Real(x))
    }

    #[test]
    fn split_sizes_follow_gamma() {
        let items: Vec<HistoryItem> = (0..8)
            .map(|i| item(i, 0.1 * i as f64, 1.0 + i as f64, cfg_of("A", 0.5)))
            .collect();
        let (good, bad) = split_observations(&items, 0.25).unwrap();
        assert_eq!(good.len(), 2);
        assert_eq!(bad.len(), 6);
    }

    #[test]
    fn dominating_trial_lands_in_good() {
        let mut items: Vec<HistoryItem> = (0..7)
            .map(|i| item(i, 0.3, 5.0 + i as f64, cfg_of("A", 0.5)))
            .collect();
        items.push(item(7, 0.9, 0.5, cfg_of("B", 0.5)));
        let (good, _) = split_observations(&items, 0.25).unwrap();
        assert!(good.iter().any(|t| t.id == 7));
    }

    #[test]
    fn pruned_trials_always_go_bad() {
        let mut items: Vec<HistoryItem> = (0..4)
            .map(|i| item(i, 0.5, 1.0, cfg_of("A", 0.5)))
            .collect();
        items.push(HistoryItem {
            id: 99,
            config: cfg_of("B", 0.5),
            objectives: ObjectiveVector::new(0.99, 0.0001),
            pruned: true,
        });
        let (good, bad) = split_observations(&items, 0.25).unwrap();
        assert!(!good.iter().any(|t| t.id == 99));
        assert!(bad.iter().any(|t| t.id == 99));
        assert_eq!(good.len(), 1); // ceil(0.25 * 4 completed)
    }

    #[test]
    fn boundary_rank_greedy_matches_exhaustive_oracle() {
        // Four mutually nondominated points; the greedy pick must match the
        // exhaustive best 2-subset by joint hypervolume in the contribution
        // coordinates (accuracy, log10 cost).
        let pts = [(0u64, 0.2, 1.0), (1, 0.5, 2.0), (2, 0.6, 5.0), (3, 0.9, 9.0)];
        let items: Vec<HistoryItem> = pts
            .iter()
            .map(|(id, a, c)| item(*id, *a, *c, cfg_of("A", 0.5)))
            .collect();
        let (good, _) = split_observations(&items, 0.5).unwrap();
        let mut ids: Vec<u64> = good.iter().map(|t| t.id).collect();
        ids.sort_unstable();

        // Exhaustive oracle over all 2-subsets.
        let all: Vec<&HistoryItem> = items.iter().collect();
        let reference = contribution_reference(&all);
        let mut best_subset = vec![];
        let mut best_hv = -1.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let set = vec![
                    (items[i].id, contribution_point(&items[i].objectives)),
                    (items[j].id, contribution_point(&items[j].objectives)),
                ];
                let hv = hypervolume(&front_of(&set), &reference).unwrap();
                if hv > best_hv {
                    best_hv = hv;
                    best_subset = vec![items[i].id, items[j].id];
                }
            }
        }
        best_subset.sort_unstable();
        assert_eq!(ids, best_subset);
    }

    #[test]
    fn categorical_smoothing_closed_form() {
        let p = ParamSpec::categorical("p", &["a", "b", "c"]);
        let obs = vec![
            ParamValue::Cat("a".into()),
            ParamValue::Cat("a".into()),
            ParamValue::Cat("a".into()),
            ParamValue::Cat("b".into()),
        ];
        let d = fit_density(&p, &obs, 1.0);
        let DensityComponent::Categorical { probs, .. } = d else {
            panic!("categorical expected");
        };
        assert!((probs[0] - 4.0 / 7.0).abs() < 1e-12);
        assert!((probs[1] - 2.0 / 7.0).abs() < 1e-12);
        assert!((probs[2] - 1.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn no_observations_yield_uniform_prior() {
        let p = ParamSpec::categorical("p", &["a", "b", "c", "d"]);
        let d = fit_density(&p, &[], 1.0);
        let DensityComponent::Categorical { probs, .. } = d else {
            panic!();
        };
        assert!(probs.iter().all(|q| (*q - 0.25).abs() < 1e-12));

        let p = ParamSpec::real("x", 0.0, 2.0);
        let d = fit_density(&p, &[], 1.0);
        assert!((d.density(&ParamValue::Real(1.3)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn numeric_density_integrates_to_one() {
        let p = ParamSpec::real("x", -1.0, 3.0);
        let obs: Vec<ParamValue> = [0.1, 0.2, 0.5, 2.9, -0.99]
            .iter()
            .map(|v| ParamValue::Real(*v))
            .collect();
        let d = fit_density(&p, &obs, 1.0);
        // Midpoint quadrature.
        let n = 400_000;
        let mut total = 0.0;
        for i in 0..n {
            let x = -1.0 + (i as f64 + 0.5) / n as f64 * 4.0;
            total += d.density(&ParamValue::Real(x)).unwrap();
        }
        total *= 4.0 / n as f64;
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }

    #[test]
    fn log_domain_density_integrates_to_one() {
        let p = ParamSpec::log_real("x", 1.0, 100.0);
        let obs: Vec<ParamValue> = [2.0, 5.0, 70.0].iter().map(|v| ParamValue::Real(*v)).collect();
        let d = fit_density(&p, &obs, 1.0);
        // Integrate in the working (log) domain.
        let (lo, hi) = (1.0f64.ln(), 100.0f64.ln());
        let n = 400_000;
        let mut total = 0.0;
        for i in 0..n {
            let u = lo + (i as f64 + 0.5) / n as f64 * (hi - lo);
            total += d.density(&ParamValue::Real(u.exp())).unwrap();
        }
        total *= (hi - lo) / n as f64;
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }

    #[test]
    fn acquisition_of_identical_models_is_one() {
        let space = two_param_space();
        let items: Vec<HistoryItem> = (0..6)
            .map(|i| item(i, 0.5, 1.0, cfg_of(if i % 2 == 0 { "A" } else { "B" }, 0.3)))
            .collect();
        let refs: Vec<&HistoryItem> = items.iter().collect();
        let l = fit_model(&space, &refs, 1.0);
        let g = fit_model(&space, &refs, 1.0);
        let score = acquisition(&cfg_of("A", 0.77), &l, &g).unwrap();
        assert!((score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn value_seen_only_in_good_scores_above_one() {
        let space = two_param_space();
        let good_items: Vec<HistoryItem> =
            (0..5).map(|i| item(i, 0.9, 0.1, cfg_of("A", 0.5))).collect();
        let bad_items: Vec<HistoryItem> =
            (5..15).map(|i| item(i, 0.1, 5.0, cfg_of("B", 0.5))).collect();
        let good: Vec<&HistoryItem> = good_items.iter().collect();
        let bad: Vec<&HistoryItem> = bad_items.iter().collect();
        let l = fit_model(&space, &good, 1.0);
        let g = fit_model(&space, &bad, 1.0);
        let score = acquisition(&cfg_of("A", 0.5), &l, &g).unwrap();
        assert!(score > 1.0, "score {score}");
    }

    #[test]
    fn acquisition_hand_computed_product() {
        // Categorical-only space so the product is exact by hand.
        let space = SearchSpace::new(
            vec![
                ParamSpec::categorical("root", &["A", "B"]),
                ParamSpec::categorical("q", &["x", "y"]),
            ],
            vec![],
            "root",
        );
        let mk = |r: &str, q: &str| {
            FlowConfig::new()
                .with("root", ParamValue::Cat(r.into()))
                .with("q", ParamValue::Cat(q.into()))
        };
        let good_items = vec![item(0, 0.9, 0.1, mk("A", "x"))];
        let bad_items = vec![item(1, 0.1, 5.0, mk("B", "y"))];
        let good: Vec<&HistoryItem> = good_items.iter().collect();
        let bad: Vec<&HistoryItem> = bad_items.iter().collect();
        let l = fit_model(&space, &good, 1.0);
        let g = fit_model(&space, &bad, 1.0);
        // l(A) = (1+1)/(1+2) = 2/3, g(A) = (0+1)/(1+2) = 1/3; same for q=x.
        let score = acquisition(&mk("A", "x"), &l, &g).unwrap();
        assert!((score - 4.0).abs() < 1e-12);
    }

    #[test]
    fn empty_history_falls_back_to_random() {
        let space = two_param_space();
        let cfg = TpeConfig::default();
        let a = propose(&[], &space, &cfg, &mut ChaCha12Rng::seed_from_u64(5));
        let b = space.sample_random(&mut ChaCha12Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn single_candidate_is_the_single_draw() {
        let space = two_param_space();
        let items: Vec<HistoryItem> = (0..12)
            .map(|i| {
                item(
                    i,
                    if i < 6 { 0.9 } else { 0.2 },
                    1.0 + i as f64,
                    cfg_of(if i < 6 { "A" } else { "B" }, 0.5),
                )
            })
            .collect();
        let cfg = TpeConfig {
            n_candidates: 1,
            min_history: 10,
            ..Default::default()
        };
        let (good, _) = split_observations(&items, cfg.gamma).unwrap();
        let l = fit_model(&space, &good, cfg.prior_weight);
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let expected = sample_from_model(&space, &l, &mut rng);
        let got = propose(&items, &space, &cfg, &mut ChaCha12Rng::seed_from_u64(21));
        assert_eq!(got, expected);
    }

    #[test]
    fn proposals_prefer_the_good_branch() {
        // root = A all good, root = B all bad.
        let space = SearchSpace::new(
            vec![
                ParamSpec::categorical("root", &["A", "B"]),
                ParamSpec::real("x", 0.0, 1.0),
            ],
            vec![],
            "root",
        );
        let items: Vec<HistoryItem> = (0..20)
            .map(|i| {
                if i < 10 {
                    item(i, 0.9 - 0.001 * i as f64, 0.1 + 0.01 * i as f64, cfg_of("A", 0.5))
                } else {
                    item(i, 0.1, 5.0 + i as f64, cfg_of("B", 0.5))
                }
            })
            .collect();
        let cfg = TpeConfig::default();
        let mut rng = ChaCha12Rng::seed_from_u64(33);
        let mut a_count = 0;
        for _ in 0..1000 {
            if propose(&items, &space, &cfg, &mut rng).get_str("root") == Some("A") {
                a_count += 1;
            }
        }
        assert!(a_count > 800, "A proposed {a_count}/1000");
    }

    #[test]
    fn proposals_respect_activation() {
        let space = SearchSpace::new(
            vec![
                ParamSpec::categorical("root", &["A", "B"]),
                ParamSpec::real("x", 0.0, 1.0),
            ],
            vec![ActivationRule::new("x", "root", &["A"])],
            "root",
        );
        let items: Vec<HistoryItem> = (0..12)
            .map(|i| {
                let cfg = if i % 2 == 0 {
                    FlowConfig::new()
                        .with("root", ParamValue::Cat("A".into()))
                        .with("x", ParamValue::Real(0.5))
                } else {
                    FlowConfig::new().with("root", ParamValue::Cat("B".into()))
                };
                item(i, 0.5 + 0.01 * i as f64, 1.0 + i as f64, cfg)
            })
            .collect();
        let cfg = TpeConfig::default();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..200 {
            let p = propose(&items, &space, &cfg, &mut rng);
            space.validate_config(&p).unwrap();
        }
    }

    #[test]
    fn split_partitions_input() {
        let items: Vec<HistoryItem> = (0..17)
            .map(|i| item(i, (i as f64) / 20.0, 1.0 + (i % 5) as f64, cfg_of("A", 0.1)))
            .collect();
        for gamma in [0.1, 0.25, 0.5, 0.9] {
            let (good, bad) = split_observations(&items, gamma).unwrap();
            assert_eq!(good.len() + bad.len(), items.len());
            assert_eq!(good.len(), (gamma * 17.0).ceil() as usize);
        }
    }
}
