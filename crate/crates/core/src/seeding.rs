//! Seeding strategies: static standard flows, random draws, and transfer
//! seeds picked diversely from prior studies' Pareto sets.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pareto::{front_of, ObjectiveVector};
use crate::space::{FlowConfig, ParamKind, ParamSpec, ParamValue, SearchSpace};
use crate::{Error, Result};

/// The initial trial mix of a study.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub static_configs: Vec<FlowConfig>,
    pub random_count: usize,
    pub transfer: Vec<FlowConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    Static,
    Random,
    Transfer,
}

impl SeedPlan {
    /// The shipped default mix: the static standard flows plus 100 random
    /// draws.
    pub fn default_mix(space: &SearchSpace) -> SeedPlan {
        SeedPlan {
            static_configs: static_seeds(space).configs,
            random_count: 100,
            transfer: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.static_configs.len() + self.random_count + self.transfer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, space: &SearchSpace) -> Result<()> {
        for cfg in self.static_configs.iter().chain(&self.transfer) {
            space.validate_config(cfg)?;
        }
        Ok(())
    }

    /// Expands the plan into the ordered seed list: static, transfer, then
    /// freshly drawn randoms.
    pub fn materialize<R: Rng>(
        &self,
        space: &SearchSpace,
        rng: &mut R,
    ) -> Vec<(FlowConfig, SeedKind)> {
        let mut out: Vec<(FlowConfig, SeedKind)> = Vec::with_capacity(self.len());
        for c in &self.static_configs {
            out.push((c.clone(), SeedKind::Static));
        }
        for c in &self.transfer {
            out.push((c.clone(), SeedKind::Transfer));
        }
        for c in random_seeds(space, self.random_count, rng) {
            out.push((c, SeedKind::Random));
        }
        out
    }
}

/// Result of instantiating the standard-flow list against a space.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticSeedSet {
    pub configs: Vec<FlowConfig>,
    /// Index of the baseline flow (plain sparse RAG) when it instantiated.
    pub baseline: Option<usize>,
    /// Human-readable reasons for every skipped row.
    pub skipped: Vec<String>,
}

/// One standard-flow row: every setting must exist in the space with the
/// value in-domain, otherwise the row is skipped.
struct Recipe {
    label: String,
    settings: Vec<(String, ParamValue)>,
    baseline: bool,
}

fn cat(v: &str) -> ParamValue {
    ParamValue::Cat(v.to_string())
}

fn default_value(spec: &ParamSpec) -> ParamValue {
    match &spec.kind {
        ParamKind::Categorical { values } => ParamValue::Cat(values[0].clone()),
        ParamKind::Integer { lo, .. } => ParamValue::Int(*lo),
        ParamKind::Real { .. } => spec.grid_points().remove(0),
    }
}

fn standard_recipes(space: &SearchSpace) -> Vec<Recipe> {
    let llms: Vec<String> = match space.param("synth_llm").map(|p| &p.kind) {
        Some(ParamKind::Categorical { values }) => values.clone(),
        _ => vec![],
    };
    let embeddings: Vec<String> = match space.param("embedding_model").map(|p| &p.kind) {
        Some(ParamKind::Categorical { values }) => values.clone(),
        _ => vec![],
    };
    let agentic: Vec<String> = match space.param("flow").map(|p| &p.kind) {
        Some(ParamKind::Categorical { values }) => {
            values.iter().filter(|v| *v != "rag").cloned().collect()
        }
        _ => vec![],
    };

    let mut recipes = Vec::new();
    let rag = |extra: Vec<(String, ParamValue)>| {
        let mut s = vec![("flow".into(), cat("rag")), ("retriever".into(), cat("sparse"))];
        s.extend(extra);
        s
    };
    for (i, llm) in llms.iter().enumerate() {
        recipes.push(Recipe {
            label: format!("rag-sparse/{llm}"),
            settings: rag(vec![("synth_llm".into(), cat(llm))]),
            baseline: i == 0,
        });
        recipes.push(Recipe {
            label: format!("rag-reranked/{llm}"),
            settings: rag(vec![
                ("synth_llm".into(), cat(llm)),
                ("reranker_enabled".into(), cat("true")),
                ("reranker_llm".into(), cat(llm)),
            ]),
            baseline: false,
        });
        recipes.push(Recipe {
            label: format!("rag-hyde/{llm}"),
            settings: rag(vec![
                ("synth_llm".into(), cat(llm)),
                ("hyde_enabled".into(), cat("true")),
                ("hyde_llm".into(), cat(llm)),
            ]),
            baseline: false,
        });
        recipes.push(Recipe {
            label: format!("rag-few-shot/{llm}"),
            settings: vec![
                ("flow".into(), cat("rag")),
                ("retriever".into(), cat("dense")),
                ("synth_llm".into(), cat(llm)),
                ("few_shot_enabled".into(), cat("true")),
            ],
            baseline: false,
        });
    }
    for emb in &embeddings {
        recipes.push(Recipe {
            label: format!("rag-dense/{emb}"),
            settings: vec![
                ("flow".into(), cat("rag")),
                ("retriever".into(), cat("dense")),
                ("embedding_model".into(), cat(emb)),
            ],
            baseline: false,
        });
    }
    for flow in &agentic {
        for llm in &llms {
            recipes.push(Recipe {
                label: format!("{flow}/{llm}"),
                settings: vec![
                    ("flow".into(), cat(flow)),
                    ("retriever".into(), cat("sparse")),
                    ("synth_llm".into(), cat(llm)),
                ],
                baseline: false,
            });
        }
    }
    recipes.push(Recipe {
        label: "rag-fusion".into(),
        settings: vec![("flow".into(), cat("rag")), ("retriever".into(), cat("fusion"))],
        baseline: false,
    });
    recipes.push(Recipe {
        label: "rag-concise".into(),
        settings: rag(vec![("prompt".into(), cat("concise"))]),
        baseline: false,
    });
    recipes.push(Recipe {
        label: "rag-cot".into(),
        settings: rag(vec![("prompt".into(), cat("cot"))]),
        baseline: false,
    });
    recipes
}

/// Instantiates the shipped standard-flow list against a space. Rows whose
/// settings reference missing parameters or values are skipped with a
/// warning; every returned config validates.
pub fn static_seeds(space: &SearchSpace) -> StaticSeedSet {
    let order = match space.topo_order() {
        Ok(o) => o.into_iter().cloned().collect::<Vec<_>>(),
        Err(e) => {
            return StaticSeedSet {
                configs: vec![],
                baseline: None,
                skipped: vec![format!("space does not validate: {e}")],
            }
        }
    };

    let mut set = StaticSeedSet {
        configs: vec![],
        baseline: None,
        skipped: vec![],
    };
    'recipes: for recipe in standard_recipes(space) {
        // Every setting must name an existing param with an in-domain value.
        for (name, value) in &recipe.settings {
            match space.param(name) {
                Some(spec) if spec.contains(value) => {}
                Some(_) => {
                    set.skipped
                        .push(format!("{}: value out of domain for `{name}`", recipe.label));
                    continue 'recipes;
                }
                None => {
                    set.skipped
                        .push(format!("{}: missing param `{name}`", recipe.label));
                    continue 'recipes;
                }
            }
        }
        let mut cfg = FlowConfig::new();
        let mut consumed = 0;
        for spec in &order {
            let active = match space.active_params(&cfg) {
                Ok(a) => a.contains(&spec.name),
                Err(_) => false,
            };
            if !active {
                continue;
            }
            match recipe.settings.iter().find(|(n, _)| n == &spec.name) {
                Some((_, v)) => {
                    consumed += 1;
                    cfg.set(&spec.name, v.clone());
                }
                None => cfg.set(&spec.name, default_value(spec)),
            }
        }
        if consumed < recipe.settings.len() || space.validate_config(&cfg).is_err() {
            set.skipped
                .push(format!("{}: settings never became active", recipe.label));
            continue;
        }
        if recipe.baseline {
            set.baseline = Some(set.configs.len());
        }
        set.configs.push(cfg);
    }
    set
}

/// `n` independent uniform draws; duplicates permitted.
pub fn random_seeds<R: Rng>(space: &SearchSpace, n: usize, rng: &mut R) -> Vec<FlowConfig> {
    (0..n).map(|_| space.sample_random(rng)).collect()
}

/// Completed trials of one prior study, as (config, objectives) pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriorStudy {
    pub trials: Vec<(FlowConfig, ObjectiveVector)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferCandidate {
    pub config: FlowConfig,
    pub objectives: ObjectiveVector,
    /// 1 = actual frontier, 2 = next frontier after removing front 1, ...
    pub front_depth: usize,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferSelection {
    pub configs: Vec<FlowConfig>,
    /// Full pool with front depths and cluster assignments (CSV export).
    pub pool: Vec<TransferCandidate>,
    /// Prior-study configs dropped as incompatible with the target space.
    pub dropped: usize,
}

/// Selects up to `n_select` diverse configs from the union of the prior
/// studies' successive Pareto fronts (depth ≤ `k_fronts`), one per cluster of
/// their structural encodings.
pub fn transfer_seeds<R: Rng>(
    prior: &[PriorStudy],
    space: &SearchSpace,
    k_fronts: usize,
    n_select: usize,
    rng: &mut R,
) -> Result<TransferSelection> {
    let mut pool: Vec<TransferCandidate> = Vec::new();
    let mut dropped = 0;
    for study in prior {
        let mut remaining: Vec<(u64, FlowConfig, ObjectiveVector)> = study
            .trials
            .iter()
            .enumerate()
            .filter_map(|(i, (cfg, obj))| {
                if space.validate_config(cfg).is_ok() {
                    Some((i as u64, cfg.clone(), *obj))
                } else {
                    dropped += 1;
                    None
                }
            })
            .collect();
        for depth in 1..=k_fronts {
            if remaining.is_empty() {
                break;
            }
            let pts: Vec<(u64, ObjectiveVector)> =
                remaining.iter().map(|(id, _, o)| (*id, *o)).collect();
            let front = front_of(&pts);
            let (peeled, rest): (Vec<_>, Vec<_>) = remaining
                .into_iter()
                .partition(|(id, _, _)| front.contains_trial(*id));
            for (_, cfg, obj) in peeled {
                pool.push(TransferCandidate {
                    config: cfg,
                    objectives: obj,
                    front_depth: depth,
                    cluster: 0,
                });
            }
            remaining = rest;
        }
    }
    if pool.is_empty() {
        return Err(Error::EmptyInput("transfer_seeds pool".into()));
    }

    let vectors: Vec<Vec<f64>> = pool
        .iter()
        .map(|c| space.encode(&c.config))
        .collect::<Result<_>>()?;
    let k = n_select.min(pool.len());
    let assignment = kmeans(&vectors, k, rng);
    for (cand, cluster) in pool.iter_mut().zip(&assignment) {
        cand.cluster = *cluster;
    }

    // One config per cluster: lowest front depth, then highest accuracy,
    // then lowest pool index.
    let mut configs = Vec::with_capacity(k);
    for cluster in 0..k {
        let best = pool
            .iter()
            .enumerate()
            .filter(|(_, c)| c.cluster == cluster)
            .min_by(|(i, a), (j, b)| {
                a.front_depth
                    .cmp(&b.front_depth)
                    .then(
                        b.objectives
                            .accuracy
                            .partial_cmp(&a.objectives.accuracy)
                            .expect("finite accuracy"),
                    )
                    .then(i.cmp(j))
            });
        if let Some((_, c)) = best {
            configs.push(c.config.clone());
        }
    }
    Ok(TransferSelection {
        configs,
        pool,
        dropped,
    })
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd clustering with farthest-point initialization (first center drawn
/// from the rng) and a fixed iteration cap of 100.
fn kmeans<R: Rng>(vectors: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<usize> {
    let n = vectors.len();
    if k >= n {
        return (0..n).collect();
    }
    let mut centers: Vec<Vec<f64>> = vec![vectors[rng.random_range(0..n)].clone()];
    while centers.len() < k {
        let next = (0..n)
            .max_by(|&i, &j| {
                let di = centers.iter().map(|c| dist2(&vectors[i], c)).fold(f64::INFINITY, f64::min);
                let dj = centers.iter().map(|c| dist2(&vectors[j], c)).fold(f64::INFINITY, f64::min);
                di.partial_cmp(&dj).expect("finite distances").then(j.cmp(&i))
            })
            .expect("non-empty");
        centers.push(vectors[next].clone());
    }

    let assign = |centers: &[Vec<f64>]| -> Vec<usize> {
        vectors
            .iter()
            .map(|v| {
                (0..centers.len())
                    .min_by(|&a, &b| {
                        dist2(v, &centers[a])
                            .partial_cmp(&dist2(v, &centers[b]))
                            .expect("finite distances")
                    })
                    .expect("k >= 1")
            })
            .collect()
    };
    let mut assignment = assign(&centers);
    for _ in 0..100 {
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = vectors
                .iter()
                .zip(&assignment)
                .filter(|(_, a)| **a == c)
                .map(|(v, _)| v)
                .collect();
            if members.is_empty() {
                continue; // keep the old center
            }
            let dim = center.len();
            let mut mean = vec![0.0; dim];
            for m in &members {
                for (s, x) in mean.iter_mut().zip(m.iter()) {
                    *s += x;
                }
            }
            for s in &mut mean {
                *s /= members.len() as f64;
            }
            *center = mean;
        }
        let next = assign(&centers);
        if next == assignment {
            break;
        }
        assignment = next;
    }
    assignment
}
