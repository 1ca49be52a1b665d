//! Simulated benchmarks: closed-form latent accuracy and cost surfaces over
//! a hierarchical space, small enough for exhaustive enumeration of the true
//! expected-objective Pareto-front.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::harness::{mix_seed, hash_str, Capabilities, ErrorTag, EvalRecord, Evaluator};
use crate::pareto::{front_of, ObjectiveVector, ParetoFront};
use crate::space::{FlowConfig, ParamSpec, SearchSpace};
use crate::{Error, Result};

/// Accuracy contribution of a numeric parameter at normalized position x:
/// linear·x + curvature·(x − optimum)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericEffect {
    pub linear: f64,
    pub curvature: f64,
    pub optimum: f64,
}

impl NumericEffect {
    pub fn at(&self, x: f64) -> f64 {
        self.linear * x + self.curvature * (x - self.optimum) * (x - self.optimum)
    }
}

/// Extra accuracy weight when two categorical assignments co-occur. Both
/// parameters must be active for the term to apply, so interactions are
/// gated by the space's activation rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub param_a: String,
    pub value_a: String,
    pub param_b: String,
    pub value_b: String,
    pub weight: f64,
}

/// A fully specified simulated benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimBenchmarkSpec {
    pub name: String,
    pub space: SearchSpace,
    /// Logistic-link intercept of the latent accuracy.
    pub accuracy_bias: f64,
    /// Per categorical value: additive accuracy weight.
    pub cat_accuracy: BTreeMap<String, BTreeMap<String, f64>>,
    /// Per numeric param: accuracy response curve.
    pub num_accuracy: BTreeMap<String, NumericEffect>,
    pub interactions: Vec<Interaction>,
    /// Expected cost of the cheapest possible call, in USD.
    pub base_cost: f64,
    /// Per categorical value: multiplicative cost factor.
    pub cat_cost: BTreeMap<String, BTreeMap<String, f64>>,
    /// Per numeric param: cost factor exp(coeff · x_normalized).
    pub num_cost: BTreeMap<String, f64>,
    /// Latency is proportional to cost.
    pub latency_per_usd: f64,
    /// Sigma of the multiplicative log-normal cost noise.
    pub noise_sigma: f64,
    /// Probability that a call errors outright.
    pub error_rate: f64,
    pub seed: u64,
}

impl SimBenchmarkSpec {
    /// Validates against the space and snaps reals onto their declared grid,
    /// so the latent surfaces take exactly the enumerable values.
    fn snapped(&self, config: &FlowConfig) -> Result<FlowConfig> {
        self.space.validate_config(config)?;
        let mut out = FlowConfig::new();
        for (name, value) in &config.assignments {
            let spec = self
                .space
                .param(name)
                .ok_or_else(|| Error::UnknownParam(name.clone()))?;
            out.set(name, spec.snap_to_grid(value));
        }
        Ok(out)
    }

    fn normalized(&self, spec: &ParamSpec, config: &FlowConfig) -> f64 {
        config
            .get(&spec.name)
            .and_then(|v| spec.normalize(v))
            .unwrap_or(0.0)
    }

    /// Latent pass probability; strictly inside (0, 1) via the logistic
    /// link. Only assigned (hence active) parameters contribute.
    pub fn latent_accuracy(&self, config: &FlowConfig) -> Result<f64> {
        let config = self.snapped(config)?;
        let mut score = self.accuracy_bias;
        for (name, value) in &config.assignments {
            if let Some(weights) = self.cat_accuracy.get(name) {
                if let Some(v) = value.as_str() {
                    score += weights.get(v).copied().unwrap_or(0.0);
                }
            }
            if let Some(effect) = self.num_accuracy.get(name) {
                let spec = self.space.param(name).expect("validated config");
                score += effect.at(self.normalized(spec, &config));
            }
        }
        for i in &self.interactions {
            let a = config.get_str(&i.param_a) == Some(&i.value_a);
            let b = config.get_str(&i.param_b) == Some(&i.value_b);
            if a && b {
                score += i.weight;
            }
        }
        Ok(1.0 / (1.0 + (-score).exp()))
    }

    /// Expected per-call cost in USD (noise-free), always positive.
    pub fn expected_cost(&self, config: &FlowConfig) -> Result<f64> {
        let config = self.snapped(config)?;
        let mut cost = self.base_cost;
        for (name, value) in &config.assignments {
            if let Some(factors) = self.cat_cost.get(name) {
                if let Some(v) = value.as_str() {
                    cost *= factors.get(v).copied().unwrap_or(1.0);
                }
            }
            if let Some(coeff) = self.num_cost.get(name) {
                let spec = self.space.param(name).expect("validated config");
                cost *= (coeff * self.normalized(spec, &config)).exp();
            }
        }
        Ok(cost)
    }

    /// Noise-free objectives: (latent accuracy, expected cost, expected
    /// latency in the latency slot).
    pub fn expected_objectives(&self, config: &FlowConfig) -> Result<ObjectiveVector> {
        let accuracy = self.latent_accuracy(config)?;
        let cost = self.expected_cost(config)?;
        Ok(ObjectiveVector {
            accuracy,
            cost,
            latency: Some(cost * self.latency_per_usd),
        })
    }

    /// Every grid configuration of the space with its expected objectives.
    pub fn enumerate(&self) -> Vec<(FlowConfig, ObjectiveVector)> {
        let order: Vec<ParamSpec> = self
            .space
            .topo_order()
            .expect("benchmark space validates")
            .into_iter()
            .cloned()
            .collect();
        let mut out = Vec::new();
        let mut partial = FlowConfig::new();
        self.enumerate_rec(&order, 0, &mut partial, &mut out);
        out
    }

    fn enumerate_rec(
        &self,
        order: &[ParamSpec],
        idx: usize,
        partial: &mut FlowConfig,
        out: &mut Vec<(FlowConfig, ObjectiveVector)>,
    ) {
        if idx == order.len() {
            let obj = self
                .expected_objectives(partial)
                .expect("enumerated config is valid");
            out.push((partial.clone(), obj));
            return;
        }
        let spec = &order[idx];
        let active = self
            .space
            .active_params(partial)
            .map(|a| a.contains(&spec.name))
            .unwrap_or(false);
        if !active {
            self.enumerate_rec(order, idx + 1, partial, out);
            return;
        }
        for point in spec.grid_points() {
            partial.set(&spec.name, point);
            self.enumerate_rec(order, idx + 1, partial, out);
        }
        partial.assignments.remove(&spec.name);
    }

    /// Exhaustively enumerated true expected-objective front. Trial ids are
    /// enumeration indices.
    pub fn true_front(&self) -> (ParetoFront, Vec<(FlowConfig, ObjectiveVector)>) {
        let all = self.enumerate();
        let pts: Vec<(u64, ObjectiveVector)> = all
            .iter()
            .enumerate()
            .map(|(i, (_, o))| (i as u64, *o))
            .collect();
        (front_of(&pts), all)
    }
}

/// The shipped desk-scale benchmark: 6 categorical and 4 numeric parameters
/// over 3 top-level flow choices, 18,432 enumerable configurations.
pub fn desk1() -> SimBenchmarkSpec {
    use crate::space::ActivationRule as Rule;
    let space = SearchSpace::new(
        vec![
            ParamSpec::categorical("flow", &["basic", "reranked", "agentic"]),
            ParamSpec::categorical("llm", &["llm-small", "llm-medium", "llm-large", "llm-xl"]),
            ParamSpec::categorical("retriever", &["sparse", "dense"]),
            ParamSpec::categorical("embedding", &["emb-a", "emb-b", "emb-c"]),
            ParamSpec::categorical("reranker_model", &["rr-light", "rr-heavy"]),
            ParamSpec::categorical("prompt", &["default", "concise"]),
            ParamSpec::log_real("chunk_size", 64.0, 4096.0).with_grid(8),
            ParamSpec::integer("top_k", 2, 8, 2),
            ParamSpec::real("temperature", 0.0, 1.0).with_grid(3),
            ParamSpec::integer("max_iterations", 2, 6, 2),
        ],
        vec![
            Rule::new("embedding", "retriever", &["dense"]),
            Rule::new("reranker_model", "flow", &["reranked"]),
            Rule::new("max_iterations", "flow", &["agentic"]),
        ],
        "flow",
    );
    let cat = |pairs: &[(&str, f64)]| -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    };
    SimBenchmarkSpec {
        name: "desk-1".into(),
        space,
        accuracy_bias: -2.0,
        cat_accuracy: BTreeMap::from([
            ("flow".into(), cat(&[("basic", 0.0), ("reranked", 0.35), ("agentic", 0.42)])),
            (
                "llm".into(),
                cat(&[("llm-small", -1.2), ("llm-medium", -0.2), ("llm-large", 0.6), ("llm-xl", 1.0)]),
            ),
            ("retriever".into(), cat(&[("sparse", -0.5), ("dense", 0.2)])),
            ("embedding".into(), cat(&[("emb-a", 0.0), ("emb-b", 0.3), ("emb-c", 0.45)])),
            ("reranker_model".into(), cat(&[("rr-light", 0.1), ("rr-heavy", 0.25)])),
            ("prompt".into(), cat(&[("default", 0.0), ("concise", 0.05)])),
        ]),
        num_accuracy: BTreeMap::from([
            ("chunk_size".into(), NumericEffect { linear: 0.4, curvature: -4.0, optimum: 0.55 }),
            ("top_k".into(), NumericEffect { linear: 0.2, curvature: -3.0, optimum: 0.6 }),
            ("temperature".into(), NumericEffect { linear: 0.0, curvature: -3.0, optimum: 0.3 }),
            ("max_iterations".into(), NumericEffect { linear: 0.5, curvature: 0.0, optimum: 0.0 }),
        ]),
        interactions: vec![
            Interaction {
                param_a: "retriever".into(),
                value_a: "dense".into(),
                param_b: "llm".into(),
                value_b: "llm-small".into(),
                weight: -0.2,
            },
            Interaction {
                param_a: "flow".into(),
                value_a: "agentic".into(),
                param_b: "llm".into(),
                value_b: "llm-xl".into(),
                weight: 0.2,
            },
            Interaction {
                param_a: "embedding".into(),
                value_a: "emb-c".into(),
                param_b: "flow".into(),
                value_b: "reranked".into(),
                weight: 0.2,
            },
            Interaction {
                param_a: "retriever".into(),
                value_a: "sparse".into(),
                param_b: "prompt".into(),
                value_b: "concise".into(),
                weight: 0.1,
            },
        ],
        base_cost: 0.0002,
        cat_cost: BTreeMap::from([
            ("flow".into(), cat(&[("basic", 1.0), ("reranked", 1.5), ("agentic", 3.0)])),
            (
                "llm".into(),
                cat(&[("llm-small", 1.0), ("llm-medium", 5.0), ("llm-large", 25.0), ("llm-xl", 120.0)]),
            ),
            ("retriever".into(), cat(&[("sparse", 0.7), ("dense", 1.0)])),
            ("embedding".into(), cat(&[("emb-a", 1.0), ("emb-b", 1.4), ("emb-c", 2.2)])),
            ("reranker_model".into(), cat(&[("rr-light", 1.2), ("rr-heavy", 2.0)])),
            ("prompt".into(), cat(&[("default", 1.0), ("concise", 0.9)])),
        ]),
        num_cost: BTreeMap::from([
            ("chunk_size".into(), 0.9),
            ("top_k".into(), 0.5),
            ("max_iterations".into(), 1.0),
        ]),
        latency_per_usd: 2000.0,
        noise_sigma: 0.2,
        error_rate: 0.0,
        seed: 42,
    }
}

/// A second benchmark whose best LLM depends on the selected strategy
/// branch, so conditional structure must be learned to optimize it.
pub fn desk2() -> SimBenchmarkSpec {
    use crate::space::ActivationRule as Rule;
    let space = SearchSpace::new(
        vec![
            ParamSpec::categorical("strategy", &["alpha", "beta", "gamma"]),
            ParamSpec::categorical("llm", &["llm-s", "llm-m", "llm-l"]),
            ParamSpec::categorical("prompt", &["default", "tuned"]),
            ParamSpec::integer("top_k", 1, 10, 1),
            ParamSpec::real("temperature", 0.0, 1.0).with_grid(6),
            ParamSpec::integer("alpha_depth", 1, 8, 1),
            ParamSpec::integer("beta_width", 1, 8, 1),
            ParamSpec::real("gamma_rate", 0.0, 1.0).with_grid(8),
        ],
        vec![
            Rule::new("alpha_depth", "strategy", &["alpha"]),
            Rule::new("beta_width", "strategy", &["beta"]),
            Rule::new("gamma_rate", "strategy", &["gamma"]),
        ],
        "strategy",
    );
    let cat = |pairs: &[(&str, f64)]| -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    };
    SimBenchmarkSpec {
        name: "desk-2".into(),
        space,
        accuracy_bias: -0.9,
        cat_accuracy: BTreeMap::from([
            ("strategy".into(), cat(&[("alpha", 0.0), ("beta", 0.1), ("gamma", 0.2)])),
            ("llm".into(), cat(&[("llm-s", -1.0), ("llm-m", 0.0), ("llm-l", 0.8)])),
            ("prompt".into(), cat(&[("default", 0.0), ("tuned", 0.1)])),
        ]),
        num_accuracy: BTreeMap::from([
            ("alpha_depth".into(), NumericEffect { linear: 0.5, curvature: -2.0, optimum: 0.7 }),
            ("beta_width".into(), NumericEffect { linear: 0.0, curvature: -4.0, optimum: 0.5 }),
            ("gamma_rate".into(), NumericEffect { linear: 0.6, curvature: -3.0, optimum: 0.65 }),
            ("top_k".into(), NumericEffect { linear: 0.25, curvature: -3.0, optimum: 0.6 }),
            ("temperature".into(), NumericEffect { linear: 0.0, curvature: -3.0, optimum: 0.35 }),
        ]),
        interactions: vec![
            Interaction {
                param_a: "strategy".into(),
                value_a: "alpha".into(),
                param_b: "llm".into(),
                value_b: "llm-s".into(),
                weight: 0.5,
            },
            Interaction {
                param_a: "strategy".into(),
                value_a: "beta".into(),
                param_b: "llm".into(),
                value_b: "llm-m".into(),
                weight: 0.5,
            },
            Interaction {
                param_a: "strategy".into(),
                value_a: "gamma".into(),
                param_b: "llm".into(),
                value_b: "llm-l".into(),
                weight: 0.5,
            },
        ],
        base_cost: 0.001,
        cat_cost: BTreeMap::from([
            ("strategy".into(), cat(&[("alpha", 1.0), ("beta", 1.5), ("gamma", 2.5)])),
            ("llm".into(), cat(&[("llm-s", 1.0), ("llm-m", 6.0), ("llm-l", 36.0)])),
            ("prompt".into(), cat(&[("default", 1.0), ("tuned", 1.1)])),
        ]),
        num_cost: BTreeMap::from([
            ("top_k".into(), 0.6),
            ("alpha_depth".into(), 0.8),
            ("beta_width".into(), 0.8),
            ("gamma_rate".into(), 0.8),
        ]),
        latency_per_usd: 2000.0,
        noise_sigma: 0.15,
        error_rate: 0.0,
        seed: 7,
    }
}

/// Evaluator over a simulated benchmark. Every call is reproducible from
/// (spec seed, trial id, question id).
pub struct SimEvaluator {
    pub spec: SimBenchmarkSpec,
}

impl SimEvaluator {
    pub fn new(spec: SimBenchmarkSpec) -> Self {
        SimEvaluator { spec }
    }
}

impl Evaluator for SimEvaluator {
    fn evaluate(&self, config: &FlowConfig, trial: u64, question: &str) -> EvalRecord {
        let (p, expected) = match (
            self.spec.latent_accuracy(config),
            self.spec.expected_cost(config),
        ) {
            (Ok(p), Ok(c)) => (p, c),
            _ => return EvalRecord::errored(question, ErrorTag::ToolFailure),
        };
        let mut rng =
            ChaCha12Rng::seed_from_u64(mix_seed(&[self.spec.seed, trial, hash_str(question)]));
        if self.spec.error_rate > 0.0 && rng.random_range(0.0..1.0) < self.spec.error_rate {
            let tag = if rng.random_range(0.0..1.0) < 0.5 {
                ErrorTag::RateLimit
            } else {
                ErrorTag::ContentFilter
            };
            return EvalRecord::errored(question, tag);
        }
        let passed = rng.random_range(0.0..1.0) < p;
        let noise = if self.spec.noise_sigma > 0.0 {
            let z = Normal::new(0.0, 1.0)
                .expect("standard normal")
                .inverse_cdf(rng.random_range(f64::EPSILON..1.0));
            (self.spec.noise_sigma * z).exp()
        } else {
            1.0
        };
        let cost = expected * noise;
        EvalRecord::success(question, passed, cost, cost * self.spec.latency_per_usd)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            batch_size: 1,
            timeout_s: 1.0,
        }
    }
}
