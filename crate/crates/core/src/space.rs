//! Declarative model of hierarchical, conditional configuration spaces.
//!
//! A [`SearchSpace`] is a set of parameters plus activation rules that make
//! some parameters relevant only under specific parent choices. A complete
//! assignment of the active parameters is a [`FlowConfig`] ("flow").

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Grid resolution used when counting real parameters for cardinality and
/// when a simulated benchmark snaps a continuous draw to its grid.
pub const DEFAULT_REAL_GRID: u32 = 64;

fn default_real_grid() -> u32 {
    DEFAULT_REAL_GRID
}

/// The domain of a single parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamKind {
    Categorical {
        values: Vec<String>,
    },
    Integer {
        lo: i64,
        hi: i64,
        step: i64,
    },
    Real {
        lo: f64,
        hi: f64,
        #[serde(default)]
        log_scale: bool,
        /// Grid resolution used for cardinality accounting only; sampling
        /// stays continuous.
        #[serde(default = "default_real_grid")]
        grid: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ParamKind,
    #[serde(default)]
    pub description: String,
}

impl ParamSpec {
    pub fn categorical(name: &str, values: &[&str]) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind: ParamKind::Categorical {
                values: values.iter().map(|s| s.to_string()).collect(),
            },
            description: String::new(),
        }
    }

    pub fn integer(name: &str, lo: i64, hi: i64, step: i64) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind: ParamKind::Integer { lo, hi, step },
            description: String::new(),
        }
    }

    pub fn real(name: &str, lo: f64, hi: f64) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind: ParamKind::Real {
                lo,
                hi,
                log_scale: false,
                grid: DEFAULT_REAL_GRID,
            },
            description: String::new(),
        }
    }

    pub fn log_real(name: &str, lo: f64, hi: f64) -> Self {
        ParamSpec {
            name: name.to_string(),
            kind: ParamKind::Real {
                lo,
                hi,
                log_scale: true,
                grid: DEFAULT_REAL_GRID,
            },
            description: String::new(),
        }
    }

    pub fn with_grid(mut self, n: u32) -> Self {
        if let ParamKind::Real { ref mut grid, .. } = self.kind {
            *grid = n;
        }
        self
    }

    /// Number of distinct values on the parameter's counting grid.
    pub fn grid_size(&self) -> u64 {
        match &self.kind {
            ParamKind::Categorical { values } => values.len() as u64,
            ParamKind::Integer { lo, hi, step } => ((hi - lo) / step) as u64 + 1,
            ParamKind::Real { grid, .. } => *grid as u64,
        }
    }

    /// The grid points of a numeric parameter, in its native domain.
    pub fn grid_points(&self) -> Vec<ParamValue> {
        match &self.kind {
            ParamKind::Categorical { values } => {
                values.iter().map(|v| ParamValue::Cat(v.clone())).collect()
            }
            ParamKind::Integer { lo, hi, step } => {
                let mut out = Vec::new();
                let mut v = *lo;
                while v <= *hi {
                    out.push(ParamValue::Int(v));
                    v += step;
                }
                out
            }
            ParamKind::Real {
                lo,
                hi,
                log_scale,
                grid,
            } => {
                let n = (*grid).max(1);
                (0..n)
                    .map(|i| {
                        let t = if n == 1 {
                            0.0
                        } else {
                            i as f64 / (n - 1) as f64
                        };
                        let v = if *log_scale {
                            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                        } else {
                            lo + t * (hi - lo)
                        };
                        // Round-tripping through ln/exp can drift past the
                        // bounds by an ulp; keep points inside the domain.
                        ParamValue::Real(v.clamp(*lo, *hi))
                    })
                    .collect()
            }
        }
    }

    /// Checks that a value lies in this parameter's domain.
    pub fn contains(&self, value: &ParamValue) -> bool {
        match (&self.kind, value) {
            (ParamKind::Categorical { values }, ParamValue::Cat(v)) => values.contains(v),
            (ParamKind::Integer { lo, hi, step }, ParamValue::Int(v)) => {
                *v >= *lo && *v <= *hi && (*v - *lo) % *step == 0
            }
            (ParamKind::Real { lo, hi, .. }, ParamValue::Real(v)) => {
                v.is_finite() && *v >= *lo && *v <= *hi
            }
            _ => false,
        }
    }

    /// Maps a numeric value to [0, 1] (log domain when flagged).
    pub fn normalize(&self, value: &ParamValue) -> Option<f64> {
        match (&self.kind, value) {
            (ParamKind::Integer { lo, hi, .. }, ParamValue::Int(v)) => {
                Some((*v - *lo) as f64 / (*hi - *lo) as f64)
            }
            (
                ParamKind::Real {
                    lo, hi, log_scale, ..
                },
                ParamValue::Real(v),
            ) => {
                if *log_scale {
                    Some((v.ln() - lo.ln()) / (hi.ln() - lo.ln()))
                } else {
                    Some((v - lo) / (hi - lo))
                }
            }
            _ => None,
        }
    }

    /// Snaps a numeric value to the nearest point of the counting grid.
    pub fn snap_to_grid(&self, value: &ParamValue) -> ParamValue {
        match (&self.kind, value) {
            (ParamKind::Real { grid, .. }, ParamValue::Real(_)) => {
                let n = (*grid).max(1);
                let x = self.normalize(value).unwrap_or(0.0).clamp(0.0, 1.0);
                let i = if n == 1 {
                    0
                } else {
                    (x * (n - 1) as f64).round() as u32
                };
                self.grid_points()[i as usize].clone()
            }
            _ => value.clone(),
        }
    }
}

/// Makes `child` relevant when `parent` is assigned one of `trigger_values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationRule {
    pub child: String,
    pub parent: String,
    pub trigger_values: Vec<String>,
}

impl ActivationRule {
    pub fn new(child: &str, parent: &str, triggers: &[&str]) -> Self {
        ActivationRule {
            child: child.to_string(),
            parent: parent.to_string(),
            trigger_values: triggers.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// One concrete value of a parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Cat(String),
}

impl ParamValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Cat(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Real(v) => Some(*v),
            ParamValue::Cat(_) => None,
        }
    }
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Cat(v) => write!(f, "{v}"),
        }
    }
}

/// One complete flow configuration: a map from parameter name to value.
///
/// Keys are kept in canonical (sorted) order, so serializing identical
/// configs yields byte-identical records.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowConfig {
    pub assignments: BTreeMap<String, ParamValue>,
}

impl FlowConfig {
    pub fn new() -> Self {
        FlowConfig::default()
    }

    pub fn set(&mut self, name: &str, value: ParamValue) {
        self.assignments.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: ParamValue) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.assignments.get(name)
    }

    pub fn get_str(&self, name: &str) -> Option<&str> {
        self.get(name).and_then(|v| v.as_str())
    }

    /// Byte-stable flat key-value record.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("flow config serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A validation finding, tied to the offending parameter or rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: String,
    pub message: String,
}

///// Report produced by [`SearchSpace::validate`]; empty means well-formed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, subject: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            subject: subject.to_string(),
            message: message.into(),
        });
    }
}

/// Hierarchical, conditional configuration space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: Vec<ParamSpec>,
    #[serde(default)]
    pub rules: Vec<ActivationRule>,
    pub root: String,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamSpec>, rules: Vec<ActivationRule>, root: &str) -> Self {
        SearchSpace {
            params,
            rules,
            root: root.to_string(),
        }
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    fn rules_for_child(&self, child: &str) -> Vec<&ActivationRule> {
        self.rules.iter().filter(|r| r.child == child).collect()
    }

    /// A parameter is unconditional when no rule targets it.
    pub fn is_unconditional(&self, name: &str) -> bool {
        !self.rules.iter().any(|r| r.child == name)
    }

    /// Checks every structural invariant; empty report iff well-formed.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut seen = HashSet::new();
        for p in &self.params {
            if !seen.insert(p.name.clone()) {
                report.push(&p.name, "duplicate parameter name");
            }
            match &p.kind {
                ParamKind::Categorical { values } => {
                    if values.is_empty() {
                        report.push(&p.name, "categorical value list is empty");
                    }
                    let mut vs = HashSet::new();
                    for v in values {
                        if !vs.insert(v) {
                            report.push(&p.name, format!("duplicate categorical value `{v}`"));
                        }
                    }
                }
                ParamKind::Integer { lo, hi, step } => {
                    if lo >= hi {
                        report.push(&p.name, "integer bounds require lo < hi");
                    }
                    if *step <= 0 {
                        report.push(&p.name, "integer step must be positive");
                    }
                }
                ParamKind::Real {
                    lo,
                    hi,
                    log_scale,
                    grid,
                } => {
                    if !(lo < hi) {
                        report.push(&p.name, "real bounds require lo < hi");
                    }
                    if *log_scale && *lo <= 0.0 {
                        report.push(&p.name, "log-scale requires lo > 0");
                    }
                    if *grid == 0 {
                        report.push(&p.name, "real grid must be positive");
                    }
                }
            }
        }

        match self.param(&self.root) {
            None => report.push(&self.root, "root parameter not declared"),
            Some(p) => {
                if !matches!(p.kind, ParamKind::Categorical { .. }) {
                    report.push(&self.root, "root parameter must be categorical");
                }
            }
        }
        if !self.is_unconditional(&self.root) {
            report.push(&self.root, "root parameter must be unconditional");
        }

        let mut parents_of: HashMap<&str, BTreeSet<&str>> = HashMap::new();
        for r in &self.rules {
            let subject = format!("{}<-{}", r.child, r.parent);
            if r.child == r.parent {
                report.push(&subject, "rule child equals parent");
            }
            if self.param(&r.child).is_none() {
                report.push(&subject, "rule child not declared");
            }
            match self.param(&r.parent) {
                None => report.push(&subject, "rule parent not declared"),
                Some(p) => match &p.kind {
                    ParamKind::Categorical { values } => {
                        for t in &r.trigger_values {
                            if !values.contains(t) {
                                report.push(
                                    &subject,
                                    format!("trigger `{t}` not in parent domain"),
                                );
                            }
                        }
                    }
                    _ => report.push(&subject, "parent not categorical"),
                },
            }
            parents_of.entry(&r.child).or_default().insert(&r.parent);
        }
        for (child, parents) in &parents_of {
            if parents.len() > 1 {
                report.push(child, "parameter has rules from multiple parents");
            }
        }

        // Cycle check over the parent graph.
        if self.topo_order_inner().is_none() {
            report.push("rules", "cyclic activation");
        }

        report
    }

    /// Parameters in topological order: parents before children, ties broken
    /// by declaration order. `None` if the rule graph is cyclic.
    fn topo_order_inner(&self) -> Option<Vec<usize>> {
        let index: HashMap<&str, usize> = self
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect();
        let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.params.len()];
        for r in &self.rules {
            if let (Some(&c), Some(&p)) = (index.get(r.child.as_str()), index.get(r.parent.as_str()))
            {
                deps[c].insert(p);
            }
        }
        let mut placed = vec![false; self.params.len()];
        let mut order = Vec::with_capacity(self.params.len());
        while order.len() < self.params.len() {
            let mut progressed = false;
            for i in 0..self.params.len() {
                if !placed[i] && deps[i].iter().all(|&d| placed[d]) {
                    placed[i] = true;
                    order.push(i);
                    progressed = true;
                }
            }
            if !progressed {
                return None;
            }
        }
        Some(order)
    }

    pub fn topo_order(&self) -> Result<Vec<&ParamSpec>> {
        self.topo_order_inner()
            .map(|o| o.into_iter().map(|i| &self.params[i]).collect())
            .ok_or_else(|| Error::InvalidSpace("cyclic activation".into()))
    }

    /// Fixed point of activation propagation over the assigned values in
    /// `partial`. A param is active iff it is unconditional, or some rule's
    /// parent is active and assigned a trigger value.
    pub fn active_params(&self, partial: &FlowConfig) -> Result<BTreeSet<String>> {
        for name in partial.assignments.keys() {
            if self.param(name).is_none() {
                return Err(Error::UnknownParam(name.clone()));
            }
        }
        let mut active: BTreeSet<String> = self
            .params
            .iter()
            .filter(|p| self.is_unconditional(&p.name))
            .map(|p| p.name.clone())
            .collect();
        loop {
            let mut changed = false;
            for r in &self.rules {
                if active.contains(&r.child) || !active.contains(&r.parent) {
                    continue;
                }
                if let Some(v) = partial.get_str(&r.parent) {
                    if r.trigger_values.iter().any(|t| t == v) {
                        active.insert(r.child.clone());
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(active);
            }
        }
    }

    /// Checks that `config` assigns exactly the active params, each inside
    /// its domain.
    pub fn validate_config(&self, config: &FlowConfig) -> Result<()> {
        let active = self.active_params(config)?;
        let assigned: BTreeSet<String> = config.assignments.keys().cloned().collect();
        if assigned != active {
            let missing: Vec<_> = active.difference(&assigned).cloned().collect();
            let extra: Vec<_> = assigned.difference(&active).cloned().collect();
            return Err(Error::InvalidConfig(format!(
                "assignment set differs from active set (missing: {missing:?}, extra: {extra:?})"
            )));
        }
        for (name, value) in &config.assignments {
            let spec = self.param(name).expect("checked above");
            if !spec.contains(value) {
                return Err(Error::InvalidValue {
                    param: name.clone(),
                    reason: format!("`{value}` outside domain"),
                });
            }
        }
        Ok(())
    }

    /// Draws a complete, valid configuration. Parameters are sampled in
    /// topological order so activation decisions precede their children.
    pub fn sample_random<R: Rng>(&self, rng: &mut R) -> FlowConfig {
        let order = self.topo_order().expect("space validates");
        let mut cfg = FlowConfig::new();
        for spec in order {
            if !self.is_param_active(&spec.name, &cfg) {
                continue;
            }
            let value = sample_param(spec, rng);
            cfg.set(&spec.name, value);
        }
        cfg
    }

    fn is_param_active(&self, name: &str, partial: &FlowConfig) -> bool {
        if self.is_unconditional(name) {
            return true;
        }
        self.rules_for_child(name).iter().any(|r| {
            partial
                .get_str(&r.parent)
                .map(|v| r.trigger_values.iter().any(|t| t == v))
                .unwrap_or(false)
        })
    }

    /// log10 of the number of distinct complete configurations, with real
    /// parameters counted on their declared grids.
    ///
    /// Assumes each conditional parameter has a single parent (enforced by
    /// `validate`).
    pub fn cardinality_log10(&self) -> f64 {
        let mut children: HashMap<&str, Vec<&ActivationRule>> = HashMap::new();
        for r in &self.rules {
            children.entry(r.parent.as_str()).or_default().push(r);
        }
        let mut total = 1.0_f64;
        for p in &self.params {
            if self.is_unconditional(&p.name) {
                total *= self.subtree_count(p, &children);
            }
        }
        total.log10()
    }

    fn subtree_count(&self, p: &ParamSpec, children: &HashMap<&str, Vec<&ActivationRule>>) -> f64 {
        match &p.kind {
            ParamKind::Categorical { values } => {
                let rules = children.get(p.name.as_str());
                values
                    .iter()
                    .map(|v| {
                        let mut prod = 1.0_f64;
                        if let Some(rules) = rules {
                            for r in rules {
                                if r.trigger_values.contains(v) {
                                    if let Some(c) = self.param(&r.child) {
                                        prod *= self.subtree_count(c, children);
                                    }
                                }
                            }
                        }
                        prod
                    })
                    .sum()
            }
            _ => p.grid_size() as f64,
        }
    }

    /// Dimension of the feature vector produced by [`SearchSpace::encode`].
    pub fn encoding_len(&self) -> usize {
        self.params
            .iter()
            .map(|p| {
                let slots = match &p.kind {
                    ParamKind::Categorical { values } => values.len(),
                    _ => 1,
                };
                let activity = if self.is_unconditional(&p.name) { 0 } else { 1 };
                slots + activity
            })
            .sum()
    }

    /// Fixed-length structural featurization of a complete configuration.
    ///
    /// Layout per parameter (declaration order): an activity bit when the
    /// parameter is conditional, then one-hot slots (categorical) or one
    /// min-max-normalized slot (numeric). Inactive params are all zeros.
    pub fn encode(&self, config: &FlowConfig) -> Result<Vec<f64>> {
        self.validate_config(config)?;
        let mut out = Vec::with_capacity(self.encoding_len());
        for p in &self.params {
            let value = config.get(&p.name);
            if !self.is_unconditional(&p.name) {
                out.push(if value.is_some() { 1.0 } else { 0.0 });
            }
            match &p.kind {
                ParamKind::Categorical { values } => {
                    for v in values {
                        let hit = value.and_then(|x| x.as_str()) == Some(v.as_str());
                        out.push(if hit { 1.0 } else { 0.0 });
                    }
                }
                _ => {
                    out.push(match value {
                        Some(v) => p.normalize(v).unwrap_or(0.0),
                        None => 0.0,
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("space serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("space file: {e}")))
    }
}

fn sample_param<R: Rng>(spec: &ParamSpec, rng: &mut R) -> ParamValue {
    match &spec.kind {
        ParamKind::Categorical { values } => {
            let i = rng.random_range(0..values.len());
            ParamValue::Cat(values[i].clone())
        }
        ParamKind::Integer { lo, hi, step } => {
            let n = (hi - lo) / step + 1;
            let i = rng.random_range(0..n);
            ParamValue::Int(lo + i * step)
        }
        ParamKind::Real {
            lo, hi, log_scale, ..
        } => {
            let v = if *log_scale {
                let u = rng.random_range(lo.ln()..hi.ln());
                u.exp()
            } else {
                rng.random_range(*lo..*hi)
            };
            ParamValue::Real(v.clamp(*lo, *hi))
        }
    }
}

/// LLM choices of the shipped default space (the "small" tier).
pub const DEFAULT_LLMS: [&str; 4] = ["gpt-4o-mini", "o3-mini", "anthropic-haiku-35", "gemini-flash"];

/// Embedding model choices of the shipped default space.
pub const DEFAULT_EMBEDDINGS: [&str; 11] = [
    "bge-small-en-v1.5",
    "bge-large-en-v1.5",
    "gte-large",
    "mxbai-embed-large-v1",
    "UAE-Large-V1",
    "GIST-large-Embedding-v0",
    "b1ade-embed",
    "MUG-B-1.6",
    "all-MiniLM-L12-v2",
    "paraphrase-multilingual-mpnet-base-v2",
    "bge-base-en-v1.5",
];

/// Top-level flow choices of the shipped default space.
pub const DEFAULT_FLOWS: [&str; 5] = [
    "rag",
    "sub-question-rag-agent",
    "critique-rag-agent",
    "react-rag-agent",
    "lats-rag-agent",
];

/// Agentic flows (everything except plain `rag`).
pub const AGENTIC_FLOWS: [&str; 4] = [
    "sub-question-rag-agent",
    "critique-rag-agent",
    "react-rag-agent",
    "lats-rag-agent",
];

///// The shipped default space: one non-agentic RAG flow plus four agentic
/// flows that reuse the RAG modules and add three extra hyperparameters each.
pub fn default_space() -> SearchSpace {
    let mut params = vec![
        ParamSpec::categorical("flow", &DEFAULT_FLOWS),
        ParamSpec::categorical("synth_llm", &DEFAULT_LLMS),
        ParamSpec::categorical("retriever", &["dense", "sparse", "fusion"]),
        ParamSpec::integer("retriever_top_k", 2, 20, 1),
        ParamSpec::categorical("splitter", &["recursive", "token", "sentence"]),
        ParamSpec::log_real("chunk_size", 256.0, 4096.0),
        ParamSpec::real("chunk_overlap", 0.0, 0.7).with_grid(8),
        ParamSpec::categorical("prompt", &["default", "concise", "cot"]),
        ParamSpec::categorical("reranker_enabled", &["false", "true"]),
        ParamSpec::categorical("hyde_enabled", &["false", "true"]),
        ParamSpec::categorical("few_shot_enabled", &["false", "true"]),
        ParamSpec::log_real("additional_context_num_nodes", 2.0, 20.0).with_grid(19),
        ParamSpec::categorical("embedding_model", &DEFAULT_EMBEDDINGS),
        ParamSpec::integer("fusion_num_queries", 1, 20, 1),
        ParamSpec::categorical(
            "fusion_mode",
            &["simple", "reciprocal-rank", "relative-score", "dist-based"],
        ),
        ParamSpec::real("fusion_bm25_weight", 0.1, 0.9).with_grid(9),
        ParamSpec::categorical("reranker_llm", &DEFAULT_LLMS),
        ParamSpec::integer("reranker_top_k", 2, 20, 1),
        ParamSpec::categorical("hyde_llm", &DEFAULT_LLMS),
        ParamSpec::categorical("few_shot_embedding", &DEFAULT_EMBEDDINGS),
        ParamSpec::integer("few_shot_top_k", 2, 20, 1),
    ];
    let mut rules = vec![
        ActivationRule::new("embedding_model", "retriever", &["dense", "fusion"]),
        ActivationRule::new("fusion_num_queries", "retriever", &["fusion"]),
        ActivationRule::new("fusion_mode", "retriever", &["fusion"]),
        ActivationRule::new("fusion_bm25_weight", "retriever", &["fusion"]),
        ActivationRule::new("reranker_llm", "reranker_enabled", &["true"]),
        ActivationRule::new("reranker_top_k", "reranker_enabled", &["true"]),
        ActivationRule::new("hyde_llm", "hyde_enabled", &["true"]),
        ActivationRule::new("few_shot_embedding", "few_shot_enabled", &["true"]),
        ActivationRule::new("few_shot_top_k", "few_shot_enabled", &["true"]),
    ];

    // Agentic flows reuse the RAG modules and add extra knobs of their own.
    // The exact agent hyperparameters are placeholders with representative
    // grids.
    for flow in AGENTIC_FLOWS {
        let tag = flow.split('-').next().unwrap();
        let iters = format!("{tag}_max_iterations");
        let temp = format!("{tag}_temperature");
        let budget = format!("{tag}_token_budget");
        params.push(ParamSpec::integer(&iters, 2, 20, 1));
        params.push(ParamSpec::real(&temp, 0.0, 1.0));
        params.push(ParamSpec::log_real(&budget, 256.0, 16384.0));
        rules.push(ActivationRule::new(&iters, "flow", &[flow]));
        rules.push(ActivationRule::new(&temp, "flow", &[flow]));
        rules.push(ActivationRule::new(&budget, "flow", &[flow]));
    }

    SearchSpace::new(params, rules, "flow")
}
