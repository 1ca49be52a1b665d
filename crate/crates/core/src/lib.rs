//! Multi-objective Bayesian optimization over hierarchical configuration
//! spaces of generative-AI flows.
//!
//! The engine searches a conditional parameter space for flow configurations
//! that trade off task accuracy against cost (or latency), using a
//! multi-objective tree-structured Parzen estimator sampler, a
//! confidence-box early-stopping pruner, and static/random/transfer seeding.
//! Built-in simulated benchmarks with enumerable ground-truth fronts make the
//! whole loop verifiable end to end.

pub mod error;
pub mod harness;
pub mod motpe;
pub mod pareto;
pub mod pruner;
pub mod seeding;
pub mod space;
pub mod study;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;
