//! Exact structure learning for causal Bayesian networks from interventional
//! data.
//!
//! A noisy *path query* asks whether intervening on one variable changes the
//! distribution of another. Answering all `n(n-1)` ordered queries and
//! transitively reducing the result recovers the transitive reduction of the
//! true DAG; *transitive queries*, which clamp the current parent estimate of
//! the child, then restore the remaining edges.
//!
//! - [`graph`]: DAGs, closure, reduction, topological order.
//! - [`discrete`]: discrete networks with CPTs and exact enumeration oracles.
//! - [`asgn`]: linear networks with additive sub-Gaussian noise.
//! - [`queries`]: the noisy path and transitive queries.
//! - [`learner`]: sample-size planning and the two learning drivers.
//! - [`model_io`]: BIF, JSON, DOT, edge-list and CSV formats.
//! - [`experiments`]: phase-transition, census and benchmark harnesses.

pub mod asgn;
pub mod discrete;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod learner;
pub mod model_io;
pub mod queries;
pub mod seed;

pub use asgn::{AsgnNetwork, ContinuousIntervention, NoiseKind, WeightConstants};
pub use discrete::{Cpt, DiscreteCbn, GammaReport, InterventionSpec, Pmf};
pub use error::{Error, ErrorClass, Result};
pub use graph::{exact_path_query, random_tr_dag, Dag, ReachabilityMatrix};
pub use learner::{evaluate, learn_tr, learn_transitive_edges, plan_samples, EdgeMetrics, PlanInputs, RecoveryReport, SampleSizePlan};
pub use model_io::{NamedNetwork, NetworkPayload};
pub use queries::{ContinuousSampler, DiscreteSampler, QueryOutcome, Threshold};
pub use learner::Regime;
