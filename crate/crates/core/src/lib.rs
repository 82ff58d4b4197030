//! Evaluation and optimization of predictive-maintenance decision policies
//! driven by probabilistic remaining-useful-life (RUL) predictions.
//!
//! The central quantity is the long-run expected maintenance cost per unit
//! time of a policy, estimated over a fleet of run-to-failure experiments by
//! the renewal-reward ratio of sample means. Comparing it against the cost
//! rate of a hypothetical perfect-prognostics policy yields a dimensionless
//! metric `M >= 0`: the fraction of achievable cost savings a prognostic
//! algorithm leaves on the table through the decisions it triggers. `M`
//! doubles as an objective for tuning policy thresholds and for selecting
//! between prognostic-model configurations.
//!
//! Modules:
//!
//! - [`dist`]: RUL prediction representations and their probability calculus.
//! - [`types`]: decision grid, cost model, traces, truths, outcomes.
//! - [`simulator`]: synthetic fleets with correlated lognormal prediction noise.
//! - [`policies`]: replacement and ordering decision rules, per-unit execution,
//!   and the perfect-prognostics baselines.
//! - [`evaluation`]: renewal-reward estimation, variances, and the metric.
//! - [`optimize`]: threshold tuning and configuration selection.
//! - [`io`]: trace/truth/config/report file formats.

pub mod dist;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod optimize;
pub mod policies;
pub mod simulator;
pub mod types;

pub use dist::{CdfPoint, RulDistribution};
pub use error::{PdmError, Result};
pub use evaluation::{FleetEvaluation, VarianceEstimate};
pub use policies::{
    OrderAction, OrderingPolicyParams, PerfectMode, Policy1Params, PopulationTtf, RbarOption,
    ReplacementAction, ReplacementObjective, ReplacementPolicy,
};
pub use simulator::SimulatorConfig;
pub use types::{
    CostModel, LifecycleOutcome, PredictionTrace, ReplacementKind, TimeGrid, TracePoint, UnitTruth,
};
