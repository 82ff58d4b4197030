//! Decision-oriented optimization: tuning heuristic thresholds and selecting
//! prognostic-model configurations by minimizing the estimated metric on a
//! training fleet.
//!
//! The metric is piecewise constant in the thresholds (decisions only flip at
//! finitely many probability values), so exhaustive grid search is exact up
//! to grid resolution. Ties break toward the more conservative (smaller)
//! threshold, since relaxing a threshold risks corrective failures.

use crate::error::{PdmError, Result};
use crate::evaluation::{pair_fleet, renewal_ratio, run_replacement_fleet};
use crate::policies::{
    perfect_outcome_ordering, perfect_outcome_replacement, run_ordering_policy_on_unit,
    OrderingPolicyParams, PerfectMode, Policy1Params, ReplacementPolicy,
};
use crate::types::{CostModel, PredictionTrace, TimeGrid, UnitTruth};
use rayon::prelude::*;

/// Sorted candidate thresholds, each strictly inside (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    values: Vec<f64>,
}

impl ThresholdGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(PdmError::config("threshold grid must not be empty"));
        }
        for v in &values {
            if !(v.is_finite() && *v > 0.0 && *v < 1.0) {
                return Err(PdmError::config(format!(
                    "thresholds must lie in (0, 1), got {v}"
                )));
            }
        }
        for w in values.windows(2) {
            if w[1] <= w[0] {
                return Err(PdmError::config("thresholds must be strictly increasing"));
            }
        }
        Ok(ThresholdGrid { values })
    }

    /// The default search grid: 0.01, 0.02, ..., 0.99.
    pub fn percent() -> Self {
        ThresholdGrid {
            values: (1..=99).map(|i| f64::from(i) / 100.0).collect(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// One prognostic-model configuration: its label and the prediction traces
/// it produced on the training fleet.
#[derive(Debug, Clone)]
pub struct HyperparameterCandidate {
    pub label: String,
    pub traces: Vec<PredictionTrace>,
}

/// Metric value of one policy-outcome set against a fixed perfect baseline.
fn metric_value(outcome_ratio: f64, perfect_ratio: f64) -> f64 {
    (outcome_ratio - perfect_ratio) / perfect_ratio
}

/// Exhaustively searches the threshold grid for the heuristic replacement
/// policy, returning `(p_thres, m_hat)` at the minimum. Ties break toward
/// the smaller threshold.
pub fn optimize_policy1_threshold(
    traces: &[PredictionTrace],
    truths: &[UnitTruth],
    grid: &TimeGrid,
    costs: &CostModel,
    thresholds: &ThresholdGrid,
) -> Result<(f64, f64)> {
    if truths.len() < 2 {
        return Err(PdmError::input("threshold optimization requires at least two units"));
    }
    let pairs = pair_fleet(traces, truths)?;
    let perfect = pairs
        .iter()
        .map(|(_, truth)| {
            perfect_outcome_replacement(truth, grid, costs, PerfectMode::PreventiveOnly)
        })
        .collect::<Result<Vec<_>>>()?;
    let perfect_ratio = renewal_ratio(&perfect)?;

    let mut best: Option<(f64, f64)> = None;
    for &p in thresholds.values() {
        let policy = ReplacementPolicy::Heuristic(Policy1Params::new(p)?);
        let outcomes = run_replacement_fleet(traces, truths, grid, costs, &policy)?;
        let m = metric_value(renewal_ratio(&outcomes)?, perfect_ratio);
        if best.is_none_or(|(_, best_m)| m < best_m) {
            best = Some((p, m));
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// Exhaustively searches the two-threshold product grid for the heuristic
/// ordering-replacement policy, returning `(p_order, p_rep, m_hat)`. Ties
/// break lexicographically (smaller order threshold, then smaller
/// replacement threshold). Units infeasible for the perfect baseline are
/// excluded throughout.
pub fn optimize_ordering_thresholds(
    traces: &[PredictionTrace],
    truths: &[UnitTruth],
    grid: &TimeGrid,
    costs: &CostModel,
    order_grid: &ThresholdGrid,
    rep_grid: &ThresholdGrid,
) -> Result<(f64, f64, f64)> {
    if truths.len() < 2 {
        return Err(PdmError::input("threshold optimization requires at least two units"));
    }
    let pairs = pair_fleet(traces, truths)?;
    let mut included = Vec::with_capacity(pairs.len());
    let mut perfect = Vec::with_capacity(pairs.len());
    for (trace, truth) in pairs {
        match perfect_outcome_ordering(truth, grid, costs) {
            Ok(p) => {
                perfect.push(p);
                included.push((trace, truth));
            }
            Err(PdmError::InfeasiblePerfect { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if included.len() < 2 {
        return Err(PdmError::input(
            "fewer than two units remain after excluding infeasible-perfect units",
        ));
    }
    let perfect_ratio = renewal_ratio(&perfect)?;

    let mut best: Option<(f64, f64, f64)> = None;
    for &p_order in order_grid.values() {
        for &p_rep in rep_grid.values() {
            let params = OrderingPolicyParams::new(p_order, p_rep)?;
            let outcomes = included
                .par_iter()
                .map(|(trace, truth)| {
                    run_ordering_policy_on_unit(trace, truth, grid, costs, &params)
                })
                .collect::<Result<Vec<_>>>()?;
            let m = metric_value(renewal_ratio(&outcomes)?, perfect_ratio);
            if best.is_none_or(|(_, _, best_m)| m < best_m) {
                best = Some((p_order, p_rep, m));
            }
        }
    }
    Ok(best.expect("grids are nonempty"))
}

/// Evaluates every candidate configuration under the fixed policy and
/// returns `(label, m_hat)` per candidate, in input order.
pub fn evaluate_hyperparameter_candidates(
    candidates: &[HyperparameterCandidate],
    truths: &[UnitTruth],
    grid: &TimeGrid,
    costs: &CostModel,
    policy: &ReplacementPolicy,
) -> Result<Vec<(String, f64)>> {
    if candidates.is_empty() {
        return Err(PdmError::input("need at least one candidate configuration"));
    }
    let perfect = truths
        .iter()
        .map(|truth| perfect_outcome_replacement(truth, grid, costs, PerfectMode::PreventiveOnly))
        .collect::<Result<Vec<_>>>()?;
    let perfect_ratio = renewal_ratio(&perfect)?;
    candidates
        .iter()
        .map(|c| {
            let outcomes =
                run_replacement_fleet(&c.traces, truths, grid, costs, policy).map_err(|e| {
                    PdmError::Input(format!("candidate {}: {e}", c.label))
                })?;
            Ok((c.label.clone(), metric_value(renewal_ratio(&outcomes)?, perfect_ratio)))
        })
        .collect()
}

/// Picks the candidate configuration minimizing the metric under the fixed
/// policy. Ties break toward the first candidate in input order.
pub fn select_hyperparameter_config(
    candidates: &[HyperparameterCandidate],
    truths: &[UnitTruth],
    grid: &TimeGrid,
    costs: &CostModel,
    policy: &ReplacementPolicy,
) -> Result<String> {
    let scored = evaluate_hyperparameter_candidates(candidates, truths, grid, costs, policy)?;
    let mut best = &scored[0];
    for candidate in &scored[1..] {
        if candidate.1 < best.1 {
            best = candidate;
        }
    }
    Ok(best.0.clone())
}
