//! Renewal-reward estimation of the long-run maintenance cost per unit time,
//! the perfect-prognostics baseline, and the decision-oriented metric
//! comparing the two.
//!
//! The cost rate is estimated as the ratio of sample means
//! `sum(C_m) / sum(T_lc)` over independent life-cycles (not the mean of
//! per-unit ratios, which is biased when cycle lengths vary). Its variance
//! uses the first-order delta-method expansion in the two sample means; the
//! metric `M = (R - R_perfect) / R_perfect` inherits that variance scaled by
//! `1 / R_perfect^2`, treating the perfect rate as exact.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::policies::{
    perfect_outcome_ordering, perfect_outcome_replacement, run_ordering_policy_on_unit,
    run_replacement_policy_on_unit, OrderingPolicyParams, PerfectMode, ReplacementPolicy,
};
use crate::types::{CostModel, LifecycleOutcome, PredictionTrace, TimeGrid, UnitTruth};

/// A delta-method variance estimate; `clamped` flags the pathological case
/// where the raw expansion came out negative and was floored at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub value: f64,
    pub clamped: bool,
}

/// Everything the metric evaluation produces for one fleet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetEvaluation {
    /// Estimated long-run cost per unit time of the evaluated policy.
    pub r_hat: f64,
    pub var_r_hat: f64,
    /// Estimated long-run cost per unit time under perfect prognostics.
    pub r_perfect: f64,
    /// Reported for completeness; not propagated into `var_m_hat`.
    pub var_r_perfect: f64,
    /// Relative excess cost rate over the perfect policy.
    pub m_hat: f64,
    pub var_m_hat: f64,
    /// Normal-approximation 95% confidence interval on `m_hat`.
    pub ci95_m: (f64, f64),
    pub n_units: usize,
    /// True when either delta-method variance was floored at zero.
    pub variance_clamped: bool,
    /// Units excluded because the perfect baseline is infeasible for them.
    pub excluded_units: Vec<String>,
    pub outcomes: Vec<LifecycleOutcome>,
    pub perfect_outcomes: Vec<LifecycleOutcome>,
}

/// Ratio-of-means estimator of the long-run cost per unit time.
pub fn renewal_ratio(outcomes: &[LifecycleOutcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(PdmError::input("cannot estimate a cost rate from an empty fleet"));
    }
    let mut cost = 0.0;
    let mut time = 0.0;
    for o in outcomes {
        if !(o.t_lc.is_finite() && o.t_lc > 0.0) {
            return Err(PdmError::input(format!(
                "unit {} has nonpositive life-cycle length {}",
                o.unit_id, o.t_lc
            )));
        }
        cost += o.c_m;
        time += o.t_lc;
    }
    Ok(cost / time)
}

/// First-order (delta-method) variance of [`renewal_ratio`], using unbiased
/// sample moments:
///
/// ```text
/// Var[R] ~= (Var[C]/E[T]^2 + E[C]^2 Var[T]/E[T]^4 - 2 E[C] Cov[C,T]/E[T]^3) / n
/// ```
pub fn renewal_ratio_variance(outcomes: &[LifecycleOutcome]) -> Result<VarianceEstimate> {
    let n = outcomes.len();
    if n < 2 {
        return Err(PdmError::input("variance estimation requires at least two units"));
    }
    let nf = n as f64;
    let mean_c = outcomes.iter().map(|o| o.c_m).sum::<f64>() / nf;
    let mean_t = outcomes.iter().map(|o| o.t_lc).sum::<f64>() / nf;
    let mut var_c = 0.0;
    let mut var_t = 0.0;
    let mut cov = 0.0;
    for o in outcomes {
        let dc = o.c_m - mean_c;
        let dt = o.t_lc - mean_t;
        var_c += dc * dc;
        var_t += dt * dt;
        cov += dc * dt;
    }
    var_c /= nf - 1.0;
    var_t /= nf - 1.0;
    cov /= nf - 1.0;

    let t2 = mean_t * mean_t;
    let raw = (var_c / t2 + mean_c * mean_c * var_t / (t2 * t2)
        - 2.0 * mean_c * cov / (t2 * mean_t))
        / nf;
    Ok(VarianceEstimate { value: raw.max(0.0), clamped: raw < 0.0 })
}

fn check_same_units(a: &[LifecycleOutcome], b: &[LifecycleOutcome]) -> Result<()> {
    let mut ids_a: Vec<&str> = a.iter().map(|o| o.unit_id.as_str()).collect();
    let mut ids_b: Vec<&str> = b.iter().map(|o| o.unit_id.as_str()).collect();
    ids_a.sort_unstable();
    ids_b.sort_unstable();
    if ids_a != ids_b {
        return Err(PdmError::input(
            "policy and perfect outcomes must cover the same unit ids",
        ));
    }
    Ok(())
}

/// Builds the full metric evaluation from policy outcomes and the matching
/// perfect-baseline outcomes.
pub fn metric(
    outcomes: Vec<LifecycleOutcome>,
    perfect_outcomes: Vec<LifecycleOutcome>,
) -> Result<FleetEvaluation> {
    metric_with_excluded(outcomes, perfect_outcomes, Vec::new())
}

pub(crate) fn metric_with_excluded(
    outcomes: Vec<LifecycleOutcome>,
    perfect_outcomes: Vec<LifecycleOutcome>,
    excluded_units: Vec<String>,
) -> Result<FleetEvaluation> {
    check_same_units(&outcomes, &perfect_outcomes)?;
    if outcomes.len() < 2 {
        return Err(PdmError::input("metric evaluation requires at least two units"));
    }
    let r_hat = renewal_ratio(&outcomes)?;
    let r_perfect = renewal_ratio(&perfect_outcomes)?;
    let var_r = renewal_ratio_variance(&outcomes)?;
    let var_rp = renewal_ratio_variance(&perfect_outcomes)?;
    let m_hat = (r_hat - r_perfect) / r_perfect;
    let var_m_hat = var_r.value / (r_perfect * r_perfect);
    let half = 1.96 * var_m_hat.sqrt();
    Ok(FleetEvaluation {
        r_hat,
        var_r_hat: var_r.value,
        r_perfect,
        var_r_perfect: var_rp.value,
        m_hat,
        var_m_hat,
        ci95_m: (m_hat - half, m_hat + half),
        n_units: outcomes.len(),
        variance_clamped: var_r.clamped || var_rp.clamped,
        excluded_units,
        outcomes,
        perfect_outcomes,
    })
}

/// Pairs each trace with the truth of the same unit. Requires the two fleets
/// to cover exactly the same unit ids.
pub fn pair_fleet<'a>(
    traces: &'a [PredictionTrace],
    truths: &'a [UnitTruth],
) -> Result<Vec<(&'a PredictionTrace, &'a UnitTruth)>> {
    if traces.len() != truths.len() {
        return Err(PdmError::input(format!(
            "fleet mismatch: {} traces vs {} truths",
            traces.len(),
            truths.len()
        )));
    }
    let mut by_id: std::collections::HashMap<&str, &UnitTruth> =
        std::collections::HashMap::with_capacity(truths.len());
    for t in truths {
        if by_id.insert(t.unit_id.as_str(), t).is_some() {
            return Err(PdmError::input(format!("duplicate truth for unit {}", t.unit_id)));
        }
    }
    traces
        .iter()
        .map(|tr| {
            by_id
                .get(tr.unit_id())
                .map(|truth| (tr, *truth))
                .ok_or_else(|| PdmError::input(format!("no truth for unit {}", tr.unit_id())))
        })
        .collect()
}

/// Runs one replacement policy over the whole fleet. Unit order follows the
/// trace order; per-unit runs are independent and parallelized.
pub fn run_replacement_fleet(
    traces: &[PredictionTrace],
    truths: &[UnitTruth],
    grid: &TimeGrid,
    costs: &CostModel,
    policy: &ReplacementPolicy,
) -> Result<Vec<LifecycleOutcome>> {
    let pairs = pair_fleet(traces, truths)?;
    pairs
        .into_par_iter()
        .map(|(trace, truth)| run_replacement_policy_on_unit(trace, truth, grid, costs, policy))
        .collect()
}

/// Evaluates a replacement policy against the perfect baseline.
pub fn evaluate_replacement_policy(
    traces: &[PredictionTrace],
    truths: &[UnitTruth],
    grid: &TimeGrid,
    costs: &CostModel,
    policy: &ReplacementPolicy,
    perfect_mode: PerfectMode,
) -> Result<FleetEvaluation> {
    let outcomes = run_replacement_fleet(traces, truths, grid, costs, policy)?;
    let pairs = pair_fleet(traces, truths)?;
    let perfect = pairs
        .iter()
        .map(|(_, truth)| perfect_outcome_replacement(truth, grid, costs, perfect_mode))
        .collect::<Result<Vec<_>>>()?;
    metric(outcomes, perfect)
}

/// Evaluates the heuristic ordering-replacement policy against the perfect
/// baseline. Units whose perfect order time would be negative are excluded
/// from both sides and reported in `excluded_units`.
pub fn evaluate_ordering_policy(
    traces: &[PredictionTrace],
    truths: &[UnitTruth],
    grid: &TimeGrid,
    costs: &CostModel,
    params: &OrderingPolicyParams,
) -> Result<FleetEvaluation> {
    let pairs = pair_fleet(traces, truths)?;
    let mut included = Vec::with_capacity(pairs.len());
    let mut excluded = Vec::new();
    let mut perfect = Vec::with_capacity(pairs.len());
    for (trace, truth) in pairs {
        match perfect_outcome_ordering(truth, grid, costs) {
            Ok(p) => {
                perfect.push(p);
                included.push((trace, truth));
            }
            Err(PdmError::InfeasiblePerfect { unit_id }) => excluded.push(unit_id),
            Err(e) => return Err(e),
        }
    }
    let outcomes = included
        .into_par_iter()
        .map(|(trace, truth)| run_ordering_policy_on_unit(trace, truth, grid, costs, params))
        .collect::<Result<Vec<_>>>()?;
    metric_with_excluded(outcomes, perfect, excluded)
}

/// Variance of the renewal ratio under nonparametric bootstrap resampling of
/// whole life-cycles.
pub fn bootstrap_ratio_variance(
    outcomes: &[LifecycleOutcome],
    n_resamples: usize,
    seed: u64,
) -> Result<f64> {
    if outcomes.len() < 2 {
        return Err(PdmError::input("bootstrap requires at least two units"));
    }
    if n_resamples < 2 {
        return Err(PdmError::input("bootstrap requires at least two resamples"));
    }
    let n = outcomes.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let mut cost = 0.0;
        let mut time = 0.0;
        for _ in 0..n {
            let o = &outcomes[rng.random_range(0..n)];
            cost += o.c_m;
            time += o.t_lc;
        }
        ratios.push(cost / time);
    }
    let m = ratios.iter().sum::<f64>() / n_resamples as f64;
    Ok(ratios.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (n_resamples - 1) as f64)
}

/// Percentile bootstrap 95% confidence interval on the metric, resampling
/// units jointly from the policy and perfect outcome pairs.
pub fn bootstrap_metric_ci(
    outcomes: &[LifecycleOutcome],
    perfect_outcomes: &[LifecycleOutcome],
    n_resamples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_same_units(outcomes, perfect_outcomes)?;
    if outcomes.len() < 2 {
        return Err(PdmError::input("bootstrap requires at least two units"));
    }
    if n_resamples < 40 {
        return Err(PdmError::input("percentile bootstrap needs at least 40 resamples"));
    }
    // Align the perfect outcomes to the policy outcome order.
    let mut perfect_by_id: std::collections::HashMap<&str, &LifecycleOutcome> =
        perfect_outcomes.iter().map(|o| (o.unit_id.as_str(), o)).collect();
    let aligned: Vec<(&LifecycleOutcome, &LifecycleOutcome)> = outcomes
        .iter()
        .map(|o| (o, perfect_by_id.remove(o.unit_id.as_str()).expect("checked same units")))
        .collect();

    let n = aligned.len();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ms = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let mut cost = 0.0;
        let mut time = 0.0;
        let mut p_cost = 0.0;
        let mut p_time = 0.0;
        for _ in 0..n {
            let (o, p) = aligned[rng.random_range(0..n)];
            cost += o.c_m;
            time += o.t_lc;
            p_cost += p.c_m;
            p_time += p.t_lc;
        }
        let r = cost / time;
        let rp = p_cost / p_time;
        ms.push((r - rp) / rp);
    }
    ms.sort_by(f64::total_cmp);
    let lo_idx = ((n_resamples as f64) * 0.025).floor() as usize;
    let hi_idx = (((n_resamples as f64) * 0.975).ceil() as usize).min(n_resamples - 1);
    Ok((ms[lo_idx], ms[hi_idx]))
}
