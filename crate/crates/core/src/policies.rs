//! Decision rules and their per-unit execution.
//!
//! Three replacement policies are provided:
//!
//! - **Policy 1** — heuristic threshold: preventively replace as soon as the
//!   predicted probability of failing within the next decision interval
//!   reaches `p_thres`.
//! - **Policy 2** — renewal objective: at each step, minimize the predicted
//!   long-run cost per unit time over the continuous replacement time, and
//!   replace when the optimum falls within the next interval.
//! - **Policy 3** — opportunity-loss objective: minimize expected replacement
//!   cost plus the expected life sacrificed by replacing early, priced at the
//!   fleet's long-run cost rate `r_bar`.
//!
//! The ordering-replacement setting adds a heuristic two-threshold policy
//! that first orders a spare and then replaces, and the perfect-prognostics
//! baselines give the reference outcomes against which the metric is defined.

use serde::{Deserialize, Serialize};

use crate::dist::{std_normal_cdf, std_normal_pdf, RulDistribution};
use crate::error::{PdmError, Result};
use crate::types::{
    CostModel, LifecycleOutcome, PredictionTrace, ReplacementKind, TimeGrid, UnitTruth,
};

/// Number of bracket points scanned before golden-section refinement.
const SCAN_POINTS: usize = 512;

/// Replace-or-wait decision at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplacementAction {
    DoNothing,
    PreventiveReplace,
}

/// Order-or-wait decision at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderAction {
    NoOrder,
    Order,
}

/// Threshold of the heuristic replacement policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Policy1Params {
    p_thres: f64,
}

impl Policy1Params {
    pub fn new(p_thres: f64) -> Result<Self> {
        if !(p_thres.is_finite() && p_thres > 0.0 && p_thres < 1.0) {
            return Err(PdmError::config(format!(
                "p_thres must lie in (0, 1), got {p_thres}"
            )));
        }
        Ok(Policy1Params { p_thres })
    }

    pub fn p_thres(&self) -> f64 {
        self.p_thres
    }
}

/// How to price the opportunity loss of policy 3: the long-run cost rate of
/// the component population, bounded from above by the optimal
/// age-replacement rate, from below by the perfect-monitoring rate
/// `c_p / mu`, or averaged between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbarOption {
    /// Option 1: optimal age-replacement rate against the population (upper bound).
    UpperBoundRenewal,
    /// Option 2: `c_p / mu`, the perfect-monitoring rate (lower bound).
    LowerBoundPerfect,
    /// Option 3: arithmetic mean of the two bounds.
    AverageOfBounds,
}

/// Normal fit of the population time-to-failure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationTtf {
    mu: f64,
    sigma: f64,
}

impl PopulationTtf {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(PdmError::config(format!(
                "population mean must be positive, got {mu}"
            )));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(PdmError::config(format!(
                "population sigma must be positive, got {sigma}"
            )));
        }
        Ok(PopulationTtf { mu, sigma })
    }

    /// Method-of-moments normal fit over observed failure times.
    pub fn fit(truths: &[UnitTruth]) -> Result<Self> {
        if truths.len() < 2 {
            return Err(PdmError::input(
                "population fit requires at least two failure times",
            ));
        }
        let n = truths.len() as f64;
        let mean = truths.iter().map(|t| t.failure_time).sum::<f64>() / n;
        let var = truths
            .iter()
            .map(|t| (t.failure_time - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        if var <= 0.0 {
            return Err(PdmError::input(
                "population fit requires non-degenerate failure times",
            ));
        }
        PopulationTtf::new(mean, var.sqrt())
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Thresholds of the heuristic ordering-replacement policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingPolicyParams {
    p_order_thres: f64,
    p_rep_thres: f64,
}

impl OrderingPolicyParams {
    pub fn new(p_order_thres: f64, p_rep_thres: f64) -> Result<Self> {
        for (name, v) in [("p_order_thres", p_order_thres), ("p_rep_thres", p_rep_thres)] {
            if !(v.is_finite() && v > 0.0 && v < 1.0) {
                return Err(PdmError::config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(OrderingPolicyParams { p_order_thres, p_rep_thres })
    }

    pub fn p_order_thres(&self) -> f64 {
        self.p_order_thres
    }

    pub fn p_rep_thres(&self) -> f64 {
        self.p_rep_thres
    }
}

/// Objective used when optimizing the continuous replacement time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplacementObjective {
    /// Policy 2: predicted long-run cost per unit time.
    Renewal,
    /// Policy 3: expected replacement cost plus the opportunity loss priced
    /// at `r_bar`.
    Opportunity { r_bar: f64 },
}

/// A replacement policy together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplacementPolicy {
    /// Policy 1: heuristic threshold on the next-step failure probability.
    Heuristic(Policy1Params),
    /// Policy 2: renewal objective on the full RUL distribution.
    Renewal,
    /// Policy 3: opportunity-loss objective with the given cost rate.
    Opportunity { r_bar: f64 },
}

/// How the perfect-prognostics baseline treats the rare case where running
/// to failure is cheaper than the last-moment preventive replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerfectMode {
    /// Always replace preventively at the last grid time before failure.
    #[default]
    PreventiveOnly,
    /// Allow a corrective end when `c_c / T_F < c_p / T_R_perfect`.
    AllowRunToFailure,
}

/// Policy 1 decision: preventively replace iff
/// `P(RUL <= delta_t) >= p_thres` (ties replace).
pub fn policy1_step(
    dist: &RulDistribution,
    delta_t: f64,
    params: &Policy1Params,
) -> Result<ReplacementAction> {
    let p = dist.prob_rul_leq(delta_t)?;
    Ok(if p >= params.p_thres {
        ReplacementAction::PreventiveReplace
    } else {
        ReplacementAction::DoNothing
    })
}

/// Policy 2 objective: predicted long-run cost per unit time if the current
/// component is scheduled for replacement at `t_r`.
///
/// With `x = t_r - t_k` the remaining-life horizon, the preventive
/// probability is `P(RUL >= x)` (mass exactly at the replacement time counts
/// as replaced in time) and the expected cycle length is
/// `P_PR * t_r + t_k * P(RUL < x) + E[RUL * 1{RUL < x}]`.
pub fn policy2_objective(
    t_r: f64,
    t_k: f64,
    dist: &RulDistribution,
    costs: &CostModel,
) -> Result<f64> {
    if !(t_r.is_finite() && t_k.is_finite() && t_r > t_k) {
        return Err(PdmError::domain(format!(
            "replacement time must exceed the decision time, got t_r={t_r}, t_k={t_k}"
        )));
    }
    let x = t_r - t_k;
    let f_below = dist.prob_rul_lt(x);
    let p_pr = 1.0 - f_below;
    let expected_cost = p_pr * costs.c_p + f_below * costs.c_c;
    let expected_length = p_pr * t_r + t_k * f_below + dist.truncated_mean_strictly_below(x);
    if expected_length <= 0.0 {
        return Err(PdmError::DegenerateInput(format!(
            "expected cycle length is not positive ({expected_length}) at t_r={t_r}"
        )));
    }
    Ok(expected_cost / expected_length)
}

/// Policy 3 objective: expected replacement cost plus `r_bar` times the
/// expected life sacrificed beyond `t_r`. This is a cost, not a cost rate.
pub fn policy3_objective(
    t_r: f64,
    t_k: f64,
    dist: &RulDistribution,
    costs: &CostModel,
    r_bar: f64,
) -> Result<f64> {
    if !(t_r.is_finite() && t_k.is_finite() && t_r > t_k) {
        return Err(PdmError::domain(format!(
            "replacement time must exceed the decision time, got t_r={t_r}, t_k={t_k}"
        )));
    }
    if !(r_bar.is_finite() && r_bar > 0.0) {
        return Err(PdmError::domain(format!("r_bar must be positive, got {r_bar}")));
    }
    let x = t_r - t_k;
    let f_below = dist.prob_rul_lt(x);
    let p_pr = 1.0 - f_below;
    Ok(p_pr * costs.c_p + f_below * costs.c_c + r_bar * dist.expected_exceedance(x)?)
}

/// Long-run cost rate of the component population used to price the
/// opportunity loss in policy 3.
pub fn rbar_estimate(pop: &PopulationTtf, costs: &CostModel, option: RbarOption) -> f64 {
    match option {
        RbarOption::LowerBoundPerfect => costs.c_p / pop.mu,
        RbarOption::UpperBoundRenewal => age_replacement_min_rate(pop, costs),
        RbarOption::AverageOfBounds => {
            0.5 * (age_replacement_min_rate(pop, costs) + costs.c_p / pop.mu)
        }
    }
}

/// Minimal long-run cost rate of the classical age-replacement policy
/// against the normal population: minimizes
/// `[F(tau) c_c + S(tau) c_p] / [int_0^tau t f(t) dt + tau S(tau)]`.
fn age_replacement_min_rate(pop: &PopulationTtf, costs: &CostModel) -> f64 {
    let (mu, sigma) = (pop.mu, pop.sigma);
    // int_0^tau t f(t) dt for the normal, by the closed-form partial moment.
    let partial_at = |tau: f64| {
        let z = (tau - mu) / sigma;
        mu * std_normal_cdf(z) - sigma * std_normal_pdf(z)
    };
    let at_zero = partial_at(0.0);
    let rate = |tau: f64| {
        let f = std_normal_cdf((tau - mu) / sigma);
        let s = 1.0 - f;
        let expected_length = (partial_at(tau) - at_zero) + tau * s;
        (f * costs.c_c + s * costs.c_p) / expected_length
    };
    let hi = mu + 8.0 * sigma;
    let (_, value) = minimize_scan_golden(&rate, 0.0, hi, 2048);
    value
}

/// Minimizes `f` on the open-left bracket `(lo, hi]`: scans a uniform grid,
/// then golden-section refines around the best grid point. Returns the best
/// evaluated point, so grid points (including `hi`) can be returned exactly.
/// Non-finite objective values are treated as worse than any finite one.
fn minimize_scan_golden<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    debug_assert!(hi > lo && points >= 2);
    let span = hi - lo;
    let step = span / points as f64;
    let grid_at = |i: usize| lo + step * i as f64;

    let mut best_x = hi;
    let mut best_f = f64::INFINITY;
    let mut best_i = points;
    for i in 1..=points {
        let x = grid_at(i);
        let v = f(x);
        if v < best_f {
            best_f = v;
            best_x = x;
            best_i = i;
        }
    }

    // Refine inside the two cells surrounding the best grid point.
    let mut a = if best_i > 1 { grid_at(best_i - 1) } else { lo + span * 1e-12 };
    let mut b = grid_at((best_i + 1).min(points));
    let track = |x: f64, v: f64, best_x: &mut f64, best_f: &mut f64| {
        if v < *best_f {
            *best_f = v;
            *best_x = x;
        }
    };
    track(a, f(a), &mut best_x, &mut best_f);
    track(b, f(b), &mut best_x, &mut best_f);

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let tol = span * 1e-10;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    track(x1, f1, &mut best_x, &mut best_f);
    track(x2, f2, &mut best_x, &mut best_f);
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
            track(x1, f1, &mut best_x, &mut best_f);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
            track(x2, f2, &mut best_x, &mut best_f);
        }
    }
    (best_x, best_f)
}

/// Optimal continuous replacement time for the current component under the
/// selected objective, searched over `(t_k, t_k + q]` where `q` is the
/// 0.9999 quantile of the predicted remaining life.
pub fn optimal_replacement_time(
    t_k: f64,
    dist: &RulDistribution,
    costs: &CostModel,
    objective: ReplacementObjective,
) -> Result<f64> {
    if !(t_k.is_finite() && t_k >= 0.0) {
        return Err(PdmError::domain(format!(
            "decision time must be nonnegative, got {t_k}"
        )));
    }
    let q_hi = dist.quantile(0.9999)?;
    // Guard against fully degenerate predictions (all mass at zero life).
    let span = if q_hi > 0.0 { q_hi } else { 1e-9 * t_k.max(1.0) };
    let hi = t_k + span;

    let eval = |t_r: f64| -> Result<f64> {
        match objective {
            ReplacementObjective::Renewal => policy2_objective(t_r, t_k, dist, costs),
            ReplacementObjective::Opportunity { r_bar } => {
                policy3_objective(t_r, t_k, dist, costs, r_bar)
            }
        }
    };
    // Surface real errors once; inside the scan they map to +inf.
    eval(hi)?;
    let f = |t_r: f64| eval(t_r).unwrap_or(f64::INFINITY);
    let (t_star, value) = minimize_scan_golden(&f, t_k, hi, SCAN_POINTS);
    if !value.is_finite() {
        return Err(PdmError::DegenerateInput(format!(
            "replacement objective has no finite value on ({t_k}, {hi}]"
        )));
    }
    Ok(t_star)
}

/// Decision rule shared by policies 2 and 3: replace iff the optimal time
/// falls at or before the next decision opportunity.
pub fn policy23_step(t_k: f64, delta_t: f64, t_star: f64) -> ReplacementAction {
    if t_k + delta_t >= t_star {
        ReplacementAction::PreventiveReplace
    } else {
        ReplacementAction::DoNothing
    }
}

/// Lead time rounded up to the decision grid.
pub fn grid_adjusted_lead_time(lead_time: f64, delta_t: f64) -> f64 {
    let ratio = lead_time / delta_t;
    let rounded = ratio.round();
    let k = if (ratio - rounded).abs() <= 1e-9 { rounded } else { ratio.ceil() };
    k * delta_t
}

/// One step of the heuristic ordering-replacement policy.
///
/// Orders (once) when `P(RUL <= w + delta_t) >= p_order_thres`, where `w` is
/// the grid-adjusted lead time; replaces when `P(RUL <= delta_t) >=
/// p_rep_thres`, regardless of stock. Sparse CDF representations must carry
/// an exact evaluation at `w + delta_t`: extrapolating the ordering
/// probability from unrelated thresholds would be meaningless.
pub fn ordering_step(
    dist: &RulDistribution,
    delta_t: f64,
    lead_time: f64,
    already_ordered: bool,
    params: &OrderingPolicyParams,
) -> Result<(OrderAction, ReplacementAction)> {
    let w = grid_adjusted_lead_time(lead_time, delta_t);
    let order_horizon = w + delta_t;
    let order_action = if already_ordered {
        OrderAction::NoOrder
    } else {
        let p_order = match dist {
            RulDistribution::CdfPoints { points } => points
                .iter()
                .find(|p| (p.threshold - order_horizon).abs() <= 1e-9 * delta_t)
                .map(|p| p.prob)
                .ok_or_else(|| {
                    PdmError::input(format!(
                        "ordering decision needs a CDF point at threshold {order_horizon}"
                    ))
                })?,
            _ => dist.prob_rul_leq(order_horizon)?,
        };
        if p_order >= params.p_order_thres {
            OrderAction::Order
        } else {
            OrderAction::NoOrder
        }
    };
    let p_rep = dist.prob_rul_leq(delta_t)?;
    let rep_action = if p_rep >= params.p_rep_thres {
        ReplacementAction::PreventiveReplace
    } else {
        ReplacementAction::DoNothing
    };
    Ok((order_action, rep_action))
}

fn require_entry<'a>(
    trace: &'a PredictionTrace,
    t_k: f64,
    grid: &TimeGrid,
) -> Result<&'a RulDistribution> {
    trace.entry_at(t_k, grid).ok_or_else(|| {
        PdmError::input(format!(
            "trace for unit {} has no prediction at decision time {t_k}",
            trace.unit_id()
        ))
    })
}

fn check_unit_match(trace: &PredictionTrace, truth: &UnitTruth) -> Result<()> {
    if trace.unit_id() != truth.unit_id {
        return Err(PdmError::input(format!(
            "trace unit {} does not match truth unit {}",
            trace.unit_id(),
            truth.unit_id
        )));
    }
    Ok(())
}

/// Runs a replacement policy over one unit's life: the first preventive
/// decision before failure ends the cycle at that grid time; otherwise the
/// cycle ends correctively at the failure time.
pub fn run_replacement_policy_on_unit(
    trace: &PredictionTrace,
    truth: &UnitTruth,
    grid: &TimeGrid,
    costs: &CostModel,
    policy: &ReplacementPolicy,
) -> Result<LifecycleOutcome> {
    check_unit_match(trace, truth)?;
    for (_, t_k) in grid.steps_before(truth.failure_time) {
        let dist = require_entry(trace, t_k, grid)?;
        let action = match policy {
            ReplacementPolicy::Heuristic(params) => policy1_step(dist, grid.delta_t(), params)?,
            ReplacementPolicy::Renewal => {
                let t_star =
                    optimal_replacement_time(t_k, dist, costs, ReplacementObjective::Renewal)?;
                policy23_step(t_k, grid.delta_t(), t_star)
            }
            ReplacementPolicy::Opportunity { r_bar } => {
                let t_star = optimal_replacement_time(
                    t_k,
                    dist,
                    costs,
                    ReplacementObjective::Opportunity { r_bar: *r_bar },
                )?;
                policy23_step(t_k, grid.delta_t(), t_star)
            }
        };
        if action == ReplacementAction::PreventiveReplace {
            return Ok(LifecycleOutcome::replacement(
                truth.unit_id.clone(),
                t_k,
                ReplacementKind::Preventive,
                costs.c_p,
            ));
        }
    }
    Ok(LifecycleOutcome::replacement(
        truth.unit_id.clone(),
        truth.failure_time,
        ReplacementKind::Corrective,
        costs.c_c,
    ))
}

/// Runs the heuristic ordering-replacement policy over one unit's life.
///
/// If the cycle ends with no order placed, the order is booked at the end of
/// the cycle itself, paying the full lead time in unavailability.
pub fn run_ordering_policy_on_unit(
    trace: &PredictionTrace,
    truth: &UnitTruth,
    grid: &TimeGrid,
    costs: &CostModel,
    params: &OrderingPolicyParams,
) -> Result<LifecycleOutcome> {
    check_unit_match(trace, truth)?;
    let mut t_order = None;
    let mut t_replace = None;
    for (_, t_k) in grid.steps_before(truth.failure_time) {
        let dist = require_entry(trace, t_k, grid)?;
        let (order, rep) =
            ordering_step(dist, grid.delta_t(), costs.lead_time, t_order.is_some(), params)?;
        if order == OrderAction::Order {
            t_order = Some(t_k);
        }
        if rep == ReplacementAction::PreventiveReplace {
            t_replace = Some(t_k);
            break;
        }
    }
    let (t_lc, kind, c_rep) = match t_replace {
        Some(t) => (t, ReplacementKind::Preventive, costs.c_p),
        None => (truth.failure_time, ReplacementKind::Corrective, costs.c_c),
    };
    let t_order = t_order.unwrap_or(t_lc);
    Ok(LifecycleOutcome::with_ordering(
        truth.unit_id.clone(),
        t_lc,
        kind,
        c_rep,
        t_order,
        costs,
    ))
}

/// Perfect-prognostics outcome in the replacement setting: a preventive
/// replacement at the last grid time strictly before failure (a replacement
/// exactly at the failure instant counts as a failure).
pub fn perfect_outcome_replacement(
    truth: &UnitTruth,
    grid: &TimeGrid,
    costs: &CostModel,
    mode: PerfectMode,
) -> Result<LifecycleOutcome> {
    let (_, t_r_perfect) = grid.last_step_before(truth.failure_time).ok_or_else(|| {
        PdmError::input(format!(
            "unit {} fails at {} before the first decision time",
            truth.unit_id, truth.failure_time
        ))
    })?;
    let run_to_failure = match mode {
        PerfectMode::PreventiveOnly => false,
        PerfectMode::AllowRunToFailure => {
            costs.c_c / truth.failure_time < costs.c_p / t_r_perfect
        }
    };
    Ok(if run_to_failure {
        LifecycleOutcome::replacement(
            truth.unit_id.clone(),
            truth.failure_time,
            ReplacementKind::Corrective,
            costs.c_c,
        )
    } else {
        LifecycleOutcome::replacement(
            truth.unit_id.clone(),
            t_r_perfect,
            ReplacementKind::Preventive,
            costs.c_p,
        )
    })
}

/// Perfect-prognostics outcome in the ordering setting: order exactly one
/// lead time ahead of the perfect replacement, so delay and stock costs are
/// both exactly zero.
pub fn perfect_outcome_ordering(
    truth: &UnitTruth,
    grid: &TimeGrid,
    costs: &CostModel,
) -> Result<LifecycleOutcome> {
    let perfect = perfect_outcome_replacement(truth, grid, costs, PerfectMode::PreventiveOnly)?;
    let t_order = perfect.t_lc - costs.lead_time;
    if t_order < 0.0 {
        return Err(PdmError::InfeasiblePerfect { unit_id: truth.unit_id.clone() });
    }
    Ok(LifecycleOutcome {
        t_order: Some(t_order),
        ..perfect
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::TracePoint;
    use approx::assert_relative_eq;

    fn point(value: f64) -> RulDistribution {
        RulDistribution::point_mass(value).unwrap()
    }

    fn lognormal(mu: f64, sigma: f64) -> RulDistribution {
        RulDistribution::lognormal(mu, sigma).unwrap()
    }

    fn costs(c_p: f64, c_c: f64) -> CostModel {
        CostModel::replacement_only(c_p, c_c).unwrap()
    }

    #[test]
    fn policy1_threshold_comparisons() {
        // P(RUL <= 10) = 0.2 for lognormal with 20th percentile at 10.
        let d = lognormal(10f64.ln() - 0.4 * crate::dist::std_normal_quantile(0.2), 0.4);
        assert_relative_eq!(d.prob_rul_leq(10.0).unwrap(), 0.2, epsilon = 1e-12);
        let act = policy1_step(&d, 10.0, &Policy1Params::new(0.1).unwrap()).unwrap();
        assert_eq!(act, ReplacementAction::PreventiveReplace);

        let d2 = lognormal(10f64.ln() - 0.4 * crate::dist::std_normal_quantile(0.05), 0.4);
        let act2 = policy1_step(&d2, 10.0, &Policy1Params::new(0.1).unwrap()).unwrap();
        assert_eq!(act2, ReplacementAction::DoNothing);

        // Certain failure within the next step replaces at any threshold < 1.
        let act3 = policy1_step(&point(5.0), 10.0, &Policy1Params::new(0.99).unwrap()).unwrap();
        assert_eq!(act3, ReplacementAction::PreventiveReplace);

        // Ties trigger replacement.
        let tie = policy1_step(&point(10.0), 10.0, &Policy1Params::new(0.5).unwrap()).unwrap();
        assert_eq!(tie, ReplacementAction::PreventiveReplace);
    }

    #[test]
    fn policy2_objective_point_mass_cases() {
        let cm = costs(1.0, 10.0);
        // Mass above the replacement time: certain preventive replacement.
        let v = policy2_objective(120.0, 100.0, &point(40.0), &cm).unwrap();
        assert_relative_eq!(v, 1.0 / 120.0, max_relative = 1e-15);
        // Mass below: certain corrective at t_k + rul.
        let v2 = policy2_objective(180.0, 100.0, &point(40.0), &cm).unwrap();
        assert_relative_eq!(v2, 10.0 / 140.0, max_relative = 1e-15);
        // Mass exactly at the replacement time counts as preventive.
        let v3 = policy2_objective(140.0, 100.0, &point(40.0), &cm).unwrap();
        assert_relative_eq!(v3, 1.0 / 140.0, max_relative = 1e-15);
    }

    #[test]
    fn policy2_objective_lognormal_matches_quadrature() {
        // Frozen from adaptive quadrature of both integrals, tol 1e-13.
        let v = policy2_objective(140.0, 100.0, &lognormal(50f64.ln(), 0.3), &costs(1.0, 10.0))
            .unwrap();
        assert_relative_eq!(v, 0.022049846361391647, max_relative = 1e-8);
    }

    #[test]
    fn policy2_objective_rejects_bad_times() {
        let err = policy2_objective(100.0, 100.0, &point(40.0), &costs(1.0, 10.0));
        assert!(matches!(err, Err(PdmError::Domain(_))));
    }

    #[test]
    fn policy3_objective_point_mass_cases() {
        let cm = costs(1.0, 10.0);
        // Replacement exactly at the certain failure horizon: exceedance zero,
        // no failure risk.
        let v = policy3_objective(140.0, 100.0, &point(40.0), &cm, 0.02).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-15);
        // Replacement halfway through the certain life: pays the opportunity loss.
        let v2 = policy3_objective(120.0, 100.0, &point(40.0), &cm, 0.02).unwrap();
        assert_relative_eq!(v2, 1.0 + 0.02 * 20.0, max_relative = 1e-15);
    }

    #[test]
    fn policy3_objective_lognormal_matches_quadrature() {
        let v = policy3_objective(
            140.0,
            100.0,
            &lognormal(50f64.ln(), 0.3),
            &costs(1.0, 10.0),
            0.02,
        )
        .unwrap();
        assert_relative_eq!(v, 3.3301688914162577, max_relative = 1e-8);
    }

    #[test]
    fn rbar_lower_bound_is_perfect_rate() {
        let pop = PopulationTtf::new(225.0, 40.0).unwrap();
        let cm = CostModel::replacement_only(100.0, 1000.0).unwrap();
        assert_relative_eq!(
            rbar_estimate(&pop, &cm, RbarOption::LowerBoundPerfect),
            100.0 / 225.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn rbar_upper_bound_matches_grid_oracle() {
        // Frozen from a tau grid of step 0.1 over (0, 500] with trapezoid
        // integration of the partial moment.
        let pop = PopulationTtf::new(225.0, 40.0).unwrap();
        let cm = costs(1.0, 10.0);
        let v = rbar_estimate(&pop, &cm, RbarOption::UpperBoundRenewal);
        assert_relative_eq!(v, 0.008224236422483322, max_relative = 1e-6);
    }

    #[test]
    fn rbar_upper_approaches_lower_as_costs_converge() {
        let pop = PopulationTtf::new(225.0, 40.0).unwrap();
        let cm = CostModel::replacement_only(1.0, 1.0 + 1e-6).unwrap();
        let upper = rbar_estimate(&pop, &cm, RbarOption::UpperBoundRenewal);
        let lower = rbar_estimate(&pop, &cm, RbarOption::LowerBoundPerfect);
        assert!(upper >= lower - 1e-9 * lower, "upper {upper} lower {lower}");
        assert!(upper <= lower * (1.0 + 1e-3), "upper {upper} lower {lower}");
    }

    #[test]
    fn optimal_time_point_mass_geometry() {
        let cm = costs(1.0, 10.0);
        // Policy 2: the objective decreases until the mass, then jumps to the
        // corrective branch, so the optimum sits at the certain failure time.
        let t2 = optimal_replacement_time(100.0, &point(40.0), &cm, ReplacementObjective::Renewal)
            .unwrap();
        assert!((t2 - 140.0).abs() <= 1e-6 * 40.0, "t* = {t2}");
        // Policy 3: the exceedance penalty vanishes exactly there too.
        let t3 = optimal_replacement_time(
            100.0,
            &point(40.0),
            &cm,
            ReplacementObjective::Opportunity { r_bar: 0.01 },
        )
        .unwrap();
        assert!((t3 - 140.0).abs() <= 1e-6 * 40.0, "t* = {t3}");
    }

    #[test]
    fn optimal_time_lognormal_matches_dense_grid_oracle() {
        // Frozen from a 1e5-point dense-grid argmin over (t_k, t_k + q_0.9999].
        let cm = costs(1.0, 10.0);
        let t_star = optimal_replacement_time(
            100.0,
            &lognormal(50f64.ln(), 0.3),
            &cm,
            ReplacementObjective::Renewal,
        )
        .unwrap();
        assert!((t_star - 120.90885078871347).abs() <= 0.05, "t* = {t_star}");
        let value = policy2_objective(t_star, 100.0, &lognormal(50f64.ln(), 0.3), &cm).unwrap();
        assert_relative_eq!(value, 0.008407082307700476, max_relative = 1e-6);
    }

    #[test]
    fn policy23_step_boundary_replaces() {
        assert_eq!(policy23_step(100.0, 10.0, 109.0), ReplacementAction::PreventiveReplace);
        assert_eq!(policy23_step(100.0, 10.0, 110.0), ReplacementAction::PreventiveReplace);
        assert_eq!(policy23_step(100.0, 10.0, 125.0), ReplacementAction::DoNothing);
    }

    #[test]
    fn lead_time_rounds_up_to_grid() {
        assert_eq!(grid_adjusted_lead_time(20.0, 10.0), 20.0);
        assert_eq!(grid_adjusted_lead_time(15.0, 10.0), 20.0);
        assert_eq!(grid_adjusted_lead_time(0.0, 10.0), 0.0);
    }

    #[test]
    fn ordering_step_rules() {
        let params = OrderingPolicyParams::new(0.1, 0.5).unwrap();
        // P(RUL <= 30) = 0.15 >= 0.1 and not yet ordered: order.
        let d = RulDistribution::cdf_points(vec![
            crate::dist::CdfPoint { threshold: 10.0, prob: 0.01 },
            crate::dist::CdfPoint { threshold: 30.0, prob: 0.15 },
        ])
        .unwrap();
        let (order, rep) = ordering_step(&d, 10.0, 20.0, false, &params).unwrap();
        assert_eq!(order, OrderAction::Order);
        assert_eq!(rep, ReplacementAction::DoNothing);

        // Already ordered: never orders again, replacement rule still applies.
        let (order2, _) = ordering_step(&d, 10.0, 20.0, true, &params).unwrap();
        assert_eq!(order2, OrderAction::NoOrder);

        // Sparse CDF without the ordering threshold is unusable.
        let bad = RulDistribution::cdf_points(vec![crate::dist::CdfPoint {
            threshold: 10.0,
            prob: 0.2,
        }])
        .unwrap();
        assert!(matches!(
            ordering_step(&bad, 10.0, 20.0, false, &params),
            Err(PdmError::Input(_))
        ));
    }

    fn truth_trace_point_mass(unit: &str, t_f: f64, grid: &TimeGrid) -> (UnitTruth, PredictionTrace) {
        let truth = UnitTruth::new(unit, t_f).unwrap();
        let entries = grid
            .steps_before(t_f)
            .map(|(_, t)| TracePoint { t, dist: point(t_f - t) })
            .collect();
        (truth, PredictionTrace::new(unit, entries).unwrap())
    }

    #[test]
    fn replacement_run_point_mass_trace() {
        let grid = TimeGrid::new(10.0, 100).unwrap();
        let cm = costs(100.0, 1000.0);
        let (truth, trace) = truth_trace_point_mass("u1", 247.0, &grid);
        let policy = ReplacementPolicy::Heuristic(Policy1Params::new(0.5).unwrap());
        let out = run_replacement_policy_on_unit(&trace, &truth, &grid, &cm, &policy).unwrap();
        assert_eq!(out.t_lc, 240.0);
        assert_eq!(out.replacement_kind, ReplacementKind::Preventive);
        assert_eq!(out.c_rep, 100.0);
        assert_eq!(out.c_m, 100.0);
    }

    #[test]
    fn replacement_run_never_triggering_goes_corrective() {
        let grid = TimeGrid::new(10.0, 100).unwrap();
        let cm = costs(100.0, 1000.0);
        let truth = UnitTruth::new("u1", 247.0).unwrap();
        // Predictions always see a long life: the threshold never crosses.
        let entries = grid
            .steps_before(truth.failure_time)
            .map(|(_, t)| TracePoint { t, dist: point(1000.0) })
            .collect();
        let trace = PredictionTrace::new("u1", entries).unwrap();
        let policy = ReplacementPolicy::Heuristic(Policy1Params::new(0.5).unwrap());
        let out = run_replacement_policy_on_unit(&trace, &truth, &grid, &cm, &policy).unwrap();
        assert_eq!(out.t_lc, 247.0);
        assert_eq!(out.replacement_kind, ReplacementKind::Corrective);
        assert_eq!(out.c_rep, 1000.0);
    }

    #[test]
    fn replacement_run_requires_every_visited_entry() {
        let grid = TimeGrid::new(10.0, 100).unwrap();
        let cm = costs(100.0, 1000.0);
        let truth = UnitTruth::new("u1", 35.0).unwrap();
        let trace = PredictionTrace::new(
            "u1",
            vec![TracePoint { t: 10.0, dist: point(25.0) }],
        )
        .unwrap();
        let policy = ReplacementPolicy::Heuristic(Policy1Params::new(0.99).unwrap());
        let err = run_replacement_policy_on_unit(&trace, &truth, &grid, &cm, &policy);
        assert!(matches!(err, Err(PdmError::Input(_))));
    }

    #[test]
    fn ordering_run_worked_example() {
        // Order at 170, replace at 180 with lead time 20: ten cycles of
        // unavailability at rate 10.
        let grid = TimeGrid::new(10.0, 100).unwrap();
        let cm = CostModel::new(100.0, 1000.0, 10.0, 1.0, 20.0).unwrap();
        let truth = UnitTruth::new("u100", 200.0).unwrap();
        let entries = grid
            .steps_before(200.0)
            .map(|(_, t)| {
                let p_order: f64 = if t >= 170.0 { 0.15 } else { 0.01 };
                let p_rep: f64 = if t >= 180.0 { 0.2 } else { 0.01 };
                TracePoint {
                    t,
                    dist: RulDistribution::cdf_points(vec![
                        crate::dist::CdfPoint { threshold: 10.0, prob: p_rep },
                        crate::dist::CdfPoint { threshold: 30.0, prob: p_order.max(p_rep) },
                    ])
                    .unwrap(),
                }
            })
            .collect();
        let trace = PredictionTrace::new("u100", entries).unwrap();
        let params = OrderingPolicyParams::new(0.1, 0.1).unwrap();
        let out = run_ordering_policy_on_unit(&trace, &truth, &grid, &cm, &params).unwrap();
        assert_eq!(out.t_order, Some(170.0));
        assert_eq!(out.t_lc, 180.0);
        assert_eq!(out.c_delay, 100.0);
        assert_eq!(out.c_stock, 0.0);
        assert_eq!(out.c_m, 100.0 + 100.0);
    }

    #[test]
    fn perfect_replacement_picks_last_grid_point() {
        let grid = TimeGrid::new(10.0, 100).unwrap();
        let cm = costs(100.0, 1000.0);
        let truth = UnitTruth::new("u1", 247.0).unwrap();
        let out =
            perfect_outcome_replacement(&truth, &grid, &cm, PerfectMode::PreventiveOnly).unwrap();
        assert_eq!(out.t_lc, 240.0);
        assert_eq!(out.c_m, 100.0);

        // Failure exactly on a grid point: strictly-below rule.
        let boundary = UnitTruth::new("u2", 240.0).unwrap();
        let out2 =
            perfect_outcome_replacement(&boundary, &grid, &cm, PerfectMode::PreventiveOnly).unwrap();
        assert_eq!(out2.t_lc, 230.0);

        let early = UnitTruth::new("u3", 9.0).unwrap();
        assert!(perfect_outcome_replacement(&early, &grid, &cm, PerfectMode::PreventiveOnly).is_err());
    }

    #[test]
    fn perfect_replacement_footnote_mode() {
        let grid = TimeGrid::new(500.0, 100).unwrap();
        let cm = CostModel::replacement_only(99.0, 100.0).unwrap();
        let truth = UnitTruth::new("u1", 1000.0).unwrap();
        let out =
            perfect_outcome_replacement(&truth, &grid, &cm, PerfectMode::AllowRunToFailure).unwrap();
        // 100/1000 = 0.1 < 99/500 = 0.198: allowing the failure is cheaper.
        assert_eq!(out.replacement_kind, ReplacementKind::Corrective);
        assert_eq!(out.t_lc, 1000.0);
        assert_eq!(out.c_m, 100.0);
    }

    #[test]
    fn perfect_ordering_is_exactly_on_time() {
        let grid = TimeGrid::new(10.0, 100).unwrap();
        let cm = CostModel::new(100.0, 1000.0, 10.0, 1.0, 20.0).unwrap();
        let truth = UnitTruth::new("u1", 247.0).unwrap();
        let out = perfect_outcome_ordering(&truth, &grid, &cm).unwrap();
        assert_eq!(out.t_order, Some(220.0));
        assert_eq!(out.c_delay, 0.0);
        assert_eq!(out.c_stock, 0.0);
        assert_eq!(out.c_m, 100.0);

        // Zero lead time orders at the replacement itself.
        let cm0 = CostModel::new(100.0, 1000.0, 10.0, 1.0, 0.0).unwrap();
        let out0 = perfect_outcome_ordering(&truth, &grid, &cm0).unwrap();
        assert_eq!(out0.t_order, Some(240.0));

        // Infeasible when the order would have to precede time zero.
        let early = UnitTruth::new("u2", 15.0).unwrap();
        assert!(matches!(
            perfect_outcome_ordering(&early, &grid, &cm),
            Err(PdmError::InfeasiblePerfect { .. })
        ));
    }
}
