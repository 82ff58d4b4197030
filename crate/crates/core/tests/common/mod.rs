//! Test-only oracles: numerical quadrature and dense-grid recomputations that
//! stay independent of the closed-form paths used by the library.

#![allow(dead_code)]

use pdm_core::policies::{
    perfect_outcome_replacement, run_replacement_policy_on_unit, PerfectMode, ReplacementPolicy,
};
use pdm_core::{
    CostModel, LifecycleOutcome, PredictionTrace, RulDistribution, TimeGrid, TracePoint, UnitTruth,
};

/// 0.9999 standard normal quantile, fixed so the oracle bracket does not
/// depend on the library's quantile routine.
pub const Z_9999: f64 = 3.719016485455709;

pub fn lognormal_pdf(mu: f64, sigma: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let z = (u.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (u * sigma * (2.0 * std::f64::consts::PI).sqrt())
}

pub fn normal_pdf(mu: f64, sigma: f64, u: f64) -> f64 {
    let z = (u - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    fm: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, fa, m, fm, left, flm, tol / 2.0, depth - 1)
            + simpson_rec(f, m, fm, b, fb, right, frm, tol / 2.0, depth - 1)
    }
}

/// Adaptive Simpson quadrature on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, fa, b, fb, whole, fm, tol, 40)
}

/// Integrates `g(u) f(u) du` for a lognormal density `f` over `[lo, hi]` by
/// substituting `u = e^v` and running adaptive Simpson on panels one sigma
/// wide in log space, so the probe points cannot step over the density bump.
fn quad_lognormal_weighted<G: Fn(f64) -> f64>(
    mu: f64,
    sigma: f64,
    lo: f64,
    hi: f64,
    g: G,
    tol: f64,
) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let v_lo = if lo <= 0.0 { mu - 16.0 * sigma } else { lo.ln().max(mu - 16.0 * sigma) };
    let v_hi = hi.ln().min(mu + 16.0 * sigma);
    if v_hi <= v_lo {
        return 0.0;
    }
    let integrand = &|v: f64| {
        let z = (v - mu) / sigma;
        g(v.exp()) * (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut boundaries = vec![v_lo];
    for i in -16..=16 {
        let v = mu + f64::from(i) * sigma;
        if v > v_lo && v < v_hi {
            boundaries.push(v);
        }
    }
    boundaries.push(v_hi);
    boundaries
        .windows(2)
        .map(|w| adaptive_simpson(integrand, w[0], w[1], tol))
        .sum()
}

/// Oracle `P(RUL <= x)` for a lognormal by quadrature of the density.
pub fn quad_lognormal_cdf(mu: f64, sigma: f64, x: f64) -> f64 {
    quad_lognormal_weighted(mu, sigma, 0.0, x, |_| 1.0, 1e-13)
}

/// Oracle partial first moment `int_0^t u f(u) du` by quadrature.
pub fn quad_truncated_mean(mu: f64, sigma: f64, t: f64) -> f64 {
    let scale = (mu + sigma * sigma / 2.0).exp();
    quad_lognormal_weighted(mu, sigma, 0.0, t, |u| u, 1e-12 * scale.max(1.0))
}

/// Oracle mean by quadrature over the effective support.
pub fn quad_mean(mu: f64, sigma: f64) -> f64 {
    let scale = (mu + sigma * sigma / 2.0).exp();
    quad_lognormal_weighted(mu, sigma, 0.0, f64::MAX, |u| u, 1e-12 * scale.max(1.0))
}

/// Oracle exceedance `int_t^inf (u - t) f(u) du` by quadrature over the
/// effective support.
pub fn quad_exceedance(mu: f64, sigma: f64, t: f64) -> f64 {
    let scale = (mu + sigma * sigma / 2.0).exp();
    quad_lognormal_weighted(
        mu,
        sigma,
        t.max(1e-300),
        f64::MAX,
        |u| u - t,
        1e-12 * scale.max(1.0),
    )
}

/// Oracle for the renewal-rate objective: assembled purely from quadrature.
pub fn oracle_policy2_objective(t_r: f64, t_k: f64, mu: f64, sigma: f64, costs: &CostModel) -> f64 {
    let x = t_r - t_k;
    let f_below = quad_lognormal_cdf(mu, sigma, x);
    let p_pr = 1.0 - f_below;
    let num = p_pr * costs.c_p + f_below * costs.c_c;
    let den = p_pr * t_r + t_k * f_below + quad_truncated_mean(mu, sigma, x);
    num / den
}

/// Oracle for the opportunity-loss objective.
pub fn oracle_policy3_objective(
    t_r: f64,
    t_k: f64,
    mu: f64,
    sigma: f64,
    costs: &CostModel,
    r_bar: f64,
) -> f64 {
    let x = t_r - t_k;
    let f_below = quad_lognormal_cdf(mu, sigma, x);
    let p_pr = 1.0 - f_below;
    p_pr * costs.c_p + f_below * costs.c_c + r_bar * quad_exceedance(mu, sigma, x)
}

/// Dense-grid argmin oracle for the optimal replacement time: cumulative
/// trapezoid integration of the density and its first moment over a uniform
/// grid of `n` points on `(t_k, t_k + q_hi]`.
///
/// Returns `(t_r at argmin, objective value at argmin)`.
pub fn oracle_optimal_time(
    t_k: f64,
    mu: f64,
    sigma: f64,
    costs: &CostModel,
    r_bar: Option<f64>,
    n: usize,
) -> (f64, f64) {
    let q_hi = (mu + sigma * Z_9999).exp();
    let dx = q_hi / n as f64;
    // Total mean by quadrature, for the exceedance identity.
    let mean = quad_mean(mu, sigma);

    let mut best_x = f64::NAN;
    let mut best_v = f64::INFINITY;
    let mut cdf = 0.0;
    let mut moment = 0.0;
    let mut prev_pdf = lognormal_pdf(mu, sigma, 0.0);
    let mut prev_u = 0.0;
    for i in 1..=n {
        let u = dx * i as f64;
        let pdf = lognormal_pdf(mu, sigma, u);
        cdf += 0.5 * (pdf + prev_pdf) * (u - prev_u);
        moment += 0.5 * (u * pdf + prev_u * prev_pdf) * (u - prev_u);
        prev_pdf = pdf;
        prev_u = u;

        let t_r = t_k + u;
        let p_pr = 1.0 - cdf;
        let v = match r_bar {
            None => {
                let num = p_pr * costs.c_p + cdf * costs.c_c;
                let den = p_pr * t_r + t_k * cdf + moment;
                num / den
            }
            Some(rb) => {
                let exceedance = (mean - moment) - u * p_pr;
                p_pr * costs.c_p + cdf * costs.c_c + rb * exceedance
            }
        };
        if v < best_v {
            best_v = v;
            best_x = t_r;
        }
    }
    (best_x, best_v)
}

/// Dense-grid oracle for the optimal age-replacement cost rate against a
/// normal population: tau grid of `step` over `(0, hi]`, trapezoid
/// integration of `t f(t)` from zero.
pub fn oracle_age_replacement_rate(
    mu: f64,
    sigma: f64,
    costs: &CostModel,
    step: f64,
    hi: f64,
) -> (f64, f64) {
    let n = (hi / step).round() as usize;
    let mut best_tau = f64::NAN;
    let mut best_v = f64::INFINITY;
    let mut moment = 0.0;
    let mut prev_u = 0.0;
    let mut prev_pdf = normal_pdf(mu, sigma, 0.0);
    for i in 1..=n {
        let tau = step * i as f64;
        let pdf = normal_pdf(mu, sigma, tau);
        moment += 0.5 * (tau * pdf + prev_u * prev_pdf) * (tau - prev_u);
        prev_u = tau;
        prev_pdf = pdf;

        let z = (tau - mu) / sigma;
        let cdf = 0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2);
        let s = 1.0 - cdf;
        let v = (cdf * costs.c_c + s * costs.c_p) / (moment + tau * s);
        if v < best_v {
            best_v = v;
            best_tau = tau;
        }
    }
    (best_tau, best_v)
}

/// Naively recomputed fleet estimators for cross-checking the library: all
/// sums written out directly, means as `sum / n`, ratio as mean over mean.
pub struct NaiveFleetStats {
    pub r: f64,
    pub var_r: f64,
    pub r_perfect: f64,
    pub m: f64,
    pub var_m: f64,
}

pub fn naive_fleet_stats(policy: &[(f64, f64)], perfect: &[(f64, f64)]) -> NaiveFleetStats {
    let n = policy.len() as f64;
    let mean_c = policy.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_t = policy.iter().map(|p| p.1).sum::<f64>() / n;
    let r = mean_c / mean_t;

    let mut var_c = 0.0;
    let mut var_t = 0.0;
    let mut cov = 0.0;
    for (c, t) in policy {
        var_c += (c - mean_c) * (c - mean_c);
        var_t += (t - mean_t) * (t - mean_t);
        cov += (c - mean_c) * (t - mean_t);
    }
    var_c /= n - 1.0;
    var_t /= n - 1.0;
    cov /= n - 1.0;
    let var_r = (var_c / (mean_t * mean_t)
        + mean_c * mean_c * var_t / (mean_t * mean_t * mean_t * mean_t)
        - 2.0 * mean_c * cov / (mean_t * mean_t * mean_t))
        / n;

    let pn = perfect.len() as f64;
    let p_c = perfect.iter().map(|p| p.0).sum::<f64>() / pn;
    let p_t = perfect.iter().map(|p| p.1).sum::<f64>() / pn;
    let r_perfect = p_c / p_t;
    let m = (r - r_perfect) / r_perfect;
    let var_m = var_r.max(0.0) / (r_perfect * r_perfect);
    NaiveFleetStats { r, var_r: var_r.max(0.0), r_perfect, m, var_m }
}

/// Builds a fleet whose predictions are exact: every entry is a point mass at
/// the true remaining life.
pub fn point_mass_fleet(
    truths: &[UnitTruth],
    grid: &TimeGrid,
) -> Vec<PredictionTrace> {
    truths
        .iter()
        .map(|truth| {
            let entries = grid
                .steps_before(truth.failure_time)
                .map(|(_, t)| TracePoint {
                    t,
                    dist: RulDistribution::point_mass(truth.failure_time - t).unwrap(),
                })
                .collect();
            PredictionTrace::new(&truth.unit_id, entries).unwrap()
        })
        .collect()
}

/// Per-unit replacement outcomes as `(c_m, t_lc)` pairs.
pub fn outcome_pairs(outcomes: &[LifecycleOutcome]) -> Vec<(f64, f64)> {
    outcomes.iter().map(|o| (o.c_m, o.t_lc)).collect()
}

/// Runs a policy on the fleet and returns per-unit outcomes plus the
/// perfect baseline outcomes.
pub fn run_with_perfect(
    traces: &[PredictionTrace],
    truths: &[UnitTruth],
    grid: &TimeGrid,
    costs: &CostModel,
    policy: &ReplacementPolicy,
) -> (Vec<LifecycleOutcome>, Vec<LifecycleOutcome>) {
    let outcomes: Vec<_> = traces
        .iter()
        .zip(truths)
        .map(|(trace, truth)| {
            run_replacement_policy_on_unit(trace, truth, grid, costs, policy).unwrap()
        })
        .collect();
    let perfect: Vec<_> = truths
        .iter()
        .map(|truth| {
            perfect_outcome_replacement(truth, grid, costs, PerfectMode::PreventiveOnly).unwrap()
        })
        .collect();
    (outcomes, perfect)
}
