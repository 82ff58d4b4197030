//! Probabilistic RUL predictions and the small calculus every decision policy
//! consumes: exceedance probabilities, partial first moments, and fitting a
//! lognormal to a pair of CDF evaluations.
//!
//! Four representations are supported, matching what prognostic pipelines
//! actually emit:
//!
//! - `Lognormal`: a full parametric distribution of the remaining life.
//! - `PointMass`: a degenerate (perfectly confident) prediction.
//! - `WeightedSamples`: particle output `(values, weights)` from a filter.
//! - `CdfPoints`: a handful of CDF evaluations, e.g. class probabilities
//!   from classifiers trained at fixed lookahead horizons.

use serde::{Deserialize, Serialize};
use statrs::function::erf;

use crate::error::{PdmError, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Probabilities are clamped into `[EPS, 1 - EPS]` before quantile inversion.
pub const CDF_FIT_EPS: f64 = 1e-6;

/// Residual tail mass below which a `CdfPoints` representation is treated as
/// fully covering the distribution (so its mean is finite).
const CDF_TAIL_TOL: f64 = 1e-12;

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erf::erfc(-z / SQRT_2)
}

pub(crate) fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// Standard normal quantile, polished with one Newton step so that
/// `cdf(quantile(p))` round-trips to full double precision.
pub(crate) fn std_normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let z = -SQRT_2 * erf::erfc_inv(2.0 * p);
    let pdf = std_normal_pdf(z);
    if pdf > 1e-300 {
        z - (std_normal_cdf(z) - p) / pdf
    } else {
        z
    }
}

/// One evaluation of a cumulative distribution function: `P(RUL <= threshold) = prob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub threshold: f64,
    pub prob: f64,
}

/// A probabilistic remaining-useful-life prediction at one decision time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RulDistribution {
    /// `ln(RUL) ~ N(mu, sigma)`, in log-cycles.
    Lognormal { mu: f64, sigma: f64 },
    /// All mass at a single remaining life.
    PointMass { value: f64 },
    /// Particle representation: `P(RUL = values[i]) = weights[i]`.
    WeightedSamples { values: Vec<f64>, weights: Vec<f64> },
    /// Sparse CDF evaluations, interpolated linearly and clamped outside the
    /// covered range.
    CdfPoints { points: Vec<CdfPoint> },
}

impl RulDistribution {
    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        let d = RulDistribution::Lognormal { mu, sigma };
        d.validate()?;
        Ok(d)
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        let d = RulDistribution::PointMass { value };
        d.validate()?;
        Ok(d)
    }

    pub fn weighted_samples(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let d = RulDistribution::WeightedSamples { values, weights };
        d.validate()?;
        Ok(d)
    }

    pub fn cdf_points(points: Vec<CdfPoint>) -> Result<Self> {
        let d = RulDistribution::CdfPoints { points };
        d.validate()?;
        Ok(d)
    }

    /// Checks the representation invariants. Deserialized values must be run
    /// through this before use.
    pub fn validate(&self) -> Result<()> {
        match self {
            RulDistribution::Lognormal { mu, sigma } => {
                if !mu.is_finite() {
                    return Err(PdmError::domain(format!("lognormal mu must be finite, got {mu}")));
                }
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(PdmError::domain(format!(
                        "lognormal sigma must be positive and finite, got {sigma}"
                    )));
                }
            }
            RulDistribution::PointMass { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(PdmError::domain(format!(
                        "point mass must be a finite nonnegative life, got {value}"
                    )));
                }
            }
            RulDistribution::WeightedSamples { values, weights } => {
                if values.is_empty() {
                    return Err(PdmError::domain("weighted samples require at least one particle"));
                }
                if values.len() != weights.len() {
                    return Err(PdmError::domain(format!(
                        "got {} values but {} weights",
                        values.len(),
                        weights.len()
                    )));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(PdmError::domain("sample values must be finite and nonnegative"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(PdmError::domain("weights must be finite and nonnegative"));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(PdmError::domain(format!("weights must sum to 1, got {total}")));
                }
            }
            RulDistribution::CdfPoints { points } => {
                if points.is_empty() {
                    return Err(PdmError::domain("cdf_points requires at least one point"));
                }
                for p in points {
                    if !(p.threshold.is_finite() && p.threshold >= 0.0) {
                        return Err(PdmError::domain(format!(
                            "cdf threshold must be finite and nonnegative, got {}",
                            p.threshold
                        )));
                    }
                    if !(p.prob.is_finite() && (0.0..=1.0).contains(&p.prob)) {
                        return Err(PdmError::domain(format!(
                            "cdf probability must lie in [0, 1], got {}",
                            p.prob
                        )));
                    }
                }
                for w in points.windows(2) {
                    if w[1].threshold <= w[0].threshold {
                        return Err(PdmError::domain("cdf thresholds must be strictly increasing"));
                    }
                    if w[1].prob < w[0].prob {
                        return Err(PdmError::domain("cdf probabilities must be nondecreasing"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `P(RUL <= x)`.
    ///
    /// Lognormal uses the standard normal CDF of `(ln x - mu)/sigma`; a point
    /// mass is an indicator; weighted samples sum the weights of particles at
    /// or below `x`; sparse CDF points are interpolated linearly and clamped
    /// to the first/last probability outside the covered range.
    pub fn prob_rul_leq(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 {
            return Err(PdmError::domain(format!(
                "exceedance probability requires a nonnegative horizon, got {x}"
            )));
        }
        Ok(match self {
            RulDistribution::Lognormal { mu, sigma } => {
                if x == 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
            RulDistribution::PointMass { value } => {
                if *value <= x {
                    1.0
                } else {
                    0.0
                }
            }
            RulDistribution::WeightedSamples { values, weights } => values
                .iter()
                .zip(weights)
                .filter(|(v, _)| **v <= x)
                .map(|(_, w)| w)
                .sum(),
            RulDistribution::CdfPoints { points } => interpolate_cdf(points, x),
        })
    }

    /// `P(RUL < x)`: differs from [`prob_rul_leq`](Self::prob_rul_leq) only at
    /// atoms of the discrete representations. The replacement objectives count
    /// mass sitting exactly at the replacement time as preventively replaced,
    /// which requires the strict variant.
    pub(crate) fn prob_rul_lt(&self, x: f64) -> f64 {
        match self {
            RulDistribution::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
            RulDistribution::PointMass { value } => {
                if *value < x {
                    1.0
                } else {
                    0.0
                }
            }
            RulDistribution::WeightedSamples { values, weights } => values
                .iter()
                .zip(weights)
                .filter(|(v, _)| **v < x)
                .map(|(_, w)| w)
                .sum(),
            RulDistribution::CdfPoints { points } => {
                if x <= 0.0 {
                    0.0
                } else {
                    interpolate_cdf(points, x)
                }
            }
        }
    }

    /// Partial first moment below `t`: `E[RUL * 1{RUL <= t}]`.
    pub fn truncated_mean_below(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(PdmError::domain(format!(
                "partial moment requires a nonnegative truncation, got {t}"
            )));
        }
        Ok(self.partial_first_moment(t, true))
    }

    /// Partial first moment on `[0, t)`; see [`prob_rul_lt`](Self::prob_rul_lt)
    /// for why the strict variant exists.
    pub(crate) fn truncated_mean_strictly_below(&self, t: f64) -> f64 {
        self.partial_first_moment(t, false)
    }

    fn partial_first_moment(&self, t: f64, inclusive: bool) -> f64 {
        match self {
            RulDistribution::Lognormal { mu, sigma } => {
                if t <= 0.0 {
                    0.0
                } else {
                    // E[X 1{X<=t}] = exp(mu + sigma^2/2) * Phi((ln t - mu - sigma^2)/sigma)
                    let mean = (mu + sigma * sigma / 2.0).exp();
                    mean * std_normal_cdf((t.ln() - mu - sigma * sigma) / sigma)
                }
            }
            RulDistribution::PointMass { value } => {
                let below = if inclusive { *value <= t } else { *value < t };
                if below {
                    *value
                } else {
                    0.0
                }
            }
            RulDistribution::WeightedSamples { values, weights } => values
                .iter()
                .zip(weights)
                .filter(|(v, _)| if inclusive { **v <= t } else { **v < t })
                .map(|(v, w)| v * w)
                .sum(),
            RulDistribution::CdfPoints { points } => cdf_points_partial_moment(points, t),
        }
    }

    /// Expected life beyond `t`: `E[(RUL - t)^+]`.
    ///
    /// Satisfies `expected_exceedance(t) = mean() - truncated_mean_below(t)
    /// - t * (1 - prob_rul_leq(t))` whenever the mean is finite.
    pub fn expected_exceedance(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(PdmError::domain(format!(
                "exceedance requires a nonnegative horizon, got {t}"
            )));
        }
        Ok(match self {
            RulDistribution::Lognormal { mu, sigma } => {
                let mean = (mu + sigma * sigma / 2.0).exp();
                if t == 0.0 {
                    mean
                } else {
                    // E[(X-t)^+] = mean * Phi((mu + sigma^2 - ln t)/sigma) - t * Phi((mu - ln t)/sigma)
                    let ln_t = t.ln();
                    mean * std_normal_cdf((mu + sigma * sigma - ln_t) / sigma)
                        - t * std_normal_cdf((mu - ln_t) / sigma)
                }
            }
            RulDistribution::PointMass { value } => (value - t).max(0.0),
            RulDistribution::WeightedSamples { values, weights } => values
                .iter()
                .zip(weights)
                .map(|(v, w)| (v - t).max(0.0) * w)
                .sum(),
            RulDistribution::CdfPoints { points } => {
                let tail = 1.0 - points.last().expect("validated nonempty").prob;
                if tail > CDF_TAIL_TOL {
                    // Mass beyond the last covered threshold is unlocated; the
                    // exceedance is unbounded.
                    f64::INFINITY
                } else {
                    cdf_points_exceedance(points, t)
                }
            }
        })
    }

    /// First moment. Infinite for `CdfPoints` whose last probability leaves
    /// residual tail mass, since that mass is unlocated.
    pub fn mean(&self) -> f64 {
        match self {
            RulDistribution::Lognormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
            RulDistribution::PointMass { value } => *value,
            RulDistribution::WeightedSamples { values, weights } => {
                values.iter().zip(weights).map(|(v, w)| v * w).sum()
            }
            RulDistribution::CdfPoints { points } => {
                let tail = 1.0 - points.last().expect("validated nonempty").prob;
                if tail > CDF_TAIL_TOL {
                    f64::INFINITY
                } else {
                    cdf_points_partial_moment(points, points.last().unwrap().threshold)
                }
            }
        }
    }

    /// Quantile of the remaining life, `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(PdmError::domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        Ok(match self {
            RulDistribution::Lognormal { mu, sigma } => (mu + sigma * std_normal_quantile(p)).exp(),
            RulDistribution::PointMass { value } => *value,
            RulDistribution::WeightedSamples { values, weights } => {
                let mut order: Vec<usize> = (0..values.len()).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                let mut cum = 0.0;
                for &i in &order {
                    cum += weights[i];
                    if cum >= p {
                        return Ok(values[i]);
                    }
                }
                values[*order.last().expect("validated nonempty")]
            }
            RulDistribution::CdfPoints { points } => {
                let first = points.first().expect("validated nonempty");
                let last = points.last().expect("validated nonempty");
                if p <= first.prob {
                    first.threshold
                } else if p >= last.prob {
                    last.threshold
                } else {
                    let seg = points
                        .windows(2)
                        .find(|w| w[1].prob >= p)
                        .expect("p below last prob");
                    let (a, b) = (seg[0], seg[1]);
                    // Flat segments are skipped by the search above (b.prob >= p > a.prob).
                    a.threshold + (b.threshold - a.threshold) * (p - a.prob) / (b.prob - a.prob)
                }
            }
        })
    }

    /// Inverts two CDF evaluations `P(RUL <= a) = p_a`, `P(RUL <= b) = p_b`
    /// into the unique lognormal passing through both points.
    ///
    /// Probabilities are clamped into `[CDF_FIT_EPS, 1 - CDF_FIT_EPS]` before
    /// inversion; equal or inverted quantiles after clamping cannot identify a
    /// positive spread and are rejected.
    pub fn fit_lognormal_from_two_cdf_points(a: f64, p_a: f64, b: f64, p_b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && a < b) {
            return Err(PdmError::domain(format!(
                "fit requires 0 < a < b, got a={a}, b={b}"
            )));
        }
        if !(p_a.is_finite() && p_b.is_finite()) {
            return Err(PdmError::domain("fit probabilities must be finite"));
        }
        let p_a = p_a.clamp(CDF_FIT_EPS, 1.0 - CDF_FIT_EPS);
        let p_b = p_b.clamp(CDF_FIT_EPS, 1.0 - CDF_FIT_EPS);
        if p_a >= p_b {
            return Err(PdmError::DegenerateFit(format!(
                "need p_a < p_b after clamping, got p_a={p_a}, p_b={p_b}"
            )));
        }
        let z_a = std_normal_quantile(p_a);
        let z_b = std_normal_quantile(p_b);
        let sigma = (b.ln() - a.ln()) / (z_b - z_a);
        let mu = a.ln() - sigma * z_a;
        RulDistribution::lognormal(mu, sigma)
    }
}

/// Linear interpolation of sparse CDF points, clamped to the first/last
/// probability outside the covered range.
fn interpolate_cdf(points: &[CdfPoint], x: f64) -> f64 {
    let first = points.first().expect("validated nonempty");
    let last = points.last().expect("validated nonempty");
    if x <= first.threshold {
        return first.prob;
    }
    if x >= last.threshold {
        return last.prob;
    }
    let seg = points
        .windows(2)
        .find(|w| x < w[1].threshold)
        .expect("x below last threshold");
    let (a, b) = (seg[0], seg[1]);
    a.prob + (b.prob - a.prob) * (x - a.threshold) / (b.threshold - a.threshold)
}

/// Partial first moment of the distribution implied by the clamped linear
/// interpolant: an atom of the first probability at zero (which contributes
/// nothing), uniform density between consecutive points, and any residual
/// tail mass beyond the last threshold (which lies above every finite `t`).
fn cdf_points_partial_moment(points: &[CdfPoint], t: f64) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if t <= a.threshold {
            break;
        }
        let hi = t.min(b.threshold);
        let density = (b.prob - a.prob) / (b.threshold - a.threshold);
        total += density * (hi * hi - a.threshold * a.threshold) / 2.0;
    }
    total
}

/// `E[(X - t)^+]` for the interpolant distribution, assuming no residual tail
/// mass beyond the last threshold.
fn cdf_points_exceedance(points: &[CdfPoint], t: f64) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if t >= b.threshold {
            continue;
        }
        let lo = t.max(a.threshold);
        let density = (b.prob - a.prob) / (b.threshold - a.threshold);
        // integral of (u - t) du over [lo, b]
        let hi_part = (b.threshold - t) * (b.threshold - t);
        let lo_part = (lo - t) * (lo - t);
        total += density * (hi_part - lo_part) / 2.0;
    }
    total
}
