//! Virtual RUL simulator: generates synthetic fleets of true failure times
//! together with correlated lognormal prediction traces that emulate the
//! output of a prognostic algorithm.
//!
//! Failure times are drawn from a normal population (rejecting draws at or
//! below the first decision step). For each unit the log prediction errors
//! over the decision grid follow a zero-mean multivariate normal with
//! covariance `D * R * D`, where `D` is diagonal with the per-step log error
//! spread and `R` uses an exponential correlation kernel
//! `rho_ij = exp(-|t_i - t_j| / l)`. The prediction at step `k` is then
//! `ln(RUL_pred) ~ N(ln(true RUL) + ln(eps_k), sigma_ln_eps)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::dist::RulDistribution;
use crate::error::{PdmError, Result};
use crate::types::{PredictionTrace, TimeGrid, TracePoint, UnitTruth};

/// Full parameterization of a synthetic fleet.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatorConfig {
    mu_tf: f64,
    sigma_tf: f64,
    grid: TimeGrid,
    sigma_ln_eps: f64,
    corr_length: f64,
    n_units: u32,
    seed: u64,
}

impl SimulatorConfig {
    pub fn new(
        mu_tf: f64,
        sigma_tf: f64,
        grid: TimeGrid,
        sigma_ln_eps: f64,
        corr_length: f64,
        n_units: u32,
        seed: u64,
    ) -> Result<Self> {
        if !mu_tf.is_finite() {
            return Err(PdmError::config(format!("mu_tf must be finite, got {mu_tf}")));
        }
        if !(sigma_tf.is_finite() && sigma_tf > 0.0) {
            return Err(PdmError::config(format!(
                "sigma_tf must be positive and finite, got {sigma_tf}"
            )));
        }
        if !(sigma_ln_eps.is_finite() && sigma_ln_eps > 0.0) {
            return Err(PdmError::config(format!(
                "sigma_ln_eps must be positive and finite, got {sigma_ln_eps}"
            )));
        }
        if !(corr_length.is_finite() && corr_length > 0.0) {
            return Err(PdmError::config(format!(
                "corr_length must be positive and finite, got {corr_length}"
            )));
        }
        if n_units == 0 {
            return Err(PdmError::config("n_units must be at least 1"));
        }
        Ok(SimulatorConfig { mu_tf, sigma_tf, grid, sigma_ln_eps, corr_length, n_units, seed })
    }

    pub fn mu_tf(&self) -> f64 {
        self.mu_tf
    }

    pub fn sigma_tf(&self) -> f64 {
        self.sigma_tf
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn sigma_ln_eps(&self) -> f64 {
        self.sigma_ln_eps
    }

    pub fn corr_length(&self) -> f64 {
        self.corr_length
    }

    pub fn n_units(&self) -> u32 {
        self.n_units
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Exponential correlation matrix `rho_ij = exp(-|t_i - t_j| / corr_length)`.
pub fn exponential_correlation_matrix(times: &[f64], corr_length: f64) -> Result<DMatrix<f64>> {
    if !(corr_length.is_finite() && corr_length > 0.0) {
        return Err(PdmError::domain(format!(
            "correlation length must be positive, got {corr_length}"
        )));
    }
    let n = times.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if times[i] == times[j] {
                return Err(PdmError::domain(format!(
                    "correlation times must be distinct, found duplicate {}",
                    times[i]
                )));
            }
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        (-(times[i] - times[j]).abs() / corr_length).exp()
    }))
}

/// Draws one zero-mean correlated log-error path over the given times.
///
/// The covariance `sigma_ln_eps^2 * R` is factored by Cholesky; if the
/// factorization fails, a jitter of `1e-10 * trace / n` is added to the
/// diagonal and the factorization retried once.
pub fn sample_log_error_path<R: Rng + ?Sized>(
    config: &SimulatorConfig,
    times: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let n = times.len();
    let corr = exponential_correlation_matrix(times, config.corr_length)?;
    let s2 = config.sigma_ln_eps * config.sigma_ln_eps;
    let cov = corr * s2;
    let chol = match cov.clone().cholesky() {
        Some(c) => c,
        None => {
            let jitter = 1e-10 * cov.trace() / n as f64;
            let mut jittered = cov;
            for i in 0..n {
                jittered[(i, i)] += jitter;
            }
            jittered.cholesky().ok_or_else(|| {
                PdmError::Numerical(format!(
                    "covariance Cholesky factorization failed for {n} steps even after jitter"
                ))
            })?
        }
    };
    let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok((chol.l() * z).iter().copied().collect())
}

/// Generates one unit: a failure time plus its prediction trace covering
/// every decision step strictly before the failure.
pub fn generate_unit<R: Rng + ?Sized>(
    config: &SimulatorConfig,
    unit_id: &str,
    rng: &mut R,
) -> Result<(UnitTruth, PredictionTrace)> {
    let normal = Normal::new(config.mu_tf, config.sigma_tf)
        .map_err(|e| PdmError::config(format!("failure-time distribution: {e}")))?;
    // Reject draws at or below the first decision step so every unit has at
    // least one decision opportunity.
    let delta_t = config.grid.delta_t();
    let mut t_f = normal.sample(rng);
    while t_f <= delta_t {
        t_f = normal.sample(rng);
    }

    let times: Vec<f64> = config.grid.steps_before(t_f).map(|(_, t)| t).collect();
    let ln_eps = sample_log_error_path(config, &times, rng)?;
    let entries = times
        .iter()
        .zip(&ln_eps)
        .map(|(&t_k, &eps)| {
            let true_rul = t_f - t_k;
            TracePoint {
                t: t_k,
                dist: RulDistribution::Lognormal {
                    mu: true_rul.ln() + eps,
                    sigma: config.sigma_ln_eps,
                },
            }
        })
        .collect();

    Ok((
        UnitTruth::new(unit_id, t_f)?,
        PredictionTrace::new(unit_id, entries)?,
    ))
}

/// Generates the whole fleet. Each unit draws from its own counter-based RNG
/// substream of `(seed, unit index)`, so the output is identical regardless
/// of generation order or parallelism.
pub fn sample_fleet(config: &SimulatorConfig) -> Result<(Vec<UnitTruth>, Vec<PredictionTrace>)> {
    let units: Vec<(UnitTruth, PredictionTrace)> = (0..config.n_units)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
            rng.set_stream(u64::from(i));
            let unit_id = format!("u{:06}", i + 1);
            generate_unit(config, &unit_id, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(units.into_iter().unzip())
}
