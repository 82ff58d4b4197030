//! Shared domain types: the decision grid, the cost model, prediction traces,
//! ground-truth failure times, and per-unit life-cycle outcomes.

use serde::{Deserialize, Serialize};

use crate::dist::RulDistribution;
use crate::error::{PdmError, Result};

/// Relative tolerance (times `delta_t`) for grid-membership checks.
pub const GRID_TOL_REL: f64 = 1e-9;

/// Discrete decision grid: actions may be taken at `t_k = k * delta_t` for
/// `k = 1..=max_steps`. Failures announce themselves between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    delta_t: f64,
    max_steps: u32,
}

impl TimeGrid {
    pub fn new(delta_t: f64, max_steps: u32) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t > 0.0) {
            return Err(PdmError::config(format!(
                "delta_t must be positive and finite, got {delta_t}"
            )));
        }
        if max_steps == 0 {
            return Err(PdmError::config("max_steps must be at least 1"));
        }
        Ok(TimeGrid { delta_t, max_steps })
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    pub fn max_steps(&self) -> u32 {
        self.max_steps
    }

    pub fn time_at(&self, k: u32) -> f64 {
        f64::from(k) * self.delta_t
    }

    /// Largest decision step `(k, t_k)` with `t_k` strictly below `t`.
    /// Times within `GRID_TOL_REL * delta_t` of a grid point count as being
    /// on it, so a failure exactly at `t_k` excludes that step.
    pub fn last_step_before(&self, t: f64) -> Option<(u32, f64)> {
        if !t.is_finite() {
            return None;
        }
        let q = t / self.delta_t;
        let r = q.round();
        let k_float = if (q - r).abs() <= GRID_TOL_REL { r - 1.0 } else { q.floor() };
        let k_float = k_float.min(f64::from(self.max_steps));
        if k_float < 1.0 {
            return None;
        }
        let k = k_float as u32;
        Some((k, self.time_at(k)))
    }

    /// Decision steps `(k, t_k)` with `t_k` strictly below `t`, in order.
    pub fn steps_before(&self, t: f64) -> impl Iterator<Item = (u32, f64)> + '_ {
        let last = self.last_step_before(t).map(|(k, _)| k).unwrap_or(0);
        (1..=last).map(move |k| (k, self.time_at(k)))
    }

    /// Whether `t` lies on the grid point `t_grid` within tolerance.
    pub fn matches(&self, t_grid: f64, t: f64) -> bool {
        (t - t_grid).abs() <= GRID_TOL_REL * self.delta_t
    }
}

/// Cost structure of the maintenance problem. Corrective replacement is
/// strictly more expensive than preventive; unavailability and inventory are
/// charged per unit time; `lead_time` is the order-to-delivery delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub c_p: f64,
    pub c_c: f64,
    pub c_unav: f64,
    pub c_inv: f64,
    pub lead_time: f64,
}

impl CostModel {
    pub fn new(c_p: f64, c_c: f64, c_unav: f64, c_inv: f64, lead_time: f64) -> Result<Self> {
        let m = CostModel { c_p, c_c, c_unav, c_inv, lead_time };
        m.validate()?;
        Ok(m)
    }

    /// Cost model for the replacement-only setting (no ordering costs).
    pub fn replacement_only(c_p: f64, c_c: f64) -> Result<Self> {
        CostModel::new(c_p, c_c, 0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_p", self.c_p),
            ("c_c", self.c_c),
            ("c_unav", self.c_unav),
            ("c_inv", self.c_inv),
            ("lead_time", self.lead_time),
        ] {
            if !v.is_finite() {
                return Err(PdmError::config(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.c_p > 0.0 && self.c_c > self.c_p) {
            return Err(PdmError::config(format!(
                "costs must satisfy c_c > c_p > 0, got c_p={}, c_c={}",
                self.c_p, self.c_c
            )));
        }
        if self.c_unav < 0.0 || self.c_inv < 0.0 || self.lead_time < 0.0 {
            return Err(PdmError::config(
                "c_unav, c_inv and lead_time must be nonnegative",
            ));
        }
        Ok(())
    }

    pub fn cost_ratio(&self) -> f64 {
        self.c_p / self.c_c
    }
}

/// Ground truth for one run-to-failure experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTruth {
    pub unit_id: String,
    pub failure_time: f64,
}

impl UnitTruth {
    pub fn new(unit_id: impl Into<String>, failure_time: f64) -> Result<Self> {
        if !(failure_time.is_finite() && failure_time > 0.0) {
            return Err(PdmError::input(format!(
                "failure time must be positive and finite, got {failure_time}"
            )));
        }
        Ok(UnitTruth { unit_id: unit_id.into(), failure_time })
    }
}

/// One prediction on the decision grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub dist: RulDistribution,
}

/// Per-unit sequence of RUL predictions, strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTrace {
    unit_id: String,
    entries: Vec<TracePoint>,
}

impl PredictionTrace {
    pub fn new(unit_id: impl Into<String>, entries: Vec<TracePoint>) -> Result<Self> {
        let unit_id = unit_id.into();
        if entries.is_empty() {
            return Err(PdmError::input(format!("trace for unit {unit_id} has no entries")));
        }
        for p in &entries {
            if !(p.t.is_finite() && p.t > 0.0) {
                return Err(PdmError::input(format!(
                    "trace time for unit {unit_id} must be positive and finite, got {}",
                    p.t
                )));
            }
            p.dist.validate()?;
        }
        for w in entries.windows(2) {
            if w[1].t <= w[0].t {
                return Err(PdmError::input(format!(
                    "trace times for unit {unit_id} must be strictly increasing (at t={})",
                    w[1].t
                )));
            }
        }
        Ok(PredictionTrace { unit_id, entries })
    }

    pub fn unit_id(&self) -> &str {
        &self.unit_id
    }

    pub fn entries(&self) -> &[TracePoint] {
        &self.entries
    }

    /// The prediction at grid time `t_k`, if one exists within grid tolerance.
    pub fn entry_at(&self, t_k: f64, grid: &TimeGrid) -> Option<&RulDistribution> {
        let tol = GRID_TOL_REL * grid.delta_t();
        let idx = self.entries.partition_point(|p| p.t < t_k - tol);
        let p = self.entries.get(idx)?;
        if (p.t - t_k).abs() <= tol {
            Some(&p.dist)
        } else {
            None
        }
    }
}

/// How a life-cycle ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementKind {
    Preventive,
    Corrective,
}

/// What a policy did to one unit: when the cycle ended, how, and the cost
/// components it induced. `c_m = c_rep + c_delay + c_stock` always holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleOutcome {
    pub unit_id: String,
    pub t_lc: f64,
    pub replacement_kind: ReplacementKind,
    pub c_rep: f64,
    pub t_order: Option<f64>,
    pub c_delay: f64,
    pub c_stock: f64,
    pub c_m: f64,
}

impl LifecycleOutcome {
    /// Outcome in the replacement-only setting: maintenance cost equals the
    /// replacement cost.
    pub fn replacement(
        unit_id: impl Into<String>,
        t_lc: f64,
        kind: ReplacementKind,
        c_rep: f64,
    ) -> Self {
        LifecycleOutcome {
            unit_id: unit_id.into(),
            t_lc,
            replacement_kind: kind,
            c_rep,
            t_order: None,
            c_delay: 0.0,
            c_stock: 0.0,
            c_m: c_rep,
        }
    }

    /// Outcome in the ordering-replacement setting. Delay cost accrues when
    /// the part arrives after the cycle ends, inventory cost when it arrives
    /// before; at most one of the two is positive.
    pub fn with_ordering(
        unit_id: impl Into<String>,
        t_lc: f64,
        kind: ReplacementKind,
        c_rep: f64,
        t_order: f64,
        costs: &CostModel,
    ) -> Self {
        let delivery = t_order + costs.lead_time;
        let c_delay = (delivery - t_lc).max(0.0) * costs.c_unav;
        let c_stock = (t_lc - delivery).max(0.0) * costs.c_inv;
        LifecycleOutcome {
            unit_id: unit_id.into(),
            t_lc,
            replacement_kind: kind,
            c_rep,
            t_order: Some(t_order),
            c_delay,
            c_stock,
            c_m: c_rep + c_delay + c_stock,
        }
    }
}
