//! Market data: generating units, demand, schedules and the per-unit feasible sets.
//!
//! A unit's private feasible set `X_i` is the set of `(u, g)` trajectories with
//! binary statuses that respect minimum up/down times and outputs inside
//! `[u·g_min, u·g_max]` in every period.

mod file;
mod lattice;

pub use file::{load_instance, parse_instance, InstanceFile, UnitTypeEntry};
pub use lattice::{feasible_set_samples, GRID_POINTS};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A binary commitment trajectory, one entry per period.
pub type StatusVector = Vec<u8>;

/// Comparison tolerances shared by every numerical check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Coordinate equality (delta nodes, power balance).
    pub eq_tol: f64,
    /// Optimality and duality comparisons.
    pub opt_tol: f64,
    /// Decimal places used for human-readable output.
    pub report_digits: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eq_tol: 1e-7,
            opt_tol: 1e-6,
            report_digits: 4,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.eq_tol) || !ok(self.opt_tol) || self.report_digits == 0 {
            return Err(ModelError::InvalidInstance(format!(
                "tolerances must be strictly positive (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Whether a unit is described by `(u, g)` or by its output alone with `u = θ(g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Formulation {
    #[default]
    #[serde(rename = "xu")]
    StatusOutput,
    #[serde(rename = "g")]
    OutputOnly,
}

/// Offer data for a single generating unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitParams {
    pub id: String,
    /// Name of the unit type this unit was expanded from.
    pub kind: String,
    pub g_min: f64,
    pub g_max: f64,
    pub marginal_cost: f64,
    pub startup_cost: f64,
    pub initial_status: u8,
    pub min_up: usize,
    pub min_down: usize,
}

impl UnitParams {
    /// A unit with no minimum up/down times, initially offline.
    pub fn new(
        id: impl Into<String>,
        g_min: f64,
        g_max: f64,
        marginal_cost: f64,
        startup_cost: f64,
    ) -> Self {
        let id = id.into();
        Self {
            kind: id.clone(),
            id,
            g_min,
            g_max,
            marginal_cost,
            startup_cost,
            initial_status: 0,
            min_up: 0,
            min_down: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &'static str, reason: String| ModelError::InvalidUnit {
            unit: self.id.clone(),
            field,
            reason,
        };
        for (field, v) in [
            ("g_min", self.g_min),
            ("g_max", self.g_max),
            ("marginal_cost", self.marginal_cost),
            ("startup_cost", self.startup_cost),
        ] {
            if !v.is_finite() {
                return Err(bad(field, format!("{v} is not finite")));
            }
        }
        if self.g_min < 0.0 {
            return Err(bad("g_min", format!("{} is negative", self.g_min)));
        }
        if self.g_max <= 0.0 {
            return Err(bad("g_max", format!("{} must be positive", self.g_max)));
        }
        if self.g_min > self.g_max {
            return Err(bad(
                "g_min",
                format!("{} exceeds g_max = {}", self.g_min, self.g_max),
            ));
        }
        if self.marginal_cost < 0.0 {
            return Err(bad(
                "marginal_cost",
                format!("{} is negative", self.marginal_cost),
            ));
        }
        if self.startup_cost < 0.0 {
            return Err(bad(
                "startup_cost",
                format!("{} is negative", self.startup_cost),
            ));
        }
        if self.initial_status > 1 {
            return Err(bad(
                "initial_status",
                format!("{} is not 0 or 1", self.initial_status),
            ));
        }
        Ok(())
    }

    /// Parameters that make two units interchangeable in dispatch.
    pub(crate) fn same_offer(&self, other: &UnitParams) -> bool {
        self.g_min == other.g_min
            && self.g_max == other.g_max
            && self.marginal_cost == other.marginal_cost
            && self.startup_cost == other.startup_cost
            && self.initial_status == other.initial_status
            && self.min_up == other.min_up
            && self.min_down == other.min_down
    }

    /// Price above which running at full output is at least as good as staying off
    /// (single period, initially offline).
    pub fn break_even_price(&self) -> f64 {
        self.marginal_cost + self.startup_cost / self.g_max
    }

    /// Whether a status trajectory respects minimum up/down times.
    ///
    /// The unit is assumed to have held its initial status long enough that no
    /// residual up/down obligation carries into the horizon.
    pub fn status_feasible(&self, u: &[u8]) -> bool {
        if u.iter().any(|&s| s > 1) {
            return false;
        }
        let mut prev = self.initial_status;
        for t in 0..u.len() {
            if u[t] != prev {
                let (hold, value) = if u[t] == 1 {
                    (self.min_up, 1)
                } else {
                    (self.min_down, 0)
                };
                let end = (t + hold).min(u.len());
                if u[t..end].iter().any(|&s| s != value) {
                    return false;
                }
            }
            prev = u[t];
        }
        true
    }

    /// All feasible status vectors over `periods`, in ascending binary order
    /// (period 1 is the most significant digit).
    pub fn feasible_statuses(&self, periods: usize) -> Vec<StatusVector> {
        assert!(
            periods < 32,
            "status enumeration is limited to fewer than 32 periods"
        );
        (0u32..(1u32 << periods))
            .map(|bits| {
                (0..periods)
                    .map(|t| ((bits >> (periods - 1 - t)) & 1) as u8)
                    .collect::<StatusVector>()
            })
            .filter(|u| self.status_feasible(u))
            .collect()
    }

    /// Number of 0→1 transitions, counting from the initial status.
    pub fn startups(&self, u: &[u8]) -> usize {
        let mut prev = self.initial_status;
        let mut count = 0;
        for &s in u {
            if s == 1 && prev == 0 {
                count += 1;
            }
            prev = s;
        }
        count
    }

    /// Membership of a per-unit trajectory in `X_i`, with bounds checked to `tol`.
    pub fn check_schedule(
        &self,
        x: &UnitSchedule,
        periods: usize,
        tol: f64,
    ) -> Result<(), ModelError> {
        let fail = |reason: String| ModelError::InfeasibleSchedule {
            unit: self.id.clone(),
            reason,
        };
        if x.u.len() != periods || x.g.len() != periods {
            return Err(fail(format!(
                "expected {periods} periods, got u:{} g:{}",
                x.u.len(),
                x.g.len()
            )));
        }
        if !self.status_feasible(&x.u) {
            return Err(fail(format!(
                "status vector {:?} violates min up/down times",
                x.u
            )));
        }
        for t in 0..periods {
            let u = f64::from(x.u[t]);
            let g = x.g[t];
            if !g.is_finite() || g < u * self.g_min - tol || g > u * self.g_max + tol {
                return Err(fail(format!(
                    "output {g} in period {} outside [{}, {}]",
                    t + 1,
                    u * self.g_min,
                    u * self.g_max
                )));
            }
        }
        Ok(())
    }

    /// Offer cost of a trajectory, without feasibility checks.
    pub fn cost_unchecked(&self, x: &UnitSchedule) -> f64 {
        let energy: f64 = x.g.iter().map(|g| self.marginal_cost * g).sum();
        energy + self.startup_cost * self.startups(&x.u) as f64
    }
}

/// Offer cost `Σ_t a·g_t + w·startup_t` of a feasible trajectory.
pub fn cost(
    unit: &UnitParams,
    x: &UnitSchedule,
    periods: usize,
    tol: f64,
) -> Result<f64, ModelError> {
    unit.check_schedule(x, periods, tol)?;
    Ok(unit.cost_unchecked(x))
}

/// Status and output trajectory of one unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSchedule {
    pub u: StatusVector,
    pub g: Vec<f64>,
}

impl UnitSchedule {
    pub fn offline(periods: usize) -> Self {
        Self {
            u: vec![0; periods],
            g: vec![0.0; periods],
        }
    }

    /// Single-period point `(u, g)`.
    pub fn point(u: u8, g: f64) -> Self {
        Self {
            u: vec![u],
            g: vec![g],
        }
    }

    pub fn periods(&self) -> usize {
        self.u.len()
    }

    /// Coordinatewise equality within `tol`.
    pub fn approx_eq(&self, other: &UnitSchedule, tol: f64) -> bool {
        self.u == other.u
            && self.g.len() == other.g.len()
            && self
                .g
                .iter()
                .zip(&other.g)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Complete dispatch: one trajectory per unit, aligned with `MarketInstance::units`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub units: Vec<UnitSchedule>,
}

impl Schedule {
    pub fn all_offline(instance: &MarketInstance) -> Self {
        Self {
            units: vec![UnitSchedule::offline(instance.periods); instance.units.len()],
        }
    }

    /// Total output in period `t`.
    pub fn supply(&self, t: usize) -> f64 {
        self.units.iter().map(|x| x.g[t]).sum()
    }

    /// `{ "unit_id": { "u": [..], "g": [..] } }`, in unit order.
    pub fn to_json(&self, instance: &MarketInstance) -> serde_json::Value {
        let map: indexmap::IndexMap<&str, &UnitSchedule> = instance
            .units
            .iter()
            .zip(&self.units)
            .map(|(unit, x)| (unit.id.as_str(), x))
            .collect();
        serde_json::to_value(map).expect("schedule serialization is infallible")
    }

    /// Parse a schedule file against an instance; every unit must appear exactly once.
    pub fn parse(text: &str, instance: &MarketInstance) -> Result<Self, ModelError> {
        let mut map: indexmap::IndexMap<String, UnitSchedule> = serde_json::from_str(text)?;
        let mut units = Vec::with_capacity(instance.units.len());
        for unit in &instance.units {
            let x = map.shift_remove(&unit.id).ok_or_else(|| {
                ModelError::InvalidInstance(format!("schedule has no entry for unit `{}`", unit.id))
            })?;
            unit.check_schedule(&x, instance.periods, instance.tolerances.eq_tol)?;
            units.push(x);
        }
        if let Some(extra) = map.keys().next() {
            return Err(ModelError::InvalidInstance(format!(
                "schedule names unknown unit `{extra}`"
            )));
        }
        Ok(Self { units })
    }

    /// Checks membership of every trajectory and power balance.
    pub fn validate(&self, instance: &MarketInstance) -> Result<(), ModelError> {
        if self.units.len() != instance.units.len() {
            return Err(ModelError::InvalidInstance(format!(
                "schedule has {} units, instance has {}",
                self.units.len(),
                instance.units.len()
            )));
        }
        let tol = instance.tolerances.eq_tol;
        for (unit, x) in instance.units.iter().zip(&self.units) {
            unit.check_schedule(x, instance.periods, tol)?;
        }
        for t in 0..instance.periods {
            let supply = self.supply(t);
            if (supply - instance.demand[t]).abs() > tol * (1.0 + instance.demand[t]) {
                return Err(ModelError::InvalidInstance(format!(
                    "period {}: supply {supply} does not match demand {}",
                    t + 1,
                    instance.demand[t]
                )));
            }
        }
        Ok(())
    }
}

/// A `T`-period single-node market with fixed demand.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketInstance {
    pub periods: usize,
    pub demand: Vec<f64>,
    pub units: Vec<UnitParams>,
    pub tolerances: ToleranceConfig,
}

impl MarketInstance {
    pub fn new(demand: Vec<f64>, units: Vec<UnitParams>) -> Result<Self, ModelError> {
        let instance = Self {
            periods: demand.len(),
            demand,
            units,
            tolerances: ToleranceConfig::default(),
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn with_tolerances(mut self, tolerances: ToleranceConfig) -> Result<Self, ModelError> {
        tolerances.validate()?;
        self.tolerances = tolerances;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.periods == 0 {
            return Err(ModelError::InvalidInstance(
                "periods must be at least 1".into(),
            ));
        }
        if self.periods >= 32 {
            return Err(ModelError::InvalidInstance(format!(
                "{} periods is beyond the supported horizon",
                self.periods
            )));
        }
        if self.demand.len() != self.periods {
            return Err(ModelError::InvalidInstance(format!(
                "demand has {} entries for {} periods",
                self.demand.len(),
                self.periods
            )));
        }
        if let Some((t, d)) = self
            .demand
            .iter()
            .enumerate()
            .find(|(_, d)| !d.is_finite() || **d < 0.0)
        {
            return Err(ModelError::InvalidInstance(format!(
                "demand in period {} is {d}; it must be finite and non-negative",
                t + 1
            )));
        }
        self.tolerances.validate()?;
        let mut seen = std::collections::HashSet::new();
        for unit in &self.units {
            unit.validate()?;
            if !seen.insert(unit.id.as_str()) {
                return Err(ModelError::InvalidInstance(format!(
                    "duplicate unit id `{}`",
                    unit.id
                )));
            }
        }
        let capacity: f64 = self.units.iter().map(|u| u.g_max).sum();
        for (t, &d) in self.demand.iter().enumerate() {
            if capacity < d {
                return Err(ModelError::InvalidInstance(format!(
                    "period {}: demand {d} exceeds total capacity {capacity}",
                    t + 1
                )));
            }
        }
        Ok(())
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u.id == id)
    }
}
