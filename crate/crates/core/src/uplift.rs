//! Uplift payments, with and without a redundant-constraint amendment.

use serde::Serialize;

use crate::error::{AmendError, ModelError};
use crate::expr::Expr;
use crate::model::{MarketInstance, Schedule};
use crate::pricing::{standard_profit, unit_profit_max};
use crate::producer::ProducerView;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitUplift {
    pub unit_id: String,
    pub pi_star: f64,
    pub pi_plus: f64,
    pub uplift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpliftReport {
    pub units: Vec<UnitUplift>,
    pub total: f64,
}

impl UpliftReport {
    /// CSV with header `unit_id,pi_star,pi_plus,uplift`, full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("unit_id,pi_star,pi_plus,uplift\n");
        for u in &self.units {
            out.push_str(&format!(
                "{},{},{},{}\n",
                u.unit_id, u.pi_star, u.pi_plus, u.uplift
            ));
        }
        out
    }

    pub fn get(&self, unit_id: &str) -> Option<&UnitUplift> {
        self.units.iter().find(|u| u.unit_id == unit_id)
    }
}

/// Per-unit lost profit `π^{st,+}(p) − π^{st,*}(p)` at the dispatched schedule.
pub fn uplift_report(
    instance: &MarketInstance,
    p: &[f64],
    x_star: &Schedule,
) -> Result<UpliftReport, ModelError> {
    if p.len() != instance.periods {
        return Err(ModelError::InvalidInstance(format!(
            "price has {} entries for {} periods",
            p.len(),
            instance.periods
        )));
    }
    x_star.validate(instance)?;
    let tol = instance.tolerances.opt_tol;
    let units: Vec<UnitUplift> = instance
        .units
        .iter()
        .zip(&x_star.units)
        .map(|(unit, x)| {
            let pi_star = standard_profit(unit, p, x);
            let pi_plus = unit_profit_max(unit, p, tol).value;
            let raw = pi_plus - pi_star;
            UnitUplift {
                unit_id: unit.id.clone(),
                pi_star,
                pi_plus,
                uplift: if raw.abs() <= tol { 0.0 } else { raw },
            }
        })
        .collect();
    let total = units.iter().map(|u| u.uplift).sum();
    Ok(UpliftReport { units, total })
}

/// `Σ_l μ_l ρ_l` at each lattice point.
pub(crate) fn weighted(values: &[Vec<f64>], mu: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (row, m) in values.iter().zip(mu) {
        if *m == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(row) {
            *o += m * v;
        }
    }
    out
}

fn dot_at_star(view: &ProducerView, rho: &[Expr], mu: &[f64]) -> f64 {
    rho.iter()
        .zip(mu)
        .map(|(r, m)| m * view.eval(r, view.x_star()))
        .sum()
}

/// `U(p, μ) = max_x [π^{st} − μᵀρ] − [π^{st}(x*) − μᵀρ(x*)]`.
pub fn amended_uplift(view: &ProducerView, rho: &[Expr], mu: &[f64]) -> Result<f64, AmendError> {
    view.check_multipliers(rho, mu)?;
    let values = view.redundant_values(rho)?;
    let dot = weighted(&values, mu, view.lattice().len());
    let at_star = view.pi_star() - dot_at_star(view, rho, mu);
    let best = view
        .profits()
        .iter()
        .zip(&dot)
        .map(|(pi, d)| pi - d)
        .fold(at_star, f64::max);
    Ok(best - at_star)
}

/// Whether `μ ∈ M^+(p)`: amending by `−μᵀρ` does not raise the best profit.
pub fn in_m_plus(view: &ProducerView, rho: &[Expr], mu: &[f64]) -> Result<bool, AmendError> {
    view.check_multipliers(rho, mu)?;
    let values = view.redundant_values(rho)?;
    Ok(member(view, &values, mu))
}

pub(crate) fn member(view: &ProducerView, values: &[Vec<f64>], mu: &[f64]) -> bool {
    let dot = weighted(values, mu, view.lattice().len());
    let bound = view.pi_plus();
    let tol = view.tol().opt_tol;
    view.profits()
        .iter()
        .zip(&dot)
        .all(|(pi, d)| *d >= pi - bound - tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinUplift {
    pub value: f64,
    pub mu: Vec<f64>,
    /// Coordinate ascent ended with positive uplift; the result may not be minimal.
    pub stalled: bool,
}

/// Largest `μ_l` keeping membership with the other coordinates fixed.
fn ratio_limit(view: &ProducerView, values: &[Vec<f64>], mu: &[f64], l: usize) -> f64 {
    let eq = view.tol().eq_tol;
    let bound = view.pi_plus();
    let mut rest = mu.to_vec();
    rest[l] = 0.0;
    let others = weighted(values, &rest, view.lattice().len());
    values[l]
        .iter()
        .zip(view.profits())
        .zip(&others)
        .filter(|((r, _), _)| **r < -eq)
        .map(|((r, pi), o)| (pi - bound - o) / r)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Minimum amended uplift over `M^+(p)` and a minimizing multiplier.
pub fn min_uplift(view: &ProducerView, rho: &[Expr]) -> Result<MinUplift, AmendError> {
    let values = view.redundant_values(rho)?;
    let eq = view.tol().eq_tol;
    let at_star: Vec<f64> = rho.iter().map(|r| view.eval(r, view.x_star())).collect();
    let mut mu = vec![0.0; rho.len()];
    if rho.len() == 1 {
        if at_star[0].abs() > eq {
            mu[0] = crate::redundant::mu_max_values(view, &values[0], 0)?;
        }
    } else {
        let mut corner = vec![0.0; rho.len()];
        for l in 0..rho.len() {
            if at_star[l] < -eq && values[l].iter().any(|v| v.abs() > eq) {
                corner[l] = crate::redundant::mu_max_values(view, &values[l], l)?;
            }
        }
        if member(view, &values, &corner) {
            mu = corner;
        } else {
            for _ in 0..50 {
                let mut changed = false;
                for l in 0..rho.len() {
                    if at_star[l] >= -eq {
                        continue;
                    }
                    let next = ratio_limit(view, &values, &mu, l);
                    if next.is_finite() && next > mu[l] + eq {
                        mu[l] = next;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }
    if !mu.iter().all(|m| m.is_finite()) {
        return Err(AmendError::Inconsistent(
            "unbounded multiplier on a constraint active at the dispatched point".into(),
        ));
    }
    let value = amended_uplift(view, rho, &mu)?;
    let value = if value.abs() <= view.tol().opt_tol {
        0.0
    } else {
        value
    };
    Ok(MinUplift {
        stalled: rho.len() > 1 && value > view.tol().opt_tol,
        value,
        mu,
    })
}
