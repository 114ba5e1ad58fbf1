//! Producer profit maximization, the Lagrangian dual of the dispatch problem,
//! and the two pricing rules (convex hull and marginal).

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AmendError, ModelError};
use crate::model::{MarketInstance, Schedule, StatusVector, UnitParams, UnitSchedule};

/// Market price or dual multiplier, one entry per period.
pub type PriceVector = Vec<f64>;

/// Best response of one unit to a price vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfitMax {
    /// `π^{st,+}(p)`.
    pub value: f64,
    /// Maximizing trajectories (corner solutions only).
    pub argmax_points: Vec<UnitSchedule>,
    /// Best profit and output for every feasible status vector.
    pub per_status: Vec<StatusProfit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatusProfit {
    pub u: StatusVector,
    /// `π^{st,max}(p, u)`.
    pub profit: f64,
    pub g: Vec<f64>,
}

/// `π^{st}(p, x) = pᵀg − C(x)` for the standard revenue.
pub fn standard_profit(unit: &UnitParams, p: &[f64], x: &UnitSchedule) -> f64 {
    let revenue: f64 = p.iter().zip(&x.g).map(|(p, g)| p * g).sum();
    revenue - unit.cost_unchecked(x)
}

fn best_given_status(unit: &UnitParams, p: &[f64], u: &[u8]) -> StatusProfit {
    let g: Vec<f64> = u
        .iter()
        .zip(p)
        .map(|(&s, &pt)| match s {
            0 => 0.0,
            _ if pt >= unit.marginal_cost => unit.g_max,
            _ => unit.g_min,
        })
        .collect();
    let x = UnitSchedule { u: u.to_vec(), g };
    StatusProfit {
        profit: standard_profit(unit, p, &x),
        u: x.u,
        g: x.g,
    }
}

/// `π^{st,+}(p)` by enumerating feasible status vectors with per-period corner outputs.
///
/// Statuses whose profit is within `tol` of the maximum all contribute an argmax point.
pub fn unit_profit_max(unit: &UnitParams, p: &[f64], tol: f64) -> ProfitMax {
    let per_status: Vec<StatusProfit> = unit
        .feasible_statuses(p.len())
        .iter()
        .map(|u| best_given_status(unit, p, u))
        .collect();
    let value = per_status
        .iter()
        .map(|s| s.profit)
        .fold(f64::NEG_INFINITY, f64::max);
    let argmax_points = per_status
        .iter()
        .filter(|s| s.profit >= value - tol)
        .map(|s| UnitSchedule {
            u: s.u.clone(),
            g: s.g.clone(),
        })
        .collect();
    ProfitMax {
        value,
        argmax_points,
        per_status,
    }
}

/// `π^{st,max}(p, u)`: the best standard profit with the status vector fixed.
pub fn profit_given_status(unit: &UnitParams, p: &[f64], u: &[u8]) -> Result<f64, AmendError> {
    if u.len() != p.len() || !unit.status_feasible(u) {
        return Err(AmendError::InfeasibleStatus(u.to_vec()));
    }
    Ok(best_given_status(unit, p, u).profit)
}

/// `qᵀd − Σ_i π_i^{st,+}(q)`.
pub fn dual_function(instance: &MarketInstance, q: &[f64]) -> f64 {
    let tol = instance.tolerances.opt_tol;
    let demand: f64 = q.iter().zip(&instance.demand).map(|(q, d)| q * d).sum();
    // collected before summing so the result does not depend on the thread split
    let profits: Vec<f64> = instance
        .units
        .par_iter()
        .map(|unit| unit_profit_max(unit, q, tol).value)
        .collect();
    demand - profits.iter().sum::<f64>()
}

/// One subgradient of the dual at `q`: `d − Σ_i g_i^+(q)`.
fn dual_subgradient(instance: &MarketInstance, q: &[f64]) -> Vec<f64> {
    let tol = instance.tolerances.opt_tol;
    let mut s = instance.demand.clone();
    for unit in &instance.units {
        let best = unit_profit_max(unit, q, tol);
        // first maximizer in enumeration order keeps the choice deterministic
        let x = &best.argmax_points[0];
        for (st, g) in s.iter_mut().zip(&x.g) {
            *st -= g;
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChpResult {
    pub price: PriceVector,
    pub dual_value: f64,
    /// Always true for single-period markets, where the price is exact.
    pub converged: bool,
    pub iterations: usize,
}

pub const SUBGRADIENT_ITERATIONS: usize = 10_000;
const SUBGRADIENT_WINDOW: usize = 100;

/// Candidate prices where the single-period dual can change slope.
fn breakpoints(units: &[UnitParams]) -> Vec<f64> {
    let mut q: Vec<f64> = vec![0.0];
    for unit in units {
        q.push(unit.marginal_cost);
        q.push(unit.break_even_price());
    }
    q.retain(|v| v.is_finite() && *v >= 0.0);
    q.sort_by(f64::total_cmp);
    q.dedup();
    q
}

fn scan_period(instance: &MarketInstance, t: usize) -> (f64, f64) {
    let single = MarketInstance {
        periods: 1,
        demand: vec![instance.demand[t]],
        units: instance
            .units
            .iter()
            .map(|u| UnitParams {
                min_up: 0,
                min_down: 0,
                ..u.clone()
            })
            .collect(),
        tolerances: instance.tolerances,
    };
    let values: Vec<(f64, f64)> = breakpoints(&single.units)
        .into_iter()
        .map(|q| (q, dual_function(&single, &[q])))
        .collect();
    let best = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let eq = instance.tolerances.eq_tol;
    *values
        .iter()
        .find(|v| v.1 >= best - eq)
        .expect("breakpoint set is never empty")
}

/// Convex-hull price: a maximizer of the dual function.
///
/// Single period: exact scan over the dual's breakpoints, smallest maximizer on
/// ties. Several periods: projected subgradient ascent from the per-period scan,
/// step `1/k` along the normalized subgradient, best iterate returned.
pub fn convex_hull_price(instance: &MarketInstance) -> ChpResult {
    if instance.periods == 1 {
        let (q, v) = scan_period(instance, 0);
        return ChpResult {
            price: vec![q],
            dual_value: v,
            converged: true,
            iterations: 0,
        };
    }
    let mut q: Vec<f64> = (0..instance.periods)
        .map(|t| scan_period(instance, t).0)
        .collect();
    let mut best_q = q.clone();
    let mut best_v = dual_function(instance, &q);
    let mut history = vec![best_v];
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=SUBGRADIENT_ITERATIONS {
        iterations = k;
        let s = dual_subgradient(instance, &q);
        let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= instance.tolerances.eq_tol {
            converged = true;
            break;
        }
        let step = 1.0 / k as f64;
        for (qt, st) in q.iter_mut().zip(&s) {
            *qt = (*qt + step * st / norm).max(0.0);
        }
        let v = dual_function(instance, &q);
        if v > best_v {
            best_v = v;
            best_q.clone_from(&q);
        }
        history.push(best_v);
    }
    if !converged && history.len() > SUBGRADIENT_WINDOW {
        let n = history.len();
        converged =
            history[n - 1] - history[n - 1 - SUBGRADIENT_WINDOW] < instance.tolerances.opt_tol;
    }
    ChpResult {
        price: best_q,
        dual_value: best_v,
        converged,
        iterations,
    }
}

/// Dual price of the fixed-commitment dispatch, per period.
///
/// The last unit in merit order (marginal cost, then index) that sits strictly
/// above its minimum sets the price. When every online unit is at its minimum,
/// the cheapest such unit sets it; with nothing online the price is 0.
pub fn marginal_price(
    instance: &MarketInstance,
    x_star: &Schedule,
) -> Result<PriceVector, ModelError> {
    x_star.validate(instance)?;
    let tol = instance.tolerances.eq_tol;
    let mut order: Vec<usize> = (0..instance.units.len()).collect();
    order.sort_by(|&i, &j| {
        instance.units[i]
            .marginal_cost
            .total_cmp(&instance.units[j].marginal_cost)
            .then(i.cmp(&j))
    });
    Ok((0..instance.periods)
        .map(|t| {
            let online: Vec<usize> = order
                .iter()
                .copied()
                .filter(|&i| x_star.units[i].u[t] == 1)
                .collect();
            let unit = |i: usize| &instance.units[i];
            if let Some(&i) = online
                .iter()
                .rev()
                .find(|&&i| x_star.units[i].g[t] > unit(i).g_min + tol)
            {
                return unit(i).marginal_cost;
            }
            if let Some(&i) = online
                .iter()
                .find(|&&i| unit(i).g_max > unit(i).g_min + tol)
            {
                return unit(i).marginal_cost;
            }
            online.first().map_or(0.0, |&i| unit(i).marginal_cost)
        })
        .collect())
}
