//! One producer facing a fixed price: its dispatched point, best response,
//! and the evaluation lattice on which all "for every feasible point"
//! conditions are decided.

use crate::error::AmendError;
use crate::expr::Expr;
use crate::model::{feasible_set_samples, Formulation, ToleranceConfig, UnitParams, UnitSchedule};
use crate::pricing::{standard_profit, unit_profit_max, PriceVector, ProfitMax};

/// Revenue side of the producer's profit.
#[derive(Debug, Clone, PartialEq)]
pub enum Revenue {
    /// `pᵀg`.
    Standard,
    /// An arbitrary revenue function of the unit's trajectory.
    Custom(Expr),
}

#[derive(Debug, Clone)]
pub struct ProducerView {
    unit: UnitParams,
    price: PriceVector,
    revenue: Revenue,
    formulation: Formulation,
    tol: ToleranceConfig,
    x_star: UnitSchedule,
    pi_star: f64,
    best: ProfitMax,
    lattice: Vec<UnitSchedule>,
    profits: Vec<f64>,
}

fn output_determines_status(x: &UnitSchedule) -> bool {
    x.u.iter().zip(&x.g).all(|(&u, &g)| (u == 1) == (g > 0.0))
}

impl ProducerView {
    pub fn new(
        unit: &UnitParams,
        price: &[f64],
        x_star: &UnitSchedule,
        formulation: Formulation,
        tol: ToleranceConfig,
    ) -> Result<Self, AmendError> {
        Self::with_revenue(unit, price, x_star, formulation, tol, Revenue::Standard)
    }

    pub fn with_revenue(
        unit: &UnitParams,
        price: &[f64],
        x_star: &UnitSchedule,
        formulation: Formulation,
        tol: ToleranceConfig,
        revenue: Revenue,
    ) -> Result<Self, AmendError> {
        unit.validate()?;
        let periods = price.len();
        if periods == 0 || price.iter().any(|p| !p.is_finite()) {
            return Err(AmendError::Precondition(format!(
                "price vector {price:?} must be non-empty and finite"
            )));
        }
        unit.check_schedule(x_star, periods, tol.eq_tol)?;
        if formulation == Formulation::OutputOnly && !output_determines_status(x_star) {
            return Err(AmendError::Unsupported(format!(
                "dispatched point of `{}` has a status its output does not imply",
                unit.id
            )));
        }
        let closed_form = unit_profit_max(unit, price, tol.opt_tol);
        let mut anchors = vec![x_star.clone()];
        anchors.extend(closed_form.argmax_points.iter().cloned());
        let lattice = feasible_set_samples(unit, periods, formulation, &anchors, tol.eq_tol);
        let profit = |x: &UnitSchedule| match &revenue {
            Revenue::Standard => standard_profit(unit, price, x),
            Revenue::Custom(r) => r.eval(x, tol.eq_tol) - unit.cost_unchecked(x),
        };
        let profits: Vec<f64> = lattice.iter().map(profit).collect();
        let pi_star = profit(x_star);

        let exact = revenue == Revenue::Standard && formulation == Formulation::StatusOutput;
        let best = if exact {
            closed_form
        } else {
            let value = profits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let argmax_points = lattice
                .iter()
                .zip(&profits)
                .filter(|(_, v)| **v >= value - tol.opt_tol)
                .map(|(x, _)| x.clone())
                .collect();
            let per_status = closed_form
                .per_status
                .into_iter()
                .filter_map(|mut s| {
                    let (x, v) = lattice
                        .iter()
                        .zip(&profits)
                        .filter(|(x, _)| x.u == s.u)
                        .max_by(|a, b| a.1.total_cmp(b.1))?;
                    s.profit = *v;
                    s.g.clone_from(&x.g);
                    Some(s)
                })
                .collect();
            ProfitMax {
                value,
                argmax_points,
                per_status,
            }
        };
        Ok(Self {
            unit: unit.clone(),
            price: price.to_vec(),
            revenue,
            formulation,
            tol,
            x_star: x_star.clone(),
            pi_star,
            best,
            lattice,
            profits,
        })
    }

    pub fn unit(&self) -> &UnitParams {
        &self.unit
    }

    pub fn price(&self) -> &[f64] {
        &self.price
    }

    pub fn periods(&self) -> usize {
        self.price.len()
    }

    pub fn revenue(&self) -> &Revenue {
        &self.revenue
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn tol(&self) -> ToleranceConfig {
        self.tol
    }

    pub fn x_star(&self) -> &UnitSchedule {
        &self.x_star
    }

    /// `π^{st,*}(p)`: profit at the dispatched point.
    pub fn pi_star(&self) -> f64 {
        self.pi_star
    }

    /// `π^{st,+}(p)`: best attainable profit.
    pub fn pi_plus(&self) -> f64 {
        self.best.value
    }

    /// `π^{st,+} − π^{st,*}`, clamped to 0 when within `opt_tol`.
    pub fn uplift(&self) -> f64 {
        let u = self.pi_plus() - self.pi_star;
        if u.abs() <= self.tol.opt_tol {
            0.0
        } else {
            u
        }
    }

    pub fn profit_max(&self) -> &ProfitMax {
        &self.best
    }

    pub fn argmax_points(&self) -> &[UnitSchedule] {
        &self.best.argmax_points
    }

    /// `π^{st,max}(p, u)` for a feasible status vector.
    pub fn status_profit(&self, u: &[u8]) -> Option<f64> {
        self.best
            .per_status
            .iter()
            .find(|s| s.u == u)
            .map(|s| s.profit)
    }

    pub fn lattice(&self) -> &[UnitSchedule] {
        &self.lattice
    }

    /// `π^{st}(p, x)` at each lattice point.
    pub fn profits(&self) -> &[f64] {
        &self.profits
    }

    pub fn profit(&self, x: &UnitSchedule) -> f64 {
        match &self.revenue {
            Revenue::Standard => standard_profit(&self.unit, &self.price, x),
            Revenue::Custom(r) => r.eval(x, self.tol.eq_tol) - self.unit.cost_unchecked(x),
        }
    }

    pub fn eval(&self, e: &Expr, x: &UnitSchedule) -> f64 {
        e.eval(x, self.tol.eq_tol)
    }

    pub fn eval_on_lattice(&self, e: &Expr) -> Vec<f64> {
        self.lattice
            .iter()
            .map(|x| e.eval(x, self.tol.eq_tol))
            .collect()
    }

    /// Lattice values of each constraint, failing if any is positive beyond `eq_tol`.
    pub fn redundant_values(&self, rho: &[Expr]) -> Result<Vec<Vec<f64>>, AmendError> {
        rho.iter()
            .enumerate()
            .map(|(l, r)| {
                let values = self.eval_on_lattice(r);
                if let Some(v) = values
                    .iter()
                    .copied()
                    .find(|v| *v > self.tol.eq_tol || v.is_nan())
                {
                    return Err(AmendError::NotRedundant { index: l, value: v });
                }
                Ok(values)
            })
            .collect()
    }

    pub(crate) fn check_multipliers(&self, rho: &[Expr], mu: &[f64]) -> Result<(), AmendError> {
        if mu.len() != rho.len() || mu.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(AmendError::BadMultipliers(mu.to_vec()));
        }
        Ok(())
    }
}
