use serde::Serialize;

use super::{verify_conditions, AmendmentBundle};
use crate::error::AmendError;
use crate::expr::Expr;
use crate::model::{Formulation, MarketInstance, Schedule};
use crate::producer::ProducerView;
use crate::report::{ConditionCheck, VerificationReport};

/// Price offsets at which the dual is re-evaluated with and without the
/// aggregate constraint.
pub const PERTURBATIONS: [f64; 5] = [-1.0, -0.1, 0.05, 0.1, 1.0];

/// The single coupling constraint `−Σ_i N_i(x_i) ≤ 0` with multiplier `ν`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateConstraint {
    pub terms: Vec<(String, Expr)>,
    pub nu: f64,
}

impl AggregateConstraint {
    /// `−Σ_i N_i(x_i)`.
    pub fn eval(&self, instance: &MarketInstance, x: &Schedule) -> f64 {
        let tol = instance.tolerances.eq_tol;
        -self
            .terms
            .iter()
            .map(|(id, n)| {
                instance
                    .unit_index(id)
                    .map_or(0.0, |i| n.eval(&x.units[i], tol))
            })
            .sum::<f64>()
    }
}

fn bundle_for<'a>(bundles: &'a [AmendmentBundle], id: &str) -> Option<&'a AmendmentBundle> {
    bundles.iter().find(|b| b.unit_id == id)
}

fn check_inputs(
    instance: &MarketInstance,
    p: &[f64],
    x_star: &Schedule,
    bundles: &[AmendmentBundle],
) -> Result<(), AmendError> {
    if p.len() != instance.periods {
        return Err(AmendError::Precondition(format!(
            "price has {} entries for {} periods",
            p.len(),
            instance.periods
        )));
    }
    x_star.validate(instance)?;
    if let Some(b) = bundles
        .iter()
        .find(|b| instance.unit_index(&b.unit_id).is_none())
    {
        return Err(AmendError::Precondition(format!(
            "bundle names unknown unit `{}`",
            b.unit_id
        )));
    }
    Ok(())
}

/// One view per unit at price `q`, using each bundle's formulation.
fn views<'a>(
    instance: &MarketInstance,
    q: &[f64],
    x_star: &Schedule,
    bundles: &'a [AmendmentBundle],
) -> Result<Vec<(ProducerView, Option<&'a AmendmentBundle>)>, AmendError> {
    instance
        .units
        .iter()
        .zip(&x_star.units)
        .map(|(unit, x)| {
            let b = bundle_for(bundles, &unit.id);
            let f = b.map_or(Formulation::StatusOutput, |b| b.formulation);
            Ok((ProducerView::new(unit, q, x, f, instance.tolerances)?, b))
        })
        .collect()
}

/// Best amended profit `max_x [π(q, x) + ν·N(x)]` on the view's lattice.
fn amended_max(view: &ProducerView, bundle: Option<&AmendmentBundle>, nu: f64) -> f64 {
    match bundle {
        Some(b) if nu != 0.0 => view
            .profits()
            .iter()
            .zip(view.eval_on_lattice(&b.n))
            .map(|(pi, n)| pi + nu * n)
            .fold(f64::NEG_INFINITY, f64::max),
        _ => view.pi_plus(),
    }
}

/// `qᵀd − Σ_i max_x [π_i(q, x) + ν·N_i(x)]`.
fn dual_value(
    instance: &MarketInstance,
    q: &[f64],
    parts: &[(ProducerView, Option<&AmendmentBundle>)],
    nu: f64,
) -> f64 {
    let demand: f64 = q.iter().zip(&instance.demand).map(|(q, d)| q * d).sum();
    demand
        - parts
            .iter()
            .map(|(v, b)| amended_max(v, *b, nu))
            .sum::<f64>()
}

/// Combine per-unit amendments into the aggregate constraint after checking
/// that each one pays the uplift, never exceeds the best profit, and is non-negative.
pub fn aggregate_constraint(
    instance: &MarketInstance,
    p: &[f64],
    x_star: &Schedule,
    bundles: &[AmendmentBundle],
) -> Result<AggregateConstraint, AmendError> {
    check_inputs(instance, p, x_star, bundles)?;
    let mut terms = Vec::new();
    for (view, b) in views(instance, p, x_star, bundles)? {
        let Some(b) = b else { continue };
        let report = verify_conditions(&view, b)?;
        if let Some(bad) = ["c2", "c3", "c4"].into_iter().find(|id| !report.holds(id)) {
            let c = report.get(bad).expect("check is always reported");
            return Err(AmendError::Precondition(format!(
                "amendment for `{}` fails {bad} ({} vs {})",
                b.unit_id, c.lhs, c.rhs
            )));
        }
        terms.push((b.unit_id.clone(), b.n.clone()));
    }
    Ok(AggregateConstraint { terms, nu: 1.0 })
}

/// Check that the amended market pays no uplift and that adding the
/// aggregate constraint leaves the dual unchanged, at `p` and nearby prices.
pub fn check_zero_total_uplift(
    instance: &MarketInstance,
    p: &[f64],
    x_star: &Schedule,
    bundles: &[AmendmentBundle],
) -> Result<VerificationReport, AmendError> {
    check_inputs(instance, p, x_star, bundles)?;
    let tol = instance.tolerances;
    let parts = views(instance, p, x_star, bundles)?;
    let mut report = VerificationReport::new("aggregate amendment");

    let mut before = 0.0;
    let mut after = 0.0;
    for (view, b) in &parts {
        before += view.uplift();
        let n_star = b.map_or(0.0, |b| view.eval(&b.n, view.x_star()));
        after += amended_max(view, *b, 1.0) - (view.pi_star() + n_star);
    }
    let after = if after.abs() <= tol.opt_tol {
        0.0
    } else {
        after
    };
    let bound = parts.len() as f64 * tol.opt_tol;
    report.push(
        ConditionCheck::new("zero_total_uplift", after <= bound, true, after, bound)
            .note("total amended uplift"),
    );
    report.push(
        ConditionCheck::new("uplift_before", true, false, before, 0.0)
            .note("total uplift without amendment"),
    );

    let plain = dual_value(instance, p, &parts, 0.0);
    let amended = dual_value(instance, p, &parts, 1.0);
    report.push(
        ConditionCheck::new(
            "dual_invariance",
            (plain - amended).abs() <= tol.opt_tol,
            true,
            amended,
            plain,
        )
        .note("dual at the market price with and without the aggregate constraint"),
    );

    let cost: f64 = instance
        .units
        .iter()
        .zip(&x_star.units)
        .map(|(u, x)| u.cost_unchecked(x))
        .sum();
    let balanced =
        (0..instance.periods).all(|t| (x_star.supply(t) - instance.demand[t]).abs() <= tol.eq_tol);
    let gap = cost - plain;
    report.push(
        ConditionCheck::new(
            "gap_equals_uplift",
            !balanced || (gap - before).abs() <= tol.opt_tol * (1.0 + parts.len() as f64),
            balanced,
            gap,
            before,
        )
        .note("duality gap at the dispatched schedule equals the total uplift"),
    );
    report.push(
        ConditionCheck::new(
            "gap_unchanged",
            ((cost - amended) - gap).abs() <= tol.opt_tol,
            true,
            cost - amended,
            gap,
        )
        .note("duality gap with the aggregate constraint"),
    );

    for delta in PERTURBATIONS {
        let q: Vec<f64> = p.iter().map(|v| v + delta).collect();
        let shifted = views(instance, &q, x_star, bundles)?;
        let plain = dual_value(instance, &q, &shifted, 0.0);
        let best =
            dual_value(instance, &q, &shifted, 0.0).max(dual_value(instance, &q, &shifted, 1.0));
        report.push(
            ConditionCheck::new(
                format!("dual_invariance{delta:+}"),
                (best - plain).abs() <= tol.opt_tol,
                true,
                best,
                plain,
            )
            .note("best dual over ν ∈ {0, 1} at a shifted price"),
        );
    }
    Ok(report)
}
