use super::{AmendmentBundle, Family};
use crate::error::AmendError;
use crate::expr::{c, delta_u, delta_x, g, theta, u, Expr};
use crate::model::Formulation;
use crate::producer::{ProducerView, Revenue};

/// Status of period `t`: `u_t`, or `θ(g_t)` when the status is implied by output.
pub fn status_expr(formulation: Formulation, t: usize) -> Expr {
    match formulation {
        Formulation::StatusOutput => u(t),
        Formulation::OutputOnly => theta(g(t)),
    }
}

/// `Σ_k c_k·e_k + constant`, dropping zero terms and unit coefficients.
fn lin(terms: Vec<(f64, Expr)>, constant: f64) -> Expr {
    let term = |k: f64, e: Expr| if k == 1.0 { e } else { e.scale(k) };
    let terms: Vec<(f64, Expr)> = terms.into_iter().filter(|(k, _)| *k != 0.0).collect();
    // a leading positive constant reads better than a leading negative term
    let lead = constant > 0.0 && terms.first().is_some_and(|(k, _)| *k < 0.0);
    let mut acc: Option<Expr> = lead.then(|| c(constant));
    let constant = if lead { 0.0 } else { constant };
    for (k, e) in terms {
        acc = Some(match acc {
            None => term(k, e),
            Some(a) if k < 0.0 => a.sub(term(-k, e)),
            Some(a) => a.add(term(k, e)),
        });
    }
    match (acc, constant) {
        (None, k) => c(k),
        (Some(a), k) if k == 0.0 => a,
        (Some(a), k) if k < 0.0 => a.sub(c(-k)),
        (Some(a), k) => a.add(c(k)),
    }
}

/// Offer cost `Σ_t a·g_t + w·u_t(1 − u_{t−1})` as an expression.
pub fn cost_expr(view: &ProducerView) -> Expr {
    let unit = view.unit();
    let f = view.formulation();
    let mut terms: Vec<(f64, Expr)> = (0..view.periods())
        .map(|t| (unit.marginal_cost, g(t)))
        .collect();
    terms.extend(startup_terms(view, unit.startup_cost, f));
    lin(terms, 0.0)
}

fn startup_terms(view: &ProducerView, w: f64, f: Formulation) -> Vec<(f64, Expr)> {
    let mut terms = Vec::new();
    for t in 0..view.periods() {
        let on = status_expr(f, t);
        if t == 0 {
            if view.unit().initial_status == 0 {
                terms.push((w, on));
            }
        } else {
            terms.push((w, on.clone()));
            terms.push((-w, on.mul(status_expr(f, t - 1))));
        }
    }
    terms
}

/// Profit `π^{st}(p, x)` as an expression.
pub fn profit_expr(view: &ProducerView) -> Expr {
    let unit = view.unit();
    match view.revenue() {
        Revenue::Standard => {
            let mut terms: Vec<(f64, Expr)> = view
                .price()
                .iter()
                .enumerate()
                .map(|(t, p)| (p - unit.marginal_cost, g(t)))
                .collect();
            terms.extend(
                startup_terms(view, unit.startup_cost, view.formulation())
                    .into_iter()
                    .map(|(k, e)| (-k, e)),
            );
            lin(terms, 0.0)
        }
        Revenue::Custom(r) => r.clone().sub(cost_expr(view)),
    }
}

fn bundle(
    view: &ProducerView,
    n: Expr,
    rho: Vec<Expr>,
    mu: Vec<f64>,
    family: Family,
) -> AmendmentBundle {
    AmendmentBundle {
        unit_id: view.unit().id.clone(),
        n,
        rho,
        mu,
        family,
        formulation: view.formulation(),
    }
}

/// The uplift itself as an amendment: `N = δ_{x,x*}·(π^{st,+} − π^{st,*})`.
pub fn build_uplift_delta(view: &ProducerView) -> AmendmentBundle {
    let lost = view.uplift();
    let d = delta_x(view.x_star());
    let n = if lost == 0.0 {
        c(0.0)
    } else {
        d.clone().scale(lost)
    };
    bundle(view, n, vec![d.neg()], vec![lost], Family::UpliftDelta)
}

/// `N = π^{st,+} − π^{st}(p, x)`: the producer earns its best profit everywhere.
pub fn build_constant_profit(view: &ProducerView) -> AmendmentBundle {
    let n = c(view.pi_plus()).sub(profit_expr(view));
    AmendmentBundle::from_amendment(
        &view.unit().id,
        n,
        Family::ConstantProfit,
        view.formulation(),
    )
}

/// `N = min[π^{st,+} − π^{st}(p, x), δ_{x,x*}(π^{st,+} − π^{st,*}) + γ]` for `γ ≥ 0`.
pub fn build_general_form(
    view: &ProducerView,
    gamma: &Expr,
) -> Result<AmendmentBundle, AmendError> {
    let tol = view.tol();
    for x in view.lattice() {
        let v = view.eval(gamma, x);
        if v < -tol.eq_tol || v.is_nan() {
            return Err(AmendError::NegativeGamma { value: v });
        }
    }
    let cap = c(view.pi_plus()).sub(profit_expr(view));
    let lost = view.uplift();
    let floor = if lost == 0.0 {
        gamma.clone()
    } else {
        delta_x(view.x_star()).scale(lost).add(gamma.clone())
    };
    let n = Expr::min_of(vec![cap, floor]);
    Ok(AmendmentBundle::from_amendment(
        &view.unit().id,
        n,
        Family::GeneralForm,
        view.formulation(),
    ))
}

/// `Π_t u_t^{w_t}(1 − u_t)^{1−w_t}`: indicator of status vector `w` in product form.
fn status_indicator(view: &ProducerView, w: &[u8]) -> Expr {
    let f = view.formulation();
    let factors: Vec<Expr> = w
        .iter()
        .enumerate()
        .map(|(t, &s)| {
            if s == 1 {
                status_expr(f, t)
            } else {
                c(1.0).sub(status_expr(f, t))
            }
        })
        .collect();
    if factors.len() == 1 {
        factors.into_iter().next().unwrap()
    } else {
        Expr::Mul(factors)
    }
}

fn require_status_optimal(view: &ProducerView) -> Result<(), AmendError> {
    let best_here = view
        .status_profit(&view.x_star().u)
        .ok_or_else(|| AmendError::InfeasibleStatus(view.x_star().u.clone()))?;
    if (view.pi_star() - best_here).abs() > view.tol().opt_tol {
        return Err(AmendError::MarginalPricingPrecondition {
            pi_star: view.pi_star(),
            pi_status_max: best_here,
        });
    }
    Ok(())
}

/// `N = δ_{u,u*}(π^{st,+} − π^{st,*})`; valid when the dispatched output is
/// already optimal for the dispatched status (as under marginal pricing).
pub fn build_status_delta(view: &ProducerView) -> Result<AmendmentBundle, AmendError> {
    require_status_optimal(view)?;
    let lost = view.uplift();
    let u_star = &view.x_star().u;
    let n = if lost == 0.0 {
        c(0.0)
    } else {
        delta_u(u_star).scale(lost)
    };
    let rho = vec![status_indicator(view, u_star).neg()];
    Ok(bundle(view, n, rho, vec![lost], Family::StatusDelta))
}

/// `N = π^{st,+} − π^{st,max}(p, u)`, one indicator constraint per feasible status vector.
pub fn build_status_profile(view: &ProducerView) -> Result<AmendmentBundle, AmendError> {
    require_status_optimal(view)?;
    let best = view.pi_plus();
    let mut rho = Vec::new();
    let mut mu = Vec::new();
    let mut terms = Vec::new();
    for s in &view.profit_max().per_status {
        let m = (best - s.profit).max(0.0);
        let m = if m <= view.tol().opt_tol { 0.0 } else { m };
        rho.push(delta_u(&s.u).neg());
        mu.push(m);
        if m > 0.0 {
            terms.push(delta_u(&s.u).scale(m));
        }
    }
    Ok(bundle(
        view,
        Expr::sum(terms),
        rho,
        mu,
        Family::StatusProfile,
    ))
}

fn require_single_period_offline(view: &ProducerView) -> Result<(), AmendError> {
    if view.periods() != 1 {
        return Err(AmendError::SettingViolated(format!(
            "{} periods",
            view.periods()
        )));
    }
    if view.unit().initial_status != 0 {
        return Err(AmendError::SettingViolated(format!(
            "unit `{}` starts online",
            view.unit().id
        )));
    }
    if *view.revenue() != Revenue::Standard {
        return Err(AmendError::SettingViolated(
            "revenue is not price times output".into(),
        ));
    }
    Ok(())
}

/// Where the dispatched output sits in the unit's range.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Position {
    Offline,
    AtMax,
    AtMin,
    Interior,
}

fn position(view: &ProducerView) -> Position {
    let unit = view.unit();
    let x = view.x_star();
    let eq = view.tol().eq_tol;
    if x.u[0] == 0 {
        Position::Offline
    } else if (x.g[0] - unit.g_max).abs() <= eq {
        Position::AtMax
    } else if (x.g[0] - unit.g_min).abs() <= eq {
        Position::AtMin
    } else {
        Position::Interior
    }
}

/// Multipliers of `u·g_min − g ≤ 0`, `g − u·g_max ≤ 0`, `u − 1 ≤ 0`.
fn linear_multipliers(view: &ProducerView) -> Result<[f64; 3], AmendError> {
    let unit = view.unit();
    let p = view.price()[0];
    let (a, w) = (unit.marginal_cost, unit.startup_cost);
    let span = unit.g_max - unit.g_min;
    let above = p >= unit.break_even_price();
    let lost = view.uplift();
    let profit_at = |gv: f64| (p - a) * gv - w;
    let need_span = || {
        if span <= view.tol().eq_tol {
            Err(AmendError::Unsupported(format!(
                "unit `{}` has a fixed output and a loss at the dispatched point",
                unit.id
            )))
        } else {
            Ok(span)
        }
    };
    Ok(match (position(view), above) {
        (Position::Offline, false) => [0.0; 3],
        (Position::Offline, true) => [0.0, 0.0, view.pi_plus()],
        (Position::AtMax, true) => [0.0; 3],
        (Position::AtMax, false) => {
            if lost == 0.0 {
                [0.0; 3]
            } else {
                [-view.pi_star() / need_span()?, 0.0, 0.0]
            }
        }
        (Position::AtMin, _) => {
            if lost == 0.0 {
                [0.0; 3]
            } else {
                [0.0, lost / need_span()?, 0.0]
            }
        }
        (Position::Interior, false) => [
            -profit_at(unit.g_max) / span,
            -profit_at(unit.g_min) / span,
            0.0,
        ],
        (Position::Interior, true) => [0.0, p - a, 0.0],
    })
}

fn linear_constraints(view: &ProducerView) -> [Expr; 3] {
    let unit = view.unit();
    let s = status_expr(view.formulation(), 0);
    [
        lin(vec![(unit.g_min, s.clone()), (-1.0, g(0))], 0.0),
        lin(vec![(1.0, g(0)), (-unit.g_max, s.clone())], 0.0),
        lin(vec![(1.0, s)], -1.0),
    ]
}

fn linear_amendment(view: &ProducerView, mu: &[f64; 3]) -> Expr {
    let unit = view.unit();
    let s = status_expr(view.formulation(), 0);
    let parts = [
        lin(vec![(1.0, g(0)), (-unit.g_min, s.clone())], 0.0),
        lin(vec![(unit.g_max, s.clone()), (-1.0, g(0))], 0.0),
        c(1.0).sub(s),
    ];
    let terms: Vec<Expr> = parts
        .into_iter()
        .zip(mu)
        .filter(|(_, m)| **m != 0.0)
        .map(|(e, m)| e.scale(*m))
        .collect();
    Expr::sum(terms)
}

/// `N = μ¹(g − u·g_min) + μ²(u·g_max − g) + μ³(1 − u)` for a single-period,
/// initially offline unit with multipliers chosen by case.
pub fn build_linear_unit(view: &ProducerView) -> Result<AmendmentBundle, AmendError> {
    require_single_period_offline(view)?;
    let mu = linear_multipliers(view)?;
    let n = linear_amendment(view, &mu);
    Ok(bundle(
        view,
        n,
        linear_constraints(view).to_vec(),
        mu.to_vec(),
        Family::LinearUnit,
    ))
}

/// Amendment from the convex envelope of the cost with the uplift subtracted
/// at the dispatched point (single period, initially offline).
pub fn build_convex_hull_amendment(view: &ProducerView) -> Result<AmendmentBundle, AmendError> {
    require_single_period_offline(view)?;
    match view.formulation() {
        Formulation::StatusOutput => {
            if position(view) != Position::Interior {
                let mu = linear_multipliers(view)?;
                let n = linear_amendment(view, &mu);
                return Ok(bundle(
                    view,
                    n,
                    linear_constraints(view).to_vec(),
                    mu.to_vec(),
                    Family::ConvexHull,
                ));
            }
            let unit = view.unit();
            let gs = view.x_star().g[0];
            let lo = gs - unit.g_min;
            let hi = unit.g_max - gs;
            // (g − u·g_min)/(g* − g_min) and (u·g_max − g)/(g_max − g*)
            let left = lin(vec![(1.0 / lo, g(0)), (-unit.g_min / lo, u(0))], 0.0);
            let right = lin(vec![(unit.g_max / hi, u(0)), (-1.0 / hi, g(0))], 0.0);
            let rho_l = lin(vec![(unit.g_min / lo, u(0)), (-1.0 / lo, g(0))], 0.0);
            let rho_r = lin(vec![(1.0 / hi, g(0)), (-unit.g_max / hi, u(0))], 0.0);
            let lost = view.uplift();
            let n = if lost == 0.0 {
                c(0.0)
            } else {
                Expr::min_of(vec![left, right]).scale(lost)
            };
            Ok(bundle(
                view,
                n,
                vec![Expr::max_of(vec![rho_l, rho_r])],
                vec![lost],
                Family::ConvexHull,
            ))
        }
        Formulation::OutputOnly => {
            let n = output_only_envelope(view);
            Ok(AmendmentBundle::from_amendment(
                &view.unit().id,
                n,
                Family::ConvexHull,
                view.formulation(),
            ))
        }
    }
}

/// `N(g) = a·g + w·θ(g) − f(g)` where `f` is the lower convex envelope of the
/// cost on `{0} ∪ [g_min, g_max]` lowered by the uplift at the dispatched output.
fn output_only_envelope(view: &ProducerView) -> Expr {
    let unit = view.unit();
    let lost = view.uplift();
    if lost <= view.tol().opt_tol {
        return c(0.0);
    }
    let (a, w) = (unit.marginal_cost, unit.startup_cost);
    let x = view.x_star();
    let mut points: Vec<(f64, f64)> = vec![(0.0, 0.0), (unit.g_max, w + a * unit.g_max)];
    if unit.g_min > 0.0 {
        points.push((unit.g_min, w + a * unit.g_min));
    }
    // the dispatched point, lowered by the uplift
    points.push(if x.u[0] == 0 {
        (0.0, -lost)
    } else {
        (x.g[0], w + a * x.g[0] - lost)
    });
    points.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    points.dedup_by(|later, earlier| (later.0 - earlier.0).abs() <= view.tol().eq_tol);

    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pt in points {
        while hull.len() >= 2 {
            let (o, m) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop m when it lies on or above the chord from o to pt
            if (m.0 - o.0) * (pt.1 - o.1) - (m.1 - o.1) * (pt.0 - o.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let facets: Vec<Expr> = hull
        .windows(2)
        .map(|pair| {
            let (g0, f0) = pair[0];
            let (g1, f1) = pair[1];
            let slope = (f1 - f0) / (g1 - g0);
            let intercept = f0 - slope * g0;
            lin(vec![(a - slope, g(0)), (w, theta(g(0)))], -intercept)
        })
        .collect();
    match facets.len() {
        0 => c(0.0),
        1 => facets.into_iter().next().unwrap(),
        _ => Expr::min_of(facets),
    }
}

/// Dispatch to a builder by family; `gamma` defaults to 0 for the general form.
pub fn build(
    view: &ProducerView,
    family: Family,
    gamma: Option<&Expr>,
) -> Result<AmendmentBundle, AmendError> {
    match family {
        Family::UpliftDelta => Ok(build_uplift_delta(view)),
        Family::ConstantProfit => Ok(build_constant_profit(view)),
        Family::GeneralForm => build_general_form(view, gamma.unwrap_or(&c(0.0))),
        Family::StatusDelta => build_status_delta(view),
        Family::StatusProfile => build_status_profile(view),
        Family::LinearUnit => build_linear_unit(view),
        Family::ConvexHull => build_convex_hull_amendment(view),
        Family::Custom => Err(AmendError::Unsupported(
            "custom amendments are read from a bundle file".into(),
        )),
    }
}
