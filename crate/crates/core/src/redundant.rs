//! Structure of the multiplier set of redundant constraints: per-constraint
//! maximum multipliers, box and corner properties, the zero-uplift filter,
//! the per-constraint characterization of zero uplift, and the repair that
//! turns a partially effective constraint into a fully effective one.

use serde::Serialize;

use crate::error::AmendError;
use crate::expr::{delta_x, Expr};
use crate::model::UnitSchedule;
use crate::producer::ProducerView;
use crate::report::{ConditionCheck, VerificationReport};
use crate::uplift::{member, weighted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    IdenticallyZero,
    StrictlyNegative,
    Mixed,
}

/// Admissible values of one multiplier on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierInterval {
    /// `{0}`.
    Zero,
    /// `[0, μ^{max}]`.
    Bounded(f64),
    /// `[0, ∞)`.
    Unbounded,
}

impl MultiplierInterval {
    pub fn upper(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Bounded(m) => *m,
            Self::Unbounded => f64::INFINITY,
        }
    }

    pub fn contains(&self, mu: f64, tol: f64) -> bool {
        mu >= -tol && mu <= self.upper() + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintClass {
    pub kind: ConstraintKind,
    /// Lattice points where the constraint is not zero (at most a few).
    pub support: Vec<UnitSchedule>,
    pub interval: MultiplierInterval,
}

const SUPPORT_WITNESSES: usize = 8;

/// Minimum over the support of `(π^{st} − π^{st,+}) / ρ`, given lattice values of `ρ`.
pub(crate) fn mu_max_values(
    view: &ProducerView,
    values: &[f64],
    index: usize,
) -> Result<f64, AmendError> {
    let eq = view.tol().eq_tol;
    let best = view.pi_plus();
    let m = values
        .iter()
        .zip(view.profits())
        .filter(|(r, _)| r.abs() > eq)
        .map(|(r, pi)| (pi - best) / r)
        .fold(f64::INFINITY, f64::min);
    if m.is_infinite() {
        return Err(AmendError::EmptySupport { index });
    }
    Ok(m.max(0.0))
}

/// Largest admissible multiplier of a single redundant constraint.
pub fn mu_max(view: &ProducerView, rho_l: &Expr) -> Result<f64, AmendError> {
    let values = view.redundant_values(std::slice::from_ref(rho_l))?;
    mu_max_values(view, &values[0], 0)
}

fn classify_values(view: &ProducerView, values: &[f64]) -> Result<ConstraintClass, AmendError> {
    let eq = view.tol().eq_tol;
    let support: Vec<UnitSchedule> = view
        .lattice()
        .iter()
        .zip(values)
        .filter(|(_, r)| r.abs() > eq)
        .map(|(x, _)| x.clone())
        .take(SUPPORT_WITNESSES)
        .collect();
    if support.is_empty() {
        return Ok(ConstraintClass {
            kind: ConstraintKind::IdenticallyZero,
            support,
            interval: MultiplierInterval::Unbounded,
        });
    }
    if values.iter().all(|r| *r < -eq) {
        return Ok(ConstraintClass {
            kind: ConstraintKind::StrictlyNegative,
            support,
            interval: MultiplierInterval::Zero,
        });
    }
    let m = mu_max_values(view, values, 0)?;
    Ok(ConstraintClass {
        kind: ConstraintKind::Mixed,
        support,
        interval: if m > 0.0 {
            MultiplierInterval::Bounded(m)
        } else {
            MultiplierInterval::Zero
        },
    })
}

pub fn classify_constraint(
    view: &ProducerView,
    rho_l: &Expr,
) -> Result<ConstraintClass, AmendError> {
    let values = view.redundant_values(std::slice::from_ref(rho_l))?;
    classify_values(view, &values[0])
}

fn amended_max(view: &ProducerView, values: &[Vec<f64>], mu: &[f64]) -> f64 {
    let dot = weighted(values, mu, view.lattice().len());
    view.profits()
        .iter()
        .zip(&dot)
        .map(|(pi, d)| pi - d)
        .fold(f64::NEG_INFINITY, f64::max)
}

const SCAN_POINTS: usize = 11;
const SCAN_BUDGET: usize = 20_000;

/// Scan width for an axis whose interval gives no natural bound.
fn profit_range_cap(view: &ProducerView) -> f64 {
    let low = view.profits().iter().copied().fold(f64::INFINITY, f64::min);
    let cap = 2.0 * (view.pi_plus() - low);
    if cap > view.tol().eq_tol {
        cap
    } else {
        1.0
    }
}

/// Numerical check that the dual of the amended profit maximization has
/// no gap: over a grid of multipliers its minimum is `π^{st,+}`, reached at `μ = 0`.
pub fn strong_duality_scan(
    view: &ProducerView,
    rho: &[Expr],
) -> Result<VerificationReport, AmendError> {
    let values = view.redundant_values(rho)?;
    let tol = view.tol();
    let cap = profit_range_cap(view);
    let uppers: Vec<f64> = values
        .iter()
        .map(|v| {
            let class = classify_values(view, v)?;
            Ok(match class.interval {
                MultiplierInterval::Bounded(m) => 2.0 * m,
                _ => cap,
            })
        })
        .collect::<Result<_, AmendError>>()?;
    let mut per_axis = SCAN_POINTS;
    while per_axis > 2 && (per_axis as f64).powi(rho.len() as i32) > SCAN_BUDGET as f64 {
        per_axis -= 1;
    }
    let total = per_axis.pow(rho.len() as u32);
    let mut min_value = f64::INFINITY;
    let mut argmin = vec![0.0; rho.len()];
    for mut index in 0..total {
        let mu: Vec<f64> = uppers
            .iter()
            .map(|up| {
                let k = index % per_axis;
                index /= per_axis;
                up * k as f64 / (per_axis - 1) as f64
            })
            .collect();
        let v = amended_max(view, &values, &mu);
        if v < min_value - tol.opt_tol {
            min_value = v;
            argmin = mu;
        }
    }
    let at_zero = amended_max(view, &values, &vec![0.0; rho.len()]);
    let pi_plus = view.pi_plus();
    let mut report = VerificationReport::new(format!("strong duality scan ({total} multipliers)"));
    report.push(
        ConditionCheck::new(
            "dual_min",
            (min_value - pi_plus).abs() <= tol.opt_tol,
            true,
            min_value,
            pi_plus,
        )
        .note(format!("minimizer {argmin:?}")),
    );
    report.push(ConditionCheck::new(
        "dual_at_zero",
        (at_zero - pi_plus).abs() <= tol.opt_tol,
        true,
        at_zero,
        pi_plus,
    ));
    Ok(report)
}

fn supports_disjoint(values: &[Vec<f64>], eq: f64) -> bool {
    let n = values.first().map_or(0, Vec::len);
    (0..n).all(|k| values.iter().filter(|v| v[k].abs() > eq).count() <= 1)
}

const CORNER_LIMIT: usize = 16;

/// Box containment of sampled multipliers, and corner membership when the
/// constraint supports are pairwise disjoint.
pub fn box_structure(
    view: &ProducerView,
    rho: &[Expr],
    mu_samples: &[Vec<f64>],
) -> Result<VerificationReport, AmendError> {
    let values = view.redundant_values(rho)?;
    let tol = view.tol();
    let classes: Vec<ConstraintClass> = values
        .iter()
        .map(|v| classify_values(view, v))
        .collect::<Result<_, _>>()?;
    let mut report = VerificationReport::new("multiplier set structure");
    for mu in mu_samples {
        view.check_multipliers(rho, mu)?;
        if !member(view, &values, mu) {
            continue;
        }
        for (l, (m, class)) in mu.iter().zip(&classes).enumerate() {
            let slack = tol.opt_tol * (1.0 + class.interval.upper().min(1e12));
            report.push(
                ConditionCheck::new(
                    "box_containment",
                    class.interval.contains(*m, slack),
                    true,
                    *m,
                    class.interval.upper(),
                )
                .note(format!("constraint {l}")),
            );
        }
    }
    let disjoint = supports_disjoint(&values, tol.eq_tol);
    report.push(ConditionCheck::new(
        "supports_disjoint",
        disjoint,
        false,
        f64::from(u8::from(disjoint)),
        1.0,
    ));
    if disjoint && rho.len() <= CORNER_LIMIT {
        let cap = profit_range_cap(view);
        let tops: Vec<f64> = classes
            .iter()
            .map(|c| match c.interval {
                MultiplierInterval::Unbounded => cap,
                other => other.upper(),
            })
            .collect();
        for bits in 0u32..(1u32 << rho.len()) {
            let corner: Vec<f64> = tops
                .iter()
                .enumerate()
                .map(|(l, top)| if bits >> l & 1 == 1 { *top } else { 0.0 })
                .collect();
            let ok = member(view, &values, &corner);
            report.push(
                ConditionCheck::new(
                    "corner_membership",
                    ok,
                    true,
                    amended_max(view, &values, &corner),
                    view.pi_plus(),
                )
                .note(format!("corner {corner:?}")),
            );
        }
    }
    Ok(report)
}

/// Zero-uplift filter: `Σ_{l bounded} μ_l^{max} ρ_l(x*) ≤ π^{st,*} − π^{st,+}`.
pub fn necessary_condition(
    view: &ProducerView,
    rho: &[Expr],
) -> Result<VerificationReport, AmendError> {
    let values = view.redundant_values(rho)?;
    let tol = view.tol();
    let mut lhs = 0.0;
    for (r, v) in rho.iter().zip(&values) {
        let class = classify_values(view, v)?;
        if class.interval != MultiplierInterval::Unbounded {
            lhs += class.interval.upper() * view.eval(r, view.x_star());
        }
    }
    let rhs = view.pi_star() - view.pi_plus();
    let mut report = VerificationReport::new("zero-uplift necessary condition");
    report.push(ConditionCheck::new(
        "necessary",
        lhs <= rhs + tol.opt_tol,
        true,
        lhs,
        rhs,
    ));
    Ok(report)
}

/// Per-constraint characterization of zero uplift, cross-checked against the
/// direct conditions `μᵀρ(x*) = π^{st,*} − π^{st,+}` and membership in `M^+`.
pub fn prop5_check(
    view: &ProducerView,
    rho: &[Expr],
    mu: &[f64],
) -> Result<VerificationReport, AmendError> {
    view.check_multipliers(rho, mu)?;
    let tol = view.tol();
    let gap = view.pi_star() - view.pi_plus();
    if gap >= -tol.opt_tol {
        return Err(AmendError::Precondition(
            "the per-constraint characterization needs a strictly positive uplift".into(),
        ));
    }
    let values = view.redundant_values(rho)?;
    let n = view.lattice().len();
    let x_star = view.x_star();
    let at_star: Vec<f64> = rho.iter().map(|r| view.eval(r, x_star)).collect();
    let active: Vec<usize> = (0..rho.len())
        .filter(|&l| at_star[l].abs() > tol.eq_tol)
        .collect();
    let all = weighted(&values, mu, n);
    let all_star: f64 = mu.iter().zip(&at_star).map(|(m, r)| m * r).sum();
    let best = view.pi_plus();

    let mut report = VerificationReport::new("per-constraint zero-uplift characterization");
    report.push(ConditionCheck::new(
        "c20",
        !active.is_empty(),
        true,
        active.len() as f64,
        1.0,
    ));
    let mut weak_witness = None;
    let mut bounds_all = true;
    for l in 0..rho.len() {
        // rest(x) = Σ_{l'≠l} μ_l' ρ_l'(x)
        let rest = |k: usize| all[k] - mu[l] * values[l][k];
        let rest_star = all_star - mu[l] * at_star[l];
        let mut bound_ok = true;
        let mut min_ratio = f64::INFINITY;
        let mut min_scale = f64::INFINITY;
        let mut argmin = None;
        for k in 0..n {
            let r = values[l][k];
            if r.abs() <= tol.eq_tol {
                continue;
            }
            let num = view.profits()[k] - best - rest(k);
            if mu[l] * r < num - tol.opt_tol {
                bound_ok = false;
            }
            let ratio = num / r;
            if ratio < min_ratio {
                min_ratio = ratio;
                min_scale = r.abs();
                argmin = Some(view.lattice()[k].clone());
            }
        }
        bounds_all &= bound_ok;
        if !active.contains(&l) {
            report.push(
                ConditionCheck::new("c21", bound_ok, true, mu[l], min_ratio)
                    .maybe_witness(argmin)
                    .note(format!("constraint {l}")),
            );
            continue;
        }
        let num_star = view.pi_star() - best - rest_star;
        let attained = mu[l] * at_star[l] <= num_star + tol.opt_tol;
        let ratio_star = num_star / at_star[l];
        let in_argmin =
            ratio_star <= min_ratio + tol.opt_tol / at_star[l].abs() + tol.opt_tol / min_scale;
        let c22 = bound_ok && attained;
        report.push(
            ConditionCheck::new("c22", c22, true, mu[l], min_ratio)
                .maybe_witness(argmin)
                .note(format!("constraint {l}")),
        );
        report.push(
            ConditionCheck::new("c23", in_argmin, true, ratio_star, min_ratio)
                .witness(x_star.clone())
                .note(format!("constraint {l}")),
        );
        if c22 && in_argmin && weak_witness.is_none() {
            weak_witness = Some(l);
        }
    }
    let strong = report.passed();
    let weak = !active.is_empty() && bounds_all && weak_witness.is_some();
    report.push(
        ConditionCheck::new("weak_form", weak, false, f64::from(u8::from(weak)), 1.0).note(
            match weak_witness {
                Some(l) => format!("equality witnessed by constraint {l}"),
                None => "no constraint attains the bound at the dispatched point".into(),
            },
        ),
    );
    let c17 = (all_star - gap).abs() <= tol.opt_tol;
    let c18 = member(view, &values, mu);
    let direct = c17 && c18;
    report.push(ConditionCheck::new("c17", c17, false, all_star, gap));
    report.push(ConditionCheck::new(
        "c18",
        c18,
        false,
        f64::from(u8::from(c18)),
        1.0,
    ));
    report.push(ConditionCheck::new(
        "verdicts_agree",
        direct == strong,
        true,
        f64::from(u8::from(strong)),
        f64::from(u8::from(direct)),
    ));
    Ok(report)
}

/// Constraints adjusted at the dispatched point so that `μᵀρ(x*)` absorbs
/// the whole uplift.
#[derive(Debug, Clone, PartialEq)]
pub struct Repair {
    pub rho: Vec<Expr>,
    /// `π^{st,*} − π^{st,+} − μᵀρ'(x*)` before the repair.
    pub residual: f64,
    /// Whether scaling the correction by `μ/‖μ‖` instead of `μ/‖μ‖²` would
    /// also have balanced the dispatched point (only when `‖μ‖ = 1` or nothing
    /// needed repairing).
    pub unit_norm_scaling_ok: bool,
}

pub fn repair(view: &ProducerView, rho_prime: &[Expr], mu: &[f64]) -> Result<Repair, AmendError> {
    view.check_multipliers(rho_prime, mu)?;
    let tol = view.tol();
    let norm_sq: f64 = mu.iter().map(|m| m * m).sum();
    if norm_sq == 0.0 {
        return Err(AmendError::Precondition(
            "repair needs a nonzero multiplier".into(),
        ));
    }
    let values = view.redundant_values(rho_prime)?;
    if !member(view, &values, mu) {
        return Err(AmendError::Precondition(
            "the multiplier raises the best attainable profit, so it cannot be repaired".into(),
        ));
    }
    let x_star = view.x_star();
    let dot_star: f64 = rho_prime
        .iter()
        .zip(mu)
        .map(|(r, m)| m * view.eval(r, x_star))
        .sum();
    let residual = view.pi_star() - view.pi_plus() - dot_star;
    let rho = if residual.abs() <= tol.opt_tol {
        rho_prime.to_vec()
    } else {
        rho_prime
            .iter()
            .zip(mu)
            .map(|(r, m)| {
                if *m == 0.0 {
                    r.clone()
                } else {
                    r.clone().add(delta_x(x_star).scale(residual * m / norm_sq))
                }
            })
            .collect()
    };
    let norm = norm_sq.sqrt();
    Ok(Repair {
        rho,
        residual,
        unit_norm_scaling_ok: residual.abs() <= tol.opt_tol || (norm - 1.0).abs() <= tol.eq_tol,
    })
}
