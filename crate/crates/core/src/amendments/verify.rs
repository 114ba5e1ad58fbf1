use super::AmendmentBundle;
use crate::error::AmendError;
use crate::producer::ProducerView;
use crate::report::{ConditionCheck, VerificationReport};
use crate::uplift::{member, weighted};

/// Largest positive value and its index.
fn worst(values: impl IntoIterator<Item = f64>) -> (f64, Option<usize>) {
    values
        .into_iter()
        .enumerate()
        .fold((0.0, None), |(best, at), (i, v)| {
            if v > best {
                (v, Some(i))
            } else {
                (best, at)
            }
        })
}

/// Check every pointwise condition of an amendment bundle on the unit's
/// sampled feasible set.
pub fn verify_conditions(
    view: &ProducerView,
    bundle: &AmendmentBundle,
) -> Result<VerificationReport, AmendError> {
    let id = view.unit().id.clone();
    if bundle.unit_id != id {
        return Err(AmendError::Precondition(format!(
            "bundle is for `{}` but the view is for `{id}`",
            bundle.unit_id
        )));
    }
    if bundle.formulation != view.formulation() {
        return Err(AmendError::Precondition(
            "bundle and view use different formulations".into(),
        ));
    }
    view.check_multipliers(&bundle.rho, &bundle.mu)?;
    let tol = view.tol();
    let lattice = view.lattice();
    let witness = |i: Option<usize>| i.map(|i| lattice[i].clone());
    let n_vals = view.eval_on_lattice(&bundle.n);
    let rho_vals: Vec<Vec<f64>> = bundle.rho.iter().map(|r| view.eval_on_lattice(r)).collect();
    let dot = weighted(&rho_vals, &bundle.mu, lattice.len());
    let pi_plus = view.pi_plus();
    let lost = view.uplift();
    let mut report = VerificationReport::new(format!(
        "amendment conditions for `{id}` ({})",
        bundle.family
    ));
    let check = |name: &str, pass: bool, required: bool, lhs: f64, rhs: f64| {
        ConditionCheck::new(name, pass, required, lhs, rhs).unit(&id)
    };

    let (gap, at) = worst(n_vals.iter().zip(&dot).map(|(n, d)| (n + d).abs()));
    report.push(
        check("bundle", gap <= tol.opt_tol, true, gap, 0.0)
            .maybe_witness(witness(at))
            .note("N = −μᵀρ"),
    );

    let min_mu = bundle.mu.iter().copied().fold(0.0, f64::min);
    report.push(check("mu_nonneg", min_mu >= 0.0, true, min_mu, 0.0));

    let amended = view.profits().iter().zip(&n_vals).enumerate().fold(
        (f64::NEG_INFINITY, None),
        |(best, at), (i, (pi, n))| {
            if pi + n > best {
                (pi + n, Some(i))
            } else {
                (best, at)
            }
        },
    );
    report.push(
        check(
            "c2",
            (amended.0 - pi_plus).abs() <= tol.opt_tol,
            true,
            amended.0,
            pi_plus,
        )
        .maybe_witness(witness(amended.1))
        .note("max amended profit equals the best standard profit"),
    );

    let n_star = view.eval(&bundle.n, view.x_star());
    report.push(
        check(
            "c3",
            (n_star - lost).abs() <= tol.opt_tol,
            true,
            n_star,
            lost,
        )
        .note("amendment pays the uplift at the dispatched point"),
    );

    let (neg, at) = worst(n_vals.iter().map(|n| -n));
    report.push(
        check("c4", neg <= tol.opt_tol, true, -neg, 0.0)
            .maybe_witness(witness(at))
            .note("N ≥ 0"),
    );

    let (size, at) = worst(n_vals.iter().map(|n| n.abs()));
    report.push(
        check("c5", lost > 0.0 || size <= tol.opt_tol, false, size, 0.0)
            .maybe_witness(witness(at))
            .note("no uplift implies no amendment"),
    );

    let argmax_n = view
        .argmax_points()
        .iter()
        .map(|x| view.eval(&bundle.n, x).abs())
        .fold(0.0, f64::max);
    report.push(
        check("c6", argmax_n <= tol.opt_tol, true, argmax_n, 0.0)
            .note("N vanishes where the standard profit peaks"),
    );

    let slack = view
        .argmax_points()
        .iter()
        .flat_map(|x| {
            bundle
                .rho
                .iter()
                .zip(&bundle.mu)
                .map(move |(r, m)| (m * view.eval(r, x)).abs())
        })
        .fold(0.0, f64::max);
    report.push(
        check("c13", slack <= tol.opt_tol, true, slack, 0.0)
            .note("complementary slackness at the argmax points"),
    );

    let (pos, at) = worst(rho_vals.iter().flatten().copied());
    let at = at.map(|i| i % lattice.len().max(1));
    report.push(
        check("c16", pos <= tol.eq_tol, true, pos, 0.0)
            .maybe_witness(witness(at))
            .note("ρ ≤ 0 on the feasible set"),
    );

    let dot_star: f64 = bundle
        .rho
        .iter()
        .zip(&bundle.mu)
        .map(|(r, m)| m * view.eval(r, view.x_star()))
        .sum();
    let target = view.pi_star() - pi_plus;
    report.push(check(
        "c17",
        (dot_star - target).abs() <= tol.opt_tol,
        true,
        dot_star,
        target,
    ));

    report.push(
        check(
            "c18",
            member(view, &rho_vals, &bundle.mu),
            true,
            amended.0,
            pi_plus,
        )
        .note("μ ∈ M⁺(p)"),
    );

    let strict = view
        .profits()
        .iter()
        .zip(&n_vals)
        .position(|(pi, n)| *n < pi_plus - pi - tol.opt_tol);
    report.push(
        check(
            "strict",
            strict.is_some(),
            false,
            strict.map_or(0.0, |i| n_vals[i]),
            0.0,
        )
        .maybe_witness(witness(strict))
        .note("some point is paid strictly less than its lost profit"),
    );
    Ok(report)
}
