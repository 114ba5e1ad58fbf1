//! Exact centralized dispatch by commitment enumeration.
//!
//! Units with identical offers are interchangeable, so instead of every
//! per-unit status assignment we enumerate, for each group of identical units,
//! the multisets of status vectors the group can run. Each combination of group
//! multisets is a commitment profile; its continuous part is solved in closed
//! form by merit-order dispatch.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::DispatchError;
use crate::expr::Expr;
use crate::model::{MarketInstance, Schedule, StatusVector, UnitSchedule};
use crate::pricing::standard_profit;
use crate::producer::ProducerView;
use crate::report::{ConditionCheck, VerificationReport};

/// Maximum number of commitment profiles examined before giving up.
pub const PROFILE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchResult {
    pub schedule: Schedule,
    pub f_star: f64,
    /// Commitment profiles examined.
    pub enumerated: u64,
}

/// Optimal outputs and cost for a fixed commitment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EconomicDispatch {
    pub outputs: Vec<Vec<f64>>,
    pub cost: f64,
}

/// Merit-order dispatch with commitments fixed; `None` when the commitment
/// cannot meet demand or violates a unit's up/down times.
pub fn economic_dispatch(
    instance: &MarketInstance,
    commitment: &[StatusVector],
) -> Option<EconomicDispatch> {
    let units = &instance.units;
    if commitment.len() != units.len() {
        return None;
    }
    if units
        .iter()
        .zip(commitment)
        .any(|(unit, u)| u.len() != instance.periods || !unit.status_feasible(u))
    {
        return None;
    }
    let tol = instance.tolerances.eq_tol;
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by(|&i, &j| {
        units[i]
            .marginal_cost
            .total_cmp(&units[j].marginal_cost)
            .then(i.cmp(&j))
    });

    let mut outputs = vec![vec![0.0; instance.periods]; units.len()];
    for t in 0..instance.periods {
        let d = instance.demand[t];
        let online = |i: &usize| commitment[*i][t] == 1;
        let floor: f64 = (0..units.len())
            .filter(online)
            .map(|i| units[i].g_min)
            .sum();
        let ceiling: f64 = (0..units.len())
            .filter(online)
            .map(|i| units[i].g_max)
            .sum();
        let slack = tol * (1.0 + d);
        if d < floor - slack || d > ceiling + slack {
            return None;
        }
        let mut remaining = (d - floor).max(0.0);
        for &i in order.iter().filter(|i| online(i)) {
            let extra = remaining.min(units[i].g_max - units[i].g_min);
            outputs[i][t] = units[i].g_min + extra;
            remaining -= extra;
        }
    }
    let cost = units
        .iter()
        .zip(commitment)
        .zip(&outputs)
        .map(|((unit, u), g)| {
            unit.cost_unchecked(&UnitSchedule {
                u: u.clone(),
                g: g.clone(),
            })
        })
        .sum();
    Some(EconomicDispatch { outputs, cost })
}

/// Identical units and the status multisets they can run.
struct Group {
    members: Vec<usize>,
    /// Each entry: status vectors assigned to `members` in order.
    assignments: Vec<Vec<StatusVector>>,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

fn multisets(statuses: &[StatusVector], size: usize) -> Vec<Vec<StatusVector>> {
    // statuses arrive sorted descending, so non-increasing index sequences put
    // the "more online" vectors on the lowest-index units
    fn rec(
        statuses: &[StatusVector],
        start: usize,
        left: usize,
        cur: &mut Vec<StatusVector>,
        out: &mut Vec<Vec<StatusVector>>,
    ) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in start..statuses.len() {
            cur.push(statuses[k].clone());
            rec(statuses, k, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(statuses, 0, size, &mut Vec::with_capacity(size), &mut out);
    out
}

fn build_groups(instance: &MarketInstance) -> Result<Vec<Group>, DispatchError> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, unit) in instance.units.iter().enumerate() {
        match groups
            .iter_mut()
            .find(|g| instance.units[g[0]].same_offer(unit))
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    let mut total: u128 = 1;
    let mut statuses_per_group = Vec::with_capacity(groups.len());
    for members in &groups {
        let mut statuses = instance.units[members[0]].feasible_statuses(instance.periods);
        statuses.sort_by(|a, b| b.cmp(a));
        let n = members.len() as u128;
        let m = statuses.len() as u128;
        total = total.saturating_mul(binomial(n + m - 1, m - 1));
        statuses_per_group.push(statuses);
    }
    if total > u128::from(PROFILE_LIMIT) {
        return Err(DispatchError::EnumerationLimit {
            profiles: total,
            limit: PROFILE_LIMIT,
        });
    }
    Ok(groups
        .into_iter()
        .zip(statuses_per_group)
        .map(|(members, statuses)| Group {
            assignments: multisets(&statuses, members.len()),
            members,
        })
        .collect())
}

/// Ordering key: quantized cost, then commitment with low-index units online
/// first, then smallest outputs.
#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    cost_key: i128,
    commitment: Vec<StatusVector>,
    dispatch: EconomicDispatch,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        use std::cmp::Ordering::*;
        match self.cost_key.cmp(&other.cost_key) {
            Less => return true,
            Greater => return false,
            Equal => {}
        }
        match other.commitment.cmp(&self.commitment) {
            Less => return true,
            Greater => return false,
            Equal => {}
        }
        let a = self.dispatch.outputs.iter().flatten();
        let b = other.dispatch.outputs.iter().flatten();
        for (x, y) in a.zip(b) {
            match x.total_cmp(y) {
                Less => return true,
                Greater => return false,
                Equal => {}
            }
        }
        false
    }
}

/// Globally optimal dispatch over all feasible commitment profiles.
pub fn solve_centralized(instance: &MarketInstance) -> Result<DispatchResult, DispatchError> {
    let groups = build_groups(instance)?;
    let radices: Vec<u64> = groups.iter().map(|g| g.assignments.len() as u64).collect();
    let profiles: u64 = radices.iter().product();
    let quantum = instance.tolerances.eq_tol;

    let best = (0..profiles)
        .into_par_iter()
        .filter_map(|mut index| {
            let mut commitment = vec![StatusVector::new(); instance.units.len()];
            for (group, &radix) in groups.iter().zip(&radices) {
                let pick = &group.assignments[(index % radix) as usize];
                index /= radix;
                for (&i, u) in group.members.iter().zip(pick) {
                    commitment[i] = u.clone();
                }
            }
            let dispatch = economic_dispatch(instance, &commitment)?;
            Some(Candidate {
                cost_key: (dispatch.cost / quantum).round() as i128,
                commitment,
                dispatch,
            })
        })
        .reduce_with(|a, b| if b.better_than(&a) { b } else { a })
        .ok_or(DispatchError::Infeasible)?;

    let schedule = Schedule {
        units: best
            .commitment
            .into_iter()
            .zip(best.dispatch.outputs)
            .map(|(u, g)| UnitSchedule { u, g })
            .collect(),
    };
    Ok(DispatchResult {
        schedule,
        f_star: best.dispatch.cost,
        enumerated: profiles,
    })
}

/// Checks that `x*` solves the amended dispatch problem: every unit's `x_i*`
/// maximizes its amended profit, and the amended dual bound is tight.
pub fn check_prop1(
    instance: &MarketInstance,
    amendments: &[Expr],
    p: &[f64],
    x_star: &Schedule,
) -> Result<VerificationReport, crate::error::AmendError> {
    let tol = instance.tolerances;
    let mut report = VerificationReport::new("amended dispatch optimality");
    if amendments.len() != instance.units.len() {
        return Err(crate::error::AmendError::Precondition(format!(
            "{} amendments for {} units",
            amendments.len(),
            instance.units.len()
        )));
    }
    x_star.validate(instance)?;
    let mut dual = p
        .iter()
        .zip(&instance.demand)
        .map(|(p, d)| p * d)
        .sum::<f64>();
    let mut primal = 0.0;
    for ((unit, n), x) in instance.units.iter().zip(amendments).zip(&x_star.units) {
        let view = ProducerView::new(unit, p, x, Default::default(), tol)?;
        let amended: Vec<f64> = view
            .lattice()
            .iter()
            .zip(view.profits())
            .map(|(pt, pi)| pi + n.eval(pt, tol.eq_tol))
            .collect();
        let (k, best) =
            amended
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |acc, (k, v)| if v > acc.1 { (k, v) } else { acc },
                );
        let at_star = standard_profit(unit, p, x) + n.eval(x, tol.eq_tol);
        report.push(
            ConditionCheck::new("argmax", at_star >= best - tol.opt_tol, true, at_star, best)
                .unit(&unit.id)
                .witness(view.lattice()[k].clone()),
        );
        dual -= best;
        primal += unit.cost_unchecked(x) - n.eval(x, tol.eq_tol);
    }
    report.push(ConditionCheck::new(
        "strong_duality",
        (dual - primal).abs() <= tol.opt_tol * (1.0 + primal.abs()),
        true,
        dual,
        primal,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnitParams;

    fn mt() -> UnitParams {
        UnitParams::new("mt", 2.0, 6.0, 7.0, 0.0)
    }

    #[test]
    fn merit_order_fill() {
        let units = vec![mt(), UnitParams::new("ht", 0.0, 7.0, 2.0, 30.0)];
        let instance = MarketInstance::new(vec![10.0], units).unwrap();
        let ed = economic_dispatch(&instance, &[vec![1], vec![1]]).unwrap();
        assert_eq!(ed.outputs, vec![vec![3.0], vec![7.0]]);
        assert_eq!(ed.cost, 21.0 + 44.0);
        assert!(economic_dispatch(&instance, &[vec![1], vec![0]]).is_none());
    }

    #[test]
    fn minimums_cover_demand() {
        let units = vec![
            mt(),
            UnitParams {
                id: "mt2".into(),
                ..mt()
            },
        ];
        let instance = MarketInstance::new(vec![4.0], units).unwrap();
        let ed = economic_dispatch(&instance, &[vec![1], vec![1]]).unwrap();
        assert_eq!(ed.outputs, vec![vec![2.0], vec![2.0]]);
    }

    #[test]
    fn zero_demand_is_all_off() {
        let instance =
            MarketInstance::new(vec![0.0], vec![UnitParams::new("a", 0.0, 16.0, 3.0, 53.0)])
                .unwrap();
        let r = solve_centralized(&instance).unwrap();
        assert_eq!(r.f_star, 0.0);
        assert_eq!(r.schedule, Schedule::all_offline(&instance));
    }

    #[test]
    fn infeasible_minimums() {
        // one unit whose minimum exceeds demand
        let instance = MarketInstance::new(vec![1.0], vec![mt()]).unwrap();
        assert!(matches!(
            solve_centralized(&instance),
            Err(DispatchError::Infeasible)
        ));
    }

    #[test]
    fn enumeration_limit() {
        let units: Vec<UnitParams> = (0..8)
            .map(|k| UnitParams::new(format!("u{k}"), 0.0, 1.0 + k as f64, 1.0, 1.0))
            .collect();
        let instance = MarketInstance::new(vec![1.0; 3], units).unwrap();
        // 8 distinct units with 8 status vectors each: 8^8 profiles
        assert!(matches!(
            solve_centralized(&instance),
            Err(DispatchError::EnumerationLimit { .. })
        ));
    }

    #[test]
    fn ties_prefer_low_index_units() {
        let units = vec![
            UnitParams::new("a", 0.0, 5.0, 1.0, 1.0),
            UnitParams::new("b", 0.0, 5.0, 1.0, 1.0),
        ];
        let instance = MarketInstance::new(vec![3.0], units).unwrap();
        let r = solve_centralized(&instance).unwrap();
        assert_eq!(r.schedule.units[0], UnitSchedule::point(1, 3.0));
        assert_eq!(r.schedule.units[1], UnitSchedule::point(0, 0.0));
    }

    #[test]
    fn min_up_time_shapes_commitment() {
        let mut unit = UnitParams::new("slow", 1.0, 5.0, 1.0, 0.0);
        unit.min_up = 2;
        let cheap_peak = UnitParams::new("peak", 0.0, 5.0, 10.0, 0.0);
        let instance = MarketInstance::new(vec![3.0, 0.5], vec![unit, cheap_peak]).unwrap();
        let r = solve_centralized(&instance).unwrap();
        // slow must stay on in period 2 at its minimum, so demand 0.5 is infeasible for it
        // and the peaker has to serve both periods
        assert_eq!(r.schedule.units[0].u, vec![0, 0]);
        assert_eq!(r.f_star, 35.0);
    }
}
