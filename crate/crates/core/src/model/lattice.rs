use super::{Formulation, UnitParams, UnitSchedule};

/// Equally spaced outputs per online period in the verification lattice.
pub const GRID_POINTS: usize = 21;

/// Cap on lattice size; beyond it the per-period grid is coarsened.
const MAX_LATTICE_POINTS: usize = 250_000;

/// Evaluation lattice over `X_i` used to decide "for all x in X_i" conditions.
///
/// For each feasible status vector the lattice holds the cross product of the
/// per-period candidate outputs: `{0}` when offline, otherwise a grid of
/// [`GRID_POINTS`] outputs on `[g_min, g_max]` plus the bounds and every anchor
/// output for that period. Under [`Formulation::OutputOnly`] points whose status
/// is not `θ(g)` are dropped, since the status is implied by the output.
pub fn feasible_set_samples(
    unit: &UnitParams,
    periods: usize,
    formulation: Formulation,
    anchors: &[UnitSchedule],
    eq_tol: f64,
) -> Vec<UnitSchedule> {
    let mut grid = GRID_POINTS;
    loop {
        let out = build(unit, periods, formulation, anchors, eq_tol, grid);
        if out.len() <= MAX_LATTICE_POINTS || grid <= 2 {
            return out;
        }
        grid = (grid / 2).max(2);
    }
}

fn build(
    unit: &UnitParams,
    periods: usize,
    formulation: Formulation,
    anchors: &[UnitSchedule],
    eq_tol: f64,
    grid: usize,
) -> Vec<UnitSchedule> {
    let mut base: Vec<f64> = (0..grid)
        .map(|k| {
            if k + 1 == grid {
                unit.g_max
            } else {
                unit.g_min + (unit.g_max - unit.g_min) * k as f64 / (grid - 1) as f64
            }
        })
        .collect();
    base.push(unit.g_min);
    base.push(unit.g_max);

    let mut points: Vec<UnitSchedule> = Vec::new();
    for u in unit.feasible_statuses(periods) {
        let per_period: Vec<Vec<f64>> = (0..periods)
            .map(|t| {
                if u[t] == 0 {
                    return vec![0.0];
                }
                let mut values = base.clone();
                values.extend(
                    anchors
                        .iter()
                        .filter(|a| a.periods() == periods && a.u[t] == 1)
                        .map(|a| a.g[t])
                        .filter(|g| *g >= unit.g_min - eq_tol && *g <= unit.g_max + eq_tol)
                        .map(|g| g.clamp(unit.g_min, unit.g_max)),
                );
                dedup_sorted(values, eq_tol)
            })
            .collect();
        cross_product(&u, &per_period, &mut points);
    }
    if formulation == Formulation::OutputOnly {
        points.retain(|x| x.u.iter().zip(&x.g).all(|(&u, &g)| (u == 1) == (g > 0.0)));
    }
    points
}

fn dedup_sorted(mut values: Vec<f64>, tol: f64) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match out.last() {
            Some(last) if (v - last).abs() <= tol => {}
            _ => out.push(v),
        }
    }
    out
}

fn cross_product(u: &[u8], per_period: &[Vec<f64>], out: &mut Vec<UnitSchedule>) {
    let mut index = vec![0usize; per_period.len()];
    loop {
        out.push(UnitSchedule {
            u: u.to_vec(),
            g: index.iter().zip(per_period).map(|(&k, v)| v[k]).collect(),
        });
        let mut t = per_period.len();
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            index[t] += 1;
            if index[t] < per_period[t].len() {
                break;
            }
            index[t] = 0;
        }
    }
}
