use std::fmt::Write as _;

use serde_json::{json, Value};
use uplift_zero::amendments::{bundles_to_json, AmendmentBundle};
use uplift_zero::{Formulation, VerificationReport};

use crate::args::{FamilyArgs, PriceMethod};
use crate::commands::{fmt4, fmt_vec, Cleared};

fn method_name(m: PriceMethod) -> &'static str {
    match m {
        PriceMethod::Chp => "convex hull",
        PriceMethod::Marginal => "marginal",
    }
}

fn formulation_name(f: Formulation) -> &'static str {
    match f {
        Formulation::StatusOutput => "xu",
        Formulation::OutputOnly => "g",
    }
}

pub fn uplift_table(c: &Cleared) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "price: {} ({})",
        fmt_vec(&c.price),
        method_name(c.method)
    )
    .unwrap();
    writeln!(
        out,
        "{:<16} {:>10} {:>10} {:>10}",
        "unit", "pi_star", "pi_plus", "uplift"
    )
    .unwrap();
    for u in &c.uplift.units {
        writeln!(
            out,
            "{:<16} {:>10} {:>10} {:>10}",
            u.unit_id,
            fmt4(u.pi_star),
            fmt4(u.pi_plus),
            fmt4(u.uplift)
        )
        .unwrap();
    }
    writeln!(out, "total uplift: {}", fmt4(c.uplift.total)).unwrap();
    out
}

struct Row {
    kind: String,
    units: usize,
    online: usize,
    outputs: Vec<String>,
    supply: Vec<f64>,
    uplift: f64,
}

/// One row per unit type in order of first appearance.
fn rows(c: &Cleared) -> Vec<Row> {
    let periods = c.instance.periods;
    let mut rows: Vec<Row> = Vec::new();
    for ((unit, x), up) in c
        .instance
        .units
        .iter()
        .zip(&c.schedule.units)
        .zip(&c.uplift.units)
    {
        let idx = match rows.iter().position(|r| r.kind == unit.kind) {
            Some(i) => i,
            None => {
                rows.push(Row {
                    kind: unit.kind.clone(),
                    units: 0,
                    online: 0,
                    outputs: Vec::new(),
                    supply: vec![0.0; periods],
                    uplift: 0.0,
                });
                rows.len() - 1
            }
        };
        let row = &mut rows[idx];
        row.units += 1;
        row.uplift += up.uplift;
        for (s, g) in row.supply.iter_mut().zip(&x.g) {
            *s += g;
        }
        if x.u.iter().any(|&s| s == 1) {
            row.online += 1;
            let g = fmt_vec(&x.g);
            if !row.outputs.contains(&g) {
                row.outputs.push(g);
            }
        }
    }
    rows
}

/// Units sharing a rendered amendment, listed together.
fn grouped_amendments(bundles: &[AmendmentBundle]) -> Vec<(Vec<&str>, String)> {
    let mut groups: Vec<(Vec<&str>, String)> = Vec::new();
    for b in bundles.iter().filter(|b| !b.n.is_zero_const()) {
        let n = b.n.to_string();
        match groups.iter_mut().find(|(_, e)| *e == n) {
            Some((ids, _)) => ids.push(&b.unit_id),
            None => groups.push((vec![&b.unit_id], n)),
        }
    }
    groups
}

fn uplift_after(aggregate: &VerificationReport) -> f64 {
    aggregate
        .get("zero_total_uplift")
        .map_or(f64::NAN, |c| c.lhs)
}

pub fn report_text(
    c: &Cleared,
    fam: &FamilyArgs,
    bundles: &[AmendmentBundle],
    reports: &[VerificationReport],
    aggregate: &VerificationReport,
) -> String {
    let mut out = String::new();
    writeln!(out, "demand: {}", fmt_vec(&c.instance.demand)).unwrap();
    writeln!(
        out,
        "market price: {} ({})",
        fmt_vec(&c.price),
        method_name(c.method)
    )
    .unwrap();
    writeln!(out, "dispatch cost: {}", fmt4(c.f_star)).unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "{:<14} {:>5} {:>7} {:>18} {:>10} {:>10}",
        "unit type", "units", "online", "output per unit", "supply", "uplift"
    )
    .unwrap();
    let rows = rows(c);
    for r in &rows {
        let per_unit = if r.outputs.is_empty() {
            "-".to_string()
        } else {
            r.outputs.join(" / ")
        };
        writeln!(
            out,
            "{:<14} {:>5} {:>7} {:>18} {:>10} {:>10}",
            r.kind,
            r.units,
            r.online,
            per_unit,
            fmt_vec(&r.supply),
            fmt4(r.uplift)
        )
        .unwrap();
    }
    let periods = c.instance.periods;
    let supply: Vec<f64> = (0..periods)
        .map(|t| rows.iter().map(|r| r.supply[t]).sum())
        .collect();
    writeln!(
        out,
        "{:<14} {:>5} {:>7} {:>18} {:>10} {:>10}",
        "total",
        rows.iter().map(|r| r.units).sum::<usize>(),
        rows.iter().map(|r| r.online).sum::<usize>(),
        "",
        fmt_vec(&supply),
        fmt4(c.uplift.total)
    )
    .unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "total uplift: {} -> {}",
        fmt4(c.uplift.total),
        fmt4(uplift_after(aggregate))
    )
    .unwrap();
    writeln!(
        out,
        "amendments ({}, {}):",
        fam.family,
        formulation_name(fam.formulation.into())
    )
    .unwrap();
    let groups = grouped_amendments(bundles);
    if groups.is_empty() {
        writeln!(out, "  none").unwrap();
    }
    for (ids, n) in groups {
        writeln!(out, "  {}: N = {n}", ids.join(", ")).unwrap();
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    writeln!(out, "verification: {passed}/{} units pass", reports.len()).unwrap();
    for r in reports.iter().filter(|r| !r.passed()) {
        for f in r.failures() {
            writeln!(
                out,
                "  FAIL {} unit={}",
                f.id,
                f.unit.as_deref().unwrap_or("?")
            )
            .unwrap();
        }
    }
    writeln!(
        out,
        "aggregate: {}",
        if aggregate.passed() { "pass" } else { "FAIL" }
    )
    .unwrap();
    for f in aggregate.failures() {
        writeln!(
            out,
            "  FAIL {} lhs={} rhs={}",
            f.id,
            fmt4(f.lhs),
            fmt4(f.rhs)
        )
        .unwrap();
    }
    out
}

pub fn report_json(
    c: &Cleared,
    fam: &FamilyArgs,
    bundles: &[AmendmentBundle],
    reports: &[VerificationReport],
    aggregate: &VerificationReport,
) -> Value {
    let amendments: Value =
        serde_json::from_str(&bundles_to_json(bundles)).expect("bundle JSON round-trips");
    json!({
        "demand": c.instance.demand,
        "price_method": method_name(c.method),
        "price": c.price,
        "f_star": c.f_star,
        "schedule": c.schedule.to_json(&c.instance),
        "uplift": c.uplift,
        "family": fam.family,
        "formulation": Formulation::from(fam.formulation),
        "amendments": amendments,
        "verification": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        "aggregate": aggregate.to_json(),
        "total_uplift_after": uplift_after(aggregate),
    })
}
