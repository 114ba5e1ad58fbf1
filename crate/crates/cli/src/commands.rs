use std::fmt::{self, Write as _};
use std::path::Path;

use serde_json::json;
use uplift_zero::amendments::{self, bundles_to_json, parse_bundles, AmendmentBundle};
use uplift_zero::dispatch::solve_centralized;
use uplift_zero::model::load_instance;
use uplift_zero::pricing::{convex_hull_price, marginal_price, ChpResult};
use uplift_zero::scarf::scarf_instance;
use uplift_zero::uplift::{uplift_report, UpliftReport};
use uplift_zero::{
    AmendError, DispatchError, MarketInstance, ModelError, ProducerView, Schedule,
    VerificationReport,
};

use crate::args::{Cli, Command, FamilyArgs, MarketArgs, PriceMethod, PricingArgs};
use crate::table;

/// Why a command did not succeed; the exit code follows from the variant.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid input.
    Input(String),
    /// Infeasible market, violated precondition, or failed verification.
    Rejected(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Rejected(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Rejected(m) => f.write_str(m),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<DispatchError> for Failure {
    fn from(e: DispatchError) -> Self {
        Failure::Rejected(e.to_string())
    }
}

impl From<AmendError> for Failure {
    fn from(e: AmendError) -> Self {
        match e {
            AmendError::Model(_) | AmendError::Expr(_) => Failure::Input(e.to_string()),
            _ => Failure::Rejected(e.to_string()),
        }
    }
}

pub fn fmt4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

pub fn fmt_vec(v: &[f64]) -> String {
    if v.len() == 1 {
        fmt4(v[0])
    } else {
        format!(
            "[{}]",
            v.iter().map(|x| fmt4(*x)).collect::<Vec<_>>().join(", ")
        )
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("failed to read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Input(format!("failed to write {}: {e}", path.display())))
}

/// One unit per line.
fn schedule_text(v: &serde_json::Value) -> String {
    let map = v.as_object().expect("schedules serialize as objects");
    let lines: Vec<String> = map
        .iter()
        .map(|(id, x)| format!("  {}: {}", serde_json::Value::from(id.as_str()), x))
        .collect();
    format!("{{\n{}\n}}\n", lines.join(",\n"))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize") + "\n"
}

fn instance(args: &MarketArgs) -> Result<MarketInstance, Failure> {
    match (&args.instance, args.scarf) {
        (_, Some(d)) => Ok(scarf_instance(d)?),
        (Some(path), None) => Ok(load_instance(path)?),
        (None, None) => Err(Failure::Input(
            "an instance file or --scarf is required".into(),
        )),
    }
}

/// Dispatched schedule and its cost: read from `--schedule` or solved.
fn schedule(args: &MarketArgs, inst: &MarketInstance) -> Result<(Schedule, f64), Failure> {
    match &args.schedule {
        Some(path) => {
            let x = Schedule::parse(&read(path)?, inst)?;
            let cost = inst
                .units
                .iter()
                .zip(&x.units)
                .map(|(u, s)| u.cost_unchecked(s))
                .sum();
            Ok((x, cost))
        }
        None => {
            let r = solve_centralized(inst)?;
            Ok((r.schedule, r.f_star))
        }
    }
}

/// Market price plus the convex-hull details when that method was used.
pub fn price(
    inst: &MarketInstance,
    x: &Schedule,
    method: PriceMethod,
) -> Result<(Vec<f64>, Option<ChpResult>), Failure> {
    match method {
        PriceMethod::Chp => {
            let r = convex_hull_price(inst);
            Ok((r.price.clone(), Some(r)))
        }
        PriceMethod::Marginal => Ok((marginal_price(inst, x)?, None)),
    }
}

/// Everything downstream commands need about the cleared market.
pub struct Cleared {
    pub instance: MarketInstance,
    pub schedule: Schedule,
    pub f_star: f64,
    pub method: PriceMethod,
    pub price: Vec<f64>,
    pub uplift: UpliftReport,
}

fn clear(market: &MarketArgs, pricing: &PricingArgs) -> Result<Cleared, Failure> {
    let instance = instance(market)?;
    let (schedule, f_star) = schedule(market, &instance)?;
    let (price, _) = price(&instance, &schedule, pricing.method)?;
    let uplift = uplift_report(&instance, &price, &schedule)?;
    Ok(Cleared {
        instance,
        schedule,
        f_star,
        method: pricing.method,
        price,
        uplift,
    })
}

fn view(c: &Cleared, i: usize, f: uplift_zero::Formulation) -> Result<ProducerView, Failure> {
    Ok(ProducerView::new(
        &c.instance.units[i],
        &c.price,
        &c.schedule.units[i],
        f,
        c.instance.tolerances,
    )?)
}

/// One amendment per unit from the chosen family.
pub fn build_all(c: &Cleared, fam: &FamilyArgs) -> Result<Vec<AmendmentBundle>, Failure> {
    let f = fam.formulation.into();
    (0..c.instance.units.len())
        .map(|i| {
            let v = view(c, i, f)?;
            amendments::build(&v, fam.family, None).map_err(|e| {
                let id = &c.instance.units[i].id;
                match Failure::from(e) {
                    Failure::Rejected(m) => {
                        Failure::Rejected(format!("unit `{id}`, family {}: {m}", fam.family))
                    }
                    other => other,
                }
            })
        })
        .collect()
}

/// Per-unit condition reports followed by the aggregate check.
pub fn verify_all(
    c: &Cleared,
    bundles: &[AmendmentBundle],
) -> Result<(Vec<VerificationReport>, VerificationReport), Failure> {
    let mut reports = Vec::with_capacity(bundles.len());
    for b in bundles {
        let i = c
            .instance
            .unit_index(&b.unit_id)
            .ok_or_else(|| Failure::Input(format!("bundle names unknown unit `{}`", b.unit_id)))?;
        reports.push(amendments::verify_conditions(
            &view(c, i, b.formulation)?,
            b,
        )?);
    }
    let aggregate =
        amendments::check_zero_total_uplift(&c.instance, &c.price, &c.schedule, bundles)?;
    Ok((reports, aggregate))
}

/// Run a command and return its stdout text.
pub fn run(cli: &Cli) -> Result<String, Failure> {
    let mut out = String::new();
    match &cli.command {
        Command::Dispatch { market, out: path } => {
            let inst = instance(market)?;
            let r = solve_centralized(&inst)?;
            let sched = schedule_text(&r.schedule.to_json(&inst));
            if let Some(path) = path {
                write(path, &sched)?;
            }
            if cli.json {
                out = pretty(&json!({
                    "f_star": r.f_star,
                    "enumerated": r.enumerated,
                    "schedule": r.schedule.to_json(&inst),
                }));
            } else {
                writeln!(out, "f* = {}", fmt4(r.f_star)).unwrap();
                writeln!(out, "profiles enumerated: {}", r.enumerated).unwrap();
                match path {
                    Some(path) => writeln!(out, "schedule written to {}", path.display()).unwrap(),
                    None => out.push_str(&sched),
                }
            }
        }
        Command::Price { market, method } => {
            let inst = instance(market)?;
            let x = match method {
                PriceMethod::Marginal => schedule(market, &inst)?.0,
                PriceMethod::Chp => Schedule::all_offline(&inst),
            };
            let (p, chp) = price(&inst, &x, *method)?;
            if cli.json {
                out = pretty(&match &chp {
                    Some(r) => serde_json::to_value(r).expect("price result serializes"),
                    None => json!({ "price": p }),
                });
            } else {
                writeln!(out, "price: {}", fmt_vec(&p)).unwrap();
                if let Some(r) = chp {
                    writeln!(out, "dual value: {}", fmt4(r.dual_value)).unwrap();
                    writeln!(
                        out,
                        "converged: {} after {} iterations",
                        r.converged, r.iterations
                    )
                    .unwrap();
                }
            }
        }
        Command::Uplift {
            market,
            pricing,
            csv,
        } => {
            let c = clear(market, pricing)?;
            if cli.json {
                out = pretty(&json!({ "price": c.price, "uplift": c.uplift }));
            } else if *csv {
                out = c.uplift.to_csv();
            } else {
                out = table::uplift_table(&c);
            }
        }
        Command::Amend {
            market,
            pricing,
            family,
            out: path,
        } => {
            let c = clear(market, pricing)?;
            let text = bundles_to_json(&build_all(&c, family)?) + "\n";
            match path {
                Some(path) => {
                    write(path, &text)?;
                    writeln!(out, "bundles written to {}", path.display()).unwrap();
                }
                None => out = text,
            }
        }
        Command::Verify {
            market,
            pricing,
            bundles,
        } => {
            let c = clear(market, pricing)?;
            let parsed =
                parse_bundles(&read(bundles)?).map_err(|e| Failure::Input(e.to_string()))?;
            let (reports, aggregate) = verify_all(&c, &parsed)?;
            let ok = reports.iter().all(|r| r.passed()) && aggregate.passed();
            if cli.json {
                out = pretty(&json!({
                    "passed": ok,
                    "units": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
                    "aggregate": aggregate.to_json(),
                }));
            } else {
                for r in &reports {
                    out.push_str(&r.to_string());
                }
                out.push_str(&aggregate.to_string());
            }
            if !ok {
                print!("{out}");
                return Err(Failure::Rejected("verification failed".into()));
            }
        }
        Command::Report {
            market,
            pricing,
            family,
        } => {
            let c = clear(market, pricing)?;
            let bundles = build_all(&c, family)?;
            let (reports, aggregate) = verify_all(&c, &bundles)?;
            out = if cli.json {
                pretty(&table::report_json(
                    &c, family, &bundles, &reports, &aggregate,
                ))
            } else {
                table::report_text(&c, family, &bundles, &reports, &aggregate)
            };
            if !(reports.iter().all(|r| r.passed()) && aggregate.passed()) {
                print!("{out}");
                return Err(Failure::Rejected("verification failed".into()));
            }
        }
    }
    Ok(out)
}
