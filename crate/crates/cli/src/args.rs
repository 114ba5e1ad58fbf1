use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uplift_zero::amendments::Family;
use uplift_zero::Formulation;

#[derive(Debug, Parser)]
#[command(
    name = "uplift-zero",
    version,
    about = "Dispatch, prices, uplift and uplift-removing revenue amendments"
)]
pub struct Cli {
    /// Machine-readable output at full precision.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the centralized commitment and dispatch problem.
    Dispatch {
        #[command(flatten)]
        market: MarketArgs,
        /// Write the schedule JSON here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the market price.
    Price {
        #[command(flatten)]
        market: MarketArgs,
        #[arg(long, value_enum, default_value_t = PriceMethod::Chp)]
        method: PriceMethod,
    },
    /// Per-unit uplift at the dispatched schedule.
    Uplift {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        pricing: PricingArgs,
        /// Print CSV instead of a table.
        #[arg(long)]
        csv: bool,
    },
    /// Build an amendment for every unit.
    Amend {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        pricing: PricingArgs,
        #[command(flatten)]
        family: FamilyArgs,
        /// Write the bundle file here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a bundle file against the dispatched market.
    Verify {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        pricing: PricingArgs,
        /// Bundle file produced by `amend` or written by hand.
        #[arg(long)]
        bundles: PathBuf,
    },
    /// Dispatch, price, uplift, amendments and verification in one table.
    Report {
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        pricing: PricingArgs,
        #[command(flatten)]
        family: FamilyArgs,
    },
}

#[derive(Debug, Args)]
pub struct MarketArgs {
    /// Instance JSON file.
    #[arg(required_unless_present = "scarf", conflicts_with = "scarf")]
    pub instance: Option<PathBuf>,
    /// Use the built-in three-technology fleet at this demand.
    #[arg(long, value_name = "DEMAND")]
    pub scarf: Option<f64>,
    /// Use this schedule instead of solving the dispatch problem.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PricingArgs {
    #[arg(long = "price-method", value_enum, default_value_t = PriceMethod::Chp)]
    pub method: PriceMethod,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, default_value = "convex-hull", value_parser = parse_family)]
    pub family: Family,
    #[arg(long, value_enum, default_value_t = FormulationArg::Xu)]
    pub formulation: FormulationArg,
}

fn parse_family(s: &str) -> Result<Family, String> {
    match s.parse::<Family>()? {
        Family::Custom => Err("`custom` bundles are checked with `verify`".into()),
        f => Ok(f),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriceMethod {
    Chp,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulationArg {
    Xu,
    G,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Xu => Formulation::StatusOutput,
            FormulationArg::G => Formulation::OutputOnly,
        }
    }
}
