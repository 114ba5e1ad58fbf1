//! The three-technology market with six smokestack, five high-tech and five
//! medium-tech units, all initially offline, over one period.

use crate::error::ModelError;
use crate::model::{InstanceFile, MarketInstance, UnitTypeEntry};

fn entry(
    name: &str,
    count: u64,
    g_min: f64,
    g_max: f64,
    marginal_cost: f64,
    startup_cost: f64,
) -> UnitTypeEntry {
    UnitTypeEntry {
        name: name.to_string(),
        count,
        g_min,
        g_max,
        marginal_cost,
        startup_cost,
        initial_status: 0,
        min_up: None,
        min_down: None,
    }
}

/// Instance file for the fleet at the given demand.
pub fn scarf_file(demand: f64) -> InstanceFile {
    InstanceFile {
        periods: 1,
        demand: vec![demand],
        unit_types: vec![
            entry("smokestack", 6, 0.0, 16.0, 3.0, 53.0),
            entry("high_tech", 5, 0.0, 7.0, 2.0, 30.0),
            entry("med_tech", 5, 2.0, 6.0, 7.0, 0.0),
        ],
        tolerances: None,
    }
}

/// The fleet at the given demand, expanded into individually named units.
pub fn scarf_instance(demand: f64) -> Result<MarketInstance, ModelError> {
    scarf_file(demand).into_instance()
}
