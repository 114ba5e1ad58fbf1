use serde::{Deserialize, Serialize};

use super::{MarketInstance, ToleranceConfig, UnitParams};
use crate::error::ModelError;

/// Upper bound on the number of expanded units accepted from a file.
const MAX_UNITS: u64 = 10_000;

/// On-disk instance layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub periods: usize,
    pub demand: Vec<f64>,
    pub unit_types: Vec<UnitTypeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitTypeEntry {
    pub name: String,
    pub count: u64,
    pub g_min: f64,
    pub g_max: f64,
    pub marginal_cost: f64,
    pub startup_cost: f64,
    pub initial_status: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_up: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_down: Option<usize>,
}

impl InstanceFile {
    /// Expand unit types into individually named units and validate the result.
    pub fn into_instance(self) -> Result<MarketInstance, ModelError> {
        let total: u64 = self
            .unit_types
            .iter()
            .map(|t| t.count)
            .fold(0, u64::saturating_add);
        if total > MAX_UNITS {
            return Err(ModelError::InvalidInstance(format!(
                "{total} units exceeds the limit of {MAX_UNITS}"
            )));
        }
        let mut units = Vec::with_capacity(total as usize);
        for entry in &self.unit_types {
            if entry.count == 0 {
                return Err(ModelError::InvalidUnit {
                    unit: entry.name.clone(),
                    field: "count",
                    reason: "must be at least 1".into(),
                });
            }
            for k in 1..=entry.count {
                let unit = UnitParams {
                    id: format!("{}_{k}", entry.name),
                    kind: entry.name.clone(),
                    g_min: entry.g_min,
                    g_max: entry.g_max,
                    marginal_cost: entry.marginal_cost,
                    startup_cost: entry.startup_cost,
                    initial_status: entry.initial_status,
                    min_up: entry.min_up.unwrap_or(0),
                    min_down: entry.min_down.unwrap_or(0),
                };
                unit.validate()?;
                units.push(unit);
            }
        }
        let instance = MarketInstance {
            periods: self.periods,
            demand: self.demand,
            units,
            tolerances: self.tolerances.unwrap_or_default(),
        };
        instance.validate()?;
        Ok(instance)
    }

    /// Collapse runs of identical units of the same kind back into unit types.
    pub fn from_instance(instance: &MarketInstance) -> Self {
        let mut unit_types: Vec<UnitTypeEntry> = Vec::new();
        let mut last: Option<&UnitParams> = None;
        for unit in &instance.units {
            match (last, unit_types.last_mut()) {
                (Some(prev), Some(entry)) if prev.kind == unit.kind && prev.same_offer(unit) => {
                    entry.count += 1;
                }
                _ => unit_types.push(UnitTypeEntry {
                    name: unit.kind.clone(),
                    count: 1,
                    g_min: unit.g_min,
                    g_max: unit.g_max,
                    marginal_cost: unit.marginal_cost,
                    startup_cost: unit.startup_cost,
                    initial_status: unit.initial_status,
                    min_up: (unit.min_up > 0).then_some(unit.min_up),
                    min_down: (unit.min_down > 0).then_some(unit.min_down),
                }),
            }
            last = Some(unit);
        }
        Self {
            periods: instance.periods,
            demand: instance.demand.clone(),
            unit_types,
            tolerances: (instance.tolerances != ToleranceConfig::default())
                .then_some(instance.tolerances),
        }
    }
}

/// Parse and validate an instance from JSON text.
pub fn parse_instance(text: &str) -> Result<MarketInstance, ModelError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.into_instance()
}

/// Read, parse and validate an instance file.
pub fn load_instance(path: impl AsRef<std::path::Path>) -> Result<MarketInstance, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_instance(&text)
}

impl MarketInstance {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from_instance(self))
            .expect("instance serialization is infallible")
    }
}
