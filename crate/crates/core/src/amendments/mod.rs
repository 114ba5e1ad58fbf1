//! Revenue amendments `N_i = −μᵀρ_i` built from redundant constraints,
//! their verification, and the single aggregate constraint that removes all
//! uplift at once.

mod aggregate;
mod builders;
mod verify;

pub use aggregate::{
    aggregate_constraint, check_zero_total_uplift, AggregateConstraint, PERTURBATIONS,
};
pub use builders::{
    build, build_constant_profit, build_convex_hull_amendment, build_general_form,
    build_linear_unit, build_status_delta, build_status_profile, build_uplift_delta, cost_expr,
    profit_expr, status_expr,
};
pub use verify::verify_conditions;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::AmendError;
use crate::expr::Expr;
use crate::model::Formulation;

/// Which construction produced an amendment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    UpliftDelta,
    ConstantProfit,
    GeneralForm,
    StatusDelta,
    StatusProfile,
    LinearUnit,
    ConvexHull,
    Custom,
}

impl Family {
    pub const BUILT_IN: [Family; 7] = [
        Family::UpliftDelta,
        Family::ConstantProfit,
        Family::GeneralForm,
        Family::StatusDelta,
        Family::StatusProfile,
        Family::LinearUnit,
        Family::ConvexHull,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::UpliftDelta => "uplift-delta",
            Family::ConstantProfit => "constant-profit",
            Family::GeneralForm => "general-form",
            Family::StatusDelta => "status-delta",
            Family::StatusProfile => "status-profile",
            Family::LinearUnit => "linear-unit",
            Family::ConvexHull => "convex-hull",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::BUILT_IN
            .iter()
            .chain(std::iter::once(&Family::Custom))
            .find(|f| f.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown amendment family `{s}`"))
    }
}

/// One producer's amendment together with the constraints it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct AmendmentBundle {
    pub unit_id: String,
    pub n: Expr,
    pub rho: Vec<Expr>,
    pub mu: Vec<f64>,
    pub family: Family,
    pub formulation: Formulation,
}

impl AmendmentBundle {
    /// `N ≡ 0` with no constraints.
    pub fn zero(unit_id: &str, formulation: Formulation) -> Self {
        Self {
            unit_id: unit_id.to_string(),
            n: Expr::Const(0.0),
            rho: Vec::new(),
            mu: Vec::new(),
            family: Family::Custom,
            formulation,
        }
    }

    /// Bundle realizing `N` through the single constraint `−N ≤ 0` with multiplier 1.
    pub fn from_amendment(
        unit_id: &str,
        n: Expr,
        family: Family,
        formulation: Formulation,
    ) -> Self {
        Self {
            unit_id: unit_id.to_string(),
            rho: vec![n.clone().neg()],
            mu: vec![1.0],
            n,
            family,
            formulation,
        }
    }

    /// Pointwise convex combination `α·N₁ + (1−α)·N₂` as a single-constraint bundle.
    pub fn blend(
        a: &AmendmentBundle,
        b: &AmendmentBundle,
        alpha: f64,
    ) -> Result<AmendmentBundle, AmendError> {
        if a.unit_id != b.unit_id || a.formulation != b.formulation {
            return Err(AmendError::Precondition(
                "blended bundles must share unit and formulation".into(),
            ));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(AmendError::Precondition(format!(
                "blend weight {alpha} is outside [0, 1]"
            )));
        }
        let n = Expr::sum(vec![
            a.n.clone().scale(alpha),
            b.n.clone().scale(1.0 - alpha),
        ]);
        Ok(Self::from_amendment(
            &a.unit_id,
            n,
            Family::Custom,
            a.formulation,
        ))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleEntry {
    #[serde(rename = "N")]
    n: Expr,
    rho: Vec<Expr>,
    mu: Vec<f64>,
    family: Family,
    formulation: Formulation,
}

/// `{ "unit_id": { "N": .., "rho": [..], "mu": [..], "family": .., "formulation": .. } }`
pub fn bundles_to_json(bundles: &[AmendmentBundle]) -> String {
    let map: IndexMap<&str, BundleEntry> = bundles
        .iter()
        .map(|b| {
            (
                b.unit_id.as_str(),
                BundleEntry {
                    n: b.n.clone(),
                    rho: b.rho.clone(),
                    mu: b.mu.clone(),
                    family: b.family,
                    formulation: b.formulation,
                },
            )
        })
        .collect();
    serde_json::to_string_pretty(&map).expect("bundle serialization is infallible")
}

/// Parse a bundle file; shape errors are reported, semantic checks are left
/// to the verifier.
pub fn parse_bundles(text: &str) -> Result<Vec<AmendmentBundle>, AmendError> {
    let map: IndexMap<String, BundleEntry> = serde_json::from_str(text)
        .map_err(|e| AmendError::Precondition(format!("invalid bundle file: {e}")))?;
    map.into_iter()
        .map(|(unit_id, e)| {
            if e.rho.len() != e.mu.len() {
                return Err(AmendError::BadMultipliers(e.mu));
            }
            Ok(AmendmentBundle {
                unit_id,
                n: e.n,
                rho: e.rho,
                mu: e.mu,
                family: e.family,
                formulation: e.formulation,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{g, u};

    #[test]
    fn family_names_round_trip() {
        for f in Family::BUILT_IN {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
            assert_eq!(
                serde_json::to_string(&f).unwrap(),
                format!("\"{}\"", f.name())
            );
        }
        assert!("hull".parse::<Family>().is_err());
    }

    #[test]
    fn bundle_file_round_trip() {
        let b = AmendmentBundle {
            unit_id: "mt_1".into(),
            n: g(0).sub(u(0).scale(2.0)).scale(0.5),
            rho: vec![u(0).scale(2.0).sub(g(0))],
            mu: vec![0.5],
            family: Family::LinearUnit,
            formulation: Formulation::StatusOutput,
        };
        let text = bundles_to_json(std::slice::from_ref(&b));
        assert!(text.contains("\"N\""));
        assert_eq!(parse_bundles(&text).unwrap(), vec![b]);
        assert!(parse_bundles(r#"{"a":{"N":{"op":"const","value":0},"rho":[],"mu":[1],"family":"custom","formulation":"xu"}}"#).is_err());
        assert!(parse_bundles("[]").is_err());
    }
}
