//! Dispatch, pricing and uplift payments for small non-convex power markets,
//! and revenue amendments built from redundant constraints that remove the
//! uplift without changing any producer's best attainable profit.
//!
//! The pipeline is: [`dispatch::solve_centralized`] → [`pricing::convex_hull_price`]
//! or [`pricing::marginal_price`] → [`uplift::uplift_report`] → an amendment
//! builder from [`amendments`] → [`amendments::verify_conditions`].

pub mod amendments;
pub mod dispatch;
pub mod error;
pub mod expr;
pub mod model;
pub mod pricing;
pub mod producer;
pub mod redundant;
pub mod report;
pub mod scarf;
pub mod uplift;

pub use error::{AmendError, DispatchError, ModelError};
pub use expr::Expr;
pub use model::{Formulation, MarketInstance, Schedule, ToleranceConfig, UnitParams, UnitSchedule};
pub use producer::{ProducerView, Revenue};
pub use report::{ConditionCheck, VerificationReport};
