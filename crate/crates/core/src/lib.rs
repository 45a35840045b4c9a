//! Exact minimal-time trajectories of the control system
//!
//! ```text
//! x' = u,  y' = e^x - 1,  u in [-rho, rho]
//! ```
//!
//! on the cylinder `R x R/Z`. Optimal controls are bang-bang with at most one
//! switch; [`planner::solve_min_time`] picks between the direct plan and the
//! two one-switch families, and [`planner::pmp_certificate`] reconstructs the
//! adjoint that certifies the result. [`oracle`] holds an independent
//! grid-search estimator used for verification.

pub mod campaign;
pub mod cylinder;
pub mod error;
pub mod flow;
pub mod fmt;
pub mod instances;
pub mod oracle;
pub mod planner;
pub mod reconcile;
mod roots;
pub mod switching;

pub use cylinder::{
    circle_diff, circle_distance, group_product, larc_holds, normalize_system, wrap, CylinderPoint,
    GroupElement, InducedSystemParams, SystemParams,
};
pub use error::{Error, Result};
pub use flow::{
    flow_constant, flow_schedule, integrate_rk4, trace, ControlSchedule, Segment, TracePoint,
};
pub use oracle::{oracle_min_time, sweep, OracleConfig, OracleResult};
pub use planner::{
    find_tie_instance, lower_bound, pmp_certificate, solve_min_time, Certificate, Plan,
    PlanDocument, PlanKind, Solution,
};
pub use switching::{
    fiber_offset, first_integer_crossing, Branch, CrossingKind, CrossingResult, OffsetData,
};
