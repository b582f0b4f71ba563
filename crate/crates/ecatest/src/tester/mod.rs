//! The property tester: plans, grid views, exact feasibility, pair classes
//! and the testers built from them.

mod classify;
mod feasible;
mod grid;
mod params;
mod run;

pub use classify::{violation_check, Classifier, PairClass, Requirement};
pub use feasible::{check_feasible, runs_feasible, Feasibility, InfeasibleReason};
pub use grid::{grid_intervals, CellView, Conflict, GridIntervals, GridView, Run, Topology};
pub use params::{plan, sample_count, spread_grid, Constants, FallbackParams, Params, Plan, Profile};
pub use run::{
    plan_wide, test, test_fallback, test_trivial, test_wide, Decision, PlanSummary, RejectReason, Variant, Verdict,
    WidePlan, TRIVIAL_RADIUS,
};
