//! Sequential parametrized motion planning for `n` robots among `m` point
//! obstacles in even-dimensional Euclidean space.
//!
//! Given obstacle positions and `r` stages of robot waypoints, [`plan`]
//! produces collision-free piecewise-analytic trajectories that visit every
//! stage at its scheduled time. The input space is split into the strata
//! computed by [`classify`]; on each stratum the construction depends
//! continuously on the input, and there are exactly `rn + m - 1` strata
//! counted by cardinality of the projection set.

// NaN-rejecting comparisons are written as negations on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod manoeuvre;
pub mod planner;
pub mod scenario;
pub mod strata;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{
    direction, min_clearance_comoving, min_clearance_static, perp, project_scalar, Arc, Piece,
    PiecewisePath, Point, Segment, UnitVector,
};
pub use manoeuvre::{Manoeuvre, SingleRobotScene};
pub use planner::{core_section, delta, desingularize, mu_step, plan, TrajectoryBundle};
pub use scenario::{Scenario, DEFAULT_TOL_EQ};
pub use strata::{
    classify, complexity, desingularized_order, stratum_piece_count, QuasiOrder, StratumDescriptor,
    SymbolId,
};
pub use verify::{
    continuity_probe, continuity_probe_with, dense_sample_oracle, random_scenario,
    scenario_with_class_count, verify, Degeneracy, Perturbation, ScenarioSpec, VerificationReport,
};
