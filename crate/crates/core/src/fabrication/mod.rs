//! Compiles a desired DH chain into physical fold parameters on the tube
//! and lays them out as a flat pattern.

mod model;
mod pattern;
mod plan;

pub use model::{
    arc_offset, axial_fold_distance, cylinder_length, invert_fold_distance, sgn,
    MAX_INVERTIBLE_THETA,
};
pub use pattern::{flat_pattern, FlatPattern, FoldPoint, PatternMark};
pub use plan::{
    compile_plan, recover_chain, FabricationPlan, GapModel, JointSpec, Method, PlanWarning,
    LOOP_SCREW_GAP_MM, SINGULAR_MARGIN,
};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FabricationError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fold distance is singular at theta = {theta} rad")]
    Singularity { theta: f64 },
    #[error(
        "joint {joint}: angle {:.4} deg is within {:.1} deg of a half turn",
        theta.to_degrees(),
        SINGULAR_MARGIN.to_degrees()
    )]
    NearSingular { joint: usize, theta: f64 },
    #[error("cylinder length would be <= 0: a = {a} mm, needs a > {min_a} mm")]
    InfeasibleLength { a: f64, min_a: f64 },
    #[error("link {link} infeasible: a = {a} mm, minimum feasible a > {min_a} mm")]
    InfeasibleLink { link: usize, a: f64, min_a: f64 },
    #[error("fold distance {s_tilde} mm outside invertible range [{min}, {max}] mm")]
    Inversion { s_tilde: f64, min: f64, max: f64 },
    #[error("joint {joint}: fold distance {s_tilde} mm outside invertible range [{min}, {max}] mm")]
    JointInversion {
        joint: usize,
        s_tilde: f64,
        min: f64,
        max: f64,
    },
}
