//! Rigid-body math, DH chains and forward kinematics, and polyline
//! conversion for designing desired shapes.

mod dh;
mod pose;

pub use dh::{
    dh_to_polyline, dh_to_polyline_from, fk_chain, polyline_base_frame, polyline_to_dh,
    wrap_angle, DHChain, DHLink,
};
pub(crate) use dh::signed_angle_about;
pub use pose::{nearest_rotation, RigidPose};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("chain has no links")]
    EmptyChain,
    #[error("invalid radius {0} mm (must be finite and > 0)")]
    InvalidRadius(f64),
    #[error("invalid link {index}: {reason}")]
    InvalidLink { index: usize, reason: String },
    #[error("polyline needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate segment {index}: consecutive points coincide")]
    DegenerateSegment { index: usize },
}
