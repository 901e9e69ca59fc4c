//! Optical-marker ingestion, DH recovery of realized robots, and error
//! tables against the target chain.

mod markers;
mod recover;
mod synthetic;

pub use markers::{
    average_samples, read_marker_csv, write_marker_csv, MarkerId, MarkerRecord, MarkerRole,
    TimedPose,
};
pub use recover::{
    canonical_chain, dh_errors, recover_dh, DhParameter, ErrorRow, MeasuredDH, Phase,
    MIN_DIRECTION_MM,
};
pub use synthetic::{ideal_marker_poses, synthetic_markers, SyntheticOptions, MARKER_OFFSET_MM};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasurementError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("marker record '{0}' has no samples")]
    EmptyRecord(String),
    #[error("unrecognized marker label '{0}'")]
    BadLabel(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no joint markers found")]
    NoJoints,
    #[error("joint {joint}: missing {role:?} marker")]
    MissingMarker { joint: usize, role: MarkerRole },
    #[error("joint {joint}: degenerate {what} (shorter than 1 mm)")]
    Degenerate { joint: usize, what: &'static str },
    #[error(
        "topology mismatch: target has {target_links} links but measurement has \
         {joints} joints, {twists} twists, {lengths} lengths"
    )]
    TopologyMismatch {
        target_links: usize,
        joints: usize,
        twists: usize,
        lengths: usize,
    },
}
