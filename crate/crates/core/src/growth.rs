//! Tip pose during eversion and body clearance against obstacles.
//!
//! Joint angles are fixed before growth; the tip advances along each link's
//! x-axis and every bend is applied the instant its joint everts. The body is
//! treated as a sphere of radius `r` swept along the centerline.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{fk_chain, DHChain, GeometryError, RigidPose};

/// Default centerline sampling step in mm.
pub const DEFAULT_STEP_MM: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("everted length {length} mm outside [0, {total}] mm")]
    OutOfRange { length: f64, total: f64 },
    #[error("sampling step must be > 0, got {0}")]
    InvalidStep(f64),
    #[error("invalid obstacle: {0}")]
    InvalidObstacle(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthState {
    chain: DHChain,
    everted_length: f64,
}

impl GrowthState {
    pub fn new(chain: DHChain, everted_length: f64) -> Result<Self, GrowthError> {
        chain.validate()?;
        let total = chain.total_length();
        if !(everted_length.is_finite() && (0.0..=total).contains(&everted_length)) {
            return Err(GrowthError::OutOfRange {
                length: everted_length,
                total,
            });
        }
        Ok(Self {
            chain,
            everted_length,
        })
    }

    pub fn fully_everted(chain: DHChain) -> Result<Self, GrowthError> {
        let total = chain.total_length();
        Self::new(chain, total)
    }

    pub fn chain(&self) -> &DHChain {
        &self.chain
    }

    pub fn everted_length(&self) -> f64 {
        self.everted_length
    }
}

/// Pose of the body at arclength `s` along the centerline of `chain`,
/// given its precomputed FK frames.
fn pose_at_arclength(chain: &DHChain, frames: &[RigidPose], s: f64) -> RigidPose {
    let total = chain.total_length();
    if s >= total {
        return *frames.last().expect("at least one frame");
    }
    let mut start = 0.0;
    for (k, link) in chain.links.iter().enumerate() {
        let end = start + link.a;
        if s < end {
            return frames[k]
                .compose(&RigidPose::rot_z(link.theta))
                .compose(&RigidPose::trans_x(s - start));
        }
        start = end;
    }
    *frames.last().expect("at least one frame")
}

pub fn tip_pose_at(state: &GrowthState) -> Result<RigidPose, GrowthError> {
    let frames = fk_chain(&state.chain)?;
    Ok(pose_at_arclength(&state.chain, &frames, state.everted_length))
}

/// A centerline sample carrying the body radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodySample {
    pub center: Vector3<f64>,
    pub radius: f64,
    /// Arclength of the sample from the base, in mm.
    pub arclength: f64,
}

/// Centerline samples at `0, step, 2·step, …` up to the everted length, plus
/// the tip when it does not fall on the grid.
pub fn sweep_samples(state: &GrowthState, step: f64) -> Result<Vec<BodySample>, GrowthError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(GrowthError::InvalidStep(step));
    }
    let frames = fk_chain(&state.chain)?;
    let len = state.everted_length;
    let r = state.chain.radius;
    let count = (len / step).floor() as usize + 1;
    let mut out = Vec::with_capacity(count + 1);
    for k in 0..count {
        let s = (k as f64 * step).min(len);
        out.push(BodySample {
            center: pose_at_arclength(&state.chain, &frames, s).translation,
            radius: r,
            arclength: s,
        });
    }
    let last = out.last().map_or(-1.0, |b| b.arclength);
    if len - last > 1e-9 * step.max(1.0) {
        out.push(BodySample {
            center: pose_at_arclength(&state.chain, &frames, len).translation,
            radius: r,
            arclength: len,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    #[serde(rename = "center_mm")]
    pub center: [f64; 3],
    #[serde(rename = "radius_mm")]
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AaBox {
    #[serde(rename = "min_mm")]
    pub min: [f64; 3],
    #[serde(rename = "max_mm")]
    pub max: [f64; 3],
}

/// Signed distance to a sphere surface (negative inside).
fn sphere_distance(s: &Sphere, p: &Vector3<f64>) -> f64 {
    (p - Vector3::from(s.center)).norm() - s.radius
}

/// Signed distance to an axis-aligned box surface (negative inside).
fn box_distance(b: &AaBox, p: &Vector3<f64>) -> f64 {
    let mut outside = 0.0_f64;
    let mut inside = f64::NEG_INFINITY;
    for k in 0..3 {
        let lo = b.min[k] - p[k];
        let hi = p[k] - b.max[k];
        let d = lo.max(hi);
        if d > 0.0 {
            outside += d * d;
        }
        inside = inside.max(d);
    }
    if outside > 0.0 {
        outside.sqrt()
    } else {
        inside
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObstacleScene {
    #[serde(default)]
    pub spheres: Vec<Sphere>,
    #[serde(default)]
    pub boxes: Vec<AaBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstacleRef {
    Sphere(usize),
    Box(usize),
}

impl ObstacleScene {
    pub fn validate(&self) -> Result<(), GrowthError> {
        for (i, s) in self.spheres.iter().enumerate() {
            if !(s.radius.is_finite() && s.radius > 0.0) || s.center.iter().any(|c| !c.is_finite()) {
                return Err(GrowthError::InvalidObstacle(format!(
                    "sphere {i}: radius must be > 0 and center finite"
                )));
            }
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if (0..3).any(|k| !(b.min[k].is_finite() && b.max[k].is_finite() && b.min[k] < b.max[k])) {
                return Err(GrowthError::InvalidObstacle(format!(
                    "box {i}: min must be < max on every axis"
                )));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty() && self.boxes.is_empty()
    }

    /// Nearest obstacle surface to `p` as (signed distance, obstacle).
    pub fn nearest(&self, p: &Vector3<f64>) -> Option<(f64, ObstacleRef)> {
        let spheres = self
            .spheres
            .iter()
            .enumerate()
            .map(|(i, s)| (sphere_distance(s, p), ObstacleRef::Sphere(i)));
        let boxes = self
            .boxes
            .iter()
            .enumerate()
            .map(|(i, b)| (box_distance(b, p), ObstacleRef::Box(i)));
        spheres
            .chain(boxes)
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clearance {
    NoObstacles,
    /// Minimum of (distance to nearest surface − body radius) over samples;
    /// negative means the body penetrates an obstacle.
    Min {
        clearance: f64,
        location: Vector3<f64>,
        arclength: f64,
        obstacle: ObstacleRef,
    },
}

impl Clearance {
    pub fn value(&self) -> Option<f64> {
        match self {
            Clearance::NoObstacles => None,
            Clearance::Min { clearance, .. } => Some(*clearance),
        }
    }
}

pub fn clearance(
    state: &GrowthState,
    scene: &ObstacleScene,
    step: f64,
) -> Result<Clearance, GrowthError> {
    scene.validate()?;
    let samples = sweep_samples(state, step)?;
    if scene.is_empty() {
        return Ok(Clearance::NoObstacles);
    }
    let mut best = Clearance::NoObstacles;
    for sample in samples {
        let (dist, obstacle) = scene.nearest(&sample.center).expect("non-empty scene");
        let c = dist - sample.radius;
        let better = match best {
            Clearance::NoObstacles => true,
            Clearance::Min { clearance, .. } => c < clearance,
        };
        if better {
            best = Clearance::Min {
                clearance: c,
                location: sample.center,
                arclength: sample.arclength,
                obstacle,
            };
        }
    }
    Ok(best)
}
