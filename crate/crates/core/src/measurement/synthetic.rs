use nalgebra::{Rotation3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::markers::{MarkerId, MarkerRecord, MarkerRole, TimedPose};
use super::MeasurementError;
use crate::geometry::{fk_chain, DHChain, RigidPose};

/// Distance from a joint marker to its proximal and distal markers.
pub const MARKER_OFFSET_MM: f64 = 76.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOptions {
    pub samples: usize,
    pub sample_rate_hz: f64,
    /// Per-axis Gaussian position noise in mm.
    pub position_sigma: f64,
    /// Per-axis Gaussian rotation-vector noise in radians.
    pub rotation_sigma: f64,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            sample_rate_hz: 20.0,
            position_sigma: 0.0,
            rotation_sigma: 0.0,
        }
    }
}

/// Ideal marker poses for a realized chain: base and tip markers, and for
/// each interior joint an on-joint marker plus markers offset along the
/// incoming and outgoing links. The first joint's proximal marker is the base
/// marker and the last joint's distal marker is the tip marker.
pub fn ideal_marker_poses(chain: &DHChain) -> Result<Vec<(MarkerId, RigidPose)>, MeasurementError> {
    let frames = fk_chain(chain)?;
    let n = chain.len();
    if n < 2 {
        return Err(MeasurementError::NoJoints);
    }
    let mut out = vec![(MarkerId::Base, frames[0])];
    for j in 2..=n {
        let incoming = frames[j - 1];
        let outgoing = incoming.compose(&RigidPose::rot_z(chain.links[j - 1].theta));
        out.push((MarkerId::joint(j, MarkerRole::OnJoint), outgoing));
        if j > 2 {
            let back = MARKER_OFFSET_MM.min(chain.links[j - 2].a);
            out.push((
                MarkerId::joint(j, MarkerRole::Proximal),
                incoming.compose(&RigidPose::trans_x(-back)),
            ));
        }
        if j < n {
            let ahead = MARKER_OFFSET_MM.min(chain.links[j - 1].a);
            out.push((
                MarkerId::joint(j, MarkerRole::Distal),
                outgoing.compose(&RigidPose::trans_x(ahead)),
            ));
        }
    }
    out.push((MarkerId::Tip, frames[n]));
    out.sort_by_key(|(id, _)| *id);
    Ok(out)
}

/// Marker logs sampled from the ideal poses with Gaussian noise.
pub fn synthetic_markers<R: Rng + ?Sized>(
    chain: &DHChain,
    opts: &SyntheticOptions,
    rng: &mut R,
) -> Result<Vec<MarkerRecord>, MeasurementError> {
    let pos = Normal::new(0.0, opts.position_sigma.max(0.0))
        .map_err(|e| MeasurementError::Parse(e.to_string()))?;
    let rot = Normal::new(0.0, opts.rotation_sigma.max(0.0))
        .map_err(|e| MeasurementError::Parse(e.to_string()))?;
    let dt = 1.0 / opts.sample_rate_hz;
    let mut records = Vec::new();
    for (id, pose) in ideal_marker_poses(chain)? {
        let samples = (0..opts.samples.max(1))
            .map(|k| {
                let dp = Vector3::new(pos.sample(rng), pos.sample(rng), pos.sample(rng));
                let dr = Vector3::new(rot.sample(rng), rot.sample(rng), rot.sample(rng));
                let noisy_rot = pose.rotation * Rotation3::new(dr).into_inner();
                TimedPose {
                    t: k as f64 * dt,
                    pose: RigidPose::new(noisy_rot, pose.translation + dp),
                }
            })
            .collect();
        records.push(MarkerRecord { id, samples });
    }
    Ok(records)
}
