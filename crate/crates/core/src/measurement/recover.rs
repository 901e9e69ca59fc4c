use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::markers::{average_samples, MarkerId, MarkerRecord, MarkerRole};
use super::MeasurementError;
use crate::geometry::{dh_to_polyline, polyline_to_dh, signed_angle_about, wrap_angle, DHChain};

/// Direction vectors shorter than this are treated as degenerate.
pub const MIN_DIRECTION_MM: f64 = 1.0;
const COLLINEAR_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Pre,
    Post,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Pre => "pre",
            Phase::Post => "post",
        })
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pre" | "pre-growth" => Ok(Phase::Pre),
            "post" | "post-growth" => Ok(Phase::Post),
            other => Err(format!("unknown phase '{other}'")),
        }
    }
}

/// The three kinds of DH parameter that are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DhParameter {
    Twist,
    Joint,
    Length,
}

impl fmt::Display for DhParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DhParameter::Twist => "twist",
            DhParameter::Joint => "joint",
            DhParameter::Length => "length",
        })
    }
}

impl FromStr for DhParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "twist" | "alpha" => Ok(DhParameter::Twist),
            "joint" | "theta" => Ok(DhParameter::Joint),
            "length" | "a" => Ok(DhParameter::Length),
            other => Err(format!("unknown DH parameter '{other}'")),
        }
    }
}

/// DH parameters recovered from markers.
///
/// For a chain of `n` links the markers observe the `n - 1` interior joint
/// angles (DH joints `2..=n`), the `n - 2` interior twists (links
/// `2..=n-1`) and all `n` link lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredDH {
    #[serde(rename = "theta_rad")]
    pub thetas: Vec<f64>,
    #[serde(rename = "alpha_rad")]
    pub alphas: Vec<f64>,
    #[serde(rename = "a_mm")]
    pub lengths: Vec<f64>,
    pub phase: Phase,
}

impl MeasuredDH {
    pub fn link_count(&self) -> usize {
        self.lengths.len()
    }

    /// What perfect markers on `chain` would report: its canonical interior
    /// joint angles and twists and all link lengths.
    pub fn ideal(chain: &DHChain, phase: Phase) -> Result<Self, MeasurementError> {
        let canon = canonical_chain(chain)?;
        let n = canon.len();
        if n < 2 {
            return Err(MeasurementError::NoJoints);
        }
        Ok(Self {
            thetas: canon.links[1..].iter().map(|l| l.theta).collect(),
            alphas: canon.links[1..n - 1].iter().map(|l| l.alpha).collect(),
            lengths: canon.links.iter().map(|l| l.a).collect(),
            phase,
        })
    }
}

fn require(
    positions: &BTreeMap<MarkerId, Vector3<f64>>,
    id: MarkerId,
    joint: usize,
) -> Result<Vector3<f64>, MeasurementError> {
    positions
        .get(&id)
        .copied()
        .ok_or(MeasurementError::MissingMarker {
            joint,
            role: id.role(),
        })
}

fn direction(v: Vector3<f64>, joint: usize, what: &'static str) -> Result<Vector3<f64>, MeasurementError> {
    let n = v.norm();
    if !(n.is_finite() && n >= MIN_DIRECTION_MM) {
        return Err(MeasurementError::Degenerate { joint, what });
    }
    Ok(v / n)
}

/// Recovers the realized DH parameters from averaged marker positions.
///
/// At each joint the incoming direction runs from the proximal marker to the
/// joint marker and the outgoing direction from the joint marker to the
/// distal marker. The first joint may use the base marker as its proximal
/// marker and the last joint the tip marker as its distal one. Joint angles
/// are the unsigned angles between these directions; twists are the signed
/// dihedral angles between consecutive bending planes about the link joining
/// them; link lengths are distances between consecutive joint markers, with
/// the base and tip markers closing the first and last links. Marker
/// orientations are not used.
pub fn recover_dh(markers: &[MarkerRecord], phase: Phase) -> Result<MeasuredDH, MeasurementError> {
    let mut positions = BTreeMap::new();
    for rec in markers {
        positions.insert(rec.id, average_samples(rec)?.translation);
    }

    let mut joints = BTreeSet::new();
    for id in positions.keys() {
        if let MarkerId::Joint { index, .. } = id {
            joints.insert(*index);
        }
    }
    let last = *joints.iter().next_back().ok_or(MeasurementError::NoJoints)?;
    let first = 2;
    for j in first..=last {
        require(&positions, MarkerId::joint(j, MarkerRole::OnJoint), j)?;
    }
    if let Some(&j) = joints.iter().find(|&&j| j < first) {
        return Err(MeasurementError::BadLabel(format!(
            "J{j}: measured joints are numbered from 2 (joint 1 is the fixed base)"
        )));
    }

    let base = positions
        .get(&MarkerId::Base)
        .or_else(|| positions.get(&MarkerId::joint(first, MarkerRole::Proximal)))
        .copied()
        .ok_or(MeasurementError::MissingMarker {
            joint: first,
            role: MarkerRole::Proximal,
        })?;
    let tip = positions
        .get(&MarkerId::Tip)
        .or_else(|| positions.get(&MarkerId::joint(last, MarkerRole::Distal)))
        .copied()
        .ok_or(MeasurementError::MissingMarker {
            joint: last,
            role: MarkerRole::Distal,
        })?;

    let mut joint_pos = Vec::new();
    let mut incoming = Vec::new();
    let mut outgoing = Vec::new();
    for j in first..=last {
        let on = require(&positions, MarkerId::joint(j, MarkerRole::OnJoint), j)?;
        let prox = match positions.get(&MarkerId::joint(j, MarkerRole::Proximal)) {
            Some(p) => *p,
            None if j == first => base,
            None => require(&positions, MarkerId::joint(j, MarkerRole::Proximal), j)?,
        };
        let dist = match positions.get(&MarkerId::joint(j, MarkerRole::Distal)) {
            Some(p) => *p,
            None if j == last => tip,
            None => require(&positions, MarkerId::joint(j, MarkerRole::Distal), j)?,
        };
        incoming.push(direction(on - prox, j, "incoming direction")?);
        outgoing.push(direction(dist - on, j, "outgoing direction")?);
        joint_pos.push(on);
    }

    let mut thetas = Vec::with_capacity(joint_pos.len());
    let mut normals: Vec<Vector3<f64>> = Vec::with_capacity(joint_pos.len());
    for (v, w) in incoming.iter().zip(&outgoing) {
        let c = v.cross(w);
        let s = c.norm();
        thetas.push(s.atan2(v.dot(w)));
        let normal = if s > COLLINEAR_EPS {
            c / s
        } else if let Some(prev) = normals.last() {
            *prev
        } else {
            initial_normal(v)
        };
        normals.push(normal);
    }

    let mut alphas = Vec::with_capacity(joint_pos.len().saturating_sub(1));
    for k in 0..joint_pos.len().saturating_sub(1) {
        let u = direction(joint_pos[k + 1] - joint_pos[k], first + k, "link direction")?;
        let from = project_unit(&normals[k], &u).unwrap_or(normals[k]);
        let to = project_unit(&normals[k + 1], &u).unwrap_or(normals[k + 1]);
        alphas.push(signed_angle_about(&from, &to, &u));
    }

    let mut lengths = Vec::with_capacity(joint_pos.len() + 1);
    lengths.push((joint_pos[0] - base).norm());
    for w in joint_pos.windows(2) {
        lengths.push((w[1] - w[0]).norm());
    }
    lengths.push((tip - joint_pos[joint_pos.len() - 1]).norm());

    Ok(MeasuredDH {
        thetas,
        alphas,
        lengths,
        phase,
    })
}

fn initial_normal(v: &Vector3<f64>) -> Vector3<f64> {
    project_unit(&Vector3::z(), v)
        .or_else(|| project_unit(&Vector3::x(), v))
        .expect("z or x is not parallel to v")
}

fn project_unit(v: &Vector3<f64>, axis: &Vector3<f64>) -> Option<Vector3<f64>> {
    let p = v - axis * axis.dot(v);
    let n = p.norm();
    (n > 1e-9).then(|| p / n)
}

/// One row of an error table. Angles are in degrees, lengths in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub parameter: DhParameter,
    /// DH index of the joint (angles) or link (twists, lengths).
    pub joint_or_link_index: usize,
    pub target: f64,
    pub measured: f64,
    pub error: f64,
    pub phase: Phase,
}

/// Target chain in the same canonical form the markers observe: interior
/// joint angles non-negative and twists measured between bending planes.
pub fn canonical_chain(chain: &DHChain) -> Result<DHChain, MeasurementError> {
    let points = dh_to_polyline(chain)?;
    Ok(polyline_to_dh(&points, chain.radius)?)
}

fn angle_error(parameter: DhParameter, index: usize, target: f64, measured: f64, phase: Phase) -> ErrorRow {
    ErrorRow {
        parameter,
        joint_or_link_index: index,
        target: target.to_degrees(),
        measured: measured.to_degrees(),
        error: wrap_angle(measured - target).to_degrees(),
        phase,
    }
}

/// Signed per-parameter errors (measured − target).
pub fn dh_errors(measured: &MeasuredDH, target: &DHChain) -> Result<Vec<ErrorRow>, MeasurementError> {
    let n = target.len();
    let want = (n.saturating_sub(1), n.saturating_sub(2), n);
    let got = (
        measured.thetas.len(),
        measured.alphas.len(),
        measured.lengths.len(),
    );
    if n < 2 || want != got {
        return Err(MeasurementError::TopologyMismatch {
            target_links: n,
            joints: got.0,
            twists: got.1,
            lengths: got.2,
        });
    }
    let canon = canonical_chain(target)?;
    let links = &canon.links;
    let mut rows = Vec::with_capacity(3 * n);
    for (k, &theta) in measured.thetas.iter().enumerate() {
        rows.push(angle_error(DhParameter::Joint, k + 2, links[k + 1].theta, theta, measured.phase));
    }
    for (k, &alpha) in measured.alphas.iter().enumerate() {
        rows.push(angle_error(DhParameter::Twist, k + 2, links[k + 1].alpha, alpha, measured.phase));
    }
    for (k, &a) in measured.lengths.iter().enumerate() {
        rows.push(ErrorRow {
            parameter: DhParameter::Length,
            joint_or_link_index: k + 1,
            target: links[k].a,
            measured: a,
            error: a - links[k].a,
            phase: measured.phase,
        });
    }
    Ok(rows)
}
