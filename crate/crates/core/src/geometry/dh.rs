use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::pose::RigidPose;
use super::GeometryError;

/// One link of a serial chain in classic (distal) DH form.
///
/// The per-link transform is `Rot_z(theta) · Trans_x(a) · Rot_x(alpha)`;
/// the joint offset `d` is carried only so that it can be rejected when
/// nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DHLink {
    /// Link length in mm.
    pub a: f64,
    /// Link twist in radians.
    pub alpha: f64,
    /// Joint angle in radians.
    pub theta: f64,
    /// Joint offset in mm; always zero for a vine robot.
    #[serde(default)]
    pub d: f64,
}

impl DHLink {
    pub fn new(a: f64, alpha: f64, theta: f64) -> Self {
        Self {
            a,
            alpha,
            theta,
            d: 0.0,
        }
    }

    pub fn transform(&self) -> RigidPose {
        RigidPose::rot_z(self.theta)
            .compose(&RigidPose::trans_x(self.a))
            .compose(&RigidPose::rot_x(self.alpha))
    }

    fn validate(&self, index: usize) -> Result<(), GeometryError> {
        let bad = |reason: &str| GeometryError::InvalidLink {
            index,
            reason: reason.to_string(),
        };
        if !(self.a.is_finite() && self.alpha.is_finite() && self.theta.is_finite()) {
            return Err(bad("non-finite parameter"));
        }
        if self.d != 0.0 {
            return Err(bad("joint offset d must be zero"));
        }
        if self.a < 0.0 {
            return Err(bad("link length a must be non-negative"));
        }
        if !in_half_open_pi(self.alpha) {
            return Err(bad("link twist alpha must lie in (-pi, pi]"));
        }
        if !in_half_open_pi(self.theta) {
            return Err(bad("joint angle theta must lie in (-pi, pi]"));
        }
        Ok(())
    }
}

fn in_half_open_pi(x: f64) -> bool {
    x > -PI && x <= PI
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    if in_half_open_pi(x) {
        return x;
    }
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// The desired fully-everted shape: an ordered list of links plus the
/// inflated body radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DHChain {
    pub links: Vec<DHLink>,
    /// Body radius in mm.
    pub radius: f64,
}

impl DHChain {
    pub fn new(links: Vec<DHLink>, radius: f64) -> Result<Self, GeometryError> {
        let chain = Self { links, radius };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.links.is_empty() {
            return Err(GeometryError::EmptyChain);
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(GeometryError::InvalidRadius(self.radius));
        }
        for (i, link) in self.links.iter().enumerate() {
            link.validate(i)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.links.iter().map(|l| l.a).sum()
    }

    /// The three-link test configuration: 100 mm links, 45° bends at the
    /// second and third joints, 45° twist on the second link, 16.5 mm radius.
    pub fn three_link_reference() -> Self {
        let q = PI / 4.0;
        Self {
            links: vec![
                DHLink::new(100.0, 0.0, 0.0),
                DHLink::new(100.0, q, q),
                DHLink::new(100.0, 0.0, q),
            ],
            radius: 16.5,
        }
    }
}

/// Cumulative frames of a chain: `n + 1` poses, starting with the base
/// (identity) and ending with the tip.
pub fn fk_chain(chain: &DHChain) -> Result<Vec<RigidPose>, GeometryError> {
    chain.validate()?;
    Ok(fk_frames(&chain.links, RigidPose::identity()))
}

pub(crate) fn fk_frames(links: &[DHLink], base: RigidPose) -> Vec<RigidPose> {
    let mut frames = Vec::with_capacity(links.len() + 1);
    frames.push(base);
    let mut acc = base;
    for link in links {
        acc = acc.compose(&link.transform());
        frames.push(acc);
    }
    frames
}

/// Joint positions (base, interior joints, tip) of a chain, in its base frame.
pub fn dh_to_polyline(chain: &DHChain) -> Result<Vec<Vector3<f64>>, GeometryError> {
    Ok(fk_chain(chain)?.iter().map(|f| f.translation).collect())
}

/// Joint positions of a chain placed at `base`.
pub fn dh_to_polyline_from(
    chain: &DHChain,
    base: &RigidPose,
) -> Result<Vec<Vector3<f64>>, GeometryError> {
    chain.validate()?;
    Ok(fk_frames(&chain.links, *base)
        .iter()
        .map(|f| f.translation)
        .collect())
}

const SEGMENT_EPS: f64 = 1e-9;
const COLLINEAR_EPS: f64 = 1e-12;

fn segment_dirs(points: &[Vector3<f64>]) -> Result<(Vec<Vector3<f64>>, Vec<f64>), GeometryError> {
    if points.len() < 2 {
        return Err(GeometryError::TooFewPoints(points.len()));
    }
    let mut dirs = Vec::with_capacity(points.len() - 1);
    let mut lengths = Vec::with_capacity(points.len() - 1);
    for (i, w) in points.windows(2).enumerate() {
        let d = w[1] - w[0];
        let len = d.norm();
        if !len.is_finite() || len <= SEGMENT_EPS {
            return Err(GeometryError::DegenerateSegment { index: i });
        }
        dirs.push(d / len);
        lengths.push(len);
    }
    Ok((dirs, lengths))
}

/// Base frame in which `polyline_to_dh` expresses a path.
///
/// The origin is the first vertex. The z-axis is the component of world z
/// perpendicular to the first segment (world x when the segment is vertical),
/// and the x-axis is the matching projection of world x. For a path starting
/// at the origin with its first segment in the world x–y plane this is the
/// identity.
pub fn polyline_base_frame(points: &[Vector3<f64>]) -> Result<RigidPose, GeometryError> {
    let (dirs, _) = segment_dirs(points)?;
    let d = dirs[0];
    let z = perpendicular_part(&Vector3::z(), &d)
        .or_else(|| perpendicular_part(&Vector3::x(), &d))
        .expect("one of z or x is not parallel to d");
    let x = perpendicular_part(&Vector3::x(), &z)
        .or_else(|| perpendicular_part(&Vector3::y(), &z))
        .expect("one of x or y is not parallel to z");
    let y = z.cross(&x);
    let rotation = nalgebra::Matrix3::from_columns(&[x, y, z]);
    Ok(RigidPose::new(rotation, points[0]))
}

fn perpendicular_part(v: &Vector3<f64>, axis: &Vector3<f64>) -> Option<Vector3<f64>> {
    let p = v - axis * axis.dot(v);
    let n = p.norm();
    (n > 1e-9).then(|| p / n)
}

/// Signed angle from `from` to `to` about `axis` (all assumed unit, with
/// `from`, `to` perpendicular to `axis`).
pub(crate) fn signed_angle_about(from: &Vector3<f64>, to: &Vector3<f64>, axis: &Vector3<f64>) -> f64 {
    let s = from.cross(to).dot(axis);
    let c = from.dot(to);
    wrap_angle(s.atan2(c))
}

/// Fits a DH chain to a polyline, expressed in [`polyline_base_frame`].
///
/// Link lengths are the segment lengths. Each interior joint angle is the
/// non-negative bend between consecutive segments, measured about the normal
/// of their bending plane; each twist is the signed dihedral angle between
/// consecutive bending planes. Collinear vertices get a zero angle and carry
/// the previous bending plane forward (the base x–y plane if none yet). The
/// last link's twist is zero.
pub fn polyline_to_dh(points: &[Vector3<f64>], radius: f64) -> Result<DHChain, GeometryError> {
    let base = polyline_base_frame(points)?;
    let inv = base.inverse();
    let local: Vec<Vector3<f64>> = points.iter().map(|p| inv.transform_point(p)).collect();
    let (dirs, lengths) = segment_dirs(&local)?;
    let n = dirs.len();

    // Axis of joint i + 1 (normal of the bending plane at vertex i + 1).
    let mut normals = Vec::with_capacity(n + 1);
    normals.push(Vector3::z());
    let mut thetas = Vec::with_capacity(n);
    thetas.push(wrap_angle(dirs[0].y.atan2(dirs[0].x)));
    for i in 0..n {
        if i + 1 < n {
            let (axis, theta) = bend(&dirs[i], &dirs[i + 1], &normals[i]);
            normals.push(axis);
            thetas.push(theta);
        } else {
            let last = normals[i];
            normals.push(last);
        }
    }

    let links = (0..n)
        .map(|i| DHLink {
            a: lengths[i],
            alpha: signed_angle_about(&normals[i], &normals[i + 1], &dirs[i]),
            theta: thetas[i],
            d: 0.0,
        })
        .collect();
    DHChain::new(links, radius)
}

/// Bending axis and non-negative bend angle taking `from` to `to`. When the
/// two directions are collinear the previous axis is kept.
pub(crate) fn bend(from: &Vector3<f64>, to: &Vector3<f64>, prev_axis: &Vector3<f64>) -> (Vector3<f64>, f64) {
    let c = from.cross(to);
    let s = c.norm();
    let cos = from.dot(to);
    if s <= COLLINEAR_EPS {
        let theta = if cos < 0.0 { PI } else { 0.0 };
        (*prev_axis, theta)
    } else {
        (c / s, s.atan2(cos))
    }
}
