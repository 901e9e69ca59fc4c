use std::f64::consts::PI;
use std::fmt;

use log::warn;
use serde::{Deserialize, Serialize};

use super::model::{arc_offset, axial_fold_distance, cylinder_length, invert_fold_distance};
use super::FabricationError;
use crate::geometry::{wrap_angle, DHChain, DHLink};

/// Default residual gap for the loop method: the length of the nylon screws
/// used as connectors.
pub const LOOP_SCREW_GAP_MM: f64 = 9.3;

/// Joint angles closer than this to a half turn are rejected by
/// [`compile_plan`]; the fold distance diverges at π.
pub const SINGULAR_MARGIN: f64 = PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tape,
    Weld,
    Loop,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Tape => "tape",
            Method::Weld => "weld",
            Method::Loop => "loop",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tape" => Ok(Method::Tape),
            "weld" => Ok(Method::Weld),
            "loop" => Ok(Method::Loop),
            other => Err(format!("unknown fabrication method '{other}'")),
        }
    }
}

/// How far apart the two joined points stay for a given fastening method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapModel {
    pub method: Method,
    /// Residual gap in mm.
    pub d_g: f64,
}

impl GapModel {
    pub fn new(method: Method, d_g: f64) -> Result<Self, FabricationError> {
        if !(d_g.is_finite() && d_g >= 0.0) {
            return Err(FabricationError::InvalidInput(format!(
                "gap must be >= 0, got {d_g}"
            )));
        }
        Ok(Self { method, d_g })
    }

    /// Tape and weld join points directly; loops leave a screw-length gap.
    pub fn default_for(method: Method) -> Self {
        let d_g = match method {
            Method::Tape | Method::Weld => 0.0,
            Method::Loop => LOOP_SCREW_GAP_MM,
        };
        Self { method, d_g }
    }
}

/// One joint on the tube: the fold points sit at `(circumferential,
/// axial_start)` and `(circumferential, axial_start + s_tilde)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    /// 1-based joint index; joint `i` precedes cylinder `i`.
    pub index: usize,
    pub s_tilde: f64,
    pub axial_start: f64,
    /// Arc coordinate in `[0, 2πr)`.
    pub circumferential: f64,
    /// Gap applied to this joint (zero when the joint has no fold).
    pub d_g: f64,
}

impl JointSpec {
    pub fn has_fold(&self) -> bool {
        self.s_tilde > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanWarning {
    /// Twist on `link` sits next to a zero joint angle; it was folded into
    /// the offset leading to joint `carried_to`.
    TwistCarried { link: usize, carried_to: usize },
    /// Twist on `link` precedes the first bend or follows the last one and
    /// has no effect on the body.
    TwistIgnored { link: usize },
}

impl fmt::Display for PlanWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanWarning::TwistCarried { link, carried_to } => write!(
                f,
                "link {link}: twist next to a zero joint angle carried into joint {carried_to}"
            ),
            PlanWarning::TwistIgnored { link } => write!(
                f,
                "link {link}: twist outside the bent section has no fabrication effect"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FabricationPlan {
    pub radius: f64,
    /// Cylinder lengths `lᵢ` in mm.
    pub cylinders: Vec<f64>,
    pub joints: Vec<JointSpec>,
    /// Arc offsets `sᵢ` in mm from joint `i` to joint `i + 1`; the last entry
    /// is always zero.
    pub arc_offsets: Vec<f64>,
    pub total_tube_length: f64,
    pub warnings: Vec<PlanWarning>,
}

impl FabricationPlan {
    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.radius
    }

    pub fn fold_distances(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.s_tilde).collect()
    }

    /// Axial extent `[start, end]` of each cylinder.
    pub fn cylinder_spans(&self) -> Vec<(f64, f64)> {
        self.joints
            .iter()
            .zip(&self.cylinders)
            .map(|(j, l)| {
                let start = j.axial_start + j.s_tilde;
                (start, start + l)
            })
            .collect()
    }
}

/// Compiles a desired chain into fold distances, cylinder lengths and
/// circumferential placements on the tube.
///
/// Folds use the joint angle magnitude; the bend direction is encoded in the
/// circumferential offsets. Joints with a zero angle get no fold. A twist
/// adjacent to a zero angle is accumulated and applied at the next bent
/// joint.
pub fn compile_plan(chain: &DHChain, gap: &GapModel) -> Result<FabricationPlan, FabricationError> {
    chain.validate()?;
    let r = chain.radius;
    let n = chain.len();
    let thetas: Vec<f64> = chain.links.iter().map(|l| l.theta).collect();

    let mut s_tilde = Vec::with_capacity(n);
    for (i, &theta) in thetas.iter().enumerate() {
        if PI - theta.abs() < SINGULAR_MARGIN {
            return Err(FabricationError::NearSingular {
                joint: i + 1,
                theta,
            });
        }
        let s = if theta == 0.0 {
            0.0
        } else {
            axial_fold_distance(theta.abs(), r, gap.d_g)?
        };
        s_tilde.push(s);
    }

    let mut cylinders = Vec::with_capacity(n);
    for (i, link) in chain.links.iter().enumerate() {
        let next = s_tilde.get(i + 1).copied().unwrap_or(0.0);
        let l = cylinder_length(link.a, s_tilde[i], next).map_err(|e| match e {
            FabricationError::InfeasibleLength { a, min_a } => FabricationError::InfeasibleLink {
                link: i + 1,
                a,
                min_a,
            },
            other => other,
        })?;
        cylinders.push(l);
    }

    let (arc_offsets, warnings) = arc_offsets_with_carry(&chain.links, r);
    for w in &warnings {
        warn!("{w}");
    }

    let circumference = 2.0 * PI * r;
    let mut joints = Vec::with_capacity(n);
    let mut z = 0.0;
    let mut c = 0.0;
    for i in 0..n {
        joints.push(JointSpec {
            index: i + 1,
            s_tilde: s_tilde[i],
            axial_start: z,
            circumferential: c,
            d_g: if s_tilde[i] > 0.0 { gap.d_g } else { 0.0 },
        });
        z += s_tilde[i] + cylinders[i];
        c = (c + arc_offsets[i]).rem_euclid(circumference);
        if c >= circumference {
            c = 0.0;
        }
    }

    let total_tube_length = cylinders.iter().sum::<f64>() + s_tilde.iter().sum::<f64>();
    Ok(FabricationPlan {
        radius: r,
        cylinders,
        joints,
        arc_offsets,
        total_tube_length,
        warnings,
    })
}

fn arc_offsets_with_carry(links: &[DHLink], r: f64) -> (Vec<f64>, Vec<PlanWarning>) {
    let n = links.len();
    let theta = |i: usize| links.get(i).map_or(0.0, |l| l.theta);
    let mut offsets = vec![0.0; n];
    let mut warnings = Vec::new();
    // last bent joint (0-based) and the twist accumulated since it
    let mut anchor: Option<usize> = None;
    let mut pending = 0.0;
    let mut pending_links = Vec::new();

    for i in 0..n {
        let alpha = links[i].alpha;
        if theta(i) != 0.0 {
            anchor = Some(i);
            pending = 0.0;
            pending_links.clear();
        }
        let next = theta(i + 1);
        match anchor {
            Some(p) if next != 0.0 => {
                let total = wrap_angle(pending + alpha);
                offsets[i] = arc_offset(total, theta(p), next, r);
                for &k in &pending_links {
                    warnings.push(PlanWarning::TwistCarried {
                        link: k + 1,
                        carried_to: i + 2,
                    });
                }
                if p != i && alpha != 0.0 {
                    warnings.push(PlanWarning::TwistCarried {
                        link: i + 1,
                        carried_to: i + 2,
                    });
                }
            }
            Some(_) => {
                if alpha != 0.0 {
                    pending += alpha;
                    pending_links.push(i);
                }
            }
            None => {
                if alpha != 0.0 {
                    warnings.push(PlanWarning::TwistIgnored { link: i + 1 });
                }
            }
        }
    }
    // twists after the last bend never reach another joint
    for k in pending_links {
        warnings.push(PlanWarning::TwistIgnored { link: k + 1 });
    }
    (offsets, warnings)
}

/// Inverts [`compile_plan`]: recovers joint angles by root finding on the
/// fold distance, link lengths from the cylinder relation, and twists from
/// the arc offsets.
///
/// The result is in canonical form: joint angles are non-negative, twists
/// that were carried across a straight joint land on the link just before
/// the next bend, and twists with no fabrication effect are zero.
pub fn recover_chain(plan: &FabricationPlan, gap: &GapModel) -> Result<DHChain, FabricationError> {
    let r = plan.radius;
    let n = plan.joints.len();
    if n == 0 || plan.cylinders.len() != n || plan.arc_offsets.len() != n {
        return Err(FabricationError::InvalidInput(format!(
            "plan has {} joints, {} cylinders, {} arc offsets",
            n,
            plan.cylinders.len(),
            plan.arc_offsets.len()
        )));
    }

    let mut thetas = Vec::with_capacity(n);
    for joint in &plan.joints {
        let theta = if joint.s_tilde == 0.0 {
            0.0
        } else {
            invert_fold_distance(joint.s_tilde, r, gap.d_g).map_err(|e| match e {
                FabricationError::Inversion { s_tilde, min, max } => {
                    FabricationError::JointInversion {
                        joint: joint.index,
                        s_tilde,
                        min,
                        max,
                    }
                }
                other => other,
            })?
        };
        thetas.push(theta);
    }

    let mut links = Vec::with_capacity(n);
    let mut anchor: Option<usize> = None;
    for i in 0..n {
        let s_next = plan.joints.get(i + 1).map_or(0.0, |j| j.s_tilde);
        let a = plan.cylinders[i] + (plan.joints[i].s_tilde + s_next) / 4.0;
        if thetas[i] != 0.0 {
            anchor = Some(i);
        }
        let next_theta = thetas.get(i + 1).copied().unwrap_or(0.0);
        let alpha = match anchor {
            Some(_) if next_theta != 0.0 => wrap_angle(plan.arc_offsets[i] / r),
            _ => 0.0,
        };
        links.push(DHLink::new(a, alpha, thetas[i]));
    }
    Ok(DHChain::new(links, r)?)
}
