use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::MeasurementError;
use crate::geometry::{nearest_rotation, RigidPose};

/// Where a marker sits relative to its joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MarkerRole {
    Base,
    /// Offset towards the previous joint.
    Proximal,
    OnJoint,
    /// Offset towards the next joint.
    Distal,
    Tip,
}

/// Marker label. Joint markers carry the DH index of their joint (the
/// first interior joint of a chain is joint 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MarkerId {
    Base,
    Joint { index: usize, role: MarkerRole },
    Tip,
}

impl MarkerId {
    pub fn joint(index: usize, role: MarkerRole) -> Self {
        MarkerId::Joint { index, role }
    }

    pub fn role(&self) -> MarkerRole {
        match self {
            MarkerId::Base => MarkerRole::Base,
            MarkerId::Tip => MarkerRole::Tip,
            MarkerId::Joint { role, .. } => *role,
        }
    }
}

impl fmt::Display for MarkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkerId::Base => f.write_str("base"),
            MarkerId::Tip => f.write_str("tip"),
            MarkerId::Joint { index, role } => match role {
                MarkerRole::OnJoint => write!(f, "J{index}"),
                MarkerRole::Proximal => write!(f, "J{index}-prox"),
                MarkerRole::Distal => write!(f, "J{index}-dist"),
                MarkerRole::Base => f.write_str("base"),
                MarkerRole::Tip => f.write_str("tip"),
            },
        }
    }
}

impl FromStr for MarkerId {
    type Err = MeasurementError;

    /// Accepts `base`, `tip`, `J<n>` (or `joint_<n>`), and `J<n>` followed by one of `-`, `_`
    /// or `:` and a role (`on`/`joint`, `prox`/`proximal`/`p`,
    /// `dist`/`distal`/`d`). Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MeasurementError::BadLabel(s.to_string());
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "base" => return Ok(MarkerId::Base),
            "tip" => return Ok(MarkerId::Tip),
            _ => {}
        }
        let rest = lower
            .strip_prefix("joint")
            .or_else(|| lower.strip_prefix('j'))
            .ok_or_else(bad)?
            .trim_start_matches(['-', '_', ':', ' ']);
        let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
        let index: usize = digits.parse().map_err(|_| bad())?;
        let tail = rest[digits.len()..].trim_start_matches(['-', '_', ':']);
        let role = match tail {
            "" | "on" | "joint" | "j" => MarkerRole::OnJoint,
            "prox" | "proximal" | "p" => MarkerRole::Proximal,
            "dist" | "distal" | "d" => MarkerRole::Distal,
            _ => return Err(bad()),
        };
        Ok(MarkerId::Joint { index, role })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPose {
    pub t: f64,
    pub pose: RigidPose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerRecord {
    pub id: MarkerId,
    pub samples: Vec<TimedPose>,
}

/// Mean pose of a record: arithmetic mean of translations and chordal mean
/// of rotations (average matrix projected back onto SO(3)).
pub fn average_samples(record: &MarkerRecord) -> Result<RigidPose, MeasurementError> {
    if record.samples.is_empty() {
        return Err(MeasurementError::EmptyRecord(record.id.to_string()));
    }
    let n = record.samples.len() as f64;
    let mut t = Vector3::zeros();
    let mut r = Matrix3::zeros();
    for s in &record.samples {
        t += s.pose.translation;
        r += s.pose.rotation;
    }
    Ok(RigidPose::new(nearest_rotation(&(r / n)), t / n))
}

#[derive(Debug, Serialize, Deserialize)]
struct MarkerRow {
    marker_id: String,
    t_s: f64,
    x_mm: f64,
    y_mm: f64,
    z_mm: f64,
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
}

/// Reads marker samples (`marker_id,t_s,x_mm,y_mm,z_mm,qw,qx,qy,qz`) grouped
/// by marker, in label order.
pub fn read_marker_csv<R: Read>(reader: R) -> Result<Vec<MarkerRecord>, MeasurementError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut grouped: BTreeMap<MarkerId, Vec<TimedPose>> = BTreeMap::new();
    for (line, row) in rdr.deserialize::<MarkerRow>().enumerate() {
        let row = row.map_err(|e| MeasurementError::Parse(format!("row {}: {e}", line + 1)))?;
        let id: MarkerId = row.marker_id.parse()?;
        let q = Quaternion::new(row.qw, row.qx, row.qy, row.qz);
        let norm = q.norm();
        if !(norm.is_finite() && (norm - 1.0).abs() < 1e-3) {
            return Err(MeasurementError::Parse(format!(
                "row {}: quaternion norm {norm} is not 1",
                line + 1
            )));
        }
        let pose = RigidPose::from_quaternion(
            &UnitQuaternion::from_quaternion(q),
            Vector3::new(row.x_mm, row.y_mm, row.z_mm),
        );
        grouped.entry(id).or_default().push(TimedPose { t: row.t_s, pose });
    }
    Ok(grouped
        .into_iter()
        .map(|(id, samples)| MarkerRecord { id, samples })
        .collect())
}

pub fn write_marker_csv<W: Write>(
    writer: W,
    records: &[MarkerRecord],
) -> Result<(), MeasurementError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| MeasurementError::Parse(e.to_string());
    for rec in records {
        for s in &rec.samples {
            let q = s.pose.quaternion();
            wtr.serialize(MarkerRow {
                marker_id: rec.id.to_string(),
                t_s: s.t,
                x_mm: s.pose.translation.x,
                y_mm: s.pose.translation.y,
                z_mm: s.pose.translation.z,
                qw: q.w,
                qx: q.i,
                qy: q.j,
                qz: q.k,
            })
            .map_err(io)?;
        }
    }
    wtr.flush()
        .map_err(|e| MeasurementError::Parse(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn record(poses: Vec<RigidPose>) -> MarkerRecord {
        MarkerRecord {
            id: MarkerId::Base,
            samples: poses
                .into_iter()
                .enumerate()
                .map(|(i, pose)| TimedPose {
                    t: i as f64 * 0.05,
                    pose,
                })
                .collect(),
        }
    }

    #[test]
    fn labels_parse() {
        assert_eq!("base".parse::<MarkerId>().unwrap(), MarkerId::Base);
        assert_eq!("TIP".parse::<MarkerId>().unwrap(), MarkerId::Tip);
        assert_eq!(
            "J2".parse::<MarkerId>().unwrap(),
            MarkerId::joint(2, MarkerRole::OnJoint)
        );
        assert_eq!(
            "j3_proximal".parse::<MarkerId>().unwrap(),
            MarkerId::joint(3, MarkerRole::Proximal)
        );
        assert_eq!(
            "Joint12-dist".parse::<MarkerId>().unwrap(),
            MarkerId::joint(12, MarkerRole::Distal)
        );
        assert_eq!(
            "joint_2_distal".parse::<MarkerId>().unwrap(),
            MarkerId::joint(2, MarkerRole::Distal)
        );
        assert!("J".parse::<MarkerId>().is_err());
        assert!("J2-side".parse::<MarkerId>().is_err());
        assert!("elbow".parse::<MarkerId>().is_err());
        for id in [
            MarkerId::Base,
            MarkerId::Tip,
            MarkerId::joint(4, MarkerRole::Proximal),
            MarkerId::joint(4, MarkerRole::Distal),
            MarkerId::joint(4, MarkerRole::OnJoint),
        ] {
            assert_eq!(id.to_string().parse::<MarkerId>().unwrap(), id);
        }
    }

    #[test]
    fn identical_samples_average_to_themselves() {
        let p = RigidPose::new(
            *Rotation3::from_euler_angles(0.1, 0.2, 0.3).matrix(),
            Vector3::new(1.0, 2.0, 3.0),
        );
        let avg = average_samples(&record(vec![p; 5])).unwrap();
        assert!((avg.rotation - p.rotation).amax() < 1e-12);
        assert!((avg.translation - p.translation).norm() < 1e-12);
    }

    #[test]
    fn translations_average() {
        let avg = average_samples(&record(vec![
            RigidPose::identity(),
            RigidPose::from_translation(Vector3::new(2.0, 0.0, 0.0)),
        ]))
        .unwrap();
        assert_eq!(avg.translation, Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn empty_record_errors() {
        assert!(matches!(
            average_samples(&record(vec![])),
            Err(MeasurementError::EmptyRecord(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let p = RigidPose::new(
            *Rotation3::from_euler_angles(0.4, -0.2, 1.3).matrix(),
            Vector3::new(10.0, -2.5, 7.0),
        );
        let recs = vec![
            MarkerRecord {
                id: MarkerId::Base,
                samples: vec![TimedPose { t: 0.0, pose: p }],
            },
            MarkerRecord {
                id: MarkerId::joint(2, MarkerRole::OnJoint),
                samples: vec![TimedPose { t: 0.05, pose: p }],
            },
        ];
        let mut buf = Vec::new();
        write_marker_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("marker_id,t_s,x_mm,y_mm,z_mm,qw,qx,qy,qz\n"));
        let back = read_marker_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].id, recs[1].id);
        assert!((back[1].samples[0].pose.rotation - p.rotation).amax() < 1e-12);
    }

    #[test]
    fn bad_rows_rejected() {
        let csv = "marker_id,t_s,x_mm,y_mm,z_mm,qw,qx,qy,qz\nJ2,0,1,2,3,2,0,0,0\n";
        assert!(matches!(
            read_marker_csv(csv.as_bytes()),
            Err(MeasurementError::Parse(_))
        ));
        let csv = "marker_id,t_s,x_mm,y_mm,z_mm,qw,qx,qy,qz\nJ2,0,abc,2,3,1,0,0,0\n";
        assert!(read_marker_csv(csv.as_bytes()).is_err());
        let csv = "marker_id,t_s,x_mm,y_mm,z_mm,qw,qx,qy,qz\nhand,0,1,2,3,1,0,0,0\n";
        assert!(matches!(
            read_marker_csv(csv.as_bytes()),
            Err(MeasurementError::BadLabel(_))
        ));
    }

    #[test]
    fn noisy_rotations_average_close_to_truth() {
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};

        let truth = RigidPose::new(
            Rotation3::from_euler_angles(0.3, -0.2, 1.1).into_inner(),
            Vector3::new(10.0, 20.0, 30.0),
        );
        // 0.5° rms rotation angle, split evenly over the three axes
        let noise = Normal::new(0.0, 0.5f64.to_radians() / 3f64.sqrt()).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let poses: Vec<RigidPose> = (0..100)
            .map(|_| {
                let dr = Vector3::new(
                    noise.sample(&mut rng),
                    noise.sample(&mut rng),
                    noise.sample(&mut rng),
                );
                RigidPose::new(truth.rotation * Rotation3::new(dr).into_inner(), truth.translation)
            })
            .collect();
        let avg = average_samples(&record(poses.clone())).unwrap();
        assert!(avg.rotation_angle_to(&truth).to_degrees() < 0.1);
        assert!(avg.is_valid(1e-12));

        let mut reversed = poses;
        reversed.reverse();
        let avg2 = average_samples(&record(reversed)).unwrap();
        assert!((avg.rotation - avg2.rotation).amax() < 1e-12);
        assert!((avg.translation - avg2.translation).amax() < 1e-12);
    }
}
