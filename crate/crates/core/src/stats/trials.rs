use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::hypothesis::{group_summary, GroupSummary};
use super::table::Material;
use super::StatsError;
use crate::fabrication::Method;

/// One growth attempt from a pressure staircase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrial {
    pub method: Method,
    pub material: Material,
    pub robot_id: String,
    pub trial: usize,
    pub pressure_kpa: f64,
    /// Time to complete eversion; empty for failed growths.
    pub growth_time_s: Option<f64>,
    pub success: bool,
}

pub fn read_trials_csv<R: Read>(reader: R) -> Result<Vec<GrowthTrial>, StatsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<GrowthTrial>().enumerate() {
        let t = row.map_err(|e| StatsError::Parse(format!("trial row {}: {e}", i + 1)))?;
        let bad_time = t.growth_time_s.is_some_and(|s| !(s.is_finite() && s > 0.0));
        if !t.pressure_kpa.is_finite() || bad_time || (t.success && t.growth_time_s.is_none()) {
            return Err(StatsError::Parse(format!(
                "trial row {}: successful growths need a positive time and a finite pressure",
                i + 1
            )));
        }
        out.push(t);
    }
    Ok(out)
}

pub fn write_trials_csv<W: Write>(trials: &[GrowthTrial], writer: W) -> Result<(), StatsError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for t in trials {
        wtr.serialize(t).map_err(|e| StatsError::Parse(e.to_string()))?;
    }
    wtr.flush().map_err(|e| StatsError::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub method: Method,
    pub material: Material,
    pub robots: usize,
    pub attempts: usize,
    pub successes: usize,
    pub min_success_pressure_kpa: Option<f64>,
    pub success_pressure_kpa: Option<GroupSummary>,
    pub growth_time_s: Option<GroupSummary>,
    /// Mean growth speed over successful growths, when the everted length is
    /// known.
    pub mean_speed_cm_per_s: Option<f64>,
}

/// Per method and material: success counts and summaries of the pressures
/// and times of successful growths.
pub fn summarize_trials(
    trials: &[GrowthTrial],
    everted_length_mm: Option<f64>,
) -> Result<Vec<TrialSummary>, StatsError> {
    let mut groups: BTreeMap<(Method, Material), Vec<&GrowthTrial>> = BTreeMap::new();
    for t in trials {
        groups.entry((t.method, t.material)).or_default().push(t);
    }
    let mut out = Vec::new();
    for ((method, material), rows) in groups {
        let mut robots: Vec<&str> = rows.iter().map(|t| t.robot_id.as_str()).collect();
        robots.sort_unstable();
        robots.dedup();
        let ok: Vec<&&GrowthTrial> = rows.iter().filter(|t| t.success).collect();
        let pressures: Vec<f64> = ok.iter().map(|t| t.pressure_kpa).collect();
        let times: Vec<f64> = ok.iter().filter_map(|t| t.growth_time_s).collect();
        let summary = |v: &[f64]| {
            if v.is_empty() {
                Ok(None)
            } else {
                group_summary(v).map(Some)
            }
        };
        let speeds: Vec<f64> = match everted_length_mm {
            Some(len) => times.iter().map(|t| len / 10.0 / t).collect(),
            None => Vec::new(),
        };
        out.push(TrialSummary {
            method,
            material,
            robots: robots.len(),
            attempts: rows.len(),
            successes: ok.len(),
            min_success_pressure_kpa: pressures.iter().copied().reduce(f64::min),
            success_pressure_kpa: summary(&pressures)?,
            growth_time_s: summary(&times)?,
            mean_speed_cm_per_s: (!speeds.is_empty())
                .then(|| speeds.iter().sum::<f64>() / speeds.len() as f64),
        });
    }
    Ok(out)
}
