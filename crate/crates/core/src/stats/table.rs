use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::hypothesis::{
    group_summary, independent_t_test, kruskal_wallis, levene_test, one_way_anova,
    paired_t_test, tukey_hsd, welch_t_test, TestResult,
};
use super::StatsError;
use crate::fabrication::Method;
use crate::measurement::{DhParameter, Phase};

/// Below this Levene p-value the equal-variance tests are swapped for their
/// robust counterparts.
pub const HOMOGENEITY_ALPHA: f64 = 0.05;
pub const TUKEY_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Ldpe,
    Fabric,
}

impl fmt::Display for Material {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Material::Ldpe => "ldpe",
            Material::Fabric => "fabric",
        })
    }
}

impl FromStr for Material {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ldpe" => Ok(Material::Ldpe),
            "fabric" => Ok(Material::Fabric),
            other => Err(format!("unknown material '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Method,
    Material,
    Phase,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::Method => "method",
            Factor::Material => "material",
            Factor::Phase => "phase",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub value: f64,
    pub method: Method,
    pub material: Material,
    pub phase: Phase,
    pub parameter: DhParameter,
    pub robot_id: String,
}

impl Sample {
    pub fn level(&self, factor: Factor) -> String {
        match factor {
            Factor::Method => self.method.to_string(),
            Factor::Material => self.material.to_string(),
            Factor::Phase => self.phase.to_string(),
        }
    }
}

/// Long-format observations, one row per measured value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleTable {
    pub rows: Vec<Sample>,
}

impl SampleTable {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, StatsError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| StatsError::Parse(format!("row {}: {e}", i + 1)))?;
            let field = |name: &str, k: usize| {
                rec.get(k)
                    .ok_or_else(|| StatsError::Parse(format!("row {}: missing {name}", i + 1)))
            };
            let err = |e: String| StatsError::Parse(format!("row {}: {e}", i + 1));
            let value: f64 = field("value", 0)?
                .parse()
                .map_err(|e| err(format!("value: {e}")))?;
            if !value.is_finite() {
                return Err(err("value is not finite".into()));
            }
            rows.push(Sample {
                value,
                method: field("method", 1)?.parse().map_err(err)?,
                material: field("material", 2)?.parse().map_err(err)?,
                phase: field("phase", 3)?.parse().map_err(err)?,
                parameter: field("parameter", 4)?.parse().map_err(err)?,
                robot_id: field("robot_id", 5)?.to_string(),
            });
        }
        let headers = rdr
            .headers()
            .map_err(|e| StatsError::Parse(e.to_string()))?
            .iter()
            .collect::<Vec<_>>()
            .join(",");
        if headers != "value,method,material,phase,parameter,robot_id" {
            return Err(StatsError::Parse(format!(
                "expected header value,method,material,phase,parameter,robot_id, got {headers}"
            )));
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), StatsError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for row in &self.rows {
            wtr.serialize(row)
                .map_err(|e| StatsError::Parse(e.to_string()))?;
        }
        wtr.flush().map_err(|e| StatsError::Parse(e.to_string()))
    }

    pub fn parameters(&self) -> Vec<DhParameter> {
        let mut v: Vec<DhParameter> = self.rows.iter().map(|r| r.parameter).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Values of one parameter grouped by factor level, in level order.
    pub fn grouped(&self, parameter: DhParameter, factor: Factor) -> BTreeMap<String, Vec<f64>> {
        let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.parameter == parameter) {
            out.entry(r.level(factor)).or_default().push(r.value);
        }
        out
    }

    /// Pre/post pairs of one parameter. Rows are matched by robot and by
    /// their order of appearance within that robot and phase; robots missing
    /// one phase contribute no pairs.
    pub fn paired_by_phase(&self, parameter: DhParameter) -> (Vec<f64>, Vec<f64>) {
        let mut pre: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        let mut post: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.parameter == parameter) {
            let side = match r.phase {
                Phase::Pre => &mut pre,
                Phase::Post => &mut post,
            };
            side.entry(r.robot_id.as_str()).or_default().push(r.value);
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (robot, before) in &pre {
            if let Some(after) = post.get(robot) {
                for (x, y) in before.iter().zip(after) {
                    a.push(*x);
                    b.push(*y);
                }
            }
        }
        (a, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: String,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificantPair {
    pub level_a: String,
    pub level_b: String,
    pub mean_difference: f64,
    pub q: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorReport {
    pub factor: Factor,
    pub groups: Vec<LevelSummary>,
    pub tests: Vec<TestResult>,
    pub significant_pairs: Vec<SignificantPair>,
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterReport {
    pub parameter: DhParameter,
    /// Unit of the values and summaries: `deg` for angles, `mm` for lengths.
    pub unit: &'static str,
    pub factors: Vec<FactorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub parameters: Vec<ParameterReport>,
}

fn summarize(groups: &BTreeMap<String, Vec<f64>>) -> Result<Vec<LevelSummary>, StatsError> {
    groups
        .iter()
        .map(|(level, values)| {
            let s = group_summary(values)?;
            Ok(LevelSummary {
                level: level.clone(),
                n: s.n,
                mean: s.mean,
                sd: s.sd,
                ci95_low: s.ci95.map(|c| c.0),
                ci95_high: s.ci95.map(|c| c.1),
            })
        })
        .collect()
}

fn record(
    report: &mut FactorReport,
    result: Result<TestResult, StatsError>,
) -> Option<TestResult> {
    match result {
        Ok(r) => {
            report.tests.push(r.clone());
            Some(r)
        }
        Err(e) => {
            report.notices.push(format!("test skipped: {e}"));
            None
        }
    }
}

fn analyze_factor(
    table: &SampleTable,
    parameter: DhParameter,
    factor: Factor,
) -> Result<FactorReport, StatsError> {
    let groups = table.grouped(parameter, factor);
    let mut report = FactorReport {
        factor,
        groups: summarize(&groups)?,
        tests: Vec::new(),
        significant_pairs: Vec::new(),
        notices: Vec::new(),
    };
    if groups.len() < 2 {
        report
            .notices
            .push(format!("only {} group(s); tests skipped", groups.len()));
        return Ok(report);
    }
    let levels: Vec<&String> = groups.keys().collect();
    let values: Vec<&[f64]> = groups.values().map(|v| v.as_slice()).collect();

    match factor {
        Factor::Method => {
            let homogeneous = record(&mut report, levene_test(&values))
                .map(|r| r.p_value >= HOMOGENEITY_ALPHA);
            match homogeneous {
                Some(true) => {
                    record(&mut report, one_way_anova(&values));
                }
                Some(false) => {
                    record(&mut report, kruskal_wallis(&values));
                }
                None => {}
            }
            match tukey_hsd(&values, TUKEY_ALPHA) {
                Ok(pairs) => {
                    for p in pairs.into_iter().filter(|p| p.significant) {
                        report.significant_pairs.push(SignificantPair {
                            level_a: levels[p.group_a].clone(),
                            level_b: levels[p.group_b].clone(),
                            mean_difference: p.mean_difference,
                            q: p.q,
                            p_value: p.p_value,
                            stars: p.stars,
                        });
                    }
                }
                Err(e) => report.notices.push(format!("Tukey HSD skipped: {e}")),
            }
        }
        Factor::Material => {
            if values.len() != 2 {
                report
                    .notices
                    .push("material comparison needs exactly two groups".into());
                return Ok(report);
            }
            let homogeneous = record(&mut report, levene_test(&values))
                .map(|r| r.p_value >= HOMOGENEITY_ALPHA);
            match homogeneous {
                Some(true) => {
                    record(&mut report, independent_t_test(values[0], values[1]));
                }
                Some(false) => {
                    record(&mut report, welch_t_test(values[0], values[1]));
                }
                None => {}
            }
        }
        Factor::Phase => {
            let (pre, post) = table.paired_by_phase(parameter);
            record(&mut report, paired_t_test(&pre, &post));
        }
    }
    Ok(report)
}

/// Group summaries and the test battery for every parameter and factor.
///
/// Method: Levene, then one-way ANOVA (or Kruskal–Wallis when variances
/// differ), then Tukey HSD. Material: Levene, then the pooled t-test (or
/// Welch). Phase: paired t-test. Tests whose preconditions fail are skipped
/// with a notice.
pub fn analyze(table: &SampleTable) -> Result<AnalysisReport, StatsError> {
    let mut parameters = Vec::new();
    for parameter in table.parameters() {
        let factors = [Factor::Method, Factor::Material, Factor::Phase]
            .into_iter()
            .map(|f| analyze_factor(table, parameter, f))
            .collect::<Result<Vec<_>, _>>()?;
        let unit = match parameter {
            DhParameter::Length => "mm",
            DhParameter::Twist | DhParameter::Joint => "deg",
        };
        parameters.push(ParameterReport {
            parameter,
            unit,
            factors,
        });
    }
    Ok(AnalysisReport { parameters })
}
