use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::fabrication::{GapModel, Method};
use crate::geometry::{DHChain, DHLink};
use crate::measurement::Phase;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnits {
    #[default]
    Deg,
    Rad,
}

impl AngleUnits {
    pub fn suffix(self) -> &'static str {
        match self {
            AngleUnits::Deg => "deg",
            AngleUnits::Rad => "rad",
        }
    }

    /// Converts radians to this unit.
    pub fn from_rad(self, x: f64) -> f64 {
        match self {
            AngleUnits::Deg => x.to_degrees(),
            AngleUnits::Rad => x,
        }
    }
}

impl fmt::Display for AngleUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.suffix())
    }
}

/// One link as written in chain files. Each angle may be given in degrees or
/// radians but not both; an absent angle is zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    pub a_mm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_rad: Option<f64>,
}

fn angle(deg: Option<f64>, rad: Option<f64>, what: &str, i: usize) -> Result<f64, CliError> {
    match (deg, rad) {
        (Some(_), Some(_)) => Err(CliError::Parse(format!(
            "link {}: give {what}_deg or {what}_rad, not both",
            i + 1
        ))),
        (Some(d), None) => Ok(d.to_radians()),
        (None, Some(r)) => Ok(r),
        (None, None) => Ok(0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub radius_mm: f64,
    pub links: Vec<LinkSpec>,
}

impl ChainSpec {
    pub fn to_chain(&self) -> Result<DHChain, CliError> {
        let links = self
            .links
            .iter()
            .enumerate()
            .map(|(i, l)| {
                Ok(DHLink::new(
                    l.a_mm,
                    angle(l.alpha_deg, l.alpha_rad, "alpha", i)?,
                    angle(l.theta_deg, l.theta_rad, "theta", i)?,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        DHChain::new(links, self.radius_mm).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn from_chain(chain: &DHChain, units: AngleUnits) -> Self {
        let links = chain
            .links
            .iter()
            .map(|l| match units {
                AngleUnits::Deg => LinkSpec {
                    a_mm: l.a,
                    alpha_deg: Some(l.alpha.to_degrees()),
                    theta_deg: Some(l.theta.to_degrees()),
                    ..Default::default()
                },
                AngleUnits::Rad => LinkSpec {
                    a_mm: l.a,
                    alpha_rad: Some(l.alpha),
                    theta_rad: Some(l.theta),
                    ..Default::default()
                },
            })
            .collect();
        Self {
            radius_mm: chain.radius,
            links,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapSpec {
    pub method: Method,
    /// Overrides the method's default gap.
    #[serde(default)]
    pub d_g_mm: Option<f64>,
}

impl GapSpec {
    pub fn to_model(self) -> Result<GapModel, CliError> {
        match self.d_g_mm {
            Some(d) => GapModel::new(self.method, d).map_err(|e| CliError::Parse(e.to_string())),
            None => Ok(GapModel::default_for(self.method)),
        }
    }
}

impl Default for GapSpec {
    fn default() -> Self {
        Self {
            method: Method::Tape,
            d_g_mm: None,
        }
    }
}

/// Project file tying a design to its data. Relative paths are resolved
/// against the directory holding the project file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    #[serde(default)]
    pub chain_file: Option<PathBuf>,
    #[serde(default)]
    pub chain: Option<ChainSpec>,
    #[serde(default)]
    pub gap: Option<GapSpec>,
    #[serde(default)]
    pub scene_file: Option<PathBuf>,
    #[serde(default)]
    pub polyline_file: Option<PathBuf>,
    #[serde(default)]
    pub markers_file: Option<PathBuf>,
    #[serde(default)]
    pub phase: Option<Phase>,
    #[serde(default)]
    pub samples_file: Option<PathBuf>,
    #[serde(default)]
    pub trials_file: Option<PathBuf>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub angle_units: Option<AngleUnits>,
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path)?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.chain_file,
            &mut cfg.scene_file,
            &mut cfg.polyline_file,
            &mut cfg.markers_file,
            &mut cfg.samples_file,
            &mut cfg.trials_file,
            &mut cfg.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.chain_file.is_some() && self.chain.is_some() {
            return Err(CliError::Parse(
                "project sets both chain_file and an inline chain".into(),
            ));
        }
        for p in [
            &self.chain_file,
            &self.scene_file,
            &self.polyline_file,
            &self.markers_file,
            &self.samples_file,
            &self.trials_file,
        ]
        .into_iter()
        .flatten()
        {
            if !p.is_file() {
                return Err(CliError::MissingData(format!(
                    "referenced file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    /// The design chain from the command line file, else the project.
    pub fn resolve_chain(&self, override_file: Option<&Path>) -> Result<DHChain, CliError> {
        if let Some(p) = override_file {
            return ChainSpec::load(p)?.to_chain();
        }
        match (&self.chain_file, &self.chain) {
            (Some(p), None) => ChainSpec::load(p)?.to_chain(),
            (None, Some(spec)) => spec.to_chain(),
            (Some(_), Some(_)) => Err(CliError::Parse(
                "project sets both chain_file and an inline chain".into(),
            )),
            (None, None) => Err(CliError::MissingData(
                "no chain given (use --chain or a project with chain_file or chain)".into(),
            )),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            CliError::MissingData(format!("{}: file not found", path.display()))
        }
        _ => CliError::Io(format!("{}: {e}", path.display())),
    })
}
