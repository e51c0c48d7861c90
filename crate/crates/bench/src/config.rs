//! Experiment configuration (TOML).
//!
//! ```toml
//! m = 64
//! g = 12
//! scheme = "FC_I"               # or CUSTOM with `assignment`
//! channel = "IID_RAYLEIGH"      # or GEOMETRIC with [geometry]
//! amplitude_spread = 0.1
//! snr_db = [10, 20, 30, 40, 50]   # inf for a noiseless run
//! trials = 500
//! estimators = ["LS", "AVALANCHE"]
//! constraint = "NPC"
//! seed = 1
//! ```

use std::path::Path;
use std::str::FromStr;

use otacal::airlink::{NoncoherentSchedule, PilotKind};
use otacal::estimators::{AmlInit, AmlOptions};
use otacal::grouping::{make_scheme, GroupScheme, SchemeLabel};
use otacal::model::{ChannelModel, GeometryConfig, ImpairmentConfig};
use otacal::stacking::{check_identifiability, Identifiability};
use serde::Deserialize;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
pub enum Estimator {
    /// Joint constrained LS over every pair ("fast calibration" when groups
    /// hold several antennas).
    #[serde(rename = "LS")]
    Ls,
    #[serde(rename = "ARGOS")]
    Argos,
    #[serde(rename = "ROGALIN")]
    Rogalin,
    #[serde(rename = "DAISY_CHAIN")]
    DaisyChain,
    #[serde(rename = "AVALANCHE")]
    Avalanche,
    #[serde(rename = "AML")]
    Aml,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Ls => "LS",
            Estimator::Argos => "ARGOS",
            Estimator::Rogalin => "ROGALIN",
            Estimator::DaisyChain => "DAISY_CHAIN",
            Estimator::Avalanche => "AVALANCHE",
            Estimator::Aml => "AML",
        }
    }
}

impl FromStr for Estimator {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        [
            Estimator::Ls,
            Estimator::Argos,
            Estimator::Rogalin,
            Estimator::DaisyChain,
            Estimator::Avalanche,
            Estimator::Aml,
        ]
        .into_iter()
        .find(|e| e.name() == s)
        .ok_or_else(|| BenchError::Config(format!("unknown estimator {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum ConstraintKind {
    #[serde(rename = "FCC")]
    Fcc,
    #[serde(rename = "NPC")]
    Npc,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Fcc => "FCC",
            ConstraintKind::Npc => "NPC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PilotChoice {
    Ones,
    Random,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "half")]
    pub spacing_over_wavelength: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmlStart {
    Ones,
    Ls,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmlSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_start")]
    pub init: AmlStart,
}

fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    100
}
// from all-ones the alternation can stall far from the optimum
fn default_start() -> AmlStart {
    AmlStart::Ls
}

impl Default for AmlSection {
    fn default() -> Self {
        AmlSection { tol: default_tol(), max_iter: default_max_iter(), init: default_start() }
    }
}

impl AmlSection {
    pub fn options(&self) -> AmlOptions {
        let init = match self.init {
            AmlStart::Ones => AmlInit::Ones,
            AmlStart::Ls => AmlInit::LsWarmStart,
        };
        AmlOptions { tol: self.tol, max_iter: self.max_iter, init }
    }
}

/// Non-coherent accumulation: either `"pairwise"` or an explicit list of
/// active groups per slot.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Named(String),
    Slots(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    #[serde(default)]
    pub g: Option<usize>,
    pub scheme: SchemeLabel,
    /// Per-antenna group index, for `CUSTOM`.
    #[serde(default)]
    pub assignment: Option<Vec<usize>>,
    #[serde(default)]
    pub pilot_lengths: Option<Vec<usize>>,
    #[serde(default)]
    pub pilots: Option<PilotChoice>,
    #[serde(default = "default_channel")]
    pub channel: String,
    #[serde(default)]
    pub geometry: Option<GeometrySection>,
    /// Keep one channel draw for every trial.
    #[serde(default)]
    pub fixed_channel: bool,
    #[serde(default = "default_spread")]
    pub amplitude_spread: f64,
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub estimators: Vec<Estimator>,
    pub constraint: ConstraintKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub aml: AmlSection,
    /// Average the constrained CRB over the trials.
    #[serde(default = "yes")]
    pub crb: bool,
    /// Record wall-clock time per estimator (makes output non-reproducible).
    #[serde(default)]
    pub timing: bool,
}

fn default_channel() -> String {
    "IID_RAYLEIGH".into()
}
fn default_spread() -> f64 {
    0.1
}
fn default_trials() -> usize {
    500
}
fn yes() -> bool {
    true
}

/// Everything derived from a validated config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scheme: GroupScheme,
    pub channel: ChannelModel,
    pub geometry: Option<GeometryConfig>,
    pub impairments: ImpairmentConfig,
    pub pilots: PilotKind,
    pub schedule: Option<NoncoherentSchedule>,
    pub identifiability: Identifiability,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    fn scheme(&self, geometry: Option<&GeometryConfig>) -> Result<GroupScheme, BenchError> {
        match self.scheme {
            SchemeLabel::Custom => {
                let a = self
                    .assignment
                    .clone()
                    .ok_or_else(|| BenchError::Config("CUSTOM scheme needs `assignment`".into()))?;
                if a.len() != self.m {
                    return Err(BenchError::Config(format!("assignment has {} entries, m = {}", a.len(), self.m)));
                }
                Ok(GroupScheme::from_assignment(SchemeLabel::Custom, a, self.pilot_lengths.clone())?)
            }
            label => {
                let g = match (label, self.g) {
                    (SchemeLabel::Singleton, None) => self.m,
                    (SchemeLabel::Argos, None) => 2,
                    (_, Some(g)) => g,
                    (_, None) => return Err(BenchError::Config(format!("scheme {label} needs `g`"))),
                };
                Ok(make_scheme(label, self.m, g, geometry)?)
            }
        }
    }

    /// Check every field and derive the simulation objects. An
    /// unidentifiable scheme yields [`BenchError::Unidentifiable`].
    pub fn resolve(&self) -> Result<Resolved, BenchError> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|&s| s.is_nan() || s == f64::NEG_INFINITY) {
            return bad("snr_db must be a non-empty list of finite values or inf (noiseless)".into());
        }
        if self.estimators.is_empty() {
            return bad("no estimators listed".into());
        }
        let channel = match self.channel.as_str() {
            "IID_RAYLEIGH" => ChannelModel::IidRayleigh,
            "GEOMETRIC" => ChannelModel::Geometric,
            other => return bad(format!("unknown channel model {other:?}")),
        };
        let geometry = self.geometry.as_ref().map(|g| GeometryConfig {
            rows: g.rows,
            cols: g.cols,
            spacing_over_wavelength: g.spacing_over_wavelength,
        });
        if let Some(geo) = &geometry {
            geo.validate(self.m)?;
        }
        if channel == ChannelModel::Geometric && geometry.is_none() {
            return bad("GEOMETRIC channel needs a [geometry] section".into());
        }
        let impairments = ImpairmentConfig { amplitude_spread: self.amplitude_spread, fix_first_to_one: true };
        impairments.validate()?;
        let scheme = self.scheme(geometry.as_ref())?;
        let part = &scheme.partition;

        let pilots = match self.pilots {
            Some(PilotChoice::Ones) => PilotKind::AllOnes,
            Some(PilotChoice::Random) => PilotKind::UnitPhaseRandom,
            Some(PilotChoice::Identity) => PilotKind::Identity,
            None if part.pilot_lengths().iter().all(|&l| l == 1) => PilotKind::AllOnes,
            None if part.group_sizes() == part.pilot_lengths() => PilotKind::Identity,
            None => PilotKind::UnitPhaseRandom,
        };

        let schedule = match &self.schedule {
            None => None,
            Some(ScheduleSpec::Named(n)) if n == "pairwise" => Some(NoncoherentSchedule::pairwise(part.g())?),
            Some(ScheduleSpec::Named(n)) => return bad(format!("unknown schedule {n:?}")),
            Some(ScheduleSpec::Slots(s)) => Some(NoncoherentSchedule::new(s.clone(), part.g())?),
        };
        if schedule.is_some() && self.estimators.iter().any(|&e| e != Estimator::Ls) {
            return bad("non-coherent schedules are only supported by the LS estimator".into());
        }

        for &e in &self.estimators {
            check_applicable(e, &scheme, pilots)?;
        }
        if self.aml.tol <= 0.0 || self.aml.max_iter == 0 {
            return bad("aml.tol must be positive and aml.max_iter at least 1".into());
        }

        let identifiability = check_identifiability(part, schedule.as_ref());
        if !identifiability.ok {
            return Err(BenchError::Unidentifiable(identifiability));
        }
        Ok(Resolved { scheme, channel, geometry, impairments, pilots, schedule, identifiability })
    }
}

/// Structural preconditions of each estimator, checked before any trial.
fn check_applicable(e: Estimator, scheme: &GroupScheme, pilots: PilotKind) -> Result<(), BenchError> {
    let p = &scheme.partition;
    let singletons = p.group_sizes().iter().all(|&s| s == 1) && p.pilot_lengths().iter().all(|&l| l == 1);
    let ok = match e {
        Estimator::Ls | Estimator::Aml => true,
        Estimator::Rogalin | Estimator::DaisyChain => singletons,
        Estimator::Argos => p.size(0) == 1 && (singletons || (p.g() == 2 && pilots == PilotKind::Identity)),
        Estimator::Avalanche => {
            p.size(0) == 1 && p.pilot_lengths().iter().all(|&l| l == 1) && (1..p.g()).all(|k| p.size(k) <= k)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(BenchError::Config(format!("{} cannot run on the {} scheme {:?}", e.name(), scheme.label, p.group_sizes())))
    }
}
