//! Run configuration files (JSON) and command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::closed_loop::{LoopSettings, Scenario, UssMode, Weights};
use crate::controllers::{ControllerSpec, Structure};
use crate::error::{Error, Result};
use crate::fracops::Band;
use crate::plantsim::PlantModel;
use crate::presets::PlantPreset;
use crate::tuner::{GaConfig, Nsga2Config, ObjectivePair, TuningProblem};

/// A named preset or explicit plant parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlantChoice {
    Preset(PlantPreset),
    Model(PlantModel),
}

impl PlantChoice {
    pub fn model(&self) -> PlantModel {
        match self {
            PlantChoice::Preset(p) => p.model(),
            PlantChoice::Model(m) => *m,
        }
    }

    pub fn preset(&self) -> Option<PlantPreset> {
        match self {
            PlantChoice::Preset(p) => Some(*p),
            PlantChoice::Model(_) => None,
        }
    }
}

/// Loop settings that may be overridden from the command line.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LoopOverrides {
    pub dt: Option<f64>,
    pub band: Option<Band>,
    pub half_order: Option<usize>,
}

impl LoopOverrides {
    pub fn apply(&self, mut s: LoopSettings) -> LoopSettings {
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(b) = self.band {
            s.filters.band = b;
        }
        if let Some(n) = self.half_order {
            s.filters.half_order = n;
        }
        s
    }
}

/// Everything a run needs. Missing sections fall back to the plant preset
/// defaults; unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub plant: Option<PlantChoice>,
    pub structure: Option<Structure>,
    pub controller: Option<ControllerSpec>,
    pub scenario: Option<Scenario>,
    #[serde(rename = "loop")]
    pub loop_settings: Option<LoopSettings>,
    pub weights: Weights,
    pub uss_mode: UssMode,
    pub objectives: ObjectivePair,
    pub ga: GaConfig,
    pub nsga2: Nsga2Config,
    /// GA restart seeds; empty means the single seed in `ga`.
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn plant_model(&self) -> Result<PlantModel> {
        let m = self.plant.ok_or_else(|| Error::Config("no plant given".into()))?.model();
        m.validate()?;
        Ok(m)
    }

    fn preset(&self) -> Option<PlantPreset> {
        self.plant.and_then(|p| p.preset())
    }

    /// Explicit settings, else the preset defaults, else `dt = 0.005`.
    pub fn settings(&self, overrides: &LoopOverrides) -> LoopSettings {
        let base = self
            .loop_settings
            .or_else(|| self.preset().map(|p| p.default_settings()))
            .unwrap_or_else(|| LoopSettings::new(0.005));
        overrides.apply(base)
    }

    /// Explicit scenario, else the preset default, else a 40 s run with a
    /// disturbance at 20 s.
    pub fn scenario(&self) -> Scenario {
        self.scenario
            .or_else(|| self.preset().map(|p| p.default_scenario()))
            .unwrap_or_else(|| Scenario::with_disturbance(40.0))
    }

    pub fn structure(&self) -> Option<Structure> {
        self.structure.or_else(|| self.controller.as_ref().map(|c| c.structure()))
    }

    pub fn problem(&self, overrides: &LoopOverrides) -> Result<TuningProblem> {
        let structure = self.structure().ok_or_else(|| Error::Config("no controller structure given".into()))?;
        let pb = TuningProblem {
            plant: self.plant_model()?,
            structure,
            scenario: self.scenario(),
            settings: self.settings(overrides),
            weights: self.weights,
            uss_mode: self.uss_mode,
        };
        pb.validate()?;
        Ok(pb)
    }

    /// Checks every section that is present.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.plant {
            p.model().validate()?;
        }
        if let (Some(s), Some(c)) = (self.structure, &self.controller) {
            if s != c.structure() {
                return Err(Error::Config(format!("structure {s} does not match controller {}", c.structure())));
            }
        }
        if let Some(sc) = &self.scenario {
            sc.validate()?;
        }
        if let Some(ls) = &self.loop_settings {
            ls.validate()?;
        }
        if !(self.weights.w1 >= 0.0 && self.weights.w2 >= 0.0) {
            return Err(Error::Config("weights must be non-negative".into()));
        }
        self.ga.validate()?;
        self.nsga2.validate()
    }

    pub fn seed_list(&self) -> Vec<u64> {
        if self.seeds.is_empty() { vec![self.ga.seed] } else { self.seeds.clone() }
    }
}

/// Reads a controller spec file: either a bare spec or a run config with a
/// `controller` section.
pub fn load_controller(path: impl AsRef<Path>) -> Result<ControllerSpec> {
    let text = fs::read_to_string(path)?;
    match serde_json::from_str::<ControllerSpec>(&text) {
        Ok(spec) => Ok(spec),
        Err(direct) => match RunConfig::from_json(&text) {
            Ok(RunConfig { controller: Some(c), .. }) => Ok(c),
            _ => Err(direct.into()),
        },
    }
}

/// Reads a scenario file: either a bare scenario or a run config with a
/// `scenario` section.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    let sc = match serde_json::from_str::<Scenario>(&text) {
        Ok(sc) => sc,
        Err(direct) => match RunConfig::from_json(&text) {
            Ok(RunConfig { scenario: Some(sc), .. }) => sc,
            _ => return Err(direct.into()),
        },
    };
    sc.validate()?;
    Ok(sc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg.ga, GaConfig::default());
        assert_eq!(cfg.uss_mode, UssMode::Dc);
        assert_eq!(cfg.seed_list(), vec![0]);
    }

    #[test]
    fn preset_and_inline_plants() {
        let cfg = RunConfig::from_json(r#"{"plant": "gp2", "structure": "fuzzy-pd-i"}"#).unwrap();
        assert_eq!(cfg.plant_model().unwrap(), PlantModel::gp2());
        assert_eq!(cfg.settings(&LoopOverrides::default()).dt, 0.005);
        assert_eq!(cfg.scenario().horizon, 60.0);
        let over = LoopOverrides { dt: Some(0.02), half_order: Some(3), ..Default::default() };
        let s = cfg.settings(&over);
        assert_eq!((s.dt, s.filters.half_order), (0.02, 3));
        cfg.problem(&LoopOverrides::default()).unwrap();

        let cfg = RunConfig::from_json(
            r#"{"plant": {"gain": 2.0, "time_constant": 1.0, "alpha": 1.2, "dead_time": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.plant_model().unwrap().gain, 2.0);
        assert!(cfg.problem(&LoopOverrides::default()).is_err());
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(RunConfig::from_json(r#"{"plnat": "gp1"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"plant": "gp9"}"#).is_err());
        assert!(RunConfig::from_json(r#"{"ga": {"population": 10, "elite_count": 10}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"scenario": {"horizon": 10, "disturbance_time": 12}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"plant": {"gain": 0, "time_constant": 1, "alpha": 1, "dead_time": 0}}"#).is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            plant: Some(PlantChoice::Preset(PlantPreset::Gp1)),
            structure: Some(Structure::FuzzyPid),
            seeds: vec![1, 2],
            ..Default::default()
        };
        assert_eq!(RunConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    }
}
