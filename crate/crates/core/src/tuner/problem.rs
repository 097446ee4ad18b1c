use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ga_optimize_restarts, nsga2_optimize, GaConfig, GaResult, Nsga2Config, ParetoArchive, SearchSpace};
use crate::closed_loop::{evaluate_candidate, evaluate_indices, LoopSettings, Scenario, UssMode, Weights, PENALTY};
use crate::controllers::{ControllerSpec, Structure};
use crate::error::{Error, Result};
use crate::plantsim::PlantModel;

/// Objective pair for the multi-objective search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectivePair {
    /// Set-point ISTSE against control effort, on the set-point window.
    #[default]
    TrackingEffort,
    /// Set-point ISTSE against load ISTSE, on the full scenario.
    TrackingDisturbance,
}

impl ObjectivePair {
    pub fn tag(self) -> &'static str {
        match self {
            ObjectivePair::TrackingEffort => "tracking-effort",
            ObjectivePair::TrackingDisturbance => "tracking-disturbance",
        }
    }

    /// CSV names of the two objectives.
    pub fn columns(self) -> [&'static str; 2] {
        match self {
            ObjectivePair::TrackingEffort => ["J1", "J2"],
            ObjectivePair::TrackingDisturbance => ["J1", "J3"],
        }
    }
}

impl fmt::Display for ObjectivePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ObjectivePair {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tracking-effort" => Ok(ObjectivePair::TrackingEffort),
            "tracking-disturbance" => Ok(ObjectivePair::TrackingDisturbance),
            _ => Err(Error::Config(format!("unknown objective pair '{s}'"))),
        }
    }
}

/// A controller structure to tune on one plant and scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct TuningProblem {
    pub plant: PlantModel,
    pub structure: Structure,
    /// Full scenario; single-objective tuning uses only its set-point window.
    pub scenario: Scenario,
    pub settings: LoopSettings,
    pub weights: Weights,
    pub uss_mode: UssMode,
}

impl TuningProblem {
    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.scenario.validate()?;
        self.settings.validate()
    }

    pub fn space(&self) -> SearchSpace {
        SearchSpace::for_structure(self.structure)
    }

    pub fn spec(&self, x: &[f64]) -> Result<ControllerSpec> {
        ControllerSpec::from_vector(self.structure, x)
    }

    /// Weighted set-point cost, or the penalty.
    pub fn fitness(&self, x: &[f64]) -> f64 {
        match self.spec(x) {
            Ok(spec) => evaluate_candidate(
                &self.plant,
                &spec,
                &self.scenario.setpoint_window(),
                &self.settings,
                self.weights,
                self.uss_mode,
            ),
            Err(_) => PENALTY,
        }
    }

    /// Objective vector for `pair`; both entries are the penalty on failure.
    pub fn objectives(&self, x: &[f64], pair: ObjectivePair) -> [f64; 2] {
        let Ok(spec) = self.spec(x) else { return [PENALTY; 2] };
        let sc = match pair {
            ObjectivePair::TrackingEffort => self.scenario.setpoint_window(),
            ObjectivePair::TrackingDisturbance => self.scenario,
        };
        match evaluate_indices(&self.plant, &spec, &sc, &self.settings, self.weights, self.uss_mode) {
            Ok(Some(rep)) => {
                let second = match pair {
                    ObjectivePair::TrackingEffort => rep.isdco_setpoint,
                    ObjectivePair::TrackingDisturbance => rep.istse_load.unwrap_or(PENALTY),
                };
                [rep.istse_setpoint.min(PENALTY), second.min(PENALTY)]
            }
            _ => [PENALTY; 2],
        }
    }

    /// GA restarts over the seeds; returns the best run and all runs.
    pub fn tune(&self, cfg: &GaConfig, seeds: &[u64]) -> Result<(GaResult, Vec<GaResult>)> {
        self.validate()?;
        ga_optimize_restarts(&self.space(), |x: &[f64]| self.fitness(x), cfg, seeds)
    }

    /// NSGA-II front; penalized members are dropped, so the archive is
    /// empty when no stable candidate was found.
    pub fn pareto(&self, pair: ObjectivePair, cfg: &Nsga2Config) -> Result<ParetoArchive> {
        self.validate()?;
        let mut archive = nsga2_optimize(&self.space(), |x: &[f64]| self.objectives(x, pair).to_vec(), cfg)?;
        archive.members.retain(|m| m.objectives.iter().all(|&v| v < PENALTY));
        Ok(archive)
    }
}
