//! Named plants, their default loop settings, and the published tuning rows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::closed_loop::{LoopSettings, Scenario};
use crate::controllers::{ControllerSpec, Structure};
use crate::error::{Error, Result};
use crate::plantsim::PlantModel;

/// The three test processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantPreset {
    Gp1,
    Gp2,
    Gp3,
}

impl PlantPreset {
    pub const ALL: [PlantPreset; 3] = [PlantPreset::Gp1, PlantPreset::Gp2, PlantPreset::Gp3];

    pub fn model(self) -> PlantModel {
        match self {
            PlantPreset::Gp1 => PlantModel::gp1(),
            PlantPreset::Gp2 => PlantModel::gp2(),
            PlantPreset::Gp3 => PlantModel::gp3(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            PlantPreset::Gp1 => "gp1",
            PlantPreset::Gp2 => "gp2",
            PlantPreset::Gp3 => "gp3",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            PlantPreset::Gp1 => "lag-dominant",
            PlantPreset::Gp2 => "balanced lag and delay",
            PlantPreset::Gp3 => "delay-dominant",
        }
    }

    /// Step resolving the upper approximation band edge (`w_h dt = 0.5`
    /// at the default band) with at least 20 samples across the dead time.
    pub fn default_dt(self) -> f64 {
        0.005
    }

    pub fn default_horizon(self) -> f64 {
        match self {
            PlantPreset::Gp1 => 40.0,
            PlantPreset::Gp2 => 60.0,
            PlantPreset::Gp3 => 40.0,
        }
    }

    pub fn default_settings(self) -> LoopSettings {
        LoopSettings::new(self.default_dt())
    }

    /// Unit set-point at 0 s, unit load disturbance at half the horizon.
    pub fn default_scenario(self) -> Scenario {
        Scenario::with_disturbance(self.default_horizon())
    }
}

impl fmt::Display for PlantPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PlantPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PlantPreset::ALL
            .into_iter()
            .find(|p| p.tag() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown plant preset '{s}'")))
    }
}

/// One published optimum: process, structure, reported cost and parameters
/// in table-column order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PublishedRow {
    pub plant: PlantPreset,
    pub structure: Structure,
    pub j_min: f64,
    pub values: &'static [f64],
}

impl PublishedRow {
    pub fn spec(&self) -> ControllerSpec {
        ControllerSpec::from_vector(self.structure, self.values).expect("published rows are within bounds")
    }
}

use PlantPreset::{Gp1, Gp2, Gp3};
use Structure::{FuzzyPPlusId, FuzzyPdPlusI, FuzzyPiPlusD, FuzzyPiPlusPd, FuzzyPid};

const ROWS: [PublishedRow; 15] = [
    // K_e, K_d, K_PI, K_PD, lambda, mu
    PublishedRow { plant: Gp1, structure: FuzzyPid, j_min: 38.20247, values: &[0.887976, 0.63353, 1.417276, 0.820367, 0.959188, 0.994714] },
    PublishedRow { plant: Gp2, structure: FuzzyPid, j_min: 7.630405, values: &[0.098897, 0.102872, 0.728721, 0.787448, 0.998849, 0.992102] },
    PublishedRow { plant: Gp3, structure: FuzzyPid, j_min: 39.6631, values: &[0.666385, 0.214853, 0.801473, 0.321055, 0.998524, 0.288179] },
    // K_e1, K_d1, K_PI, K_e2, K_d2, K_PD, lambda, mu
    PublishedRow { plant: Gp1, structure: FuzzyPiPlusPd, j_min: 38.17563, values: &[0.957059, 0.74568, 1.506117, 0.725838, 0.872039, 0.882793, 0.932188, 0.982342] },
    PublishedRow { plant: Gp2, structure: FuzzyPiPlusPd, j_min: 3.752172, values: &[0.177834, 0.016532, 0.636613, 0.299998, 0.765192, 0.287097, 0.976782, 0.810926] },
    PublishedRow { plant: Gp3, structure: FuzzyPiPlusPd, j_min: 39.64602, values: &[0.848295, 0.209849, 0.843522, 0.295589, 0.209216, 0.487242, 0.971632, 0.436048] },
    // K_e, K_d1, K_p, K_d2, K_i, lambda, mu1, mu2
    PublishedRow { plant: Gp1, structure: FuzzyPPlusId, j_min: 38.1687, values: &[0.339126, 0.81547, 0.594271, 1.924765, 1.806937, 0.882179, 0.973166, 0.177353] },
    PublishedRow { plant: Gp2, structure: FuzzyPPlusId, j_min: 3.631472, values: &[0.007836, 0.288275, 0.650441, 0.131799, 0.17253, 0.973567, 0.769968, 0.05902] },
    PublishedRow { plant: Gp3, structure: FuzzyPPlusId, j_min: 39.69599, values: &[0.64044, 0.094509, 0.301722, 0.161946, 0.657659, 0.972741, 0.998061, 0.00964] },
    // K_e, K_d1, K_PI, K_d2, lambda, mu1, mu2
    PublishedRow { plant: Gp1, structure: FuzzyPiPlusD, j_min: 38.21658, values: &[0.658696, 0.328859, 2.02627, 1.314265, 0.883782, 0.707495, 0.432665] },
    PublishedRow { plant: Gp2, structure: FuzzyPiPlusD, j_min: 6.67324, values: &[0.435695, 0.240776, 0.379578, 0.314335, 0.873519, 0.59048, 0.753619] },
    PublishedRow { plant: Gp3, structure: FuzzyPiPlusD, j_min: 39.89151, values: &[0.712596, 0.20361, 1.06411, 0.220181, 0.940606, 0.607729, 0.429407] },
    // K_e, K_d, K_i, K_PD, lambda, mu
    PublishedRow { plant: Gp1, structure: FuzzyPdPlusI, j_min: 38.22424, values: &[0.207274, 0.59619, 0.639649, 1.039919, 0.983022, 0.599213] },
    PublishedRow { plant: Gp2, structure: FuzzyPdPlusI, j_min: 3.297377, values: &[0.056807, 0.211725, 0.113836, 0.828508, 0.989822, 0.723279] },
    PublishedRow { plant: Gp3, structure: FuzzyPdPlusI, j_min: 39.67555, values: &[0.344379, 0.5251, 0.626799, 0.33055, 0.96105, 0.28574] },
];

/// The published (process x structure) optima.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRegistry {
    rows: Vec<PublishedRow>,
}

impl Default for TableRegistry {
    fn default() -> Self {
        Self { rows: ROWS.to_vec() }
    }
}

impl TableRegistry {
    pub fn from_rows(rows: Vec<PublishedRow>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[PublishedRow] {
        &self.rows
    }

    pub fn get(&self, plant: PlantPreset, structure: Structure) -> Option<&PublishedRow> {
        self.rows.iter().find(|r| r.plant == plant && r.structure == structure)
    }

    /// Row with the lowest published cost for a process.
    pub fn best_for(&self, plant: PlantPreset) -> Option<&PublishedRow> {
        self.rows.iter().filter(|r| r.plant == plant).min_by(|a, b| a.j_min.total_cmp(&b.j_min))
    }

    /// Every process has a row for every structure.
    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Config("table registry is empty".into()));
        }
        for p in PlantPreset::ALL {
            for s in Structure::ALL {
                if self.get(p, s).is_none() {
                    return Err(Error::Config(format!("registry lacks a row for {p} / {s}")));
                }
            }
        }
        for r in &self.rows {
            ControllerSpec::from_vector(r.structure, r.values)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_complete() {
        let reg = TableRegistry::default();
        assert_eq!(reg.rows().len(), 15);
        reg.validate().unwrap();
        assert!(TableRegistry::from_rows(vec![]).validate().is_err());
    }

    #[test]
    fn registry_matches_published_tables() {
        let reg = TableRegistry::default();
        let row = reg.get(Gp2, FuzzyPPlusId).unwrap();
        assert_eq!(row.j_min, 3.631472);
        assert_eq!(row.values, &[0.007836, 0.288275, 0.650441, 0.131799, 0.17253, 0.973567, 0.769968, 0.05902]);
        let row = reg.get(Gp3, FuzzyPiPlusD).unwrap();
        assert_eq!(row.j_min, 39.89151);
        assert_eq!(row.values, &[0.712596, 0.20361, 1.06411, 0.220181, 0.940606, 0.607729, 0.429407]);
        let row = reg.get(Gp1, FuzzyPid).unwrap();
        assert_eq!(row.spec().get("K_PI"), Some(1.417276));
        let row = reg.get(Gp2, FuzzyPiPlusPd).unwrap();
        assert_eq!(row.spec().get("K_d1"), Some(0.016532));
        let row = reg.get(Gp1, FuzzyPdPlusI).unwrap();
        assert_eq!(row.j_min, 38.22424);
        assert_eq!(row.spec().get("lambda"), Some(0.983022));
    }

    #[test]
    fn best_rows() {
        let reg = TableRegistry::default();
        assert_eq!(reg.best_for(Gp1).unwrap().structure, FuzzyPPlusId);
        assert_eq!(reg.best_for(Gp2).unwrap().structure, FuzzyPdPlusI);
        assert_eq!(reg.best_for(Gp3).unwrap().structure, FuzzyPiPlusPd);
    }

    #[test]
    fn preset_parsing() {
        assert_eq!("gp2".parse::<PlantPreset>().unwrap(), Gp2);
        assert_eq!("GP3".parse::<PlantPreset>().unwrap(), Gp3);
        assert!("gp4".parse::<PlantPreset>().is_err());
    }
}
