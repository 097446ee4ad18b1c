//! The five hybrid fractional-order fuzzy PID control laws.
//!
//! Every structure feeds the same two-input fuzzy engine with the scaled
//! error and a scaled fractional rate of error. They differ in where the
//! fractional integral sits (on the fuzzy output or on the error) and in
//! whether a fractional derivative of the plant output is subtracted.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::{DiscreteFilter, FilterSettings};
use crate::fuzzy::FuzzyEngine;

/// Bounds of the FLC input scaling factors.
pub const INPUT_SF_BOUNDS: (f64, f64) = (0.0, 1.0);
/// Bounds of output scaling factors and conventional gains.
pub const GAIN_BOUNDS: (f64, f64) = (0.0, 40.0);
/// Bounds of every integro-differential order.
pub const ORDER_BOUNDS: (f64, f64) = (0.0, 2.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    /// `K_PI * I^lambda[v] + K_PD * v`
    #[serde(rename = "fuzzy-pid")]
    FuzzyPid,
    /// Two FLCs with separate input scaling, sharing one rate order.
    #[serde(rename = "fuzzy-pi-pd")]
    FuzzyPiPlusPd,
    /// Fuzzy P, FO integral of error, FO derivative of the output.
    #[serde(rename = "fuzzy-p-id")]
    FuzzyPPlusId,
    /// Fuzzy PI with FO derivative of the output.
    #[serde(rename = "fuzzy-pi-d")]
    FuzzyPiPlusD,
    /// Fuzzy PD with FO integral of error.
    #[serde(rename = "fuzzy-pd-i")]
    FuzzyPdPlusI,
}

/// What a named parameter is, which fixes its bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    InputScaling,
    Gain,
    Order,
}

impl ParamKind {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            ParamKind::InputScaling => INPUT_SF_BOUNDS,
            ParamKind::Gain => GAIN_BOUNDS,
            ParamKind::Order => ORDER_BOUNDS,
        }
    }
}

use ParamKind::{Gain as G, InputScaling as I, Order as O};

const PID_PARAMS: &[(&str, ParamKind)] = &[("K_e", I), ("K_d", I), ("K_PI", G), ("K_PD", G), ("lambda", O), ("mu", O)];
const PI_PD_PARAMS: &[(&str, ParamKind)] = &[
    ("K_e1", I),
    ("K_d1", I),
    ("K_PI", G),
    ("K_e2", I),
    ("K_d2", I),
    ("K_PD", G),
    ("lambda", O),
    ("mu", O),
];
// K_d2 here weights the feedback derivative, not an FLC input.
const P_ID_PARAMS: &[(&str, ParamKind)] = &[
    ("K_e", I),
    ("K_d1", I),
    ("K_p", G),
    ("K_d2", G),
    ("K_i", G),
    ("lambda", O),
    ("mu1", O),
    ("mu2", O),
];
const PI_D_PARAMS: &[(&str, ParamKind)] =
    &[("K_e", I), ("K_d1", I), ("K_PI", G), ("K_d2", G), ("lambda", O), ("mu1", O), ("mu2", O)];
const PD_I_PARAMS: &[(&str, ParamKind)] = &[("K_e", I), ("K_d", I), ("K_i", G), ("K_PD", G), ("lambda", O), ("mu", O)];

impl Structure {
    pub const ALL: [Structure; 5] = [
        Structure::FuzzyPid,
        Structure::FuzzyPiPlusPd,
        Structure::FuzzyPPlusId,
        Structure::FuzzyPiPlusD,
        Structure::FuzzyPdPlusI,
    ];

    /// Parameter names and kinds, in table-column order.
    pub fn params(self) -> &'static [(&'static str, ParamKind)] {
        match self {
            Structure::FuzzyPid => PID_PARAMS,
            Structure::FuzzyPiPlusPd => PI_PD_PARAMS,
            Structure::FuzzyPPlusId => P_ID_PARAMS,
            Structure::FuzzyPiPlusD => PI_D_PARAMS,
            Structure::FuzzyPdPlusI => PD_I_PARAMS,
        }
    }

    pub fn param_names(self) -> Vec<&'static str> {
        self.params().iter().map(|(n, _)| *n).collect()
    }

    pub fn tag(self) -> &'static str {
        match self {
            Structure::FuzzyPid => "fuzzy-pid",
            Structure::FuzzyPiPlusPd => "fuzzy-pi-pd",
            Structure::FuzzyPPlusId => "fuzzy-p-id",
            Structure::FuzzyPiPlusD => "fuzzy-pi-d",
            Structure::FuzzyPdPlusI => "fuzzy-pd-i",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Structure::FuzzyPid => "FO fuzzy PID",
            Structure::FuzzyPiPlusPd => "FO fuzzy PI+PD",
            Structure::FuzzyPPlusId => "FO fuzzy P+ID",
            Structure::FuzzyPiPlusD => "FO fuzzy PI+D",
            Structure::FuzzyPdPlusI => "FO fuzzy PD+I",
        }
    }

    fn has_feedback_derivative(self) -> bool {
        matches!(self, Structure::FuzzyPPlusId | Structure::FuzzyPiPlusD)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Structure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Structure::ALL
            .into_iter()
            .find(|st| st.tag() == s)
            .ok_or_else(|| Error::InvalidController(format!("unknown structure '{s}'")))
    }
}

/// A structure tag with a full, bound-checked parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ControllerSpec {
    structure: Structure,
    values: Vec<f64>,
}

impl ControllerSpec {
    /// Builds a spec from named values. Every parameter of the structure must
    /// be present exactly once and nothing else.
    pub fn new<'a>(structure: Structure, named: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let params = structure.params();
        let mut values = vec![f64::NAN; params.len()];
        let mut seen = vec![false; params.len()];
        for (name, v) in named {
            let idx = params.iter().position(|(n, _)| *n == name).ok_or_else(|| {
                Error::InvalidController(format!("parameter '{name}' does not belong to {structure}"))
            })?;
            if seen[idx] {
                return Err(Error::InvalidController(format!("parameter '{name}' given twice")));
            }
            seen[idx] = true;
            values[idx] = v;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidController(format!("missing parameter '{}' for {structure}", params[i].0)));
        }
        Self::from_vector(structure, &values)
    }

    /// Builds a spec from values in [`Structure::params`] order.
    pub fn from_vector(structure: Structure, values: &[f64]) -> Result<Self> {
        let params = structure.params();
        if values.len() != params.len() {
            return Err(Error::InvalidController(format!(
                "{structure} takes {} parameters, got {}",
                params.len(),
                values.len()
            )));
        }
        for ((name, kind), &v) in params.iter().zip(values) {
            let (lo, hi) = kind.bounds();
            if !(v.is_finite() && v >= lo && v <= hi) {
                return Err(Error::InvalidController(format!("{name} = {v} outside [{lo}, {hi}]")));
            }
        }
        Ok(Self { structure, values: values.to_vec() })
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.structure.params().iter().position(|(n, _)| *n == name).map(|i| self.values[i])
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.structure.params().iter().map(|(n, _)| *n).zip(self.values.iter().copied())
    }

    fn value(&self, name: &str) -> f64 {
        self.get(name).expect("validated parameter set")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRepr {
    structure: Structure,
    gains: BTreeMap<String, f64>,
    orders: BTreeMap<String, f64>,
}

impl Serialize for ControllerSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut gains = BTreeMap::new();
        let mut orders = BTreeMap::new();
        for ((name, kind), &v) in self.structure.params().iter().zip(&self.values) {
            match kind {
                ParamKind::Order => orders.insert(name.to_string(), v),
                _ => gains.insert(name.to_string(), v),
            };
        }
        SpecRepr { structure: self.structure, gains, orders }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ControllerSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = SpecRepr::deserialize(d)?;
        let structure = repr.structure;
        for (name, kind) in structure.params() {
            let in_orders = repr.orders.contains_key(*name);
            if (*kind == ParamKind::Order) != in_orders && (in_orders || repr.gains.contains_key(*name)) {
                return Err(serde::de::Error::custom(format!("parameter '{name}' is in the wrong section")));
            }
        }
        let named = repr.gains.iter().chain(repr.orders.iter()).map(|(k, v)| (k.as_str(), *v));
        ControllerSpec::new(structure, named).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Law {
    Pid { ke: f64, kd: f64, kpi: f64, kpd: f64 },
    PiPd { ke1: f64, kd1: f64, kpi: f64, ke2: f64, kd2: f64, kpd: f64 },
    PId { ke: f64, kd1: f64, kp: f64, kd2: f64, ki: f64 },
    PiD { ke: f64, kd1: f64, kpi: f64, kd2: f64 },
    PdI { ke: f64, kd: f64, ki: f64, kpd: f64 },
}

/// Stateful discrete-time controller built from a [`ControllerSpec`].
#[derive(Clone, Debug)]
pub struct Controller {
    spec: ControllerSpec,
    law: Law,
    engine: Arc<FuzzyEngine>,
    /// `D^mu` (or `D^mu1`) on the error.
    rate: DiscreteFilter,
    /// `I^lambda` on the FLC output or on the error.
    integral: DiscreteFilter,
    /// `D^mu2` on the plant output.
    output_rate: Option<DiscreteFilter>,
    saturation: Option<f64>,
    last_u: f64,
}

impl Controller {
    pub fn new(spec: &ControllerSpec, dt: f64, filters: &FilterSettings) -> Result<Self> {
        Self::with_engine(spec, dt, filters, FuzzyEngine::shared())
    }

    pub fn with_engine(spec: &ControllerSpec, dt: f64, filters: &FilterSettings, engine: Arc<FuzzyEngine>) -> Result<Self> {
        filters.validate()?;
        let v = |n: &str| spec.value(n);
        let (law, rate_order) = match spec.structure {
            Structure::FuzzyPid => (Law::Pid { ke: v("K_e"), kd: v("K_d"), kpi: v("K_PI"), kpd: v("K_PD") }, v("mu")),
            Structure::FuzzyPiPlusPd => (
                Law::PiPd {
                    ke1: v("K_e1"),
                    kd1: v("K_d1"),
                    kpi: v("K_PI"),
                    ke2: v("K_e2"),
                    kd2: v("K_d2"),
                    kpd: v("K_PD"),
                },
                v("mu"),
            ),
            Structure::FuzzyPPlusId => {
                (Law::PId { ke: v("K_e"), kd1: v("K_d1"), kp: v("K_p"), kd2: v("K_d2"), ki: v("K_i") }, v("mu1"))
            }
            Structure::FuzzyPiPlusD => (Law::PiD { ke: v("K_e"), kd1: v("K_d1"), kpi: v("K_PI"), kd2: v("K_d2") }, v("mu1")),
            Structure::FuzzyPdPlusI => (Law::PdI { ke: v("K_e"), kd: v("K_d"), ki: v("K_i"), kpd: v("K_PD") }, v("mu")),
        };
        let rate = filters.operator(rate_order, dt)?;
        let integral = filters.operator(-v("lambda"), dt)?;
        let output_rate = if spec.structure.has_feedback_derivative() { Some(filters.operator(v("mu2"), dt)?) } else { None };
        Ok(Self { spec: spec.clone(), law, engine, rate, integral, output_rate, saturation: None, last_u: 0.0 })
    }

    /// Symmetric actuator limit `|u| <= limit`; `None` disables it.
    pub fn set_saturation(&mut self, limit: Option<f64>) {
        self.saturation = limit.filter(|l| l.is_finite() && *l > 0.0);
    }

    pub fn spec(&self) -> &ControllerSpec {
        &self.spec
    }

    pub fn last_output(&self) -> f64 {
        self.last_u
    }

    /// One control update from the current error `e` and plant output `y`.
    pub fn step(&mut self, e: f64, y: f64) -> f64 {
        let de = self.rate.step(e);
        let eng = &*self.engine;
        let u = match self.law {
            Law::Pid { ke, kd, kpi, kpd } => {
                let v = eng.infer(ke * e, kd * de);
                kpi * self.integral.step(v) + kpd * v
            }
            Law::PiPd { ke1, kd1, kpi, ke2, kd2, kpd } => {
                let v1 = eng.infer(ke1 * e, kd1 * de);
                let v2 = eng.infer(ke2 * e, kd2 * de);
                kpi * self.integral.step(v1) + kpd * v2
            }
            Law::PId { ke, kd1, kp, kd2, ki } => {
                let v = eng.infer(ke * e, kd1 * de);
                let dy = self.output_rate.as_mut().expect("built with feedback derivative").step(y);
                kp * v + ki * self.integral.step(e) - kd2 * dy
            }
            Law::PiD { ke, kd1, kpi, kd2 } => {
                let v = eng.infer(ke * e, kd1 * de);
                let dy = self.output_rate.as_mut().expect("built with feedback derivative").step(y);
                kpi * self.integral.step(v) - kd2 * dy
            }
            Law::PdI { ke, kd, ki, kpd } => {
                let v = eng.infer(ke * e, kd * de);
                kpd * v + ki * self.integral.step(e)
            }
        };
        let u = match self.saturation {
            Some(l) => u.clamp(-l, l),
            None => u,
        };
        self.last_u = u;
        u
    }

    pub fn reset(&mut self) {
        self.rate.reset();
        self.integral.reset();
        if let Some(f) = &mut self.output_rate {
            f.reset();
        }
        self.last_u = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_gp1() -> ControllerSpec {
        ControllerSpec::new(
            Structure::FuzzyPid,
            [("K_e", 0.887976), ("K_d", 0.63353), ("K_PI", 1.417276), ("K_PD", 0.820367), ("lambda", 0.959188), ("mu", 0.994714)],
        )
        .unwrap()
    }

    #[test]
    fn builds_published_rows() {
        let s = table1_gp1();
        assert!(Controller::new(&s, 0.005, &FilterSettings::default()).is_ok());
        let s = ControllerSpec::new(
            Structure::FuzzyPdPlusI,
            [("K_e", 0.056807), ("K_d", 0.211725), ("K_i", 0.113836), ("K_PD", 0.828508), ("lambda", 0.989822), ("mu", 0.723279)],
        )
        .unwrap();
        assert!(Controller::new(&s, 0.01, &FilterSettings::default()).is_ok());
    }

    #[test]
    fn rejects_bad_parameter_sets() {
        let mut named: Vec<(&str, f64)> =
            vec![("K_e", 1.5), ("K_d", 0.5), ("K_PI", 1.0), ("K_PD", 1.0), ("lambda", 1.0), ("mu", 1.0)];
        assert!(ControllerSpec::new(Structure::FuzzyPid, named.clone()).is_err());
        named[0].1 = 0.5;
        assert!(ControllerSpec::new(Structure::FuzzyPid, named.clone()).is_ok());
        named.push(("K_i", 1.0));
        assert!(ControllerSpec::new(Structure::FuzzyPid, named.clone()).is_err());
        named.truncate(5);
        assert!(ControllerSpec::new(Structure::FuzzyPid, named.clone()).is_err());
        assert!(ControllerSpec::from_vector(Structure::FuzzyPid, &[0.5, 0.5, 41.0, 1.0, 1.0, 1.0]).is_err());
        assert!(ControllerSpec::from_vector(Structure::FuzzyPid, &[0.5, 0.5, 1.0, 1.0, 1.0, 2.1]).is_err());
    }

    #[test]
    fn feedback_gain_is_not_an_input_factor() {
        // Published K_d2 for the lag-dominant plant.
        assert!(ControllerSpec::from_vector(
            Structure::FuzzyPPlusId,
            &[0.339126, 0.81547, 0.594271, 1.924765, 1.806937, 0.882179, 0.973166, 0.177353]
        )
        .is_ok());
        assert!(ControllerSpec::from_vector(Structure::FuzzyPiPlusPd, &[0.5, 0.5, 1.0, 0.5, 1.2, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn zero_input_gives_zero_output() {
        for st in Structure::ALL {
            let vals: Vec<f64> = st.params().iter().map(|(_, k)| if *k == ParamKind::Order { 0.7 } else { 0.5 }).collect();
            let spec = ControllerSpec::from_vector(st, &vals).unwrap();
            let mut c = Controller::new(&spec, 0.01, &FilterSettings::default()).unwrap();
            for _ in 0..100 {
                assert_eq!(c.step(0.0, 0.0), 0.0);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let s = table1_gp1();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"structure\":\"fuzzy-pid\""));
        let back: ControllerSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let bad = text.replace("\"lambda\"", "\"nu\"");
        assert!(serde_json::from_str::<ControllerSpec>(&bad).is_err());
        let misplaced = r#"{"structure":"fuzzy-pid","gains":{"K_e":0.5,"K_d":0.5,"K_PI":1,"K_PD":1,"lambda":1},"orders":{"mu":1}}"#;
        assert!(serde_json::from_str::<ControllerSpec>(misplaced).is_err());
    }

    #[test]
    fn saturation_clamps() {
        let mut c = Controller::new(&table1_gp1(), 0.005, &FilterSettings::default()).unwrap();
        c.set_saturation(Some(0.1));
        for _ in 0..200 {
            let u = c.step(1.0, 0.0);
            assert!(u.abs() <= 0.1);
        }
        assert!(c.last_output() > 0.0);
        c.reset();
        assert_eq!(c.last_output(), 0.0);
    }
}
