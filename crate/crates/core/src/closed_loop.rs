//! Closed-loop step scenarios and integral performance indices.
//!
//! The loop runs one sample at a time: read the plant output, form the
//! error, update the controller, add the load disturbance at the plant input
//! and advance the plant. Indices are left-rectangle sums at the loop step.

use serde::{Deserialize, Serialize};

use crate::controllers::{Controller, ControllerSpec};
use crate::error::{Error, Result};
use crate::fracops::FilterSettings;
use crate::plantsim::{PlantModel, PlantRealization};

/// Fitness returned for unstable or diverging candidates.
pub const PENALTY: f64 = 1e10;

/// `|y|` beyond which a run is declared unstable.
pub const DIVERGENCE_LIMIT: f64 = 1e3;

/// Numerical settings shared by the controller and the plant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopSettings {
    pub dt: f64,
    #[serde(default)]
    pub filters: FilterSettings,
    /// Optional symmetric actuator limit.
    #[serde(default)]
    pub saturation: Option<f64>,
}

impl LoopSettings {
    pub fn new(dt: f64) -> Self {
        Self { dt, filters: FilterSettings::default(), saturation: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidStep(self.dt));
        }
        self.filters.validate()
    }
}

/// Set-point step followed by an optional load-disturbance step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub horizon: f64,
    #[serde(default)]
    pub setpoint_time: f64,
    #[serde(default = "one")]
    pub setpoint_mag: f64,
    #[serde(default)]
    pub disturbance_time: Option<f64>,
    #[serde(default = "one")]
    pub disturbance_mag: f64,
}

fn one() -> f64 {
    1.0
}

impl Scenario {
    /// Unit set-point at zero and a unit load step at half the horizon.
    pub fn with_disturbance(horizon: f64) -> Self {
        Self { horizon, setpoint_time: 0.0, setpoint_mag: 1.0, disturbance_time: Some(0.5 * horizon), disturbance_mag: 1.0 }
    }

    pub fn setpoint(horizon: f64) -> Self {
        Self { horizon, setpoint_time: 0.0, setpoint_mag: 1.0, disturbance_time: None, disturbance_mag: 1.0 }
    }

    /// The same scenario cut at the disturbance instant.
    pub fn setpoint_window(&self) -> Self {
        Self { horizon: self.disturbance_time.unwrap_or(self.horizon), disturbance_time: None, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(m));
        if !(self.horizon.is_finite() && self.setpoint_time.is_finite() && self.horizon > self.setpoint_time) {
            return bad(format!("horizon {} must exceed set-point time {}", self.horizon, self.setpoint_time));
        }
        if self.setpoint_time < 0.0 {
            return bad("set-point time must be non-negative".into());
        }
        if !self.setpoint_mag.is_finite() || !self.disturbance_mag.is_finite() {
            return bad("step magnitudes must be finite".into());
        }
        if let Some(td) = self.disturbance_time {
            if !(td > self.setpoint_time && td < self.horizon) {
                return bad(format!("disturbance time {td} must lie in ({}, {})", self.setpoint_time, self.horizon));
            }
        }
        Ok(())
    }

    fn samples(&self, dt: f64) -> (usize, usize, Option<usize>) {
        let idx = |t: f64| (t / dt).round() as usize;
        (idx(self.horizon), idx(self.setpoint_time), self.disturbance_time.map(idx))
    }
}

/// Sampled closed-loop signals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt: f64,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub e: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    /// Set when the run diverged; the series stop before the offending sample.
    pub unstable: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// How the steady control value in the effort index is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UssMode {
    /// `u_ss = setpoint / K`, the control that holds the output on the set-point.
    #[default]
    Dc,
    /// `u_ss = 0`.
    Zero,
}

impl UssMode {
    pub fn steady_control(self, plant: &PlantModel, sc: &Scenario) -> f64 {
        match self {
            UssMode::Dc => sc.setpoint_mag / plant.gain,
            UssMode::Zero => 0.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            UssMode::Dc => "dc",
            UssMode::Zero => "zero",
        }
    }
}

impl std::str::FromStr for UssMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dc" => Ok(UssMode::Dc),
            "zero" => Ok(UssMode::Zero),
            _ => Err(Error::Config(format!("unknown u_ss mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { w1: 1.0, w2: 1.0 }
    }
}

/// Integral indices of one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    /// `J1`: ISTSE over the set-point window.
    pub istse_setpoint: f64,
    /// `J2`: ISDCO over the set-point window.
    pub isdco_setpoint: f64,
    /// `J3`: ISTSE over the disturbance window, time re-zeroed at the disturbance.
    pub istse_load: Option<f64>,
    /// `w1 J1 + w2 J2`.
    pub weighted: f64,
    pub weights: Weights,
    pub uss_mode: UssMode,
    pub u_ss: f64,
}

/// Streaming accumulator for the indices, shared by the batch and the
/// early-exit evaluation paths.
#[derive(Clone, Debug)]
struct IndexAccumulator {
    dt: f64,
    start: usize,
    load_start: Option<usize>,
    u_ss: f64,
    j1: f64,
    j2: f64,
    j3: f64,
}

impl IndexAccumulator {
    fn new(dt: f64, start: usize, load_start: Option<usize>, u_ss: f64) -> Self {
        Self { dt, start, load_start, u_ss, j1: 0.0, j2: 0.0, j3: 0.0 }
    }

    #[inline]
    fn push(&mut self, n: usize, e: f64, u: f64) {
        if n < self.start {
            return;
        }
        match self.load_start {
            Some(nd) if n >= nd => {
                let t = (n - nd) as f64 * self.dt;
                self.j3 += t * t * e * e * self.dt;
            }
            _ => {
                let t = (n - self.start) as f64 * self.dt;
                let du = u - self.u_ss;
                self.j1 += t * t * e * e * self.dt;
                self.j2 += du * du * self.dt;
            }
        }
    }

    fn report(&self, weights: Weights, mode: UssMode) -> IndexReport {
        IndexReport {
            istse_setpoint: self.j1,
            isdco_setpoint: self.j2,
            istse_load: self.load_start.map(|_| self.j3),
            weighted: weights.w1 * self.j1 + weights.w2 * self.j2,
            weights,
            uss_mode: mode,
            u_ss: self.u_ss,
        }
    }
}

/// Runs the loop, handing every sample `(n, r, e, u, y)` to `observe`.
/// `observe` may return `false` to stop early. Returns `false` if the run
/// diverged.
fn run_loop(
    plant: &PlantModel,
    spec: &ControllerSpec,
    sc: &Scenario,
    settings: &LoopSettings,
    mut observe: impl FnMut(usize, f64, f64, f64, f64) -> bool,
) -> Result<bool> {
    settings.validate()?;
    sc.validate()?;
    let dt = settings.dt;
    let mut ctrl = Controller::new(spec, dt, &settings.filters)?;
    ctrl.set_saturation(settings.saturation);
    let mut proc = PlantRealization::new(plant, dt, &settings.filters)?;
    let (steps, ns, nd) = sc.samples(dt);
    for n in 0..steps {
        let y = proc.output();
        if !y.is_finite() || y.abs() > DIVERGENCE_LIMIT {
            return Ok(false);
        }
        let r = if n >= ns { sc.setpoint_mag } else { 0.0 };
        let e = r - y;
        let u = ctrl.step(e, y);
        if !u.is_finite() {
            return Ok(false);
        }
        let d = match nd {
            Some(nd) if n >= nd => sc.disturbance_mag,
            _ => 0.0,
        };
        if !observe(n, r, e, u, y) {
            return Ok(true);
        }
        proc.step(u + d);
    }
    Ok(true)
}

/// Simulates one scenario from rest.
pub fn simulate(plant: &PlantModel, spec: &ControllerSpec, sc: &Scenario, settings: &LoopSettings) -> Result<Trajectory> {
    let dt = settings.dt;
    let mut tr = Trajectory { dt, ..Default::default() };
    let stable = run_loop(plant, spec, sc, settings, |n, r, e, u, y| {
        tr.t.push(n as f64 * dt);
        tr.r.push(r);
        tr.e.push(e);
        tr.u.push(u);
        tr.y.push(y);
        true
    })?;
    tr.unstable = !stable;
    Ok(tr)
}

/// Indices of a recorded trajectory.
pub fn compute_indices(tr: &Trajectory, sc: &Scenario, weights: Weights, mode: UssMode, plant: &PlantModel) -> IndexReport {
    let (_, ns, nd) = sc.samples(tr.dt);
    let mut acc = IndexAccumulator::new(tr.dt, ns, nd, mode.steady_control(plant, sc));
    for (n, (&e, &u)) in tr.e.iter().zip(&tr.u).enumerate() {
        acc.push(n, e, u);
    }
    acc.report(weights, mode)
}

/// Runs a scenario and returns its indices, or `None` if the loop diverged.
/// Sums are abandoned once `J1` alone exceeds the penalty level.
pub fn evaluate_indices(
    plant: &PlantModel,
    spec: &ControllerSpec,
    sc: &Scenario,
    settings: &LoopSettings,
    weights: Weights,
    mode: UssMode,
) -> Result<Option<IndexReport>> {
    let (_, ns, nd) = sc.samples(settings.dt);
    let mut acc = IndexAccumulator::new(settings.dt, ns, nd, mode.steady_control(plant, sc));
    let mut blown = false;
    let stable = run_loop(plant, spec, sc, settings, |n, _, e, u, _| {
        acc.push(n, e, u);
        if acc.j1 >= PENALTY || acc.j2 >= PENALTY || acc.j3 >= PENALTY {
            blown = true;
            return false;
        }
        true
    })?;
    if !stable || blown {
        return Ok(None);
    }
    Ok(Some(acc.report(weights, mode)))
}

/// Weighted single-objective fitness with the instability penalty.
pub fn evaluate_candidate(
    plant: &PlantModel,
    spec: &ControllerSpec,
    sc: &Scenario,
    settings: &LoopSettings,
    weights: Weights,
    mode: UssMode,
) -> f64 {
    match evaluate_indices(plant, spec, sc, settings, weights, mode) {
        Ok(Some(rep)) if rep.weighted.is_finite() && rep.weighted < PENALTY => rep.weighted,
        _ => PENALTY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::Structure;

    fn zero_spec() -> ControllerSpec {
        ControllerSpec::from_vector(Structure::FuzzyPid, &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn rest_stays_at_rest() {
        let spec = ControllerSpec::from_vector(Structure::FuzzyPdPlusI, &[0.5, 0.5, 1.0, 1.0, 1.0, 0.5]).unwrap();
        let sc = Scenario { setpoint_mag: 0.0, disturbance_mag: 0.0, ..Scenario::with_disturbance(10.0) };
        let tr = simulate(&PlantModel::gp2(), &spec, &sc, &LoopSettings::new(0.01)).unwrap();
        assert_eq!(tr.len(), 1000);
        assert!(tr.y.iter().chain(&tr.u).all(|&v| v == 0.0));
    }

    #[test]
    fn error_is_reference_minus_output() {
        let spec = ControllerSpec::from_vector(Structure::FuzzyPid, &[0.8, 0.5, 1.0, 0.8, 0.9, 0.9]).unwrap();
        let tr = simulate(&PlantModel::gp1(), &spec, &Scenario::with_disturbance(5.0), &LoopSettings::new(0.005)).unwrap();
        for i in 0..tr.len() {
            assert_eq!(tr.e[i], tr.r[i] - tr.y[i]);
        }
    }

    #[test]
    fn istse_of_unit_pulse() {
        let dt = 1e-4;
        let n = 20_000;
        let tr = Trajectory {
            dt,
            t: (0..n).map(|k| k as f64 * dt).collect(),
            r: vec![1.0; n],
            e: (0..n).map(|k| if k < 10_000 { 1.0 } else { 0.0 }).collect(),
            u: vec![0.0; n],
            y: vec![0.0; n],
            unstable: false,
        };
        let sc = Scenario::setpoint(2.0);
        let rep = compute_indices(&tr, &sc, Weights::default(), UssMode::Zero, &PlantModel::gp1());
        assert!((rep.istse_setpoint - 1.0 / 3.0).abs() < 1e-4);
        assert_eq!(rep.isdco_setpoint, 0.0);
        assert!(rep.istse_load.is_none());
    }

    #[test]
    fn zero_error_zero_indices() {
        let tr = Trajectory { dt: 0.1, t: vec![0.0; 10], r: vec![1.0; 10], e: vec![0.0; 10], u: vec![2.0; 10], y: vec![1.0; 10], unstable: false };
        let m = PlantModel { gain: 0.5, ..PlantModel::gp1() };
        let rep = compute_indices(&tr, &Scenario::with_disturbance(1.0), Weights::default(), UssMode::Dc, &m);
        assert_eq!(rep.weighted, 0.0);
        assert_eq!(rep.istse_load, Some(0.0));
    }

    #[test]
    fn open_loop_cost_is_cubic_in_horizon() {
        let sc = Scenario::setpoint(10.0);
        let j = evaluate_candidate(&PlantModel::gp2(), &zero_spec(), &sc, &LoopSettings::new(0.01), Weights::default(), UssMode::Zero);
        let expected = 1000.0 / 3.0;
        assert!((j - expected).abs() / expected < 2e-3, "{j}");
    }

    #[test]
    fn divergence_is_penalised() {
        // huge integral gain on the delay-dominant plant
        let spec = ControllerSpec::from_vector(Structure::FuzzyPdPlusI, &[1.0, 0.0, 40.0, 40.0, 1.0, 0.5]).unwrap();
        let sc = Scenario::setpoint(20.0);
        let settings = LoopSettings::new(0.01);
        let j = evaluate_candidate(&PlantModel::gp3(), &spec, &sc, &settings, Weights::default(), UssMode::Dc);
        assert_eq!(j, PENALTY);
        let tr = simulate(&PlantModel::gp3(), &spec, &sc, &settings).unwrap();
        assert!(tr.unstable);
        assert!(tr.len() < 2000);
        assert!(tr.y.iter().all(|y| y.abs() <= DIVERGENCE_LIMIT));
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::setpoint(0.0).validate().is_err());
        let sc = Scenario { disturbance_time: Some(30.0), ..Scenario::setpoint(20.0) };
        assert!(sc.validate().is_err());
        assert!(Scenario::with_disturbance(20.0).validate().is_ok());
        assert_eq!(Scenario::with_disturbance(40.0).setpoint_window(), Scenario::setpoint(20.0));
    }
}
