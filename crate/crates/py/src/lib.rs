//! Python bindings: filters, the fuzzy engine, controller specs, plants,
//! closed-loop simulation and the two tuners.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use frachz::closed_loop::{self, LoopSettings, Scenario, UssMode, Weights};
use frachz::config::LoopOverrides;
use frachz::controllers::{self, Structure};
use frachz::fracops::{self, Band, FilterRealization, FilterSettings};
use frachz::fuzzy;
use frachz::plantsim;
use frachz::presets::{PlantPreset, TableRegistry};
use frachz::report;
use frachz::tuner::{GaConfig, Nsga2Config, ObjectivePair, TuningProblem};

fn err(e: frachz::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = frachz::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

/// Oustaloup approximation of s^beta.
#[pyclass(frozen)]
struct OustaloupFilter {
    inner: FilterRealization,
}

#[pymethods]
impl OustaloupFilter {
    #[new]
    #[pyo3(signature = (beta, band = (1e-2, 1e2), order = 2))]
    fn new(beta: f64, band: (f64, f64), order: usize) -> PyResult<Self> {
        let fs = FilterSettings { band: Band::new(band.0, band.1).map_err(err)?, half_order: order, ..Default::default() };
        let inner = FilterRealization::synthesize(&fs.spec(beta).map_err(err)?).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn zeros(&self) -> Vec<f64> {
        self.inner.zeros.clone()
    }

    #[getter]
    fn poles(&self) -> Vec<f64> {
        self.inner.poles.clone()
    }

    #[getter]
    fn gain(&self) -> f64 {
        self.inner.gain
    }

    #[getter]
    fn integer_power(&self) -> i32 {
        self.inner.integer_power
    }

    /// (magnitude, phase in degrees) at `omega` rad/s.
    fn freq_response(&self, omega: f64) -> (f64, f64) {
        let h = self.inner.freq_response(omega);
        (h.norm(), h.arg().to_degrees())
    }

    /// Filters a sampled signal from rest.
    fn run(&self, signal: Vec<f64>, dt: f64) -> PyResult<Vec<f64>> {
        let mut f = self.inner.discretize(dt, Default::default()).map_err(err)?;
        Ok(f.run(&signal))
    }
}

#[pyfunction]
fn gl_differintegral(signal: Vec<f64>, beta: f64, dt: f64) -> Vec<f64> {
    fracops::gl_differintegral(&signal, beta, dt)
}

/// The Mamdani engine on normalized inputs.
#[pyclass(frozen)]
struct FuzzyEngine {
    inner: fuzzy::FuzzyEngine,
}

#[pymethods]
impl FuzzyEngine {
    #[new]
    #[pyo3(signature = (resolution = fuzzy::DEFAULT_RESOLUTION))]
    fn new(resolution: usize) -> PyResult<Self> {
        fuzzy::FuzzyEngine::with_resolution(resolution)
            .map(|inner| Self { inner })
            .ok_or_else(|| PyValueError::new_err(format!("resolution must be at least {}", fuzzy::MIN_RESOLUTION)))
    }

    fn infer(&self, e: f64, de: f64) -> f64 {
        self.inner.infer(e, de)
    }

    fn degrees(&self, x: f64) -> Vec<f64> {
        self.inner.input_set.degrees(x).to_vec()
    }

    fn surface(&self, grid: usize) -> Vec<Vec<f64>> {
        self.inner.control_surface(grid)
    }
}

/// Structure tag plus named parameters.
#[pyclass(frozen)]
struct ControllerSpec {
    inner: controllers::ControllerSpec,
}

#[pymethods]
impl ControllerSpec {
    #[new]
    fn new(structure: &str, params: std::collections::HashMap<String, f64>) -> PyResult<Self> {
        let s: Structure = parse(structure)?;
        let inner = controllers::ControllerSpec::new(s, params.iter().map(|(k, v)| (k.as_str(), *v))).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn published(plant: &str, structure: &str) -> PyResult<Self> {
        let reg = TableRegistry::default();
        let row = reg.get(parse(plant)?, parse(structure)?).expect("registry is complete");
        Ok(Self { inner: row.spec() })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("specs serialize")
    }

    #[getter]
    fn structure(&self) -> &'static str {
        self.inner.structure().tag()
    }

    fn params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.inner.named() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("ControllerSpec({})", self.to_json())
    }
}

/// K e^{-Ls} / (T s^alpha + 1).
#[pyclass(frozen)]
struct Plant {
    inner: plantsim::PlantModel,
    preset: Option<PlantPreset>,
}

#[pymethods]
impl Plant {
    #[new]
    fn new(gain: f64, time_constant: f64, alpha: f64, dead_time: f64) -> PyResult<Self> {
        let inner = plantsim::PlantModel::new(gain, time_constant, alpha, dead_time).map_err(err)?;
        Ok(Self { inner, preset: None })
    }

    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let p: PlantPreset = parse(name)?;
        Ok(Self { inner: p.model(), preset: Some(p) })
    }

    fn relative_dead_time(&self) -> f64 {
        self.inner.relative_dead_time()
    }

    fn __repr__(&self) -> String {
        let m = &self.inner;
        format!("Plant(gain={}, time_constant={}, alpha={}, dead_time={})", m.gain, m.time_constant, m.alpha, m.dead_time)
    }
}

impl Plant {
    fn settings(&self, dt: Option<f64>) -> LoopSettings {
        let base = self.preset.map(|p| p.default_settings()).unwrap_or_else(|| LoopSettings::new(0.005));
        LoopOverrides { dt, ..Default::default() }.apply(base)
    }

    fn scenario(&self, horizon: Option<f64>, disturbance: bool) -> Scenario {
        let h = horizon.or(self.preset.map(|p| p.default_horizon())).unwrap_or(40.0);
        if disturbance { Scenario::with_disturbance(h) } else { Scenario::setpoint(h) }
    }
}

/// Closed-loop run; returns a dict with t, r, e, u, y and the indices.
#[pyfunction]
#[pyo3(signature = (plant, spec, horizon = None, dt = None, disturbance = true, uss_mode = "dc"))]
fn simulate<'py>(
    py: Python<'py>,
    plant: &Plant,
    spec: &ControllerSpec,
    horizon: Option<f64>,
    dt: Option<f64>,
    disturbance: bool,
    uss_mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mode: UssMode = parse(uss_mode)?;
    let sc = plant.scenario(horizon, disturbance);
    let tr = closed_loop::simulate(&plant.inner, &spec.inner, &sc, &plant.settings(dt)).map_err(err)?;
    let rep = closed_loop::compute_indices(&tr, &sc, Weights::default(), mode, &plant.inner);
    let d = PyDict::new(py);
    d.set_item("t", &tr.t)?;
    d.set_item("r", &tr.r)?;
    d.set_item("e", &tr.e)?;
    d.set_item("u", &tr.u)?;
    d.set_item("y", &tr.y)?;
    d.set_item("unstable", tr.unstable)?;
    d.set_item("J1", rep.istse_setpoint)?;
    d.set_item("J2", rep.isdco_setpoint)?;
    d.set_item("J3", rep.istse_load)?;
    d.set_item("J", rep.weighted)?;
    Ok(d)
}

fn problem(plant: &Plant, structure: &str, uss_mode: &str) -> PyResult<TuningProblem> {
    Ok(TuningProblem {
        plant: plant.inner,
        structure: parse(structure)?,
        scenario: plant.scenario(None, true),
        settings: plant.settings(None),
        weights: Weights::default(),
        uss_mode: parse(uss_mode)?,
    })
}

/// Set-point fitness of a spec, with the instability penalty.
#[pyfunction]
#[pyo3(signature = (plant, spec, uss_mode = "dc"))]
fn evaluate(plant: &Plant, spec: &ControllerSpec, uss_mode: &str) -> PyResult<f64> {
    let pb = problem(plant, spec.inner.structure().tag(), uss_mode)?;
    Ok(pb.fitness(spec.inner.values()))
}

/// GA restarts; returns (best spec, best J).
#[pyfunction]
#[pyo3(signature = (plant, structure, seeds = vec![0], generations = 100, uss_mode = "dc"))]
fn tune(py: Python<'_>, plant: &Plant, structure: &str, seeds: Vec<u64>, generations: usize, uss_mode: &str) -> PyResult<(ControllerSpec, f64)> {
    let pb = problem(plant, structure, uss_mode)?;
    let cfg = GaConfig { max_generations: generations, ..Default::default() };
    let (best, _) = py.detach(|| pb.tune(&cfg, &seeds)).map_err(err)?;
    let inner = pb.spec(&best.best).map_err(err)?;
    Ok((ControllerSpec { inner }, best.best_fitness))
}

/// NSGA-II front as a list of (objectives, spec) pairs sorted by J1.
#[pyfunction]
#[pyo3(signature = (plant, structure, objectives = "tracking-effort", generations = 50, population = 100, seed = 0, uss_mode = "dc"))]
#[allow(clippy::too_many_arguments)]
fn pareto(
    py: Python<'_>,
    plant: &Plant,
    structure: &str,
    objectives: &str,
    generations: usize,
    population: usize,
    seed: u64,
    uss_mode: &str,
) -> PyResult<Vec<(Vec<f64>, ControllerSpec)>> {
    let pb = problem(plant, structure, uss_mode)?;
    let pair: ObjectivePair = parse(objectives)?;
    let cfg = Nsga2Config { max_generations: generations, population, seed, ..Default::default() };
    let archive = py.detach(|| pb.pareto(pair, &cfg)).map_err(err)?;
    archive
        .members
        .into_iter()
        .map(|m| Ok((m.objectives, ControllerSpec { inner: pb.spec(&m.params).map_err(err)? })))
        .collect()
}

/// Text report re-evaluating the published rows.
#[pyfunction]
#[pyo3(signature = (uss_mode = "dc"))]
fn reproduce_tables(uss_mode: &str) -> PyResult<String> {
    let rep = report::reproduce_tables(&TableRegistry::default(), &LoopOverrides::default(), Weights::default(), parse(uss_mode)?)
        .map_err(err)?;
    Ok(rep.text())
}

#[pymodule]
fn frachz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<OustaloupFilter>()?;
    m.add_class::<FuzzyEngine>()?;
    m.add_class::<ControllerSpec>()?;
    m.add_class::<Plant>()?;
    m.add_function(wrap_pyfunction!(gl_differintegral, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(tune, m)?)?;
    m.add_function(wrap_pyfunction!(pareto, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_tables, m)?)?;
    m.add("STRUCTURES", Structure::ALL.iter().map(|s| s.tag()).collect::<Vec<_>>())?;
    Ok(())
}
