//! CSV emission and the re-evaluation report for the published tuning rows.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::closed_loop::{compute_indices, simulate, IndexReport, LoopSettings, Scenario, Trajectory, UssMode, Weights};
use crate::config::LoopOverrides;
use crate::controllers::Structure;
use crate::error::Result;
use crate::fracops::{FilterRealization, FilterSettings};
use crate::fuzzy::{grid_axis, FuzzyEngine};
use crate::presets::{PlantPreset, TableRegistry};
use crate::tuner::{ObjectivePair, ParetoArchive};

/// Formats like C's `%.6g`: six significant digits, trailing zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round first so that e.g. 999999.5 switches to exponent form correctly.
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A header plus numeric rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_sig(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

pub fn trajectory_csv(tr: &Trajectory) -> CsvTable {
    let mut t = CsvTable::new(["t", "r", "e", "u", "y"]);
    for i in 0..tr.len() {
        t.push(vec![tr.t[i], tr.r[i], tr.e[i], tr.u[i], tr.y[i]]);
    }
    t
}

/// Control surface on a `grid x grid` lattice, `e_norm` varying slowest.
pub fn surface_csv(engine: &FuzzyEngine, grid: usize) -> CsvTable {
    let axis = grid_axis(grid);
    let surface = engine.control_surface(grid);
    let mut t = CsvTable::new(["e_norm", "de_norm", "u_norm"]);
    for (i, &e) in axis.iter().enumerate() {
        for (j, &de) in axis.iter().enumerate() {
            t.push(vec![e, de, surface[i][j]]);
        }
    }
    t
}

/// Objective columns followed by the structure's parameter columns.
pub fn front_csv(archive: &ParetoArchive, pair: ObjectivePair, structure: Structure) -> CsvTable {
    let mut header: Vec<String> = pair.columns().iter().map(|s| s.to_string()).collect();
    header.extend(structure.param_names().iter().map(|s| s.to_string()));
    let mut t = CsvTable::new(header);
    for m in &archive.members {
        let mut row = m.objectives.clone();
        row.extend(&m.params);
        t.push(row);
    }
    t
}

/// Ideal `(j w)^beta` against the filter, on `points` log-spaced frequencies.
pub fn freq_csv(filter: &FilterRealization, beta: f64, omega_min: f64, omega_max: f64, points: usize) -> CsvTable {
    let mut t = CsvTable::new(["omega_rad_s", "mag_ideal", "mag_filter", "phase_ideal_deg", "phase_filter_deg"]);
    let n = points.max(2);
    for i in 0..n {
        let w = omega_min * (omega_max / omega_min).powf(i as f64 / (n - 1) as f64);
        let h = filter.freq_response(w);
        t.push(vec![w, w.powf(beta), h.norm(), 90.0 * beta, h.arg().to_degrees()]);
    }
    t
}

/// Re-simulation of one published row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowReport {
    pub plant: PlantPreset,
    pub structure: Structure,
    pub published_j: f64,
    /// Weighted set-point cost, or `None` if the loop diverged.
    pub recomputed_j: Option<f64>,
    pub indices: Option<IndexReport>,
    pub stable: bool,
    /// Output at the last sample before the disturbance.
    pub y_before_disturbance: f64,
    /// Bounded and within 5% of the set-point before the disturbance.
    pub tracks: bool,
}

impl RowReport {
    pub fn ratio(&self) -> Option<f64> {
        self.recomputed_j.map(|j| j / self.published_j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlantRanking {
    pub plant: PlantPreset,
    pub relative_dead_time: f64,
    pub dt: f64,
    pub horizon: f64,
    pub disturbance_time: Option<f64>,
    /// Structures ordered best first by weighted set-point cost.
    pub by_setpoint: Vec<Structure>,
    pub by_load: Vec<Structure>,
    pub by_effort: Vec<Structure>,
    /// Structure with the lowest published cost.
    pub published_best: Structure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableReport {
    pub rows: Vec<RowReport>,
    pub rankings: Vec<PlantRanking>,
    pub uss_mode: UssMode,
    pub weights: Weights,
    pub filters: FilterSettings,
}

/// Tolerance of the set-point tracking verdict.
pub const TRACKING_TOLERANCE: f64 = 0.05;

fn evaluate_row(
    plant: PlantPreset,
    structure: Structure,
    published_j: f64,
    values: &[f64],
    settings: &LoopSettings,
    sc: &Scenario,
    weights: Weights,
    mode: UssMode,
) -> Result<RowReport> {
    let spec = crate::controllers::ControllerSpec::from_vector(structure, values)?;
    let model = plant.model();
    let tr = simulate(&model, &spec, sc, settings)?;
    let stable = !tr.unstable;
    let nd = sc.disturbance_time.map(|td| (td / settings.dt).round() as usize).unwrap_or(tr.len());
    let y_before = if stable && nd >= 1 { tr.y[nd - 1] } else { f64::NAN };
    let tracks = stable
        && tr.y.iter().all(|v| v.is_finite())
        && (y_before - sc.setpoint_mag).abs() <= TRACKING_TOLERANCE * sc.setpoint_mag.abs();
    let indices = stable.then(|| compute_indices(&tr, sc, weights, mode, &model));
    Ok(RowReport {
        plant,
        structure,
        published_j,
        recomputed_j: indices.as_ref().map(|r| r.weighted),
        indices,
        stable,
        y_before_disturbance: y_before,
        tracks,
    })
}

fn rank_by(rows: &[&RowReport], key: impl Fn(&RowReport) -> Option<f64>) -> Vec<Structure> {
    let mut v: Vec<(Structure, f64)> = rows.iter().map(|r| (r.structure, key(r).unwrap_or(f64::INFINITY))).collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1));
    v.into_iter().map(|(s, _)| s).collect()
}

/// Re-simulates every published row on its plant's default scenario with
/// the given overrides. Unstable rows are reported, not fatal.
pub fn reproduce_tables(
    registry: &TableRegistry,
    overrides: &LoopOverrides,
    weights: Weights,
    mode: UssMode,
) -> Result<TableReport> {
    registry.validate()?;
    let mut rows = Vec::new();
    let mut rankings = Vec::new();
    let mut filters = FilterSettings::default();
    for plant in PlantPreset::ALL {
        let settings = overrides.apply(plant.default_settings());
        settings.validate()?;
        filters = settings.filters;
        let sc = plant.default_scenario();
        let start = rows.len();
        for row in registry.rows().iter().filter(|r| r.plant == plant) {
            rows.push(evaluate_row(plant, row.structure, row.j_min, row.values, &settings, &sc, weights, mode)?);
        }
        let mine: Vec<&RowReport> = rows[start..].iter().collect();
        rankings.push(PlantRanking {
            plant,
            relative_dead_time: plant.model().relative_dead_time(),
            dt: settings.dt,
            horizon: sc.horizon,
            disturbance_time: sc.disturbance_time,
            by_setpoint: rank_by(&mine, |r| r.recomputed_j),
            by_load: rank_by(&mine, |r| r.indices.as_ref().and_then(|i| i.istse_load)),
            by_effort: rank_by(&mine, |r| r.indices.as_ref().map(|i| i.isdco_setpoint)),
            published_best: registry.best_for(plant).expect("validated").structure,
        });
    }
    Ok(TableReport { rows, rankings, uss_mode: mode, weights, filters })
}

impl TableReport {
    pub fn row(&self, plant: PlantPreset, structure: Structure) -> Option<&RowReport> {
        self.rows.iter().find(|r| r.plant == plant && r.structure == structure)
    }

    pub fn ranking(&self, plant: PlantPreset) -> Option<&PlantRanking> {
        self.rankings.iter().find(|r| r.plant == plant)
    }

    pub fn all_track(&self) -> bool {
        self.rows.iter().all(|r| r.tracks)
    }

    /// One line per row; unstable rows leave the index columns as `nan`.
    pub fn csv(&self) -> String {
        let mut out = String::from("plant,structure,published_j,recomputed_j,ratio,j1,j2,j3,y_before_disturbance,stable,tracks\n");
        for r in &self.rows {
            let i = r.indices.as_ref();
            let cells = [
                r.published_j,
                r.recomputed_j.unwrap_or(f64::NAN),
                r.ratio().unwrap_or(f64::NAN),
                i.map_or(f64::NAN, |i| i.istse_setpoint),
                i.map_or(f64::NAN, |i| i.isdco_setpoint),
                i.and_then(|i| i.istse_load).unwrap_or(f64::NAN),
                r.y_before_disturbance,
            ];
            let cells: Vec<String> = cells.iter().map(|&v| fmt_sig(v)).collect();
            let _ = writeln!(out, "{},{},{},{},{}", r.plant, r.structure.tag(), cells.join(","), r.stable, r.tracks);
        }
        out
    }

    /// Human-readable summary with the settings used.
    pub fn text(&self) -> String {
        let mut out = String::new();
        let f = &self.filters;
        let _ = writeln!(
            out,
            "settings: uss_mode={} w1={} w2={} band=[{}, {}] half_order={} method={:?}",
            self.uss_mode.tag(), self.weights.w1, self.weights.w2, f.band.low, f.band.high, f.half_order, f.method
        );
        for rk in &self.rankings {
            let _ = writeln!(
                out,
                "\n{} (tau={}, dt={}, horizon={} s, disturbance at {} s)",
                rk.plant,
                fmt_sig(rk.relative_dead_time),
                rk.dt,
                rk.horizon,
                rk.disturbance_time.map_or("none".to_string(), |t| t.to_string())
            );
            let _ = writeln!(out, "  {:<22} {:>12} {:>12} {:>9} {:>10} {:>7}", "structure", "published J", "recomputed J", "ratio", "y(t_d-)", "stable");
            for r in self.rows.iter().filter(|r| r.plant == rk.plant) {
                let _ = writeln!(
                    out,
                    "  {:<22} {:>12} {:>12} {:>9} {:>10} {:>7}",
                    r.structure.display_name(),
                    fmt_sig(r.published_j),
                    r.recomputed_j.map_or("unstable".into(), fmt_sig),
                    r.ratio().map_or("-".into(), fmt_sig),
                    fmt_sig(r.y_before_disturbance),
                    if r.tracks { "yes" } else if r.stable { "offset" } else { "no" }
                );
            }
            let names = |v: &[Structure]| v.iter().map(|s| s.tag()).collect::<Vec<_>>().join(" < ");
            let _ = writeln!(out, "  published best: {}", rk.published_best.tag());
            let _ = writeln!(out, "  rank by set-point J: {}", names(&rk.by_setpoint));
            let _ = writeln!(out, "  rank by load ISTSE:  {}", names(&rk.by_load));
            let _ = writeln!(out, "  rank by effort:      {}", names(&rk.by_effort));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(3.631472), "3.63147");
        assert_eq!(fmt_sig(-38.17563), "-38.1756");
        assert_eq!(fmt_sig(123456789.0), "1.23457e+08");
        assert_eq!(fmt_sig(0.000012345678), "1.23457e-05");
        assert_eq!(fmt_sig(0.00012345678), "0.000123457");
        assert_eq!(fmt_sig(999999.5), "1e+06");
        assert_eq!(fmt_sig(100000.0), "100000");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(["a", "b"]);
        t.push(vec![1.0, 0.5]);
        t.push(vec![1.0 / 3.0, 2e-7]);
        assert_eq!(t.render(), "a,b\n1,0.5\n0.333333,2e-07\n");
    }

    #[test]
    fn surface_rows() {
        let t = surface_csv(&FuzzyEngine::default(), 11);
        assert_eq!(t.rows.len(), 121);
        assert_eq!(t.rows[0][..2], [-1.0, -1.0]);
        assert_eq!(t.rows[1][..2], [-1.0, -0.8]);
    }

    #[test]
    fn empty_registry_is_rejected() {
        let r = reproduce_tables(&TableRegistry::from_rows(vec![]), &LoopOverrides::default(), Weights::default(), UssMode::Dc);
        assert!(r.is_err());
    }
}
