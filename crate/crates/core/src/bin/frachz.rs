use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frachz::closed_loop::{compute_indices, simulate, UssMode, Weights};
use frachz::config::{load_controller, load_scenario, LoopOverrides, PlantChoice, RunConfig};
use frachz::controllers::{ControllerSpec, Structure};
use frachz::fracops::{Band, FilterSettings};
use frachz::fuzzy::{FuzzyEngine, DEFAULT_RESOLUTION};
use frachz::presets::{PlantPreset, TableRegistry};
use frachz::report::{fmt_sig, freq_csv, front_csv, reproduce_tables, surface_csv, trajectory_csv, CsvTable};
use frachz::tuner::ObjectivePair;
use frachz::Error;

#[derive(Parser, Debug)]
#[command(name = "frachz", version, about = "Fractional-order hybrid fuzzy PID design, simulation and tuning")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Loop sample period in seconds.
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Approximation band as LOW,HIGH in rad/s.
    #[arg(long, global = true, value_parser = parse_band)]
    band: Option<Band>,
    /// Oustaloup half-order N (the filter has 2N+1 sections).
    #[arg(long, global = true)]
    filter_order: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = ["dc", "zero"])]
    uss_mode: Option<String>,
    /// Run configuration file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare an Oustaloup filter with the ideal (jw)^beta.
    Freqcheck {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        /// Half-order N; defaults to --filter-order or 2.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        omega_min: f64,
        #[arg(long, default_value_t = 10.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the fuzzy control surface.
    Surface {
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one closed-loop scenario.
    Simulate {
        #[arg(long)]
        plant: Option<PlantPreset>,
        /// Controller spec file.
        #[arg(long)]
        controller: Option<PathBuf>,
        /// Use a published tuning row instead of a spec file.
        #[arg(long, conflicts_with = "controller")]
        published: Option<Structure>,
        /// Scenario file.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the performance indices as key=value lines.
        #[arg(long)]
        indices: bool,
    },
    /// Tune a controller structure with the genetic algorithm.
    Tune {
        #[arg(long)]
        plant: Option<PlantPreset>,
        #[arg(long)]
        structure: Option<Structure>,
        #[arg(long)]
        generations: Option<usize>,
        /// Restart seeds, comma separated.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Where to write the best controller spec.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Approximate a Pareto front with NSGA-II.
    Pareto {
        #[arg(long)]
        plant: Option<PlantPreset>,
        #[arg(long)]
        structure: Option<Structure>,
        #[arg(long)]
        objectives: Option<ObjectivePair>,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-simulate the published tuning rows and rank the structures.
    ReproduceTables {
        /// Per-row CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_band(s: &str) -> Result<Band, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LOW,HIGH")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Band::new(lo, hi).map_err(|e| e.to_string())
}

/// Validation failures exit with 1, unstable simulations with 2.
enum Failure {
    Invalid(Error),
    Unstable(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

type Outcome = Result<(), Failure>;

impl Global {
    fn overrides(&self) -> LoopOverrides {
        LoopOverrides { dt: self.dt, band: self.band, half_order: self.filter_order }
    }

    fn run_config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.uss_mode {
            cfg.uss_mode = m.parse::<UssMode>()?;
        }
        if let Some(s) = self.seed {
            cfg.ga.seed = s;
            cfg.nsga2.seed = s;
        }
        Ok(cfg)
    }
}

fn emit(table: &CsvTable, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => table.write(p),
        None => {
            print!("{}", table.render());
            Ok(())
        }
    }
}

fn freqcheck(g: &Global, beta: f64, order: Option<usize>, span: (f64, f64), points: usize, out: Option<&Path>) -> Outcome {
    let mut fs = FilterSettings::default();
    if let Some(b) = g.band {
        fs.band = b;
    }
    if let Some(n) = order.or(g.filter_order) {
        fs.half_order = n;
    }
    fs.validate()?;
    if !(span.0 > 0.0 && span.1 > span.0) {
        return Err(Error::Config("need 0 < omega-min < omega-max".into()).into());
    }
    let filter = frachz::fracops::FilterRealization::synthesize(&fs.spec(beta)?)?;
    emit(&freq_csv(&filter, beta, span.0, span.1, points), out)?;
    Ok(())
}

fn surface(grid: usize, resolution: usize, out: Option<&Path>) -> Outcome {
    if grid < 2 {
        return Err(Error::Config("grid must be at least 2".into()).into());
    }
    let engine = FuzzyEngine::with_resolution(resolution)
        .ok_or_else(|| Error::Config(format!("resolution {resolution} is too coarse")))?;
    emit(&surface_csv(&engine, grid), out)?;
    Ok(())
}

fn with_plant(cfg: &mut RunConfig, plant: Option<PlantPreset>) -> Result<(), Error> {
    if let Some(p) = plant {
        cfg.plant = Some(PlantChoice::Preset(p));
    }
    if cfg.plant.is_none() {
        return Err(Error::Config("no plant given (use --plant or a config file)".into()));
    }
    Ok(())
}

struct SimulateArgs<'a> {
    plant: Option<PlantPreset>,
    controller: Option<&'a Path>,
    published: Option<Structure>,
    scenario: Option<&'a Path>,
    out: Option<&'a Path>,
    indices: bool,
}

fn simulate_cmd(g: &Global, a: SimulateArgs<'_>) -> Outcome {
    let mut cfg = g.run_config()?;
    with_plant(&mut cfg, a.plant)?;
    let spec: ControllerSpec = if let Some(p) = a.controller {
        load_controller(p)?
    } else if let Some(s) = a.published {
        let preset = cfg.plant.and_then(|p| p.preset()).ok_or_else(|| Error::Config("--published needs a plant preset".into()))?;
        TableRegistry::default().get(preset, s).expect("registry is complete").spec()
    } else {
        cfg.controller.clone().ok_or_else(|| Error::Config("no controller given".into()))?
    };
    let sc = match a.scenario {
        Some(p) => load_scenario(p)?,
        None => cfg.scenario(),
    };
    let plant = cfg.plant_model()?;
    let settings = cfg.settings(&g.overrides());
    let tr = simulate(&plant, &spec, &sc, &settings)?;
    emit(&trajectory_csv(&tr), a.out)?;
    if a.indices {
        let rep = compute_indices(&tr, &sc, cfg.weights, cfg.uss_mode, &plant);
        let mut lines = vec![
            format!("istse_setpoint={}", fmt_sig(rep.istse_setpoint)),
            format!("isdco_setpoint={}", fmt_sig(rep.isdco_setpoint)),
        ];
        if let Some(j3) = rep.istse_load {
            lines.push(format!("istse_load={}", fmt_sig(j3)));
        }
        lines.push(format!("weighted={}", fmt_sig(rep.weighted)));
        lines.push(format!("w1={}", fmt_sig(rep.weights.w1)));
        lines.push(format!("w2={}", fmt_sig(rep.weights.w2)));
        lines.push(format!("uss_mode={}", rep.uss_mode.tag()));
        lines.push(format!("u_ss={}", fmt_sig(rep.u_ss)));
        lines.push(format!("unstable={}", tr.unstable));
        // Keep stdout clean for CSV when no output file was given.
        let text = lines.join("\n");
        if a.out.is_some() { println!("{text}") } else { eprintln!("{text}") }
    }
    if tr.unstable {
        return Err(Failure::Unstable(format!("loop diverged at t = {}", tr.len() as f64 * tr.dt)));
    }
    Ok(())
}

fn tune_cmd(g: &Global, plant: Option<PlantPreset>, structure: Option<Structure>, generations: Option<usize>, seeds: Vec<u64>, out: Option<&Path>) -> Outcome {
    let mut cfg = g.run_config()?;
    with_plant(&mut cfg, plant)?;
    if let Some(s) = structure {
        cfg.structure = Some(s);
        cfg.controller = None;
    }
    if let Some(n) = generations {
        cfg.ga.max_generations = n;
    }
    if !seeds.is_empty() {
        cfg.seeds = seeds;
    }
    let pb = cfg.problem(&g.overrides())?;
    let (best, runs) = pb.tune(&cfg.ga, &cfg.seed_list())?;
    for r in &runs {
        eprintln!("seed {}: J = {} after {} generations", r.seed, fmt_sig(r.best_fitness), r.history.len() - 1);
    }
    let spec = pb.spec(&best.best)?;
    println!("best J = {} (seed {})", fmt_sig(best.best_fitness), best.seed);
    for (name, v) in spec.named() {
        println!("{name} = {}", fmt_sig(v));
    }
    if let Some(p) = out {
        std::fs::write(p, serde_json::to_string_pretty(&spec).map_err(Error::from)? + "\n").map_err(Error::from)?;
    }
    Ok(())
}

struct ParetoArgs<'a> {
    plant: Option<PlantPreset>,
    structure: Option<Structure>,
    objectives: Option<ObjectivePair>,
    generations: Option<usize>,
    population: Option<usize>,
    out: Option<&'a Path>,
}

fn pareto_cmd(g: &Global, a: ParetoArgs<'_>) -> Outcome {
    let mut cfg = g.run_config()?;
    with_plant(&mut cfg, a.plant)?;
    if let Some(s) = a.structure {
        cfg.structure = Some(s);
        cfg.controller = None;
    }
    if let Some(o) = a.objectives {
        cfg.objectives = o;
    }
    if let Some(n) = a.generations {
        cfg.nsga2.max_generations = n;
    }
    if let Some(n) = a.population {
        cfg.nsga2.population = n;
    }
    let pb = cfg.problem(&g.overrides())?;
    let archive = pb.pareto(cfg.objectives, &cfg.nsga2)?;
    emit(&front_csv(&archive, cfg.objectives, pb.structure), a.out)?;
    eprintln!("{} front members after {} generations", archive.len(), archive.generations);
    Ok(())
}

fn reproduce_cmd(g: &Global, out: Option<&Path>) -> Outcome {
    let cfg = g.run_config()?;
    let weights: Weights = cfg.weights;
    let report = reproduce_tables(&TableRegistry::default(), &g.overrides(), weights, cfg.uss_mode)?;
    print!("{}", report.text());
    if let Some(p) = out {
        std::fs::write(p, report.csv()).map_err(Error::from)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    // Reject a bad config file even for commands that use none of it.
    g.run_config()?;
    match cli.command {
        Command::Freqcheck { beta, order, omega_min, omega_max, points, out } => {
            freqcheck(g, beta, order, (omega_min, omega_max), points, out.as_deref())
        }
        Command::Surface { grid, resolution, out } => surface(grid, resolution, out.as_deref()),
        Command::Simulate { plant, controller, published, scenario, out, indices } => simulate_cmd(
            g,
            SimulateArgs {
                plant,
                controller: controller.as_deref(),
                published,
                scenario: scenario.as_deref(),
                out: out.as_deref(),
                indices,
            },
        ),
        Command::Tune { plant, structure, generations, seeds, out } => {
            tune_cmd(g, plant, structure, generations, seeds, out.as_deref())
        }
        Command::Pareto { plant, structure, objectives, generations, population, out } => pareto_cmd(
            g,
            ParetoArgs { plant, structure, objectives, generations, population, out: out.as_deref() },
        ),
        Command::ReproduceTables { out } => reproduce_cmd(g, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Unstable(msg)) => {
            eprintln!("unstable: {msg}");
            ExitCode::from(2)
        }
    }
}
