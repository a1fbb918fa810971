//! Command-line interface: `simulate`, `analyze` and `chimera`.

use std::path::PathBuf;

use annealbench_core::bench::{self, Thresholds};
use annealbench_core::chimera::{self, ChimeraGraph};
use annealbench_core::dynamics::DEFAULT_STEPS;
use annealbench_core::model::AnnealSchedule;
use annealbench_core::noise::NoiseModel;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{AppError, Result};
use crate::formats::{self, chain, schedule};
use crate::pipeline::{self, AnalysisConfig, EfficacyMode, SimulationConfig};

#[derive(Debug, Parser)]
#[command(name = "annealbench", version, about = "Fluctuation-theorem benchmarks for quantum annealers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate annealing of a chain at one or more durations, then sample
    /// and analyze shots.
    Simulate(SimulateArgs),
    /// Analyze shot archives from an annealer or a simulation.
    Analyze(AnalyzeArgs),
    /// Draw a random chain embedding on a Chimera graph.
    Chimera(ChimeraArgs),
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Allowed |<e^-dw> - 1| beyond the confidence interval.
    #[arg(long, default_value_t = Thresholds::default().unital)]
    pub unital_threshold: f64,
    /// Allowed total variation from the ideal |omega| point mass.
    #[arg(long, default_value_t = Thresholds::default().adiabatic)]
    pub adiabatic_threshold: f64,
    /// Fixed total-variation threshold for tau dependence [default: a
    /// multiple of the sampling noise floor].
    #[arg(long)]
    pub tau_threshold: Option<f64>,
    #[arg(long, default_value_t = Thresholds::default().tau_noise_multiple)]
    pub tau_noise_multiple: f64,
    /// Allowed total variation between J and -J |omega| histograms.
    #[arg(long, default_value_t = Thresholds::default().symmetry)]
    pub symmetry_threshold: f64,
}

impl ThresholdArgs {
    fn resolve(&self) -> Result<Thresholds> {
        let all = [
            self.unital_threshold,
            self.adiabatic_threshold,
            self.tau_noise_multiple,
            self.symmetry_threshold,
            self.tau_threshold.unwrap_or(0.0),
        ];
        if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(AppError::Usage("thresholds must be finite and non-negative".into()));
        }
        Ok(Thresholds {
            unital: self.unital_threshold,
            adiabatic: self.adiabatic_threshold,
            tau: self.tau_threshold,
            tau_noise_multiple: self.tau_noise_multiple,
            symmetry: self.symmetry_threshold,
        })
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of spins.
    #[arg(long = "L")]
    pub length: usize,
    /// Coupling: one value for a uniform chain, or L-1 comma-separated
    /// values.
    #[arg(long = "J", value_delimiter = ',', allow_negative_numbers = true, default_value = "1")]
    pub couplings: Vec<f64>,
    /// Longitudinal fields: one value for all sites, or L values.
    #[arg(long = "h", value_delimiter = ',', allow_negative_numbers = true, default_value = "0")]
    pub fields: Vec<f64>,
    /// Schedule CSV with header `s,g_ghz,delta_ghz` [default: linear ramp].
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Anneal durations in microseconds, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau: Vec<f64>,
    /// Noise as `kind:rate[:excitation]`, e.g. `dephasing:0.05`.
    #[arg(long, default_value = "none")]
    pub noise: NoiseModel,
    /// Number of piecewise-constant time slices.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
    /// Longest slice in microseconds; raises the slice count for long tau.
    #[arg(long)]
    pub max_slice: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bootstrap resamples for the confidence interval.
    #[arg(long, default_value_t = bench::DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = bench::DEFAULT_LEVEL)]
    pub level: f64,
    #[arg(long, value_enum, default_value_t = EfficacyMode::Auto)]
    pub efficacy: EfficacyMode,
    /// Machine label written into archive metadata.
    #[arg(long, default_value = "simulator")]
    pub machine: String,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Archive files (`.json`, or `.csv` with a `.meta.json` sidecar).
    pub archives: Vec<PathBuf>,
    /// Schedule CSV; enables the adiabatic time scale in reports.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long, default_value_t = bench::DEFAULT_BOOTSTRAP)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = bench::DEFAULT_LEVEL)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ChimeraArgs {
    /// Rows of unit cells.
    #[arg(long = "M", default_value_t = 12)]
    #[serde(rename = "M")]
    pub rows: usize,
    /// Columns of unit cells.
    #[arg(long = "N", default_value_t = 12)]
    #[serde(rename = "N")]
    pub cols: usize,
    /// Qubits per shore of a unit cell.
    #[arg(long = "t", default_value_t = chimera::DEFAULT_SHORE)]
    pub t: usize,
    /// Chain length.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = chimera::DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Validate this chain file instead of drawing a new one.
    #[arg(long)]
    pub check: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Analyze(args) => analyze(args),
        Command::Chimera(args) => chimera(args),
    }
}

/// A single value broadcast to `n` entries, or exactly `n` values.
fn broadcast(values: Vec<f64>, n: usize, what: &str) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        k if k == n => Ok(values),
        k => Err(AppError::Usage(format!("{what}: expected 1 or {n} values, got {k}"))),
    }
}

pub fn simulation_config(args: &SimulateArgs) -> Result<SimulationConfig> {
    if args.length < 2 {
        return Err(AppError::Usage(format!("L = {} is below 2", args.length)));
    }
    let knots = match &args.schedule {
        Some(path) => schedule::read_schedule(path, 1.0)?.knots().to_vec(),
        None => AnnealSchedule::default_ramp(1.0)?.knots().to_vec(),
    };
    Ok(SimulationConfig {
        length: args.length,
        couplings: broadcast(args.couplings.clone(), args.length - 1, "--J")?,
        h: broadcast(args.fields.clone(), args.length, "--h")?,
        schedule_path: args.schedule.clone(),
        knots,
        taus_us: args.tau.clone(),
        noise: args.noise,
        steps: args.steps,
        max_slice_us: args.max_slice,
        shots: args.shots,
        seed: args.seed,
        bootstrap: args.bootstrap,
        level: args.level,
        thresholds: args.thresholds.resolve()?,
        efficacy: args.efficacy,
        machine: args.machine.clone(),
    })
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let config = simulation_config(&args)?;
    let sim = pipeline::simulate(&config)?;
    pipeline::write_simulation(&args.out, &sim)?;
    for cell in &sim.cells {
        let r = &cell.report;
        println!(
            "tau={} us  steps={}  <e^-dw>={:.6} [{:.6}, {:.6}]  unital={}  adiabatic={}  kinks={:.4}",
            cell.plan.tau_us,
            cell.plan.steps,
            r.exponential_average.estimate,
            r.exponential_average.lower,
            r.exponential_average.upper,
            r.unital,
            r.adiabatic,
            r.kinks.mean
        );
    }
    if let Some(groups) = &sim.verdicts.tau_dependence {
        for g in groups {
            println!("tau dependence: max TV {:.4} -> {}", g.max_total_variation, g.tau_dependent);
        }
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let config = AnalysisConfig {
        archives: args.archives.clone(),
        schedule_path: args.schedule.clone(),
        bootstrap: args.bootstrap,
        level: args.level,
        seed: args.seed,
        thresholds: args.thresholds.resolve()?,
    };
    let analysis = pipeline::analyze(&config)?;
    pipeline::write_analysis(&args.out, &config, &analysis)?;
    for (path, r) in config.archives.iter().zip(&analysis.reports) {
        println!(
            "{}: N={}  <e^-dw>={:.6} [{:.6}, {:.6}]  unital={}  adiabatic={}",
            path.display(),
            r.shots,
            r.exponential_average.estimate,
            r.exponential_average.lower,
            r.exponential_average.upper,
            r.unital,
            r.adiabatic
        );
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn chimera(args: ChimeraArgs) -> Result<()> {
    let graph = ChimeraGraph::new(args.rows, args.cols, args.t)?;
    if let Some(path) = &args.check {
        let c = chain::read_chain(path, &graph)?;
        println!("{}: valid chain of {} qubits", path.display(), c.len());
        return Ok(());
    }
    let embedding = chimera::random_chain(&graph, args.length, args.seed, args.restarts)?;
    chain::write_chain(&args.out.join("chain.json"), &embedding)?;
    crate::pipeline::write_manifest(&args.out, "chimera", &args, None)?;
    formats::write_json(
        &args.out.join("graph.json"),
        &serde_json::json!({
            "M": graph.rows(),
            "N": graph.cols(),
            "t": graph.shore(),
            "nodes": graph.node_count(),
            "edges": graph.edge_count(),
        }),
    )?;
    println!(
        "chain of {} qubits on a {}x{}x{} Chimera graph; wrote {}",
        embedding.len(),
        args.rows,
        args.cols,
        args.t,
        args.out.display()
    );
    Ok(())
}
