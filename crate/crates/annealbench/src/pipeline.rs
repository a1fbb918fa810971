//! Simulation and analysis runs: one cell per τ, computed on a rayon pool
//! and written by a single thread in a fixed order.

use std::path::{Path, PathBuf};

use annealbench_core::archive::{ArchiveMeta, Couplings, ShotArchive};
use annealbench_core::bench::{self, BenchmarkReport, BootstrapConfig, CrossVerdicts, Thresholds};
use annealbench_core::dynamics::{AnnealMap, EvolutionConfig, DEFAULT_STEPS};
use annealbench_core::model::{
    build_omega_final_for, build_omega_initial, initial_state, AnnealSchedule, ChainSpec, Knot,
};
use annealbench_core::noise::NoiseModel;
use annealbench_core::tpm::{self, DistributionMeta, WorkDistribution};
use annealbench_core::{DEFAULT_MAX_SPINS, DEFAULT_MAX_SPINS_MIXED};
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};
use crate::formats::{self, archive, histogram, schedule};

/// Automatic efficacy evaluation is skipped above this many
/// `dim³ · steps` operations (roughly ten seconds of work).
pub const EFFICACY_BUDGET: f64 = 2e10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EfficacyMode {
    /// Only when the operator evolution fits the budget.
    Auto,
    Always,
    Never,
}

/// Fully resolved simulation settings; echoed verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(rename = "L")]
    pub length: usize,
    #[serde(rename = "J")]
    pub couplings: Vec<f64>,
    pub h: Vec<f64>,
    pub schedule_path: Option<PathBuf>,
    pub knots: Vec<Knot>,
    pub taus_us: Vec<f64>,
    pub noise: NoiseModel,
    /// Slice count, raised per τ when `max_slice_us` is set.
    pub steps: usize,
    /// Longest allowed slice in microseconds.
    pub max_slice_us: Option<f64>,
    pub shots: u64,
    pub seed: u64,
    pub bootstrap: usize,
    pub level: f64,
    pub thresholds: Thresholds,
    pub efficacy: EfficacyMode,
    pub machine: String,
}

impl SimulationConfig {
    /// Uniform chain on the default ramp with every other setting at its
    /// default.
    pub fn uniform(length: usize, j: f64, taus_us: Vec<f64>) -> Result<Self> {
        Ok(SimulationConfig {
            length,
            couplings: vec![j; length.saturating_sub(1)],
            h: vec![0.0; length],
            schedule_path: None,
            knots: AnnealSchedule::default_ramp(1.0)?.knots().to_vec(),
            taus_us,
            noise: NoiseModel::none(),
            steps: DEFAULT_STEPS,
            max_slice_us: None,
            shots: 100_000,
            seed: 0,
            bootstrap: bench::DEFAULT_BOOTSTRAP,
            level: bench::DEFAULT_LEVEL,
            thresholds: Thresholds::default(),
            efficacy: EfficacyMode::Auto,
            machine: String::from("simulator"),
        })
    }

    pub fn chain(&self) -> Result<ChainSpec> {
        if self.couplings.len() + 1 != self.length {
            return Err(AppError::Usage(format!(
                "{} couplings given for L = {}",
                self.couplings.len(),
                self.length
            )));
        }
        let limit = if self.noise.is_silent() { DEFAULT_MAX_SPINS } else { DEFAULT_MAX_SPINS_MIXED };
        Ok(ChainSpec::with_capacity(self.couplings.clone(), self.h.clone(), limit)?)
    }

    pub fn schedule(&self, tau_us: f64) -> Result<AnnealSchedule> {
        Ok(AnnealSchedule::from_knots(tau_us, self.knots.clone())?)
    }

    /// Slice count for one τ.
    pub fn steps_for(&self, tau_us: f64) -> usize {
        match self.max_slice_us {
            Some(dt) => self.steps.max((tau_us / dt).ceil() as usize),
            None => self.steps,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.taus_us.is_empty() {
            return Err(AppError::Usage("need at least one tau".into()));
        }
        let mut taus = self.taus_us.clone();
        taus.sort_by(f64::total_cmp);
        if taus.windows(2).any(|w| w[0] == w[1]) {
            return Err(AppError::Usage("tau values must be distinct".into()));
        }
        if self.shots == 0 {
            return Err(AppError::Usage("need at least one shot".into()));
        }
        if self.steps == 0 {
            return Err(AppError::Usage("steps must be at least 1".into()));
        }
        if self.max_slice_us.is_some_and(|dt| !(dt.is_finite() && dt > 0.0)) {
            return Err(AppError::Usage("max slice must be positive".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(AppError::Usage(format!("confidence level {} is outside (0, 1)", self.level)));
        }
        Ok(())
    }
}

/// Per-cell settings derived from the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPlan {
    pub index: usize,
    pub tau_us: f64,
    pub steps: usize,
    pub sample_seed: u64,
    pub bootstrap_seed: u64,
    pub dir: String,
}

/// Seeds for cell `index`: one ChaCha stream per cell, so results do not
/// depend on scheduling or on which other τ values were requested.
pub fn cell_seeds(seed: u64, index: usize) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (rng.next_u64(), rng.next_u64())
}

pub fn plan(config: &SimulationConfig) -> Vec<CellPlan> {
    config
        .taus_us
        .iter()
        .enumerate()
        .map(|(index, &tau_us)| {
            let (sample_seed, bootstrap_seed) = cell_seeds(config.seed, index);
            CellPlan {
                index,
                tau_us,
                steps: config.steps_for(tau_us),
                sample_seed,
                bootstrap_seed,
                dir: format!("tau_{tau_us}"),
            }
        })
        .collect()
}

/// Noise-free-of-sampling results of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub tau_us: f64,
    pub steps: usize,
    pub exponential_average: f64,
    /// `None` when skipped for cost.
    pub efficacy: Option<f64>,
    pub expected_kinks: f64,
    pub tv_to_ideal: f64,
    pub delta_omega: WorkDistribution,
    pub abs_final: WorkDistribution,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub plan: CellPlan,
    pub exact: ExactResult,
    pub archive: ShotArchive,
    pub report: BenchmarkReport,
}

pub struct Simulation {
    pub config: SimulationConfig,
    pub cells: Vec<Cell>,
    pub verdicts: CrossVerdicts,
}

fn wants_efficacy(config: &SimulationConfig, dim: usize, steps: usize) -> bool {
    match config.efficacy {
        EfficacyMode::Always => true,
        EfficacyMode::Never => false,
        EfficacyMode::Auto => (dim as f64).powi(3) * steps as f64 <= EFFICACY_BUDGET,
    }
}

pub fn simulate_cell(config: &SimulationConfig, chain: &ChainSpec, plan: &CellPlan) -> Result<Cell> {
    let schedule = config.schedule(plan.tau_us)?;
    let map = AnnealMap::new(chain, &schedule, &config.noise, EvolutionConfig::new(plan.steps)?)?;
    let rho0 = initial_state(chain, &schedule)?;
    let omega_i = build_omega_initial(chain.len())?;
    let omega_f = build_omega_final_for(chain)?;
    let measured = tpm::two_point_measurement(&rho0, &omega_i, &omega_f, &map)?;
    let meta = DistributionMeta {
        length: chain.len(),
        tau_us: Some(plan.tau_us),
        noise: Some(config.noise.to_string()),
    };
    let delta_omega = tpm::work_distribution(&measured.transition, meta.clone())?;
    let abs_final = tpm::abs_final_distribution(&measured.transition, meta)?;
    let efficacy = if wants_efficacy(config, chain.dim(), plan.steps) {
        Some(tpm::efficacy(&rho0, &omega_i, &omega_f, &map)?)
    } else {
        None
    };
    let exact = ExactResult {
        tau_us: plan.tau_us,
        steps: plan.steps,
        exponential_average: tpm::exponential_average(&delta_omega),
        efficacy,
        expected_kinks: bench::expected_kinks(&measured.final_z, chain)?,
        tv_to_ideal: abs_final.total_variation(&tpm::ideal_distribution(chain.len())?),
        delta_omega,
        abs_final,
    };

    let archive_meta = ArchiveMeta {
        length: chain.len(),
        couplings: Couplings::PerBond(chain.couplings().to_vec()),
        tau_us: plan.tau_us,
        machine: config.machine.clone(),
        seed: Some(plan.sample_seed),
        note: Some(format!("noise {}, {} steps", config.noise, plan.steps)),
    };
    let archive = tpm::sample_readouts(&measured.final_z, archive_meta, config.shots, plan.sample_seed)?;
    let bootstrap = BootstrapConfig {
        resamples: config.bootstrap,
        level: config.level,
        seed: plan.bootstrap_seed,
    };
    let report = bench::analyze(&archive, Some(&schedule), &config.thresholds, bootstrap)?;
    log::info!(
        "tau {} us: {} steps, exact <e^-dw> = {:.6}, sampled {:.6}",
        plan.tau_us,
        plan.steps,
        exact.exponential_average,
        report.exponential_average.estimate
    );
    Ok(Cell {
        plan: plan.clone(),
        exact,
        archive,
        report,
    })
}

/// Runs every τ in parallel; cells come back in the order requested.
pub fn simulate(config: &SimulationConfig) -> Result<Simulation> {
    config.validate()?;
    let chain = config.chain()?;
    for &tau in &config.taus_us {
        config.schedule(tau)?;
    }
    let plans = plan(config);
    let cells: Vec<Cell> = plans
        .par_iter()
        .map(|p| simulate_cell(config, &chain, p))
        .collect::<Result<_>>()?;
    let reports: Vec<BenchmarkReport> = cells.iter().map(|c| c.report.clone()).collect();
    let verdicts = bench::verdicts(&reports, &config.thresholds)?;
    Ok(Simulation {
        config: config.clone(),
        cells,
        verdicts,
    })
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a C,
    #[serde(skip_serializing_if = "Option::is_none")]
    cells: Option<&'a [CellPlan]>,
}

#[derive(Serialize)]
struct CellSummary<'a> {
    tau_us: f64,
    dir: &'a str,
    exact: ExactSummary,
    sampled: SampledSummary,
}

#[derive(Serialize)]
struct ExactSummary {
    exponential_average: f64,
    efficacy: Option<f64>,
    expected_kinks: f64,
    tv_to_ideal: f64,
}

#[derive(Serialize)]
struct SampledSummary {
    shots: u64,
    exponential_average: f64,
    lower: f64,
    upper: f64,
    tv_to_ideal: f64,
    mean_kinks: f64,
    unital: bool,
    adiabatic: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    cells: Vec<CellSummary<'a>>,
    verdicts: &'a CrossVerdicts,
}

pub fn write_manifest<C: Serialize>(out: &Path, command: &'static str, config: &C, cells: Option<&[CellPlan]>) -> Result<()> {
    formats::write_json(
        &out.join("manifest.json"),
        &Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            cells,
        },
    )
}

/// Writes every output of a simulation under `out`.
///
/// Layout: `manifest.json`, `schedule.csv`, `summary.json`, and per τ a
/// directory holding the sampled archive, its report, the sampled
/// histograms and the exact distributions.
pub fn write_simulation(out: &Path, sim: &Simulation) -> Result<()> {
    let plans: Vec<CellPlan> = sim.cells.iter().map(|c| c.plan.clone()).collect();
    write_manifest(out, "simulate", &sim.config, Some(&plans))?;
    schedule::write_schedule(&out.join("schedule.csv"), &sim.config.schedule(1.0)?)?;
    for cell in &sim.cells {
        let dir = out.join(&cell.plan.dir);
        archive::write_archive(&dir.join("archive.json"), &cell.archive)?;
        write_report(&dir, &cell.report)?;
        formats::write_json(&dir.join("exact.json"), &cell.exact)?;
        histogram::write_distribution(&dir.join("exact_delta_omega.csv"), &cell.exact.delta_omega)?;
        histogram::write_renormalized(&dir.join("exact_abs_omega_renorm.csv"), &cell.exact.abs_final)?;
    }
    let summary = Summary {
        cells: sim
            .cells
            .iter()
            .map(|c| CellSummary {
                tau_us: c.plan.tau_us,
                dir: &c.plan.dir,
                exact: ExactSummary {
                    exponential_average: c.exact.exponential_average,
                    efficacy: c.exact.efficacy,
                    expected_kinks: c.exact.expected_kinks,
                    tv_to_ideal: c.exact.tv_to_ideal,
                },
                sampled: SampledSummary {
                    shots: c.report.shots,
                    exponential_average: c.report.exponential_average.estimate,
                    lower: c.report.exponential_average.lower,
                    upper: c.report.exponential_average.upper,
                    tv_to_ideal: c.report.tv_to_ideal,
                    mean_kinks: c.report.kinks.mean,
                    unital: c.report.unital,
                    adiabatic: c.report.adiabatic,
                },
            })
            .collect(),
        verdicts: &sim.verdicts,
    };
    formats::write_json(&out.join("summary.json"), &summary)
}

/// `report.json` plus the two sampled histograms.
pub fn write_report(dir: &Path, report: &BenchmarkReport) -> Result<()> {
    formats::write_json(&dir.join("report.json"), report)?;
    histogram::write_distribution(&dir.join("delta_omega.csv"), &report.delta_omega)?;
    histogram::write_renormalized(&dir.join("abs_omega_renorm.csv"), &report.abs_final)
}

/// Settings of an `analyze` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub archives: Vec<PathBuf>,
    pub schedule_path: Option<PathBuf>,
    pub bootstrap: usize,
    pub level: f64,
    pub seed: u64,
    pub thresholds: Thresholds,
}

pub struct Analysis {
    pub reports: Vec<BenchmarkReport>,
    pub verdicts: CrossVerdicts,
}

/// Reads and analyzes every archive; the bootstrap seed of archive `i` is
/// derived from the run seed and `i`.
pub fn analyze(config: &AnalysisConfig) -> Result<Analysis> {
    if config.archives.is_empty() {
        return Err(AppError::Usage("no archives given".into()));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(AppError::Usage(format!("confidence level {} is outside (0, 1)", config.level)));
    }
    let knots = match &config.schedule_path {
        Some(path) => Some((path, schedule::parse_knots(&formats::read_text(path)?, path)?)),
        None => None,
    };
    let archives: Vec<ShotArchive> = config.archives.iter().map(|p| archive::read_archive(p)).collect::<Result<_>>()?;
    let reports: Vec<BenchmarkReport> = archives
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            let schedule = match &knots {
                Some((path, k)) => Some(
                    AnnealSchedule::from_knots(a.meta.tau_us, k.clone())
                        .map_err(|e| AppError::format(path.as_path(), None, e.to_string()))?,
                ),
                None => None,
            };
            let bootstrap = BootstrapConfig {
                resamples: config.bootstrap,
                level: config.level,
                seed: cell_seeds(config.seed, i).1,
            };
            Ok(bench::analyze(a, schedule.as_ref(), &config.thresholds, bootstrap)?)
        })
        .collect::<Result<_>>()?;
    let verdicts = bench::verdicts(&reports, &config.thresholds)?;
    Ok(Analysis { reports, verdicts })
}

/// Report directory names `archive_<i>_<stem>`, in input order.
pub fn report_dirs(archives: &[PathBuf]) -> Vec<String> {
    archives
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            format!("archive_{i}_{stem}")
        })
        .collect()
}

pub fn write_analysis(out: &Path, config: &AnalysisConfig, analysis: &Analysis) -> Result<()> {
    write_manifest(out, "analyze", config, None)?;
    for (dir, report) in report_dirs(&config.archives).iter().zip(&analysis.reports) {
        write_report(&out.join(dir), report)?;
    }
    formats::write_json(&out.join("verdicts.json"), &analysis.verdicts)
}
