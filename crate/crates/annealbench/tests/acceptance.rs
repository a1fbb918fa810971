//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use annealbench::pipeline::{self, EfficacyMode, SimulationConfig};
use annealbench_core::bench::{self, BootstrapConfig};
use annealbench_core::chimera::{random_chain, validate_embedding, ChimeraGraph, DEFAULT_RESTARTS, DEFAULT_SHORE};
use annealbench_core::dynamics::{AnnealMap, EvolutionConfig, IdentityMap};
use annealbench_core::model::{
    build_omega_final_for, build_omega_initial, initial_state, AnnealSchedule, ChainSpec, Knot, QuantumState,
};
use annealbench_core::noise::{self, NoiseKind, NoiseModel};
use annealbench_core::tpm::{self, DistributionMeta, WorkDistribution};
use annealbench_core::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Slice count keeping every slice at most `dt_us` long.
fn steps_for(tau_us: f64, dt_us: f64) -> usize {
    ((tau_us / dt_us).ceil() as usize).max(2000)
}

struct Exact {
    delta_omega: WorkDistribution,
    abs_final: WorkDistribution,
    final_z: Vec<f64>,
    efficacy: Option<f64>,
}

fn exact(chain: &ChainSpec, schedule: &AnnealSchedule, noise: &NoiseModel, steps: usize, with_efficacy: bool) -> Result<Exact, String> {
    let map = AnnealMap::new(chain, schedule, noise, EvolutionConfig::new(steps).map_err(fail)?).map_err(fail)?;
    let rho0 = initial_state(chain, schedule).map_err(fail)?;
    let oi = build_omega_initial(chain.len()).map_err(fail)?;
    let of = build_omega_final_for(chain).map_err(fail)?;
    let m = tpm::two_point_measurement(&rho0, &oi, &of, &map).map_err(fail)?;
    let meta = DistributionMeta { length: chain.len(), ..Default::default() };
    Ok(Exact {
        delta_omega: tpm::work_distribution(&m.transition, meta.clone()).map_err(fail)?,
        abs_final: tpm::abs_final_distribution(&m.transition, meta).map_err(fail)?,
        final_z: m.final_z,
        efficacy: if with_efficacy {
            Some(tpm::efficacy(&rho0, &oi, &of, &map).map_err(fail)?)
        } else {
            None
        },
    })
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> QuantumState {
    let a = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    QuantumState::mixed(rho / tr).expect("positive by construction")
}

fn ft_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases = 120;
    let (mut worst_rel, mut worst_abs, mut non_unital) = (0.0f64, 0.0f64, 0);
    for case in 0..cases {
        let length = 2 + case % 7;
        let couplings: Vec<f64> = (0..length - 1)
            .map(|_| rng.random_range(0.2..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let fields: Vec<f64> = (0..length).map(|_| rng.random_range(-0.3..0.3)).collect();
        let chain = ChainSpec::with_fields(couplings, fields).map_err(fail)?;
        let mid = rng.random_range(0.2..0.8);
        let knots = vec![
            Knot::new(0.0, rng.random_range(2.0..5.0), rng.random_range(0.0..0.5)),
            Knot::new(mid, rng.random_range(0.5..3.0), rng.random_range(0.5..3.0)),
            Knot::new(1.0, rng.random_range(0.0..0.5), rng.random_range(2.0..5.0)),
        ];
        let schedule = AnnealSchedule::from_knots(rng.random_range(0.001..0.05), knots).map_err(fail)?;
        let rate = rng.random_range(0.5..20.0);
        let kind = match case % 5 {
            0 => NoiseKind::None,
            1 => NoiseKind::Dephasing,
            2 => NoiseKind::Depolarizing,
            3 => NoiseKind::AmplitudeDamping,
            _ => NoiseKind::Thermal { excitation: rng.random_range(0.0..1.0) },
        };
        let noise = NoiseModel::new(kind, rate).map_err(fail)?;
        let steps = if length >= 7 { rng.random_range(1..=3) } else { rng.random_range(1..=12) };
        let map = AnnealMap::new(&chain, &schedule, &noise, EvolutionConfig::new(steps).map_err(fail)?).map_err(fail)?;
        non_unital += usize::from(!noise::is_unital(map.slice_channel()).0);
        let rho0 = if case % 3 == 0 {
            random_state(&mut rng, chain.dim())
        } else {
            initial_state(&chain, &schedule).map_err(fail)?
        };
        let oi = build_omega_initial(length).map_err(fail)?;
        let of = build_omega_final_for(&chain).map_err(fail)?;
        let t = tpm::transition_matrix(&rho0, &oi, &of, &map).map_err(fail)?;
        let avg = tpm::exponential_average(&tpm::work_distribution(&t, DistributionMeta::default()).map_err(fail)?);
        let gamma = tpm::efficacy(&rho0, &oi, &of, &map).map_err(fail)?;
        worst_abs = worst_abs.max((avg - gamma).abs());
        worst_rel = worst_rel.max((avg - gamma).abs() / gamma.max(1.0));
    }
    check(
        worst_rel <= 1e-8 && non_unital > 0,
        format!("{cases} cases ({non_unital} non-unital): max |avg-gamma|/max(1,gamma) = {worst_rel:.2e}, max abs = {worst_abs:.2e}"),
    )
}

fn ideal_annealer() -> Outcome {
    let length = 6;
    let ramp = AnnealSchedule::default_ramp(1.0).map_err(fail)?;
    let tau_ad = bench::adiabatic_threshold(length, &ramp).map_err(fail)?.tau_ad_us;
    let tau = 10.0 * tau_ad;
    let schedule = ramp.with_tau(tau).map_err(fail)?;
    let steps = steps_for(tau, 2e-6);
    let mut runs = Vec::new();
    for j in [1.0, -1.0] {
        let chain = ChainSpec::uniform(length, j).map_err(fail)?;
        runs.push(exact(&chain, &schedule, &NoiseModel::none(), steps, false)?);
    }
    let top = runs[0].abs_final.probability(length as i64 - 1);
    let avg = tpm::exponential_average(&runs[0].delta_omega);
    let gauge = runs[0]
        .delta_omega
        .iter()
        .chain(runs[1].delta_omega.iter())
        .map(|(k, _)| (runs[0].delta_omega.probability(k) - runs[1].delta_omega.probability(k)).abs())
        .fold(0.0, f64::max);
    check(
        top >= 0.999 && (avg - 1.0).abs() <= 1e-3 && gauge <= 1e-9,
        format!("tau = 10 tau_ad = {tau:.4} us, {steps} steps: P(|w|=L-1) = {top:.6}, <e^-dw> = {avg:.6}, J/-J max diff {gauge:.1e}"),
    )
}

fn unital_discrimination() -> Outcome {
    let chain = ChainSpec::uniform(6, 1.0).map_err(fail)?;
    let schedule = AnnealSchedule::default_ramp(5.0).map_err(fail)?;
    let mut lines = Vec::new();
    let mut ok = true;
    for (kind, expect_unital) in [("dephasing:0.05", true), ("amplitude_damping:0.05", false)] {
        let noise: NoiseModel = kind.parse().map_err(fail)?;
        let run = exact(&chain, &schedule, &noise, 2000, true)?;
        let avg = tpm::exponential_average(&run.delta_omega);
        let gamma = run.efficacy.unwrap_or(f64::NAN);
        let map = AnnealMap::new(&chain, &schedule, &noise, EvolutionConfig::default()).map_err(fail)?;
        let witness = noise::is_unital(map.slice_channel()).0;
        let identity = (avg - gamma).abs() <= 1e-8 * gamma.max(1.0);
        ok &= identity && witness == expect_unital;
        let mut line = format!("{kind}: avg {avg:.6} gamma {gamma:.6} witness unital={witness}");
        if !expect_unital {
            // The shot-level verdict agrees with the channel witness.
            let meta = annealbench_core::archive::ArchiveMeta {
                length: 6,
                couplings: annealbench_core::archive::Couplings::Uniform(1.0),
                tau_us: 5.0,
                machine: "simulator".into(),
                seed: None,
                note: None,
            };
            let archive = tpm::sample_readouts(&run.final_z, meta, 100_000, 3).map_err(fail)?;
            let report = bench::analyze(&archive, None, &bench::Thresholds::default(), BootstrapConfig { resamples: 200, level: 0.95, seed: 4 })
                .map_err(fail)?;
            ok &= !report.unital;
            line.push_str(&format!(", shot verdict unital={}", report.unital));
        }
        lines.push(line);
    }
    check(ok, lines.join("; "))
}

fn tau_dependence() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (noise, expect) in [("amplitude_damping:0.05", true), ("none", false)] {
        let mut config = SimulationConfig::uniform(6, 1.0, vec![5.0, 50.0]).map_err(fail)?;
        config.noise = noise.parse().map_err(fail)?;
        config.seed = 11;
        if noise == "none" {
            // Resolve the adiabatic regime well enough that slicing error
            // stays below the sampling noise.
            config.steps = 80_000;
        }
        config.efficacy = EfficacyMode::Never;
        config.bootstrap = 200;
        let sim = pipeline::simulate(&config).map_err(fail)?;
        let group = sim.verdicts.tau_dependence.as_ref().and_then(|g| g.first()).ok_or("no tau group")?;
        let pair = &group.pairs[0];
        ok &= group.tau_dependent == expect;
        lines.push(format!(
            "{noise}: TV {:.4} vs threshold {:.4} -> tau-dependent={}",
            pair.total_variation, pair.threshold, group.tau_dependent
        ));
    }
    check(ok, lines.join("; "))
}

fn threshold_arithmetic() -> Outcome {
    let schedule =
        AnnealSchedule::from_knots(1.0, vec![Knot::new(0.0, 2.0, 0.0), Knot::new(1.0, 0.0, 2.0)]).map_err(fail)?;
    let t = bench::adiabatic_threshold(100, &schedule).map_err(fail)?;
    check(
        t.delta_c_ghz == 1.0 && t.tau_ad_us == 10.0,
        format!("delta(t_c) = {} GHz, tau_ad(L=100) = {} us", t.delta_c_ghz, t.tau_ad_us),
    )
}

fn kibble_zurek() -> Outcome {
    let length = 8;
    let chain = ChainSpec::uniform(length, 1.0).map_err(fail)?;
    // Amplitudes that vanish at the endpoints: the final Hamiltonian is
    // classical, so kinks count only non-adiabatic excitations.
    let ramp =
        AnnealSchedule::from_knots(1.0, vec![Knot::new(0.0, 5.0, 0.0), Knot::new(1.0, 0.0, 5.0)]).map_err(fail)?;
    let tau_ad = bench::adiabatic_threshold(length, &ramp).map_err(fail)?.tau_ad_us;
    let mut curve = Vec::new();
    for k in -4..=4 {
        let tau = tau_ad * 10f64.powf(k as f64 / 2.0);
        let run = exact(&chain, &ramp.with_tau(tau).map_err(fail)?, &NoiseModel::none(), steps_for(tau, 1e-5), false)?;
        curve.push((tau, bench::expected_kinks(&run.final_z, &chain).map_err(fail)?));
    }
    let monotone = curve.windows(2).all(|w| w[1].1 <= w[0].1);
    let slow = curve.iter().filter(|(t, _)| *t >= 10.0 * tau_ad).map(|&(_, n)| n).fold(0.0, f64::max);
    let text: Vec<String> = curve.iter().map(|(t, n)| format!("{:.3}:{n:.2e}", t / tau_ad)).collect();
    check(
        monotone && slow < 0.01,
        format!("tau/tau_ad:kinks {}; monotone={monotone}, max kinks for tau>=10 tau_ad = {slow:.2e}", text.join(" ")),
    )
}

fn sudden_quench() -> Outcome {
    let chain = ChainSpec::uniform(2, 1.0).map_err(fail)?;
    // Purely transverse start, so ρ0 = |++⟩⟨++|.
    let schedule =
        AnnealSchedule::from_knots(1.0, vec![Knot::new(0.0, 1.0, 0.0), Knot::new(1.0, 0.0, 1.0)]).map_err(fail)?;
    let rho0 = initial_state(&chain, &schedule).map_err(fail)?;
    let oi = build_omega_initial(2).map_err(fail)?;
    let of = build_omega_final_for(&chain).map_err(fail)?;
    let t = tpm::transition_matrix(&rho0, &oi, &of, &IdentityMap { dim: 4 }).map_err(fail)?;
    let p = tpm::work_distribution(&t, DistributionMeta { length: 2, ..Default::default() }).map_err(fail)?;
    let avg = tpm::exponential_average(&p);
    let closed = 0.5 + std::f64::consts::E.powi(2) / 2.0;
    let exact_ok = (p.probability(0) - 0.5).abs() <= 1e-12
        && (p.probability(-2) - 0.5).abs() <= 1e-12
        && (avg - closed).abs() <= 1e-12;
    let mut covered = 0;
    for seed in 0..100u64 {
        let counts: BTreeMap<i64, u64> = tpm::sample_shots(&p, 100_000, seed).map_err(fail)?;
        let est = bench::ft_estimate_counts(&counts, BootstrapConfig { resamples: 1000, level: 0.95, seed: 1000 + seed })
            .map_err(fail)?;
        covered += usize::from(est.lower <= closed && closed <= est.upper);
    }
    check(
        exact_ok && covered >= 93,
        format!(
            "P(0) = {}, P(-2) = {}, <e^-dw> - closed form = {:.1e}; CI coverage {covered}/100",
            p.probability(0),
            p.probability(-2),
            avg - closed
        ),
    )
}

fn estimator_round_trip() -> Outcome {
    let mut config = SimulationConfig::uniform(6, 1.0, vec![0.0003]).map_err(fail)?;
    config.shots = 1_000_000;
    config.seed = 8;
    config.efficacy = EfficacyMode::Never;
    let sim = pipeline::simulate(&config).map_err(fail)?;
    let cell = &sim.cells[0];
    let exact = &cell.exact.delta_omega;
    let k = exact.iter().filter(|&(_, p)| p > 0.0).count();
    let bound = 5.0 * (k as f64 / 1e6).sqrt();
    let tv = cell.report.delta_omega.total_variation(exact);
    let ci = &cell.report.exponential_average;
    let avg = cell.exact.exponential_average;
    check(
        tv <= bound && ci.lower <= avg && avg <= ci.upper,
        format!(
            "K = {k}, TV = {tv:.2e} (bound {bound:.2e}); exact {avg:.5} in CI [{:.5}, {:.5}]",
            ci.lower, ci.upper
        ),
    )
}

fn chimera_structure() -> Outcome {
    for m in 1..=8 {
        for n in 1..=8 {
            let g = ChimeraGraph::new(m, n, DEFAULT_SHORE).map_err(fail)?;
            let t = DEFAULT_SHORE;
            let edges = g.edges();
            let distinct: std::collections::BTreeSet<_> = edges.iter().collect();
            if g.node_count() != 2 * m * n * t
                || edges.len() != m * n * t * t + (m - 1) * n * t + m * (n - 1) * t
                || distinct.len() != edges.len()
                || edges.iter().any(|&(a, b)| !g.has_edge(a, b))
            {
                return Err(format!("count mismatch at M={m} N={n}"));
            }
        }
    }
    let g = ChimeraGraph::new(12, 12, DEFAULT_SHORE).map_err(fail)?;
    for seed in 0..1000 {
        let c = random_chain(&g, 50, seed, DEFAULT_RESTARTS).map_err(fail)?;
        if c.len() != 50 {
            return Err(format!("seed {seed}: length {}", c.len()));
        }
        if let Some(v) = validate_embedding(&g, &c) {
            return Err(format!("seed {seed}: {v}"));
        }
    }
    Ok("formulas hold for M, N <= 8; 1000/1000 chains of length 50 on 12x12 validate".into())
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "fluctuation-theorem identity", budget: Duration::from_secs(120), run: ft_identity },
        Criterion { name: "ideal annealer", budget: Duration::from_secs(60), run: ideal_annealer },
        Criterion { name: "unital vs non-unital", budget: Duration::from_secs(120), run: unital_discrimination },
        Criterion { name: "tau-dependence detection", budget: Duration::from_secs(120), run: tau_dependence },
        Criterion { name: "adiabatic threshold arithmetic", budget: Duration::MAX, run: threshold_arithmetic },
        Criterion { name: "Kibble-Zurek trend", budget: Duration::from_secs(300), run: kibble_zurek },
        Criterion { name: "sudden quench", budget: Duration::MAX, run: sudden_quench },
        Criterion { name: "estimator round trip", budget: Duration::from_secs(60), run: estimator_round_trip },
        Criterion { name: "Chimera structure", budget: Duration::from_secs(30), run: chimera_structure },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, c) in criteria.iter().enumerate() {
        let number = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == number || c.name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let within = elapsed <= c.budget;
        let (pass, detail) = match outcome {
            Ok(d) if within => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", c.budget)),
            Err(d) => (false, d),
        };
        failures += usize::from(!pass);
        println!(
            "{} [{}] {}: {} ({:.1} s)",
            if pass { "PASS" } else { "FAIL" },
            number,
            c.name,
            detail,
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
