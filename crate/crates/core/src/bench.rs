//! Benchmark analysis of final-state shot archives: energies and kinks,
//! empirical work distributions, bootstrapped exponential averages and
//! pass/fail verdicts.
//!
//! Hardware reports only the final readout, so the initial outcome is taken
//! to be the ground value `ω_i = L − 1` and `Δω = ω_f − (L − 1)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::archive::{ArchiveMeta, Couplings, ShotArchive, SpinSample};
use crate::model::{spin_of, AnnealSchedule, ChainSpec};
use crate::tpm::{self, exponential_average_of, Axis, DistributionMeta, WorkDistribution};
use crate::{Error, Result};

pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Bisection stops once the bracket is this narrow in `s`.
const CROSSING_TOLERANCE: f64 = 1e-15;

/// Classical readout of one shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalEnergy {
    /// `Σ s_n s_{n+1}`, independent of the couplings.
    pub omega: i64,
    /// `Σ sgn(J_n) s_n s_{n+1}`; equals `L − 1` exactly on ground states.
    pub aligned: i64,
    /// Bonds with `sgn(J_n) s_n s_{n+1} = −1`.
    pub kinks: usize,
}

pub fn final_energy(spins: &[i8], chain: &ChainSpec) -> Result<FinalEnergy> {
    if spins.len() != chain.len() {
        return Err(Error::DimensionMismatch {
            expected: chain.len(),
            found: spins.len(),
        });
    }
    let mut out = FinalEnergy {
        omega: 0,
        aligned: 0,
        kinks: 0,
    };
    for (pair, sign) in spins.windows(2).zip(chain.bond_signs()) {
        let bond = i64::from(pair[0]) * i64::from(pair[1]);
        out.omega += bond;
        out.aligned += i64::from(sign) * bond;
        out.kinks += usize::from(i64::from(sign) * bond == -1);
    }
    Ok(out)
}

/// Outcome counts of an archive on the `Δω` and `|ω_f|` axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCounts {
    pub length: usize,
    pub shots: u64,
    pub delta_omega: BTreeMap<i64, u64>,
    pub abs_final: BTreeMap<i64, u64>,
    pub kinks: BTreeMap<usize, u64>,
}

impl EmpiricalCounts {
    pub fn from_archive(archive: &ShotArchive) -> Result<Self> {
        archive.validate()?;
        let chain = archive.meta.chain()?;
        let top = archive.meta.length as i64 - 1;
        let mut out = EmpiricalCounts {
            length: archive.meta.length,
            shots: 0,
            delta_omega: BTreeMap::new(),
            abs_final: BTreeMap::new(),
            kinks: BTreeMap::new(),
        };
        for sample in &archive.samples {
            let e = final_energy(&sample.spins, &chain)?;
            out.shots += sample.count;
            *out.delta_omega.entry(e.aligned - top).or_insert(0) += sample.count;
            *out.abs_final.entry(e.aligned.abs()).or_insert(0) += sample.count;
            *out.kinks.entry(e.kinks).or_insert(0) += sample.count;
        }
        if out.shots == 0 {
            return Err(Error::EmptyDistribution);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub delta_omega: WorkDistribution,
    pub abs_final: WorkDistribution,
}

impl EmpiricalDistribution {
    /// `|ω_f|/(L − 1)` against probability.
    pub fn abs_final_renormalized(&self) -> Vec<(f64, f64)> {
        self.abs_final.renormalized()
    }
}

/// `P̂(Δω)` and `P̂(|ω_f|)` from counts.
pub fn empirical_distribution(archive: &ShotArchive) -> Result<EmpiricalDistribution> {
    let counts = EmpiricalCounts::from_archive(archive)?;
    let meta = DistributionMeta {
        length: counts.length,
        tau_us: Some(archive.meta.tau_us),
        noise: None,
    };
    Ok(EmpiricalDistribution {
        delta_omega: WorkDistribution::from_counts(Axis::DeltaOmega, meta.clone(), &counts.delta_omega)?,
        abs_final: WorkDistribution::from_counts(Axis::AbsFinal, meta, &counts.abs_final)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: DEFAULT_BOOTSTRAP,
            level: DEFAULT_LEVEL,
            seed: 0,
        }
    }
}

/// Point estimate of `⟨e^{−Δω}⟩` with a percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub resamples: usize,
}

fn average_of_counts(keys: &[i64], counts: &[u64], total: u64) -> f64 {
    let n = total as f64;
    exponential_average_of(keys.iter().zip(counts).map(|(&k, &c)| (k, c as f64 / n)))
}

/// Exponential average of integer-keyed outcome counts, with a percentile
/// bootstrap over the `N` shots.
pub fn ft_estimate_counts(counts: &BTreeMap<i64, u64>, config: BootstrapConfig) -> Result<FtEstimate> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::EmptyDistribution);
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::invalid("bootstrap", format!("level {} outside (0, 1)", config.level)));
    }
    let keys: Vec<i64> = counts.keys().copied().collect();
    let observed: Vec<u64> = counts.values().copied().collect();
    let estimate = average_of_counts(&keys, &observed, total);
    if config.resamples == 0 {
        return Ok(FtEstimate {
            estimate,
            lower: estimate,
            upper: estimate,
            level: config.level,
            resamples: 0,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draws = Vec::with_capacity(config.resamples);
    let mut resampled = alloc::vec![0u64; keys.len()];
    for _ in 0..config.resamples {
        // Multinomial(N, p̂) as a chain of conditional binomials.
        let mut left = total;
        let mut mass_left = total;
        for (slot, &c) in resampled.iter_mut().zip(&observed) {
            if left == 0 || mass_left == 0 {
                *slot = 0;
                continue;
            }
            let p = (c as f64 / mass_left as f64).min(1.0);
            let k = Binomial::new(left, p)
                .map_err(|e| Error::invalid("bootstrap", format!("{e}")))?
                .sample(&mut rng);
            *slot = k;
            left -= k;
            mass_left -= c;
        }
        draws.push(average_of_counts(&keys, &resampled, total));
    }
    draws.sort_by(f64::total_cmp);
    let alpha = 1.0 - config.level;
    let last = (draws.len() - 1) as f64;
    let lower = draws[(last * alpha / 2.0).floor() as usize];
    let upper = draws[(last * (1.0 - alpha / 2.0)).ceil() as usize];
    Ok(FtEstimate {
        estimate,
        lower: lower.min(estimate),
        upper: upper.max(estimate),
        level: config.level,
        resamples: config.resamples,
    })
}

pub fn ft_estimate(archive: &ShotArchive, config: BootstrapConfig) -> Result<FtEstimate> {
    ft_estimate_counts(&EmpiricalCounts::from_archive(archive)?.delta_omega, config)
}

/// Where `g(s) = Δ(s)` and the resulting adiabatic time scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticThreshold {
    pub s_c: f64,
    pub t_c_us: f64,
    pub delta_c_ghz: f64,
    pub tau_ad_us: f64,
}

/// `τ_ad = L²/Δ(t_c)`: nanoseconds for `Δ` in GHz, returned in µs.
pub fn tau_ad_us(length: usize, delta_c_ghz: f64) -> f64 {
    let l = length as f64;
    l * l / delta_c_ghz / 1e3
}

/// First crossing of `g` and `Δ`, located by bisection on `g(s) − Δ(s)`.
pub fn adiabatic_threshold(length: usize, schedule: &AnnealSchedule) -> Result<AdiabaticThreshold> {
    let gap = |s: f64| {
        let (g, d) = schedule.amplitudes(s);
        g - d
    };
    // Bracket the first sign change on the knot grid; the amplitudes are
    // linear in between.
    let knots = schedule.knots();
    let mut bracket = None;
    for w in knots.windows(2) {
        let (a, b) = (gap(w[0].s), gap(w[1].s));
        if a == 0.0 {
            bracket = Some((w[0].s, w[0].s));
            break;
        }
        if a > 0.0 && b <= 0.0 {
            bracket = Some((w[0].s, w[1].s));
            break;
        }
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoCrossing)?;
    let s_c = if lo == hi {
        lo
    } else if gap(hi) == 0.0 {
        hi
    } else {
        loop {
            let mid = 0.5 * (lo + hi);
            let f = gap(mid);
            if f == 0.0 || hi - lo <= CROSSING_TOLERANCE || mid == lo || mid == hi {
                break mid;
            }
            if f > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    };
    let (_, delta_c) = schedule.amplitudes(s_c);
    if delta_c.is_nan() || delta_c <= 0.0 {
        return Err(Error::NoCrossing);
    }
    Ok(AdiabaticThreshold {
        s_c,
        t_c_us: s_c * schedule.tau_us(),
        delta_c_ghz: delta_c,
        tau_ad_us: tau_ad_us(length, delta_c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkStatistics {
    pub mean: f64,
    /// `mean / (L − 1)`.
    pub density: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub shots: u64,
}

pub fn kink_statistics(archive: &ShotArchive) -> Result<KinkStatistics> {
    let counts = EmpiricalCounts::from_archive(archive)?;
    let n = counts.shots as f64;
    let mean = counts.kinks.iter().map(|(&k, &c)| k as f64 * c as f64).sum::<f64>() / n;
    let stderr = if counts.shots > 1 {
        let ss: f64 = counts.kinks.iter().map(|(&k, &c)| c as f64 * (k as f64 - mean).powi(2)).sum();
        (ss / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(KinkStatistics {
        mean,
        density: mean / (counts.length - 1) as f64,
        stderr,
        shots: counts.shots,
    })
}

/// Exact mean kink number of a computational-basis distribution.
pub fn expected_kinks(z_probabilities: &[f64], chain: &ChainSpec) -> Result<f64> {
    if z_probabilities.len() != chain.dim() {
        return Err(Error::DimensionMismatch {
            expected: chain.dim(),
            found: z_probabilities.len(),
        });
    }
    let length = chain.len();
    let signs = chain.bond_signs();
    Ok(z_probabilities
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let kinks = (0..length - 1)
                .filter(|&n| signs[n] * spin_of(index, n, length) * spin_of(index, n + 1, length) == -1)
                .count();
            p * kinks as f64
        })
        .sum())
}

/// The gauge transform `s_n → (−1)^n s_n` (site 0 kept) together with
/// `J → −J`: a valid archive of the partner problem.
pub fn gauge_flip(archive: &ShotArchive) -> Result<ShotArchive> {
    let mut meta = archive.meta.clone();
    meta.couplings = match &meta.couplings {
        Couplings::Uniform(j) => Couplings::Uniform(-j),
        Couplings::PerBond(js) => Couplings::PerBond(js.iter().map(|j| -j).collect()),
    };
    let samples = archive
        .samples
        .iter()
        .map(|s| SpinSample {
            spins: s.spins.iter().enumerate().map(|(n, &x)| if n % 2 == 1 { -x } else { x }).collect(),
            count: s.count,
        })
        .collect();
    ShotArchive::new(meta, samples)
}

/// Verdict thresholds. Every report echoes the values it was judged by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Allowed `|⟨e^{−Δω}⟩ − 1|` beyond the confidence interval.
    pub unital: f64,
    /// Allowed total variation between `P̂(|ω_f|)` and the ideal point mass.
    pub adiabatic: f64,
    /// Fixed τ-dependence threshold; `None` uses `tau_noise_multiple` times
    /// the pooled multinomial noise floor of each pair.
    pub tau: Option<f64>,
    pub tau_noise_multiple: f64,
    /// Allowed total variation between `J` and `−J` |ω_f| marginals.
    pub symmetry: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            unital: 0.05,
            adiabatic: 0.01,
            tau: None,
            tau_noise_multiple: 3.0,
            symmetry: 0.02,
        }
    }
}

/// Everything measured on one archive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub meta: ArchiveMeta,
    pub shots: u64,
    pub delta_omega: WorkDistribution,
    pub abs_final: WorkDistribution,
    pub exponential_average: FtEstimate,
    pub tv_to_ideal: f64,
    pub kinks: KinkStatistics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adiabatic_threshold: Option<AdiabaticThreshold>,
    pub unital: bool,
    pub adiabatic: bool,
    pub thresholds: Thresholds,
    #[serde(skip)]
    counts: Option<EmpiricalCounts>,
}

impl BenchmarkReport {
    pub fn counts(&self) -> Option<&EmpiricalCounts> {
        self.counts.as_ref()
    }
}

/// Per-archive analysis. `schedule` supplies `τ_ad` when known.
pub fn analyze(
    archive: &ShotArchive,
    schedule: Option<&AnnealSchedule>,
    thresholds: &Thresholds,
    bootstrap: BootstrapConfig,
) -> Result<BenchmarkReport> {
    let counts = EmpiricalCounts::from_archive(archive)?;
    let dist = empirical_distribution(archive)?;
    let estimate = ft_estimate_counts(&counts.delta_omega, bootstrap)?;
    let ideal = tpm::ideal_distribution(archive.meta.length)?;
    let tv_to_ideal = dist.abs_final.total_variation(&ideal);
    let kinks = kink_statistics(archive)?;
    let adiabatic_threshold = schedule
        .map(|s| adiabatic_threshold(archive.meta.length, s))
        .transpose()?;
    Ok(BenchmarkReport {
        meta: archive.meta.clone(),
        shots: counts.shots,
        delta_omega: dist.delta_omega,
        abs_final: dist.abs_final,
        unital: estimate.lower - thresholds.unital <= 1.0 && 1.0 <= estimate.upper + thresholds.unital,
        adiabatic: tv_to_ideal <= thresholds.adiabatic,
        exponential_average: estimate,
        tv_to_ideal,
        kinks,
        adiabatic_threshold,
        thresholds: *thresholds,
        counts: Some(counts),
    })
}

/// `½ Σ_k √(p̄_k(1 − p̄_k)(1/N₁ + 1/N₂))` with `p̄` the pooled frequencies:
/// the typical total variation between two samples of one law.
pub fn noise_floor(a: &BTreeMap<i64, u64>, b: &BTreeMap<i64, u64>) -> f64 {
    let (na, nb) = (a.values().sum::<u64>() as f64, b.values().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let mut keys: Vec<i64> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| {
            let pooled = (a.get(k).copied().unwrap_or(0) + b.get(k).copied().unwrap_or(0)) as f64 / (na + nb);
            (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt()
        })
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub tau_a_us: f64,
    pub tau_b_us: f64,
    pub total_variation: f64,
    pub threshold: f64,
}

/// τ-dependence within one chain family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauDependence {
    #[serde(rename = "L")]
    pub length: usize,
    #[serde(rename = "J")]
    pub couplings: Vec<f64>,
    pub taus_us: Vec<f64>,
    pub pairs: Vec<PairComparison>,
    pub max_total_variation: f64,
    pub tau_dependent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryVerdict {
    #[serde(rename = "L")]
    pub length: usize,
    #[serde(rename = "J")]
    pub couplings: Vec<f64>,
    pub tau_us: f64,
    pub total_variation: f64,
    pub threshold: f64,
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossVerdicts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_dependence: Option<Vec<TauDependence>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Vec<SymmetryVerdict>>,
    pub thresholds: Thresholds,
}

fn counts_of(report: &BenchmarkReport, axis: Axis) -> BTreeMap<i64, u64> {
    match (&report.counts, axis) {
        (Some(c), Axis::DeltaOmega) => c.delta_omega.clone(),
        (Some(c), Axis::AbsFinal) => c.abs_final.clone(),
        // Deserialized reports carry only frequencies; rebuild counts.
        (None, axis) => {
            let dist = if axis == Axis::DeltaOmega { &report.delta_omega } else { &report.abs_final };
            dist.iter()
                .map(|(k, p)| (k, (p * report.shots as f64).round() as u64))
                .collect()
        }
    }
}

fn family_key(meta: &ArchiveMeta) -> (usize, Vec<u64>) {
    let js = meta.couplings.expand(meta.length);
    (meta.length, js.iter().map(|j| j.to_bits()).collect())
}

/// Groups reports by chain and compares every pair of distinct τ values.
pub fn tau_dependence(reports: &[BenchmarkReport], thresholds: &Thresholds) -> Result<Vec<TauDependence>> {
    let mut families: BTreeMap<(usize, Vec<u64>), Vec<&BenchmarkReport>> = BTreeMap::new();
    for r in reports {
        families.entry(family_key(&r.meta)).or_default().push(r);
    }
    let mut out = Vec::new();
    let mut most = 0;
    for ((length, _), members) in families {
        let mut taus: Vec<f64> = members.iter().map(|r| r.meta.tau_us).collect();
        taus.sort_by(f64::total_cmp);
        taus.dedup();
        most = most.max(taus.len());
        if taus.len() < 2 {
            continue;
        }
        let mut pairs = Vec::new();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if a.meta.tau_us == b.meta.tau_us {
                    continue;
                }
                let (ca, cb) = (counts_of(a, Axis::DeltaOmega), counts_of(b, Axis::DeltaOmega));
                let threshold = thresholds
                    .tau
                    .unwrap_or_else(|| thresholds.tau_noise_multiple * noise_floor(&ca, &cb));
                pairs.push(PairComparison {
                    tau_a_us: a.meta.tau_us,
                    tau_b_us: b.meta.tau_us,
                    total_variation: a.delta_omega.total_variation(&b.delta_omega),
                    threshold,
                });
            }
        }
        out.push(TauDependence {
            length,
            couplings: members[0].meta.couplings.expand(length),
            taus_us: taus,
            max_total_variation: pairs.iter().map(|p| p.total_variation).fold(0.0, f64::max),
            tau_dependent: pairs.iter().any(|p| p.total_variation > p.threshold),
            pairs,
        });
    }
    if out.is_empty() {
        return Err(Error::InsufficientGroups {
            test: "tau-dependence",
            required: 2,
            found: most,
        });
    }
    Ok(out)
}

/// Pairs each chain with its negation at equal τ and compares `|ω_f|`.
pub fn symmetry(reports: &[BenchmarkReport], thresholds: &Thresholds) -> Result<Vec<SymmetryVerdict>> {
    let mut out = Vec::new();
    for (i, a) in reports.iter().enumerate() {
        let ja = a.meta.couplings.expand(a.meta.length);
        for b in &reports[i + 1..] {
            let jb = b.meta.couplings.expand(b.meta.length);
            let mirrored = a.meta.length == b.meta.length
                && a.meta.tau_us == b.meta.tau_us
                && ja.iter().zip(&jb).all(|(x, y)| *x == -*y && *x != 0.0);
            if !mirrored {
                continue;
            }
            let tv = a.abs_final.total_variation(&b.abs_final);
            out.push(SymmetryVerdict {
                length: a.meta.length,
                couplings: ja.clone(),
                tau_us: a.meta.tau_us,
                total_variation: tv,
                threshold: thresholds.symmetry,
                symmetric: tv <= thresholds.symmetry,
            });
        }
    }
    if out.is_empty() {
        return Err(Error::InsufficientGroups {
            test: "symmetry",
            required: 2,
            found: reports.len().min(1),
        });
    }
    Ok(out)
}

/// Cross-archive verdicts; tests without enough groups are left out.
pub fn verdicts(reports: &[BenchmarkReport], thresholds: &Thresholds) -> Result<CrossVerdicts> {
    if reports.is_empty() {
        return Err(Error::InsufficientGroups {
            test: "verdicts",
            required: 1,
            found: 0,
        });
    }
    Ok(CrossVerdicts {
        tau_dependence: tau_dependence(reports, thresholds).ok(),
        symmetry: symmetry(reports, thresholds).ok(),
        thresholds: *thresholds,
    })
}
