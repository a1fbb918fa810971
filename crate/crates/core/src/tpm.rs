//! Two-point measurement: transition probabilities, the work distribution
//! `P(Δω)`, its exponential average and the quantum efficacy `γ`.
//!
//! Both observables have integer spectra, so `Δω` is kept as an exact
//! integer key; nothing here bins floating-point values.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::archive::{spins_of_index, ArchiveMeta, ShotArchive, SpinSample};
use crate::dynamics::QuantumMap;
use crate::linalg::{self, CMatrix};
use crate::model::{Observable, QuantumState};
use crate::{Error, Result};

const NORMALIZATION_TOLERANCE: f64 = 1e-9;
const TRACE_TOLERANCE: f64 = 1e-9;
/// Blocks `Π ρ Π` with smaller trace are treated as absent.
const NEGLIGIBLE_WEIGHT: f64 = 1e-24;

/// `p[m][n]`: probability of reading `ω_m` first and `ω_n` second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub initial_values: Vec<i64>,
    pub final_values: Vec<i64>,
    pub probabilities: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().flatten().sum()
    }

    /// Distribution of the second outcome alone.
    pub fn final_marginal(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.final_values.len()];
        for row in &self.probabilities {
            for (acc, p) in out.iter_mut().zip(row) {
                *acc += p;
            }
        }
        out
    }
}

/// What the integer keys of a [`WorkDistribution`] measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// `Δω = ω_f − ω_i`.
    DeltaOmega,
    /// `|ω_f|`.
    AbsFinal,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DistributionMeta {
    #[serde(rename = "L")]
    pub length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
}

/// Probabilities on exact integer outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkDistribution {
    pub axis: Axis,
    pub meta: DistributionMeta,
    probabilities: BTreeMap<i64, f64>,
}

impl WorkDistribution {
    /// Validated distribution: entries ≥ −1e−12 and total 1 within 1e−9.
    pub fn new(axis: Axis, meta: DistributionMeta, probabilities: BTreeMap<i64, f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if let Some((k, p)) = probabilities.iter().find(|(_, &p)| !p.is_finite() || p < -1e-12) {
            return Err(Error::invalid("distribution", format!("probability {p} at {k}")));
        }
        let total: f64 = probabilities.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid("distribution", format!("probabilities sum to {total}")));
        }
        Ok(WorkDistribution {
            axis,
            meta,
            probabilities,
        })
    }

    /// Normalized counts.
    pub fn from_counts(axis: Axis, meta: DistributionMeta, counts: &BTreeMap<i64, u64>) -> Result<Self> {
        let n: u64 = counts.values().sum();
        if n == 0 {
            return Err(Error::EmptyDistribution);
        }
        let probabilities = counts.iter().map(|(&k, &c)| (k, c as f64 / n as f64)).collect();
        Self::new(axis, meta, probabilities)
    }

    pub fn probability(&self, key: i64) -> f64 {
        self.probabilities.get(&key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + Clone + '_ {
        self.probabilities.iter().map(|(&k, &p)| (k, p))
    }

    pub fn as_map(&self) -> &BTreeMap<i64, f64> {
        &self.probabilities
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// Half the L1 distance to `other`.
    pub fn total_variation(&self, other: &WorkDistribution) -> f64 {
        total_variation(&self.probabilities, &other.probabilities)
    }

    /// Keys divided by `L − 1`, the renormalized energy axis.
    pub fn renormalized(&self) -> Vec<(f64, f64)> {
        let scale = (self.meta.length.max(2) - 1) as f64;
        self.iter().map(|(k, p)| (k as f64 / scale, p)).collect()
    }
}

/// Half the L1 distance between two integer-keyed histograms.
pub fn total_variation(a: &BTreeMap<i64, f64>, b: &BTreeMap<i64, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, p) in a {
        sum += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in b {
        if !a.contains_key(k) {
            sum += q.abs();
        }
    }
    0.5 * sum
}

fn check_dims(dim: usize, omega_i: &Observable, omega_f: &Observable) -> Result<()> {
    for d in [omega_i.dim(), omega_f.dim()] {
        if d != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: d });
        }
    }
    Ok(())
}

/// `M(ρ) = Σ_m Π_m ρ Π_m`.
pub fn post_measurement_state(rho: &CMatrix, omega: &Observable) -> Result<CMatrix> {
    if rho.nrows() != omega.dim() || rho.ncols() != omega.dim() {
        return Err(Error::DimensionMismatch {
            expected: omega.dim(),
            found: rho.nrows(),
        });
    }
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for space in omega.spaces() {
        out += space.sandwich(rho);
    }
    Ok(out)
}

/// Result of one two-point-measurement run.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub transition: TransitionMatrix,
    /// Diagonal of `E(M(ρ0))`: the distribution of z-basis readouts after
    /// the first measurement.
    pub final_z: Vec<f64>,
}

/// `p_{m→n} = tr[Π_n^f E(Π_m^i ρ0 Π_m^i)]`.
///
/// Rows whose projected weight vanishes are left at zero without being
/// evolved; for an `Ω_i` eigenstate only one row is populated.
pub fn transition_matrix(
    state: &QuantumState,
    omega_i: &Observable,
    omega_f: &Observable,
    map: &dyn QuantumMap,
) -> Result<TransitionMatrix> {
    two_point_measurement(state, omega_i, omega_f, map).map(|m| m.transition)
}

/// Diagonal of `E(M(ρ0))` in the computational basis.
pub fn final_z_probabilities(
    state: &QuantumState,
    omega_i: &Observable,
    omega_f: &Observable,
    map: &dyn QuantumMap,
) -> Result<Vec<f64>> {
    two_point_measurement(state, omega_i, omega_f, map).map(|m| m.final_z)
}

/// Transition matrix and final readout distribution from a single
/// evolution of the projected blocks.
pub fn two_point_measurement(
    state: &QuantumState,
    omega_i: &Observable,
    omega_f: &Observable,
    map: &dyn QuantumMap,
) -> Result<Measurement> {
    let dim = map.dim();
    if state.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.dim(),
        });
    }
    check_dims(dim, omega_i, omega_f)?;
    let initial_values = omega_i.integer_values()?;
    let final_values = omega_f.integer_values()?;
    let mut probabilities = alloc::vec![alloc::vec![0.0; final_values.len()]; initial_values.len()];
    let mut final_z = alloc::vec![0.0; dim];

    if let QuantumState::Pure(psi) = state {
        // Rank-one blocks: evolve the projected vectors themselves.
        let mut rows = Vec::new();
        let mut columns = Vec::new();
        for (m, space) in omega_i.spaces().iter().enumerate() {
            let projected = &space.basis * (space.basis.adjoint() * psi);
            if projected.norm_squared() > NEGLIGIBLE_WEIGHT {
                rows.push(m);
                columns.push(projected);
            }
        }
        if let Some(evolved) = map.apply_columns(&CMatrix::from_columns(&columns)) {
            let evolved = evolved?;
            for (c, &m) in rows.iter().enumerate() {
                let phi = evolved.column(c).into_owned();
                check_trace(columns[c].norm_squared(), phi.norm_squared())?;
                for (n, space) in omega_f.spaces().iter().enumerate() {
                    probabilities[m][n] = space.weight_pure(&phi);
                }
                for (acc, z) in final_z.iter_mut().zip(phi.iter()) {
                    *acc += z.norm_sqr();
                }
            }
            return Ok(Measurement {
                transition: TransitionMatrix {
                    initial_values,
                    final_values,
                    probabilities,
                },
                final_z,
            });
        }
    }

    let rho = state.density_matrix();
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    for (m, space) in omega_i.spaces().iter().enumerate() {
        let block = space.sandwich(&rho);
        if linalg::trace(&block).re > NEGLIGIBLE_WEIGHT {
            rows.push(m);
            blocks.push(block);
        }
    }
    let evolved = map.apply_operators(&blocks)?;
    for ((&m, before), after) in rows.iter().zip(&blocks).zip(&evolved) {
        check_trace(linalg::trace(before).re, linalg::trace(after).re)?;
        for (n, space) in omega_f.spaces().iter().enumerate() {
            probabilities[m][n] = space.weight(after).re;
        }
        for (i, acc) in final_z.iter_mut().enumerate() {
            *acc += after[(i, i)].re;
        }
    }
    for p in final_z.iter_mut() {
        *p = p.max(0.0);
    }
    Ok(Measurement {
        transition: TransitionMatrix {
            initial_values,
            final_values,
            probabilities,
        },
        final_z,
    })
}

fn check_trace(before: f64, after: f64) -> Result<()> {
    let deviation = (after - before).abs();
    if deviation > TRACE_TOLERANCE {
        return Err(Error::NotTracePreserving { deviation });
    }
    Ok(())
}

/// `P(Δω) = Σ_{m,n} δ(Δω − (ω_n − ω_m)) p_{m→n}`.
pub fn work_distribution(t: &TransitionMatrix, meta: DistributionMeta) -> Result<WorkDistribution> {
    let mut probabilities = BTreeMap::new();
    for (row, &wi) in t.probabilities.iter().zip(&t.initial_values) {
        for (&p, &wf) in row.iter().zip(&t.final_values) {
            *probabilities.entry(wf - wi).or_insert(0.0) += p;
        }
    }
    WorkDistribution::new(Axis::DeltaOmega, meta, probabilities)
}

/// `P(|ω_f|)` from the second-measurement marginal.
pub fn abs_final_distribution(t: &TransitionMatrix, meta: DistributionMeta) -> Result<WorkDistribution> {
    let mut probabilities = BTreeMap::new();
    for (&p, &wf) in t.final_marginal().iter().zip(&t.final_values) {
        *probabilities.entry(wf.abs()).or_insert(0.0) += p;
    }
    WorkDistribution::new(Axis::AbsFinal, meta, probabilities)
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            carry += (sum - t) + x;
        } else {
            carry += (x - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Weighted exponential average `Σ w(k) e^{−k}` over integer keys, with the
/// largest exponent factored out before summation.
pub fn exponential_average_of(weights: impl Iterator<Item = (i64, f64)> + Clone) -> f64 {
    let shift = weights
        .clone()
        .filter(|&(_, p)| p > 0.0)
        .map(|(k, _)| -k)
        .max()
        .unwrap_or(0);
    let scaled = compensated_sum(weights.map(|(k, p)| (-(k + shift) as f64).exp() * p));
    scaled * (shift as f64).exp()
}

/// `⟨e^{−Δω}⟩ = Σ_Δω e^{−Δω} P(Δω)`.
pub fn exponential_average(p: &WorkDistribution) -> f64 {
    exponential_average_of(p.iter())
}

/// `γ = tr[e^{−Ω_f} E(M(ρ0) e^{Ω_i})]`.
///
/// Evolves the single operator `M(ρ0) e^{Ω_i}` instead of the individual
/// measurement blocks, so it shares no intermediate with
/// [`transition_matrix`].
pub fn efficacy(state: &QuantumState, omega_i: &Observable, omega_f: &Observable, map: &dyn QuantumMap) -> Result<f64> {
    let dim = map.dim();
    check_dims(dim, omega_i, omega_f)?;
    if state.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.dim(),
        });
    }
    let measured = post_measurement_state(&state.density_matrix(), omega_i)?;
    let weighted = measured * omega_i.function(|w| w.exp());
    let evolved = map
        .apply_operators(core::slice::from_ref(&weighted))?
        .into_iter()
        .next()
        .ok_or(Error::EmptyDistribution)?;
    let terms: Vec<f64> = omega_f
        .spaces()
        .iter()
        .map(|space| (-space.value).exp() * space.weight(&evolved).re)
        .collect();
    Ok(compensated_sum(terms.into_iter()))
}

/// The ideal annealer's `P(|ω_f|)`: a point mass at `L − 1`.
pub fn ideal_distribution(length: usize) -> Result<WorkDistribution> {
    if length < 2 {
        return Err(Error::invalid("chain", format!("length {length} is below 2")));
    }
    let mut probabilities = BTreeMap::new();
    probabilities.insert(length as i64 - 1, 1.0);
    WorkDistribution::new(
        Axis::AbsFinal,
        DistributionMeta {
            length,
            ..Default::default()
        },
        probabilities,
    )
}

/// `count` seeded categorical draws of the distribution's keys.
pub fn sample_shots(p: &WorkDistribution, count: u64, seed: u64) -> Result<BTreeMap<i64, u64>> {
    if count == 0 {
        return Err(Error::invalid("shots", "need at least one shot"));
    }
    let keys: Vec<i64> = p.probabilities.keys().copied().collect();
    let weights: Vec<f64> = p.probabilities.values().map(|&w| w.max(0.0)).collect();
    let indices = draw(&weights, count, seed)?;
    Ok(indices.into_iter().map(|(i, c)| (keys[i], c)).collect())
}

/// `count` seeded z-basis measurements of `state`, archived as spins.
pub fn sample_bitstrings(state: &QuantumState, meta: ArchiveMeta, count: u64, seed: u64) -> Result<ShotArchive> {
    if count == 0 {
        return Err(Error::invalid("shots", "need at least one shot"));
    }
    if state.dim() != 1 << meta.length {
        return Err(Error::DimensionMismatch {
            expected: 1 << meta.length,
            found: state.dim(),
        });
    }
    sample_readouts(&state.z_probabilities(), meta, count, seed)
}

/// `count` seeded draws from a z-basis readout distribution (one weight
/// per computational basis state), archived as spins.
pub fn sample_readouts(weights: &[f64], meta: ArchiveMeta, count: u64, seed: u64) -> Result<ShotArchive> {
    if count == 0 {
        return Err(Error::invalid("shots", "need at least one shot"));
    }
    if weights.len() != 1 << meta.length {
        return Err(Error::DimensionMismatch {
            expected: 1 << meta.length,
            found: weights.len(),
        });
    }
    let samples = draw(weights, count, seed)?
        .into_iter()
        .map(|(index, count)| SpinSample {
            spins: spins_of_index(index, meta.length),
            count,
        })
        .collect();
    ShotArchive::new(meta, samples)
}

fn draw(weights: &[f64], count: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
    let dist = WeightedIndex::new(weights).map_err(|_| Error::EmptyDistribution)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = BTreeMap::new();
    for _ in 0..count {
        *tally.entry(dist.sample(&mut rng)).or_insert(0) += 1;
    }
    Ok(tally)
}
