//! The Ising chain, its annealing schedule, the two measured observables,
//! and the quantum states they act on.
//!
//! Basis conventions used throughout the crate: site `n` (0-based) is the
//! `n`-th tensor factor, stored in bit `L-1-n` of a basis index. A clear
//! bit is spin up (`σz = +1`), a set bit spin down, so index 0 is
//! `|↑↑…↑⟩`. Hamiltonians are stored as `H/(2πħ)` in GHz and times in
//! microseconds.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Complex;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, hermiticity_defect, max_abs, CMatrix, CVector, Eigh, RMatrix, ONE, ZERO};
use crate::{Error, Result, DEFAULT_MAX_SPINS};

/// Dimensionless propagator exponent per GHz·µs: `2π · 10³`.
pub const PHASE_PER_GHZ_US: f64 = 2.0 * core::f64::consts::PI * 1.0e3;

/// Default relative tolerance for merging nearly equal eigenvalues.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Minimum spectral gap for a ground state to count as non-degenerate.
pub const GROUND_GAP_TOLERANCE: f64 = 1e-9;

const STATE_TOLERANCE: f64 = 1e-10;

/// Spin up (`+1`) or down (`-1`) for site `site` of basis index `index`.
#[inline]
pub fn spin_of(index: usize, site: usize, length: usize) -> i32 {
    if (index >> (length - 1 - site)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// An open transverse-field Ising chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    couplings: Vec<f64>,
    fields: Vec<f64>,
}

impl ChainSpec {
    /// Chain with the given bond couplings and zero longitudinal fields.
    pub fn new(couplings: Vec<f64>) -> Result<Self> {
        let fields = vec![0.0; couplings.len() + 1];
        Self::with_fields(couplings, fields)
    }

    /// `length` spins joined by identical couplings `j`.
    pub fn uniform(length: usize, j: f64) -> Result<Self> {
        if length < 2 {
            return Err(Error::invalid("chain", format!("length {length} is below 2")));
        }
        Self::new(vec![j; length - 1])
    }

    pub fn with_fields(couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        Self::with_capacity(couplings, fields, DEFAULT_MAX_SPINS)
    }

    /// Like [`ChainSpec::with_fields`] but with an explicit spin limit.
    pub fn with_capacity(couplings: Vec<f64>, fields: Vec<f64>, max_spins: usize) -> Result<Self> {
        let length = couplings.len() + 1;
        if couplings.is_empty() {
            return Err(Error::invalid("chain", "need at least one coupling (two spins)"));
        }
        if fields.len() != length {
            return Err(Error::invalid(
                "chain",
                format!("{} fields given for {} spins", fields.len(), length),
            ));
        }
        if couplings.iter().chain(fields.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("chain", "couplings and fields must be finite"));
        }
        if couplings.iter().all(|&j| j == 0.0) {
            return Err(Error::invalid("chain", "all couplings are zero"));
        }
        if length > max_spins {
            return Err(Error::Capacity {
                requested: length,
                limit: max_spins,
            });
        }
        Ok(ChainSpec { couplings, fields })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Hilbert space dimension `2^L`.
    pub fn dim(&self) -> usize {
        1 << self.len()
    }

    /// True when the chain commutes with the global spin flip.
    pub fn is_flip_symmetric(&self) -> bool {
        self.fields.iter().all(|&h| h == 0.0)
    }

    /// The same chain with every coupling negated.
    pub fn negated(&self) -> ChainSpec {
        ChainSpec {
            couplings: self.couplings.iter().map(|j| -j).collect(),
            fields: self.fields.clone(),
        }
    }

    /// Sign of each coupling (`0` for a vanishing bond).
    pub fn bond_signs(&self) -> Vec<i32> {
        self.couplings
            .iter()
            .map(|&j| {
                if j > 0.0 {
                    1
                } else if j < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect()
    }
}

/// One point of a piecewise-linear annealing schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    /// Normalized time in `[0, 1]`.
    pub s: f64,
    /// Transverse amplitude in GHz.
    pub g: f64,
    /// Problem amplitude in GHz.
    pub delta: f64,
}

impl Knot {
    pub fn new(s: f64, g: f64, delta: f64) -> Self {
        Knot { s, g, delta }
    }
}

/// Amplitudes `g(s)` and `Δ(s)` over an anneal of duration `tau_us`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    tau_us: f64,
    knots: Vec<Knot>,
}

impl AnnealSchedule {
    /// Validated annealing protocol: starts transverse dominated and ends
    /// coupling dominated.
    pub fn from_knots(tau_us: f64, knots: Vec<Knot>) -> Result<Self> {
        let schedule = Self::from_knots_unchecked_endpoints(tau_us, knots)?;
        let first = schedule.knots[0];
        let last = schedule.knots[schedule.knots.len() - 1];
        if !(first.g > first.delta && first.delta >= 0.0) {
            return Err(Error::invalid(
                "schedule",
                format!("need g(0) > delta(0) >= 0, got g={} delta={}", first.g, first.delta),
            ));
        }
        if !(last.delta > last.g && last.g >= 0.0) {
            return Err(Error::invalid(
                "schedule",
                format!("need delta(1) > g(1) >= 0, got g={} delta={}", last.g, last.delta),
            ));
        }
        Ok(schedule)
    }

    /// Fixed amplitudes for the whole duration. Not an annealing protocol;
    /// it has no crossing.
    pub fn constant(tau_us: f64, g: f64, delta: f64) -> Result<Self> {
        Self::from_knots_unchecked_endpoints(tau_us, vec![Knot::new(0.0, g, delta), Knot::new(1.0, g, delta)])
    }

    /// Linear ramp of `g` from 5 to 0.01 GHz and of `Δ` from 0.01 to 5 GHz.
    pub fn default_ramp(tau_us: f64) -> Result<Self> {
        Self::from_knots(tau_us, vec![Knot::new(0.0, 5.0, 0.01), Knot::new(1.0, 0.01, 5.0)])
    }

    fn from_knots_unchecked_endpoints(tau_us: f64, knots: Vec<Knot>) -> Result<Self> {
        if !(tau_us.is_finite() && tau_us > 0.0) {
            return Err(Error::invalid("schedule", format!("tau must be positive, got {tau_us}")));
        }
        if knots.len() < 2 {
            return Err(Error::invalid("schedule", "need at least two knots"));
        }
        if knots.iter().any(|k| !(k.s.is_finite() && k.g.is_finite() && k.delta.is_finite())) {
            return Err(Error::invalid("schedule", "knot values must be finite"));
        }
        if knots.iter().any(|k| k.g < 0.0 || k.delta < 0.0) {
            return Err(Error::invalid("schedule", "amplitudes must be non-negative"));
        }
        if knots[0].s != 0.0 || knots[knots.len() - 1].s != 1.0 {
            return Err(Error::invalid("schedule", "knots must start at s=0 and end at s=1"));
        }
        if knots.windows(2).any(|w| w[1].s <= w[0].s) {
            return Err(Error::invalid("schedule", "knot times must be strictly increasing"));
        }
        Ok(AnnealSchedule { tau_us, knots })
    }

    pub fn tau_us(&self) -> f64 {
        self.tau_us
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// Same shape, different duration.
    pub fn with_tau(&self, tau_us: f64) -> Result<Self> {
        Self::from_knots_unchecked_endpoints(tau_us, self.knots.clone())
    }

    /// `(g(s), Δ(s))` by linear interpolation between knots.
    pub fn amplitudes(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, 1.0);
        let idx = self.knots.partition_point(|k| k.s <= s);
        if idx == 0 {
            let k = self.knots[0];
            return (k.g, k.delta);
        }
        if idx >= self.knots.len() {
            let k = self.knots[self.knots.len() - 1];
            return (k.g, k.delta);
        }
        let a = self.knots[idx - 1];
        let b = self.knots[idx];
        let w = (s - a.s) / (b.s - a.s);
        (a.g + w * (b.g - a.g), a.delta + w * (b.delta - a.delta))
    }
}

/// One eigenvalue of an observable together with an orthonormal basis of
/// its eigenspace (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: f64,
    pub basis: CMatrix,
}

impl Eigenspace {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// `Π x Π` for this eigenspace's projector `Π`.
    pub fn sandwich(&self, x: &CMatrix) -> CMatrix {
        let inner = self.basis.adjoint() * x * &self.basis;
        &self.basis * inner * self.basis.adjoint()
    }

    /// `tr(Π x)`.
    pub fn weight(&self, x: &CMatrix) -> Complex<f64> {
        let mut acc = ZERO;
        for c in 0..self.basis.ncols() {
            let col = self.basis.column(c);
            acc += (col.adjoint() * x * col)[(0, 0)];
        }
        acc
    }

    /// `‖Π ψ‖²`.
    pub fn weight_pure(&self, psi: &CVector) -> f64 {
        (self.basis.adjoint() * psi).norm_squared()
    }
}

/// A Hermitian operator in spectral form with distinct eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    dim: usize,
    spaces: Vec<Eigenspace>,
}

impl Observable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spaces(&self) -> &[Eigenspace] {
        &self.spaces
    }

    pub fn values(&self) -> Vec<f64> {
        self.spaces.iter().map(|e| e.value).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.spaces.iter().map(Eigenspace::rank).collect()
    }

    /// Eigenvalues as exact integers, failing on any non-integral value.
    pub fn integer_values(&self) -> Result<Vec<i64>> {
        self.spaces
            .iter()
            .map(|e| {
                let r = e.value.round();
                if (e.value - r).abs() > 1e-9 {
                    Err(Error::NonIntegerSpectrum { value: e.value })
                } else {
                    Ok(r as i64)
                }
            })
            .collect()
    }

    /// `Σ f(ω) Π` as a dense matrix.
    pub fn function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for space in &self.spaces {
            out += space.projector() * Complex::new(f(space.value), 0.0);
        }
        out
    }

    /// `Σ ω Π`.
    pub fn matrix(&self) -> CMatrix {
        self.function(|w| w)
    }

    /// Largest entry of `Σ Π − I`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self.spaces.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, e| acc + e.projector());
        max_abs(&(sum - CMatrix::identity(self.dim, self.dim)))
    }

    /// Largest entry of `Π_m Π_n − δ_mn Π_m` over all pairs.
    pub fn orthogonality_defect(&self) -> f64 {
        let projectors: Vec<CMatrix> = self.spaces.iter().map(Eigenspace::projector).collect();
        let mut worst: f64 = 0.0;
        for (m, pm) in projectors.iter().enumerate() {
            for (n, pn) in projectors.iter().enumerate() {
                let prod = pm * pn;
                let defect = if m == n { max_abs(&(prod - pm)) } else { max_abs(&prod) };
                worst = worst.max(defect);
            }
        }
        worst
    }

    fn from_diagonal(dim: usize, values: impl Fn(usize) -> i64) -> Self {
        let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for index in 0..dim {
            groups.entry(values(index)).or_default().push(index);
        }
        let spaces = groups
            .into_iter()
            .rev()
            .map(|(value, members)| {
                let mut basis = CMatrix::zeros(dim, members.len());
                for (col, &row) in members.iter().enumerate() {
                    basis[(row, col)] = ONE;
                }
                Eigenspace {
                    value: value as f64,
                    basis,
                }
            })
            .collect();
        Observable { dim, spaces }
    }
}

fn check_length(length: usize) -> Result<()> {
    if length < 2 {
        return Err(Error::invalid("chain", format!("length {length} is below 2")));
    }
    if length > DEFAULT_MAX_SPINS {
        return Err(Error::Capacity {
            requested: length,
            limit: DEFAULT_MAX_SPINS,
        });
    }
    Ok(())
}

/// `H(s)/(2πħ) = −g Σ σx − Δ Σ J σzσz − Δ Σ h σz` in GHz.
pub fn build_hamiltonian(chain: &ChainSpec, schedule: &AnnealSchedule, s: f64) -> Result<RMatrix> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid("normalized time", format!("{s} is outside [0, 1]")));
    }
    let (g, delta) = schedule.amplitudes(s);
    Ok(hamiltonian_with(chain, g, delta))
}

/// Hamiltonian at fixed amplitudes.
pub(crate) fn hamiltonian_with(chain: &ChainSpec, g: f64, delta: f64) -> RMatrix {
    let length = chain.len();
    let dim = chain.dim();
    let mut h = RMatrix::zeros(dim, dim);
    for index in 0..dim {
        let mut classical = 0.0;
        for (n, &j) in chain.couplings().iter().enumerate() {
            classical += j * f64::from(spin_of(index, n, length) * spin_of(index, n + 1, length));
        }
        for (n, &field) in chain.fields().iter().enumerate() {
            classical += field * f64::from(spin_of(index, n, length));
        }
        h[(index, index)] = -delta * classical;
        for bit in 0..length {
            h[(index, index ^ (1 << bit))] = -g;
        }
    }
    h
}

/// `Ω_i = Σ σx − I`, eigenvalues `L−1−2m` with ranks `C(L, m)`.
///
/// Eigenvectors are the product states of `σx` eigenvectors; the basis
/// vector for a set of flipped sites `b` has amplitudes `(−1)^|i∧b| / √2^L`.
pub fn build_omega_initial(length: usize) -> Result<Observable> {
    check_length(length)?;
    let dim = 1usize << length;
    let amplitude = 1.0 / (dim as f64).sqrt();
    let spaces = (0..=length)
        .map(|m| {
            let flips: Vec<usize> = (0..dim).filter(|b| linalg::popcount(*b) == m).collect();
            let mut basis = CMatrix::zeros(dim, flips.len());
            for (col, &b) in flips.iter().enumerate() {
                for i in 0..dim {
                    let sign = if linalg::popcount(i & b).is_multiple_of(2) { 1.0 } else { -1.0 };
                    basis[(i, col)] = Complex::new(sign * amplitude, 0.0);
                }
            }
            Eigenspace {
                value: (length as i64 - 1 - 2 * m as i64) as f64,
                basis,
            }
        })
        .collect();
    Ok(Observable { dim, spaces })
}

/// `Ω_f = Σ σz_n σz_{n+1}`, eigenvalues `L−1−2k` for `k` broken bonds.
pub fn build_omega_final(length: usize) -> Result<Observable> {
    check_length(length)?;
    let signs = vec![1; length - 1];
    Ok(bond_observable(length, &signs))
}

/// `Σ sgn(J_n) σz_n σz_{n+1}`: the final observable aligned with the
/// chain's couplings, so that every classical ground state reads `L−1`.
/// Equals [`build_omega_final`] when all couplings are positive.
pub fn build_omega_final_for(chain: &ChainSpec) -> Result<Observable> {
    check_length(chain.len())?;
    Ok(bond_observable(chain.len(), &chain.bond_signs()))
}

fn bond_observable(length: usize, signs: &[i32]) -> Observable {
    Observable::from_diagonal(1 << length, |index| {
        signs
            .iter()
            .enumerate()
            .map(|(n, &sign)| i64::from(sign * spin_of(index, n, length) * spin_of(index, n + 1, length)))
            .sum()
    })
}

/// Pure or mixed state on `2^L` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(CVector),
    Mixed(CMatrix),
}

impl QuantumState {
    pub fn pure(psi: CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::invalid("state", format!("norm is {norm}, expected 1")));
        }
        Ok(QuantumState::Pure(psi))
    }

    pub fn mixed(rho: CMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::invalid("state", "density matrix is not square"));
        }
        let defect = hermiticity_defect(&rho);
        if defect > STATE_TOLERANCE {
            return Err(Error::invalid("state", format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = linalg::trace(&rho).re;
        if (tr - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::invalid("state", format!("trace is {tr}, expected 1")));
        }
        let lowest = rho.clone().symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if lowest < -STATE_TOLERANCE {
            return Err(Error::invalid("state", format!("negative eigenvalue {lowest:.3e}")));
        }
        Ok(QuantumState::Mixed(rho))
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        QuantumState::Mixed(CMatrix::identity(dim, dim) / Complex::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(psi) => psi.len(),
            QuantumState::Mixed(rho) => rho.nrows(),
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match self {
            QuantumState::Pure(psi) => psi * psi.adjoint(),
            QuantumState::Mixed(rho) => rho.clone(),
        }
    }

    /// Probabilities of each computational basis state.
    pub fn z_probabilities(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure(psi) => psi.iter().map(|a| a.norm_sqr()).collect(),
            QuantumState::Mixed(rho) => (0..rho.nrows()).map(|i| rho[(i, i)].re.max(0.0)).collect(),
        }
    }
}

/// Lowest eigenvector of a real symmetric Hamiltonian.
pub fn ground_state(h: &RMatrix) -> Result<QuantumState> {
    if !h.is_square() {
        return Err(Error::invalid("hamiltonian", "matrix is not square"));
    }
    if linalg::max_abs_real(&(h - h.transpose())) > 1e-12 {
        return Err(Error::invalid("hamiltonian", "matrix is not symmetric"));
    }
    lowest_nondegenerate(Eigh::new(h))
}

fn lowest_nondegenerate(eig: Eigh) -> Result<QuantumState> {
    let mut order: Vec<usize> = (0..eig.values.len()).collect();
    order.sort_by(|&a, &b| eig.values[a].total_cmp(&eig.values[b]));
    if order.len() > 1 {
        let gap = eig.values[order[1]] - eig.values[order[0]];
        if gap < GROUND_GAP_TOLERANCE {
            return Err(Error::DegenerateGroundState {
                gap,
                tolerance: GROUND_GAP_TOLERANCE,
            });
        }
    }
    let column = eig.vectors.column(order[0]);
    let psi = CVector::from_iterator(column.len(), column.iter().map(|&x| Complex::new(x, 0.0)));
    QuantumState::pure(psi.normalize())
}

/// Ground state of `H(0)`: the default initial state of every run.
pub fn initial_state(chain: &ChainSpec, schedule: &AnnealSchedule) -> Result<QuantumState> {
    let h = build_hamiltonian(chain, schedule, 0.0)?;
    if chain.is_flip_symmetric() {
        lowest_nondegenerate(Eigh::flip_symmetric(&h))
    } else {
        ground_state(&h)
    }
}

/// Spectral form of a Hermitian matrix, merging eigenvalues whose spread
/// is within `rel_tolerance · max(1, max|λ|)`.
pub fn spectral_decompose(h: &CMatrix, rel_tolerance: f64) -> Result<Observable> {
    if !h.is_square() {
        return Err(Error::invalid("observable", "matrix is not square"));
    }
    let scale = max_abs(h).max(1.0);
    let defect = hermiticity_defect(h);
    if defect > 1e-10 * scale {
        return Err(Error::invalid("observable", format!("not Hermitian (defect {defect:.3e})")));
    }
    let dim = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let spread = eig.eigenvalues.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let tolerance = rel_tolerance * spread;

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match clusters.last_mut() {
            Some(cluster) if eig.eigenvalues[cluster[0]] - eig.eigenvalues[idx] <= tolerance => cluster.push(idx),
            _ => clusters.push(vec![idx]),
        }
    }
    let spaces = clusters
        .into_iter()
        .map(|members| {
            let value = members.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / members.len() as f64;
            let mut basis = CMatrix::zeros(dim, members.len());
            for (col, &i) in members.iter().enumerate() {
                basis.set_column(col, &eig.eigenvectors.column(i));
            }
            Eigenspace { value, basis }
        })
        .collect();
    Ok(Observable { dim, spaces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::to_complex;

    fn sorted_eigenvalues(h: &RMatrix) -> Vec<f64> {
        let mut v: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn transverse_only_spectrum() {
        let chain = ChainSpec::uniform(2, 1.0).unwrap();
        let h = hamiltonian_with(&chain, 1.0, 0.0);
        assert_close(&sorted_eigenvalues(&h), &[-2.0, 0.0, 0.0, 2.0], 1e-12);
    }

    #[test]
    fn classical_spectrum() {
        let chain = ChainSpec::uniform(2, 1.0).unwrap();
        let h = hamiltonian_with(&chain, 0.0, 1.0);
        assert_close(&sorted_eigenvalues(&h), &[-1.0, -1.0, 1.0, 1.0], 1e-12);
        // −σz⊗σz is diagonal (−1, 1, 1, −1) in the basis ↑↑, ↑↓, ↓↑, ↓↓.
        assert_eq!(h[(0, 0)], -1.0);
        assert_eq!(h[(1, 1)], 1.0);
        assert_eq!(h[(3, 3)], -1.0);
    }

    #[test]
    fn hamiltonian_is_symmetric_and_time_checked() {
        let chain = ChainSpec::with_fields(vec![1.0, -0.5, 2.0], vec![0.1, 0.0, -0.3, 0.2]).unwrap();
        let schedule = AnnealSchedule::default_ramp(1.0).unwrap();
        let h = build_hamiltonian(&chain, &schedule, 0.4).unwrap();
        assert!(linalg::max_abs_real(&(&h - h.transpose())) < 1e-12);
        assert!(build_hamiltonian(&chain, &schedule, 1.5).is_err());
    }

    #[test]
    fn capacity_is_enforced() {
        let err = ChainSpec::uniform(20, 1.0).unwrap_err();
        assert_eq!(err, Error::Capacity { requested: 20, limit: DEFAULT_MAX_SPINS });
        assert!(matches!(build_omega_initial(15), Err(Error::Capacity { .. })));
        assert!(ChainSpec::with_capacity(vec![1.0; 15], vec![0.0; 16], 16).is_ok());
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(vec![0.0, 0.0]).is_err());
        assert!(ChainSpec::new(vec![]).is_err());
        assert!(ChainSpec::new(vec![1.0, f64::NAN]).is_err());
        assert!(ChainSpec::with_fields(vec![1.0], vec![0.0]).is_err());
        assert!(ChainSpec::uniform(1, 1.0).is_err());
    }

    #[test]
    fn schedule_validation_and_interpolation() {
        assert!(AnnealSchedule::from_knots(1.0, vec![Knot::new(0.0, 1.0, 2.0), Knot::new(1.0, 0.0, 3.0)]).is_err());
        assert!(AnnealSchedule::from_knots(1.0, vec![Knot::new(0.0, 3.0, 0.0), Knot::new(1.0, 2.0, 1.0)]).is_err());
        assert!(AnnealSchedule::from_knots(0.0, vec![Knot::new(0.0, 3.0, 0.0), Knot::new(1.0, 0.0, 1.0)]).is_err());
        assert!(AnnealSchedule::from_knots(
            1.0,
            vec![Knot::new(0.0, 3.0, 0.0), Knot::new(0.5, 1.0, 1.0), Knot::new(0.5, 0.0, 2.0), Knot::new(1.0, 0.0, 3.0)]
        )
        .is_err());
        let schedule = AnnealSchedule::from_knots(
            2.0,
            vec![Knot::new(0.0, 4.0, 0.0), Knot::new(0.25, 2.0, 1.0), Knot::new(1.0, 0.0, 4.0)],
        )
        .unwrap();
        assert_eq!(schedule.amplitudes(0.0), (4.0, 0.0));
        assert_eq!(schedule.amplitudes(0.125), (3.0, 0.5));
        assert_eq!(schedule.amplitudes(0.25), (2.0, 1.0));
        let (g, d) = schedule.amplitudes(0.625);
        assert!((g - 1.0).abs() < 1e-15 && (d - 2.5).abs() < 1e-15);
        assert_eq!(schedule.amplitudes(1.0), (0.0, 4.0));
        let default = AnnealSchedule::default_ramp(3.0).unwrap();
        assert_eq!(default.amplitudes(0.0), (5.0, 0.01));
        assert_eq!(default.amplitudes(1.0), (0.01, 5.0));
    }

    #[test]
    fn omega_initial_small_chains() {
        let two = build_omega_initial(2).unwrap();
        assert_eq!(two.values(), vec![1.0, -1.0, -3.0]);
        assert_eq!(two.ranks(), vec![1, 2, 1]);
        let three = build_omega_initial(3).unwrap();
        assert_eq!(three.values()[0], 2.0);
        assert_eq!(three.ranks()[0], 1);
        let five = build_omega_initial(5).unwrap();
        assert_eq!(five.ranks().iter().sum::<usize>(), 32);
        assert!(five.completeness_defect() < 1e-10);
        assert!(five.orthogonality_defect() < 1e-10);
    }

    #[test]
    fn omega_final_small_chains() {
        let two = build_omega_final(2).unwrap();
        assert_eq!(two.values(), vec![1.0, -1.0]);
        assert_eq!(two.ranks(), vec![2, 2]);
        // ↑↑ and ↓↓ carry +1.
        assert_eq!(two.spaces()[0].basis[(0, 0)], ONE);
        assert_eq!(two.spaces()[0].basis[(3, 1)], ONE);
        let three = build_omega_final(3).unwrap();
        assert_eq!(three.values(), vec![2.0, 0.0, -2.0]);
        assert_eq!(three.ranks(), vec![2, 4, 2]);
        for length in 2..=9 {
            let omega = build_omega_final(length).unwrap();
            assert_eq!(omega.values()[0], (length - 1) as f64);
            assert_eq!(omega.ranks()[0], 2);
        }
    }

    #[test]
    fn signed_final_observable_tracks_couplings() {
        let chain = ChainSpec::new(vec![1.0, -2.0, 0.5]).unwrap();
        let omega = build_omega_final_for(&chain).unwrap();
        assert_eq!(omega.values()[0], 3.0);
        assert_eq!(omega.ranks()[0], 2);
        // ↑↑↓↓ satisfies +,−,+ bonds.
        let top = &omega.spaces()[0];
        assert_eq!(top.weight_pure(&CVector::from_fn(16, |i, _| if i == 0b0011 { ONE } else { ZERO })), 1.0);
        let ferro = ChainSpec::uniform(4, 0.3).unwrap();
        assert_eq!(build_omega_final_for(&ferro).unwrap(), build_omega_final(4).unwrap());
    }

    #[test]
    fn omega_initial_commutes_with_transverse_hamiltonian() {
        let chain = ChainSpec::uniform(4, 1.0).unwrap();
        let schedule = AnnealSchedule::from_knots(1.0, vec![Knot::new(0.0, 2.0, 0.0), Knot::new(1.0, 0.0, 2.0)]).unwrap();
        let h0 = to_complex(&build_hamiltonian(&chain, &schedule, 0.0).unwrap());
        let omega = build_omega_initial(4).unwrap().matrix();
        assert!(max_abs(&(&omega * &h0 - &h0 * &omega)) <= 1e-10);
    }

    #[test]
    fn ground_state_of_transverse_field_is_all_right() {
        let chain = ChainSpec::uniform(3, 1.0).unwrap();
        let h = hamiltonian_with(&chain, 1.0, 0.0);
        let QuantumState::Pure(psi) = ground_state(&h).unwrap() else {
            panic!("ground state should be pure")
        };
        let right = CVector::from_element(8, Complex::new(1.0 / 8f64.sqrt(), 0.0));
        assert!(((right.adjoint() * &psi)[(0, 0)].norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn classical_ferromagnet_ground_state_is_degenerate() {
        let chain = ChainSpec::uniform(4, 1.0).unwrap();
        let h = hamiltonian_with(&chain, 0.0, 1.0);
        assert!(matches!(ground_state(&h), Err(Error::DegenerateGroundState { .. })));
    }

    #[test]
    fn spectral_decompose_identity_and_zz() {
        let id = spectral_decompose(&CMatrix::identity(4, 4), CLUSTER_TOLERANCE).unwrap();
        assert_eq!(id.values().len(), 1);
        assert!((id.values()[0] - 1.0).abs() < 1e-12);
        assert!(max_abs(&(id.spaces()[0].projector() - CMatrix::identity(4, 4))) < 1e-12);
        let zz = build_omega_final(2).unwrap().matrix();
        let decomposed = spectral_decompose(&zz, CLUSTER_TOLERANCE).unwrap();
        assert_eq!(decomposed.ranks(), vec![2, 2]);
        assert!(spectral_decompose(&CMatrix::from_fn(2, 2, |i, j| Complex::new((i + 2 * j) as f64, 0.0)), 1e-8).is_err());
    }

    #[test]
    fn quantum_state_validation() {
        assert!(QuantumState::pure(CVector::from_element(4, ONE)).is_err());
        assert!(QuantumState::pure(CVector::from_element(4, Complex::new(0.5, 0.0))).is_ok());
        assert!(QuantumState::mixed(CMatrix::identity(2, 2)).is_err());
        let mut bad = CMatrix::identity(2, 2) * Complex::new(0.5, 0.0);
        bad[(0, 1)] = Complex::new(0.9, 0.0);
        bad[(1, 0)] = Complex::new(0.9, 0.0);
        assert!(QuantumState::mixed(bad).is_err());
        assert!(QuantumState::mixed(QuantumState::maximally_mixed(8).density_matrix()).is_ok());
    }
}
