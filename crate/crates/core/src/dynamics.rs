//! Time evolution over an anneal.
//!
//! The anneal is cut into `steps` slices of length `δt = τ/steps`. Each
//! slice applies the exact exponential of the Hamiltonian frozen at the
//! slice midpoint, `exp(−i 2π H(s_k) δt · 10³)` with `s_k = (k + ½)/steps`,
//! followed (for noisy runs) by one application of the single-qubit
//! channel on every site.
//!
//! Operators are propagated through the slice eigendecomposition. State
//! vectors of closed runs instead get the same slice exponential applied as
//! a Chebyshev series in the sparse Hamiltonian, which costs `O(2^L · L)`
//! per term rather than `O(8^L)` per slice and so makes the fine slicing
//! of long adiabatic anneals affordable.

use alloc::vec::Vec;

use nalgebra::Complex;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMatrix, Eigh};
use crate::model::{hamiltonian_with, AnnealSchedule, ChainSpec, QuantumState, PHASE_PER_GHZ_US};
use crate::noise::{self, KrausSet, NoiseModel};
use crate::{Error, Result};

pub const DEFAULT_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub steps: usize,
}

impl EvolutionConfig {
    pub fn new(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("evolution", "steps must be at least 1"));
        }
        Ok(EvolutionConfig { steps })
    }
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig { steps: DEFAULT_STEPS }
    }
}

/// A linear, trace-preserving evolution `E_τ`.
pub trait QuantumMap {
    fn dim(&self) -> usize;

    /// Applies the map to each operator. The map is linear, so the inputs
    /// need not be states.
    fn apply_operators(&self, inputs: &[CMatrix]) -> Result<Vec<CMatrix>>;

    /// For unitary maps, `U` applied to every column. `None` otherwise.
    fn apply_columns(&self, _columns: &CMatrix) -> Option<Result<CMatrix>> {
        None
    }
}

/// `E(X) = X`.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap {
    pub dim: usize,
}

impl QuantumMap for IdentityMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_operators(&self, inputs: &[CMatrix]) -> Result<Vec<CMatrix>> {
        inputs.iter().map(|x| check_dim(x, self.dim).map(|_| x.clone())).collect()
    }

    fn apply_columns(&self, columns: &CMatrix) -> Option<Result<CMatrix>> {
        Some(if columns.nrows() == self.dim {
            Ok(columns.clone())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: columns.nrows(),
            })
        })
    }
}

/// `E(X) = tr(X) · I / dim`.
#[derive(Debug, Clone, Copy)]
pub struct CompleteDepolarizing {
    pub dim: usize,
}

impl QuantumMap for CompleteDepolarizing {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_operators(&self, inputs: &[CMatrix]) -> Result<Vec<CMatrix>> {
        inputs
            .iter()
            .map(|x| {
                check_dim(x, self.dim)?;
                let scale = linalg::trace(x) / Complex::new(self.dim as f64, 0.0);
                Ok(CMatrix::identity(self.dim, self.dim) * scale)
            })
            .collect()
    }
}

fn check_dim(x: &CMatrix, dim: usize) -> Result<()> {
    if x.nrows() != dim || x.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.nrows(),
        });
    }
    Ok(())
}

/// The annealing evolution of a chain, optionally with homogeneous noise.
#[derive(Debug, Clone)]
pub struct AnnealMap {
    chain: ChainSpec,
    schedule: AnnealSchedule,
    noise: NoiseModel,
    steps: usize,
    channel: KrausSet,
}

impl AnnealMap {
    pub fn new(chain: &ChainSpec, schedule: &AnnealSchedule, noise: &NoiseModel, config: EvolutionConfig) -> Result<Self> {
        let config = EvolutionConfig::new(config.steps)?;
        let dt = schedule.tau_us() / config.steps as f64;
        let channel = noise::kraus_for(noise, noise.slice_probability(dt))?;
        Ok(AnnealMap {
            chain: chain.clone(),
            schedule: schedule.clone(),
            noise: *noise,
            steps: config.steps,
            channel,
        })
    }

    pub fn unitary(chain: &ChainSpec, schedule: &AnnealSchedule, config: EvolutionConfig) -> Result<Self> {
        Self::new(chain, schedule, &NoiseModel::none(), config)
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Kraus set applied after every slice.
    pub fn slice_channel(&self) -> &KrausSet {
        &self.channel
    }

    pub fn is_unitary(&self) -> bool {
        self.channel.is_identity()
    }

    fn slice(&self, k: usize) -> (Eigh, Vec<linalg::C64>) {
        let s = (k as f64 + 0.5) / self.steps as f64;
        let (g, delta) = self.schedule.amplitudes(s);
        let h = hamiltonian_with(&self.chain, g, delta);
        let eig = if self.chain.is_flip_symmetric() {
            Eigh::flip_symmetric(&h)
        } else {
            Eigh::new(&h)
        };
        let dt = self.schedule.tau_us() / self.steps as f64;
        let phases = eig.phases(PHASE_PER_GHZ_US * dt);
        (eig, phases)
    }

    /// The composed unitary `U_τ` (noise is ignored).
    pub fn propagator(&self) -> CMatrix {
        let dim = self.chain.dim();
        let mut u = CMatrix::identity(dim, dim);
        for k in 0..self.steps {
            let (eig, phases) = self.slice(k);
            u = eig.rotate_columns(&u, &phases);
        }
        u
    }
}

impl QuantumMap for AnnealMap {
    fn dim(&self) -> usize {
        self.chain.dim()
    }

    fn apply_operators(&self, inputs: &[CMatrix]) -> Result<Vec<CMatrix>> {
        for x in inputs {
            check_dim(x, self.dim())?;
        }
        let mut current: Vec<CMatrix> = inputs.to_vec();
        let length = self.chain.len();
        for k in 0..self.steps {
            let (eig, phases) = self.slice(k);
            for x in current.iter_mut() {
                *x = eig.conjugate(x, &phases);
                if !self.channel.is_identity() {
                    *x = noise::apply_uniform(x, &self.channel, length)?;
                }
            }
        }
        Ok(current)
    }

    fn apply_columns(&self, columns: &CMatrix) -> Option<Result<CMatrix>> {
        if !self.is_unitary() {
            return None;
        }
        if columns.nrows() != self.dim() {
            return Some(Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: columns.nrows(),
            }));
        }
        let sparse = SparseHamiltonian::new(&self.chain);
        let dt = self.schedule.tau_us() / self.steps as f64;
        let theta = PHASE_PER_GHZ_US * dt;
        let mut psi = columns.clone();
        let mut work = ChebyshevWork::new(psi.nrows(), psi.ncols());
        for k in 0..self.steps {
            let s = (k as f64 + 0.5) / self.steps as f64;
            let (g, delta) = self.schedule.amplitudes(s);
            if sparse.prefers_series(g, delta, theta, psi.ncols(), self.chain.is_flip_symmetric()) {
                sparse.evolve(&mut psi, g, delta, theta, &mut work);
            } else {
                let (eig, phases) = self.slice(k);
                psi = eig.rotate_columns(&psi, &phases);
            }
        }
        Some(Ok(psi))
    }
}

/// `H = −Δ·(Σ J σzσz + Σ h σz) − g Σ σx` as a diagonal plus bit flips.
struct SparseHamiltonian {
    length: usize,
    classical: Vec<f64>,
    classical_bound: f64,
}

/// Chebyshev recursion buffers, one column block each.
struct ChebyshevWork {
    previous: CMatrix,
    current: CMatrix,
    next: CMatrix,
    sum: CMatrix,
}

impl ChebyshevWork {
    fn new(rows: usize, cols: usize) -> Self {
        let zero = || CMatrix::zeros(rows, cols);
        ChebyshevWork {
            previous: zero(),
            current: zero(),
            next: zero(),
            sum: zero(),
        }
    }
}

/// Relative size below which trailing Chebyshev terms are dropped.
const CHEBYSHEV_CUTOFF: f64 = 1e-17;

impl SparseHamiltonian {
    fn new(chain: &ChainSpec) -> Self {
        let h = hamiltonian_with(chain, 0.0, -1.0);
        let classical: Vec<f64> = (0..chain.dim()).map(|i| h[(i, i)]).collect();
        let classical_bound = classical.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        SparseHamiltonian {
            length: chain.len(),
            classical,
            classical_bound,
        }
    }

    fn spectral_bound(&self, g: f64, delta: f64) -> f64 {
        g.abs() * self.length as f64 + delta.abs() * self.classical_bound
    }

    /// Rough operation counts of one slice by series versus by dense
    /// eigendecomposition (measured constants, same units).
    fn prefers_series(&self, g: f64, delta: f64, theta: f64, columns: usize, flip_symmetric: bool) -> bool {
        let n = self.classical.len() as f64;
        let terms = theta * self.spectral_bound(g, delta) + 20.0;
        let series = 1.3 * terms * n * (self.length + 1) as f64 * columns as f64;
        let cube = if flip_symmetric { n * n * n / 4.0 } else { n * n * n };
        let dense = 2.5 * cube + 2.0 * n * n * columns as f64;
        series < dense
    }

    /// `out = (H/scale)·x` column by column.
    fn apply_scaled(&self, x: &CMatrix, out: &mut CMatrix, g: f64, delta: f64, scale: f64) {
        let dim = x.nrows();
        let flip = -g / scale;
        for c in 0..x.ncols() {
            let xs = x.column(c);
            let mut ys = out.column_mut(c);
            for i in 0..dim {
                let mut acc = xs[i] * (-delta * self.classical[i] / scale);
                for bit in 0..self.length {
                    acc += xs[i ^ (1 << bit)] * flip;
                }
                ys[i] = acc;
            }
        }
    }

    /// `x ← exp(−i θ H) x` for the Hamiltonian at amplitudes `(g, Δ)`.
    fn evolve(&self, x: &mut CMatrix, g: f64, delta: f64, theta: f64, w: &mut ChebyshevWork) {
        let scale = self.spectral_bound(g, delta);
        if scale == 0.0 || theta == 0.0 {
            return;
        }
        let coefficients = bessel_sequence(theta * scale);
        // exp(−i x cos φ) = Σ (2 − δ_k0) (−i)^k J_k(x) T_k(cos φ).
        let weight = |k: usize| {
            let j = coefficients[k] * if k == 0 { 1.0 } else { 2.0 };
            match k % 4 {
                0 => Complex::new(j, 0.0),
                1 => Complex::new(0.0, -j),
                2 => Complex::new(-j, 0.0),
                _ => Complex::new(0.0, j),
            }
        };
        w.previous.copy_from(x);
        w.sum.copy_from(x);
        w.sum *= weight(0);
        if coefficients.len() > 1 {
            self.apply_scaled(&w.previous, &mut w.current, g, delta, scale);
            accumulate(&mut w.sum, weight(1), &w.current);
        }
        for k in 2..coefficients.len() {
            self.apply_scaled(&w.current, &mut w.next, g, delta, scale);
            w.next *= Complex::new(2.0, 0.0);
            w.next -= &w.previous;
            accumulate(&mut w.sum, weight(k), &w.next);
            core::mem::swap(&mut w.previous, &mut w.current);
            core::mem::swap(&mut w.current, &mut w.next);
        }
        x.copy_from(&w.sum);
    }
}

fn accumulate(sum: &mut CMatrix, a: linalg::C64, x: &CMatrix) {
    for (s, v) in sum.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *s += a * v;
    }
}

/// `J_0(x), J_1(x), …` by Miller's backward recurrence, truncated once the
/// terms past the turning point `k ≈ x` fall below the cutoff.
fn bessel_sequence(x: f64) -> Vec<f64> {
    let x = x.abs();
    if x < 1e-300 {
        return alloc::vec![1.0];
    }
    let reach = x + 12.0 * x.powf(1.0 / 3.0) + 40.0;
    let start = 2 * ((reach as usize + 2) / 2);
    let mut values = alloc::vec![0.0; start + 2];
    values[start] = 1e-300;
    for k in (1..=start).rev() {
        values[k - 1] = 2.0 * k as f64 / x * values[k] - values[k + 1];
        if values[k - 1].abs() > 1e250 {
            for v in values[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // J_0 + 2 Σ J_{2k} = 1.
    let norm = values[0] + 2.0 * values[2..].iter().step_by(2).sum::<f64>();
    for v in values.iter_mut() {
        *v /= norm;
    }
    let mut keep = values.len();
    while keep > 1 && (keep as f64 - 1.0) > x && values[keep - 1].abs() < CHEBYSHEV_CUTOFF {
        keep -= 1;
    }
    values.truncate(keep);
    values
}

fn check_state(state: &QuantumState, dim: usize) -> Result<()> {
    if state.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.dim(),
        });
    }
    match state {
        QuantumState::Pure(psi) => {
            let norm = psi.norm();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::invalid("state", alloc::format!("norm is {norm}, expected 1")));
            }
            Ok(())
        }
        QuantumState::Mixed(rho) => QuantumState::mixed(rho.clone()).map(|_| ()),
    }
}

/// Closed-system evolution of a pure or mixed state.
pub fn evolve_unitary(
    state: &QuantumState,
    chain: &ChainSpec,
    schedule: &AnnealSchedule,
    config: EvolutionConfig,
) -> Result<QuantumState> {
    let map = AnnealMap::unitary(chain, schedule, config)?;
    check_state(state, map.dim())?;
    match state {
        QuantumState::Pure(psi) => {
            let column = CMatrix::from_column_slice(psi.len(), 1, psi.as_slice());
            let out = map.apply_columns(&column).expect("noiseless map is unitary")?;
            Ok(QuantumState::Pure(out.column(0).into_owned()))
        }
        QuantumState::Mixed(rho) => {
            let out = map.apply_operators(core::slice::from_ref(rho))?;
            Ok(QuantumState::Mixed(out.into_iter().next().expect("one output")))
        }
    }
}

/// Noisy evolution of a density matrix: slice unitary, then the channel on
/// every site.
pub fn evolve_channel(
    rho: &CMatrix,
    chain: &ChainSpec,
    schedule: &AnnealSchedule,
    noise: &NoiseModel,
    config: EvolutionConfig,
) -> Result<CMatrix> {
    let map = AnnealMap::new(chain, schedule, noise, config)?;
    check_state(&QuantumState::Mixed(rho.clone()), map.dim())?;
    let out = map.apply_operators(core::slice::from_ref(rho))?;
    Ok(out.into_iter().next().expect("one output"))
}
