//! Homogeneous single-qubit Kraus channels.
//!
//! Amplitude damping relaxes toward `|↑⟩` (`σz = +1`, basis bit 0).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{Complex, Matrix2};
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, C64, ZERO};
use crate::{Error, Result};

/// Tolerance for trace preservation and unitality of a Kraus set.
pub const KRAUS_TOLERANCE: f64 = 1e-12;

pub type Kraus = Matrix2<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    Dephasing,
    Depolarizing,
    AmplitudeDamping,
    /// Generalized amplitude damping; `excitation` is the weight of decay
    /// toward `|↓⟩`.
    Thermal { excitation: f64 },
}

/// A channel family and its strength in events per microsecond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub rate_per_us: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, rate_per_us: f64) -> Result<Self> {
        if !(rate_per_us.is_finite() && rate_per_us >= 0.0) {
            return Err(Error::invalid("noise", format!("rate must be non-negative, got {rate_per_us}")));
        }
        if let NoiseKind::Thermal { excitation } = kind {
            if !(0.0..=1.0).contains(&excitation) {
                return Err(Error::invalid(
                    "noise",
                    format!("excitation fraction {excitation} is outside [0, 1]"),
                ));
            }
        }
        Ok(NoiseModel { kind, rate_per_us })
    }

    pub fn none() -> Self {
        NoiseModel {
            kind: NoiseKind::None,
            rate_per_us: 0.0,
        }
    }

    /// True when no slice ever applies a non-identity channel.
    pub fn is_silent(&self) -> bool {
        matches!(self.kind, NoiseKind::None) || self.rate_per_us == 0.0
    }

    /// Per-slice event probability `rate · δt`, capped at 1.
    pub fn slice_probability(&self, dt_us: f64) -> f64 {
        let p = self.rate_per_us * dt_us;
        if p > 1.0 {
            log::warn!("noise probability per slice {p:.3} exceeds 1; capping at 1");
            1.0
        } else {
            p
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::None => write!(f, "none"),
            NoiseKind::Dephasing => write!(f, "dephasing:{}", self.rate_per_us),
            NoiseKind::Depolarizing => write!(f, "depolarizing:{}", self.rate_per_us),
            NoiseKind::AmplitudeDamping => write!(f, "amplitude_damping:{}", self.rate_per_us),
            NoiseKind::Thermal { excitation } => write!(f, "thermal:{}:{}", self.rate_per_us, excitation),
        }
    }
}

/// Parses `kind:rate[:excitation]`, e.g. `dephasing:0.02` or
/// `thermal:0.05:0.1`. A bare `none` disables noise.
impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let number = |text: &str, what: &str| -> Result<f64> {
            text.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid("noise", format!("cannot parse {what} from {text:?}")))
        };
        let kind_name = parts[0].trim().to_ascii_lowercase().replace('-', "_");
        let kind = match (kind_name.as_str(), parts.len()) {
            ("none", 1) => return Ok(NoiseModel::none()),
            ("dephasing", 2) => NoiseKind::Dephasing,
            ("depolarizing", 2) => NoiseKind::Depolarizing,
            ("amplitude_damping", 2) => NoiseKind::AmplitudeDamping,
            ("thermal", 3) => NoiseKind::Thermal {
                excitation: number(parts[2], "excitation fraction")?,
            },
            _ => {
                return Err(Error::invalid(
                    "noise",
                    format!("expected kind:rate[:excitation] with a known kind, got {s:?}"),
                ))
            }
        };
        NoiseModel::new(kind, number(parts[1], "rate")?)
    }
}

/// Kraus operators of a single-qubit channel.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<Kraus>,
}

impl KrausSet {
    /// Validated set; must satisfy `Σ K†K = I` to [`KRAUS_TOLERANCE`].
    pub fn new(ops: Vec<Kraus>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::invalid("kraus set", "no operators"));
        }
        let set = KrausSet { ops };
        let deviation = set.trace_preservation_defect();
        if deviation > KRAUS_TOLERANCE {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(set)
    }

    pub fn identity() -> Self {
        KrausSet {
            ops: vec![Kraus::identity()],
        }
    }

    pub fn ops(&self) -> &[Kraus] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.len() == 1 && self.ops[0] == Kraus::identity()
    }

    /// `max |Σ K†K − I|`.
    pub fn trace_preservation_defect(&self) -> f64 {
        let sum: Kraus = self.ops.iter().map(|k| k.adjoint() * k).sum();
        max_entry(&(sum - Kraus::identity()))
    }

    /// `Σ K ⊗ conj(K)` acting on a row-major 2×2 block `[a00, a01, a10, a11]`.
    fn superoperator(&self) -> [[C64; 4]; 4] {
        let mut s = [[ZERO; 4]; 4];
        for k in &self.ops {
            for (row, out) in s.iter_mut().enumerate() {
                let (i, j) = (row / 2, row % 2);
                for (col, entry) in out.iter_mut().enumerate() {
                    let (a, b) = (col / 2, col % 2);
                    *entry += k[(i, a)] * k[(j, b)].conj();
                }
            }
        }
        s
    }
}

fn max_entry(m: &Kraus) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm_sqr().sqrt()))
}

fn real(x: f64) -> C64 {
    Complex::new(x, 0.0)
}

fn decay_to_up(damping: f64, weight: f64) -> [Kraus; 2] {
    let w = weight.sqrt();
    [
        Kraus::new(real(w), ZERO, ZERO, real(w * (1.0 - damping).sqrt())),
        Kraus::new(ZERO, real(w * damping.sqrt()), ZERO, ZERO),
    ]
}

fn decay_to_down(damping: f64, weight: f64) -> [Kraus; 2] {
    let w = weight.sqrt();
    [
        Kraus::new(real(w * (1.0 - damping).sqrt()), ZERO, ZERO, real(w)),
        Kraus::new(ZERO, ZERO, real(w * damping.sqrt()), ZERO),
    ]
}

/// Kraus operators for one slice of `model` with event probability `p`.
pub fn kraus_for(model: &NoiseModel, p: f64) -> Result<KrausSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("noise", format!("slice probability {p} is outside [0, 1]")));
    }
    if p == 0.0 || matches!(model.kind, NoiseKind::None) {
        return Ok(KrausSet::identity());
    }
    let i = Complex::new(0.0, 1.0);
    let keep = real((1.0 - p).sqrt());
    let ops = match model.kind {
        NoiseKind::None => unreachable!(),
        NoiseKind::Dephasing => {
            let a = real(p.sqrt());
            vec![Kraus::new(keep, ZERO, ZERO, keep), Kraus::new(a, ZERO, ZERO, -a)]
        }
        NoiseKind::Depolarizing => {
            let a = real((p / 3.0).sqrt());
            vec![
                Kraus::new(keep, ZERO, ZERO, keep),
                Kraus::new(ZERO, a, a, ZERO),
                Kraus::new(ZERO, -i * a, i * a, ZERO),
                Kraus::new(a, ZERO, ZERO, -a),
            ]
        }
        NoiseKind::AmplitudeDamping => decay_to_up(p, 1.0).to_vec(),
        NoiseKind::Thermal { excitation } => {
            let mut ops = decay_to_up(p, 1.0 - excitation).to_vec();
            ops.extend(decay_to_down(p, excitation));
            ops
        }
    };
    KrausSet::new(ops)
}

/// Unitality witness: `‖Σ K K† − I‖_max` and whether it is within
/// [`KRAUS_TOLERANCE`].
pub fn is_unital(set: &KrausSet) -> (bool, f64) {
    let sum: Kraus = set.ops.iter().map(|k| k * k.adjoint()).sum();
    let deviation = max_entry(&(sum - Kraus::identity()));
    (deviation <= KRAUS_TOLERANCE, deviation)
}

/// `ρ → Σ K ρ K†` with every `K` acting on `site` of a chain of `length`.
///
/// Linear in `rho`, so it may be applied to any operator, not just states.
pub fn apply_channel(rho: &CMatrix, set: &KrausSet, site: usize, length: usize) -> Result<CMatrix> {
    let dim = 1usize << length;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows(),
        });
    }
    if site >= length {
        return Err(Error::invalid("site", format!("site {site} outside chain of {length}")));
    }
    let mut out = rho.clone();
    apply_superoperator(&mut out, &set.superoperator(), 1 << (length - 1 - site));
    Ok(out)
}

/// The same channel on every site.
pub fn apply_uniform(rho: &CMatrix, set: &KrausSet, length: usize) -> Result<CMatrix> {
    let mut out = rho.clone();
    if set.is_identity() {
        return Ok(out);
    }
    let dim = 1usize << length;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows(),
        });
    }
    let sup = set.superoperator();
    for site in 0..length {
        apply_superoperator(&mut out, &sup, 1 << (length - 1 - site));
    }
    Ok(out)
}

fn apply_superoperator(m: &mut CMatrix, sup: &[[C64; 4]; 4], bit: usize) {
    let dim = m.nrows();
    for r0 in (0..dim).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for c0 in (0..dim).filter(|c| c & bit == 0) {
            let c1 = c0 | bit;
            let block = [m[(r0, c0)], m[(r0, c1)], m[(r1, c0)], m[(r1, c1)]];
            let mut next = [ZERO; 4];
            for (out, row) in next.iter_mut().zip(sup.iter()) {
                *out = row.iter().zip(block.iter()).map(|(a, b)| a * b).sum();
            }
            m[(r0, c0)] = next[0];
            m[(r0, c1)] = next[1];
            m[(r1, c0)] = next[2];
            m[(r1, c1)] = next[3];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, trace};
    use crate::linalg::ONE;
    use crate::model::QuantumState;

    fn all_kinds() -> Vec<NoiseKind> {
        vec![
            NoiseKind::Dephasing,
            NoiseKind::Depolarizing,
            NoiseKind::AmplitudeDamping,
            NoiseKind::Thermal { excitation: 0.2 },
            NoiseKind::Thermal { excitation: 0.5 },
        ]
    }

    fn model(kind: NoiseKind) -> NoiseModel {
        NoiseModel::new(kind, 1.0).unwrap()
    }

    fn random_density(length: usize, seed: u64) -> CMatrix {
        let dim = 1 << length;
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let a = CMatrix::from_fn(dim, dim, |_, _| Complex::new(next(), next()));
        let rho = &a * a.adjoint();
        let tr = trace(&rho);
        rho / tr
    }

    #[test]
    fn zero_probability_is_identity() {
        for kind in all_kinds() {
            let set = kraus_for(&model(kind), 0.0).unwrap();
            assert!(set.is_identity());
        }
    }

    #[test]
    fn every_channel_is_trace_preserving() {
        for kind in all_kinds() {
            for p in [0.0, 0.01, 0.3, 0.75, 1.0] {
                let set = kraus_for(&model(kind), p).unwrap();
                assert!(set.trace_preservation_defect() <= KRAUS_TOLERANCE);
            }
        }
        assert!(kraus_for(&model(NoiseKind::Dephasing), 1.2).is_err());
        assert!(kraus_for(&model(NoiseKind::Dephasing), -0.1).is_err());
    }

    #[test]
    fn unitality_classification() {
        let p = 0.3;
        let (ok, dev) = is_unital(&kraus_for(&model(NoiseKind::Dephasing), 0.5).unwrap());
        assert!(ok && dev <= 1e-15);
        assert!(is_unital(&kraus_for(&model(NoiseKind::Depolarizing), p).unwrap()).0);
        let (ok, dev) = is_unital(&kraus_for(&model(NoiseKind::AmplitudeDamping), p).unwrap());
        assert!(!ok);
        // Σ K K† − I = diag(p, −p).
        assert!((dev - 0.3).abs() < 1e-15);
        assert!(!is_unital(&kraus_for(&model(NoiseKind::Thermal { excitation: 0.2 }), p).unwrap()).0);
        assert!(is_unital(&kraus_for(&model(NoiseKind::Thermal { excitation: 0.5 }), p).unwrap()).0);
    }

    #[test]
    fn rejects_non_trace_preserving_sets() {
        let bad = Kraus::new(real(0.9), ZERO, ZERO, real(1.0));
        assert!(matches!(KrausSet::new(vec![bad]), Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn identity_channel_leaves_state_alone() {
        let rho = random_density(3, 7);
        let out = apply_channel(&rho, &KrausSet::identity(), 1, 3).unwrap();
        assert!(max_abs(&(out - &rho)) < 1e-15);
    }

    #[test]
    fn single_qubit_dephasing_kills_coherence() {
        // |+⟩⟨+| has coherence 1/2; each p = 1/2 dephasing multiplies it by 1 − 2p = 0.
        let rho = CMatrix::from_element(2, 2, real(0.5));
        let set = kraus_for(&model(NoiseKind::Dephasing), 0.5).unwrap();
        let once = apply_channel(&rho, &set, 0, 1).unwrap();
        let twice = apply_channel(&once, &set, 0, 1).unwrap();
        assert!(twice[(0, 1)].norm() < 1e-15);
        assert!((twice[(0, 0)].re - 0.5).abs() < 1e-15);
        let weak = kraus_for(&model(NoiseKind::Dephasing), 0.1).unwrap();
        let damped = apply_channel(&rho, &weak, 0, 1).unwrap();
        assert!((damped[(0, 1)].re - 0.5 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn complete_amplitude_damping_reaches_all_up() {
        let length = 3;
        let rho = random_density(length, 11);
        let set = kraus_for(&model(NoiseKind::AmplitudeDamping), 1.0).unwrap();
        let out = apply_uniform(&rho, &set, length).unwrap();
        let mut expected = CMatrix::zeros(8, 8);
        expected[(0, 0)] = ONE;
        assert!(max_abs(&(out - expected)) < 1e-10);
    }

    #[test]
    fn channel_output_is_a_state() {
        let rho = random_density(3, 5);
        for kind in all_kinds() {
            let set = kraus_for(&model(kind), 0.37).unwrap();
            let out = apply_uniform(&rho, &set, 3).unwrap();
            assert!((trace(&out).re - 1.0).abs() < 1e-12);
            assert!(QuantumState::mixed(out).is_ok());
        }
    }

    #[test]
    fn matches_dense_kronecker_lift() {
        let length = 3;
        let rho = random_density(length, 3);
        let set = kraus_for(&model(NoiseKind::Depolarizing), 0.4).unwrap();
        for site in 0..length {
            let mut expected = CMatrix::zeros(8, 8);
            for k in set.ops() {
                let mut lifted = CMatrix::identity(1, 1);
                for n in 0..length {
                    let factor = if n == site {
                        CMatrix::from_fn(2, 2, |i, j| k[(i, j)])
                    } else {
                        CMatrix::identity(2, 2)
                    };
                    lifted = lifted.kronecker(&factor);
                }
                expected += &lifted * &rho * lifted.adjoint();
            }
            let out = apply_channel(&rho, &set, site, length).unwrap();
            assert!(max_abs(&(out - expected)) < 1e-14);
        }
    }

    #[test]
    fn uniform_noise_commutes_with_chain_reversal() {
        let length = 4;
        let dim = 1 << length;
        let reverse = |i: usize| (0..length).fold(0, |acc, b| acc | (((i >> b) & 1) << (length - 1 - b)));
        let perm = CMatrix::from_fn(dim, dim, |i, j| if reverse(j) == i { ONE } else { ZERO });
        let rho = random_density(length, 9);
        let set = kraus_for(&model(NoiseKind::Thermal { excitation: 0.3 }), 0.2).unwrap();
        let a = apply_uniform(&(&perm * &rho * perm.transpose()), &set, length).unwrap();
        let b = &perm * apply_uniform(&rho, &set, length).unwrap() * perm.transpose();
        assert!(max_abs(&(a - b)) < 1e-14);
    }

    #[test]
    fn parses_cli_syntax() {
        assert_eq!("dephasing:0.02".parse::<NoiseModel>().unwrap(), NoiseModel::new(NoiseKind::Dephasing, 0.02).unwrap());
        assert_eq!(
            "thermal:0.05:0.1".parse::<NoiseModel>().unwrap(),
            NoiseModel::new(NoiseKind::Thermal { excitation: 0.1 }, 0.05).unwrap()
        );
        assert_eq!("none".parse::<NoiseModel>().unwrap(), NoiseModel::none());
        assert!("amplitude_damping:-1".parse::<NoiseModel>().is_err());
        assert!("thermal:0.1".parse::<NoiseModel>().is_err());
        assert!("thermal:0.1:1.5".parse::<NoiseModel>().is_err());
        assert!("bitflip:0.1".parse::<NoiseModel>().is_err());
        let round = NoiseModel::new(NoiseKind::Thermal { excitation: 0.25 }, 0.5).unwrap();
        assert_eq!(round.to_string().parse::<NoiseModel>().unwrap(), round);
    }

    #[test]
    fn slice_probability_caps_at_one() {
        let m = NoiseModel::new(NoiseKind::Dephasing, 10.0).unwrap();
        assert_eq!(m.slice_probability(0.01), 0.1);
        assert_eq!(m.slice_probability(1.0), 1.0);
    }
}
