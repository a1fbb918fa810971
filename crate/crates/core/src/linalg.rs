//! Dense helpers shared by the simulation modules.
//!
//! Hamiltonians of the chain are real symmetric, so slice propagators are
//! assembled from a real eigenbasis and complex phases. Complex operators
//! are pushed through that basis with real matrix products on their real
//! and imaginary parts.

use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};
#[cfg(not(feature = "std"))]
use num_traits::Float;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) const ZERO: C64 = Complex { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = Complex { re: 1.0, im: 0.0 };

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm_sqr().sqrt()))
}

pub(crate) fn max_abs_real(m: &RMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm_sqr().sqrt());
        }
    }
    worst
}

pub(crate) fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

#[cfg(test)]
pub(crate) fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| Complex::new(x, 0.0))
}

fn split(m: &CMatrix) -> (RMatrix, RMatrix) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

fn join(re: &RMatrix, im: &RMatrix) -> CMatrix {
    re.zip_map(im, Complex::new)
}

/// Eigendecomposition of a real symmetric matrix (unsorted).
#[derive(Debug, Clone)]
pub(crate) struct Eigh {
    pub values: Vec<f64>,
    pub vectors: RMatrix,
}

impl Eigh {
    pub fn new(h: &RMatrix) -> Self {
        let eig = h.clone().symmetric_eigen();
        Eigh {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// Diagonalizes a matrix that commutes with the global spin flip
    /// `X⊗X⊗…⊗X` by splitting it into its even and odd blocks.
    ///
    /// The flip maps basis index `i` to `i ^ (dim - 1)`. The caller is
    /// responsible for the symmetry; it is not checked here.
    pub fn flip_symmetric(h: &RMatrix) -> Self {
        let n = h.nrows();
        if n < 4 {
            return Self::new(h);
        }
        let half = n / 2;
        let mask = n - 1;
        let mut even = RMatrix::zeros(half, half);
        let mut odd = RMatrix::zeros(half, half);
        for s in 0..half {
            for t in 0..half {
                let direct = h[(s, t)];
                let flipped = h[(s, t ^ mask)];
                even[(s, t)] = direct + flipped;
                odd[(s, t)] = direct - flipped;
            }
        }
        let even = even.symmetric_eigen();
        let odd = odd.symmetric_eigen();

        let r = core::f64::consts::FRAC_1_SQRT_2;
        let mut vectors = RMatrix::zeros(n, n);
        for col in 0..half {
            for s in 0..half {
                let e = even.eigenvectors[(s, col)] * r;
                vectors[(s, col)] = e;
                vectors[(s ^ mask, col)] = e;
                let o = odd.eigenvectors[(s, col)] * r;
                vectors[(s, half + col)] = o;
                vectors[(s ^ mask, half + col)] = -o;
            }
        }
        let values = even
            .eigenvalues
            .iter()
            .chain(odd.eigenvalues.iter())
            .copied()
            .collect();
        Eigh { values, vectors }
    }

    /// Phases `exp(-i · angle · λ)` for every eigenvalue.
    pub fn phases(&self, angle: f64) -> Vec<C64> {
        self.values
            .iter()
            .map(|&l| {
                let (s, c) = (angle * l).sin_cos();
                Complex::new(c, -s)
            })
            .collect()
    }

    /// Applies `V diag(phases) Vᵀ` to every column of `psi`.
    pub fn rotate_columns(&self, psi: &CMatrix, phases: &[C64]) -> CMatrix {
        let (re, im) = split(psi);
        let vt = self.vectors.transpose();
        let a = &vt * re;
        let b = &vt * im;
        let mut c = a.clone();
        let mut d = b.clone();
        for (i, ph) in phases.iter().enumerate() {
            for j in 0..psi.ncols() {
                let z = Complex::new(a[(i, j)], b[(i, j)]) * ph;
                c[(i, j)] = z.re;
                d[(i, j)] = z.im;
            }
        }
        join(&(&self.vectors * c), &(&self.vectors * d))
    }

    /// Computes `U x U†` for `U = V diag(phases) Vᵀ`.
    pub fn conjugate(&self, x: &CMatrix, phases: &[C64]) -> CMatrix {
        let (re, im) = split(x);
        let v = &self.vectors;
        let vt = v.transpose();
        let a = &vt * re * v;
        let b = &vt * im * v;
        let n = x.nrows();
        let mut c = RMatrix::zeros(n, n);
        let mut d = RMatrix::zeros(n, n);
        for j in 0..n {
            let pj = phases[j].conj();
            for i in 0..n {
                let z = Complex::new(a[(i, j)], b[(i, j)]) * (phases[i] * pj);
                c[(i, j)] = z.re;
                d[(i, j)] = z.im;
            }
        }
        join(&(v * c * &vt), &(v * d * &vt))
    }
}

pub(crate) fn popcount(x: usize) -> usize {
    x.count_ones() as usize
}

#[cfg(test)]
pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}
