//! Seeded test-instance generators.
//!
//! The bit stream is SplitMix64 (increment `0x9e3779b97f4a7c15`, finalizer
//! multipliers `0xbf58476d1ce4e5b9` and `0x94d049bb133111eb`), seeded by
//! using the seed directly as the initial state. A uniform double is
//! `(next >> 11) * 2^-53`. Gaussians come in pairs from Box–Muller:
//! `r = sqrt(-2 ln(1 - u1))`, `(r cos 2πu2, r sin 2πu2)`, and a complex
//! Gaussian uses the pair as its real and imaginary parts.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{BipartitePureState, DensityMatrix};
use crate::error::{Error, Result};
use crate::matcore::{c64, orthonormalize, Complex64, ComplexMatrix, VALIDATION_TOL};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Deterministic generator with an explicit seed.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: SplitMix64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n.saturating_sub(1))
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let t = std::f64::consts::TAU * u2;
        (r * t.cos(), r * t.sin())
    }

    pub fn complex_gaussian(&mut self) -> Complex64 {
        let (re, im) = self.gaussian_pair();
        c64(re, im)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Seed of the `index`-th sub-instance of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn random_unit_vector(dim: usize, rng: &mut SeededRng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim).map(|_| rng.complex_gaussian()).collect();
    let n = crate::matcore::vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= n);
    v
}

/// Haar-distributed unitary from Gram–Schmidt on a Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = SeededRng::new(seed);
    random_unitary_with(dim, &mut rng)
}

pub fn random_unitary_with(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.complex_gaussian()).collect())
        .collect();
    orthonormalize(&mut cols);
    crate::matcore::from_columns(&cols)
}

/// Random density matrix of the given rank: normalized Gram matrix of
/// `rank` Gaussian columns.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let mut rng = SeededRng::new(seed);
    random_density_with(dim, rank, &mut rng)
}

pub fn random_density_with(dim: usize, rank: usize, rng: &mut SeededRng) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::Range {
            value: rank as f64,
            lo: 1.0,
            hi: dim as f64,
        });
    }
    let data = (0..dim * rank).map(|_| rng.complex_gaussian()).collect();
    let g = ComplexMatrix::new(dim, rank, data)?;
    let gram = &g * &g.adjoint();
    let tr = gram.trace().re;
    DensityMatrix::new(gram.scale_real(1.0 / tr), VALIDATION_TOL)
}

pub fn random_pure(dim_h: usize, dim_k: usize, seed: u64) -> Result<BipartitePureState> {
    let mut rng = SeededRng::new(seed);
    let v = random_unit_vector(dim_h * dim_k, &mut rng);
    BipartitePureState::new(dim_h, dim_k, v, VALIDATION_TOL)
}
