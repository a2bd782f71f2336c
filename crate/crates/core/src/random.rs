//! Seeded samplers for reproducible random operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{c, vector_norm, ComplexMatrix, Complex64};
use crate::operator::{spectral_decompose, Unitary};
use crate::GROUPING_TOL;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hermitian matrix with Gaussian entries.
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| gaussian(rng));
    (&g + &g.adjoint()).scale_real(0.5)
}

pub fn random_ket(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = vector_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

/// Orthonormal basis from the eigenvectors of a random Hermitian matrix.
pub fn random_basis(rng: &mut impl Rng, n: usize) -> Vec<Vec<Complex64>> {
    random_hermitian(rng, n).eigh().1
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> Unitary {
    let basis = random_basis(rng, n);
    // Random column phases on top of the eigenvector basis.
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    let m = ComplexMatrix::from_fn(n, |i, j| basis[j][i] * Complex64::from_polar(1.0, phases[j]));
    Unitary::new(m).expect("eigenvectors of a Hermitian matrix form a unitary")
}

/// Nondegenerate spectrum of `n` values in `[-range, range]`, separated by
/// at least `1e-3`.
pub fn random_spectrum(rng: &mut impl Rng, n: usize, range: f64) -> Vec<f64> {
    loop {
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-range..range)).collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return values;
        }
    }
}

pub fn random_phases(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| -rng.random_range(f64::EPSILON..1.0_f64).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Nondegenerate observable in a random basis.
pub fn random_observable(rng: &mut impl Rng, n: usize) -> crate::operator::Observable {
    loop {
        let obs = spectral_decompose(&random_hermitian(rng, n), GROUPING_TOL)
            .expect("random Hermitian matrices decompose");
        if obs.is_nondegenerate() {
            return obs;
        }
    }
}
