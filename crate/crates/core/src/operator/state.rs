use crate::error::{Error, Result};
use crate::matrix::{vector_norm, ComplexMatrix, Complex64};
use crate::operator::observable::Observable;
use crate::ALGEBRA_TOL;

/// Static Heisenberg-picture state: Hermitian, positive, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergState {
    matrix: ComplexMatrix,
    pure: bool,
}

impl HeisenbergState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, ALGEBRA_TOL)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let asymmetry = matrix.hermiticity_defect();
        if asymmetry > tol {
            return Err(Error::NotHermitian { asymmetry });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace {:.6}{:+.6}i is not 1",
                trace.re, trace.im
            )));
        }
        let lowest = matrix.eigenvalues()[0];
        if lowest < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {lowest:.3e}"
            )));
        }
        let pure = (&matrix * &matrix).distance(&matrix) < tol;
        Ok(Self { matrix, pure })
    }

    /// `|ψ⟩⟨ψ|` for a normalised copy of `ket`.
    pub fn pure(ket: &[Complex64]) -> Result<Self> {
        let norm = vector_norm(ket);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v: Vec<Complex64> = ket.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v, &v))
    }

    /// `1/N`
    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            pure: n == 1,
        }
    }

    /// `Σ_k w_k ρ_k`
    pub fn mixture(weights: &[f64], states: &[HeisenbergState]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!(
                "mixture weights must be non-negative and sum to 1 (sum {total})"
            )));
        }
        let matrix = states
            .iter()
            .zip(weights)
            .map(|(s, &w)| s.matrix.scale_real(w))
            .sum();
        Self::new(matrix)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    /// `‖ρ² − ρ‖`
    pub fn purity_defect(&self) -> f64 {
        (&self.matrix * &self.matrix).distance(&self.matrix)
    }
}

/// True iff `‖ρ² − ρ‖` is below the algebra tolerance.
pub fn is_pure(state: &HeisenbergState) -> bool {
    state.is_pure()
}

/// The product `ρ·Â`: everything an observer can learn about `Â` in `ρ`.
pub fn accessible_info(state: &HeisenbergState, obs: &Observable) -> Result<ComplexMatrix> {
    accessible_info_matrix(state, obs.matrix())
}

pub fn accessible_info_matrix(state: &HeisenbergState, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    if state.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: op.dim(),
        });
    }
    Ok(state.matrix() * op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, real, ONE, ZERO};
    use crate::random::{random_ket, seeded};

    #[test]
    fn rank_one_projector_is_pure() {
        let s = HeisenbergState::pure(&[ONE, ZERO]).unwrap();
        assert!(is_pure(&s));
        let t = HeisenbergState::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!(is_pure(&t));
    }

    #[test]
    fn maximally_mixed_is_not_pure() {
        for n in 2..6 {
            assert!(!is_pure(&HeisenbergState::maximally_mixed(n)));
        }
        assert!(is_pure(&HeisenbergState::maximally_mixed(1)));
    }

    #[test]
    fn mixture_of_distinct_pure_states_is_mixed() {
        let mut rng = seeded(3);
        for _ in 0..10 {
            let a = HeisenbergState::pure(&random_ket(&mut rng, 3)).unwrap();
            let b = HeisenbergState::pure(&random_ket(&mut rng, 3)).unwrap();
            let m = HeisenbergState::mixture(&[0.3, 0.7], &[a, b]).unwrap();
            assert!(!is_pure(&m));
            // Two non-zero eigenvalues confirm rank 2.
            let eig = m.matrix().eigenvalues();
            assert!(eig.iter().filter(|&&x| x > 1e-6).count() == 2);
        }
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(HeisenbergState::new(ComplexMatrix::diagonal(&[0.5, 0.6])).is_err());
        assert!(HeisenbergState::new(ComplexMatrix::diagonal(&[1.5, -0.5])).is_err());
        let skew = ComplexMatrix::from_rows(&[vec![real(0.5), ONE], vec![ZERO, real(0.5)]]).unwrap();
        assert!(matches!(HeisenbergState::new(skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn pure_eigenstate_product_is_eigenvalue_times_state() {
        let rho = HeisenbergState::new(ComplexMatrix::diagonal(&[1.0, 0.0])).unwrap();
        let obs = Observable::diagonal(&[0.25, 7.0]).unwrap();
        let info = accessible_info(&rho, &obs).unwrap();
        assert!(info.distance(&rho.matrix().scale_real(0.25)) < 1e-15);
    }

    #[test]
    fn identity_observable_returns_state() {
        let mut rng = seeded(5);
        let a = HeisenbergState::pure(&random_ket(&mut rng, 3)).unwrap();
        let obs = Observable::diagonal(&[1.0, 1.0, 1.0]).unwrap();
        assert!(accessible_info(&a, &obs).unwrap().distance(a.matrix()) < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let rho = HeisenbergState::maximally_mixed(2);
        let obs = Observable::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert!(accessible_info(&rho, &obs).is_err());
    }
}
