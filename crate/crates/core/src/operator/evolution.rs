use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Unitary motion for one unit time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: ComplexMatrix,
}

/// Default acceptance threshold for `U†U = UU† = 1`.
pub const UNITARY_TOL: f64 = 1e-9;

impl Unitary {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let defect = matrix.unitarity_defect();
        if defect > UNITARY_TOL * (matrix.dim() as f64).sqrt().max(1.0) {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Matrix product `self · other`.
    ///
    /// Motions written in terms of the current operators compose as
    /// `U_{t+1} = W · U_t`.
    pub fn then_apply(&self, later: &Unitary) -> Result<Unitary> {
        if later.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: later.dim(),
            });
        }
        Ok(Self {
            matrix: &later.matrix * &self.matrix,
        })
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.matrix.unitarity_defect()
    }
}

/// Heisenberg evolution `U† op U`.
pub fn evolve(op: &ComplexMatrix, u: &Unitary) -> Result<ComplexMatrix> {
    if op.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: op.dim(),
        });
    }
    Ok(&(&u.matrix.adjoint() * op) * &u.matrix)
}

/// Schrödinger-side conjugation `U op U†`, the inverse of [`evolve`].
pub fn conjugate(op: &ComplexMatrix, u: &Unitary) -> Result<ComplexMatrix> {
    evolve(op, &u.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_unitary, seeded};

    #[test]
    fn identity_evolution_is_trivial() {
        let a = ComplexMatrix::diagonal(&[1.0, -2.0, 0.5]);
        assert_eq!(evolve(&a, &Unitary::identity(3)).unwrap(), a);
    }

    #[test]
    fn swap_permutes_eigenvalues() {
        let x = Unitary::new(ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap())
            .unwrap();
        let a = ComplexMatrix::diagonal(&[0.3, 1.7]);
        let evolved = evolve(&a, &x).unwrap();
        assert!(evolved.distance(&ComplexMatrix::diagonal(&[1.7, 0.3])) < 1e-15);
    }

    #[test]
    fn evolution_preserves_spectrum() {
        let mut rng = seeded(21);
        for n in 1..6 {
            let h = random_hermitian(&mut rng, n);
            let u = random_unitary(&mut rng, n);
            let evolved = evolve(&h, &u).unwrap();
            assert!(evolved.hermiticity_defect() < 1e-12);
            let before = h.eigenvalues();
            let after = evolved.eigenvalues();
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_non_unitary_and_mismatch() {
        assert!(Unitary::new(ComplexMatrix::diagonal(&[1.0, 2.0])).is_err());
        assert!(evolve(&ComplexMatrix::identity(3), &Unitary::identity(2)).is_err());
    }
}
