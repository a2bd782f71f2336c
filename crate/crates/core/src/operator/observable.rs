use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::operator::family::{
    express_family, make_matrix_units, CoefficientTensor, MatrixUnitFamily, ProjectorFamily,
};
use crate::{ALGEBRA_TOL, GROUPING_TOL};

/// Ordered real eigenvalues together with the tolerance used to group them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    grouping_tol: f64,
}

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_grouping(values, GROUPING_TOL)
    }

    pub fn with_grouping(values: Vec<f64>, grouping_tol: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SpectrumMismatch("empty spectrum".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::SpectrumMismatch(format!("non-finite eigenvalue {bad}")));
        }
        if !(grouping_tol > 0.0) {
            return Err(Error::SpectrumMismatch(format!(
                "grouping tolerance must be positive, got {grouping_tol}"
            )));
        }
        Ok(Self {
            values,
            grouping_tol,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// True when no two eigenvalues lie within the grouping tolerance.
    pub fn is_nondegenerate(&self) -> bool {
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).all(|w| w[1] - w[0] >= self.grouping_tol)
    }
}

/// Hermitian operator `Σ_a α_a B_a` with its spectral data.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    spectrum: Spectrum,
    family: ProjectorFamily,
    matrix: ComplexMatrix,
}

impl Observable {
    /// Assembles `Σ_a α_a B_a`. Repeated eigenvalues are allowed; each
    /// projector keeps its own outcome index.
    pub fn new(spectrum: Spectrum, family: ProjectorFamily) -> Result<Self> {
        if spectrum.len() != family.len() {
            return Err(Error::DimensionMismatch {
                expected: family.len(),
                found: spectrum.len(),
            });
        }
        let matrix = family
            .projectors()
            .iter()
            .zip(spectrum.values())
            .map(|(p, &alpha)| p.scale_real(alpha))
            .sum();
        Ok(Self {
            spectrum,
            family,
            matrix,
        })
    }

    pub fn from_values(values: Vec<f64>, family: ProjectorFamily) -> Result<Self> {
        Self::new(Spectrum::new(values)?, family)
    }

    /// `Σ_a α_a S_aa` over a matrix-unit family.
    pub fn from_units(values: Vec<f64>, units: &MatrixUnitFamily) -> Result<Self> {
        Self::from_values(values, units.projectors())
    }

    /// Diagonal observable in the computational basis.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_values(values.to_vec(), ProjectorFamily::computational(values.len()))
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.values()
    }

    pub fn family(&self) -> &ProjectorFamily {
        &self.family
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn outcomes(&self) -> usize {
        self.family.len()
    }

    /// Every projector has rank one.
    pub fn is_nondegenerate(&self) -> bool {
        self.family.is_rank_one()
    }

    /// Matrix units of a nondegenerate observable.
    pub fn matrix_units(&self) -> Result<MatrixUnitFamily> {
        make_matrix_units(&self.family)
    }

    /// `f(Â) = Σ_a f_a B_a` for per-outcome values `f_a`.
    pub fn function(&self, values: &[f64]) -> Result<ComplexMatrix> {
        if values.len() != self.outcomes() {
            return Err(Error::DimensionMismatch {
                expected: self.outcomes(),
                found: values.len(),
            });
        }
        Ok(self
            .family
            .projectors()
            .iter()
            .zip(values)
            .map(|(p, &v)| p.scale_real(v))
            .sum())
    }

    /// `‖Σ α_a B_a − matrix‖`
    pub fn reconstruction_residual(&self, reference: &ComplexMatrix) -> f64 {
        self.matrix.distance(reference)
    }
}

/// Spectral decomposition with eigenvalues closer than `grouping_tol`
/// merged into one outcome.
pub fn spectral_decompose(matrix: &ComplexMatrix, grouping_tol: f64) -> Result<Observable> {
    let scale = matrix.max_abs().max(1.0);
    let asymmetry = matrix.hermiticity_defect();
    if asymmetry > ALGEBRA_TOL * scale {
        return Err(Error::NotHermitian { asymmetry });
    }
    if !(grouping_tol > 0.0) {
        return Err(Error::SpectrumMismatch(format!(
            "grouping tolerance must be positive, got {grouping_tol}"
        )));
    }
    let (values, vectors) = matrix.eigh();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..values.len() {
        match groups.last_mut() {
            Some(g) if values[k] - values[*g.last().unwrap()] < grouping_tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    let n = matrix.dim();
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in &groups {
        eigenvalues.push(g.iter().map(|&k| values[k]).sum::<f64>() / g.len() as f64);
        let mut p = ComplexMatrix::zeros(n);
        for &k in g {
            p = &p + &ComplexMatrix::outer(&vectors[k], &vectors[k]);
        }
        projectors.push(p);
    }
    let family = ProjectorFamily::new(projectors, ALGEBRA_TOL.max(1e-12 * n as f64))?;
    Observable::new(Spectrum::with_grouping(eigenvalues, grouping_tol)?, family)
}

/// Coefficients `β_cde = Tr(S_ed B_c)` of `obs`'s projectors over `units`.
pub fn express_in_family(obs: &Observable, units: &MatrixUnitFamily) -> Result<CoefficientTensor> {
    express_family(obs.family(), units)
}

/// `‖B_c − Σ β_cde S_de‖` maximised over `c`.
pub fn expansion_residual(obs: &Observable, units: &MatrixUnitFamily, beta: &CoefficientTensor) -> f64 {
    beta.reconstruct(units)
        .iter()
        .zip(obs.family().projectors())
        .map(|(r, p)| r.distance(p))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::real;
    use crate::random::{random_hermitian, seeded};

    #[test]
    fn diagonal_input_splits_into_computational_projectors() {
        let obs = spectral_decompose(&ComplexMatrix::diagonal(&[1.0, 2.0]), GROUPING_TOL).unwrap();
        assert_eq!(obs.eigenvalues().len(), 2);
        assert!((obs.eigenvalues()[0] - 1.0).abs() < 1e-14);
        assert!((obs.eigenvalues()[1] - 2.0).abs() < 1e-14);
        assert!(obs.family().projector(0).distance(&ComplexMatrix::diagonal(&[1.0, 0.0])) < 1e-14);
        assert!(obs.family().projector(1).distance(&ComplexMatrix::diagonal(&[0.0, 1.0])) < 1e-14);
    }

    #[test]
    fn identity_is_one_outcome() {
        let obs = spectral_decompose(&ComplexMatrix::identity(3), GROUPING_TOL).unwrap();
        assert_eq!(obs.eigenvalues(), &[1.0]);
        assert!(obs.family().projector(0).distance(&ComplexMatrix::identity(3)) < 1e-12);
        assert!(!obs.is_nondegenerate());
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = seeded(11);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 4);
            let obs = spectral_decompose(&h, GROUPING_TOL).unwrap();
            assert!(obs.reconstruction_residual(&h) < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_input_names_asymmetry() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        match spectral_decompose(&m, GROUPING_TOL) {
            Err(Error::NotHermitian { asymmetry }) => assert!((asymmetry - 1.0).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_positive_grouping() {
        assert!(spectral_decompose(&ComplexMatrix::identity(2), 0.0).is_err());
        assert!(Spectrum::with_grouping(vec![1.0], -1.0).is_err());
    }

    #[test]
    fn same_basis_expansion_is_diagonal() {
        let obs = Observable::diagonal(&[0.5, -1.0, 2.0]).unwrap();
        let units = MatrixUnitFamily::computational(3);
        let beta = express_in_family(&obs, &units).unwrap();
        for c in 0..3 {
            for d in 0..3 {
                for e in 0..3 {
                    let expected = if c == d && d == e { 1.0 } else { 0.0 };
                    assert!((beta.get(c, d, e) - real(expected)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hadamard_observable_has_half_moduli() {
        // Projectors |±⟩⟨±| over computational units: every entry is ±1/2.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let family = ProjectorFamily::from_basis(&[vec![real(s), real(s)], vec![real(s), real(-s)]]).unwrap();
        let obs = Observable::from_values(vec![1.0, -1.0], family).unwrap();
        let units = MatrixUnitFamily::computational(2);
        let beta = express_in_family(&obs, &units).unwrap();
        for c in 0..2 {
            for d in 0..2 {
                for e in 0..2 {
                    assert!((beta.get(c, d, e).norm() - 0.5).abs() < 1e-15);
                }
            }
        }
        assert!(expansion_residual(&obs, &units, &beta) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let obs = Observable::diagonal(&[1.0, 2.0]).unwrap();
        let units = MatrixUnitFamily::computational(3);
        assert!(matches!(
            express_in_family(&obs, &units),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
