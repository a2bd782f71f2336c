//! Projector families and matrix-unit families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{inner_product, ComplexMatrix, Complex64, ZERO};
use crate::ALGEBRA_TOL;

/// Ordered family of orthogonal projectors resolving the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFamily {
    dim: usize,
    projectors: Vec<ComplexMatrix>,
    labels: Vec<usize>,
}

impl ProjectorFamily {
    /// Validates `B_a B_b = δ_ab B_a`, `Σ B_a = 1` and Hermiticity to `tol`.
    pub fn new(projectors: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let dim = projectors
            .first()
            .map(ComplexMatrix::dim)
            .ok_or_else(|| Error::InvalidProjectorFamily("empty family".into()))?;
        if let Some(bad) = projectors.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        if projectors.len() > dim {
            return Err(Error::InvalidProjectorFamily(format!(
                "{} projectors on a {dim}-dimensional space",
                projectors.len()
            )));
        }
        let labels = (0..projectors.len()).collect();
        let family = Self {
            dim,
            projectors,
            labels,
        };
        if let Some(asym) = family
            .projectors
            .iter()
            .map(ComplexMatrix::hermiticity_defect)
            .find(|&d| d > tol)
        {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        let residual = family.algebra_residual();
        if residual > tol {
            return Err(Error::InvalidProjectorFamily(format!(
                "projector algebra residual {residual:.3e} exceeds {tol:.1e}"
            )));
        }
        Ok(family)
    }

    /// Rank-1 projectors `|v_a⟩⟨v_a|` of an orthonormal basis.
    pub fn from_basis(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let projectors = vectors
            .iter()
            .map(|v| ComplexMatrix::outer(v, v))
            .collect();
        Self::new(projectors, ALGEBRA_TOL)
    }

    pub fn computational(n: usize) -> Self {
        Self {
            dim: n,
            projectors: (0..n).map(|a| ComplexMatrix::unit(n, a, a)).collect(),
            labels: (0..n).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projector(&self, a: usize) -> &ComplexMatrix {
        &self.projectors[a]
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Largest of `‖B_a B_b − δ_ab B_a‖` over all pairs and `‖Σ B_a − 1‖`.
    pub fn algebra_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (a, pa) in self.projectors.iter().enumerate() {
            for (b, pb) in self.projectors.iter().enumerate() {
                let prod = pa * pb;
                let r = if a == b {
                    prod.distance(pa)
                } else {
                    prod.norm()
                };
                worst = worst.max(r);
            }
        }
        let total: ComplexMatrix = self.projectors.iter().cloned().sum();
        worst.max(total.distance(&ComplexMatrix::identity(self.dim)))
    }

    pub fn ranks(&self) -> Vec<f64> {
        self.projectors.iter().map(|p| p.trace().re).collect()
    }

    pub fn is_rank_one(&self) -> bool {
        self.projectors.len() == self.dim
            && self.ranks().iter().all(|r| (r - 1.0).abs() < 1e-6)
    }

    /// Largest commutator norm between members of the two families.
    pub fn commutation_defect(&self, other: &ProjectorFamily) -> f64 {
        let mut worst = 0.0_f64;
        for p in &self.projectors {
            for q in &other.projectors {
                worst = worst.max(p.commutator(q).norm());
            }
        }
        worst
    }

    /// Reorders the projectors: new position `k` holds old projector `order[k]`.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            dim: self.dim,
            projectors: order.iter().map(|&k| self.projectors[k].clone()).collect(),
            labels: order.iter().map(|&k| self.labels[k]).collect(),
        }
    }
}

/// Phase convention applied to the basis vectors behind a matrix-unit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// The first component of largest modulus is made real and positive.
    LargestComponentRealPositive,
}

/// Operators `S_ab = |a⟩⟨b|` with `S_ab S_cd = δ_bc S_ad` and `S_aa = B_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixUnitFamily {
    dim: usize,
    vectors: Vec<Vec<Complex64>>,
    units: Vec<ComplexMatrix>,
    gauge: Gauge,
}

impl MatrixUnitFamily {
    pub fn computational(n: usize) -> Self {
        let vectors = (0..n)
            .map(|a| {
                let mut v = vec![ZERO; n];
                v[a] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::from_gauged_vectors(vectors)
    }

    fn from_gauged_vectors(vectors: Vec<Vec<Complex64>>) -> Self {
        let n = vectors.len();
        let mut units = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                units.push(ComplexMatrix::outer(&vectors[a], &vectors[b]));
            }
        }
        Self {
            dim: n,
            vectors,
            units,
            gauge: Gauge::LargestComponentRealPositive,
        }
    }

    /// Matrix units from an orthonormal basis, gauge-fixing each vector.
    pub fn from_basis(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let family = ProjectorFamily::from_basis(vectors)?;
        make_matrix_units(&family)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// `S_ab`
    pub fn unit(&self, a: usize, b: usize) -> &ComplexMatrix {
        &self.units[a * self.dim + b]
    }

    /// Gauge-fixed basis vector `|a⟩`.
    pub fn vector(&self, a: usize) -> &[Complex64] {
        &self.vectors[a]
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn projectors(&self) -> ProjectorFamily {
        ProjectorFamily {
            dim: self.dim,
            projectors: (0..self.dim).map(|a| self.unit(a, a).clone()).collect(),
            labels: (0..self.dim).collect(),
        }
    }

    /// `⟨a|op|b⟩ = Tr(S_ba op)` for every `a, b`, row-major.
    pub fn coefficients(&self, op: &ComplexMatrix) -> Vec<Vec<Complex64>> {
        let images: Vec<Vec<Complex64>> = self.vectors.iter().map(|b| op.apply(b)).collect();
        (0..self.dim)
            .map(|a| {
                images
                    .iter()
                    .map(|op_b| inner_product(&self.vectors[a], op_b))
                    .collect()
            })
            .collect()
    }

    /// `Σ_ab coeffs[a][b] S_ab`
    pub fn assemble(&self, coeffs: &[Vec<Complex64>]) -> ComplexMatrix {
        let mut total = ComplexMatrix::zeros(self.dim);
        for a in 0..self.dim {
            for b in 0..self.dim {
                if coeffs[a][b] != ZERO {
                    total = &total + &self.unit(a, b).scale(coeffs[a][b]);
                }
            }
        }
        total
    }

    /// Largest `‖S_ab S_cd − δ_bc S_ad‖` over all index tuples.
    pub fn algebra_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let prod = self.unit(a, b) * self.unit(c, d);
                        let r = if b == c {
                            prod.distance(self.unit(a, d))
                        } else {
                            prod.norm()
                        };
                        worst = worst.max(r);
                    }
                }
            }
        }
        worst
    }

    /// Largest `‖S_ab† − S_ba‖`.
    pub fn adjoint_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max(self.unit(a, b).adjoint().distance(self.unit(b, a)));
            }
        }
        worst
    }
}

/// Unit vector spanning a rank-1 projector, gauge-fixed.
pub(crate) fn rank_one_vector(projector: &ComplexMatrix) -> Vec<Complex64> {
    let n = projector.dim();
    // The column with the largest norm is proportional to the spanning vector.
    let (best, _) = (0..n)
        .map(|j| {
            let norm: f64 = (0..n).map(|i| projector.get(i, j).norm_sqr()).sum();
            (j, norm)
        })
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let col: Vec<Complex64> = (0..n).map(|i| projector.get(i, best)).collect();
    let norm = crate::matrix::vector_norm(&col);
    let v: Vec<Complex64> = col.iter().map(|z| z / norm).collect();
    fix_gauge(v)
}

/// Rotates `v` so that its first component of largest modulus is real positive.
pub(crate) fn fix_gauge(v: Vec<Complex64>) -> Vec<Complex64> {
    let max = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("non-empty vector");
    let p = v[pivot];
    let rot = p.conj() / p.norm();
    v.into_iter().map(|z| z * rot).collect()
}

/// Matrix units `S_ab = |a⟩⟨b|` built from a family of rank-1 projectors.
pub fn make_matrix_units(family: &ProjectorFamily) -> Result<MatrixUnitFamily> {
    for (index, rank) in family.ranks().into_iter().enumerate() {
        if (rank - 1.0).abs() > 1e-6 {
            return Err(Error::RankNotOne { index, rank });
        }
    }
    if family.len() != family.dim() {
        return Err(Error::InvalidProjectorFamily(format!(
            "{} projectors do not resolve a {}-dimensional space",
            family.len(),
            family.dim()
        )));
    }
    let vectors = family.projectors().iter().map(rank_one_vector).collect();
    Ok(MatrixUnitFamily::from_gauged_vectors(vectors))
}

/// Expansion coefficients `β_cde` of an observable's projectors over a
/// matrix-unit family: `B_c = Σ_de β_cde S_de`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    outcomes: usize,
    dim: usize,
    entries: Vec<Complex64>,
}

impl CoefficientTensor {
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `β_cde`
    pub fn get(&self, c: usize, d: usize, e: usize) -> Complex64 {
        self.entries[(c * self.dim + d) * self.dim + e]
    }

    /// `B_c = Σ_de β_cde S_de` for every `c`.
    pub fn reconstruct(&self, units: &MatrixUnitFamily) -> Vec<ComplexMatrix> {
        (0..self.outcomes)
            .map(|c| {
                let coeffs: Vec<Vec<Complex64>> = (0..self.dim)
                    .map(|d| (0..self.dim).map(|e| self.get(c, d, e)).collect())
                    .collect();
                units.assemble(&coeffs)
            })
            .collect()
    }
}

/// `β_cde = Tr(S_ed B_c)` for the projectors of `family` over `units`.
pub fn express_family(family: &ProjectorFamily, units: &MatrixUnitFamily) -> Result<CoefficientTensor> {
    if family.dim() != units.dim() {
        return Err(Error::DimensionMismatch {
            expected: units.dim(),
            found: family.dim(),
        });
    }
    let dim = units.dim();
    let mut entries = Vec::with_capacity(family.len() * dim * dim);
    for p in family.projectors() {
        let coeffs = units.coefficients(p);
        for row in coeffs {
            entries.extend(row);
        }
    }
    Ok(CoefficientTensor {
        outcomes: family.len(),
        dim,
        entries,
    })
}
