//! Dense complex square matrices.
//!
//! Every operator in the crate is carried by [`ComplexMatrix`], a thin
//! newtype over `nalgebra::DMatrix<Complex64>` that guarantees a square shape
//! and finite entries. Hermitian eigendecomposition is delegated to
//! nalgebra's symmetric eigensolver, which handles complex Hermitian input.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `exp(i·phase)`
#[inline]
pub fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::NotSquare {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        if inner.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let z = inner[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(inner))
    }

    /// Build from row-major rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| real(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(n, n, f))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| if i == j { real(values[i]) } else { ZERO })
    }

    /// `|a⟩⟨b|` for column vectors `a`, `b`.
    pub fn outer(ket: &[Complex64], bra: &[Complex64]) -> Self {
        debug_assert_eq!(ket.len(), bra.len());
        Self::from_fn(ket.len(), |i, j| ket[i] * bra[j].conj())
    }

    /// Elementary matrix with a single 1 at `(row, col)`.
    pub fn unit(n: usize, row: usize, col: usize) -> Self {
        Self::from_fn(n, |i, j| if i == row && j == col { ONE } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(real(factor))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// `[self, other] = self·other − other·self`
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Largest `|a_ij − conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `‖U†U − 1‖ + ‖UU† − 1‖`
    pub fn unitarity_defect(&self) -> f64 {
        let id = DMatrix::<Complex64>::identity(self.dim(), self.dim());
        (self.0.adjoint() * &self.0 - &id).norm() + (&self.0 * self.0.adjoint() - id).norm()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Eigendecomposition of the Hermitian part, eigenvalues ascending.
    ///
    /// Column `k` of the returned vectors belongs to eigenvalue `k`.
    pub fn eigh(&self) -> (Vec<f64>, Vec<Vec<Complex64>>) {
        let herm = (&self.0 + self.0.adjoint()) * real(0.5);
        let eig = herm.symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
            .collect();
        (values, vectors)
    }

    /// Sorted eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigh().0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

pub fn inner_product(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(a, b)| a.conj() * b).sum()
}

pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            write!(f, "  ")?;
            for j in 0..self.dim() {
                let z = self.0[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl std::iter::Sum for ComplexMatrix {
    fn sum<I: Iterator<Item = ComplexMatrix>>(mut iter: I) -> Self {
        let first = iter.next().expect("sum of an empty operator list");
        iter.fold(first, |acc, m| &acc + &m)
    }
}

// Scenario and report files carry matrices as nested arrays of [re, im].
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .rows()
            .into_iter()
            .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(deserializer)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| c(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
