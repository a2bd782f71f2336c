//! Unitary motions: classical permutations, perfect measurements between two
//! systems, coarse measurements onto a larger register, and the sequential
//! measurement of a non-commuting observable onto an existing record.
//!
//! A motion written in terms of the operators at time `t` has the same matrix
//! form `W` as at time 0, so the accumulated motion is `U_{t+1} = W · U_t`
//! and `X(t) = U_t† X(0) U_t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{phase, real, ComplexMatrix, Complex64, ZERO};
use crate::operator::{
    evolve, tensor_embed, CompositeSpace, MatrixUnitFamily, Observable, ProjectorFamily, Unitary,
};
use crate::{ALGEBRA_TOL, DIMENSION_CAP};

/// `(a + b) mod n`
pub fn mod_add(a: usize, b: usize, n: usize) -> Result<usize> {
    for index in [a, b] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, modulus: n });
        }
    }
    Ok((a + b) % n)
}

/// Bijection on `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n || seen[m] {
                return Err(Error::NotBijective(n));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
        }
    }

    /// `a ↦ (a + shift) mod n`
    pub fn cyclic_shift(n: usize, shift: usize) -> Self {
        Self {
            mapping: (0..n).map(|a| (a + shift) % n).collect(),
        }
    }

    /// Exchanges `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.swap(i, j);
        Self { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, a: usize) -> usize {
        self.mapping[a]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (a, &b) in self.mapping.iter().enumerate() {
            inv[b] = a;
        }
        Self { mapping: inv }
    }

    /// `next ∘ self`: apply `self` first.
    pub fn then(&self, next: &Permutation) -> Self {
        Self {
            mapping: self.mapping.iter().map(|&a| next.mapping[a]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(a, &b)| a == b)
    }

    /// All `n!` permutations in lexicographic order.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations {
            next: Some((0..n).collect()),
        }
    }
}

/// Iterator over permutations in lexicographic order.
pub struct AllPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let n = succ.len();
        let pivot = (1..n).rev().find(|&i| succ[i - 1] < succ[i]);
        if let Some(i) = pivot {
            let j = (i..n).rev().find(|&j| succ[j] > succ[i - 1]).unwrap();
            succ.swap(i - 1, j);
            succ[i..].reverse();
            self.next = Some(succ);
        }
        Some(Permutation { mapping: current })
    }
}

/// Real phases `φ_b` (one per basis index) or `φ_ab` (one per index pair),
/// in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAssignment {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl PhaseAssignment {
    pub fn vector(values: Vec<f64>) -> Result<Self> {
        Self::checked(vec![values.len()], values)
    }

    /// `n × n` phases, row-major in `(a, b)`.
    pub fn square(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::InvalidPhases(format!(
                "{} phases for a {n}x{n} assignment",
                values.len()
            )));
        }
        Self::checked(vec![n, n], values)
    }

    fn checked(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPhases(format!("non-finite phase {bad}")));
        }
        Ok(Self { shape, values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            shape: vec![n],
            values: vec![0.0; n],
        }
    }

    pub fn zeros_square(n: usize) -> Self {
        Self {
            shape: vec![n, n],
            values: vec![0.0; n * n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, b: usize) -> f64 {
        self.values[b]
    }

    pub fn get2(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.shape[1] + b]
    }

    fn expect_vector(&self, n: usize) -> Result<()> {
        if self.shape != [n] {
            return Err(Error::InvalidPhases(format!(
                "expected {n} phases, got shape {:?}",
                self.shape
            )));
        }
        Ok(())
    }

    fn expect_square(&self, n: usize) -> Result<()> {
        if self.shape != [n, n] {
            return Err(Error::InvalidPhases(format!(
                "expected {n}x{n} phases, got shape {:?}",
                self.shape
            )));
        }
        Ok(())
    }
}

/// Block sizes `m_a ≥ 1` with prefix sums `γ_j = Σ_{k≤j} m_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplicities {
    counts: Vec<usize>,
    prefix: Vec<usize>,
}

impl Multiplicities {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidMultiplicities("no blocks".into()));
        }
        if let Some(a) = counts.iter().position(|&m| m == 0) {
            return Err(Error::InvalidMultiplicities(format!(
                "multiplicity of outcome {a} is zero"
            )));
        }
        let prefix = counts
            .iter()
            .scan(0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        Ok(Self { counts, prefix })
    }

    /// Checks the stated total against `Σ m_a`.
    pub fn with_total(counts: Vec<usize>, total: usize) -> Result<Self> {
        let m = Self::new(counts)?;
        if m.total() != total {
            return Err(Error::InvalidMultiplicities(format!(
                "multiplicity sum mismatch: {} != {total}",
                m.total()
            )));
        }
        Ok(m)
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `M = Σ m_a`
    pub fn total(&self) -> usize {
        *self.prefix.last().unwrap()
    }

    /// `γ_j`
    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    /// Target indices `γ_{a−1} .. γ_a` assigned to outcome `a`, with `γ_{−1} = 0`.
    pub fn block(&self, a: usize) -> std::ops::Range<usize> {
        let start = if a == 0 { 0 } else { self.prefix[a - 1] };
        start..self.prefix[a]
    }

    /// Outcome whose block contains target index `e`.
    pub fn block_of(&self, e: usize) -> usize {
        self.prefix.iter().position(|&g| e < g).expect("index inside total")
    }

    /// Spreads per-outcome values over the `M` target indices.
    pub fn expand(&self, values: &[f64]) -> Vec<f64> {
        (0..self.total()).map(|e| values[self.block_of(e)]).collect()
    }
}

/// `U = Σ_b exp(iφ_b) S_{b π(b)}`; it relabels the units' projectors by `π`.
pub fn permutation_unitary(
    units: &MatrixUnitFamily,
    pi: &Permutation,
    phases: &PhaseAssignment,
) -> Result<Unitary> {
    let n = units.dim();
    if pi.len() != n {
        return Err(Error::NotBijective(n));
    }
    phases.expect_vector(n)?;
    let matrix = (0..n)
        .map(|b| units.unit(b, pi.apply(b)).scale(phase(phases.get(b))))
        .sum();
    Unitary::new(matrix)
}

/// Perfect measurement of `control` on slot 0 by the `target_units` register
/// on slot 1:
/// `U = Σ_ab exp(iφ_ab) B_a ⊗ S_{b, a⊕b}`.
pub fn measurement_unitary(
    control: &ProjectorFamily,
    target_units: &MatrixUnitFamily,
    phases: &PhaseAssignment,
    space: &CompositeSpace,
) -> Result<Unitary> {
    if space.slots() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: space.slots(),
        });
    }
    measurement_unitary_between(control, 0, target_units, 1, phases, space)
}

/// [`measurement_unitary`] between arbitrary slots of a larger space.
pub fn measurement_unitary_between(
    control: &ProjectorFamily,
    control_slot: usize,
    target_units: &MatrixUnitFamily,
    target_slot: usize,
    phases: &PhaseAssignment,
    space: &CompositeSpace,
) -> Result<Unitary> {
    space.check_slot(control_slot)?;
    space.check_slot(target_slot)?;
    if control_slot == target_slot {
        return Err(Error::SlotOutOfRange {
            slot: target_slot,
            slots: space.slots(),
        });
    }
    check_cap(space)?;
    let n = target_units.dim();
    if control.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: control.len(),
        });
    }
    phases.expect_square(n)?;
    let mut total = ComplexMatrix::zeros(space.total_dim());
    for a in 0..n {
        let ctrl = tensor_embed(control.projector(a), control_slot, space)?;
        let shift: ComplexMatrix = (0..n)
            .map(|b| target_units.unit(b, (a + b) % n).scale(phase(phases.get2(a, b))))
            .sum();
        let shift = tensor_embed(&shift, target_slot, space)?;
        total = &total + &(&ctrl * &shift);
    }
    Unitary::new(total)
}

/// Uniform superposition over the target units: the register's ready state,
/// with `|u⟩⟨u| = (1/M) Σ_cd S_cd`.
pub fn ready_vector(units: &MatrixUnitFamily) -> Vec<Complex64> {
    let m = units.dim();
    let amp = real(1.0 / (m as f64).sqrt());
    let mut v = vec![ZERO; m];
    for e in 0..m {
        for (slot, z) in v.iter_mut().zip(units.vector(e)) {
            *slot += amp * z;
        }
    }
    v
}

/// Uniform superposition over the target indices of block `a`.
pub fn block_vector(units: &MatrixUnitFamily, mult: &Multiplicities, a: usize) -> Vec<Complex64> {
    let block = mult.block(a);
    let amp = real(1.0 / (block.len() as f64).sqrt());
    let mut v = vec![ZERO; units.dim()];
    for e in block {
        for (slot, z) in v.iter_mut().zip(units.vector(e)) {
            *slot += amp * z;
        }
    }
    v
}

/// Coarse measurement of an `N`-outcome control onto an `M`-level register.
///
/// `U = Σ_a B_a ⊗ V_a`, where the real reflection `V_a` carries the ready
/// state `|u⟩` onto the uniform superposition over block `a`
/// (indices `γ_{a−1} .. γ_a`). Relative to the ready state, every control
/// branch `a` then has register support exactly on its own block.
pub fn coarse_measurement_unitary(
    control: &ProjectorFamily,
    target_units: &MatrixUnitFamily,
    mult: &Multiplicities,
    space: &CompositeSpace,
) -> Result<Unitary> {
    if space.slots() != 2 || space.dims()[1] != target_units.dim() {
        return Err(Error::DimensionMismatch {
            expected: target_units.dim(),
            found: *space.dims().get(1).unwrap_or(&0),
        });
    }
    check_cap(space)?;
    if mult.len() != control.len() {
        return Err(Error::InvalidMultiplicities(format!(
            "{} multiplicities for {} control outcomes",
            mult.len(),
            control.len()
        )));
    }
    if mult.total() != target_units.dim() {
        return Err(Error::InvalidMultiplicities(format!(
            "multiplicity sum mismatch: {} != {}",
            mult.total(),
            target_units.dim()
        )));
    }
    let ready = ready_vector(target_units);
    let mut total = ComplexMatrix::zeros(space.total_dim());
    for a in 0..control.len() {
        let reflection = reflection_between(&ready, &block_vector(target_units, mult, a));
        let ctrl = tensor_embed(control.projector(a), 0, space)?;
        let v = tensor_embed(&reflection, 1, space)?;
        total = &total + &(&ctrl * &v);
    }
    Unitary::new(total)
}

/// Householder reflection exchanging two unit vectors with a real overlap.
fn reflection_between(from: &[Complex64], to: &[Complex64]) -> ComplexMatrix {
    let n = from.len();
    let diff: Vec<Complex64> = from.iter().zip(to).map(|(x, y)| x - y).collect();
    let norm = crate::matrix::vector_norm(&diff);
    if norm < 1e-14 {
        return ComplexMatrix::identity(n);
    }
    let v: Vec<Complex64> = diff.iter().map(|z| z / norm).collect();
    &ComplexMatrix::identity(n) - &ComplexMatrix::outer(&v, &v).scale_real(2.0)
}

fn check_cap(space: &CompositeSpace) -> Result<()> {
    if space.total_dim() > DIMENSION_CAP {
        return Err(Error::CapExceeded {
            dim: space.total_dim(),
            cap: DIMENSION_CAP,
        });
    }
    Ok(())
}

/// Local motion `R` on one system with `R† Â R = Ĉ`, pairing eigenvectors of
/// equal eigenvalue.
pub fn rotation_onto(a: &Observable, c: &Observable) -> Result<Unitary> {
    if a.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: c.dim(),
        });
    }
    let a_units = a
        .matrix_units()
        .map_err(|e| Error::Degenerate(format!("measured observable: {e}")))?;
    let c_units = c
        .matrix_units()
        .map_err(|e| Error::Degenerate(format!("rotated observable: {e}")))?;
    let mut used = vec![false; c.outcomes()];
    let mut matrix = ComplexMatrix::zeros(a.dim());
    for (i, &alpha) in a.eigenvalues().iter().enumerate() {
        let j = c
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .find(|(_, &gamma)| (gamma - alpha).abs() < 1e-9)
            .map(|(j, _)| j)
            .ok_or_else(|| {
                Error::SpectrumMismatch(format!("eigenvalue {alpha} has no partner"))
            })?;
        used[j] = true;
        matrix = &matrix + &ComplexMatrix::outer(a_units.vector(i), c_units.vector(j));
    }
    Unitary::new(matrix)
}

/// Outcome of measuring a non-commuting observable onto an existing record.
#[derive(Debug, Clone)]
pub struct SequentialReport {
    /// `Â₂(3)` by direct conjugation.
    pub record_final: ComplexMatrix,
    /// `Ĉ₁(1)` on the joint space.
    pub rotated_at_1: ComplexMatrix,
    /// `U_1`, `U_2`, `U_3`.
    pub motions: [Unitary; 3],
    /// Number of eigenvalue classes of `Â₂(3)` overlapping each time-0 joint
    /// record branch `B_1a ⊗ B_2c`, indexed `a·N + c`.
    pub branch_counts: Vec<usize>,
    /// `[Â₁, Ĉ₁] = 0`: the second step repeats the first measurement.
    pub commuting: bool,
}

impl SequentialReport {
    pub fn min_branches(&self) -> usize {
        self.branch_counts.iter().copied().min().unwrap_or(0)
    }

    pub fn max_branches(&self) -> usize {
        self.branch_counts.iter().copied().max().unwrap_or(0)
    }
}

/// Measure `Â₁` onto `Â₂`, rotate system 1 so that `Â₁(2) = Ĉ₁(1)`, then
/// measure again with the same motion written in time-2 operators.
pub fn sequential_measurement(
    measured: &Observable,
    rotated: &Observable,
    record: &Observable,
    phases: &PhaseAssignment,
    space: &CompositeSpace,
) -> Result<SequentialReport> {
    let n = measured.dim();
    if space.dims() != [n, n] || rotated.dim() != n || record.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: record.dim(),
        });
    }
    let record_units = record
        .matrix_units()
        .map_err(|e| Error::Degenerate(format!("record observable: {e}")))?;
    let step = measurement_unitary(measured.family(), &record_units, phases, space)?;
    let rotation = rotation_onto(measured, rotated)?;
    let local = Unitary::new(tensor_embed(rotation.matrix(), 0, space)?)?;
    let u1 = step.clone();
    let u2 = u1.then_apply(&local)?;
    let u3 = u2.then_apply(&step)?;

    let record_joint = tensor_embed(record.matrix(), 1, space)?;
    let record_final = evolve(&record_joint, &u3)?;
    let rotated_at_1 = evolve(&tensor_embed(rotated.matrix(), 0, space)?, &u1)?;

    let final_obs = crate::operator::spectral_decompose(&record_final, crate::GROUPING_TOL)?;
    let mut branch_counts = Vec::with_capacity(n * n);
    for a in 0..n {
        let pa = tensor_embed(measured.family().projector(a), 0, space)?;
        for c in 0..n {
            let pc = tensor_embed(record.family().projector(c), 1, space)?;
            let branch = &pa * &pc;
            let count = final_obs
                .family()
                .projectors()
                .iter()
                .filter(|q| (*q * &branch).norm() > 1e-6)
                .count();
            branch_counts.push(count);
        }
    }
    let commuting = measured.matrix().commutator(rotated.matrix()).norm() < ALGEBRA_TOL;
    Ok(SequentialReport {
        record_final,
        rotated_at_1,
        motions: [u1, u2, u3],
        branch_counts,
        commuting,
    })
}
