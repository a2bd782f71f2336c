//! Information flow between observables: classical acts, perfect correlation,
//! branch structure and phase indifference.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{inner_product, phase, ComplexMatrix, Complex64};
use crate::measurement::{Permutation, PhaseAssignment};
use crate::operator::{
    conjugate, partial_trace, slot_matrix_element, tensor_embed, CompositeSpace, Observable, ProjectorFamily,
    Unitary,
};
use crate::{CORRELATION_TOL, GROUPING_TOL};

/// Classical act `U = Σ_b exp(iφ_b) S_{b π(b)}` read off in an observable's
/// matrix units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStructure {
    pub permutation: Permutation,
    /// `φ_b` reduced to `[0, 2π)`.
    pub phases: PhaseAssignment,
    pub branch_count: usize,
}

impl BranchStructure {
    /// Eigenvalue attached to each projector `B_b` after the act: the value
    /// `α_a` moves to `B_{π(a)}`.
    pub fn evolved_eigenvalues(&self, values: &[f64]) -> Vec<f64> {
        let inv = self.permutation.inverse();
        (0..self.branch_count).map(|b| values[inv.apply(b)]).collect()
    }
}

/// Outcome of [`correlation_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub correlated: bool,
    /// `table[a][b] = c`: with the recording system in its basis state `c`,
    /// outcome `a` of the local observable is recorded as outcome `b`.
    /// Present only for a correlated pair whose record basis and recorded
    /// values pair up one-to-one.
    pub bijection: Option<Vec<Vec<usize>>>,
    /// Worst residual met by the test, or the first failing one.
    pub residual: f64,
    /// Slot carrying the local observable.
    pub local_slot: Option<usize>,
    /// Record basis vectors `c` on the remaining slots.
    #[serde(skip)]
    pub record_basis: Vec<Vec<Complex64>>,
    /// Distinct values `b` of the recording observable, ascending.
    pub record_values: Vec<f64>,
    /// Reason for a negative verdict.
    pub failure: Option<String>,
}

impl CorrelationReport {
    fn failed(residual: f64, reason: impl Into<String>) -> Self {
        Self {
            correlated: false,
            bijection: None,
            residual,
            local_slot: None,
            record_basis: Vec::new(),
            record_values: Vec::new(),
            failure: Some(reason.into()),
        }
    }

    /// The bijection table relabelled onto a caller's record basis and value
    /// list. `None` when a vector or value has no partner.
    pub fn table_in(&self, basis: &[Vec<Complex64>], values: &[f64]) -> Option<Vec<Vec<usize>>> {
        let table = self.bijection.as_ref()?;
        let c_map: Option<Vec<usize>> = self
            .record_basis
            .iter()
            .map(|v| {
                basis
                    .iter()
                    .position(|w| (inner_product(w, v).norm() - 1.0).abs() < 1e-6)
            })
            .collect();
        let b_map: Option<Vec<usize>> = self
            .record_values
            .iter()
            .map(|&x| values.iter().position(|&y| (x - y).abs() < 1e-6))
            .collect();
        let (c_map, b_map) = (c_map?, b_map?);
        let mut out = vec![vec![0; values.len()]; table.len()];
        for (a, row) in table.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                out[a][b_map[b]] = c_map[c];
            }
        }
        Some(out)
    }
}

/// Recognises `u` as a classical act on `obs`: a relabelling of its
/// projectors up to phases. `Ok(None)` if it is not one.
pub fn is_classical_act(u: &Unitary, obs: &Observable) -> Result<Option<BranchStructure>> {
    if u.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: u.dim(),
        });
    }
    let units = obs
        .matrix_units()
        .map_err(|e| Error::Degenerate(format!("permutation ill-defined: {e}")))?;
    let coeffs = units.coefficients(u.matrix());
    let tol = 1e-9;
    let n = units.dim();
    let mut mapping = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    for row in &coeffs {
        let hits: Vec<usize> = (0..n).filter(|&c| row[c].norm() > tol).collect();
        match hits.as_slice() {
            [c] if (row[*c].norm() - 1.0).abs() < tol => {
                mapping.push(*c);
                phases.push(row[*c].arg().rem_euclid(TAU));
            }
            _ => return Ok(None),
        }
    }
    let Ok(permutation) = Permutation::new(mapping) else {
        return Ok(None);
    };
    Ok(Some(BranchStructure {
        permutation,
        phases: PhaseAssignment::vector(phases)?,
        branch_count: n,
    }))
}

/// [`is_classical_act`] that fails for non-classical motions.
pub fn branch_decomposition(u: &Unitary, obs: &Observable) -> Result<BranchStructure> {
    is_classical_act(u, obs)?.ok_or_else(|| {
        Error::NotClassical(
            "motion mixes the observable's projectors: some matrix-unit row lacks a single unit-modulus entry"
                .into(),
        )
    })
}

/// Tests whether two observables on a composite space are perfectly
/// correlated.
///
/// One of them must act on a single slot and be nondegenerate there. The
/// other must commute with it, so it splits as `Σ_a P_a ⊗ Y_a` over the
/// local eigenprojectors `P_a`. The `Y_a` must share an eigenbasis `{c}`,
/// and for every `c` the outcome recorded for `a` must differ between
/// distinct `a`. Both orientations are tried.
pub fn correlation_check(x: &ComplexMatrix, y: &ComplexMatrix, space: &CompositeSpace) -> Result<CorrelationReport> {
    for op in [x, y] {
        if op.dim() != space.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.total_dim(),
                found: op.dim(),
            });
        }
    }
    let scale = x.max_abs().max(y.max_abs()).max(1.0);
    let tol = CORRELATION_TOL * scale;
    let commutator = x.commutator(y).norm();
    if commutator > tol {
        return Ok(CorrelationReport::failed(commutator, "observables do not commute"));
    }
    let first = oriented(x, y, space, tol)?;
    if first.correlated {
        return Ok(first);
    }
    let second = oriented(y, x, space, tol)?;
    if second.correlated {
        return Ok(second);
    }
    Ok(if first.failure.is_some() && first.residual >= second.residual {
        first
    } else {
        second
    })
}

/// [`correlation_check`] after conjugating both observables by `frame`,
/// `X ↦ F X F†`. With `F = U_t` this reads time-`t` observables in the
/// operator basis of time `t`.
pub fn correlation_check_in_frame(
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    space: &CompositeSpace,
    frame: &Unitary,
) -> Result<CorrelationReport> {
    correlation_check(&conjugate(x, frame)?, &conjugate(y, frame)?, space)
}

fn oriented(local: &ComplexMatrix, other: &ComplexMatrix, space: &CompositeSpace, tol: f64) -> Result<CorrelationReport> {
    let mut best = CorrelationReport::failed(f64::INFINITY, "no slot carries a local observable");
    for slot in 0..space.slots() {
        let others = (space.total_dim() / space.dims()[slot]) as f64;
        let reduced = partial_trace(local, slot, space)?.scale_real(1.0 / others);
        let defect = local.distance(&tensor_embed(&reduced, slot, space)?);
        if defect > tol {
            if defect < best.residual {
                best = CorrelationReport::failed(defect, "no slot carries a local observable");
            }
            continue;
        }
        let report = controlled_by(&reduced, slot, other, space, tol)?;
        if report.correlated {
            return Ok(report);
        }
        best = report;
    }
    Ok(best)
}

fn controlled_by(
    local: &ComplexMatrix,
    slot: usize,
    other: &ComplexMatrix,
    space: &CompositeSpace,
    tol: f64,
) -> Result<CorrelationReport> {
    let (values, vectors) = local.eigh();
    if values.windows(2).any(|w| w[1] - w[0] < GROUPING_TOL) {
        return Ok(CorrelationReport::failed(0.0, "local observable is degenerate"));
    }
    let mut residual = 0.0_f64;
    let mut blocks = Vec::with_capacity(vectors.len());
    for (a, u) in vectors.iter().enumerate() {
        for (b, v) in vectors.iter().enumerate() {
            if a != b {
                let off = slot_matrix_element(other, slot, u, v, space)?.norm();
                residual = residual.max(off);
            }
        }
        blocks.push(slot_matrix_element(other, slot, u, u, space)?);
    }
    if residual > tol {
        return Ok(CorrelationReport::failed(residual, "recording observable is not block diagonal"));
    }
    for (i, p) in blocks.iter().enumerate() {
        for q in &blocks[i + 1..] {
            residual = residual.max(p.commutator(q).norm());
        }
    }
    if residual > tol {
        return Ok(CorrelationReport::failed(residual, "conditional records do not commute"));
    }

    // A generic combination separates the joint eigenspaces.
    let probe: ComplexMatrix = blocks
        .iter()
        .enumerate()
        .map(|(a, blk)| blk.scale_real((2.0 + a as f64).sqrt()))
        .sum();
    let (_, basis) = probe.eigh();

    let mut record_values: Vec<f64> = Vec::new();
    let mut recorded = vec![vec![0.0; basis.len()]; blocks.len()];
    for (a, blk) in blocks.iter().enumerate() {
        for (c, v) in basis.iter().enumerate() {
            let image = blk.apply(v);
            let value = inner_product(v, &image).re;
            let miss: f64 = image
                .iter()
                .zip(v)
                .map(|(w, x)| (w - x * value).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residual = residual.max(miss);
            recorded[a][c] = value;
            record_values.push(value);
        }
    }
    if residual > tol {
        return Ok(CorrelationReport::failed(residual, "conditional records share no eigenbasis"));
    }
    record_values.sort_by(f64::total_cmp);
    record_values.dedup_by(|x, y| (*x - *y).abs() < GROUPING_TOL.max(tol));
    let label = |value: f64| {
        record_values
            .iter()
            .position(|&r| (r - value).abs() < GROUPING_TOL.max(tol))
            .expect("value was collected")
    };
    let labels: Vec<Vec<usize>> = recorded
        .iter()
        .map(|row| row.iter().map(|&v| label(v)).collect())
        .collect();

    for c in 0..basis.len() {
        let mut seen = vec![false; record_values.len()];
        for row in &labels {
            if std::mem::replace(&mut seen[row[c]], true) {
                return Ok(CorrelationReport::failed(
                    residual,
                    "two local outcomes leave the same record",
                ));
            }
        }
    }

    // table[a][b] = c exists when each (a, b) fixes a unique record vector.
    let bijection = if basis.len() == record_values.len() {
        let mut table = vec![vec![usize::MAX; record_values.len()]; labels.len()];
        let mut ok = true;
        for (a, row) in labels.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                ok &= table[a][b] == usize::MAX;
                table[a][b] = c;
            }
        }
        ok.then_some(table)
    } else {
        None
    };
    Ok(CorrelationReport {
        correlated: true,
        bijection,
        residual,
        local_slot: Some(slot),
        record_basis: basis,
        record_values,
        failure: None,
    })
}

/// True iff `y = D x D†` for a unitary `D = Σ_a exp(iθ_a) B_a` that is
/// diagonal in `basis`.
pub fn phase_equivalent(x: &ComplexMatrix, y: &ComplexMatrix, basis: &ProjectorFamily) -> bool {
    phase_equivalent_within(x, y, basis, CORRELATION_TOL)
}

pub fn phase_equivalent_within(x: &ComplexMatrix, y: &ComplexMatrix, basis: &ProjectorFamily, tol: f64) -> bool {
    if x.dim() != y.dim() || basis.dim() != x.dim() {
        return false;
    }
    let tol = tol * x.max_abs().max(y.max_abs()).max(1.0);
    let n = basis.len();
    let block = |m: &ComplexMatrix, d: usize, e: usize| &(basis.projector(d) * m) * basis.projector(e);
    let mut xb = Vec::with_capacity(n * n);
    let mut yb = Vec::with_capacity(n * n);
    for d in 0..n {
        for e in 0..n {
            let (bx, by) = (block(x, d, e), block(y, d, e));
            if (bx.norm() - by.norm()).abs() > tol || (d == e && bx.distance(&by) > tol) {
                return false;
            }
            xb.push(bx);
            yb.push(by);
        }
    }

    let mut theta: Vec<Option<f64>> = vec![None; n];
    for root in 0..n {
        if theta[root].is_some() {
            continue;
        }
        theta[root] = Some(0.0);
        let mut queue = VecDeque::from([root]);
        while let Some(d) = queue.pop_front() {
            let td = theta[d].unwrap();
            for e in 0..n {
                let (bx, by) = (&xb[d * n + e], &yb[d * n + e]);
                if theta[e].is_some() || bx.norm() <= tol {
                    continue;
                }
                // y_de = exp(i(θ_d − θ_e)) x_de
                let overlap = (&bx.adjoint() * by).trace();
                theta[e] = Some(td - overlap.arg());
                queue.push_back(e);
            }
        }
    }
    let d: ComplexMatrix = (0..n)
        .map(|a| basis.projector(a).scale(phase(theta[a].unwrap())))
        .sum();
    (&(&d * x) * &d.adjoint()).distance(y) <= tol
}
