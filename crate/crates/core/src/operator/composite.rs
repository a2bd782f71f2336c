use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Complex64, ZERO};

/// Joint Hilbert space `H_0 ⊗ H_1 ⊗ …` with left-to-right tensor order and
/// row-major index fusion: the last slot varies fastest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeSpace {
    dims: Vec<usize>,
}

impl CompositeSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(Self { dims })
    }

    pub fn pair(n1: usize, n2: usize) -> Result<Self> {
        Self::new(vec![n1, n2])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn slots(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.dims.len() {
            return Err(Error::SlotOutOfRange {
                slot,
                slots: self.dims.len(),
            });
        }
        Ok(())
    }

    /// Per-slot indices of a fused index.
    pub fn split(&self, mut index: usize) -> Vec<usize> {
        let mut parts = vec![0; self.dims.len()];
        for (k, &d) in self.dims.iter().enumerate().rev() {
            parts[k] = index % d;
            index /= d;
        }
        parts
    }

    pub fn fuse(&self, parts: &[usize]) -> usize {
        parts
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&p, &d)| acc * d + p)
    }

    /// The space with `slot` removed.
    pub fn without(&self, slot: usize) -> Result<CompositeSpace> {
        self.check_slot(slot)?;
        let mut dims = self.dims.clone();
        dims.remove(slot);
        if dims.is_empty() {
            dims.push(1);
        }
        Ok(Self { dims })
    }
}

/// Places `op` at `slot`, identities elsewhere.
pub fn tensor_embed(op: &ComplexMatrix, slot: usize, space: &CompositeSpace) -> Result<ComplexMatrix> {
    space.check_slot(slot)?;
    if op.dim() != space.dims[slot] {
        return Err(Error::DimensionMismatch {
            expected: space.dims[slot],
            found: op.dim(),
        });
    }
    let before: usize = space.dims[..slot].iter().product();
    let after: usize = space.dims[slot + 1..].iter().product();
    Ok(ComplexMatrix::identity(before)
        .kron(op)
        .kron(&ComplexMatrix::identity(after)))
}

/// `(⟨bra| ⊗ 1) op (|ket⟩ ⊗ 1)` with the vectors acting on `slot`; the
/// result acts on the remaining slots in their original order.
pub fn slot_matrix_element(
    op: &ComplexMatrix,
    slot: usize,
    bra: &[Complex64],
    ket: &[Complex64],
    space: &CompositeSpace,
) -> Result<ComplexMatrix> {
    space.check_slot(slot)?;
    if op.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.total_dim(),
            found: op.dim(),
        });
    }
    let rest = space.without(slot)?;
    let m = rest.total_dim();
    let d = space.dims[slot];
    let full = |r: usize, k: usize| {
        let mut parts = if space.slots() == 1 { vec![] } else { rest.split(r) };
        parts.insert(slot, k);
        space.fuse(&parts)
    };
    let mut entries = vec![ZERO; m * m];
    for r in 0..m {
        for s in 0..m {
            let mut acc = ZERO;
            for i in 0..d {
                if bra[i] == ZERO {
                    continue;
                }
                for j in 0..d {
                    if ket[j] == ZERO {
                        continue;
                    }
                    acc += bra[i].conj() * op.get(full(r, i), full(s, j)) * ket[j];
                }
            }
            entries[r * m + s] = acc;
        }
    }
    Ok(ComplexMatrix::from_fn(m, |r, s| entries[r * m + s]))
}

/// Partial trace over every slot except `keep`.
pub fn partial_trace(op: &ComplexMatrix, keep: usize, space: &CompositeSpace) -> Result<ComplexMatrix> {
    space.check_slot(keep)?;
    if op.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.total_dim(),
            found: op.dim(),
        });
    }
    let d = space.dims[keep];
    let mut out = vec![ZERO; d * d];
    for r in 0..space.total_dim() {
        let parts = space.split(r);
        let i = parts[keep];
        let mut other = parts;
        for j in 0..d {
            other[keep] = j;
            out[i * d + j] += op.get(r, space.fuse(&other));
        }
    }
    Ok(ComplexMatrix::from_fn(d, |i, j| out[i * d + j]))
}
