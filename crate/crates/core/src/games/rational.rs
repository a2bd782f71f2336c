use crate::error::{Error, Result};
use crate::matrix::{kron_vec, real, ComplexMatrix};
use crate::measurement::{
    block_vector, coarse_measurement_unitary, permutation_unitary, ready_vector, Multiplicities, Permutation,
    PhaseAssignment,
};
use crate::operator::{
    conjugate, evolve, tensor_embed, CompositeSpace, HeisenbergState, MatrixUnitFamily, Observable,
    ProjectorFamily, Spectrum, Unitary,
};
use crate::{ALGEBRA_TOL, DIMENSION_CAP};

use super::{born_oracle, Method, PayoffFunction, RationalWeights, TrailEntry, ValueReport};

/// Residual bound for identities built from products of evolved operators.
pub(crate) const RECORD_TOL: f64 = 1e-9;

/// Value of a pure-state game with rational weights `m_a / M`.
///
/// System 1 holds `Σ_a √(m_a/M) |a⟩`, the `M`-level register starts in its
/// uniform ready state, and a coarse measurement spreads outcome `a` over
/// `m_a` register levels. Measuring the register is then an equal-weight
/// game over `M` outcomes with the same product `ρÂ`.
pub fn stage2_value(spectrum: &Spectrum, weights: &RationalWeights) -> Result<ValueReport> {
    let n = spectrum.len();
    if weights.len() != n {
        return Err(Error::InvalidMultiplicities(format!(
            "{} multiplicities for {n} outcomes",
            weights.len()
        )));
    }
    let mult = Multiplicities::new(weights.counts().to_vec())
        .map_err(|e| Error::InvalidMultiplicities(format!("{e}; bracket zero weights instead")))?;
    let m = mult.total();
    if n * m > DIMENSION_CAP {
        return Err(Error::CapExceeded {
            dim: n * m,
            cap: DIMENSION_CAP,
        });
    }
    let units = MatrixUnitFamily::computational(n);
    let amplitudes: Vec<_> = weights.weights().iter().map(|w| real(w.sqrt())).collect();
    let rho1 = ComplexMatrix::outer(&amplitudes, &amplitudes);
    let obs = Observable::from_units(spectrum.values().to_vec(), &units)?;
    let (value, trail) = record_construction(&rho1, &units, obs.family(), spectrum.values(), &mult)?;
    let oracle = born_oracle(&HeisenbergState::new(rho1)?, &obs, &PayoffFunction::eigenvalues(&obs))?;
    Ok(ValueReport::new(value, Method::Rational, oracle, trail))
}

/// `Σ m_a α_a / M` without building the register; outcomes with `m_a = 0`
/// drop out.
pub fn rational_value_reduced(values: &[f64], counts: &[usize]) -> f64 {
    let m: usize = counts.iter().sum();
    values
        .iter()
        .zip(counts)
        .filter(|(_, &k)| k > 0)
        .map(|(v, &k)| v * k as f64)
        .sum::<f64>()
        / m as f64
}

/// Runs the coarse measurement for `ρ₁ ⊗ |u⟩⟨u|` and returns the
/// equal-weight register value with its trail.
pub(crate) fn record_construction(
    rho1: &ComplexMatrix,
    units1: &MatrixUnitFamily,
    family1: &ProjectorFamily,
    alpha: &[f64],
    mult: &Multiplicities,
) -> Result<(f64, Vec<TrailEntry>)> {
    let n = units1.dim();
    let m = mult.total();
    let space = CompositeSpace::pair(n, m)?;
    if space.total_dim() > DIMENSION_CAP {
        return Err(Error::CapExceeded {
            dim: space.total_dim(),
            cap: DIMENSION_CAP,
        });
    }
    let units2 = MatrixUnitFamily::computational(m);
    let ready = ready_vector(&units2);
    let rho = rho1.kron(&ComplexMatrix::outer(&ready, &ready));

    let a1_local: ComplexMatrix = family1
        .projectors()
        .iter()
        .zip(alpha)
        .map(|(p, &x)| p.scale_real(x))
        .sum();
    let a1 = tensor_embed(&a1_local, 0, &space)?;
    let alpha2 = mult.expand(alpha);
    let a2 = tensor_embed(Observable::from_units(alpha2.clone(), &units2)?.matrix(), 1, &space)?;

    let u = coarse_measurement_unitary(family1, &units2, mult, &space)?;
    let a2_after = evolve(&a2, &u)?;
    let scale = alpha.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let mut trail = vec![
        TrailEntry::new("record identity", (&rho * &a2_after).distance(&(&rho * &a1)), RECORD_TOL * scale),
        TrailEntry::new("control unchanged", evolve(&a1, &u)?.distance(&a1), ALGEBRA_TOL * scale),
        TrailEntry::new(
            "register permutation invariance",
            register_invariance(&rho, &a1, &units2, &space)?,
            ALGEBRA_TOL * scale,
        ),
    ];

    let rho_after = conjugate(&rho, &u)?;
    let coeffs = units1.coefficients(rho1);
    let mut predicted = ComplexMatrix::zeros(space.total_dim());
    for a in 0..n {
        for b in 0..n {
            let left = kron_vec(units1.vector(a), &block_vector(&units2, mult, a));
            let right = kron_vec(units1.vector(b), &block_vector(&units2, mult, b));
            predicted = &predicted + &ComplexMatrix::outer(&left, &right).scale(coeffs[a][b]);
        }
    }
    trail.push(TrailEntry::new("record state", rho_after.distance(&predicted), RECORD_TOL));

    let mut weight_residual = 0.0_f64;
    for e in 0..m {
        let r = kron_vec(units1.vector(mult.block_of(e)), units2.vector(e));
        let w = crate::matrix::inner_product(&r, &rho_after.apply(&r)).re;
        weight_residual = weight_residual.max((w - 1.0 / m as f64).abs());
    }
    trail.push(TrailEntry::new("equal record weights", weight_residual, RECORD_TOL));

    let value = alpha2.iter().sum::<f64>() / m as f64;
    Ok((value, trail))
}

/// Permuting the register's matrix units leaves `ρ` and the system-1
/// observable alone. Checked on `(0 1)` and the full cycle, which generate
/// every register permutation.
fn register_invariance(
    rho: &ComplexMatrix,
    a1: &ComplexMatrix,
    units2: &MatrixUnitFamily,
    space: &CompositeSpace,
) -> Result<f64> {
    let m = units2.dim();
    let mut gens = vec![Permutation::cyclic_shift(m, 1)];
    if m > 1 {
        gens.push(Permutation::transposition(m, 0, 1));
    }
    let mut worst = 0.0_f64;
    for sigma in gens {
        let local = permutation_unitary(units2, &sigma, &PhaseAssignment::zeros(m))?;
        let w = Unitary::new(tensor_embed(local.matrix(), 1, space)?)?;
        worst = worst
            .max(conjugate(rho, &w)?.distance(rho))
            .max(conjugate(a1, &w)?.distance(a1));
    }
    Ok(worst)
}
