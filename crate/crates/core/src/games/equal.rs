use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::measurement::{permutation_unitary, PhaseAssignment, Permutation};
use crate::operator::{conjugate, evolve, HeisenbergState, MatrixUnitFamily, Observable};
use crate::ALGEBRA_TOL;

use super::{born_oracle, payoff_permute, Method, PayoffFunction, TrailEntry, ValueReport};

/// Largest `N` for which all `N!` permutations are enumerated.
pub const SYMMETRIZATION_LIMIT: usize = 8;

/// Largest `N` for which every permutation is checked as a classical act;
/// above it only generators are.
const NEUTRALITY_LIMIT: usize = 5;

/// Value of the equal-weight game `ρ = (1/N) Σ_ab S_ab` for a nondegenerate
/// observable.
pub fn stage1_value(obs: &Observable) -> Result<ValueReport> {
    let units = obs
        .matrix_units()
        .map_err(|e| Error::Degenerate(format!("equal-weight game needs rank-one outcomes: {e}")))?;
    let n = units.dim();
    let alpha = obs.eigenvalues();
    let rho_matrix = uniform_superposition(&units);
    let rho = HeisenbergState::new(rho_matrix.clone())?;
    let mut trail = Vec::new();

    // ρÂ = (1/N) Σ_ab α_b S_ab
    let mut expected = ComplexMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            expected = &expected + &units.unit(a, b).scale_real(alpha[b] / n as f64);
        }
    }
    trail.push(TrailEntry::new(
        "uniform product",
        (&rho_matrix * obs.matrix()).distance(&expected),
        ALGEBRA_TOL,
    ));

    trail.push(TrailEntry::new(
        "classical act neutrality",
        neutrality_residual(obs, &units, &rho_matrix)?,
        ALGEBRA_TOL,
    ));

    let sum: f64 = alpha.iter().sum();
    let value = if n <= SYMMETRIZATION_LIMIT {
        let (symmetrized, residual) = symmetrization(alpha)?;
        trail.push(TrailEntry::new(
            "symmetrization identity",
            residual,
            ALGEBRA_TOL * sum.abs().max(1.0),
        ));
        // N!·V equals the branch-independent payoff (N−1)!·Σα.
        symmetrized / n as f64
    } else {
        trail.push(TrailEntry::new("symmetrization identity (counting)", 0.0, ALGEBRA_TOL));
        sum / n as f64
    };

    let oracle = born_oracle(&rho, obs, &PayoffFunction::eigenvalues(obs))?;
    Ok(ValueReport::new(value, Method::Equal, oracle, trail))
}

/// `(1/N) Σ_ab S_ab`
pub(crate) fn uniform_superposition(units: &MatrixUnitFamily) -> ComplexMatrix {
    let n = units.dim();
    let mut rho = ComplexMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            rho = &rho + units.unit(a, b);
        }
    }
    rho.scale_real(1.0 / n as f64)
}

/// Sums `P₀∘π` over all permutations. Returns the per-branch payoff
/// `(1/(N−1)!) · Σ_π α_{π(j)}` averaged over branches, and the largest
/// deviation of any branch from `(N−1)!·Σα`, scaled by `1/(N−1)!`.
pub(crate) fn symmetrization(alpha: &[f64]) -> Result<(f64, f64)> {
    let n = alpha.len();
    let p0 = PayoffFunction::new(alpha.to_vec())?;
    let mut totals = vec![0.0; n];
    for pi in Permutation::all(n) {
        let p = payoff_permute(&p0, &pi)?;
        for (t, v) in totals.iter_mut().zip(p.values()) {
            *t += v;
        }
    }
    let fact_minus_one: f64 = (1..n).map(|k| k as f64).product();
    let expected = fact_minus_one * alpha.iter().sum::<f64>();
    let residual = totals
        .iter()
        .map(|t| (t - expected).abs() / fact_minus_one)
        .fold(0.0, f64::max);
    let mean = totals.iter().sum::<f64>() / n as f64;
    Ok((mean / fact_minus_one, residual))
}

/// For each checked `π`, the act `U` built from `π⁻¹` must fix `ρ` and
/// carry `Â` to `Σ_a α_{π(a)} B_a`.
pub(crate) fn neutrality_residual(obs: &Observable, units: &MatrixUnitFamily, rho: &ComplexMatrix) -> Result<f64> {
    let n = units.dim();
    let perms: Vec<Permutation> = if n <= NEUTRALITY_LIMIT {
        Permutation::all(n).collect()
    } else {
        let mut gens: Vec<Permutation> = (0..n - 1).map(|i| Permutation::transposition(n, i, i + 1)).collect();
        gens.push(Permutation::cyclic_shift(n, 1));
        gens
    };
    let mut worst = 0.0_f64;
    for pi in perms {
        let u = permutation_unitary(units, &pi.inverse(), &PhaseAssignment::zeros(n))?;
        worst = worst.max(conjugate(rho, &u)?.distance(rho));
        let permuted: Vec<f64> = (0..n).map(|a| obs.eigenvalues()[pi.apply(a)]).collect();
        worst = worst.max(evolve(obs.matrix(), &u)?.distance(&obs.function(&permuted)?));
    }
    Ok(worst)
}
