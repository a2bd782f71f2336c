
use crate::darwinism::phase_equivalent;
use crate::error::{Error, Result};
use crate::matrix::{kron_vec, real, vector_norm, ComplexMatrix, Complex64, ZERO};
use crate::measurement::Multiplicities;
use crate::operator::{
    express_family, partial_trace, tensor_embed, CompositeSpace, HeisenbergState, MatrixUnitFamily, Observable,
    ProjectorFamily,
};
use crate::{ALGEBRA_TOL, DIMENSION_CAP, GROUPING_TOL};

use super::bracket::bracket_report;
use super::equal::{neutrality_residual, symmetrization};
use super::rational::record_construction;
use super::{
    bracket_value, born_oracle, check_weights, rational_value_reduced, value_from_weights, Method, PayoffFunction,
    RationalWeights, TrailEntry, ValueReport,
};

/// Bracket tolerance for irrational mixed weights.
const MIXED_BRACKET_TOL: f64 = 1e-11;

/// Refinement cap for internal brackets; the dyadic schedule stops at
/// `2^60` regardless.
pub(crate) const INTERNAL_ITERATION_CAP: usize = 61;

/// Mixed state `ρ = Σ_b μ_b C_b` over orthogonal projectors `C_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedGameSpec {
    weights: Vec<f64>,
    family: ProjectorFamily,
}

impl MixedGameSpec {
    pub fn new(weights: Vec<f64>, family: ProjectorFamily) -> Result<Self> {
        check_weights(&weights, family.len())?;
        Ok(Self { weights, family })
    }

    /// Spectral form of a state.
    pub fn from_state(state: &HeisenbergState) -> Result<Self> {
        let spectral = crate::operator::spectral_decompose(state.matrix(), GROUPING_TOL)?;
        let ranks = spectral.family().ranks();
        let raw: Vec<f64> = spectral.eigenvalues().iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = raw.iter().zip(&ranks).map(|(x, r)| x * r.round()).sum();
        // Each class carries its eigenvalue once per dimension.
        let weights = raw.iter().zip(&ranks).map(|(x, r)| x * r.round() / total).collect();
        Ok(Self {
            weights,
            family: spectral.family().clone(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn family(&self) -> &ProjectorFamily {
        &self.family
    }

    /// `Σ_b μ_b C_b / Tr(C_b)`
    pub fn state(&self) -> Result<HeisenbergState> {
        let m: ComplexMatrix = self
            .family
            .projectors()
            .iter()
            .zip(&self.weights)
            .map(|(p, &mu)| p.scale_real(mu / p.trace().re.round().max(1.0)))
            .sum();
        HeisenbergState::new(m)
    }

    /// `λ_de = |Σ_b μ_b β_bde|` over the observable's matrix units.
    pub fn lambda(&self, obs: &Observable) -> Result<Vec<Vec<f64>>> {
        let mixed = self.mixed_coefficients(obs)?;
        Ok(mixed.iter().map(|row| row.iter().map(|z| z.norm()).collect()).collect())
    }

    fn mixed_coefficients(&self, obs: &Observable) -> Result<Vec<Vec<Complex64>>> {
        let units = obs
            .matrix_units()
            .map_err(|e| Error::Degenerate(format!("measured observable: {e}")))?;
        let beta = express_family(&self.family, &units)?;
        let n = units.dim();
        let mut out = vec![vec![ZERO; n]; n];
        for (b, &mu) in self.weights.iter().enumerate() {
            let norm = 1.0 / self.family.projector(b).trace().re.round().max(1.0);
            for (d, row) in out.iter_mut().enumerate() {
                for (e, z) in row.iter_mut().enumerate() {
                    *z += beta.get(b, d, e) * (mu * norm);
                }
            }
        }
        Ok(out)
    }
}

/// Value of a game in a mixed state.
///
/// * 4.1: the mixture's projectors do not commute with the observable. The
///   state is purified and the pure game is evaluated by stages 1–3.
/// * 4.2: equal weights on the observable's projectors.
/// * 4.3: rational weights, via a coarse measurement from `ρ₁ ⊗ |u⟩⟨u|`.
/// * 4.4: irrational weights, bracketed by 4.3 games.
pub fn stage4_value(spec: &MixedGameSpec, obs: &Observable) -> Result<ValueReport> {
    if spec.family.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: spec.family.dim(),
        });
    }
    let units = obs
        .matrix_units()
        .map_err(|e| Error::Degenerate(format!("measured observable: {e}")))?;
    let state = spec.state()?;
    let oracle = born_oracle(&state, obs, &PayoffFunction::eigenvalues(obs))?;
    if spec.family.commutation_defect(obs.family()) > ALGEBRA_TOL {
        return unsharp(spec, obs, &units, &state).map(|r| r.against(oracle));
    }
    let weights: Vec<f64> = obs
        .family()
        .projectors()
        .iter()
        .map(|p| (state.matrix() * p).trace().re.max(0.0))
        .collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let alpha = obs.eigenvalues();
    let n = alpha.len();

    if weights.iter().all(|w| (w - 1.0 / n as f64).abs() < 1e-12) {
        return equal(obs, &units, &state).map(|r| r.against(oracle));
    }
    let kept: Vec<usize> = (0..n).filter(|&a| weights[a] > 1e-14).collect();
    let kept_w: Vec<f64> = kept.iter().map(|&a| weights[a]).collect();
    if let Some(rational) = RationalWeights::detect(&kept_w, DIMENSION_CAP / kept.len(), 1e-12) {
        let mult = Multiplicities::new(rational.counts().to_vec())?;
        let (value, trail) = if kept.len() == n {
            let rho1: ComplexMatrix = obs
                .family()
                .projectors()
                .iter()
                .zip(rational.weights())
                .map(|(p, w)| p.scale_real(w))
                .sum();
            record_construction(&rho1, &units, obs.family(), alpha, &mult)?
        } else {
            let values: Vec<f64> = kept.iter().map(|&a| alpha[a]).collect();
            diagonal_record(&values, &mult)?
        };
        return Ok(ValueReport::new(value, Method::MixedRational, oracle, trail));
    }
    let bracket = bracket_value(alpha, &weights, MIXED_BRACKET_TOL, INTERNAL_ITERATION_CAP, mixed_rational)?;
    Ok(bracket_report(&bracket, Method::MixedBracketed, alpha, &weights, MIXED_BRACKET_TOL).against(oracle))
}

/// A rational mixed game `ρ₁ = Σ (m_a/M) |a⟩⟨a|` in the computational basis.
fn diagonal_record(values: &[f64], mult: &Multiplicities) -> Result<(f64, Vec<TrailEntry>)> {
    let n = values.len();
    let units = MatrixUnitFamily::computational(n);
    let m = mult.total() as f64;
    let rho1 = ComplexMatrix::diagonal(&mult.counts().iter().map(|&k| k as f64 / m).collect::<Vec<_>>());
    record_construction(&rho1, &units, &units.projectors(), values, mult)
}

fn mixed_rational(values: &[f64], counts: &[usize]) -> Result<f64> {
    let (vals, kept): (Vec<f64>, Vec<usize>) = values
        .iter()
        .zip(counts)
        .filter(|(_, &k)| k > 0)
        .map(|(&v, &k)| (v, k))
        .unzip();
    let m: usize = kept.iter().sum();
    if vals.len() * m <= DIMENSION_CAP {
        Ok(diagonal_record(&vals, &Multiplicities::new(kept)?)?.0)
    } else {
        Ok(rational_value_reduced(&vals, &kept))
    }
}

fn equal(obs: &Observable, units: &MatrixUnitFamily, state: &HeisenbergState) -> Result<ValueReport> {
    let alpha = obs.eigenvalues();
    let n = alpha.len() as f64;
    let scale = alpha.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let expected = obs.function(&alpha.iter().map(|a| a / n).collect::<Vec<_>>())?;
    let mut trail = vec![
        TrailEntry::new(
            "mixed uniform product",
            (state.matrix() * obs.matrix()).distance(&expected),
            ALGEBRA_TOL * scale,
        ),
        TrailEntry::new(
            "classical act neutrality",
            neutrality_residual(obs, units, state.matrix())?,
            ALGEBRA_TOL * scale,
        ),
    ];
    let value = if alpha.len() <= super::SYMMETRIZATION_LIMIT {
        let (symmetrized, residual) = symmetrization(alpha)?;
        trail.push(TrailEntry::new("symmetrization identity", residual, ALGEBRA_TOL * scale * n));
        symmetrized / n
    } else {
        trail.push(TrailEntry::new("symmetrization identity (counting)", 0.0, ALGEBRA_TOL));
        alpha.iter().sum::<f64>() / n
    };
    Ok(ValueReport::new(value, Method::MixedEqual, 0.0, trail))
}

fn unsharp(
    spec: &MixedGameSpec,
    obs: &Observable,
    units: &MatrixUnitFamily,
    state: &HeisenbergState,
) -> Result<ValueReport> {
    let n = units.dim();
    let alpha = obs.eigenvalues();
    let scale = alpha.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let mixed = spec.mixed_coefficients(obs)?;
    let product = state.matrix() * obs.matrix();

    // ρÂ = Σ_de (Σ_b μ_b β_bde) α_e S_de
    let mut expansion = ComplexMatrix::zeros(n);
    for d in 0..n {
        for e in 0..n {
            expansion = &expansion + &units.unit(d, e).scale(mixed[d][e] * alpha[e]);
        }
    }
    let lambda_max = mixed.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let mut trail = vec![
        TrailEntry::new("mixture expansion", product.distance(&expansion), ALGEBRA_TOL * scale),
        TrailEntry::new("lambda bound", (lambda_max - 1.0).max(0.0), ALGEBRA_TOL),
    ];

    // Ψ = Σ_k √μ_k |c_k⟩ ⊗ |k⟩ over the eigenvectors of every C_b.
    let mut components: Vec<(f64, Vec<Complex64>)> = Vec::new();
    for (b, &mu) in spec.weights.iter().enumerate() {
        let proj = spec.family.projector(b);
        let rank = proj.trace().re.round().max(1.0);
        if mu <= 0.0 {
            continue;
        }
        let (vals, vecs) = proj.eigh();
        for (v, vec) in vals.iter().zip(vecs) {
            if *v > 0.5 {
                components.push((mu / rank, vec));
            }
        }
    }
    let k = components.len();
    let space = CompositeSpace::pair(n, k)?;
    if space.total_dim() > DIMENSION_CAP {
        return Err(Error::CapExceeded {
            dim: space.total_dim(),
            cap: DIMENSION_CAP,
        });
    }
    let mut psi = vec![ZERO; n * k];
    for (i, (mu, v)) in components.iter().enumerate() {
        let mut label = vec![ZERO; k];
        label[i] = real(1.0);
        for (slot, z) in psi.iter_mut().zip(kron_vec(v, &label)) {
            *slot += z * mu.sqrt();
        }
    }
    let norm = vector_norm(&psi);
    let pure = HeisenbergState::pure(&psi)?;
    trail.push(TrailEntry::new("purification pure", pure.purity_defect().max((norm - 1.0).abs()), ALGEBRA_TOL));

    let lifted = tensor_embed(obs.matrix(), 0, &space)?;
    let reduced = partial_trace(&(pure.matrix() * &lifted), 0, &space)?;
    let link = if phase_equivalent(&reduced, &product, obs.family()) {
        reduced.distance(&product)
    } else {
        f64::INFINITY
    };
    trail.push(TrailEntry::new("reduced product", link, ALGEBRA_TOL * scale));

    let weights: Vec<f64> = obs
        .family()
        .projectors()
        .iter()
        .map(|p| {
            let branch = tensor_embed(p, 0, &space).expect("slot 0 has the observable's dimension");
            vector_norm(&branch.apply(&psi)).powi(2)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let inner = value_from_weights(alpha, &weights)?;
    trail.extend(inner.trail.iter().cloned());
    Ok(ValueReport::new(inner.value, Method::MixedUnsharp, 0.0, trail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_observable, random_weights, seeded};

    fn computational_spec(weights: &[f64]) -> MixedGameSpec {
        MixedGameSpec::new(weights.to_vec(), ProjectorFamily::computational(weights.len())).unwrap()
    }

    #[test]
    fn equal_mixture_of_three() {
        let r = stage4_value(&computational_spec(&[1.0 / 3.0; 3]), &Observable::diagonal(&[1.0, 2.0, 3.0]).unwrap())
            .unwrap();
        assert_eq!(r.method, Method::MixedEqual);
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.passed(1e-9), "{r:?}");
    }

    #[test]
    fn unsharp_symmetric_spectrum() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let family = ProjectorFamily::from_basis(&[vec![real(s), real(s)], vec![real(s), real(-s)]]).unwrap();
        let obs = Observable::from_values(vec![-1.0, 1.0], family).unwrap();
        let r = stage4_value(&computational_spec(&[0.5, 0.5]), &obs).unwrap();
        assert_eq!(r.method, Method::MixedUnsharp);
        assert!(r.value.abs() < 1e-12);
        assert!(r.passed(1e-9), "{r:?}");
    }

    #[test]
    fn rational_quarter() {
        let r = stage4_value(&computational_spec(&[0.25, 0.75]), &Observable::diagonal(&[0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(r.method, Method::MixedRational);
        assert!((r.value - 0.75).abs() < 1e-12);
        let identity = r.trail.iter().find(|t| t.check == "record identity").unwrap();
        assert!(identity.residual < 1e-9);
        assert!(r.passed(1e-9), "{r:?}");
    }

    #[test]
    fn rational_in_rotated_basis() {
        let mut rng = seeded(93);
        let obs = random_observable(&mut rng, 3);
        let spec = MixedGameSpec::new(vec![1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0], obs.family().clone()).unwrap();
        let r = stage4_value(&spec, &obs).unwrap();
        assert_eq!(r.method, Method::MixedRational);
        assert!(r.passed(1e-9), "{r:?}");
    }

    #[test]
    fn irrational_mixture_is_bracketed() {
        let s = 0.5f64.sqrt();
        let r = stage4_value(&computational_spec(&[1.0 - s, s]), &Observable::diagonal(&[0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(r.method, Method::MixedBracketed);
        assert!(r.passed(1e-9), "{r:?}");
    }

    #[test]
    fn random_unsharp_mixtures_match_oracle() {
        let mut rng = seeded(94);
        for n in 2..=4 {
            let obs = random_observable(&mut rng, n);
            let spec = computational_spec(&random_weights(&mut rng, n));
            let r = stage4_value(&spec, &obs).unwrap();
            assert_eq!(r.method, Method::MixedUnsharp);
            assert!(r.passed(1e-9), "{r:?}");
            for row in spec.lambda(&obs).unwrap() {
                assert!(row.iter().all(|&l| l < 1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn invalid_mixture_weights() {
        assert!(MixedGameSpec::new(vec![0.5, 0.6], ProjectorFamily::computational(2)).is_err());
        assert!(MixedGameSpec::new(vec![1.5, -0.5], ProjectorFamily::computational(2)).is_err());
    }
}
