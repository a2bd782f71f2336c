use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::measurement::{coarse_measurement_unitary, permutation_unitary, ready_vector, Multiplicities, Permutation, PhaseAssignment};
use crate::operator::{
    conjugate, evolve, spectral_decompose, tensor_embed, CompositeSpace, HeisenbergState, MatrixUnitFamily,
    Observable, Spectrum,
};
use crate::random::{random_hermitian, random_ket, random_observable, random_weights, seeded, SeededRng};
use crate::GROUPING_TOL;

use super::{game_value, payoff_sum, Game, PayoffFunction};

/// Residual bound for every axiom.
pub const AXIOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: String,
    pub trials: usize,
    pub worst_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

#[derive(Default)]
struct Tally {
    trials: usize,
    worst: f64,
}

impl Tally {
    fn record(&mut self, residual: f64) {
        self.trials += 1;
        // NaN counts as a failure.
        self.worst = if residual.is_nan() { f64::INFINITY } else { self.worst.max(residual) };
    }

    fn finish(self, axiom: &str) -> AxiomCheck {
        AxiomCheck {
            axiom: axiom.into(),
            trials: self.trials,
            worst_residual: self.worst,
            passed: self.worst <= AXIOM_TOL,
        }
    }
}

/// A game on `n` levels with a random nondegenerate observable, random
/// payoffs, and a pure or rank-two mixed state.
pub fn random_game(rng: &mut SeededRng, n: usize, pure: bool) -> Result<Game> {
    let obs = random_observable(rng, n);
    let state = if pure || n == 1 {
        HeisenbergState::pure(&random_ket(rng, n))?
    } else {
        let parts = [
            HeisenbergState::pure(&random_ket(rng, n))?,
            HeisenbergState::pure(&random_ket(rng, n))?,
        ];
        HeisenbergState::mixture(&random_weights(rng, 2), &parts)?
    };
    let payoff = PayoffFunction::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())?;
    Game::new(state, obs, payoff)
}

/// Checks physicality, dominance, additivity, classical act neutrality and
/// argmax-level neutrality of [`game_value`] on `sample`.
pub fn verify_rationality_axioms(sample: &[Game], seed: u64) -> Result<AxiomReport> {
    let mut rng = seeded(seed);
    let mut physicality = Tally::default();
    let mut dominance = Tally::default();
    let mut additivity = Tally::default();
    let mut neutrality = Tally::default();
    let mut argmax = Tally::default();

    for game in sample {
        let v = game_value(game)?.value;

        if let Some(residual) = equal_product_pair(game, &mut rng)? {
            physicality.record(residual);
        }
        physicality.record(record_pair(&mut rng)?);

        let n = game.payoff.len();
        let cut: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let lowered = PayoffFunction::new(game.payoff.values().iter().zip(&cut).map(|(p, d)| p - d).collect())?;
        let v_low = game_value(&game.with_payoff(lowered)?)?.value;
        dominance.record((v_low - v).max(0.0));
        let shifted = PayoffFunction::new(game.payoff.values().iter().map(|p| p - 1.0).collect())?;
        let v_shift = game_value(&game.with_payoff(shifted)?)?.value;
        dominance.record((v - v_shift - 1.0).abs());

        let other = PayoffFunction::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())?;
        let v_other = game_value(&game.with_payoff(other.clone())?)?.value;
        let v_sum = game_value(&game.with_payoff(payoff_sum(&game.payoff, &other)?)?)?.value;
        additivity.record((v_sum - v - v_other).abs());

        if let Some((fixed, acted)) = symmetrized_act(game, &mut rng)? {
            let before = game_value(&fixed)?.value;
            let after = game_value(&acted)?.value;
            neutrality.record((before - after).abs());

            let rival = PayoffFunction::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())?;
            let d_before = before - game_value(&fixed.with_payoff(rival.clone())?)?.value;
            let moved = moved_payoff(&acted, &fixed, &rival);
            let d_after = after - game_value(&acted.with_payoff(moved)?)?.value;
            argmax.record(if d_before * d_after < 0.0 {
                d_before.abs().min(d_after.abs())
            } else {
                0.0
            });
        }
    }

    Ok(AxiomReport {
        checks: vec![
            physicality.finish("physicality"),
            dominance.finish("dominance"),
            additivity.finish("additivity"),
            neutrality.finish("classical act neutrality"),
            argmax.finish("argmax neutrality"),
        ],
    })
}

/// For a state with a kernel `Q`, `Â' = Â + Q H Q` has `ρÂ' = ρÂ`. The
/// two games use `P₀` on their own spectra.
fn equal_product_pair(game: &Game, rng: &mut SeededRng) -> Result<Option<f64>> {
    let n = game.state.dim();
    let (vals, vecs) = game.state.matrix().eigh();
    let mut q = ComplexMatrix::zeros(n);
    for (v, vec) in vals.iter().zip(&vecs) {
        if *v < 1e-12 {
            q = &q + &ComplexMatrix::outer(vec, vec);
        }
    }
    if q.norm() < 0.5 {
        return Ok(None);
    }
    let h = random_hermitian(rng, n);
    let moved = game.observable.matrix() + &(&(&q * &h) * &q);
    let a_prime = spectral_decompose(&moved, GROUPING_TOL)?;
    let product_gap = (game.state.matrix() * game.observable.matrix()).distance(&(game.state.matrix() * &moved));
    let original = Game::standard(game.state.clone(), game.observable.clone())?;
    let partner = Game::standard(game.state.clone(), a_prime)?;
    Ok(Some((game_value(&original)?.value - game_value(&partner)?.value).abs().max(product_gap)))
}

/// After a coarse measurement, the register observable and the measured
/// observable have equal products with the state. Both are paid the same
/// arbitrary function of the eigenvalue.
fn record_pair(rng: &mut SeededRng) -> Result<f64> {
    let n = 2;
    let counts: Vec<usize> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    let mult = Multiplicities::new(counts)?;
    let m = mult.total();
    let alpha = crate::random::random_spectrum(rng, n, 2.0);
    let reward: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();

    let space = CompositeSpace::pair(n, m)?;
    let units1 = MatrixUnitFamily::computational(n);
    let units2 = MatrixUnitFamily::computational(m);
    let psi: Vec<_> = mult
        .counts()
        .iter()
        .map(|&k| crate::matrix::real((k as f64 / m as f64).sqrt()))
        .collect();
    let ready = ready_vector(&units2);
    let rho = HeisenbergState::pure(&crate::matrix::kron_vec(&psi, &ready))?;

    let a1 = tensor_embed(Observable::from_units(alpha.clone(), &units1)?.matrix(), 0, &space)?;
    let a2 = tensor_embed(Observable::from_units(mult.expand(&alpha), &units2)?.matrix(), 1, &space)?;
    let u = coarse_measurement_unitary(&units1.projectors(), &units2, &mult, &space)?;
    let a2_after = evolve(&a2, &u)?;

    let paid = |matrix: &ComplexMatrix| -> Result<Game> {
        let obs = spectral_decompose(matrix, GROUPING_TOL)?;
        let payoff = obs
            .eigenvalues()
            .iter()
            .map(|x| {
                let a = alpha.iter().position(|y| (x - y).abs() < 1e-6).unwrap_or(0);
                reward[a]
            })
            .collect();
        Game::new(rho.clone(), obs, PayoffFunction::new(payoff)?)
    };
    let before = game_value(&paid(&a1)?)?.value;
    let after = game_value(&paid(&a2_after)?)?.value;
    Ok((before - after).abs())
}

/// Symmetrizes the state over the cycle generated by a random classical act
/// `U` on the observable, returning `(ρ_s, Â, P)` and `(ρ_s, U†ÂU, P)`.
fn symmetrized_act(game: &Game, rng: &mut SeededRng) -> Result<Option<(Game, Game)>> {
    let obs = &game.observable;
    let n = obs.dim();
    let Ok(units) = obs.matrix_units() else {
        return Ok(None);
    };
    let mut mapping: Vec<usize> = (0..n).collect();
    mapping.shuffle(rng);
    let pi = Permutation::new(mapping)?;
    let u = permutation_unitary(&units, &pi, &PhaseAssignment::zeros(n))?;

    let mut order = 1;
    let mut power = pi.clone();
    while !power.is_identity() {
        power = power.then(&pi);
        order += 1;
    }
    let mut sym = ComplexMatrix::zeros(n);
    let mut term = game.state.matrix().clone();
    for _ in 0..order {
        sym = &sym + &term;
        term = conjugate(&term, &u)?;
    }
    let fixed_state = HeisenbergState::new(sym.scale_real(1.0 / order as f64))?;
    let fix_defect = conjugate(fixed_state.matrix(), &u)?.distance(fixed_state.matrix());

    // U†ÂU puts α_a on B_{π(a)}; the payoff follows its eigenvalue.
    let inv = pi.inverse();
    let values: Vec<f64> = (0..n).map(|b| obs.eigenvalues()[inv.apply(b)]).collect();
    let payoff: Vec<f64> = (0..n).map(|b| game.payoff.get(inv.apply(b))).collect();
    let acted_obs = Observable::new(Spectrum::new(values)?, obs.family().clone())?;
    let motion_defect = evolve(obs.matrix(), &u)?.distance(acted_obs.matrix());
    if fix_defect > AXIOM_TOL || motion_defect > AXIOM_TOL {
        return Err(crate::error::Error::NotClassical(format!(
            "symmetrized act defects {fix_defect:.3e}, {motion_defect:.3e}"
        )));
    }
    let fixed = Game::new(fixed_state.clone(), obs.clone(), game.payoff.clone())?;
    let acted = Game::new(fixed_state, acted_obs, PayoffFunction::new(payoff)?)?;
    Ok(Some((fixed, acted)))
}

/// `rival` re-indexed the same way the act re-indexed the payoff.
fn moved_payoff(acted: &Game, fixed: &Game, rival: &PayoffFunction) -> PayoffFunction {
    let mapping: Vec<usize> = acted
        .observable
        .eigenvalues()
        .iter()
        .map(|x| fixed.observable.eigenvalues().iter().position(|y| y == x).unwrap())
        .collect();
    PayoffFunction::new(mapping.iter().map(|&a| rival.get(a)).collect()).expect("finite payoffs")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axioms_hold_on_small_sample() {
        let mut rng = seeded(97);
        let games: Vec<Game> = (0..8)
            .map(|i| random_game(&mut rng, 1 + i % 3, i % 2 == 0).unwrap())
            .collect();
        let report = verify_rationality_axioms(&games, 5).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.checks.len(), 5);
        assert!(report.check("additivity").unwrap().trials == 8);
    }

    #[test]
    fn constant_shift_lowers_value_by_one() {
        let mut rng = seeded(98);
        let game = random_game(&mut rng, 3, true).unwrap();
        let shifted = PayoffFunction::new(game.payoff.values().iter().map(|p| p - 1.0).collect()).unwrap();
        let v1 = game_value(&game).unwrap().value;
        let v2 = game_value(&game.with_payoff(shifted).unwrap()).unwrap().value;
        assert!((v1 - v2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_state_is_fixed_by_any_act() {
        let obs = Observable::diagonal(&[0.0, 1.0, 5.0]).unwrap();
        let units = obs.matrix_units().unwrap();
        let rho = HeisenbergState::new(crate::games::equal::uniform_superposition(&units)).unwrap();
        let game = Game::standard(rho, obs).unwrap();
        let mut rng = seeded(99);
        let (fixed, acted) = symmetrized_act(&game, &mut rng).unwrap().unwrap();
        assert!(fixed.state.matrix().distance(game.state.matrix()) < 1e-12);
        let before = game_value(&fixed).unwrap().value;
        let after = game_value(&acted).unwrap().value;
        assert!((before - 2.0).abs() < 1e-10 && (after - before).abs() < 1e-10);
    }
}
