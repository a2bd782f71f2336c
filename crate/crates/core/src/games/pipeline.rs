use crate::error::Result;
use crate::operator::{Observable, Spectrum};
use crate::DIMENSION_CAP;

use super::bracket::{bracket_report, nested_rational};
use super::mixed::INTERNAL_ITERATION_CAP;
use super::{
    born_oracle, bracket_value, check_weights, stage1_value, stage2_value, stage4_value, Game, Method,
    MixedGameSpec, RationalWeights, ValueReport,
};

/// Bracket tolerance when an irrational pure game is evaluated internally.
const PIPELINE_BRACKET_TOL: f64 = 1e-11;

/// Outcomes with less weight than this are dropped.
const NEGLIGIBLE_WEIGHT: f64 = 1e-14;

/// Staged value of a pure-state game paying `values[a]` with weight
/// `weights[a]`: equal, rational or bracketed.
pub fn value_from_weights(values: &[f64], weights: &[f64]) -> Result<ValueReport> {
    check_weights(weights, values.len())?;
    let kept: Vec<usize> = (0..values.len()).filter(|&a| weights[a] > NEGLIGIBLE_WEIGHT).collect();
    let vals: Vec<f64> = kept.iter().map(|&a| values[a]).collect();
    let total: f64 = kept.iter().map(|&a| weights[a]).sum();
    let w: Vec<f64> = kept.iter().map(|&a| weights[a] / total).collect();
    let n = vals.len();

    if w.iter().all(|x| (x - 1.0 / n as f64).abs() < 1e-12) {
        return Ok(stage1_value(&Observable::diagonal(&vals)?)?.against(super::diagonal_oracle(values, weights)));
    }
    if let Some(rational) = RationalWeights::detect(&w, DIMENSION_CAP / n, 1e-12) {
        return Ok(stage2_value(&Spectrum::new(vals)?, &rational)?.against(super::diagonal_oracle(values, weights)));
    }
    let bracket = bracket_value(&vals, &w, PIPELINE_BRACKET_TOL, INTERNAL_ITERATION_CAP, nested_rational)?;
    Ok(bracket_report(&bracket, Method::Bracketed, &vals, &w, PIPELINE_BRACKET_TOL)
        .against(super::diagonal_oracle(values, weights)))
}

/// Value of an arbitrary game.
///
/// Pure states go through [`value_from_weights`] with the weights of the
/// measured projectors; mixed states go through [`stage4_value`] on their
/// spectral form. The payoff replaces the eigenvalues. The oracle is the
/// trace on the original game.
pub fn game_value(game: &Game) -> Result<ValueReport> {
    let obs = &game.observable;
    let paid = Observable::new(Spectrum::new(game.payoff.values().to_vec())?, obs.family().clone())?;
    let oracle = born_oracle(&game.state, obs, &game.payoff)?;
    if game.state.is_pure() {
        let (vals, vecs) = game.state.matrix().eigh();
        let psi = &vecs[vals.len() - 1];
        let raw: Vec<f64> = obs
            .family()
            .projectors()
            .iter()
            .map(|p| crate::matrix::inner_product(psi, &p.apply(psi)).re.max(0.0))
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        return Ok(value_from_weights(paid.eigenvalues(), &weights)?.against(oracle));
    }
    let spec = MixedGameSpec::from_state(&game.state)?;
    Ok(stage4_value(&spec, &paid)?.against(oracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::PayoffFunction;
    use crate::matrix::ComplexMatrix;
    use crate::operator::HeisenbergState;
    use crate::random::{random_ket, random_observable, seeded};

    #[test]
    fn three_and_a_half() {
        let game = Game::standard(
            HeisenbergState::new(ComplexMatrix::diagonal(&[0.25, 0.75])).unwrap(),
            Observable::diagonal(&[2.0, 4.0]).unwrap(),
        )
        .unwrap();
        let r = game_value(&game).unwrap();
        assert!((r.value - 3.5).abs() < 1e-12);
        assert!(r.passed(1e-9), "{r:?}");
    }

    #[test]
    fn random_pure_games_match_oracle() {
        let mut rng = seeded(95);
        for n in 1..=4 {
            let obs = random_observable(&mut rng, n);
            let state = HeisenbergState::pure(&random_ket(&mut rng, n)).unwrap();
            let game = Game::standard(state, obs).unwrap();
            let r = game_value(&game).unwrap();
            assert!(r.passed(1e-9), "{r:?}");
        }
    }

    #[test]
    fn degenerate_payoffs_are_allowed() {
        let mut rng = seeded(96);
        let obs = random_observable(&mut rng, 3);
        let state = HeisenbergState::pure(&random_ket(&mut rng, 3)).unwrap();
        let game = Game::new(state, obs, PayoffFunction::new(vec![1.0, 1.0, -2.0]).unwrap()).unwrap();
        assert!(game_value(&game).unwrap().passed(1e-9));
    }

    #[test]
    fn zero_weight_outcomes_drop_out() {
        let r = value_from_weights(&[5.0, 1.0, 3.0], &[0.0, 0.5, 0.5]).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }
}
