use proptest::prelude::*;

use qdarwin_core::darwinism::{branch_decomposition, correlation_check, phase_equivalent};
use qdarwin_core::games::{
    game_value, payoff_sum, stage1_value, stage2_value, stage3_value, stage4_value, Game, MixedGameSpec,
    PayoffFunction, RationalWeights,
};
use qdarwin_core::matrix::{phase, ComplexMatrix};
use qdarwin_core::measurement::{measurement_unitary, permutation_unitary, Permutation, PhaseAssignment};
use qdarwin_core::operator::{accessible_info_matrix, evolve};
use qdarwin_core::random::{
    random_basis, random_hermitian, random_ket, random_observable, random_phases, random_spectrum, random_unitary,
    random_weights, seeded,
};
use qdarwin_core::{
    spectral_decompose, tensor_embed, CompositeSpace, HeisenbergState, MatrixUnitFamily, Observable, Spectrum,
    ALGEBRA_TOL, GROUPING_TOL,
};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn permutation_from(seed: u64, n: usize) -> Permutation {
    use rand::seq::SliceRandom;
    let mut mapping: Vec<usize> = (0..n).collect();
    mapping.shuffle(&mut seeded(seed));
    Permutation::new(mapping).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn constructed_families_obey_their_algebras(seed in any::<u64>(), n in 1usize..=8) {
        let units = MatrixUnitFamily::from_basis(&random_basis(&mut seeded(seed), n)).unwrap();
        prop_assert!(units.projectors().algebra_residual() < ALGEBRA_TOL);
        prop_assert!(units.algebra_residual() < ALGEBRA_TOL);
    }

    #[test]
    fn evolution_keeps_hermiticity_and_spectrum(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = seeded(seed);
        let h = random_hermitian(&mut rng, n);
        let u = random_unitary(&mut rng, n);
        let moved = evolve(&h, &u).unwrap();
        prop_assert!(moved.hermiticity_defect() < 1e-9);
        for (x, y) in h.eigenvalues().iter().zip(moved.eigenvalues()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn spectral_decomposition_reconstructs(seed in any::<u64>(), n in 1usize..=6) {
        let h = random_hermitian(&mut seeded(seed), n);
        let obs = spectral_decompose(&h, GROUPING_TOL).unwrap();
        prop_assert!(obs.reconstruction_residual(&h) < ALGEBRA_TOL * h.max_abs().max(1.0));
    }

    #[test]
    fn accessible_info_is_additive(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = seeded(seed);
        let state = HeisenbergState::pure(&random_ket(&mut rng, n)).unwrap();
        let a = random_hermitian(&mut rng, n);
        let b = random_hermitian(&mut rng, n);
        let sum = accessible_info_matrix(&state, &(&a + &b)).unwrap();
        let parts = &accessible_info_matrix(&state, &a).unwrap() + &accessible_info_matrix(&state, &b).unwrap();
        prop_assert!(sum.distance(&parts) < 1e-12);
    }

    #[test]
    fn permutation_round_trip(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = seeded(seed);
        let obs = random_observable(&mut rng, n);
        let units = obs.matrix_units().unwrap();
        let pi = permutation_from(seed, n);
        let phases = PhaseAssignment::vector(random_phases(&mut rng, n)).unwrap();
        let u = permutation_unitary(&units, &pi, &phases).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
        let found = branch_decomposition(&u, &obs).unwrap();
        prop_assert_eq!(&found.permutation, &pi);
        for (x, y) in found.phases.values().iter().zip(phases.values()) {
            let gap = (x - y).rem_euclid(std::f64::consts::TAU);
            prop_assert!(gap.min(std::f64::consts::TAU - gap) < 1e-9);
        }
    }

    #[test]
    fn measurement_copies_and_ignores_phases(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = seeded(seed);
        let space = CompositeSpace::pair(n, n).unwrap();
        let units = MatrixUnitFamily::computational(n);
        let alpha = random_spectrum(&mut rng, n, 2.0);
        let a1 = tensor_embed(Observable::from_units(alpha.clone(), &units).unwrap().matrix(), 0, &space).unwrap();
        let a2 = tensor_embed(Observable::from_units(alpha, &units).unwrap().matrix(), 1, &space).unwrap();
        let random = PhaseAssignment::square(n, random_phases(&mut rng, n * n)).unwrap();
        let zero = PhaseAssignment::zeros_square(n);
        let u = measurement_unitary(&units.projectors(), &units, &random, &space).unwrap();
        let u0 = measurement_unitary(&units.projectors(), &units, &zero, &space).unwrap();
        prop_assert!(u.unitarity_defect() < 1e-10);
        prop_assert!(evolve(&a1, &u).unwrap().distance(&a1) < 1e-10);
        let a2_after = evolve(&a2, &u).unwrap();
        prop_assert!(a2_after.distance(&evolve(&a2, &u0).unwrap()) < 1e-10);

        let report = correlation_check(&a1, &a2_after, &space).unwrap();
        prop_assert!(report.correlated, "{:?}", report.failure);
        let mirrored = correlation_check(&a2_after, &a1, &space).unwrap();
        prop_assert_eq!(report.correlated, mirrored.correlated);
    }

    #[test]
    fn phase_equivalence_is_an_equivalence(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = seeded(seed);
        let basis = MatrixUnitFamily::from_basis(&random_basis(&mut rng, n)).unwrap();
        let x = random_hermitian(&mut rng, n);
        let diag = |rng: &mut _| {
            let phases = random_phases(rng, n);
            let mut d = ComplexMatrix::zeros(n);
            for (k, p) in phases.iter().enumerate() {
                d = &d + &basis.unit(k, k).scale(phase(*p));
            }
            d
        };
        let d1 = diag(&mut rng);
        let d2 = diag(&mut rng);
        let y = &(&d1 * &x) * &d1.adjoint();
        let z = &(&d2 * &y) * &d2.adjoint();
        let family = basis.projectors();
        prop_assert!(phase_equivalent(&x, &x, &family));
        prop_assert!(phase_equivalent(&x, &y, &family));
        prop_assert!(phase_equivalent(&y, &x, &family));
        prop_assert!(phase_equivalent(&x, &z, &family));
    }

    #[test]
    fn equal_weight_values_are_means(seed in any::<u64>(), n in 1usize..=6) {
        let obs = random_observable(&mut seeded(seed), n);
        let report = stage1_value(&obs).unwrap();
        let mean = obs.eigenvalues().iter().sum::<f64>() / n as f64;
        prop_assert!((report.value - mean).abs() < 1e-10);
        prop_assert!(report.passed(1e-10), "{:?}", report);
    }

    #[test]
    fn rational_values_match_oracle(seed in any::<u64>(), counts in prop::collection::vec(1usize..=4, 1..=4)) {
        prop_assume!(counts.len() * counts.iter().sum::<usize>() <= 64);
        let alpha = random_spectrum(&mut seeded(seed), counts.len(), 3.0);
        let weights = RationalWeights::new(counts.clone()).unwrap();
        let report = stage2_value(&Spectrum::new(alpha.clone()).unwrap(), &weights).unwrap();
        let m = weights.total() as f64;
        let expected: f64 = alpha.iter().zip(&counts).map(|(a, &k)| a * k as f64 / m).sum();
        prop_assert!((report.value - expected).abs() < 1e-9);
        prop_assert!(report.passed(1e-9), "{:?}", report);
    }

    #[test]
    fn brackets_narrow_under_dominance(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = seeded(seed);
        let alpha = random_spectrum(&mut rng, n, 3.0);
        let weights = random_weights(&mut rng, n);
        let (bracket, report) = stage3_value(&Spectrum::new(alpha).unwrap(), &weights, 1e-6).unwrap();
        prop_assert!(bracket.dominance_violation <= 0.0);
        prop_assert!(bracket.history.iter().all(|(l, u)| l <= u));
        prop_assert!(bracket.history.windows(2).all(|w| w[1].1 - w[1].0 < w[0].1 - w[0].0));
        prop_assert!(report.passed(1e-6), "{:?}", report);
    }

    #[test]
    fn mixed_values_match_oracle(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = seeded(seed);
        let family = MatrixUnitFamily::from_basis(&random_basis(&mut rng, n)).unwrap().projectors();
        let spec = MixedGameSpec::new(random_weights(&mut rng, n), family).unwrap();
        let obs = random_observable(&mut rng, n);
        let report = stage4_value(&spec, &obs).unwrap();
        prop_assert!(report.passed(1e-6), "{:?}", report);
    }

    #[test]
    fn payoff_sums_add_values(seed in any::<u64>(), n in 1usize..=4, pure in any::<bool>()) {
        let mut rng = seeded(seed);
        let game = qdarwin_core::games::random_game(&mut rng, n, pure).unwrap();
        let other = PayoffFunction::new(random_spectrum(&mut rng, n, 2.0)).unwrap();
        let v = game_value(&game).unwrap().value;
        let w = game_value(&game.with_payoff(other.clone()).unwrap()).unwrap().value;
        let sum = game_value(&game.with_payoff(payoff_sum(&game.payoff, &other).unwrap()).unwrap()).unwrap().value;
        prop_assert!((sum - v - w).abs() < 1e-9);
    }

    #[test]
    fn classical_acts_fixing_the_state_keep_the_order(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = seeded(seed);
        let obs = random_observable(&mut rng, n);
        let units = obs.matrix_units().unwrap();
        let pi = permutation_from(seed, n);
        let u = permutation_unitary(&units, &pi, &PhaseAssignment::zeros(n)).unwrap();
        let state = HeisenbergState::maximally_mixed(n);
        let moved = spectral_decompose(&evolve(obs.matrix(), &u).unwrap(), GROUPING_TOL).unwrap();
        let p = random_spectrum(&mut rng, n, 2.0);
        let q = random_spectrum(&mut rng, n, 2.0);
        let value = |o: &Observable, payoff: &[f64]| {
            let paid: Vec<f64> = o.eigenvalues().iter().map(|x| {
                let a = obs.eigenvalues().iter().position(|y| (x - y).abs() < 1e-9).unwrap();
                payoff[a]
            }).collect();
            game_value(&Game::new(state.clone(), o.clone(), PayoffFunction::new(paid).unwrap()).unwrap()).unwrap().value
        };
        let before = value(&obs, &p) - value(&obs, &q);
        let after = value(&moved, &p) - value(&moved, &q);
        prop_assert!(before * after >= 0.0 || before.abs().min(after.abs()) < 1e-9);
    }
}
