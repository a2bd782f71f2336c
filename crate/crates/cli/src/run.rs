use std::f64::consts::TAU;
use std::time::Instant;

use rand::seq::SliceRandom;

use qdarwin_core::darwinism::{
    branch_decomposition, correlation_check, correlation_check_in_frame, CorrelationReport,
};
use qdarwin_core::games::{
    game_value, random_game, AXIOM_TOL, stage2_value, stage4_value, value_from_weights, verify_rationality_axioms, Game,
    Method, MixedGameSpec, PayoffFunction, RationalWeights, ValueReport,
};
use qdarwin_core::matrix::{kron_vec, phase, real, ComplexMatrix};
use qdarwin_core::measurement::{
    coarse_measurement_unitary, measurement_unitary, permutation_unitary, ready_vector, sequential_measurement,
    Multiplicities, Permutation, PhaseAssignment,
};
use qdarwin_core::operator::{conjugate, evolve};
use qdarwin_core::random::{random_basis, random_observable, random_phases, seeded, SeededRng};
use qdarwin_core::{
    spectral_decompose, tensor_embed, CompositeSpace, Error, HeisenbergState, MatrixUnitFamily, Observable,
    ProjectorFamily, Spectrum, Unitary, ALGEBRA_TOL, CORRELATION_TOL, GROUPING_TOL,
};

use crate::report::{CheckRow, RunReport};
use crate::scenario::{matrix_from_spec, BasisSpec, Kind, Motion, PhaseSpec, Scenario};

/// Command-line overrides applied on top of a scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

/// Norm a phase change must produce on a non-commuting observable to count
/// as a witness.
const PHASE_WITNESS: f64 = 1e-3;

const VALUE_TOL: f64 = 1e-9;
const BRACKET_VALUE_TOL: f64 = 1e-6;

struct Context {
    rng: SeededRng,
    tolerance: Option<f64>,
    rows: Vec<CheckRow>,
}

impl Context {
    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    fn residual(&mut self, check: impl Into<String>, residual: f64, default: f64) {
        let tol = self.tol(default);
        self.rows.push(CheckRow::residual(check, residual, tol));
    }

    fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }
}

/// Executes a validated scenario. Errors are input problems the validator
/// cannot see, such as a cap exceeded by a derived dimension.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunReport, Error> {
    let seed = options.seed.or(scenario.seed).unwrap_or(0);
    let start = Instant::now();
    let mut ctx = Context {
        rng: seeded(seed),
        tolerance: options.tolerance.or(scenario.tolerance),
        rows: Vec::new(),
    };
    match scenario.kind {
        Kind::AlgebraCheck => algebra_check(scenario, &mut ctx)?,
        Kind::MeasureDemo => match scenario.motion.expect("validated") {
            Motion::Permutation => permutation_demo(scenario, &mut ctx)?,
            Motion::Measure => measure_demo(scenario, &mut ctx)?,
            Motion::Coarse => coarse_demo(scenario, &mut ctx)?,
            Motion::Sequential => sequential_demo(scenario, &mut ctx)?,
        },
        Kind::DarwinismReport => darwinism_report(scenario, &mut ctx)?,
        Kind::GameValue => game_value_run(scenario, &mut ctx)?,
        Kind::AxiomCheck => axiom_check(scenario, seed, &mut ctx)?,
    }
    Ok(RunReport {
        scenario: scenario.name.clone(),
        kind: scenario.kind.label().to_string(),
        seed,
        checks: ctx.rows,
        elapsed: start.elapsed(),
    })
}

fn dims_or(scenario: &Scenario, default: &[usize]) -> Vec<usize> {
    if scenario.dims.is_empty() {
        default.to_vec()
    } else {
        scenario.dims.clone()
    }
}

fn draw_phases(spec: PhaseSpec, rng: &mut SeededRng, len: usize) -> Vec<f64> {
    match spec {
        PhaseSpec::Zero => vec![0.0; len],
        PhaseSpec::SeededRandom => random_phases(rng, len),
    }
}

fn random_permutation(rng: &mut SeededRng, n: usize) -> Result<Permutation, Error> {
    let mut mapping: Vec<usize> = (0..n).collect();
    mapping.shuffle(rng);
    Permutation::new(mapping)
}

/// `F_jk = e^{2πijk/N}/√N`
pub fn fourier(n: usize) -> Unitary {
    let scale = 1.0 / (n as f64).sqrt();
    let m = ComplexMatrix::from_fn(n, |j, k| phase(TAU * (j * k) as f64 / n as f64) * scale);
    Unitary::new(m).expect("the discrete Fourier transform is unitary")
}

fn conjugated(obs: &Observable, u: &Unitary) -> Result<Observable, Error> {
    let family = ProjectorFamily::new(
        obs.family().projectors().iter().map(|p| conjugate(p, u)).collect::<Result<_, _>>()?,
        1e-12,
    )?;
    Observable::new(obs.spectrum().clone(), family)
}

fn algebra_check(scenario: &Scenario, ctx: &mut Context) -> Result<(), Error> {
    let trials = scenario.trials.unwrap_or(20);
    for n in dims_or(scenario, &[1, 2, 3, 4, 5, 6, 7, 8]) {
        let (mut projectors, mut units) = (0.0_f64, 0.0_f64);
        for _ in 0..trials {
            let family = MatrixUnitFamily::from_basis(&random_basis(&mut ctx.rng, n))?;
            projectors = projectors.max(family.projectors().algebra_residual());
            units = units.max(family.algebra_residual().max(family.adjoint_residual()));
        }
        ctx.residual(format!("N={n} projector algebra"), projectors, ALGEBRA_TOL);
        ctx.residual(format!("N={n} matrix-unit algebra"), units, ALGEBRA_TOL);
    }
    Ok(())
}

fn permutation_demo(scenario: &Scenario, ctx: &mut Context) -> Result<(), Error> {
    let n = scenario.dims[0];
    let trials = scenario.trials.unwrap_or(1);
    let (mut unitarity, mut motion, mut neutrality) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut recovered = true;
    for _ in 0..trials {
        let obs = random_observable(&mut ctx.rng, n);
        let units = obs.matrix_units()?;
        let pi = random_permutation(&mut ctx.rng, n)?;
        let phases = PhaseAssignment::vector(draw_phases(scenario.phases, &mut ctx.rng, n))?;
        let u = permutation_unitary(&units, &pi, &phases)?;
        let u0 = permutation_unitary(&units, &pi, &PhaseAssignment::zeros(n))?;
        unitarity = unitarity.max(u.unitarity_defect());
        let moved = evolve(obs.matrix(), &u)?;
        // Â(1) = Σ_a α_a B_{π(a)}
        let inv = pi.inverse();
        let expected: Vec<f64> = (0..n).map(|b| obs.eigenvalues()[inv.apply(b)]).collect();
        motion = motion.max(moved.distance(&obs.function(&expected)?));
        neutrality = neutrality.max(moved.distance(&evolve(obs.matrix(), &u0)?));
        let found = branch_decomposition(&u, &obs)?;
        let phase_gap = found
            .phases
            .values()
            .iter()
            .zip(phases.values())
            .map(|(x, y)| {
                let d = (x - y).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .fold(0.0, f64::max);
        recovered &= found.permutation == pi && phase_gap < 1e-9;
    }
    ctx.residual("unitarity", unitarity, 1e-10);
    ctx.residual("observable permuted by the act", motion, ALGEBRA_TOL);
    ctx.residual("phase neutrality", neutrality, ALGEBRA_TOL);
    ctx.push(CheckRow::flag("branch decomposition recovers permutation and phases", recovered, true));
    Ok(())
}

/// `a1 ⊗ 1`, `1 ⊗ a2` and the measurement motion between them.
struct MeasuredPair {
    space: CompositeSpace,
    a1: Observable,
    a2: Observable,
    u: Unitary,
    u0: Unitary,
}

impl MeasuredPair {
    fn new(n: usize, phases: &PhaseAssignment) -> Result<Self, Error> {
        let space = CompositeSpace::pair(n, n)?;
        let values: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let a1 = Observable::diagonal(&values)?;
        let a2 = Observable::diagonal(&values)?;
        let units = a2.matrix_units()?;
        let u = measurement_unitary(a1.family(), &units, phases, &space)?;
        let u0 = measurement_unitary(a1.family(), &units, &PhaseAssignment::zeros_square(n), &space)?;
        Ok(MeasuredPair { space, a1, a2, u, u0 })
    }

    fn embed(&self, obs: &Observable, slot: usize) -> Result<ComplexMatrix, Error> {
        tensor_embed(obs.matrix(), slot, &self.space)
    }

    /// Whether the correlation table is `c = a ⊕ b`.
    fn shift_table(&self, report: &CorrelationReport) -> Result<bool, Error> {
        let n = self.a1.dim();
        let units = self.a2.matrix_units()?;
        let Some(table) = report.table_in(units.vectors(), self.a2.eigenvalues()) else {
            return Ok(false);
        };
        Ok((0..n).all(|a| (0..n).all(|b| table[a][b] == (a + b) % n)))
    }
}

fn measure_demo(scenario: &Scenario, ctx: &mut Context) -> Result<(), Error> {
    let n = scenario.dims[0];
    let trials = scenario.trials.unwrap_or(10);
    let (mut unitarity, mut unchanged, mut neutrality, mut witness) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let (mut bijections, mut uncorrelated) = (0, 0);
    for _ in 0..trials {
        let phases = PhaseAssignment::square(n, draw_phases(scenario.phases, &mut ctx.rng, n * n))?;
        let pair = MeasuredPair::new(n, &phases)?;
        unitarity = unitarity.max(pair.u.unitarity_defect());
        let a1 = pair.embed(&pair.a1, 0)?;
        let a2 = pair.embed(&pair.a2, 1)?;
        unchanged = unchanged.max(evolve(&a1, &pair.u)?.distance(&a1));
        let a2_after = evolve(&a2, &pair.u)?;
        neutrality = neutrality.max(a2_after.distance(&evolve(&a2, &pair.u0)?));
        let report = correlation_check(&evolve(&a1, &pair.u)?, &a2_after, &pair.space)?;
        if report.correlated && pair.shift_table(&report)? {
            bijections += 1;
        }

        let c1 = pair.embed(&random_observable(&mut ctx.rng, n), 0)?;
        let c2 = pair.embed(&random_observable(&mut ctx.rng, n), 1)?;
        let (c1_after, c2_after) = (evolve(&c1, &pair.u)?, evolve(&c2, &pair.u)?);
        if !correlation_check(&c1_after, &c2_after, &pair.space)?.correlated {
            uncorrelated += 1;
        }
        witness = witness
            .max(c1_after.distance(&evolve(&c1, &pair.u0)?))
            .max(c2_after.distance(&evolve(&c2, &pair.u0)?));
    }
    ctx.residual("unitarity", unitarity, 1e-10);
    ctx.residual("measured observable unchanged", unchanged, ALGEBRA_TOL);
    ctx.residual("record phase neutrality", neutrality, ALGEBRA_TOL);
    ctx.push(CheckRow::compare("record bijection c = a+b mod N", bijections as f64, trials as f64, 0.0));
    ctx.push(CheckRow::compare("complementary pair uncorrelated", uncorrelated as f64, trials as f64, 0.0));
    if scenario.phases == PhaseSpec::SeededRandom {
        ctx.push(CheckRow::at_least("complementary phase witness", witness, PHASE_WITNESS));
    }
    Ok(())
}

fn coarse_demo(scenario: &Scenario, ctx: &mut Context) -> Result<(), Error> {
    let alpha = scenario.values.clone().expect("validated");
    let mult = Multiplicities::new(scenario.multiplicities.clone().expect("validated"))?;
    let (n, m) = (alpha.len(), mult.total());
    let space = CompositeSpace::pair(n, m)?;
    let units1 = MatrixUnitFamily::computational(n);
    let units2 = MatrixUnitFamily::computational(m);
    let measured = Observable::from_units(alpha.clone(), &units1)?;
    let register = Observable::from_units(mult.expand(&alpha), &units2)?;
    let u = coarse_measurement_unitary(&units1.projectors(), &units2, &mult, &space)?;

    let a1 = tensor_embed(measured.matrix(), 0, &space)?;
    let a2 = tensor_embed(register.matrix(), 1, &space)?;
    let a1_after = evolve(&a1, &u)?;
    let a2_after = evolve(&a2, &u)?;
    let psi: Vec<_> = mult.counts().iter().map(|&k| real((k as f64 / m as f64).sqrt())).collect();
    let rho = ComplexMatrix::outer(&kron_vec(&psi, &ready_vector(&units2)), &kron_vec(&psi, &ready_vector(&units2)));

    ctx.residual("unitarity", u.unitarity_defect(), 1e-10);
    ctx.residual("measured observable unchanged", a1_after.distance(&a1), ALGEBRA_TOL);
    ctx.residual("record identity", (&rho * &a2_after).distance(&(&rho * &a1)), 1e-9);
    Ok(())
}

fn sequential_demo(scenario: &Scenario, ctx: &mut Context) -> Result<(), Error> {
    let n = scenario.dims[0];
    let repeat = scenario.repeat.unwrap_or(false);
    let values: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let measured = Observable::diagonal(&values)?;
    let record = Observable::diagonal(&values)?;
    let rotated = if repeat {
        measured.clone()
    } else {
        conjugated(&measured, &fourier(n))?
    };
    let phases = PhaseAssignment::square(n, draw_phases(scenario.phases, &mut ctx.rng, n * n))?;
    let space = CompositeSpace::pair(n, n)?;
    let report = sequential_measurement(&measured, &rotated, &record, &phases, &space)?;
    let min = *report.branch_counts.iter().min().unwrap_or(&0) as f64;
    let max = *report.branch_counts.iter().max().unwrap_or(&0) as f64;
    if repeat {
        ctx.push(CheckRow::compare("fewest branches per initial branch", min, 1.0, 0.0));
        ctx.push(CheckRow::compare("most branches per initial branch", max, 1.0, 0.0));
    } else {
        ctx.push(CheckRow::at_least("fewest branches per initial branch", min, 2.0));
        let original = tensor_embed(measured.matrix(), 0, &space)?;
        let lost = correlation_check(&report.record_final, &original, &space)?;
        ctx.push(CheckRow::flag("record correlated with measured observable", lost.correlated, false));
        let seen = correlation_check_in_frame(&report.rotated_at_1, &report.record_final, &space, &report.motions[1])?;
        ctx.push(CheckRow::flag("record correlated with rotated observable", seen.correlated, true));
    }
    Ok(())
}

fn darwinism_report(scenario: &Scenario, ctx: &mut Context) -> Result<(), Error> {
    let n = scenario.dims[0];
    let trials = scenario.trials.unwrap_or(1);
    let (mut correlated, mut shifted, mut uncorrelated, mut symmetric) = (0, 0, 0, 0);
    let mut residual = 0.0_f64;
    for _ in 0..trials {
        let phases = PhaseAssignment::square(n, draw_phases(scenario.phases, &mut ctx.rng, n * n))?;
        let pair = MeasuredPair::new(n, &phases)?;
        let a1 = evolve(&pair.embed(&pair.a1, 0)?, &pair.u)?;
        let a2 = evolve(&pair.embed(&pair.a2, 1)?, &pair.u)?;
        let report = correlation_check(&a1, &a2, &pair.space)?;
        let mirrored = correlation_check(&a2, &a1, &pair.space)?;
        residual = residual.max(report.residual);
        correlated += usize::from(report.correlated);
        symmetric += usize::from(report.correlated == mirrored.correlated);
        shifted += usize::from(pair.shift_table(&report)?);

        let c1 = evolve(&pair.embed(&random_observable(&mut ctx.rng, n), 0)?, &pair.u)?;
        let c2 = evolve(&pair.embed(&random_observable(&mut ctx.rng, n), 1)?, &pair.u)?;
        uncorrelated += usize::from(!correlation_check(&c1, &c2, &pair.space)?.correlated);
    }
    let t = trials as f64;
    ctx.push(CheckRow::compare("measured pair correlated", correlated as f64, t, 0.0));
    ctx.push(CheckRow::compare("bijection c = a+b mod N", shifted as f64, t, 0.0));
    ctx.push(CheckRow::compare("verdict symmetric", symmetric as f64, t, 0.0));
    ctx.residual("correlation residual", residual, CORRELATION_TOL);
    ctx.push(CheckRow::compare("complementary pair uncorrelated", uncorrelated as f64, t, 0.0));
    Ok(())
}

fn is_bracketed(report: &ValueReport) -> bool {
    matches!(report.method, Method::Bracketed | Method::MixedBracketed)
        || report.trail.iter().any(|t| t.check.contains("bracket"))
}

fn push_value(ctx: &mut Context, report: &ValueReport) {
    let default = if is_bracketed(report) { BRACKET_VALUE_TOL } else { VALUE_TOL };
    let tol = ctx.tol(default);
    ctx.push(CheckRow::compare(format!("value [{}]", report.method), report.value, report.oracle, tol));
    for entry in &report.trail {
        ctx.push(CheckRow {
            check: format!("trail: {}", entry.check),
            value: entry.residual,
            oracle: 0.0,
            deviation: entry.residual,
            tolerance: entry.tolerance,
            pass: entry.passed(),
        });
    }
}

fn game_value_run(scenario: &Scenario, ctx: &mut Context) -> Result<(), Error> {
    let outcome = evaluate_game(scenario, ctx);
    match outcome {
        Ok(report) => push_value(ctx, &report),
        Err(Error::BracketNotConverged { width, .. }) => {
            ctx.push(CheckRow::residual("bracket converged", width, ctx.tol(BRACKET_VALUE_TOL)));
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

fn evaluate_game(scenario: &Scenario, ctx: &mut Context) -> Result<ValueReport, Error> {
    let paid = scenario.payoff.clone().or_else(|| scenario.values.clone());
    if let Some(weights) = &scenario.weights {
        return value_from_weights(&paid.expect("validated"), weights);
    }
    if let Some(counts) = &scenario.multiplicities {
        return stage2_value(&Spectrum::new(paid.expect("validated"))?, &RationalWeights::new(counts.clone())?);
    }
    if let Some(mixture) = &scenario.mixture {
        let n = mixture.weights.len();
        let family = match mixture.basis {
            BasisSpec::Computational => MatrixUnitFamily::computational(n).projectors(),
            BasisSpec::Random => MatrixUnitFamily::from_basis(&random_basis(&mut ctx.rng, n))?.projectors(),
        };
        let spec = MixedGameSpec::new(mixture.weights.clone(), family)?;
        return stage4_value(&spec, &Observable::diagonal(&paid.expect("validated"))?);
    }
    let state = HeisenbergState::new(matrix_from_spec(scenario.state.as_ref().expect("validated"))?)?;
    let observable = match &scenario.observable {
        Some(rows) => spectral_decompose(&matrix_from_spec(rows)?, GROUPING_TOL)?,
        None => Observable::diagonal(scenario.values.as_ref().expect("validated"))?,
    };
    let payoff = match &scenario.payoff {
        Some(p) => PayoffFunction::new(p.clone())?,
        None => PayoffFunction::eigenvalues(&observable),
    };
    game_value(&Game::new(state, observable, payoff)?)
}

fn axiom_check(scenario: &Scenario, seed: u64, ctx: &mut Context) -> Result<(), Error> {
    let trials = scenario.trials.unwrap_or(100);
    let dims = dims_or(scenario, &[1, 2, 3, 4]);
    let games: Vec<Game> = (0..trials)
        .map(|i| random_game(&mut ctx.rng, dims[i % dims.len()], i % 2 == 0))
        .collect::<Result<_, _>>()?;
    let report = verify_rationality_axioms(&games, seed.wrapping_add(1))?;
    for check in &report.checks {
        ctx.residual(format!("{} ({} trials)", check.axiom, check.trials), check.worst_residual, AXIOM_TOL);
    }
    Ok(())
}
