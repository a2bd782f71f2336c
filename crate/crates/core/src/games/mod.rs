//! Quantum games and their values.
//!
//! A game is a state, an observable to be measured and a payoff per outcome.
//! Values are derived stage by stage: equal weights, rational weights via a
//! coarse measurement onto a larger register, irrational weights by
//! bracketing with rational games, and mixed states. Every derivation is
//! compared with the trace oracle `Tr(ρ·P(Â))`.
//!
//! The mixed-state cases are tagged 4.1 (unsharp), 4.2 (equal), 4.3
//! (rational) and 4.4 (irrational).

mod axioms;
mod bracket;
mod equal;
mod mixed;
mod pipeline;
mod rational;

pub use axioms::{random_game, verify_rationality_axioms, AxiomCheck, AxiomReport, AXIOM_TOL};
pub use bracket::{bracket_value, stage3_value, BracketingResult, STAGE3_ITERATION_CAP};
pub use equal::{stage1_value, SYMMETRIZATION_LIMIT};
pub use mixed::{stage4_value, MixedGameSpec};
pub use pipeline::{game_value, value_from_weights};
pub use rational::{rational_value_reduced, stage2_value};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::measurement::Permutation;
use crate::operator::{HeisenbergState, Observable};

/// Payoff `P(α_a)` for each outcome index `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffFunction {
    values: Vec<f64>,
}

impl PayoffFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPayoff(format!("non-finite payoff {bad}")));
        }
        Ok(Self { values })
    }

    /// `P₀`: pays the measured eigenvalue.
    pub fn eigenvalues(obs: &Observable) -> Self {
        Self {
            values: obs.eigenvalues().to_vec(),
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self {
            values: vec![value; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, a: usize) -> f64 {
        self.values[a]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `P(Â) = Σ_a P(α_a) B_a`
    pub fn operator(&self, obs: &Observable) -> Result<ComplexMatrix> {
        obs.function(&self.values)
    }
}

/// `P∘π`: outcome `a` pays what `π(a)` paid.
pub fn payoff_permute(p: &PayoffFunction, pi: &Permutation) -> Result<PayoffFunction> {
    if pi.len() != p.len() {
        return Err(Error::InvalidPayoff(format!(
            "permutation on {} indices applied to {} payoffs",
            pi.len(),
            p.len()
        )));
    }
    Ok(PayoffFunction {
        values: (0..p.len()).map(|a| p.values[pi.apply(a)]).collect(),
    })
}

/// Pointwise sum.
pub fn payoff_sum(p1: &PayoffFunction, p2: &PayoffFunction) -> Result<PayoffFunction> {
    if p1.len() != p2.len() {
        return Err(Error::InvalidPayoff(format!(
            "domains differ: {} vs {} outcomes",
            p1.len(),
            p2.len()
        )));
    }
    Ok(PayoffFunction {
        values: p1.values.iter().zip(&p2.values).map(|(x, y)| x + y).collect(),
    })
}

/// State, measured observable and payoff.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    pub state: HeisenbergState,
    pub observable: Observable,
    pub payoff: PayoffFunction,
}

impl Game {
    pub fn new(state: HeisenbergState, observable: Observable, payoff: PayoffFunction) -> Result<Self> {
        if state.dim() != observable.dim() {
            return Err(Error::DimensionMismatch {
                expected: observable.dim(),
                found: state.dim(),
            });
        }
        if payoff.len() != observable.outcomes() {
            return Err(Error::InvalidPayoff(format!(
                "{} payoffs for {} outcomes",
                payoff.len(),
                observable.outcomes()
            )));
        }
        Ok(Self {
            state,
            observable,
            payoff,
        })
    }

    /// The game with payoff `P₀`.
    pub fn standard(state: HeisenbergState, observable: Observable) -> Result<Self> {
        let payoff = PayoffFunction::eigenvalues(&observable);
        Self::new(state, observable, payoff)
    }

    pub fn with_payoff(&self, payoff: PayoffFunction) -> Result<Self> {
        Self::new(self.state.clone(), self.observable.clone(), payoff)
    }
}

/// `Tr(ρ·P(Â))`
pub fn born_oracle(state: &HeisenbergState, obs: &Observable, payoff: &PayoffFunction) -> Result<f64> {
    if state.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: state.dim(),
        });
    }
    Ok((state.matrix() * &payoff.operator(obs)?).trace().re)
}

/// Integer multiplicities `m_a ≥ 0` with `M = Σ m_a ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalWeights {
    counts: Vec<usize>,
}

impl RationalWeights {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.iter().sum::<usize>() == 0 {
            return Err(Error::InvalidMultiplicities("total multiplicity is zero".into()));
        }
        Ok(Self { counts })
    }

    /// Smallest denominator `M ≤ max_total` with `|w_a − m_a/M| < tol` for
    /// every `a`.
    pub fn detect(weights: &[f64], max_total: usize, tol: f64) -> Option<Self> {
        (1..=max_total).find_map(|m| {
            let counts: Vec<usize> = weights.iter().map(|w| (w * m as f64).round().max(0.0) as usize).collect();
            let fits = counts.iter().sum::<usize>() == m
                && weights
                    .iter()
                    .zip(&counts)
                    .all(|(w, &k)| (w - k as f64 / m as f64).abs() < tol);
            fits.then_some(Self { counts })
        })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        let m = self.total() as f64;
        self.counts.iter().map(|&k| k as f64 / m).collect()
    }
}

/// Which construction produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "stage-1")]
    Equal,
    #[serde(rename = "stage-2")]
    Rational,
    #[serde(rename = "stage-3")]
    Bracketed,
    #[serde(rename = "stage-4.1")]
    MixedUnsharp,
    #[serde(rename = "stage-4.2")]
    MixedEqual,
    #[serde(rename = "stage-4.3")]
    MixedRational,
    #[serde(rename = "stage-4.4")]
    MixedBracketed,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Equal => "stage-1",
            Method::Rational => "stage-2",
            Method::Bracketed => "stage-3",
            Method::MixedUnsharp => "stage-4.1",
            Method::MixedEqual => "stage-4.2",
            Method::MixedRational => "stage-4.3",
            Method::MixedBracketed => "stage-4.4",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One intermediate identity checked on the way to a value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl TrailEntry {
    pub fn new(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            residual,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// A derived game value with its oracle comparison and verification trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    pub value: f64,
    pub method: Method,
    pub oracle: f64,
    pub deviation: f64,
    pub trail: Vec<TrailEntry>,
}

impl ValueReport {
    pub(crate) fn new(value: f64, method: Method, oracle: f64, trail: Vec<TrailEntry>) -> Self {
        Self {
            value,
            method,
            oracle,
            deviation: (value - oracle).abs(),
            trail,
        }
    }

    /// Replaces the oracle, e.g. with the trace on the original game.
    pub(crate) fn against(mut self, oracle: f64) -> Self {
        self.oracle = oracle;
        self.deviation = (self.value - oracle).abs();
        self
    }

    pub fn trail_passed(&self) -> bool {
        self.trail.iter().all(TrailEntry::passed)
    }

    /// Trail passes and the oracle deviation is within `tol`.
    pub fn passed(&self, tol: f64) -> bool {
        self.trail_passed() && self.deviation <= tol
    }

    pub fn worst_trail_residual(&self) -> f64 {
        self.trail.iter().map(|t| t.residual).fold(0.0, f64::max)
    }
}

/// `Tr(diag(w) · diag(values))` assembled as matrices.
pub(crate) fn diagonal_oracle(values: &[f64], weights: &[f64]) -> f64 {
    (&ComplexMatrix::diagonal(weights) * &ComplexMatrix::diagonal(values))
        .trace()
        .re
}

pub(crate) fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::InvalidWeights(format!("{} weights for {n} outcomes", weights.len())));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_state(w: &[f64]) -> HeisenbergState {
        HeisenbergState::new(ComplexMatrix::diagonal(w)).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let obs = Observable::diagonal(&[2.0, 4.0]).unwrap();
        let p0 = PayoffFunction::eigenvalues(&obs);
        assert!((born_oracle(&diag_state(&[0.25, 0.75]), &obs, &p0).unwrap() - 3.5).abs() < 1e-15);
        assert!((born_oracle(&diag_state(&[1.0, 0.0]), &obs, &p0).unwrap() - 2.0).abs() < 1e-15);
        let mixed = HeisenbergState::maximally_mixed(2);
        assert!((born_oracle(&mixed, &obs, &p0).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn payoff_algebra() {
        let p = PayoffFunction::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(payoff_permute(&p, &Permutation::identity(2)).unwrap(), p);
        assert_eq!(
            payoff_permute(&p, &Permutation::transposition(2, 0, 1)).unwrap().values(),
            &[1.0, 0.0]
        );
        assert_eq!(payoff_sum(&p, &PayoffFunction::constant(2, 0.0)).unwrap(), p);
        assert!(payoff_sum(&p, &PayoffFunction::constant(3, 0.0)).is_err());
        assert!(PayoffFunction::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn doubled_payoff_doubles_oracle() {
        let obs = Observable::diagonal(&[-1.0, 0.5, 3.0]).unwrap();
        let rho = diag_state(&[0.2, 0.3, 0.5]);
        let p0 = PayoffFunction::eigenvalues(&obs);
        let v = born_oracle(&rho, &obs, &p0).unwrap();
        let v2 = born_oracle(&rho, &obs, &payoff_sum(&p0, &p0).unwrap()).unwrap();
        assert!((v2 - 2.0 * v).abs() < 1e-14);
    }

    #[test]
    fn symmetrized_payoff_is_branch_independent() {
        let p0 = PayoffFunction::new(vec![0.5, 2.0, -1.0]).unwrap();
        let mut total = vec![0.0; 3];
        for pi in Permutation::all(3) {
            let p = payoff_permute(&p0, &pi).unwrap();
            for (t, v) in total.iter_mut().zip(p.values()) {
                *t += v;
            }
        }
        for t in total {
            assert!((t - 2.0 * 1.5).abs() < 1e-14);
        }
    }

    #[test]
    fn rational_detection() {
        let r = RationalWeights::detect(&[0.25, 0.75], 64, 1e-12).unwrap();
        assert_eq!(r.counts(), &[1, 3]);
        assert!(RationalWeights::detect(&[1.0 - 0.5f64.sqrt(), 0.5f64.sqrt()], 64, 1e-12).is_none());
        assert!(RationalWeights::new(vec![0, 0]).is_err());
    }

    #[test]
    fn game_validation() {
        let obs = Observable::diagonal(&[1.0, 2.0]).unwrap();
        assert!(Game::standard(HeisenbergState::maximally_mixed(3), obs.clone()).is_err());
        assert!(Game::new(
            HeisenbergState::maximally_mixed(2),
            obs,
            PayoffFunction::constant(3, 0.0)
        )
        .is_err());
    }
}
