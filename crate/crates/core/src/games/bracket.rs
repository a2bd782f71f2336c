use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::Spectrum;
use crate::DIMENSION_CAP;

use super::{
    check_weights, diagonal_oracle, rational_value_reduced, stage2_value, Method, RationalWeights, TrailEntry,
    ValueReport,
};

/// Default bound on counted refinements.
pub const STAGE3_ITERATION_CAP: usize = 40;

/// Largest denominator exponent: `M = 2^k` with `k ≤ 60`.
const MAX_EXPONENT: u32 = 60;

/// Rational games bounding a target value from below and above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketingResult {
    pub lower_value: f64,
    pub upper_value: f64,
    /// Refinements that narrowed the bracket.
    pub iterations: usize,
    pub width: f64,
    /// `(lower, upper)` after each counted refinement.
    pub history: Vec<(f64, f64)>,
    /// Largest `lower − upper` seen at any step; zero when dominance held.
    pub dominance_violation: f64,
}

impl BracketingResult {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower_value + self.upper_value)
    }
}

/// Value of a game with arbitrary (typically irrational) weights.
///
/// For `M = 2^k` the upper game rounds every weight down to a multiple of
/// `1/M` and gives the spare mass to the largest eigenvalue; the lower game
/// gives it to the smallest. Both are rational games evaluated by
/// [`stage2_value`] when the register fits under the dimension cap, and by
/// the reduced weighted sum beyond it.
pub fn stage3_value(spectrum: &Spectrum, target_weights: &[f64], tol: f64) -> Result<(BracketingResult, ValueReport)> {
    let values = spectrum.values();
    let bracket = bracket_value(values, target_weights, tol, STAGE3_ITERATION_CAP, |vals, counts| {
        pure_rational(vals, counts)
    })?;
    let report = bracket_report(&bracket, Method::Bracketed, values, target_weights, tol);
    Ok((bracket, report))
}

pub(crate) fn bracket_report(
    bracket: &BracketingResult,
    method: Method,
    values: &[f64],
    weights: &[f64],
    tol: f64,
) -> ValueReport {
    let trail = vec![
        TrailEntry::new("bracket width", bracket.width, tol),
        TrailEntry::new("dominance", bracket.dominance_violation, 0.0),
    ];
    ValueReport::new(bracket.midpoint(), method, diagonal_oracle(values, weights), trail)
}

/// Largest joint dimension built for endpoints of brackets nested inside
/// other constructions; beyond it they use the reduced sum.
pub(crate) const NESTED_CONSTRUCTION_LIMIT: usize = 16;

/// Evaluates a rational endpoint as a pure-state coarse-measurement game.
pub(crate) fn pure_rational(values: &[f64], counts: &[usize]) -> Result<f64> {
    rational_within(values, counts, DIMENSION_CAP)
}

pub(crate) fn nested_rational(values: &[f64], counts: &[usize]) -> Result<f64> {
    rational_within(values, counts, NESTED_CONSTRUCTION_LIMIT)
}

fn rational_within(values: &[f64], counts: &[usize], limit: usize) -> Result<f64> {
    let (vals, kept): (Vec<f64>, Vec<usize>) = values
        .iter()
        .zip(counts)
        .filter(|(_, &k)| k > 0)
        .map(|(&v, &k)| (v, k))
        .unzip();
    let m: usize = kept.iter().sum();
    if vals.len() * m <= limit {
        Ok(stage2_value(&Spectrum::new(vals)?, &RationalWeights::new(kept)?)?.value)
    } else {
        Ok(rational_value_reduced(&vals, &kept))
    }
}

/// Refines dyadic brackets until `width < tol`. `evaluate` receives the
/// values and multiplicities of one rational game, zeros included.
pub fn bracket_value(
    values: &[f64],
    weights: &[f64],
    tol: f64,
    iteration_cap: usize,
    mut evaluate: impl FnMut(&[f64], &[usize]) -> Result<f64>,
) -> Result<BracketingResult> {
    check_weights(weights, values.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidWeights(format!("bracket tolerance must be positive, got {tol}")));
    }
    let hi = extreme(values, |x, y| x > y);
    let lo = extreme(values, |x, y| x < y);
    let mut result = BracketingResult {
        lower_value: f64::NEG_INFINITY,
        upper_value: f64::INFINITY,
        iterations: 0,
        width: f64::INFINITY,
        history: Vec::new(),
        dominance_violation: 0.0,
    };
    for k in 0..=MAX_EXPONENT {
        let m = 1usize << k;
        let upper = evaluate(values, &shifted_counts(weights, m, hi))?;
        let lower = evaluate(values, &shifted_counts(weights, m, lo))?;
        result.dominance_violation = result.dominance_violation.max(lower - upper);
        let width = (upper - lower).max(0.0);
        if width < result.width {
            result.iterations += 1;
            result.lower_value = lower;
            result.upper_value = upper;
            result.width = width;
            result.history.push((lower, upper));
            if width < tol {
                return Ok(result);
            }
            if result.iterations >= iteration_cap {
                break;
            }
        }
    }
    Err(Error::BracketNotConverged {
        iterations: result.iterations,
        width: result.width,
        lower: result.lower_value,
        upper: result.upper_value,
    })
}

fn extreme(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    (1..values.len()).fold(0, |best, a| if better(values[a], values[best]) { a } else { best })
}

/// `⌊w_a M⌋` everywhere except `target`, which takes the remainder.
fn shifted_counts(weights: &[f64], m: usize, target: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = weights
        .iter()
        .map(|w| ((w * m as f64).floor().max(0.0) as usize).min(m))
        .collect();
    counts[target] = 0;
    let used: usize = counts.iter().sum();
    counts[target] = m.saturating_sub(used);
    counts
}
