//! Scenario documents.
//!
//! A scenario is a TOML document naming one `kind` of run plus the
//! parameters that kind needs. Complex matrices are nested arrays of
//! `[re, im]` pairs.

use std::fmt;

use serde::{Deserialize, Serialize};

use qdarwin_core::matrix::{c, ComplexMatrix};
use qdarwin_core::DIMENSION_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    AlgebraCheck,
    MeasureDemo,
    DarwinismReport,
    GameValue,
    AxiomCheck,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::AlgebraCheck => "algebra-check",
            Kind::MeasureDemo => "measure-demo",
            Kind::DarwinismReport => "darwinism-report",
            Kind::GameValue => "game-value",
            Kind::AxiomCheck => "axiom-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Motion {
    Permutation,
    Measure,
    Coarse,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseSpec {
    #[default]
    Zero,
    /// Fresh uniform phases for every trial, drawn from the run's seed.
    SeededRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisSpec {
    #[default]
    Computational,
    /// A seeded random orthonormal basis.
    Random,
}

/// A mixed state `Σ μ_b C_b` over rank-one projectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub weights: Vec<f64>,
    #[serde(default)]
    pub basis: BasisSpec,
}

/// Complex matrix as rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Overrides every check's default tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<Motion>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub phases: PhaseSpec,
    /// Eigenvalues of the measured observable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Outcome weights of a pure game.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplicities: Option<Vec<usize>>,
    /// Register dimension `M`; must equal the multiplicity sum when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub register: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<Vec<f64>>,
    /// For sequential measurement: repeat in the measured basis instead of
    /// rotating first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<MixtureSpec>,
}

fn is_default<T: Default + PartialEq>(value: &T) -> bool {
    *value == T::default()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every problem found in one scenario document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub errors: Vec<FieldError>,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.errors.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ScenarioError {}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(text).map_err(|e| ScenarioError {
        errors: vec![FieldError {
            field: e.span().map_or_else(|| "document".to_string(), |s| format!("bytes {}..{}", s.start, s.end)),
            message: e.message().to_string(),
        }],
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn serialize_scenario(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenarios serialize")
}

struct Collector(Vec<FieldError>);

impl Collector {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(FieldError {
            field: field.into(),
            message: message.into(),
        });
    }

    fn require<T>(&mut self, field: &str, value: &Option<T>, kind: Kind) {
        if value.is_none() {
            self.push(field, format!("missing field required by {}", kind.label()));
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut errs = Collector(Vec::new());
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                errs.push("tolerance", format!("must be positive, got {t}"));
            }
        }
        if self.trials == Some(0) {
            errs.push("trials", "must be at least 1");
        }
        for &n in &self.dims {
            if n == 0 {
                errs.push("dims", "dimensions must be at least 1");
            }
        }

        match self.kind {
            Kind::AlgebraCheck => self.cap_dims(&mut errs, 1),
            Kind::AxiomCheck => self.cap_dims(&mut errs, 1),
            Kind::DarwinismReport => {
                self.single_dim(&mut errs);
                self.cap_dims(&mut errs, 2);
            }
            Kind::MeasureDemo => {
                errs.require("motion", &self.motion, self.kind);
                match self.motion {
                    Some(Motion::Coarse) => {
                        errs.require("values", &self.values, self.kind);
                        errs.require("multiplicities", &self.multiplicities, self.kind);
                    }
                    Some(Motion::Permutation) => {
                        self.single_dim(&mut errs);
                        self.cap_dims(&mut errs, 1);
                    }
                    Some(Motion::Measure) | Some(Motion::Sequential) => {
                        self.single_dim(&mut errs);
                        self.cap_dims(&mut errs, 2);
                    }
                    None => {}
                }
            }
            Kind::GameValue => self.validate_game(&mut errs),
        }
        if let Some(v) = &self.values {
            if v.is_empty() {
                errs.push("values", "must not be empty");
            }
            if v.iter().any(|x| !x.is_finite()) {
                errs.push("values", "must be finite");
            }
        }
        if let Some(m) = &self.multiplicities {
            self.validate_multiplicities(&mut errs, m);
        }
        if let Some(p) = &self.payoff {
            if p.iter().any(|x| !x.is_finite()) {
                errs.push("payoff", "must be finite");
            }
        }

        if errs.0.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError { errors: errs.0 })
        }
    }

    fn single_dim(&self, errs: &mut Collector) {
        if self.dims.len() != 1 {
            errs.push("dims", format!("{} needs exactly one dimension", self.kind.label()));
        }
    }

    fn cap_dims(&self, errs: &mut Collector, copies: u32) {
        for &n in &self.dims {
            if n.checked_pow(copies).is_none_or(|d| d > DIMENSION_CAP) {
                errs.push("dims", format!("total dimension of {n}^{copies} exceeds the cap of {DIMENSION_CAP}"));
            }
        }
    }

    fn validate_multiplicities(&self, errs: &mut Collector, m: &[usize]) {
        if m.contains(&0) {
            errs.push("multiplicities", "every multiplicity must be at least 1");
        }
        let total: usize = m.iter().sum();
        if let Some(register) = self.register {
            if register != total {
                errs.push(
                    "register",
                    format!("multiplicity sum mismatch: multiplicities sum to {total}, register is {register}"),
                );
            }
        }
        if let Some(v) = &self.values {
            if v.len() != m.len() {
                errs.push("multiplicities", format!("{} multiplicities for {} values", m.len(), v.len()));
            }
        }
        if m.len().saturating_mul(total) > DIMENSION_CAP {
            errs.push(
                "multiplicities",
                format!("total dimension {} exceeds the cap of {DIMENSION_CAP}", m.len() * total),
            );
        }
    }

    fn validate_game(&self, errs: &mut Collector) {
        let sources = [
            self.weights.is_some(),
            self.multiplicities.is_some(),
            self.mixture.is_some(),
            self.state.is_some(),
        ];
        match sources.iter().filter(|s| **s).count() {
            0 => errs.push("weights", "game-value needs one of weights, multiplicities, mixture or state"),
            1 => {}
            _ => errs.push("weights", "give only one of weights, multiplicities, mixture or state"),
        }
        let n = if let Some(obs) = &self.observable {
            let n = self.check_matrix(errs, "observable", obs);
            if self.values.is_some() {
                errs.push("values", "give values or observable, not both");
            }
            n
        } else {
            errs.require("values", &self.values, self.kind);
            self.values.as_ref().map(Vec::len)
        };
        let Some(n) = n else { return };
        if n > DIMENSION_CAP {
            errs.push("values", format!("dimension {n} exceeds the cap of {DIMENSION_CAP}"));
        }
        if let Some(w) = &self.weights {
            check_probabilities(errs, "weights", w, n);
        }
        if let Some(mix) = &self.mixture {
            check_probabilities(errs, "mixture.weights", &mix.weights, n);
        }
        if let Some(state) = &self.state {
            if let Some(k) = self.check_matrix(errs, "state", state) {
                if k != n {
                    errs.push("state", format!("state is {k}x{k} but the observable has dimension {n}"));
                }
            }
        }
        if let Some(p) = &self.payoff {
            if self.observable.is_none() && p.len() != n {
                errs.push("payoff", format!("{} payoffs for {n} values", p.len()));
            }
        }
    }

    fn check_matrix(&self, errs: &mut Collector, field: &str, rows: &MatrixSpec) -> Option<usize> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            errs.push(field, "must be a non-empty square matrix");
            return None;
        }
        if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
            errs.push(field, "entries must be finite");
            return None;
        }
        Some(n)
    }
}

fn check_probabilities(errs: &mut Collector, field: &str, w: &[f64], n: usize) {
    if w.len() != n {
        errs.push(field, format!("{} weights for dimension {n}", w.len()));
    }
    if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
        errs.push(field, "weights must be finite and nonnegative");
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        errs.push(field, format!("weight sum is {sum}, expected 1 within 1e-12"));
    }
}

pub fn matrix_from_spec(rows: &MatrixSpec) -> qdarwin_core::Result<ComplexMatrix> {
    let rows: Vec<Vec<_>> = rows.iter().map(|r| r.iter().map(|[re, im]| c(*re, *im)).collect()).collect();
    ComplexMatrix::from_rows(&rows)
}
