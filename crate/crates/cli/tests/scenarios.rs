use proptest::prelude::*;

use qdarwin_cli::scenario::{BasisSpec, MixtureSpec, Motion, PhaseSpec};
use qdarwin_cli::{emit_report, parse_scenario, run_scenario, serialize_scenario, Format, Kind, RunOptions, Scenario};

fn blank(kind: Kind) -> Scenario {
    Scenario {
        name: String::new(),
        kind,
        seed: None,
        tolerance: None,
        dims: Vec::new(),
        trials: None,
        motion: None,
        phases: PhaseSpec::Zero,
        values: None,
        weights: None,
        multiplicities: None,
        register: None,
        payoff: None,
        repeat: None,
        state: None,
        observable: None,
        mixture: None,
    }
}

fn run(text: &str) -> qdarwin_cli::RunReport {
    run_scenario(&parse_scenario(text).unwrap(), &RunOptions::default()).unwrap()
}

fn row<'a>(report: &'a qdarwin_cli::RunReport, prefix: &str) -> &'a qdarwin_cli::CheckRow {
    report
        .checks
        .iter()
        .find(|r| r.check.starts_with(prefix))
        .unwrap_or_else(|| panic!("no check starting with {prefix:?}"))
}

#[test]
fn rational_game_reports_two_thirds() {
    let report = run("kind = \"game-value\"\nvalues = [0.0, 1.0]\nmultiplicities = [1, 2]\nregister = 3\n");
    let value = row(&report, "value");
    assert!((value.value - 2.0 / 3.0).abs() < 1e-12);
    assert!(value.deviation < 1e-9);
    assert!(report.passed());
}

#[test]
fn algebra_check_at_four() {
    let report = run("kind = \"algebra-check\"\ndims = [4]\nseed = 3\n");
    assert_eq!(report.checks.len(), 2);
    assert!(report.checks.iter().all(|r| r.value < 1e-10));
}

#[test]
fn darwinism_report_at_three() {
    let report = run("kind = \"darwinism-report\"\ndims = [3]\n");
    assert_eq!(row(&report, "measured pair correlated").value, 1.0);
    assert_eq!(row(&report, "bijection").value, 1.0);
    assert!(report.passed());
}

#[test]
fn every_check_appears_once() {
    let report = run("kind = \"measure-demo\"\nmotion = \"measure\"\ndims = [2]\nphases = \"seeded-random\"\n");
    let mut names: Vec<&str> = report.checks.iter().map(|r| r.check.as_str()).collect();
    let total = names.len();
    names.sort();
    names.dedup();
    assert_eq!(names.len(), total);
}

#[test]
fn sequential_demos() {
    let rotated = run("kind = \"measure-demo\"\nmotion = \"sequential\"\ndims = [2]\n");
    assert!(row(&rotated, "fewest branches").value >= 2.0);
    assert!(rotated.passed(), "{rotated:?}");
    let repeat = run("kind = \"measure-demo\"\nmotion = \"sequential\"\ndims = [2]\nrepeat = true\n");
    assert_eq!(row(&repeat, "most branches").value, 1.0);
}

#[test]
fn csv_deviations_reparse() {
    let report = run("kind = \"game-value\"\nvalues = [0.0, 1.0]\nweights = [0.3, 0.7]\n");
    let csv = emit_report(&report, Format::Csv);
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    for (rec, row) in reader.records().zip(&report.checks) {
        let rec = rec.unwrap();
        let dev: f64 = rec[3].parse().unwrap();
        assert!((dev - row.deviation).abs() <= 1e-11 * row.deviation.abs().max(f64::MIN_POSITIVE));
    }
}

fn finite(range: f64) -> impl Strategy<Value = f64> {
    -range..range
}

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    let kind = prop_oneof![
        Just(Kind::AlgebraCheck),
        Just(Kind::MeasureDemo),
        Just(Kind::DarwinismReport),
        Just(Kind::GameValue),
        Just(Kind::AxiomCheck),
    ];
    (
        kind,
        proptest::option::of(any::<u64>()),
        proptest::option::of(1e-14..1e-3f64),
        prop::collection::vec(1usize..=4, 0..3),
        proptest::option::of(1usize..50),
        prop::collection::vec(finite(5.0), 1..4),
        prop_oneof![Just(PhaseSpec::Zero), Just(PhaseSpec::SeededRandom)],
        any::<bool>(),
        "[a-z][a-z0-9-]{0,12}",
    )
        .prop_map(|(kind, seed, tolerance, dims, trials, values, phases, flag, name)| {
            let mut s = blank(kind);
            s.name = name;
            s.seed = seed;
            s.tolerance = tolerance;
            s.dims = dims;
            s.trials = trials;
            s.phases = phases;
            match kind {
                Kind::MeasureDemo => {
                    s.motion = Some(if flag { Motion::Coarse } else { Motion::Sequential });
                    s.repeat = Some(flag);
                    s.multiplicities = Some(vec![1; values.len()]);
                    s.values = Some(values);
                }
                Kind::GameValue => {
                    let n = values.len();
                    if flag {
                        s.mixture = Some(MixtureSpec {
                            weights: vec![1.0 / n as f64; n],
                            basis: BasisSpec::Random,
                        });
                    } else {
                        s.state = Some(
                            (0..n)
                                .map(|i| (0..n).map(|j| [if i == j { 1.0 / n as f64 } else { 0.0 }, 0.0]).collect())
                                .collect(),
                        );
                    }
                    s.payoff = Some(values.iter().map(|v| v * 2.0).collect());
                    s.values = Some(values);
                }
                _ => {}
            }
            s
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn parse_inverts_serialize(s in scenario_strategy()) {
        let text = serialize_scenario(&s);
        match s.validate() {
            Ok(()) => prop_assert_eq!(&parse_scenario(&text).unwrap(), &s, "{}", text),
            Err(_) => prop_assert!(parse_scenario(&text).is_err()),
        }
        prop_assert_eq!(&toml::from_str::<Scenario>(&text).unwrap(), &s, "{}", text);
    }
}

#[test]
fn hand_built_scenario_survives_parse() {
    let mut s = blank(Kind::GameValue);
    s.values = Some(vec![0.1, 0.2]);
    s.mixture = Some(MixtureSpec {
        weights: vec![0.5, 0.5],
        basis: BasisSpec::Computational,
    });
    let text = serialize_scenario(&s);
    assert_eq!(parse_scenario(&text).unwrap(), s);
}
