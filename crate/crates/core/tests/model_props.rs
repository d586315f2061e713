mod common;

use common::strategies;
use proptest::prelude::*;
use wfa_ldp::exactdist;
use wfa_ldp::model::{self, LinearRepresentation, ModelError, Word};
use wfa_ldp::Error;

#[test]
fn bundled_models_validate() {
    for name in [
        "bernoulli_0.3.json",
        "bernoulli_0.4.json",
        "bernoulli_0.5.json",
        "uniform.json",
        "golden.json",
        "nilpotent_b.json",
        "three_state.json",
    ] {
        let report = model::validate(&common::load(name));
        assert!(report.is_valid(), "{name}: {:?}", report.messages);
    }
    let report = model::validate(&common::load("swap.json"));
    assert!(!report.primitive);
    assert!(report.messages.iter().any(|m| m == "A+B not primitive"));
}

#[test]
fn golden_file_matches_constructor() {
    assert_eq!(common::load("golden.json"), common::golden());
    assert_eq!(common::load("uniform.json"), common::uniform());
}

#[test]
fn json_round_trip() {
    for (_, rep) in common::all_models() {
        assert_eq!(model::parse_model(&rep.to_json()).unwrap(), rep);
    }
}

#[test]
fn parse_rejections() {
    let cases = [
        r#"{"m": 1, "xi": [1], "A": [[-0.5]], "B": [[1]], "eta": [1]}"#,
        r#"{"m": 2, "xi": [1], "A": [[1]], "B": [[1]], "eta": [1]}"#,
        r#"{"m": 1, "xi": [1], "A": [[0]], "B": [[1]], "eta": [1]}"#,
        r#"{"m": 1, "xi": [0], "A": [[1]], "B": [[1]], "eta": [1]}"#,
        r#"{"m": 1, "xi": [1], "A": [[1]], "B": [[1]]}"#,
        r#"{"m": 1, "xi": [1], "A": [[1]], "B": [[1]], "eta": [1], "extra": 0}"#,
        r#"{"m": 1, "xi": [1], "A": [[1]], "A": [[1]], "B": [[1]], "eta": [1]}"#,
        "not json",
    ];
    for text in cases {
        assert!(model::parse_model(text).is_err(), "accepted {text}");
    }
    let err = model::parse_model(cases[0]).unwrap_err();
    assert!(matches!(err, ModelError::NegativeEntry { .. }), "{err}");
    assert!(err.to_string().contains("negative entry"));
    assert!(matches!(model::parse_model(cases[2]).unwrap_err(), ModelError::ZeroMatrix { .. }));
}

#[test]
fn missing_file_is_io_error() {
    let err = model::load_model(common::model_path("no_such_model.json")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn tilt_bound_enforced() {
    let rep = common::golden();
    assert!(matches!(model::tilt(&rep, 51.0), Err(Error::TiltOutOfRange { .. })));
    assert!(model::tilt(&rep, f64::NAN).is_err());
    assert!(model::tilt_within(&rep, 51.0, 60.0).is_ok());
}

#[test]
fn wielandt_exponents() {
    assert_eq!(model::wielandt_exponent(1), 1);
    assert_eq!(model::wielandt_exponent(3), 5);
    assert_eq!(model::wielandt_exponent(6), 26);
}

#[test]
fn word_display_round_trip() {
    let w: Word = "abba".parse().unwrap();
    assert_eq!(w.to_string(), "abba");
    assert_eq!(w.count_a(), 2);
    assert!("abc".parse::<Word>().is_err());
}

fn words_total(rep: &LinearRepresentation, n: usize) -> f64 {
    (0..1u64 << n).map(|bits| model::weight_of_word(rep, &Word::from_bits(bits, n))).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn primitivity_matches_boolean_powers(m in strategies::pattern(6)) {
        prop_assert_eq!(model::is_primitive(&m), common::boolean_power_primitive(&m));
    }

    #[test]
    fn word_weights_sum_to_total(rep in strategies::primitive_model(3), n in 0usize..=12) {
        let direct = words_total(&rep, n);
        let total = model::total_weight(&rep, n).exp();
        prop_assert!((direct - total).abs() <= 1e-12 * total, "{direct} vs {total}");
    }

    #[test]
    fn tilts_compose(rep in strategies::primitive_model(3), s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let twice = model::tilt(&model::tilt(&rep, s).unwrap(), t).unwrap();
        let once = model::tilt(&rep, s + t).unwrap();
        for (x, y) in twice.matrix_a().entries().iter().zip(once.matrix_a().entries()) {
            prop_assert!((x - y).abs() <= 1e-13 * y.abs());
        }
        prop_assert_eq!(twice.matrix_b(), once.matrix_b());
    }

    #[test]
    fn change_of_measure(rep in strategies::primitive_model(3), t in -5.0f64..5.0, n in 1usize..=200) {
        let base = exactdist::exact_distribution(&rep, n).unwrap();
        let tilted = exactdist::exact_distribution(&model::tilt(&rep, t).unwrap(), n).unwrap();
        let log_psi = exactdist::moment_generating(&rep, n, t).unwrap();
        for k in 0..=n {
            let lhs = base.log_probability(k);
            let rhs = tilted.log_probability(k) + log_psi - t * k as f64;
            if lhs == f64::NEG_INFINITY {
                prop_assert_eq!(rhs, f64::NEG_INFINITY);
            } else {
                prop_assert!((lhs - rhs).exp_m1().abs() <= 1e-9, "k={} lhs={} rhs={}", k, lhs, rhs);
            }
        }
    }
}
