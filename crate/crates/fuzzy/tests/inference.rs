//! Rule-base learning, serialization and the type-II inference invariants.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use t2fuzzy::fls::{wang_mendel_learn, LearnOptions};
use t2fuzzy::{LinguisticVariable, RuleBase};

fn target(x: &[f64]) -> f64 {
    (1.5 * x[0]).sin() + 0.5 * x[1] * x[1] - 0.3 * x[0] * x[1]
}

/// Learns an interval type-II base with zero mean uncertainty from noisy samples.
fn learned(labels: usize) -> RuleBase {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<(Vec<f64>, f64)> = (0..2000)
        .map(|_| {
            let x = vec![rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)];
            let y = target(&x) + rng.random_range(-0.05..0.05);
            (x, y)
        })
        .collect();
    let vars = vec![
        LinguisticVariable::uniform("x0", -2.0, 2.0, labels, Some(0.0)).unwrap(),
        LinguisticVariable::uniform("x1", -1.0, 1.0, labels, Some(0.0)).unwrap(),
    ];
    wang_mendel_learn(&samples, vars, &LearnOptions::default()).unwrap().0
}

#[test]
fn json_round_trip_preserves_inference() {
    let rb = learned(4);
    let text = serde_json::to_string_pretty(&rb).unwrap();
    let back: RuleBase = serde_json::from_str(&text).unwrap();
    back.validate().unwrap();
    assert_eq!(back, rb);
    for x in [[-1.5, 0.2], [0.0, 0.0], [1.9, -0.9]] {
        assert_eq!(back.infer_it2_cos(&x).unwrap(), rb.infer_it2_cos(&x).unwrap());
    }
}

#[test]
fn learned_base_tracks_the_target() {
    let t1 = learned(5).downgrade_to_t1().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut err = 0.0;
    for _ in 0..500 {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0)];
        err += (t1.infer_t1(&x).unwrap() - target(&x)).abs();
    }
    assert!(err / 500.0 < 0.25, "mean abs error {}", err / 500.0);
}

#[test]
fn malformed_json_is_rejected() {
    let rb = learned(2);
    let mut v = serde_json::to_value(&rb).unwrap();
    v["rules"][0]["antecedent"] = serde_json::json!([0, 7]);
    let bad: RuleBase = serde_json::from_value(v).unwrap();
    assert!(bad.validate().is_err());
    assert!(RuleBase::new(bad.variables.clone(), "y", bad.rules.clone(), bad.tnorm).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_uncertainty_center_equals_downgrade(x0 in -2.5f64..2.5, x1 in -1.5f64..1.5) {
        let rb = learned(3);
        let t1 = rb.downgrade_to_t1().unwrap();
        let it2 = rb.infer_it2_cos(&[x0, x1]).unwrap();
        prop_assert!((it2.center - t1.infer_t1(&[x0, x1]).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn output_interval_contains_downgrade(x0 in -2.0f64..2.0, x1 in -1.0f64..1.0, rho in 0.0f64..1.0) {
        let rb = learned(3).with_mean_uncertainty(rho).unwrap();
        let y = rb.downgrade_to_t1().unwrap().infer_t1(&[x0, x1]).unwrap();
        let out = rb.infer_it2_cos(&[x0, x1]).unwrap();
        prop_assert!(out.lo() - 1e-12 <= y && y <= out.hi() + 1e-12, "{y} outside {out:?}");
    }

    #[test]
    fn wider_footprint_never_narrows_output(x0 in -2.0f64..2.0, x1 in -1.0f64..1.0, rho in 0.0f64..0.8, extra in 0.0f64..0.8) {
        let base = learned(3);
        let a = base.with_mean_uncertainty(rho).unwrap().infer_it2_cos(&[x0, x1]).unwrap();
        let b = base.with_mean_uncertainty(rho + extra).unwrap().infer_it2_cos(&[x0, x1]).unwrap();
        prop_assert!(b.spread >= a.spread - 1e-12, "{} < {}", b.spread, a.spread);
    }
}
