mod common;

use doless_core::objective_model::{EffectivenessMatrix, PerTestScores};
use doless_core::signal_metrics::{
    discontinuity_score, infinity_score, instability_score, minmax_score, normalize_per_test,
    MetricKind, RawScoreTable, SignalTrace,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_samples(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.gen_range(-2.0..3.0));
    (0..len).map(|_| rng.gen_range(-1.0..1.0) * scale).collect()
}

#[test]
fn scores_match_naive_oracle() {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(1..200);
        let dt = rng.gen_range(0.001..2.0);
        let s = random_samples(&mut rng, len);
        let trace = SignalTrace::new(s.clone(), dt).unwrap();
        for (ours, naive) in [
            (discontinuity_score(&trace), common::discontinuity(&s, dt)),
            (instability_score(&trace), common::instability(&s)),
            (infinity_score(&trace), common::infinity(&s)),
            (minmax_score(&trace), common::minmax(&s)),
        ] {
            assert!(
                common::relative_error(ours, naive) <= 1e-12,
                "seed {seed}: {ours} vs {naive}"
            );
        }
    }
}

#[test]
fn suite_objectives_match_ratio_formula() {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.gen_range(6..40);
        let signals = rng.gen_range(1..5);
        let len = rng.gen_range(4..60);
        let dt = 0.1;
        let tests: Vec<Vec<SignalTrace>> = (0..n)
            .map(|_| {
                (0..signals)
                    .map(|_| SignalTrace::new(random_samples(&mut rng, len), dt).unwrap())
                    .collect()
            })
            .collect();
        let times: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();

        let naive_raw = |f: fn(&[f64], f64) -> f64| -> Vec<Vec<f64>> {
            tests
                .iter()
                .map(|t| t.iter().map(|s| f(s.samples(), dt)).collect())
                .collect()
        };
        let naive = [
            times.clone(),
            common::normalize(&naive_raw(common::discontinuity)),
            common::normalize(&naive_raw(|s, _| common::infinity(s))),
            common::normalize(&naive_raw(|s, _| common::instability(s))),
            common::normalize(&naive_raw(|s, _| common::minmax(s))),
        ];

        let table = |kind| {
            normalize_per_test(
                &RawScoreTable::from_traces(kind, tests.iter().map(Vec::as_slice)).unwrap(),
            )
        };
        let scores = PerTestScores {
            discontinuity: table(MetricKind::Discontinuity),
            infinity: table(MetricKind::Infinity),
            instability: table(MetricKind::Instability),
            minmax: table(MetricKind::MinMax),
        };
        let m = EffectivenessMatrix::build(&scores, &times).unwrap();

        for _ in 0..10 {
            let selection: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            let obj = m.objectives(&selection).unwrap();
            for (g, values) in naive.iter().enumerate() {
                let expected = common::ratio(values, &selection);
                assert!(
                    common::relative_error(obj.0[g], expected) <= 1e-12,
                    "seed {seed} goal {g}: {} vs {expected}",
                    obj.0[g]
                );
            }
        }
    }
}

#[test]
fn short_traces_have_no_discontinuity() {
    for len in 1..=2 {
        let trace = SignalTrace::new(vec![5.0; len], 1.0).unwrap();
        assert_eq!(discontinuity_score(&trace), 0.0);
    }
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0..100.0f64, 1..80)
}

proptest! {
    #[test]
    fn scores_are_non_negative(s in samples(), dt in 0.01..1.0f64) {
        let t = SignalTrace::new(s, dt).unwrap();
        for kind in MetricKind::ALL {
            prop_assert!(kind.score(&t) >= 0.0);
        }
    }

    #[test]
    fn reversal_leaves_scores_unchanged(s in samples(), dt in 0.01..1.0f64) {
        let mut r = s.clone();
        r.reverse();
        let (a, b) = (SignalTrace::new(s, dt).unwrap(), SignalTrace::new(r, dt).unwrap());
        for kind in MetricKind::ALL {
            let (x, y) = (kind.score(&a), kind.score(&b));
            prop_assert!(common::relative_error(x, y) <= 1e-12, "{:?}: {} vs {}", kind, x, y);
        }
    }

    #[test]
    fn scaling_scales_scores(s in samples(), dt in 0.01..1.0f64, c in 0.01..100.0f64) {
        let scaled: Vec<f64> = s.iter().map(|v| v * c).collect();
        let (a, b) = (SignalTrace::new(s, dt).unwrap(), SignalTrace::new(scaled, dt).unwrap());
        for kind in MetricKind::ALL {
            let (x, y) = (kind.score(&a) * c, kind.score(&b));
            prop_assert!(common::relative_error(x, y) <= 1e-12, "{:?}: {} vs {}", kind, x, y);
        }
    }

    #[test]
    fn normalized_scores_are_in_unit_interval(
        raw in prop::collection::vec(prop::collection::vec(0.0..50.0f64, 3), 1..30)
    ) {
        let table = RawScoreTable::new(MetricKind::Instability, raw).unwrap();
        for v in normalize_per_test(&table) {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn objectives_are_monotone_and_additive(
        values in prop::collection::vec((0.0..1.0f64, 0.1..5.0f64), 6..40),
        bits in prop::collection::vec(0u8..3, 40),
    ) {
        let n = values.len();
        let s: Vec<f64> = values.iter().map(|v| v.0).collect();
        let times: Vec<f64> = values.iter().map(|v| v.1).collect();
        let scores = PerTestScores {
            discontinuity: s.clone(),
            infinity: s.iter().map(|v| v * v).collect(),
            instability: s.iter().map(|v| 1.0 - v).collect(),
            minmax: s,
        };
        let m = EffectivenessMatrix::build(&scores, &times).unwrap();
        // 0: neither, 1: in x, 2: in y.
        let x: Vec<bool> = bits[..n].iter().map(|&b| b == 1).collect();
        let y: Vec<bool> = bits[..n].iter().map(|&b| b == 2).collect();
        let union: Vec<bool> = x.iter().zip(&y).map(|(a, b)| *a || *b).collect();
        let (ox, oy, ou) = (m.objectives(&x).unwrap(), m.objectives(&y).unwrap(), m.objectives(&union).unwrap());
        for g in 0..5 {
            prop_assert!(ou.0[g] >= ox.0[g] && ou.0[g] >= oy.0[g]);
            prop_assert!((ox.0[g] + oy.0[g] - ou.0[g]).abs() <= 1e-12);
        }
    }
}
