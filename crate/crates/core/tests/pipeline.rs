use doless_core::data_io::{synth_dataset, SynthConfig};
use doless_core::doless::{
    doless_run, sample_goal_population, solve_selection, threshold, DolessConfig,
};
use doless_core::domination::binary_dominates;
use doless_core::lsq::{objective, solve_box_tikhonov, SolverConfig, OPTIMALITY_TOLERANCE};
use doless_core::objective_model::goal_weights;
use doless_core::EffectivenessMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_dataset(seed: u64, n: usize) -> EffectivenessMatrix {
    synth_dataset(&SynthConfig {
        n_tests: n,
        n_signals: 3,
        trace_len: 41,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
    .effectiveness_matrix()
    .unwrap()
}

#[test]
fn solver_beats_random_feasible_probes() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..20).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let b: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..8.0)).collect();
        for lambda in [1.0, 1e-3] {
            let sol = solve_box_tikhonov(&a, &b, &SolverConfig::with_lambda(lambda)).unwrap();
            assert!(sol.projected_gradient_norm <= OPTIMALITY_TOLERANCE);
            for _ in 0..1000 {
                let probe: Vec<f64> = (0..20).map(|_| rng.gen::<f64>()).collect();
                assert!(sol.objective <= objective(&a, &b, &probe, lambda));
            }
        }
    }
}

#[test]
fn solver_matches_grid_search_on_one_variable() {
    // One column, one row: minimize (a x - b)² + λ x² on [0, 1].
    for (a, b, lambda) in [
        (1.0, 0.3, 1.0),
        (2.0, 5.0, 0.1),
        (0.5, -1.0, 1.0),
        (3.0, 1.0, 1e-6),
    ] {
        let sol = solve_box_tikhonov(&[vec![a]], &[b], &SolverConfig::with_lambda(lambda)).unwrap();
        let grid = (0..=100_000)
            .map(|i| i as f64 / 100_000.0)
            .min_by(|x, y| {
                let f = |x: f64| (a * x - b).powi(2) + lambda * x * x;
                f(*x).total_cmp(&f(*y))
            })
            .unwrap();
        assert!((sol.x[0] - grid).abs() <= 1e-5, "{} vs {grid}", sol.x[0]);
    }
}

#[test]
fn relaxed_selections_are_box_feasible() {
    let m = small_dataset(1, 30);
    for goal in sample_goal_population(200, 4).unwrap() {
        let r = solve_selection(&m, &goal, 1e-6).unwrap();
        assert!(r.x.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(r.residual >= 0.0);
        assert_eq!(threshold(&r).len(), 30);
    }
}

#[test]
fn front_members_are_non_dominated_and_non_empty() {
    let w = goal_weights();
    for seed in 0..5 {
        let m = small_dataset(seed, 40);
        let config = DolessConfig {
            population: 2000,
            ..DolessConfig::with_seed(seed)
        };
        let front = doless_run(&m, &config).unwrap();
        assert!(!front.is_empty());
        for a in &front {
            assert!(!a.is_empty());
            assert_eq!(a.include.len(), 40);
            for b in &front {
                assert!(
                    !binary_dominates(a.objectives.as_slice(), b.objectives.as_slice(), &w)
                        .unwrap()
                );
            }
        }
        assert_eq!(front, doless_run(&m, &config).unwrap());
    }
}

#[test]
fn too_few_tests_is_rejected() {
    let rows: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.2; 5]);
    let m = EffectivenessMatrix::from_rows(rows).unwrap();
    assert!(doless_run(&m, &DolessConfig::default()).is_err());
}
