mod common;

use doless_core::data_io::{synth_dataset, SynthConfig};
use doless_core::domination::DominationWeights;
use doless_core::moea::{
    enumerate_goal_subsets, nondominated_sort, nsga2, nsga2_observed, pairwise_nsga2, GoalSubset,
    Nsga2Config,
};
use doless_core::objective_model::goal_weights;
use doless_core::EffectivenessMatrix;
use proptest::prelude::*;

fn dataset(seed: u64) -> EffectivenessMatrix {
    synth_dataset(&SynthConfig {
        n_tests: 20,
        n_signals: 3,
        trace_len: 41,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
    .effectiveness_matrix()
    .unwrap()
}

fn small_config(seed: u64) -> Nsga2Config {
    Nsga2Config {
        population: 40,
        generations: 30,
        ..Nsga2Config::with_seed(seed)
    }
}

#[test]
fn best_value_per_objective_never_worsens() {
    let m = dataset(3);
    for subset in enumerate_goal_subsets(5, 0) {
        let w = goal_weights().subset(subset.indices());
        let mut best: Option<Vec<f64>> = None;
        nsga2_observed(&m, &subset, &small_config(7), |_, pop| {
            let current: Vec<f64> = (0..w.n_goals())
                .map(|g| {
                    pop.iter()
                        .map(|c| w.weights()[g] * c.fitness[g])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            if let Some(prev) = &best {
                for (p, c) in prev.iter().zip(&current) {
                    assert!(c >= p, "objective regressed from {p} to {c}");
                }
            }
            best = Some(current);
        })
        .unwrap();
    }
}

#[test]
fn returned_front_is_feasible_and_non_dominated() {
    let m = dataset(4);
    let subset = GoalSubset::new(vec![0, 2, 4], 5, 0).unwrap();
    let front = nsga2(&m, &subset, &small_config(1)).unwrap();
    let w: Vec<f64> = goal_weights().subset(subset.indices()).weights().to_vec();
    let project = |o: &[f64]| -> Vec<f64> { subset.indices().iter().map(|&i| o[i]).collect() };
    for a in &front {
        assert_eq!(a.include.len(), 20);
        assert_eq!(m.objectives(&a.include).unwrap(), a.objectives);
        for b in &front {
            assert!(!common::dominates(
                &project(a.objectives.as_slice()),
                &project(b.objectives.as_slice()),
                &w
            ));
        }
    }
}

#[test]
fn symmetric_dataset_picks_first_subset() {
    // Equal shares on every row make each member's score zero for every subset.
    let rows: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.1; 10]);
    let m = EffectivenessMatrix::from_rows(rows).unwrap();
    let out = pairwise_nsga2(&m, &small_config(2), None).unwrap();
    assert_eq!(out.runs.len(), 10);
    assert!(out.runs.iter().all(|r| r.score.abs() < 1e-12));
    assert_eq!(out.best, enumerate_goal_subsets(5, 0)[0]);
}

#[test]
fn nsga2_is_deterministic() {
    let m = dataset(5);
    let subset = GoalSubset::new(vec![0, 1], 5, 0).unwrap();
    assert_eq!(
        nsga2(&m, &subset, &small_config(3)).unwrap(),
        nsga2(&m, &subset, &small_config(3)).unwrap()
    );
}

/// Fronts by repeatedly removing the non-dominated set.
fn peel(points: &[Vec<f64>], w: &[f64]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| {
                !left
                    .iter()
                    .any(|&j| common::dominates(&points[j], &points[i], w))
            })
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

proptest! {
    #[test]
    fn sort_matches_peeling(
        points in prop::collection::vec(prop::collection::vec(0u8..5, 3), 1..40),
        maximize in prop::collection::vec(prop::bool::ANY, 3),
    ) {
        let fitness: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
        let w = DominationWeights::new(
            maximize.iter().map(|&m| if m {
                doless_core::domination::Direction::Maximize
            } else {
                doless_core::domination::Direction::Minimize
            }).collect(),
        );
        let mut fronts = nondominated_sort(&fitness, &w).unwrap();
        for f in &mut fronts {
            f.sort_unstable();
        }
        prop_assert_eq!(fronts, peel(&fitness, w.weights()));
    }
}
