//! Domination with least-squares inversion.
//!
//! 1. Sample a large population of random goal vectors in `[0, 1]^5`.
//! 2. Keep the `⌊√pop⌋` vectors with the highest continuous-domination score.
//! 3. Invert each kept goal `b` into a relaxed selection by solving
//!    `min ‖Ax − b‖² + λ‖x‖²` over `0 ≤ x ≤ 1`.
//! 4. Threshold at 0.5, drop empty selections, and return the Pareto front.

use rand::Rng;
use rayon::prelude::*;

use crate::domination::{default_best_count, select_best, DEFAULT_OPPONENTS};
use crate::error::{Error, Result};
use crate::lsq::{solve_box_tikhonov, SolverConfig};
use crate::objective_model::{goal_weights, EffectivenessMatrix, N_GOALS};
use crate::rng::{stream_rng, streams};
use crate::selection::{pareto_front, Selection};

pub const DEFAULT_POPULATION: usize = 10_000;

/// Default weight of the `‖x‖²` term.
///
/// Small enough that the regularizer only breaks ties among the many exact
/// fits of the underdetermined system; a unit weight on a row-normalized
/// matrix pulls every component toward `Aᵀb ≈ 1/n` and nothing survives the
/// threshold.
pub const DEFAULT_LAMBDA: f64 = 1e-6;

pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DolessConfig {
    pub population: usize,
    /// `None` means `⌊√population⌋`.
    pub best_count: Option<usize>,
    pub opponents: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for DolessConfig {
    fn default() -> Self {
        Self {
            population: DEFAULT_POPULATION,
            best_count: None,
            opponents: DEFAULT_OPPONENTS,
            lambda: DEFAULT_LAMBDA,
            seed: 0,
        }
    }
}

impl DolessConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// A solution of the relaxed inversion problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSelection {
    pub x: Vec<f64>,
    /// `‖Ax − b‖² + λ‖x‖²` at `x`.
    pub residual: f64,
    pub projected_gradient_norm: f64,
}

/// `size` goal vectors drawn uniformly from `[0, 1]^5`.
pub fn sample_goal_population(size: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if size == 0 {
        return Err(Error::InvalidConfig(
            "goal population size must be positive".into(),
        ));
    }
    let mut rng = stream_rng(seed, streams::GOAL_SAMPLING);
    Ok((0..size)
        .map(|_| (0..N_GOALS).map(|_| rng.gen::<f64>()).collect())
        .collect())
}

pub fn solve_selection(
    m: &EffectivenessMatrix,
    goal: &[f64],
    lambda: f64,
) -> Result<RelaxedSelection> {
    if goal.len() != N_GOALS {
        return Err(Error::mismatch("goal vector", N_GOALS, goal.len()));
    }
    if m.n_tests() <= N_GOALS {
        return Err(Error::InvalidInput(format!(
            "least-squares inversion needs more than {N_GOALS} test cases, got {}",
            m.n_tests()
        )));
    }
    let sol = solve_box_tikhonov(m.rows(), goal, &SolverConfig::with_lambda(lambda))?;
    Ok(RelaxedSelection {
        x: sol.x,
        residual: sol.objective,
        projected_gradient_norm: sol.projected_gradient_norm,
    })
}

/// `x_i > 0.5` selects test `i`; exactly 0.5 does not.
pub fn threshold(r: &RelaxedSelection) -> Vec<bool> {
    r.x.iter().map(|&v| v > THRESHOLD).collect()
}

/// Runs the full pipeline and returns the Pareto front of the non-empty
/// thresholded selections, ordered by the rank of the goal that produced
/// them.
pub fn doless_run(m: &EffectivenessMatrix, config: &DolessConfig) -> Result<Vec<Selection>> {
    if m.n_tests() <= N_GOALS {
        return Err(Error::InvalidInput(format!(
            "least-squares inversion needs more than {N_GOALS} test cases, got {}",
            m.n_tests()
        )));
    }
    let w = goal_weights();
    let population = sample_goal_population(config.population, config.seed)?;
    let count = config
        .best_count
        .unwrap_or_else(|| default_best_count(config.population).max(1));
    let split = select_best(
        &population,
        count,
        &w,
        config.seed ^ streams::OPPONENT_SEED_SALT,
        config.opponents,
    )?;
    log::debug!(
        "doless: {} goals kept of {}, top score {:.3}",
        split.best.len(),
        population.len(),
        split.best.first().map_or(0.0, |&i| split.scores[i])
    );

    let relaxed = split
        .best
        .par_iter()
        .map(|&i| solve_selection(m, &population[i], config.lambda))
        .collect::<Result<Vec<_>>>()?;

    let candidates: Vec<Selection> = relaxed
        .iter()
        .map(threshold)
        .filter(|include| include.iter().any(|&b| b))
        .map(|include| Selection::new(m, include))
        .collect::<Result<_>>()?;
    if candidates.is_empty() {
        return Err(Error::AllSelectionsEmpty {
            candidates: relaxed.len(),
        });
    }
    pareto_front(&candidates, &w)
}
