//! Binary and continuous domination over goal vectors.
//!
//! The predicates here are direction-agnostic: every goal carries a
//! [`Direction`] and comparisons read it from [`DominationWeights`].

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Default number of opponents each candidate is compared against.
pub const DEFAULT_OPPONENTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    pub fn weight(self) -> f64 {
        match self {
            Direction::Minimize => -1.0,
            Direction::Maximize => 1.0,
        }
    }
}

/// Per-goal weight `-1` (minimize) or `+1` (maximize).
#[derive(Debug, Clone, PartialEq)]
pub struct DominationWeights {
    w: Vec<f64>,
}

impl DominationWeights {
    pub fn new(directions: Vec<Direction>) -> Self {
        Self {
            w: directions.into_iter().map(Direction::weight).collect(),
        }
    }

    pub fn maximize_all(n_goals: usize) -> Self {
        Self::new(vec![Direction::Maximize; n_goals])
    }

    pub fn n_goals(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Keeps only the goals listed in `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            w: indices.iter().map(|&i| self.w[i]).collect(),
        }
    }

    fn check(&self, a: &[f64], b: &[f64]) -> Result<()> {
        if a.len() != self.w.len() {
            return Err(Error::mismatch("goal vector", self.w.len(), a.len()));
        }
        if b.len() != self.w.len() {
            return Err(Error::mismatch("goal vector", self.w.len(), b.len()));
        }
        Ok(())
    }
}

/// `a` is no worse than `b` on every goal and strictly better on at least one.
pub fn binary_dominates(a: &[f64], b: &[f64], w: &DominationWeights) -> Result<bool> {
    w.check(a, b)?;
    Ok(dominates(a, b, &w.w))
}

pub(crate) fn dominates(a: &[f64], b: &[f64], w: &[f64]) -> bool {
    let mut strictly = false;
    for ((x, y), wi) in a.iter().zip(b).zip(w) {
        let gain = wi * (x - y);
        if gain < 0.0 {
            return false;
        }
        if gain > 0.0 {
            strictly = true;
        }
    }
    strictly
}

/// Continuous domination: prefer `a` over `b` when the loss of jumping from
/// `b` to `a` is smaller than the reverse,
/// `s1 = -Σ exp(w_i (a_i - b_i) / n) < s2 = -Σ exp(w_i (b_i - a_i) / n)`.
pub fn cdom_prefers(a: &[f64], b: &[f64], w: &DominationWeights) -> Result<bool> {
    w.check(a, b)?;
    Ok(cdom(a, b, &w.w))
}

pub(crate) fn cdom(a: &[f64], b: &[f64], w: &[f64]) -> bool {
    let n = w.len() as f64;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for ((x, y), wi) in a.iter().zip(b).zip(w) {
        s1 -= (wi * (x - y) / n).exp();
        s2 -= (wi * (y - x) / n).exp();
    }
    s1 < s2
}

/// Fraction of `opponents` that `candidate` is cdom-preferred over.
pub fn domination_score(
    candidate: &[f64],
    opponents: &[Vec<f64>],
    w: &DominationWeights,
) -> Result<f64> {
    if opponents.is_empty() {
        return Err(Error::InvalidInput("opponent sample is empty".into()));
    }
    let mut wins = 0usize;
    for o in opponents {
        if cdom_prefers(candidate, o, w)? {
            wins += 1;
        }
    }
    Ok(wins as f64 / opponents.len() as f64)
}

/// Result of [`select_best`]: indices into the population in ranked order.
#[derive(Debug, Clone, PartialEq)]
pub struct BestRest {
    pub best: Vec<usize>,
    pub rest: Vec<usize>,
    /// Domination score of every population member, by original index.
    pub scores: Vec<f64>,
}

impl BestRest {
    pub fn best_vectors(&self, population: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.best.iter().map(|&i| population[i].clone()).collect()
    }

    pub fn rest_vectors(&self, population: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.rest.iter().map(|&i| population[i].clone()).collect()
    }
}

/// `⌊√size⌋`, the default size of the best group.
pub fn default_best_count(population_size: usize) -> usize {
    (population_size as f64).sqrt().floor() as usize
}

/// Scores every vector against `opponents` others drawn without replacement
/// (self excluded) from a seed-derived stream, sorts descending by score with
/// ties kept in original order, and splits off the top `count`.
pub fn select_best(
    population: &[Vec<f64>],
    count: usize,
    w: &DominationWeights,
    seed: u64,
    opponents: usize,
) -> Result<BestRest> {
    if count > population.len() {
        return Err(Error::InvalidInput(format!(
            "best count {count} exceeds population size {}",
            population.len()
        )));
    }
    if opponents == 0 {
        return Err(Error::InvalidConfig(
            "opponent sample size must be positive".into(),
        ));
    }
    if let Some(v) = population.iter().find(|v| v.len() != w.n_goals()) {
        return Err(Error::mismatch("goal vector", w.n_goals(), v.len()));
    }

    let scores = domination_scores(population, w, seed, opponents);
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
    let rest = order.split_off(count);
    Ok(BestRest {
        best: order,
        rest,
        scores,
    })
}

/// Win fractions for every population member. Candidate `i` draws its
/// opponents from rng stream `i` of `seed`, so scores do not depend on
/// evaluation order.
fn domination_scores(
    population: &[Vec<f64>],
    w: &DominationWeights,
    seed: u64,
    opponents: usize,
) -> Vec<f64> {
    let size = population.len();
    if size < 2 {
        return vec![0.0; size];
    }
    let m = opponents.min(size - 1);
    let k = w.n_goals();
    let n = k as f64;

    // exp(w (a - b) / n) = p(a) * q(b) with p = exp(w a / n), q = 1 / p.
    let p: Vec<f64> = population
        .iter()
        .flat_map(|v| v.iter().zip(&w.w).map(|(x, wi)| (wi * x / n).exp()))
        .collect();
    let q: Vec<f64> = p.iter().map(|x| 1.0 / x).collect();

    (0..size)
        .into_par_iter()
        .map_init(
            || (0..size - 1).collect::<Vec<usize>>(),
            |pool, i| {
                let mut rng = stream_rng(seed, i as u64);
                let (pi, qi) = (&p[i * k..(i + 1) * k], &q[i * k..(i + 1) * k]);
                let wins = with_partial_shuffle(pool, m, &mut rng, |drawn| {
                    drawn
                        .iter()
                        .map(|&j| if j >= i { j + 1 } else { j })
                        .filter(|&j| {
                            let (pj, qj) = (&p[j * k..(j + 1) * k], &q[j * k..(j + 1) * k]);
                            let (mut s1, mut s2) = (0.0, 0.0);
                            for g in 0..k {
                                s1 -= pi[g] * qj[g];
                                s2 -= pj[g] * qi[g];
                            }
                            s1 < s2
                        })
                        .count()
                });
                wins as f64 / m as f64
            },
        )
        .collect()
}

/// Runs `f` on `amount` elements drawn without replacement from `pool` by a
/// partial Fisher-Yates shuffle, then undoes the swaps so the pool is back in
/// its original order for the next caller.
fn with_partial_shuffle<R: Rng, T>(
    pool: &mut [usize],
    amount: usize,
    rng: &mut R,
    f: impl FnOnce(&[usize]) -> T,
) -> T {
    let mut swaps = Vec::with_capacity(amount);
    for t in 0..amount {
        let j = rng.gen_range(t..pool.len());
        pool.swap(t, j);
        swaps.push(j);
    }
    let out = f(&pool[..amount]);
    for (t, j) in swaps.into_iter().enumerate().rev() {
        pool.swap(t, j);
    }
    out
}
