//! The five-row effectiveness matrix and suite-level objectives.
//!
//! Row `j`, column `k` holds test `k`'s share of the whole suite's total for
//! goal `j`, so the objective vector of a binary selection `x` is `A·x` and
//! selecting every test scores exactly 1 on each non-degenerate row.

use serde::{Deserialize, Serialize};

use crate::domination::{Direction, DominationWeights};
use crate::error::{Error, Result};

pub const N_GOALS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Goal {
    Time,
    Discontinuity,
    Infinity,
    Instability,
    MinMax,
}

impl Goal {
    /// Row order of [`EffectivenessMatrix`] and [`ObjectiveVector`].
    pub const ALL: [Goal; N_GOALS] = [
        Goal::Time,
        Goal::Discontinuity,
        Goal::Infinity,
        Goal::Instability,
        Goal::MinMax,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Goal::Time => "time",
            Goal::Discontinuity => "discontinuity",
            Goal::Infinity => "infinity",
            Goal::Instability => "instability",
            Goal::MinMax => "minmax",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Goal::Time => Direction::Minimize,
            _ => Direction::Maximize,
        }
    }
}

/// Directions of all five goals, time minimized and the rest maximized.
pub fn goal_weights() -> DominationWeights {
    DominationWeights::new(Goal::ALL.iter().map(|g| g.direction()).collect())
}

/// Normalized per-test scores of the four signal metrics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerTestScores {
    pub discontinuity: Vec<f64>,
    pub infinity: Vec<f64>,
    pub instability: Vec<f64>,
    pub minmax: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector(pub [f64; N_GOALS]);

impl ObjectiveVector {
    pub fn get(&self, goal: Goal) -> f64 {
        self.0[goal.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectivenessMatrix {
    rows: [Vec<f64>; N_GOALS],
    degenerate: [bool; N_GOALS],
}

impl EffectivenessMatrix {
    /// Builds the matrix from per-test metric scores and execution times.
    ///
    /// A metric whose scores are all zero becomes a zero row and is flagged
    /// degenerate.
    pub fn build(scores: &PerTestScores, execution_times: &[f64]) -> Result<Self> {
        let n = execution_times.len();
        if n == 0 {
            return Err(Error::InvalidInput("no test cases".into()));
        }
        for (context, v) in [
            ("discontinuity scores", &scores.discontinuity),
            ("infinity scores", &scores.infinity),
            ("instability scores", &scores.instability),
            ("minmax scores", &scores.minmax),
        ] {
            if v.len() != n {
                return Err(Error::mismatch(context, n, v.len()));
            }
            if let Some(s) = v.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "{context} must be finite and non-negative, got {s}"
                )));
            }
        }
        if let Some((k, t)) = execution_times
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "execution time of test {k} must be positive, got {t}"
            )));
        }

        let mut degenerate = [false; N_GOALS];
        let mut share = |goal: Goal, values: &[f64]| {
            let total: f64 = values.iter().sum();
            if total == 0.0 {
                degenerate[goal.index()] = true;
                vec![0.0; values.len()]
            } else {
                values.iter().map(|v| v / total).collect()
            }
        };
        let rows = [
            share(Goal::Time, execution_times),
            share(Goal::Discontinuity, &scores.discontinuity),
            share(Goal::Infinity, &scores.infinity),
            share(Goal::Instability, &scores.instability),
            share(Goal::MinMax, &scores.minmax),
        ];
        Ok(Self { rows, degenerate })
    }

    /// Wraps precomputed rows. Each row must be non-negative and sum to 1, or
    /// be entirely zero (degenerate).
    pub fn from_rows(rows: [Vec<f64>; N_GOALS]) -> Result<Self> {
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidInput("no test cases".into()));
        }
        let mut degenerate = [false; N_GOALS];
        for (j, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::mismatch("effectiveness matrix row", n, row.len()));
            }
            if row.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "row {j} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if sum == 0.0 {
                degenerate[j] = true;
            } else if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "row {j} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { rows, degenerate })
    }

    pub fn n_tests(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, goal: Goal) -> &[f64] {
        &self.rows[goal.index()]
    }

    pub fn rows(&self) -> &[Vec<f64>; N_GOALS] {
        &self.rows
    }

    pub fn is_degenerate(&self, goal: Goal) -> bool {
        self.degenerate[goal.index()]
    }

    pub fn weights(&self) -> DominationWeights {
        goal_weights()
    }

    /// `A · selection`.
    pub fn objectives(&self, selection: &[bool]) -> Result<ObjectiveVector> {
        if selection.len() != self.n_tests() {
            return Err(Error::mismatch(
                "selection",
                self.n_tests(),
                selection.len(),
            ));
        }
        Ok(self.objectives_unchecked(selection))
    }

    pub(crate) fn objectives_unchecked(&self, selection: &[bool]) -> ObjectiveVector {
        let mut out = [0.0; N_GOALS];
        for (value, row) in out.iter_mut().zip(&self.rows) {
            *value = self.row_dot(row, selection);
        }
        ObjectiveVector(out)
    }

    pub(crate) fn row_dot(&self, row: &[f64], selection: &[bool]) -> f64 {
        row.iter()
            .zip(selection)
            .filter(|(_, &s)| s)
            .map(|(a, _)| a)
            .sum()
    }

    /// `A · x` for a relaxed (real-valued) selection.
    pub fn apply(&self, x: &[f64]) -> [f64; N_GOALS] {
        let mut out = [0.0; N_GOALS];
        for (value, row) in out.iter_mut().zip(&self.rows) {
            *value = row.iter().zip(x).map(|(a, x)| a * x).sum();
        }
        out
    }
}

/// Objective vector of `selection` under `m`.
pub fn suite_objectives(m: &EffectivenessMatrix, selection: &[bool]) -> Result<ObjectiveVector> {
    m.objectives(selection)
}
