//! Post-hoc evaluation of selections and statistical ranking of repeated runs.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::Selection;

/// Smallest |Cliff's delta| that counts as more than a small effect.
pub const SMALL_EFFECT: f64 = 0.147;

/// Binary kill matrix indexed `[mutant][test case]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KillMatrix {
    kills: Vec<Vec<bool>>,
}

impl KillMatrix {
    /// Rejects ragged matrices, naming the first offending mutant row.
    /// Zero mutants is allowed.
    pub fn new(kills: Vec<Vec<bool>>, n_tests: usize) -> Result<Self> {
        for (i, row) in kills.iter().enumerate() {
            if row.len() != n_tests {
                return Err(Error::validation(
                    format!("kill_matrix[{i}]"),
                    format!(
                        "mutant row {i} has {} entries, expected {n_tests}",
                        row.len()
                    ),
                ));
            }
        }
        Ok(Self { kills })
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.kills
    }

    pub fn n_mutants(&self) -> usize {
        self.kills.len()
    }

    /// Mutants killed by no test or by every test. Real suites drop these;
    /// here they are reported rather than rejected.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, row) in self.kills.iter().enumerate() {
            let killers = row.iter().filter(|&&k| k).count();
            if killers == 0 {
                out.push(format!("mutant {i} is not killed by any test"));
            } else if killers == row.len() {
                out.push(format!("mutant {i} is killed by every test"));
            }
        }
        out
    }

    fn killed_by(&self, selection: &[bool]) -> usize {
        self.kills
            .iter()
            .filter(|row| row.iter().zip(selection).any(|(&k, &s)| k && s))
            .count()
    }
}

/// Fraction of the mutants the full suite kills that `selection` also kills.
/// A suite that kills nothing scores 0 for every selection.
pub fn mutation_score(k: &KillMatrix, selection: &[bool]) -> Result<f64> {
    if let Some(row) = k.kills.first() {
        if row.len() != selection.len() {
            return Err(Error::mismatch("selection", row.len(), selection.len()));
        }
    }
    let killable = k.kills.iter().filter(|row| row.iter().any(|&x| x)).count();
    if killable == 0 {
        return Ok(0.0);
    }
    Ok(k.killed_by(selection) as f64 / killable as f64)
}

/// Selected execution time over the full suite's execution time.
pub fn normalized_tet(times: &[f64], selection: &[bool]) -> Result<f64> {
    if times.len() != selection.len() {
        return Err(Error::mismatch("selection", times.len(), selection.len()));
    }
    let total: f64 = times.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::InvalidInput(
            "total execution time must be positive".into(),
        ));
    }
    let selected: f64 = times
        .iter()
        .zip(selection)
        .filter(|(_, &s)| s)
        .map(|(t, _)| t)
        .sum();
    Ok(selected / total)
}

/// `(#{x > y} − #{x < y}) / (|a| |b|)` over all pairs.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "Cliff's delta needs two non-empty lists".into(),
        ));
    }
    let mut sorted_b = b.to_vec();
    sorted_b.sort_by(f64::total_cmp);
    let mut sum: i64 = 0;
    for &x in a {
        let below = sorted_b.partition_point(|&y| y < x);
        let not_above = sorted_b.partition_point(|&y| y <= x);
        let above = sorted_b.len() - not_above;
        sum += below as i64 - above as i64;
    }
    Ok(sum as f64 / (a.len() * b.len()) as f64)
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedGroup {
    pub name: String,
    pub observations: Vec<f64>,
    pub median: f64,
    /// 1 is best.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedGroups {
    /// Sorted by descending median, so ranks are non-decreasing.
    pub groups: Vec<RankedGroup>,
}

impl RankedGroups {
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.groups.iter().find(|g| g.name == name).map(|g| g.rank)
    }

    pub fn n_ranks(&self) -> usize {
        self.groups.iter().map(|g| g.rank).max().unwrap_or(0)
    }
}

/// `|l1|/|l| (mean(l1) − mean(l))² + |l2|/|l| (mean(l2) − mean(l))²`.
pub fn expected_delta(left: &[f64], right: &[f64]) -> f64 {
    let n = (left.len() + right.len()) as f64;
    let all_mean = (left.iter().sum::<f64>() + right.iter().sum::<f64>()) / n;
    let term = |l: &[f64]| l.len() as f64 / n * (mean(l) - all_mean).powi(2);
    term(left) + term(right)
}

/// The cut `c` (groups `..c` | `c..`) maximizing `E(Δ)` over the pooled
/// observations, first on ties. `None` for fewer than two groups.
pub fn best_split(groups: &[&[f64]]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for cut in 1..groups.len() {
        let left: Vec<f64> = groups[..cut]
            .iter()
            .flat_map(|g| g.iter().copied())
            .collect();
        let right: Vec<f64> = groups[cut..]
            .iter()
            .flat_map(|g| g.iter().copied())
            .collect();
        let e = expected_delta(&left, &right);
        if best.is_none_or(|(_, b)| e > b) {
            best = Some((cut, e));
        }
    }
    best
}

/// Scott-Knott clustering of named observation lists, larger being better.
///
/// Groups are sorted by median, split where `E(Δ)` is largest, and the split
/// is kept only when the pooled halves differ by |Cliff's delta| ≥
/// `small_effect`. Accepted halves are split recursively.
pub fn scott_knott(groups: &[(String, Vec<f64>)], small_effect: f64) -> Result<RankedGroups> {
    if groups.is_empty() {
        return Err(Error::InvalidInput(
            "Scott-Knott needs at least one group".into(),
        ));
    }
    if let Some((name, _)) = groups.iter().find(|(_, obs)| obs.is_empty()) {
        return Err(Error::InvalidInput(format!(
            "group `{name}` has no observations"
        )));
    }
    let mut sorted: Vec<RankedGroup> = groups
        .iter()
        .map(|(name, obs)| RankedGroup {
            name: name.clone(),
            median: median(obs).unwrap_or(f64::NAN),
            observations: obs.clone(),
            rank: 0,
        })
        .collect();
    sorted.sort_by(|a, b| b.median.partial_cmp(&a.median).unwrap_or(Ordering::Equal));

    let mut next_rank = 1;
    divide(&mut sorted, small_effect, &mut next_rank)?;
    Ok(RankedGroups { groups: sorted })
}

fn divide(groups: &mut [RankedGroup], small_effect: f64, next_rank: &mut usize) -> Result<()> {
    let lists: Vec<&[f64]> = groups.iter().map(|g| g.observations.as_slice()).collect();
    if let Some((cut, _)) = best_split(&lists) {
        let left: Vec<f64> = lists[..cut]
            .iter()
            .flat_map(|g| g.iter().copied())
            .collect();
        let right: Vec<f64> = lists[cut..]
            .iter()
            .flat_map(|g| g.iter().copied())
            .collect();
        if cliffs_delta(&left, &right)?.abs() >= small_effect {
            let (l, r) = groups.split_at_mut(cut);
            divide(l, small_effect, next_rank)?;
            divide(r, small_effect, next_rank)?;
            return Ok(());
        }
    }
    for g in groups.iter_mut() {
        g.rank = *next_rank;
    }
    *next_rank += 1;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    /// Normalized test execution time, lower is better.
    Tet,
    /// Mutation score, higher is better.
    Ms,
}

impl Measure {
    pub const ALL: [Measure; 2] = [Measure::Tet, Measure::Ms];

    pub fn label(self) -> &'static str {
        match self {
            Measure::Tet => "TET-",
            Measure::Ms => "MS+",
        }
    }

    /// Maps a raw value so that larger is better.
    pub fn oriented(self, value: f64) -> f64 {
        match self {
            Measure::Tet => -value,
            Measure::Ms => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankRow {
    pub measure: Measure,
    pub algorithm: String,
    pub rank: usize,
    /// Median of the raw (not direction-adjusted) observations.
    pub median: f64,
}

/// Ranks algorithms on one measure; `observations` are raw values.
pub fn rank_measure(measure: Measure, observations: &[(String, Vec<f64>)]) -> Result<Vec<RankRow>> {
    let oriented: Vec<(String, Vec<f64>)> = observations
        .iter()
        .map(|(name, obs)| {
            (
                name.clone(),
                obs.iter().map(|&v| measure.oriented(v)).collect(),
            )
        })
        .collect();
    let ranked = scott_knott(&oriented, SMALL_EFFECT)?;
    Ok(ranked
        .groups
        .into_iter()
        .map(|g| RankRow {
            measure,
            algorithm: g.name,
            rank: g.rank,
            median: measure.oriented(g.median),
        })
        .collect())
}

pub fn write_rank_table<W: Write>(out: W, rows: &[RankRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["measure", "algorithm", "rank", "median"])?;
    for r in rows {
        w.write_record([
            r.measure.label().to_string(),
            r.algorithm.clone(),
            r.rank.to_string(),
            r.median.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontSummary {
    pub median_tet: f64,
    pub median_ms: f64,
}

/// Fills `tet` and `ms` on every member and returns the front medians.
pub fn evaluate_front(
    front: &mut [Selection],
    k: &KillMatrix,
    times: &[f64],
) -> Result<FrontSummary> {
    if front.is_empty() {
        return Err(Error::InvalidInput("cannot evaluate an empty front".into()));
    }
    for s in front.iter_mut() {
        s.tet = Some(normalized_tet(times, &s.include)?);
        s.ms = Some(mutation_score(k, &s.include)?);
    }
    let tets: Vec<f64> = front.iter().filter_map(|s| s.tet).collect();
    let mss: Vec<f64> = front.iter().filter_map(|s| s.ms).collect();
    Ok(FrontSummary {
        median_tet: median(&tets).unwrap_or(f64::NAN),
        median_ms: median(&mss).unwrap_or(f64::NAN),
    })
}
