//! Repeated selector runs, their evaluation, and rank aggregation.

use std::collections::BTreeMap;
use std::time::Instant;

use clap::ValueEnum;
use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;

use doless_core::data_io::{Dataset, ResultRow};
use doless_core::doless::{doless_run, DolessConfig};
use doless_core::evaluation::{evaluate_front, median, rank_measure, Measure, RankRow};
use doless_core::moea::{pairwise_nsga2, Evaluation, Nsga2Config};
use doless_core::{EffectivenessMatrix, Selection};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Doless,
    #[value(name = "nsga2-pairwise")]
    Nsga2Pairwise,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Doless => "doless",
            Algorithm::Nsga2Pairwise => "nsga2-pairwise",
        }
    }
}

/// Per-algorithm parameters; the seed fields are overwritten per repeat.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub doless: DolessConfig,
    pub nsga2: Nsga2Config,
}

/// Runs `algorithm` once and returns its front and the wall-clock seconds of
/// the selection call alone.
pub fn run_once(
    d: &Dataset,
    m: &EffectivenessMatrix,
    algorithm: Algorithm,
    settings: &Settings,
    seed: u64,
) -> Result<(Vec<Selection>, f64), CliError> {
    let start = Instant::now();
    let front = match algorithm {
        Algorithm::Doless => doless_run(
            m,
            &DolessConfig {
                seed,
                ..settings.doless.clone()
            },
        )?,
        Algorithm::Nsga2Pairwise => {
            let times = d.execution_times();
            let evaluation = Evaluation {
                kills: d.kill_matrix(),
                times: &times,
            };
            let config = Nsga2Config {
                seed,
                ..settings.nsga2.clone()
            };
            pairwise_nsga2(m, &config, Some(evaluation))?.front
        }
    };
    Ok((front, start.elapsed().as_secs_f64()))
}

/// Runs `repeats` repeats with seeds `seed + i` and returns one row per front
/// member, repeat by repeat.
pub fn run_repeats(
    d: &Dataset,
    algorithm: Algorithm,
    settings: &Settings,
    seed: u64,
    repeats: usize,
    parallel: bool,
) -> Result<Vec<ResultRow>, CliError> {
    if repeats == 0 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    let m = d.effectiveness_matrix()?;
    let times = d.execution_times();
    let one = |i: usize| -> Result<Vec<ResultRow>, CliError> {
        let (mut front, wallclock) =
            run_once(d, &m, algorithm, settings, seed.wrapping_add(i as u64))?;
        let summary = evaluate_front(&mut front, d.kill_matrix(), &times)?;
        debug!(
            "{} repeat {i}: {} members, median TET {:.3}, median MS {:.3}, {wallclock:.3}s",
            algorithm.name(),
            front.len(),
            summary.median_tet,
            summary.median_ms
        );
        Ok(front
            .iter()
            .map(|s| result_row(i, algorithm, s, wallclock))
            .collect())
    };
    let blocks: Vec<Vec<ResultRow>> = if parallel {
        (0..repeats)
            .into_par_iter()
            .map(one)
            .collect::<Result<_, _>>()?
    } else {
        (0..repeats).map(one).collect::<Result<_, _>>()?
    };
    Ok(blocks.concat())
}

fn result_row(repeat: usize, algorithm: Algorithm, s: &Selection, wallclock: f64) -> ResultRow {
    let o = s.objectives.0;
    ResultRow {
        repeat,
        algorithm: algorithm.name().to_string(),
        selection_bits: s.bits(),
        tet: s.tet.unwrap_or(f64::NAN),
        ms: s.ms.unwrap_or(f64::NAN),
        obj_time: o[0],
        obj_disc: o[1],
        obj_inf: o[2],
        obj_inst: o[3],
        obj_minmax: o[4],
        wallclock_s: wallclock,
    }
}

/// Sum of per-repeat wall-clock seconds.
pub fn total_wallclock(rows: &[ResultRow]) -> f64 {
    let per_repeat: BTreeMap<usize, f64> = rows.iter().map(|r| (r.repeat, r.wallclock_s)).collect();
    per_repeat.values().sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub repeats: usize,
    pub doless_total_s: f64,
    pub nsga2_total_s: f64,
    /// `nsga2_total_s / doless_total_s`.
    pub speedup: f64,
}

pub fn bench(
    d: &Dataset,
    settings: &Settings,
    seed: u64,
    repeats: usize,
) -> Result<BenchReport, CliError> {
    let doless = run_repeats(d, Algorithm::Doless, settings, seed, repeats, false)?;
    let nsga2 = run_repeats(d, Algorithm::Nsga2Pairwise, settings, seed, repeats, false)?;
    let (doless_total_s, nsga2_total_s) = (total_wallclock(&doless), total_wallclock(&nsga2));
    info!("doless {doless_total_s:.3}s, nsga2-pairwise {nsga2_total_s:.3}s");
    Ok(BenchReport {
        repeats,
        doless_total_s,
        nsga2_total_s,
        speedup: nsga2_total_s / doless_total_s,
    })
}

/// Front medians of one repeat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepeatSummary {
    pub algorithm: String,
    pub repeat: usize,
    pub front_size: usize,
    pub median_tet: f64,
    pub median_ms: f64,
}

/// Groups rows by algorithm and repeat, in first-seen algorithm order.
pub fn summarize(rows: &[ResultRow]) -> Vec<RepeatSummary> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<(usize, usize), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        let a = match order.iter().position(|&a| a == r.algorithm) {
            Some(a) => a,
            None => {
                order.push(&r.algorithm);
                order.len() - 1
            }
        };
        groups.entry((a, r.repeat)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((a, repeat), members)| {
            let tets: Vec<f64> = members.iter().map(|r| r.tet).collect();
            let mss: Vec<f64> = members.iter().map(|r| r.ms).collect();
            RepeatSummary {
                algorithm: order[a].to_string(),
                repeat,
                front_size: members.len(),
                median_tet: median(&tets).unwrap_or(f64::NAN),
                median_ms: median(&mss).unwrap_or(f64::NAN),
            }
        })
        .collect()
}

/// Ranks labelled result sets on TET and MS by Scott-Knott over per-repeat
/// front medians. A `None` label groups the rows by their algorithm column.
pub fn rank_results(inputs: &[(Option<String>, Vec<ResultRow>)]) -> Result<Vec<RankRow>, CliError> {
    let mut groups: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for (label, rows) in inputs {
        if rows.is_empty() {
            return Err(CliError::Usage("results file has no rows".into()));
        }
        for s in summarize(rows) {
            let name = label.clone().unwrap_or_else(|| s.algorithm.clone());
            let fresh = groups.last().is_none_or(|g| g.0 != name);
            if fresh {
                if groups.iter().any(|g| g.0 == name) {
                    return Err(CliError::Usage(format!(
                        "algorithm label `{name}` appears twice"
                    )));
                }
                groups.push((name, Vec::new(), Vec::new()));
            }
            let g = groups.last_mut().expect("group just pushed");
            g.1.push(s.median_tet);
            g.2.push(s.median_ms);
        }
    }
    let mut out = Vec::new();
    for measure in Measure::ALL {
        let observations: Vec<(String, Vec<f64>)> = groups
            .iter()
            .map(|(name, tet, ms)| {
                let values = match measure {
                    Measure::Tet => tet.clone(),
                    Measure::Ms => ms.clone(),
                };
                (name.clone(), values)
            })
            .collect();
        out.extend(rank_measure(measure, &observations)?);
    }
    Ok(out)
}
