//! Signal-shape effectiveness scores.
//!
//! Each output signal of a simulated test case is scored for four shapes that
//! indicate faulty behaviour of a feedback-controlled model: short pulses
//! (discontinuity), rapid oscillation (instability), unbounded growth
//! (infinity) and output range (min/max difference). Per-signal raw scores are
//! then folded into one normalized score per test case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest step offset examined by [`discontinuity_score`].
pub const MAX_DISCONTINUITY_OFFSET: usize = 3;

/// One uniformly sampled output signal of one test case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalTrace {
    samples: Vec<f64>,
    dt: f64,
}

impl SignalTrace {
    pub fn new(samples: Vec<f64>, dt: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTrace("trace has no samples".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTrace(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidTrace(format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(Self { samples, dt })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of simulation steps `k`; the trace holds `k + 1` samples.
    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Discontinuity,
    Instability,
    Infinity,
    MinMax,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Discontinuity,
        MetricKind::Instability,
        MetricKind::Infinity,
        MetricKind::MinMax,
    ];

    pub fn score(self, trace: &SignalTrace) -> f64 {
        match self {
            MetricKind::Discontinuity => discontinuity_score(trace),
            MetricKind::Instability => instability_score(trace),
            MetricKind::Infinity => infinity_score(trace),
            MetricKind::MinMax => minmax_score(trace),
        }
    }
}

/// Largest `min(left rate, right rate)` over step offsets 1..=3 and every
/// interior sample. Both rates divide by the trace time step regardless of the
/// offset. Traces too short to have an interior sample score 0.
pub fn discontinuity_score(trace: &SignalTrace) -> f64 {
    let sig = trace.samples();
    let k = trace.steps();
    let mut best = 0.0_f64;
    for offset in 1..=MAX_DISCONTINUITY_OFFSET {
        if 2 * offset > k {
            break;
        }
        for i in offset..=k - offset {
            let left = (sig[i] - sig[i - offset]).abs() / trace.dt;
            let right = (sig[i + offset] - sig[i]).abs() / trace.dt;
            best = best.max(left.min(right));
        }
    }
    best
}

/// Total variation: sum of absolute consecutive differences.
pub fn instability_score(trace: &SignalTrace) -> f64 {
    trace
        .samples()
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .sum()
}

/// Largest absolute sample.
pub fn infinity_score(trace: &SignalTrace) -> f64 {
    trace.samples().iter().fold(0.0_f64, |m, s| m.max(s.abs()))
}

/// Range of the signal, `|max - min|`.
pub fn minmax_score(trace: &SignalTrace) -> f64 {
    let (lo, hi) = trace
        .samples()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
            (lo.min(s), hi.max(s))
        });
    (hi - lo).abs()
}

/// Raw per-signal scores of one metric, indexed `[test case][output signal]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawScoreTable {
    kind: MetricKind,
    values: Vec<Vec<f64>>,
}

impl RawScoreTable {
    pub fn new(kind: MetricKind, values: Vec<Vec<f64>>) -> Result<Self> {
        let signals = values.first().map_or(0, Vec::len);
        if signals == 0 {
            return Err(Error::InvalidInput(
                "raw score table needs at least one test case and one signal".into(),
            ));
        }
        for (t, row) in values.iter().enumerate() {
            if row.len() != signals {
                return Err(Error::InvalidInput(format!(
                    "raw score table is ragged: test {t} has {} signals, expected {signals}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "raw score for test {t} is not a finite non-negative value ({v})"
                )));
            }
        }
        Ok(Self { kind, values })
    }

    /// Scores every signal of every test case with `kind`.
    pub fn from_traces<'a, I>(kind: MetricKind, tests: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [SignalTrace]>,
    {
        let values = tests
            .into_iter()
            .map(|signals| signals.iter().map(|s| kind.score(s)).collect())
            .collect();
        Self::new(kind, values)
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn n_tests(&self) -> usize {
        self.values.len()
    }

    pub fn n_signals(&self) -> usize {
        self.values[0].len()
    }
}

/// Per-test score `sum_i raw[k][i] / (G * N)` where `G` is the largest raw
/// value anywhere in the table. An all-zero table yields all zeros.
pub fn normalize_per_test(raw: &RawScoreTable) -> Vec<f64> {
    let global_max = raw.values.iter().flatten().fold(0.0_f64, |m, &v| m.max(v));
    if global_max == 0.0 {
        return vec![0.0; raw.n_tests()];
    }
    let denom = global_max * raw.n_signals() as f64;
    raw.values
        .iter()
        .map(|row| (row.iter().sum::<f64>() / denom).min(1.0))
        .collect()
}
