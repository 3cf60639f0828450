//! Synthetic simulation-test datasets.
//!
//! Baseline outputs are low-amplitude random walks around a random level.
//! Seeded injections plant the anti-patterns the signal metrics look for, and
//! each mutant is killed by a random subset of the tests carrying the
//! pattern the mutant is associated with.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Provenance, TestCase};
use crate::error::{Error, Result};
use crate::evaluation::KillMatrix;
use crate::rng::{stream_rng, streams};
use crate::signal_metrics::SignalTrace;

/// Standard deviation of one random-walk step of the baseline.
pub const BASELINE_NOISE: f64 = 0.01;

const MIN_EXEC_TIME: f64 = 0.5;
const MAX_EXEC_TIME: f64 = 10.0;
/// Chance that a test carrying the right pattern kills a given mutant.
const KILL_PROBABILITY: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AntiPattern {
    /// Short pulse: discontinuity.
    Pulse,
    /// Sustained alternation: instability.
    Oscillation,
    /// Exponential tail: growth to infinity.
    Blowup,
}

impl AntiPattern {
    pub const ALL: [AntiPattern; 3] = [
        AntiPattern::Pulse,
        AntiPattern::Oscillation,
        AntiPattern::Blowup,
    ];

    /// Adds a randomly placed instance of the pattern to `samples`.
    /// Needs at least 8 samples.
    pub fn inject(self, samples: &mut [f64], rng: &mut impl Rng) {
        let len = samples.len();
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        match self {
            AntiPattern::Pulse => {
                let width = rng.gen_range(1..=2);
                let pos = rng.gen_range(3..=len - 4 - width + 1);
                let amplitude = sign * rng.gen_range(1.0..5.0);
                inject_pulse(samples, pos, width, amplitude);
            }
            AntiPattern::Oscillation => {
                let window = rng.gen_range(len / 5..=len / 2).max(2);
                let start = rng.gen_range(0..=len - window);
                let amplitude = rng.gen_range(0.5..2.0);
                for (i, s) in samples[start..start + window].iter_mut().enumerate() {
                    *s += if i % 2 == 0 { amplitude } else { -amplitude };
                }
            }
            AntiPattern::Blowup => {
                let onset = rng.gen_range(len / 2..=3 * len / 4);
                let peak = rng.gen_range(5.0..20.0_f64);
                let rate = (1.0 + peak).ln() / (len - 1 - onset) as f64;
                for (i, s) in samples.iter_mut().enumerate().skip(onset) {
                    *s += sign * ((rate * (i - onset) as f64).exp() - 1.0);
                }
            }
        }
    }
}

/// Adds `amplitude` to `width` consecutive samples starting at `pos`.
pub fn inject_pulse(samples: &mut [f64], pos: usize, width: usize, amplitude: f64) {
    for s in &mut samples[pos..pos + width] {
        *s += amplitude;
    }
}

/// Random walk with `N(0, noise²)` steps around a level drawn from `[-1, 1]`.
pub fn baseline_signal(len: usize, noise: f64, rng: &mut impl Rng) -> Vec<f64> {
    let step = Normal::new(0.0, noise).expect("noise is finite and non-negative");
    let mut value = rng.gen_range(-1.0..1.0);
    (0..len)
        .map(|_| {
            value += step.sample(rng);
            value
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiPatternRates {
    pub pulse: f64,
    pub oscillation: f64,
    pub blowup: f64,
}

impl AntiPatternRates {
    pub fn uniform(rate: f64) -> Self {
        Self {
            pulse: rate,
            oscillation: rate,
            blowup: rate,
        }
    }

    fn rate(&self, p: AntiPattern) -> f64 {
        match p {
            AntiPattern::Pulse => self.pulse,
            AntiPattern::Oscillation => self.oscillation,
            AntiPattern::Blowup => self.blowup,
        }
    }
}

impl Default for AntiPatternRates {
    fn default() -> Self {
        Self::uniform(0.15)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_tests: usize,
    pub n_signals: usize,
    pub n_mutants: usize,
    pub trace_len: usize,
    pub dt: f64,
    pub rates: AntiPatternRates,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// 150 tests, 7 output signals, 6 mutants, 5 s at 0.05 s.
    fn default() -> Self {
        Self {
            n_tests: 150,
            n_signals: 7,
            n_mutants: 6,
            trace_len: 101,
            dt: 0.05,
            rates: AntiPatternRates::default(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_tests < super::MIN_TESTS {
            return Err(Error::InvalidConfig(format!(
                "n_tests must be greater than {}, got {}",
                super::MIN_TESTS - 1,
                self.n_tests
            )));
        }
        if self.n_signals == 0 {
            return Err(Error::InvalidConfig("n_signals must be positive".into()));
        }
        if self.trace_len < 8 {
            return Err(Error::InvalidConfig(format!(
                "trace_len must be at least 8, got {}",
                self.trace_len
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        for p in AntiPattern::ALL {
            let r = self.rates.rate(p);
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!(
                    "{p:?} rate must be in [0, 1], got {r}"
                )));
            }
        }
        Ok(())
    }
}

pub fn synth_dataset(c: &SynthConfig) -> Result<Dataset> {
    c.validate()?;
    let mut rng = stream_rng(c.seed, streams::SYNTH);
    let (ln_lo, ln_hi) = (MIN_EXEC_TIME.ln(), MAX_EXEC_TIME.ln());

    let mut tests = Vec::with_capacity(c.n_tests);
    let mut carried: Vec<Vec<AntiPattern>> = Vec::with_capacity(c.n_tests);
    for k in 0..c.n_tests {
        let execution_time = rng.gen_range(ln_lo..ln_hi).exp();
        let mut signals: Vec<Vec<f64>> = (0..c.n_signals)
            .map(|_| baseline_signal(c.trace_len, BASELINE_NOISE, &mut rng))
            .collect();
        let mut patterns = Vec::new();
        for p in AntiPattern::ALL {
            if rng.gen_bool(c.rates.rate(p)) {
                let s = rng.gen_range(0..c.n_signals);
                p.inject(&mut signals[s], &mut rng);
                patterns.push(p);
            }
        }
        let outputs = signals
            .into_iter()
            .map(|s| SignalTrace::new(s, c.dt))
            .collect::<Result<Vec<_>>>()?;
        tests.push(TestCase {
            id: format!("t{k:04}"),
            execution_time,
            outputs,
        });
        carried.push(patterns);
    }

    let kills = plant_kills(c, &carried, &mut rng);
    let kill_matrix = KillMatrix::new(kills, c.n_tests)?;
    for w in kill_matrix.warnings() {
        log::warn!("synthetic kill matrix: {w}");
    }
    Dataset::new(
        format!("synthetic-{}", c.seed),
        c.dt,
        tests,
        kill_matrix,
        Provenance::Synthetic { config: c.clone() },
    )
}

/// Mutant `j` is tied to pattern `j mod 3` and killed by a random subset of
/// the tests carrying it (falling back to any anomalous test). Every mutant
/// gets at least one killer and never all `n` tests, unless no test carries
/// any pattern, in which case it stays unkilled.
fn plant_kills(
    c: &SynthConfig,
    carried: &[Vec<AntiPattern>],
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<bool>> {
    let anomalous: Vec<usize> = (0..c.n_tests).filter(|&k| !carried[k].is_empty()).collect();
    (0..c.n_mutants)
        .map(|j| {
            let pattern = AntiPattern::ALL[j % AntiPattern::ALL.len()];
            let mut carriers: Vec<usize> = (0..c.n_tests)
                .filter(|&k| carried[k].contains(&pattern))
                .collect();
            if carriers.is_empty() {
                carriers = anomalous.clone();
            }
            let mut row = vec![false; c.n_tests];
            if carriers.is_empty() {
                return row;
            }
            for &k in &carriers {
                row[k] = rng.gen_bool(KILL_PROBABILITY);
            }
            if !row.iter().any(|&x| x) {
                row[*carriers.choose(rng).expect("non-empty")] = true;
            }
            if row.iter().all(|&x| x) {
                let spare = rng.gen_range(0..c.n_tests);
                row[spare] = false;
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_metrics::discontinuity_score;

    #[test]
    fn default_shape() {
        let d = synth_dataset(&SynthConfig {
            seed: 1,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_eq!(d.n_tests(), 150);
        assert_eq!(d.n_signals(), 7);
        assert_eq!(d.kill_matrix().n_mutants(), 6);
        assert!(d.kill_matrix().warnings().is_empty());
        for row in d.kill_matrix().rows() {
            let killers = row.iter().filter(|&&k| k).count();
            assert!(killers >= 1 && killers < d.n_tests());
        }
        let times = d.execution_times();
        assert!(times
            .iter()
            .all(|&t| (MIN_EXEC_TIME..=MAX_EXEC_TIME).contains(&t)));
    }

    #[test]
    fn no_injection_means_no_kills() {
        let d = synth_dataset(&SynthConfig {
            n_tests: 20,
            rates: AntiPatternRates::uniform(0.0),
            seed: 2,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_eq!(d.kill_matrix().warnings().len(), 6);
        assert!(d.kill_matrix().rows().iter().flatten().all(|&k| !k));
        let disc = d.per_test_scores().unwrap();
        let raw = d
            .raw_scores(crate::signal_metrics::MetricKind::Discontinuity)
            .unwrap();
        // Baseline noise only: change rates stay within a few noise steps per dt.
        let max_raw = raw
            .values()
            .iter()
            .flatten()
            .fold(0.0_f64, |m, &v| m.max(v));
        assert!(max_raw < 10.0 * BASELINE_NOISE / d.dt(), "{max_raw}");
        assert_eq!(disc.discontinuity.len(), 20);
    }

    #[test]
    fn deterministic_under_seed() {
        let c = SynthConfig {
            n_tests: 10,
            seed: 17,
            ..SynthConfig::default()
        };
        assert_eq!(synth_dataset(&c).unwrap(), synth_dataset(&c).unwrap());
        let other = SynthConfig {
            seed: 18,
            ..c.clone()
        };
        assert_ne!(
            synth_dataset(&c).unwrap().tests()[0].outputs,
            synth_dataset(&other).unwrap().tests()[0].outputs
        );
    }

    #[test]
    fn rejects_invalid_config() {
        let bad = [
            SynthConfig {
                n_tests: 5,
                ..SynthConfig::default()
            },
            SynthConfig {
                trace_len: 7,
                ..SynthConfig::default()
            },
            SynthConfig {
                n_signals: 0,
                ..SynthConfig::default()
            },
            SynthConfig {
                rates: AntiPatternRates::uniform(1.5),
                ..SynthConfig::default()
            },
        ];
        for c in bad {
            assert!(matches!(synth_dataset(&c), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn planted_pulse_raises_discontinuity() {
        for seed in 0..100 {
            let mut rng = stream_rng(seed, 0);
            let base = baseline_signal(101, BASELINE_NOISE, &mut rng);
            let mut pulsed = base.clone();
            let pos = rng.gen_range(3..95);
            let width = rng.gen_range(1..=2);
            inject_pulse(&mut pulsed, pos, width, 10.0 * BASELINE_NOISE);
            let twin = SignalTrace::new(base, 0.05).unwrap();
            let planted = SignalTrace::new(pulsed, 0.05).unwrap();
            assert!(
                discontinuity_score(&planted) > discontinuity_score(&twin),
                "seed {seed}"
            );
        }
    }
}
