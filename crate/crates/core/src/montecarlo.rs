//! Seeded Monte Carlo estimation of the decoding probability.
//!
//! Results are reproducible bit for bit given `(seed, workers)`. The sampling
//! contract, which must not change without a version bump:
//!
//! * the generator is ChaCha with 8 rounds, keyed by `seed_from_u64(seed)`;
//!   worker `w` uses stream `w` of the same key;
//! * one trial draws one uniform per edge, in edge-id order, as
//!   `(next_u64() >> 11) as f64 * 2^-53`, a value in `[0, 1)`;
//! * the edge survives exactly when `draw < p`;
//! * trials are split into contiguous chunks of `ceil(trials / workers)`,
//!   worker `w` running trials `w*chunk..min((w+1)*chunk, trials)`, and the
//!   per-worker success counts are summed.
//!
//! Changing `workers` re-partitions the streams, so it selects a different
//! (equally valid) experiment; repeating a run with both `seed` and `workers`
//! fixed reproduces the exact success count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::multigraph::{MultiGraph, Scratch};
use crate::Prob;

#[derive(Debug, Error, PartialEq)]
pub enum MonteCarloError {
    #[error("survival probability must lie in [0, 1], got {p}")]
    ProbabilityRange { p: f64 },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("at least one worker is required")]
    NoWorkers,
    #[error("exact probability must lie strictly inside (0, 1), got {exact}")]
    ExactRange { exact: f64 },
}

/// Parameters of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialConfig {
    pub p: Prob,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl TrialConfig {
    pub fn new(p: Prob, trials: u64, seed: u64) -> Result<Self, MonteCarloError> {
        Self::with_workers(p, trials, seed, 1)
    }

    pub fn with_workers(
        p: Prob,
        trials: u64,
        seed: u64,
        workers: usize,
    ) -> Result<Self, MonteCarloError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(MonteCarloError::ProbabilityRange { p });
        }
        if trials == 0 {
            return Err(MonteCarloError::NoTrials);
        }
        if workers == 0 {
            return Err(MonteCarloError::NoWorkers);
        }
        Ok(TrialConfig {
            p,
            trials,
            seed,
            workers,
        })
    }
}

/// Outcome of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub successes: u64,
    pub trials: u64,
    pub estimate: Prob,
    /// Binomial standard error `sqrt(est * (1 - est) / trials)`.
    pub std_error: Prob,
    pub p: Prob,
    pub seed: u64,
    pub workers: usize,
}

impl MonteCarloResult {
    /// Standardized deviation of the estimate from a known exact value.
    /// Degenerate runs (zero standard error) map to `0` on agreement and
    /// `+/- infinity` otherwise.
    pub fn z_score(&self, exact: Prob) -> Result<Prob, MonteCarloError> {
        if !(exact > 0.0 && exact < 1.0) {
            return Err(MonteCarloError::ExactRange { exact });
        }
        let diff = self.estimate - exact;
        if self.std_error == 0.0 {
            return Ok(if diff == 0.0 {
                0.0
            } else if diff > 0.0 {
                Prob::INFINITY
            } else {
                Prob::NEG_INFINITY
            });
        }
        Ok(diff / self.std_error)
    }
}

const SCALE: f64 = 1.0 / (1u64 << 53) as f64;

fn run_chunk(g: &MultiGraph, p: Prob, seed: u64, stream: u64, trials: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let m = g.edge_count();
    let mut keep = vec![false; m];
    let mut scratch = Scratch::new();
    let mut successes = 0u64;
    for _ in 0..trials {
        for slot in keep.iter_mut() {
            // Invariant: one draw per edge per trial, consumed in edge-id
            // order, so the stream position is a pure function of the trial
            // index.
            let draw = (rng.next_u64() >> 11) as f64 * SCALE;
            *slot = draw < p;
        }
        if g.decodable_if(&mut scratch, |id| keep[id]) {
            successes += 1;
        }
    }
    successes
}

/// Estimates the probability that independent edge erasures (each edge kept
/// with probability `p`) leave the graph decodable.
pub fn simulate(g: &MultiGraph, config: TrialConfig) -> MonteCarloResult {
    let chunk = config.trials.div_ceil(config.workers as u64);
    let successes: u64 = if config.workers == 1 {
        run_chunk(g, config.p, config.seed, 0, config.trials)
    } else {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..config.workers as u64 {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(config.trials);
                if lo >= hi {
                    break;
                }
                handles
                    .push(scope.spawn(move || run_chunk(g, config.p, config.seed, w, hi - lo)));
            }
            handles.into_iter().map(|h| h.join().unwrap()).sum()
        })
    };
    let estimate = successes as Prob / config.trials as Prob;
    let std_error = (estimate * (1.0 - estimate) / config.trials as Prob).sqrt();
    MonteCarloResult {
        successes,
        trials: config.trials,
        estimate,
        std_error,
        p: config.p,
        seed: config.seed,
        workers: config.workers,
    }
}
