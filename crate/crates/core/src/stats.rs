//! Trial seeding, parallel failure counting and Wilson score intervals.
//!
//! Every trial draws from its own ChaCha stream selected by the trial index,
//! so a batch gives identical counts no matter how rayon schedules it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Random stream for one trial, derived from `(master_seed, trial)`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials on the ambient rayon pool and returns how
/// many reported failure.
pub fn count_failures<F>(trials: u64, master_seed: u64, trial: F) -> u64
where
    F: Fn(&mut ChaCha8Rng, u64) -> bool + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            u64::from(trial(&mut rng, i))
        })
        .sum()
}

/// A Monte Carlo error-rate estimate with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub failures: u64,
}

impl ErrorEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        Self::with_z(failures, trials, Z_95)
    }

    pub fn with_z(failures: u64, trials: u64, z: f64) -> Self {
        assert!(trials > 0, "an estimate needs at least one trial");
        assert!(failures <= trials);
        let (ci_low, ci_high) = wilson_interval(failures, trials, z);
        let point = failures as f64 / trials as f64;
        Self {
            point,
            ci_low: ci_low.min(point),
            ci_high: ci_high.max(point),
            trials,
            failures,
        }
    }

    /// Binomial standard deviation of the point estimate under rate `rate`.
    pub fn sigma_at(&self, rate: f64) -> f64 {
        (rate * (1.0 - rate) / self.trials as f64).sqrt()
    }
}

pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}
