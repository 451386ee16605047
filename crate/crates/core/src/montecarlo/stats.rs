use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::seed::derive_seed;

/// Default two-sided confidence of every binomial interval.
pub const CONFIDENCE: f64 = 0.95;

/// Exact (Clopper–Pearson) two-sided interval for `successes` out of `trials`.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials, "invalid binomial counts");
    let alpha = 1.0 - confidence;
    let (k, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        beta_quantile(k, n - k + 1.0, alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        beta_quantile(k + 1.0, n - k, 1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta function.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    #[serde(rename = "P_k")]
    Pk,
    #[serde(rename = "Q_k")]
    Qk,
    Zeta,
    NuModulus,
    Wegner,
    DisjointTail,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergySpec {
    Point { energy: f64 },
    Interval { lo: f64, hi: f64 },
    Grid { lo: f64, hi: f64, step: f64 },
}

/// A binomial frequency with its exact interval and, where one exists, the closed-form bound
/// it is compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: Quantity,
    pub point_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub successes: u64,
    pub trials: u64,
    pub seed_base: u64,
    pub scale: u64,
    pub energy: EnergySpec,
    pub bound: Option<f64>,
    pub flags: Vec<String>,
}

impl EstimateReport {
    pub fn from_counts(
        quantity: Quantity,
        successes: u64,
        trials: u64,
        seed_base: u64,
        scale: u64,
        energy: EnergySpec,
    ) -> Self {
        let (ci_low, ci_high) = clopper_pearson(successes, trials, CONFIDENCE);
        EstimateReport {
            quantity,
            point_estimate: successes as f64 / trials as f64,
            ci_low,
            ci_high,
            confidence: CONFIDENCE,
            successes,
            trials,
            seed_base,
            scale,
            energy,
            bound: None,
            flags: Vec::new(),
        }
    }

    /// Multiply estimate and interval by `factor` (the interval stays a valid interval for the
    /// scaled quantity).
    pub fn scaled(mut self, factor: f64) -> Self {
        self.point_estimate *= factor;
        self.ci_low *= factor;
        self.ci_high *= factor;
        self
    }

    pub fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    /// Interval at another confidence level from the same counts.
    pub fn interval_at(&self, confidence: f64) -> (f64, f64) {
        clopper_pearson(self.successes, self.trials, confidence)
    }
}

/// Run `f(trial_index, seed)` for every trial, in parallel, returning results in trial order.
pub fn run_trials<T, F>(trials: u64, seed_base: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    (0..trials).into_par_iter().map(|i| f(i, derive_seed(seed_base, i))).collect()
}

/// Uniform grid lo, lo + h, ..., up to hi (inclusive within rounding), built by integer multiples.
pub fn energy_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && hi >= lo, "invalid grid");
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}
