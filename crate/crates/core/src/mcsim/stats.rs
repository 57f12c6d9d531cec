use serde::{Deserialize, Serialize};

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Pairwise merge of two disjoint sample sets.
    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// One simulated distortion next to its analytic value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub empirical: f64,
    pub stderr: f64,
    pub closed_form: f64,
}

impl Estimate {
    pub(crate) fn from_stats(stats: &RunningStats, closed_form: f64) -> Self {
        Self {
            empirical: stats.mean(),
            stderr: stats.stderr(),
            closed_form,
        }
    }

    /// `|empirical - closed_form| <= max(rel_tol * closed_form, z * stderr)`.
    pub fn agrees(&self, z: f64, rel_tol: f64) -> bool {
        (self.empirical - self.closed_form).abs()
            <= (rel_tol * self.closed_form.abs()).max(z * self.stderr)
    }
}
