use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::stats::RunningStats;
use crate::model::{ProblemSpec, Theorem3Params};

/// How one source component travels through the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stage {
    /// Coarse common description at distortion `coarse`; the quantization
    /// error goes uncoded at `power`; the strong user refines to `fine`
    /// from the side information.
    QuantizedError {
        var: f64,
        coarse: f64,
        power: f64,
        fine: f64,
    },
    /// Scaled source at power `analog`, next to an undecoded layer of power
    /// `interference`.
    Uncoded {
        var: f64,
        analog: f64,
        interference: f64,
    },
    /// Digital only: common description at `coarse`, strong refinement to `fine`.
    Digital { var: f64, coarse: f64, fine: f64 },
}

impl Stage {
    fn tracks_side_info(&self) -> bool {
        matches!(self, Stage::QuantizedError { .. })
    }
}

pub(crate) fn plan_from_params(spec: &ProblemSpec, params: &Theorem3Params) -> Vec<Stage> {
    let var = spec.variances();
    (0..spec.components())
        .map(|k| {
            if k < params.l {
                Stage::QuantizedError {
                    var: var[k],
                    coarse: params.d_prime_at(k),
                    power: params.p[k],
                    fine: params.d[k],
                }
            } else if k < params.k_prime {
                let (pp, ppp) = (params.p_prime_at(k), params.p_dprime_at(k));
                Stage::Uncoded {
                    var: var[k],
                    analog: (pp - ppp).max(0.0),
                    interference: ppp,
                }
            } else {
                Stage::Digital {
                    var: var[k],
                    coarse: params.d_prime_at(k),
                    fine: params.d[k],
                }
            }
        })
        .collect()
}

/// Variance of an additive test-channel noise that, combined with a prior of
/// error variance `before`, leaves error variance `after`.
fn test_channel_noise(before: f64, after: f64) -> Option<f64> {
    let gain = 1.0 / after - 1.0 / before;
    (gain > 0.0 && gain.is_finite()).then(|| 1.0 / gain)
}

/// Combines a prior estimate (error variance `prior`) with the observation
/// `truth + noise` where the noise has variance `w`.
fn refine(truth: f64, estimate: f64, prior: f64, w: Option<f64>, rng: &mut ChaCha8Rng) -> f64 {
    match w {
        Some(w) => {
            let obs = truth + w.sqrt() * rng.sample::<f64, _>(StandardNormal);
            estimate + prior / (prior + w) * (obs - estimate)
        }
        None => estimate,
    }
}

/// Squared errors of one sample: `(strong, weak, strong side information)`.
fn draw(stage: &Stage, ns: f64, nw: f64, rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    match *stage {
        Stage::QuantizedError {
            var,
            coarse,
            power,
            fine,
        } => {
            let reconstruction = (var - coarse).max(0.0).sqrt() * normal();
            let err = coarse.sqrt() * normal();
            let s = reconstruction + err;
            let x = (power / coarse).sqrt() * err;
            let y_s = x + ns.sqrt() * normal();
            let y_w = x + nw.sqrt() * normal();
            let gain = |n: f64| (power * coarse).sqrt() / (power + n);
            let side = reconstruction + gain(ns) * y_s;
            let weak = reconstruction + gain(nw) * y_w;
            let side_mse = coarse / (1.0 + power / ns);
            let strong = refine(s, side, side_mse, test_channel_noise(side_mse, fine), rng);
            ((s - strong).powi(2), (s - weak).powi(2), (s - side).powi(2))
        }
        Stage::Uncoded {
            var,
            analog,
            interference,
        } => {
            let s = var.sqrt() * normal();
            let x = (analog / var).sqrt() * s + interference.sqrt() * normal();
            let y_s = x + ns.sqrt() * normal();
            let y_w = x + nw.sqrt() * normal();
            let gain = |n: f64| (analog * var).sqrt() / (analog + interference + n);
            let strong = gain(ns) * y_s;
            let weak = gain(nw) * y_w;
            ((s - strong).powi(2), (s - weak).powi(2), 0.0)
        }
        Stage::Digital { var, coarse, fine } => {
            let s = var.sqrt() * normal();
            let weak = refine(s, 0.0, var, test_channel_noise(var, coarse), rng);
            let strong = refine(s, weak, coarse, test_channel_noise(coarse, fine), rng);
            ((s - strong).powi(2), (s - weak).powi(2), 0.0)
        }
    }
}

/// Accumulated statistics of one batch or of the whole run.
#[derive(Debug, Clone, Default)]
pub(crate) struct Tally {
    pub strong: RunningStats,
    pub weak: RunningStats,
    pub per_strong: Vec<RunningStats>,
    pub per_weak: Vec<RunningStats>,
    pub per_side: Vec<RunningStats>,
}

impl Tally {
    fn new(k: usize) -> Self {
        Self {
            per_strong: vec![RunningStats::default(); k],
            per_weak: vec![RunningStats::default(); k],
            per_side: vec![RunningStats::default(); k],
            ..Self::default()
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.strong.merge(&other.strong);
        self.weak.merge(&other.weak);
        for (a, b) in self.per_strong.iter_mut().zip(&other.per_strong) {
            a.merge(b);
        }
        for (a, b) in self.per_weak.iter_mut().zip(&other.per_weak) {
            a.merge(b);
        }
        for (a, b) in self.per_side.iter_mut().zip(&other.per_side) {
            a.merge(b);
        }
    }
}

/// Generator for `(seed, scheme, component)`, positioned at `batch`.
fn component_rng(seed: u64, scheme: u64, component: u64, batch: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&scheme.to_le_bytes());
    key[16..24].copy_from_slice(&component.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(batch);
    rng
}

fn run_batch(
    plan: &[Stage],
    ns: f64,
    nw: f64,
    seed: u64,
    scheme: u64,
    batch: u64,
    size: usize,
) -> Tally {
    let k = plan.len();
    let mut strong_sum = vec![0.0; size];
    let mut weak_sum = vec![0.0; size];
    let mut tally = Tally::new(k);
    for (idx, stage) in plan.iter().enumerate() {
        let mut rng = component_rng(seed, scheme, idx as u64, batch);
        for i in 0..size {
            let (es, ew, side) = draw(stage, ns, nw, &mut rng);
            strong_sum[i] += es;
            weak_sum[i] += ew;
            tally.per_strong[idx].push(es);
            tally.per_weak[idx].push(ew);
            if stage.tracks_side_info() {
                tally.per_side[idx].push(side);
            }
        }
    }
    for i in 0..size {
        tally.strong.push(strong_sum[i] / k as f64);
        tally.weak.push(weak_sum[i] / k as f64);
    }
    tally
}

/// Runs `n` samples in batches on the rayon pool and merges in batch order.
pub(crate) fn simulate(
    plan: &[Stage],
    ns: f64,
    nw: f64,
    n: usize,
    batch: usize,
    seed: u64,
    scheme: u64,
) -> Tally {
    let batches = n.div_ceil(batch);
    let parts: Vec<Tally> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let size = batch.min(n - b * batch);
            run_batch(plan, ns, nw, seed, scheme, b as u64, size)
        })
        .collect();
    let mut total = Tally::new(plan.len());
    for part in &parts {
        total.merge(part);
    }
    total
}
