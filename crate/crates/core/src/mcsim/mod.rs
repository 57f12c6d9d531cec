//! Monte-Carlo check of the analog stages and LMMSE estimators.
//!
//! Digital layers are idealized: a coarse description at distortion `D` is a
//! Gaussian test channel, and decoded codewords are stripped without error.
//! Wyner-Ziv and successive-refinement layers become extra Gaussian
//! observations whose noise brings the estimator to the target distortion.
//! Layers a receiver cannot decode act as independent Gaussian interference.

mod engine;
mod stats;

pub use stats::Estimate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BroadcastChannel, ProblemSpec, Scheme, Theorem3Params};
use crate::schemes::{
    strong_user_optimal, theorem1_params, theorem2_params, theorem3_evaluate, weak_user_optimal,
};
use engine::{plan_from_params, simulate, Stage, Tally};

/// Smallest accepted sample count.
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Samples per batch; each batch owns an independent random stream.
    pub batch: usize,
    /// Number of standard errors allowed.
    pub z: f64,
    /// Relative tolerance allowed.
    pub rel_tol: f64,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            batch: 1 << 16,
            z: 4.0,
            rel_tol: 0.01,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                self.samples
            )));
        }
        if self.batch == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        Ok(())
    }
}

/// Per-component results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub index: usize,
    pub strong: Estimate,
    pub weak: Estimate,
    /// Strong user's estimate before the refinement layer, when there is one.
    pub side_info: Option<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub scheme: Scheme,
    pub n: usize,
    pub seed: u64,
    pub empirical_ds: f64,
    pub empirical_dw: f64,
    pub stderr_ds: f64,
    pub stderr_dw: f64,
    pub closedform_ds: f64,
    pub closedform_dw: f64,
    pub components: Vec<ComponentReport>,
    /// Every reported distortion agrees with its closed form.
    pub pass: bool,
}

fn closed_forms(stage: &Stage, ns: f64, nw: f64) -> (f64, f64, Option<f64>) {
    match *stage {
        Stage::QuantizedError {
            coarse,
            power,
            fine,
            ..
        } => (
            fine,
            coarse / (1.0 + power / nw),
            Some(coarse / (1.0 + power / ns)),
        ),
        Stage::Uncoded {
            var,
            analog,
            interference,
        } => (
            var / (1.0 + analog / (interference + ns)),
            var / (1.0 + analog / (interference + nw)),
            None,
        ),
        Stage::Digital { coarse, fine, .. } => (fine, coarse, None),
    }
}

fn scheme_key(scheme: Scheme) -> u64 {
    Scheme::all().iter().position(|s| *s == scheme).unwrap_or(0) as u64
}

fn run(
    scheme: Scheme,
    plan: &[Stage],
    ch: (f64, f64),
    totals: (f64, f64),
    cfg: &McConfig,
) -> Result<McReport> {
    cfg.validate()?;
    let (ns, nw) = ch;
    let tally: Tally = simulate(
        plan,
        ns,
        nw,
        cfg.samples,
        cfg.batch,
        cfg.seed,
        scheme_key(scheme),
    );
    let components: Vec<ComponentReport> = plan
        .iter()
        .enumerate()
        .map(|(k, stage)| {
            let (cs, cw, side) = closed_forms(stage, ns, nw);
            ComponentReport {
                index: k,
                strong: Estimate::from_stats(&tally.per_strong[k], cs),
                weak: Estimate::from_stats(&tally.per_weak[k], cw),
                side_info: side.map(|c| Estimate::from_stats(&tally.per_side[k], c)),
            }
        })
        .collect();
    let ds = Estimate::from_stats(&tally.strong, totals.0);
    let dw = Estimate::from_stats(&tally.weak, totals.1);
    let agrees = |e: &Estimate| e.agrees(cfg.z, cfg.rel_tol);
    let pass = agrees(&ds)
        && agrees(&dw)
        && components.iter().all(|c| {
            agrees(&c.strong) && agrees(&c.weak) && c.side_info.as_ref().is_none_or(agrees)
        });
    Ok(McReport {
        scheme,
        n: cfg.samples,
        seed: cfg.seed,
        empirical_ds: ds.empirical,
        empirical_dw: dw.empirical,
        stderr_ds: ds.stderr,
        stderr_dw: dw.stderr,
        closedform_ds: ds.closed_form,
        closedform_dw: dw.closed_form,
        components,
        pass,
    })
}

/// Scaled source over one channel use to two receivers, LMMSE at each.
pub fn simulate_uncoded_broadcast(
    sigma2: f64,
    ch: &BroadcastChannel,
    cfg: &McConfig,
) -> Result<McReport> {
    crate::error::positive("sigma2", sigma2)?;
    let plan = [Stage::Uncoded {
        var: sigma2,
        analog: ch.power,
        interference: 0.0,
    }];
    let (cs, cw, _) = closed_forms(&plan[0], ch.noise_strong, ch.noise_weak);
    run(
        Scheme::Analog,
        &plan,
        (ch.noise_strong, ch.noise_weak),
        (cs, cw),
        cfg,
    )
}

/// Scaled source over a single AWGN channel; both reported users see noise `noise`.
pub fn simulate_uncoded(sigma2: f64, power: f64, noise: f64, cfg: &McConfig) -> Result<McReport> {
    simulate_uncoded_broadcast(sigma2, &BroadcastChannel::new(power, noise, noise)?, cfg)
}

fn require_k2(spec: &ProblemSpec) -> Result<()> {
    let (k, m) = (spec.components(), spec.subchannels());
    if k != 2 || m != 2 {
        return Err(Error::ShapeMismatch { k, m });
    }
    Ok(())
}

fn noises(spec: &ProblemSpec) -> (f64, f64) {
    (spec.noise_strong(), spec.noise_weak())
}

/// Weak-user-optimal chain for `K = M = 2`, checked against the dedicated evaluator.
pub fn simulate_weak_opt_chain(spec: &ProblemSpec, cfg: &McConfig) -> Result<McReport> {
    require_k2(spec)?;
    let (params, _) = theorem1_params(spec);
    let pt = weak_user_optimal(spec);
    run(
        Scheme::WeakOpt,
        &plan_from_params(spec, &params),
        noises(spec),
        (pt.d_s, pt.d_w),
        cfg,
    )
}

/// Strong-user-optimal chain for `K = M = 2`, checked against the dedicated evaluator.
pub fn simulate_strong_opt_chain(spec: &ProblemSpec, cfg: &McConfig) -> Result<McReport> {
    require_k2(spec)?;
    let (params, _) = theorem2_params(spec);
    let pt = strong_user_optimal(spec);
    run(
        Scheme::StrongOpt,
        &plan_from_params(spec, &params),
        noises(spec),
        (pt.d_s, pt.d_w),
        cfg,
    )
}

/// Full chain for any feasible parameter vector.
pub fn simulate_general_chain(
    spec: &ProblemSpec,
    params: &Theorem3Params,
    cfg: &McConfig,
) -> Result<McReport> {
    let pt = theorem3_evaluate(spec, params)?;
    run(
        Scheme::General,
        &plan_from_params(spec, params),
        noises(spec),
        (pt.d_s, pt.d_w),
        cfg,
    )
}
