//! Achievable distortion pairs of the hybrid digital-analog schemes.
//!
//! [`weak_user_optimal`] and [`strong_user_optimal`] give the two extreme
//! points in closed form. [`theorem3_feasible`] and [`theorem3_evaluate`]
//! handle the general scheme for an explicit parameter vector, and
//! [`theorem3_optimize`] searches that parameter space.
//!
//! Layout of the general scheme for a fixed `(L, K')`:
//!
//! * components `0..L`: coarse common codeword, quantization error sent
//!   uncoded on sub-channel `k`, Wyner-Ziv refinement for the strong user;
//! * components `L..K'`: sent uncoded on sub-channel `k` next to a common
//!   layer (power `P_k - P'_k`) and a dirty-paper layer (power `P''_k`);
//! * components `K'..K`: purely digital successive refinement;
//! * sub-channels `K'..M`: superposition of common and refinement layers.

#![allow(clippy::needless_range_loop)]

mod extremes;
mod optimize;

pub use extremes::{
    strong_user_optimal, theorem1_params, theorem2_params, weak_user_optimal, ExtremeStructure,
};
pub use optimize::{theorem3_optimize, OptimizeGrid};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Scheme, SchemeParams, SchemePoint, Theorem3Params};

/// Relative tolerance on the equality conditions.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Result of checking a parameter vector against the achievability conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// `M P - sum P_m`.
    pub power_slack: f64,
    /// Relative residuals of the equality conditions: `D'_k / D''_k = 1 + P_k/N_s`
    /// for `k < L`, then `sigma_k^2 / D_k = 1 + (P'_k - P''_k)/(P''_k + N_s)`
    /// for `L <= k < K'`.
    pub equality_residuals: Vec<f64>,
    /// Rate slack in nats: `[weak common-layer condition, strong refinement condition]`.
    pub rate_slacks: [f64; 2],
    /// Violated ordering or sign constraints.
    pub violations: Vec<String>,
}

fn ordered(
    violations: &mut Vec<String>,
    lo: f64,
    hi: f64,
    tol: f64,
    what: impl FnOnce() -> String,
) {
    if lo > hi + tol * hi.abs().max(lo.abs()) {
        violations.push(what());
    }
}

/// Checks the power budget, the ordering constraints, the two equality
/// conditions and the two digital rate conditions.
pub fn theorem3_feasible(
    spec: &ProblemSpec,
    params: &Theorem3Params,
    tol: f64,
) -> Result<FeasibilityReport> {
    let k_total = spec.components();
    let m_total = spec.subchannels();
    params.check_shape(k_total, m_total)?;
    let (l, kp) = (params.l, params.k_prime);
    let var = spec.variances();
    let ns = spec.noise_strong();
    let nw = spec.noise_weak();
    let budget = m_total as f64 * spec.power();

    let mut violations = Vec::new();
    let all_values = params
        .p
        .iter()
        .chain(&params.p_prime)
        .chain(&params.p_dprime)
        .chain(&params.d)
        .chain(&params.d_prime)
        .chain(&params.d_dprime);
    if all_values.clone().any(|v| !v.is_finite() || *v < 0.0) {
        violations.push("all powers and distortions must be finite and non-negative".into());
    }
    if params
        .d
        .iter()
        .chain(&params.d_dprime)
        .chain(&params.d_prime)
        .any(|&d| d <= 0.0)
    {
        violations.push("distortions must be strictly positive".into());
    }

    let power_slack = budget - params.p.iter().sum::<f64>();
    if power_slack < -tol * budget {
        violations.push(format!("power budget exceeded by {}", -power_slack));
    }
    for m in l..m_total {
        let pp = params.p_prime_at(m);
        ordered(&mut violations, pp, params.p[m], tol, || {
            format!("P'_{m} > P_{m}")
        });
        if m < kp {
            let ppp = params.p_dprime_at(m);
            ordered(&mut violations, ppp, pp, tol, || {
                format!("P''_{m} > P'_{m}")
            });
        }
    }
    for k in 0..l {
        let (d, dd, dp) = (params.d[k], params.d_dprime[k], params.d_prime_at(k));
        ordered(&mut violations, d, dd, tol, || format!("D_{k} > D''_{k}"));
        ordered(&mut violations, dd, dp, tol, || format!("D''_{k} > D'_{k}"));
        ordered(&mut violations, dp, var[k], tol, || {
            format!("D'_{k} > sigma_{k}^2")
        });
    }
    for k in l..kp {
        ordered(&mut violations, params.d[k], var[k], tol, || {
            format!("D_{k} > sigma_{k}^2")
        });
    }
    for k in kp..k_total {
        let (d, dp) = (params.d[k], params.d_prime_at(k));
        ordered(&mut violations, d, dp, tol, || format!("D_{k} > D'_{k}"));
        ordered(&mut violations, dp, var[k], tol, || {
            format!("D'_{k} > sigma_{k}^2")
        });
    }

    let mut equality_residuals = Vec::with_capacity(kp);
    for k in 0..l {
        let target = 1.0 + params.p[k] / ns;
        equality_residuals.push(params.d_prime_at(k) / params.d_dprime[k] / target - 1.0);
    }
    for k in l..kp {
        let (pp, ppp) = (params.p_prime_at(k), params.p_dprime_at(k));
        let target = 1.0 + (pp - ppp) / (ppp + ns);
        equality_residuals.push(var[k] / params.d[k] / target - 1.0);
    }

    // Rates below are (1/2) ln(.), i.e. nats.
    let common_available: f64 = (l..m_total)
        .map(|m| {
            let pp = params.p_prime_at(m);
            0.5 * ((params.p[m] - pp) / (pp + nw)).ln_1p()
        })
        .sum();
    let common_needed: f64 = params
        .coarse_components(k_total)
        .map(|k| 0.5 * (var[k] / params.d_prime_at(k)).ln())
        .sum();
    let refine_available: f64 = (l..kp)
        .map(|m| 0.5 * (params.p_dprime_at(m) / ns).ln_1p())
        .chain((kp..m_total).map(|m| 0.5 * (params.p_prime_at(m) / ns).ln_1p()))
        .sum();
    let refine_needed: f64 = (0..l)
        .map(|k| 0.5 * (params.d_dprime[k] / params.d[k]).ln())
        .chain((kp..k_total).map(|k| 0.5 * (params.d_prime_at(k) / params.d[k]).ln()))
        .sum();
    let rate_slacks = [
        common_available - common_needed,
        refine_available - refine_needed,
    ];

    let residuals_ok = equality_residuals
        .iter()
        .all(|r| r.is_finite() && r.abs() <= tol);
    let rate_scale = [
        common_available.abs().max(common_needed.abs()).max(1.0),
        refine_available.abs().max(refine_needed.abs()).max(1.0),
    ];
    let rates_ok = rate_slacks
        .iter()
        .zip(rate_scale)
        .all(|(s, scale)| s.is_finite() && *s >= -tol * scale);

    Ok(FeasibilityReport {
        feasible: violations.is_empty() && residuals_ok && rates_ok,
        power_slack,
        equality_residuals,
        rate_slacks,
        violations,
    })
}

/// `(D_s, D_w)` of the general scheme, after checking feasibility at
/// [`FEASIBILITY_TOL`].
pub fn theorem3_evaluate(spec: &ProblemSpec, params: &Theorem3Params) -> Result<SchemePoint> {
    let report = theorem3_feasible(spec, params, FEASIBILITY_TOL)?;
    if !report.feasible {
        return Err(Error::InfeasibleParams(describe_infeasibility(&report)));
    }
    let (d_s, d_w) = evaluate_unchecked(spec, params);
    Ok(SchemePoint::new(
        d_s,
        d_w,
        Scheme::General,
        SchemeParams::Theorem3(Box::new(params.clone())),
    ))
}

pub(crate) fn evaluate_unchecked(spec: &ProblemSpec, params: &Theorem3Params) -> (f64, f64) {
    let k_total = spec.components();
    let var = spec.variances();
    let nw = spec.noise_weak();
    let (l, kp) = (params.l, params.k_prime);
    let d_s = params.d.iter().sum::<f64>() / k_total as f64;
    let weak_sum: f64 = (0..l)
        .map(|k| params.d_prime_at(k) / (1.0 + params.p[k] / nw))
        .chain((l..kp).map(|k| {
            let (pp, ppp) = (params.p_prime_at(k), params.p_dprime_at(k));
            var[k] / (1.0 + (pp - ppp) / (ppp + nw))
        }))
        .chain((kp..k_total).map(|k| params.d_prime_at(k)))
        .sum();
    (d_s, weak_sum / k_total as f64)
}

fn describe_infeasibility(report: &FeasibilityReport) -> String {
    let mut parts = report.violations.clone();
    if let Some(worst) = report
        .equality_residuals
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
    {
        if worst.abs() > FEASIBILITY_TOL {
            parts.push(format!("equality residual {worst:e}"));
        }
    }
    for (name, slack) in ["weak common-rate", "strong refinement-rate"]
        .iter()
        .zip(report.rate_slacks)
    {
        if slack < 0.0 {
            parts.push(format!("{name} slack {slack:e} nats"));
        }
    }
    if parts.is_empty() {
        parts.push("rate condition violated".into());
    }
    parts.join("; ")
}
