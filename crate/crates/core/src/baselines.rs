//! Reference schemes: digital separation, uncoded (analog) transmission,
//! the constant-gap bound for separation and the analog/digital ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Scheme, SchemeParams, SchemePoint, SeparationParams};
use crate::ratedist::reverse_waterfill;

/// Per-sub-channel rates in nats of the common and strong-only messages when a
/// fraction `beta` of the power goes to the strong-only message.
pub fn separation_rates(spec: &ProblemSpec, beta: f64) -> (f64, f64) {
    let (p, ns, nw) = (spec.power(), spec.noise_strong(), spec.noise_weak());
    let base = 0.5 * ((1.0 - beta) * p / (beta * p + nw)).ln_1p();
    let refine = 0.5 * (beta * p / ns).ln_1p();
    (base, refine)
}

/// Layered digital scheme: a successively refinable source code on top of a
/// degraded-message-set broadcast code.
pub fn separation_point(spec: &ProblemSpec, beta: &SeparationParams) -> SchemePoint {
    let (base, refine) = separation_rates(spec, beta.beta);
    let m = spec.subchannels() as f64;
    let weak = reverse_waterfill(spec.variances(), m * base).expect("non-negative rate");
    let strong =
        reverse_waterfill(spec.variances(), m * (base + refine)).expect("non-negative rate");
    SchemePoint::new(
        strong.total_distortion,
        weak.total_distortion,
        Scheme::Separation,
        SchemeParams::Separation { beta: beta.beta },
    )
}

/// Power split at which both users are within one bit per channel use of
/// their point-to-point capacities. Returns 0 when the noises are equal.
pub fn beta_bar(spec: &ProblemSpec) -> f64 {
    let (p, ns, nw) = (spec.power(), spec.noise_strong(), spec.noise_weak());
    if nw <= ns {
        return 0.0;
    }
    let lower = 1.0 / (p / (nw - ns) + 2.0 / (1.0 + ns / p)) - ns / p;
    lower.clamp(0.0, 1.0)
}

/// Slack of the two one-bit conditions at `beta`, in bits:
/// `[R_w(beta) + 1 - R_w*, R_s(beta) + 1 - R_s*]`.
pub fn one_bit_slacks(spec: &ProblemSpec, beta: f64) -> [f64; 2] {
    let (base, refine) = separation_rates(spec, beta);
    let (base0, _) = separation_rates(spec, 0.0);
    let (base1, refine1) = separation_rates(spec, 1.0);
    let to_bits = std::f64::consts::LOG2_E;
    [
        (base - base0) * to_bits + 1.0,
        (base + refine - base1 - refine1) * to_bits + 1.0,
    ]
}

/// Separation gap to the point-to-point optima at `beta_bar`, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prop1Gap {
    pub beta: f64,
    pub strong_bits: f64,
    pub weak_bits: f64,
    /// Upper bound `M / K`.
    pub bound: f64,
}

impl Prop1Gap {
    pub fn holds(&self) -> bool {
        self.strong_bits <= self.bound && self.weak_bits <= self.bound
    }
}

/// `(1/2) log2(D_j / D_j*)` for both users at `beta_bar`, white sources only.
pub fn prop1_gap(spec: &ProblemSpec) -> Result<Prop1Gap> {
    if !spec.is_white() {
        return Err(Error::NonWhiteSource);
    }
    let beta = beta_bar(spec);
    let sep = separation_point(spec, &SeparationParams::new(beta)?);
    let weak_opt = separation_point(spec, &SeparationParams::new(0.0)?);
    let strong_opt = separation_point(spec, &SeparationParams::new(1.0)?);
    Ok(Prop1Gap {
        beta,
        strong_bits: 0.5 * (sep.d_s / strong_opt.d_s).log2(),
        weak_bits: 0.5 * (sep.d_w / weak_opt.d_w).log2(),
        bound: spec.alpha(),
    })
}

/// Power allocation for uncoded transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnalogAllocation {
    /// Explicit per-sub-channel powers.
    Powers(Vec<f64>),
    /// Allocation minimizing the weak user's distortion under the total budget.
    Optimal,
}

/// Powers minimizing `sum sigma_k^2 N / (P_k + N)` subject to `sum P_k = total`.
/// The stationarity condition gives `P_k = max(0, sigma_k c - N)`.
pub fn optimal_analog_powers(variances: &[f64], total: f64, noise: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..variances.len()).collect();
    order.sort_by(|&a, &b| variances[b].total_cmp(&variances[a]));
    let sigma: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let mut powers = vec![0.0; variances.len()];
    for active in (1..=order.len()).rev() {
        let sum_sigma: f64 = order[..active].iter().map(|&k| sigma[k]).sum();
        let c = (total + active as f64 * noise) / sum_sigma;
        if sigma[order[active - 1]] * c > noise || active == 1 {
            for &k in &order[..active] {
                powers[k] = (sigma[k] * c - noise).max(0.0);
            }
            break;
        }
    }
    powers
}

/// Uncoded transmission of component `k` on sub-channel `k`.
pub fn analog_point(spec: &ProblemSpec, allocation: &AnalogAllocation) -> Result<SchemePoint> {
    let (k, m) = (spec.components(), spec.subchannels());
    if k != m {
        return Err(Error::BandwidthMismatch { k, m });
    }
    let budget = m as f64 * spec.power();
    let powers = match allocation {
        AnalogAllocation::Optimal => {
            optimal_analog_powers(spec.variances(), budget, spec.noise_weak())
        }
        AnalogAllocation::Powers(p) => {
            if p.len() != m {
                return Err(Error::InvalidArgument(format!(
                    "expected {m} powers, got {}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(Error::InvalidArgument("powers must be non-negative".into()));
            }
            let total: f64 = p.iter().sum();
            if total > budget * (1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "powers sum to {total}, budget is {budget}"
                )));
            }
            p.clone()
        }
    };
    let mse = |noise: f64| {
        spec.variances()
            .iter()
            .zip(&powers)
            .map(|(s, p)| s * noise / (p + noise))
            .sum::<f64>()
            / k as f64
    };
    Ok(SchemePoint::new(
        mse(spec.noise_strong()),
        mse(spec.noise_weak()),
        Scheme::Analog,
        SchemeParams::Analog { powers },
    ))
}

/// Analog over digital distortion for a point-to-point channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogDigitalRatio {
    /// Optimal analog distortion over reverse water-filled digital distortion at `P / N`.
    pub finite: f64,
    /// High-power limit: squared ratio of arithmetic to geometric mean of the `sigma_k`.
    pub asymptotic: f64,
}

/// Compares optimal uncoded transmission with optimal digital transmission
/// when each of `K` components has its own sub-channel of power `power`.
pub fn analog_digital_ratio(
    variances: &[f64],
    power: f64,
    noise: f64,
) -> Result<AnalogDigitalRatio> {
    let spec = ProblemSpec::new(variances.to_vec(), variances.len(), power, noise, noise)?;
    let k = variances.len() as f64;
    let analog = analog_point(&spec, &AnalogAllocation::Optimal)?.d_w;
    let digital = reverse_waterfill(variances, k * 0.5 * (power / noise).ln_1p())?.total_distortion;
    let sigma: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();
    let am = sigma.iter().sum::<f64>() / k;
    let gm = (sigma.iter().map(|s| s.ln()).sum::<f64>() / k).exp();
    Ok(AnalogDigitalRatio {
        finite: analog / digital,
        asymptotic: (am / gm).powi(2),
    })
}
