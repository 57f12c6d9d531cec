//! Rate-distortion and capacity primitives for Gaussian sources and channels.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::model::{ProblemSpec, User};

/// Outcome of reverse water-filling over a parallel Gaussian source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfillResult {
    /// Water level.
    pub mu: f64,
    /// Per-component distortion `min(mu, sigma_k^2)`, in input order.
    pub distortions: Vec<f64>,
    /// Average distortion `(1/K) sum D_k`.
    pub total_distortion: f64,
    /// Achieved rate in nats per source vector.
    pub total_rate: f64,
}

const MAX_BISECTIONS: usize = 200;
const BISECTION_REL_WIDTH: f64 = 1e-14;

/// Capacity of a real AWGN channel in nats per channel use.
pub fn awgn_capacity(power: f64, noise: f64) -> Result<f64> {
    if !(noise.is_finite() && noise > 0.0) {
        return Err(Error::NonPositiveNoise(noise));
    }
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::NonPositiveParameter {
            name: "power",
            value: power,
        });
    }
    Ok(0.5 * (power / noise).ln_1p())
}

/// Distortion-rate function of a Gaussian source, `sigma2 * exp(-2R)`.
pub fn gaussian_distortion_at_rate(sigma2: f64, rate: f64) -> Result<f64> {
    positive("sigma2", sigma2)?;
    if rate.is_nan() || rate < 0.0 {
        return Err(Error::NegativeRate(rate));
    }
    Ok(sigma2 * (-2.0 * rate).exp())
}

fn rate_at(variances: &[f64], mu: f64) -> f64 {
    0.5 * variances
        .iter()
        .filter(|&&v| v > mu)
        .map(|&v| (v / mu).ln())
        .sum::<f64>()
}

/// Water level in closed form once the active set `{k : sigma_k^2 > mu}` is known.
fn level_for_active_set(variances: &[f64], mu: f64, total_rate: f64) -> Option<f64> {
    let (count, log_sum) = variances
        .iter()
        .filter(|&&v| v > mu)
        .fold((0usize, 0.0), |(n, s), &v| (n + 1, s + v.ln()));
    if count == 0 {
        return None;
    }
    Some(((log_sum - 2.0 * total_rate) / count as f64).exp())
}

/// Reverse water-filling: finds `mu` with `(1/2) sum ln(sigma_k^2 / min(mu, sigma_k^2))`
/// equal to `total_rate` (nats per source vector).
///
/// The level is bracketed on `(sigma_min^2 * 1e-300, sigma_max^2]` and bisected
/// geometrically; the final level is recomputed in closed form on the active
/// set the bisection settled on.
pub fn reverse_waterfill(variances: &[f64], total_rate: f64) -> Result<WaterfillResult> {
    if variances.is_empty() {
        return Err(Error::NonPositiveParameter {
            name: "number of source components",
            value: 0.0,
        });
    }
    for &v in variances {
        positive("variance", v)?;
    }
    if total_rate.is_nan() || total_rate < 0.0 {
        return Err(Error::NegativeRate(total_rate));
    }
    let max_var = variances.iter().copied().fold(f64::MIN, f64::max);
    let min_var = variances.iter().copied().fold(f64::MAX, f64::min);

    let mu = if total_rate == 0.0 {
        max_var
    } else {
        let mut lo = min_var * 1e-300;
        let mut hi = max_var;
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= BISECTION_REL_WIDTH * hi {
                break;
            }
            let mid = (lo * hi).sqrt();
            if rate_at(variances, mid) > total_rate {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let bisected = 0.5 * (lo + hi);
        // Polish on the active set at either end of the final bracket; the
        // true level may sit exactly on a variance.
        [bisected, lo, hi]
            .into_iter()
            .filter_map(|m| level_for_active_set(variances, m, total_rate))
            .chain(std::iter::once(bisected))
            .filter(|m| m.is_finite() && *m > 0.0 && *m <= max_var)
            .min_by(|a, b| {
                let ea = (rate_at(variances, *a) - total_rate).abs();
                let eb = (rate_at(variances, *b) - total_rate).abs();
                ea.total_cmp(&eb)
            })
            .unwrap_or(bisected)
    };

    let distortions: Vec<f64> = variances.iter().map(|&v| v.min(mu)).collect();
    let total_distortion = distortions.iter().sum::<f64>() / variances.len() as f64;
    let achieved = 0.5
        * variances
            .iter()
            .zip(&distortions)
            .map(|(v, d)| (v / d).ln())
            .sum::<f64>();
    Ok(WaterfillResult {
        mu,
        distortions,
        total_distortion,
        total_rate: achieved,
    })
}

/// Best point-to-point distortion for one user: reverse water-filling at the
/// rate `M * C(P, N_user)`.
pub fn point_to_point_optimum(spec: &ProblemSpec, user: User) -> WaterfillResult {
    let noise = spec.channel().noise(user);
    let capacity = 0.5 * (spec.power() / noise).ln_1p();
    reverse_waterfill(spec.variances(), spec.subchannels() as f64 * capacity)
        .expect("validated spec always water-fills")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    /// Test oracle: enumerate active-set sizes over the sorted variances and
    /// keep the unique consistent closed-form level.
    fn enumerate_level(variances: &[f64], rate: f64) -> f64 {
        let mut sorted = variances.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for n in (1..=sorted.len()).rev() {
            let log_sum: f64 = sorted[..n].iter().map(|v| v.ln()).sum();
            let mu = ((log_sum - 2.0 * rate) / n as f64).exp();
            let below_active = mu < sorted[n - 1];
            let above_inactive = n == sorted.len() || mu >= sorted[n];
            if below_active && above_inactive {
                return mu;
            }
        }
        sorted[0]
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(awgn_capacity(0.0, 1.0).unwrap(), 0.0);
        assert!(close(awgn_capacity(1.0, 1.0).unwrap(), 0.5 * LN_2, 1e-15));
        assert!(close(
            awgn_capacity(99.0, 1.0).unwrap(),
            0.5 * 100f64.ln(),
            1e-15
        ));
        assert!((awgn_capacity(1.0, 1.0).unwrap() - 0.34657).abs() < 1e-5);
        assert!(matches!(
            awgn_capacity(1.0, 0.0),
            Err(Error::NonPositiveNoise(_))
        ));
    }

    #[test]
    fn distortion_rate_examples() {
        assert_eq!(gaussian_distortion_at_rate(1.0, 0.0).unwrap(), 1.0);
        assert!(close(
            gaussian_distortion_at_rate(1.0, LN_2 / 2.0).unwrap(),
            0.5,
            1e-15
        ));
        assert!(close(
            gaussian_distortion_at_rate(4.0, LN_2).unwrap(),
            1.0,
            1e-15
        ));
        assert!(matches!(
            gaussian_distortion_at_rate(1.0, -0.1),
            Err(Error::NegativeRate(_))
        ));
    }

    #[test]
    fn waterfill_single_component() {
        let r = reverse_waterfill(&[1.0], LN_2 / 2.0).unwrap();
        assert!(close(r.mu, 0.5, 1e-14));
        assert!(close(r.distortions[0], 0.5, 1e-14));
    }

    #[test]
    fn waterfill_symmetric() {
        let r = reverse_waterfill(&[1.0, 1.0], LN_2).unwrap();
        assert!(close(r.mu, 0.5, 1e-14));
        assert!(close(r.distortions[0], 0.5, 1e-14) && close(r.distortions[1], 0.5, 1e-14));
    }

    #[test]
    fn waterfill_one_inactive_component() {
        let oracle = enumerate_level(&[1.0, 0.04], LN_2);
        // Frozen from the enumeration oracle: mu = 0.25, component 2 inactive.
        assert!(close(oracle, 0.25, 1e-15));
        let r = reverse_waterfill(&[1.0, 0.04], LN_2).unwrap();
        assert!(close(r.mu, 0.25, 1e-13));
        assert_eq!(r.distortions[1], 0.04);
        assert!(close(r.total_distortion, 0.145, 1e-13));
    }

    #[test]
    fn zero_rate_keeps_variances() {
        let r = reverse_waterfill(&[2.0, 1.0, 0.5], 0.0).unwrap();
        assert_eq!(r.mu, 2.0);
        assert_eq!(r.distortions, vec![2.0, 1.0, 0.5]);
        assert_eq!(r.total_rate, 0.0);
    }

    #[test]
    fn waterfill_rejects_bad_input() {
        assert!(reverse_waterfill(&[], 1.0).is_err());
        assert!(reverse_waterfill(&[1.0, 0.0], 1.0).is_err());
        assert!(matches!(
            reverse_waterfill(&[1.0], -1.0),
            Err(Error::NegativeRate(_))
        ));
    }

    #[test]
    fn point_to_point_examples() {
        let spec = ProblemSpec::new(vec![1.0], 1, 1.0, 0.01, 1.0).unwrap();
        let weak = point_to_point_optimum(&spec, User::Weak);
        assert!(close(weak.total_distortion, 0.5, 1e-13));
        let strong = point_to_point_optimum(&spec, User::Strong);
        assert!(close(strong.total_distortion, 1.0 / 101.0, 1e-13));
        assert!((strong.total_distortion - 0.009901).abs() < 1e-6);

        let spec = ProblemSpec::new(vec![1.0, 0.04], 2, 1.0, 0.5, 1.0).unwrap();
        let weak = point_to_point_optimum(&spec, User::Weak);
        assert!(close(weak.total_distortion, 0.145, 1e-13));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn variances() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-3.0f64..0.0, 1..8)
                .prop_map(|e| e.into_iter().map(|x| 10f64.powf(x)).collect())
        }

        proptest! {
            #[test]
            fn matches_enumeration_oracle(vars in variances(), rate in 0.01f64..20.0) {
                let r = reverse_waterfill(&vars, rate).unwrap();
                let oracle = enumerate_level(&vars, rate);
                prop_assert!(close(r.mu, oracle, 1e-11), "{} vs {}", r.mu, oracle);
                prop_assert!(close(r.total_rate, rate, 1e-12));
                for (d, v) in r.distortions.iter().zip(&vars) {
                    prop_assert!(*d <= *v);
                    prop_assert_eq!(*d, v.min(r.mu));
                }
            }

            #[test]
            fn distortions_non_increasing_in_rate(vars in variances(), rate in 0.0f64..10.0, step in 1e-3f64..2.0) {
                let a = reverse_waterfill(&vars, rate).unwrap();
                let b = reverse_waterfill(&vars, rate + step).unwrap();
                for (da, db) in a.distortions.iter().zip(&b.distortions) {
                    prop_assert!(*db <= *da * (1.0 + 1e-14));
                }
            }

            #[test]
            fn scale_covariance(vars in variances(), rate in 0.01f64..10.0, log_c in -3.0f64..3.0) {
                let c = 10f64.powf(log_c);
                let scaled: Vec<f64> = vars.iter().map(|v| v * c).collect();
                let a = reverse_waterfill(&vars, rate).unwrap();
                let b = reverse_waterfill(&scaled, rate).unwrap();
                prop_assert!(close(b.mu, c * a.mu, 1e-12));
                for (da, db) in a.distortions.iter().zip(&b.distortions) {
                    prop_assert!(close(*db, c * da, 1e-12));
                }
            }

            #[test]
            fn strong_user_never_worse(vars in variances(), m in 1usize..5, ns in 1e-3f64..1.0, gap in 0.0f64..10.0) {
                let spec = ProblemSpec::new(vars, m, 1.0, ns, ns + gap).unwrap();
                let s = point_to_point_optimum(&spec, User::Strong);
                let w = point_to_point_optimum(&spec, User::Weak);
                for (ds, dw) in s.distortions.iter().zip(&w.distortions) {
                    prop_assert!(*ds <= *dw * (1.0 + 1e-14));
                }
            }
        }
    }
}
