//! Closed-form trade-offs for white sources when the channel bandwidth differs
//! from the source bandwidth (`alpha = M / K != 1`).

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::frontier::pareto_filter;
use crate::model::{
    BroadcastChannel, MismatchParams, Scheme, SchemeParams, SchemePoint, Theorem3Params,
};

fn require_contraction(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange {
            alpha,
            expected: "0 < alpha < 1",
        })
    }
}

fn require_expansion(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange {
            alpha,
            expected: "alpha > 1",
        })
    }
}

fn point(d_s: f64, d_w: f64, scheme: Scheme, p: &MismatchParams) -> SchemePoint {
    SchemePoint::new(
        d_s,
        d_w,
        scheme,
        SchemeParams::Mismatch {
            lambda: p.lambda,
            gamma: p.gamma,
        },
    )
}

/// Bandwidth-contraction trade-off point for `(lambda, gamma)`.
pub fn bc_point(p: &MismatchParams, ch: &BroadcastChannel) -> Result<SchemePoint> {
    require_contraction(p.alpha)?;
    let (a, s2, lam, gam) = (p.alpha, p.sigma2, p.lambda, p.gamma);
    let (pw, ns, nw) = (ch.power, ch.noise_strong, ch.noise_weak);
    let expo = a / (1.0 - a);
    let common_gain = (pw + nw) / (lam * pw + nw);
    let d_w =
        a * s2 * (lam * gam * pw + nw) / (lam * pw + nw) + (1.0 - a) * s2 * common_gain.powf(-expo);
    let d_s = a * s2 * (lam * gam * pw + ns) / (lam * pw + ns)
        + (1.0 - a) * s2 * (common_gain * (lam * gam * pw + ns) / ns).powf(-expo);
    Ok(point(d_s, d_w, Scheme::BcClosed, p))
}

/// Bandwidth-expansion trade-off point for `(lambda, gamma)`.
pub fn be_point(p: &MismatchParams, ch: &BroadcastChannel) -> Result<SchemePoint> {
    require_expansion(p.alpha)?;
    let (a, s2, lam, gam) = (p.alpha, p.sigma2, p.lambda, p.gamma);
    let (pw, ns, nw) = (ch.power, ch.noise_strong, ch.noise_weak);
    let excess = a * (1.0 - gam) / (a - 1.0) * pw;
    let common = ((excess + nw) / (lam * excess + nw)).powf(a - 1.0);
    let d_w = s2 / (common * (a * gam * pw + nw) / nw);
    let d_s = s2 / (common * (a * gam * pw + ns) / ns * ((lam * excess + ns) / ns).powf(a - 1.0));
    Ok(point(d_s, d_w, Scheme::BeClosed, p))
}

/// Contraction or expansion point, chosen by `alpha`.
pub fn mismatch_point(p: &MismatchParams, ch: &BroadcastChannel) -> Result<SchemePoint> {
    if p.alpha < 1.0 {
        bc_point(p, ch)
    } else {
        be_point(p, ch)
    }
}

fn check_realization(alpha: f64, k: usize, m: usize) -> Result<()> {
    if k == 0 || m == 0 || (m as f64 / k as f64 - alpha).abs() > 1e-12 * alpha {
        return Err(Error::AlphaMismatch { alpha, k, m });
    }
    Ok(())
}

/// General-scheme parameters that reproduce [`bc_point`] with `K` components
/// and `M < K` sub-channels.
pub fn bc_substitution(
    p: &MismatchParams,
    ch: &BroadcastChannel,
    k: usize,
    m: usize,
) -> Result<Theorem3Params> {
    require_contraction(p.alpha)?;
    check_realization(p.alpha, k, m)?;
    let (s2, lam, gam) = (p.sigma2, p.lambda, p.gamma);
    let (pw, ns, nw) = (ch.power, ch.noise_strong, ch.noise_weak);
    let expo = m as f64 / (k - m) as f64;

    let d = s2 / (1.0 + lam * (1.0 - gam) * pw / (lam * gam * pw + ns));
    let coarse = s2 * ((pw + nw) / (lam * pw + nw)).powf(-expo);
    let fine = coarse * ((lam * gam * pw + ns) / ns).powf(-expo);

    let mut dist = vec![d; m];
    dist.extend(std::iter::repeat_n(fine, k - m));
    Ok(Theorem3Params {
        l: 0,
        k_prime: m,
        p: vec![pw; m],
        p_prime: vec![lam * pw; m],
        p_dprime: vec![lam * gam * pw; m],
        d: dist,
        d_prime: vec![coarse; k - m],
        d_dprime: Vec::new(),
    })
}

/// General-scheme parameters that reproduce [`be_point`] with `K` components
/// and `M > K` sub-channels. The excess band splits its power as `lambda` for
/// the strong-only refinement layer and `1 - lambda` for the common layer.
pub fn be_substitution(
    p: &MismatchParams,
    ch: &BroadcastChannel,
    k: usize,
    m: usize,
) -> Result<Theorem3Params> {
    require_expansion(p.alpha)?;
    check_realization(p.alpha, k, m)?;
    let (a, s2, lam, gam) = (p.alpha, p.sigma2, p.lambda, p.gamma);
    let (pw, ns, nw) = (ch.power, ch.noise_strong, ch.noise_weak);
    let uncoded_power = a * gam * pw;
    let excess = a * (1.0 - gam) / (a - 1.0) * pw;
    let expo = (m - k) as f64 / k as f64;

    let coarse = s2 * ((excess + nw) / (lam * excess + nw)).powf(-expo);
    let side = coarse / (1.0 + uncoded_power / ns);
    let fine = side * ((lam * excess + ns) / ns).powf(-expo);

    let mut powers = vec![uncoded_power; k];
    powers.extend(std::iter::repeat_n(excess, m - k));
    Ok(Theorem3Params {
        l: k,
        k_prime: k,
        p: powers,
        p_prime: vec![lam * excess; m - k],
        p_dprime: Vec::new(),
        d: vec![fine; k],
        d_prime: vec![coarse; k],
        d_dprime: vec![side; k],
    })
}

/// Strong-user-optimal distortion gap between the Mittal-Phamdo schemes and
/// the hybrid scheme, as an MSE difference.
pub fn mp_gap_strong_opt(sigma2: f64, ch: &BroadcastChannel, alpha: f64) -> Result<f64> {
    positive("sigma2", sigma2)?;
    if !(alpha > 0.0 && alpha.is_finite()) || alpha == 1.0 {
        return Err(Error::AlphaOutOfRange {
            alpha,
            expected: "alpha > 0, alpha != 1",
        });
    }
    let (pw, ns, nw) = (ch.power, ch.noise_strong, ch.noise_weak);
    let snr_gain = 1.0 + pw / ns;
    Ok(if alpha < 1.0 {
        alpha * sigma2 * ns / (nw + pw) * (1.0 - snr_gain.powf(-alpha))
    } else {
        sigma2 / (snr_gain.powf(alpha) * (1.0 + nw / pw))
    })
}

/// The `(lambda, gamma)` pairs that attain the two extreme points exactly:
/// `[weak-user optimal, strong-user optimal]`.
pub fn extreme_knobs(alpha: f64, ch: &BroadcastChannel) -> Result<[(f64, f64); 2]> {
    let (pw, ns, nw) = (ch.power, ch.noise_strong, ch.noise_weak);
    if alpha < 1.0 {
        require_contraction(alpha)?;
        let lam = if pw > 0.0 {
            (nw * ((1.0 + pw / nw).powf(alpha) - 1.0) / pw).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let gam = if pw > 0.0 {
            (((pw + ns) * (1.0 + pw / ns).powf(-alpha) - ns) / pw).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok([(lam, 0.0), (1.0, gam)])
    } else {
        require_expansion(alpha)?;
        Ok([(0.0, 1.0 / alpha), (1.0, 1.0 / alpha)])
    }
}

/// Sweep settings for [`mismatch_frontier`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchGrid {
    /// Points per axis on `[0, 1]` for both `lambda` and `gamma`.
    pub points: usize,
    /// Also evaluate the two exact extreme-point knobs.
    pub include_extremes: bool,
}

impl Default for MismatchGrid {
    fn default() -> Self {
        Self {
            points: 201,
            include_extremes: true,
        }
    }
}

/// Pareto frontier of the closed-form trade-off over a `(lambda, gamma)` grid.
pub fn mismatch_frontier(
    sigma2: f64,
    alpha: f64,
    ch: &BroadcastChannel,
    grid: &MismatchGrid,
) -> Result<Vec<SchemePoint>> {
    if grid.points < 3 {
        return Err(Error::GridTooCoarse(grid.points));
    }
    let step = 1.0 / (grid.points - 1) as f64;
    let mut knobs: Vec<(f64, f64)> = (0..grid.points)
        .flat_map(|i| (0..grid.points).map(move |j| (i as f64 * step, j as f64 * step)))
        .collect();
    if grid.include_extremes {
        knobs.extend(extreme_knobs(alpha, ch)?);
    }
    let mut points = Vec::with_capacity(knobs.len());
    for (lambda, gamma) in knobs {
        let p = MismatchParams::new(sigma2, alpha, lambda, gamma)?;
        points.push(mismatch_point(&p, ch)?);
    }
    Ok(pareto_filter(&points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemSpec;
    use crate::schemes::{
        theorem3_evaluate, theorem3_feasible, weak_user_optimal, FEASIBILITY_TOL,
    };

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs()
    }

    fn ch(p: f64, ns: f64, nw: f64) -> BroadcastChannel {
        BroadcastChannel::new(p, ns, nw).unwrap()
    }

    fn mp(alpha: f64, lambda: f64, gamma: f64) -> MismatchParams {
        MismatchParams::new(1.0, alpha, lambda, gamma).unwrap()
    }

    #[test]
    fn zero_power_gives_source_variance() {
        let c = ch(0.0, 0.1, 1.0);
        for (alpha, f) in [(0.5, bc_point as fn(&_, &_) -> _), (2.0, be_point)] {
            let pt = f(&mp(alpha, 0.3, 0.7), &c).unwrap();
            assert!(close(pt.d_s, 1.0, 1e-15) && close(pt.d_w, 1.0, 1e-15));
        }
    }

    #[test]
    fn contraction_all_uncoded_corner() {
        let pt = bc_point(&mp(0.5, 1.0, 0.0), &ch(1.0, 0.1, 1.0)).unwrap();
        assert!(close(pt.d_w, 0.75, 1e-14));
        assert!(close(pt.d_s, 0.5 * 0.1 / 1.1 + 0.5, 1e-14));
        assert!(close(pt.d_s, 0.545_454_545_454_545_4, 1e-14));
    }

    #[test]
    fn expansion_full_uncoded_power() {
        let c = ch(1.0, 0.01, 1.0);
        for lam in [0.0, 0.4, 1.0] {
            let pt = be_point(&mp(2.0, lam, 1.0), &c).unwrap();
            assert!(close(pt.d_w, 1.0 / 3.0, 1e-14));
            assert!(close(pt.d_s, 1.0 / 201.0, 1e-14));
        }
    }

    #[test]
    fn expansion_flat_allocation_expression() {
        // gamma = 1/alpha: every sub-channel gets P, and the expression reduces to
        // sigma^2 / ((1+P/N_w)/(1+lambda P/N_w))^(alpha-1) / (1+P/N_w) for the weak user.
        let (a, lam) = (2.0, 0.5);
        let pt = be_point(&mp(a, lam, 1.0 / a), &ch(1.0, 0.01, 1.0)).unwrap();
        let d_w = 1.0 / ((2.0 / 1.5f64).powf(a - 1.0) * 2.0);
        let d_s = 1.0 / ((2.0 / 1.5f64).powf(a - 1.0) * 101.0 * (51.0f64).powf(a - 1.0));
        assert!(close(pt.d_w, d_w, 1e-14));
        assert!(close(pt.d_s, d_s, 1e-14));
    }

    #[test]
    fn wrong_alpha_range_is_rejected() {
        let c = ch(1.0, 0.1, 1.0);
        assert!(matches!(
            bc_point(&mp(2.0, 0.5, 0.5), &c),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            be_point(&mp(0.5, 0.5, 0.5), &c),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(matches!(
            bc_substitution(&mp(0.5, 0.5, 0.5), &c, 3, 1),
            Err(Error::AlphaMismatch { .. })
        ));
    }

    fn consistent(alpha: f64, k: usize, m: usize, lam: f64, gam: f64, c: &BroadcastChannel) {
        let p = mp(alpha, lam, gam);
        let (params, closed) = if alpha < 1.0 {
            (
                bc_substitution(&p, c, k, m).unwrap(),
                bc_point(&p, c).unwrap(),
            )
        } else {
            (
                be_substitution(&p, c, k, m).unwrap(),
                be_point(&p, c).unwrap(),
            )
        };
        let spec = ProblemSpec::white(1.0, k, m, *c).unwrap();
        let report = theorem3_feasible(&spec, &params, FEASIBILITY_TOL).unwrap();
        assert!(report.feasible, "{alpha} {lam} {gam} {report:?}");
        let general = theorem3_evaluate(&spec, &params).unwrap();
        assert!(
            close(general.d_s, closed.d_s, 1e-10),
            "{general:?} {closed:?}"
        );
        assert!(
            close(general.d_w, closed.d_w, 1e-10),
            "{general:?} {closed:?}"
        );
    }

    #[test]
    fn contraction_substitution_matches_closed_form() {
        let c = ch(1.0, 0.1, 1.0);
        consistent(0.5, 2, 1, 0.5, 0.5, &c);
        consistent(0.75, 4, 3, 1.0, 1.0, &c);
        let p = bc_substitution(&mp(0.75, 1.0, 1.0), &c, 4, 3).unwrap();
        assert_eq!(p.p_dprime, p.p_prime);
    }

    #[test]
    fn contraction_substitution_without_uncoded_layer() {
        let c = ch(1.0, 0.1, 1.0);
        let params = bc_substitution(&mp(0.5, 0.0, 0.37), &c, 2, 1).unwrap();
        assert_eq!(params.d[0], 1.0);
        consistent(0.5, 2, 1, 0.0, 0.37, &c);
    }

    #[test]
    fn expansion_substitution_matches_closed_form() {
        let c = ch(1.0, 0.01, 1.0);
        consistent(2.0, 1, 2, 0.6, 0.3, &c);
        let p = be_substitution(&mp(1.5, 0.5, 1.0 / 1.5), &c, 2, 3).unwrap();
        for pm in &p.p {
            assert!(close(*pm, 1.0, 1e-14));
        }
    }

    #[test]
    fn expansion_substitution_without_refinement() {
        // lambda = 0: no refinement power, so D'' = D; the excess band carries
        // only common rate, so D' = sigma^2 / (1 + P_e/N_w)^(alpha-1).
        let c = ch(1.0, 0.01, 1.0);
        let p = be_substitution(&mp(2.0, 0.0, 0.5), &c, 1, 2).unwrap();
        assert_eq!(p.d_dprime[0], p.d[0]);
        assert!(close(p.d_prime[0], 1.0 / 2.0, 1e-14));
    }

    #[test]
    fn gap_examples() {
        let g = mp_gap_strong_opt(1.0, &ch(1.0, 0.01, 1.0), 2.0).unwrap();
        assert!(close(g, 1.0 / (101.0 * 101.0 * 2.0), 1e-13));
        assert!(close(g, 4.901_480_247_034_604e-5, 1e-12));
        let g = mp_gap_strong_opt(1.0, &ch(1.0, 0.1, 1.0), 0.5).unwrap();
        assert!(close(g, 0.5 * 0.1 / 2.0 * (1.0 - 11f64.powf(-0.5)), 1e-14));
        assert!((g - 0.01746).abs() < 1e-5);
        assert!(mp_gap_strong_opt(1.0, &ch(1.0, 1e-12, 1.0), 0.5).unwrap() < 1e-11);
        assert!(mp_gap_strong_opt(1.0, &ch(1.0, 0.1, 1.0), 1.0).is_err());
    }

    #[test]
    fn extreme_knobs_hit_point_to_point_optima() {
        let c = ch(1.0, 0.01, 1.0);
        for alpha in [0.25, 0.5, 2.0, 3.0] {
            let [weak, strong] = extreme_knobs(alpha, &c).unwrap();
            let w = mismatch_point(&mp(alpha, weak.0, weak.1), &c).unwrap();
            let s = mismatch_point(&mp(alpha, strong.0, strong.1), &c).unwrap();
            assert!(close(w.d_w, 2f64.powf(-alpha), 1e-12), "{alpha} {w:?}");
            assert!(close(s.d_s, 101f64.powf(-alpha), 1e-12), "{alpha} {s:?}");
        }
    }

    #[test]
    fn frontier_endpoints_and_outer_bound() {
        let c = ch(1.0, 0.01, 1.0);
        for (alpha, k, m) in [(0.5, 2, 1), (2.0, 1, 2)] {
            let grid = MismatchGrid {
                points: 201,
                include_extremes: false,
            };
            let front = mismatch_frontier(1.0, alpha, &c, &grid).unwrap();
            let ds_star = 101f64.powf(-alpha);
            let dw_star = 2f64.powf(-alpha);
            for p in &front {
                assert!(p.d_s >= ds_star * (1.0 - 1e-12) && p.d_w >= dw_star * (1.0 - 1e-12));
            }
            let min_w = front.last().unwrap();
            let min_s = front.first().unwrap();
            assert!(close(min_w.d_w, dw_star, 2e-3), "{min_w:?}");
            assert!(close(min_s.d_s, ds_star, 2e-3), "{min_s:?}");
            let spec = ProblemSpec::white(1.0, k, m, c).unwrap();
            assert!(close(min_w.d_w, weak_user_optimal(&spec).d_w, 2e-3));
        }
    }
}
