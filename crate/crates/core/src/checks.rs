//! Self-checks run by `hda check` and by the acceptance test target.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baselines::{
    analog_digital_ratio, beta_bar, one_bit_slacks, prop1_gap, separation_point,
};
use crate::error::Result;
use crate::frontier::Tradeoff;
use crate::mcsim::{
    simulate_general_chain, simulate_strong_opt_chain, simulate_uncoded, simulate_weak_opt_chain,
    McConfig, McReport,
};
use crate::mismatch::{
    bc_point, bc_substitution, be_point, be_substitution, extreme_knobs, mismatch_frontier,
    mismatch_point, mp_gap_strong_opt, MismatchGrid,
};
use crate::model::{BroadcastChannel, MismatchParams, ProblemSpec, SeparationParams, User};
use crate::ratedist::{point_to_point_optimum, reverse_waterfill};
use crate::schemes::{
    strong_user_optimal, theorem1_params, theorem2_params, theorem3_evaluate, theorem3_feasible,
    weak_user_optimal, FEASIBILITY_TOL,
};

const SEED: u64 = 0x5eed_0001;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

/// Which group of checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Analytic,
    MonteCarlo,
    All,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Suite::Analytic),
            "montecarlo" => Ok(Suite::MonteCarlo),
            "all" => Ok(Suite::All),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown suite `{other}`"
            ))),
        }
    }
}

fn timed(
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CheckResult {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail.push_str(&format!("; exceeded {:.0} s limit", limit.as_secs_f64()));
        }
    }
    CheckResult {
        id,
        name,
        passed,
        detail,
        elapsed,
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// The three figure settings: `(alpha, K, M, channel)`.
pub fn figure_settings() -> Vec<(f64, usize, usize, BroadcastChannel)> {
    let loud = BroadcastChannel::from_snr(db(20.0), db(0.0)).expect("valid");
    let quiet = BroadcastChannel::from_snr(db(4.0), db(0.0)).expect("valid");
    vec![(0.5, 2, 1, loud), (2.0, 1, 2, loud), (1.5, 2, 3, quiet)]
}

/// Closed forms against the general scheme under the parameter substitution.
pub fn check_substitution_consistency() -> CheckResult {
    timed(
        1,
        "closed-form/general-scheme consistency",
        Some(Duration::from_secs(5)),
        || {
            let ratios = [(4, 1), (2, 1), (4, 3), (2, 3), (1, 2), (1, 3)];
            let channels = [
                BroadcastChannel::new(1.0, 0.01, 1.0)?,
                BroadcastChannel::new(1.0, db(-4.0), 1.0)?,
            ];
            let (mut worst, mut infeasible, mut count) = (0.0f64, 0usize, 0usize);
            for ch in &channels {
                for &(k, m) in &ratios {
                    let alpha = m as f64 / k as f64;
                    let spec = ProblemSpec::white(1.0, k, m, *ch)?;
                    for i in 0..=10 {
                        for j in 0..=10 {
                            let p =
                                MismatchParams::new(1.0, alpha, i as f64 / 10.0, j as f64 / 10.0)?;
                            let (params, closed) = if alpha < 1.0 {
                                (bc_substitution(&p, ch, k, m)?, bc_point(&p, ch)?)
                            } else {
                                (be_substitution(&p, ch, k, m)?, be_point(&p, ch)?)
                            };
                            count += 1;
                            if !theorem3_feasible(&spec, &params, FEASIBILITY_TOL)?.feasible {
                                infeasible += 1;
                                continue;
                            }
                            let general = theorem3_evaluate(&spec, &params)?;
                            worst = worst
                                .max(rel_err(general.d_s, closed.d_s))
                                .max(rel_err(general.d_w, closed.d_w));
                        }
                    }
                }
            }
            Ok((
                infeasible == 0 && worst <= 1e-10,
                format!("{count} points, {infeasible} infeasible, max rel err {worst:.2e}"),
            ))
        },
    )
}

/// Random spec with `K = M <= 4`, variances over three decades, SNRs in 0-30 dB.
fn random_square_spec(rng: &mut ChaCha8Rng) -> Result<ProblemSpec> {
    let k = rng.random_range(1..=4);
    let var: Vec<f64> = (0..k)
        .map(|_| 10f64.powf(rng.random_range(-3.0..0.0)))
        .collect();
    let a: f64 = rng.random_range(0.0..30.0);
    let b: f64 = rng.random_range(0.0..30.0);
    let ch = BroadcastChannel::from_snr(db(a.max(b)), db(a.min(b)))?;
    ProblemSpec::new(var, k, ch.power, ch.noise_strong, ch.noise_weak)
}

/// Extreme-point evaluators against the general scheme.
pub fn check_extreme_identities() -> CheckResult {
    timed(2, "extreme-point identities", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let spec = random_square_spec(&mut rng)?;
            let pairs = [
                (weak_user_optimal(&spec), theorem1_params(&spec).0),
                (strong_user_optimal(&spec), theorem2_params(&spec).0),
            ];
            for (pt, params) in pairs {
                let general = theorem3_evaluate(&spec, &params)?;
                worst = worst
                    .max(rel_err(general.d_s, pt.d_s))
                    .max(rel_err(general.d_w, pt.d_w));
            }
        }
        Ok((
            worst <= 1e-12,
            format!("100 specs, max rel err {worst:.2e}"),
        ))
    })
}

/// Frontier bounds, endpoints and dominance over separation at the figure settings.
pub fn check_figure_settings() -> CheckResult {
    timed(
        3,
        "figure-setting reproduction",
        Some(Duration::from_secs(10)),
        || {
            let slack = 1e-12;
            let mut passed = true;
            let mut notes = Vec::new();
            for (alpha, k, m, ch) in figure_settings() {
                let spec = ProblemSpec::white(1.0, k, m, ch)?;
                let ds_star = point_to_point_optimum(&spec, User::Strong).total_distortion;
                let dw_star = point_to_point_optimum(&spec, User::Weak).total_distortion;

                let grid_only = mismatch_frontier(
                    1.0,
                    alpha,
                    &ch,
                    &MismatchGrid {
                        points: 201,
                        include_extremes: false,
                    },
                )?;
                let bounded = grid_only
                    .iter()
                    .all(|p| p.d_s >= ds_star * (1.0 - slack) && p.d_w >= dw_star * (1.0 - slack));
                let min_w = grid_only
                    .iter()
                    .map(|p| p.d_w)
                    .fold(f64::INFINITY, f64::min);
                let min_s = grid_only
                    .iter()
                    .map(|p| p.d_s)
                    .fold(f64::INFINITY, f64::min);
                let (ew, es) = (rel_err(min_w, dw_star), rel_err(min_s, ds_star));
                let endpoints = ew <= 2e-3 && es <= 2e-3;

                let full = mismatch_frontier(
                    1.0,
                    alpha,
                    &ch,
                    &MismatchGrid {
                        points: 201,
                        include_extremes: true,
                    },
                )?;
                let mut undominated = 0;
                for i in 0..=200 {
                    let sep = separation_point(&spec, &SeparationParams::new(i as f64 / 200.0)?);
                    let covered = full
                        .iter()
                        .any(|h| h.d_s() <= sep.d_s + slack && h.d_w() <= sep.d_w + slack);
                    if !covered {
                        undominated += 1;
                    }
                }
                passed &= bounded && endpoints && undominated == 0;
                notes.push(format!(
                "alpha={alpha}: bound {}, endpoint err (w {ew:.1e}, s {es:.1e}), {undominated} separation points undominated",
                if bounded { "ok" } else { "violated" }
            ));
            }
            Ok((passed, notes.join("; ")))
        },
    )
}

/// Gap formulas: positivity and size at the high-SNR figure settings.
pub fn check_gap_formulas() -> CheckResult {
    timed(4, "strong-optimal gap formulas", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
        let mut non_positive = 0;
        for _ in 0..1000 {
            let sigma2 = 10f64.powf(rng.random_range(-2.0..2.0));
            let p = 10f64.powf(rng.random_range(-2.0..3.0));
            let ns = 10f64.powf(rng.random_range(-3.0..1.0));
            let nw = ns * 10f64.powf(rng.random_range(0.0..3.0));
            let alpha = if rng.random_bool(0.5) {
                rng.random_range(0.05..0.99)
            } else {
                rng.random_range(1.01..5.0)
            };
            let g = mp_gap_strong_opt(sigma2, &BroadcastChannel::new(p, ns, nw)?, alpha)?;
            if !(g > 0.0 && g.is_finite()) {
                non_positive += 1;
            }
        }
        let mut passed = non_positive == 0;
        let mut notes = vec![format!("{non_positive}/1000 non-positive")];
        for (alpha, _, _, ch) in figure_settings() {
            let g = mp_gap_strong_opt(1.0, &ch, alpha)?;
            let [_, strong] = extreme_knobs(alpha, &ch)?;
            let d_w =
                mismatch_point(&MismatchParams::new(1.0, alpha, strong.0, strong.1)?, &ch)?.d_w;
            let ratio = g / d_w;
            let high_snr = ch.noise_strong < 0.05;
            if high_snr {
                passed &= ratio < 0.05;
            }
            notes.push(format!("alpha={alpha}: gap/D_w = {ratio:.3e}"));
        }
        Ok((passed, notes.join("; ")))
    })
}

/// Constant-gap bound for separation on white sources.
pub fn check_prop1() -> CheckResult {
    timed(5, "separation constant gap", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
        let (mut gap_fail, mut bit_fail, mut worst) = (0, 0, f64::NEG_INFINITY);
        for _ in 0..200 {
            let k = rng.random_range(1..=6);
            let m = rng.random_range(1..=6);
            let sigma2 = 10f64.powf(rng.random_range(-2.0..2.0));
            let p = 10f64.powf(rng.random_range(-2.0..3.0));
            let ns = 10f64.powf(rng.random_range(-3.0..1.0));
            let nw = ns * 10f64.powf(rng.random_range(0.0..3.0));
            let spec = ProblemSpec::white(sigma2, k, m, BroadcastChannel::new(p, ns, nw)?)?;
            let gap = prop1_gap(&spec)?;
            worst = worst.max(gap.strong_bits.max(gap.weak_bits) - gap.bound);
            if !gap.holds() {
                gap_fail += 1;
            }
            if one_bit_slacks(&spec, beta_bar(&spec))
                .iter()
                .any(|s| *s < -1e-12)
            {
                bit_fail += 1;
            }
        }
        Ok((
            gap_fail == 0 && bit_fail == 0,
            format!("{gap_fail} gap violations, {bit_fail} one-bit violations, max (gap - M/K) = {worst:.3} bits"),
        ))
    })
}

/// Analog over digital distortion at high SNR.
pub fn check_analog_ratio() -> CheckResult {
    timed(6, "analog/digital asymptote", None, || {
        let coloured = analog_digital_ratio(&[1.0, 0.04], 1e8, 1.0)?;
        let white = analog_digital_ratio(&[0.5, 0.5, 0.5], 1e8, 1.0)?;
        let e1 = rel_err(coloured.finite, 1.8);
        let e2 = rel_err(coloured.asymptotic, 1.8);
        let e3 = rel_err(white.finite, 1.0);
        Ok((
            e1 <= 5e-3 && e2 <= 1e-12 && e3 <= 5e-3,
            format!(
                "coloured finite {:.6} (asymptote {:.6}), white finite {:.6}",
                coloured.finite, coloured.asymptotic, white.finite
            ),
        ))
    })
}

/// The four simulations used by the Monte-Carlo criterion.
pub fn monte_carlo_runs(samples: usize, seed: u64) -> Result<Vec<McReport>> {
    let cfg = McConfig::new(samples, seed);
    let spec = ProblemSpec::new(vec![1.0, 0.25], 2, 1.0, 0.1, 1.0)?;
    let ch = BroadcastChannel::new(1.0, 0.1, 1.0)?;
    let p = MismatchParams::new(1.0, 0.5, 0.5, 0.5)?;
    let params = bc_substitution(&p, &ch, 2, 1)?;
    let bc_spec = ProblemSpec::white(1.0, 2, 1, ch)?;
    Ok(vec![
        simulate_uncoded(1.0, 1.0, 1.0, &cfg)?,
        simulate_weak_opt_chain(&spec, &cfg)?,
        simulate_strong_opt_chain(&spec, &cfg)?,
        simulate_general_chain(&bc_spec, &params, &cfg)?,
    ])
}

/// Simulated chains against their closed forms, plus determinism.
pub fn check_monte_carlo(samples: usize) -> CheckResult {
    timed(
        7,
        "monte-carlo chains",
        Some(Duration::from_secs(60)),
        || {
            let pool = |threads| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| crate::Error::InvalidArgument(e.to_string()))
            };
            let first = monte_carlo_runs(samples, SEED)?;
            let rerun = monte_carlo_runs(samples, SEED)?;
            let single = pool(1)?.install(|| monte_carlo_runs(samples, SEED))?;
            let quad = pool(4)?.install(|| monte_carlo_runs(samples, SEED))?;
            let deterministic = first == rerun && first == single && first == quad;
            let all_pass = first.iter().all(|r| r.pass);
            let notes: Vec<String> = first
                .iter()
                .map(|r| {
                    format!(
                        "{}: D_s {:.5} vs {:.5}, D_w {:.5} vs {:.5}{}",
                        r.scheme,
                        r.empirical_ds,
                        r.closedform_ds,
                        r.empirical_dw,
                        r.closedform_dw,
                        if r.pass { "" } else { " FAIL" }
                    )
                })
                .collect();
            Ok((
                deterministic && all_pass,
                format!(
                    "n={samples}, deterministic {deterministic}; {}",
                    notes.join("; ")
                ),
            ))
        },
    )
}

/// Reverse water-filling: rate accuracy, monotonicity and scale covariance.
pub fn check_waterfill() -> CheckResult {
    timed(8, "reverse water-filling", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
        let (mut worst_rate, mut monotone_fail, mut worst_scale) = (0.0f64, 0, 0.0f64);
        for _ in 0..500 {
            let k = rng.random_range(1..=10);
            let var: Vec<f64> = (0..k)
                .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
                .collect();
            let rate = 10f64.powf(rng.random_range(-2.0..1.5));
            let wf = reverse_waterfill(&var, rate)?;
            worst_rate = worst_rate.max(rel_err(wf.total_rate, rate));
            let more = reverse_waterfill(&var, rate * 1.1)?;
            if more.total_distortion > wf.total_distortion * (1.0 + 1e-12) {
                monotone_fail += 1;
            }
            let c = 10f64.powf(rng.random_range(-2.0..2.0));
            let scaled: Vec<f64> = var.iter().map(|v| v * c).collect();
            let ws = reverse_waterfill(&scaled, rate)?;
            worst_scale = worst_scale.max(rel_err(ws.total_distortion, c * wf.total_distortion));
        }
        Ok((
            worst_rate <= 1e-12 && monotone_fail == 0 && worst_scale <= 1e-10,
            format!(
                "max rate rel err {worst_rate:.2e}, {monotone_fail} monotonicity failures, max scale err {worst_scale:.2e}"
            ),
        ))
    })
}

/// Runs a suite; Monte-Carlo checks use `samples` draws.
pub fn run_suite(suite: Suite, samples: usize) -> Vec<CheckResult> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Analytic | Suite::All) {
        out.push(check_substitution_consistency());
        out.push(check_extreme_identities());
        out.push(check_figure_settings());
        out.push(check_gap_formulas());
        out.push(check_prop1());
        out.push(check_analog_ratio());
    }
    if matches!(suite, Suite::MonteCarlo | Suite::All) {
        out.push(check_monte_carlo(samples));
    }
    if matches!(suite, Suite::Analytic | Suite::All) {
        out.push(check_waterfill());
    }
    out
}
