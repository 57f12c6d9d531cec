use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extremes::{theorem1_params, theorem2_params};
use super::{evaluate_unchecked, theorem3_feasible, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::frontier::pareto_filter_eps;
use crate::model::{ProblemSpec, Scheme, SchemeParams, SchemePoint, Theorem3Params};
use crate::ratedist::reverse_waterfill;

/// Largest `K` and `M` accepted by [`theorem3_optimize`].
pub const MAX_DIMENSION: usize = 6;

/// Search resolution for [`theorem3_optimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeGrid {
    /// Grid points per continuous axis.
    pub points_per_axis: usize,
    /// Local refinement passes, each halving the step around the incumbent.
    pub refine_passes: usize,
    /// Upper bound on coordinate sweeps over all axes.
    pub max_sweeps: usize,
}

impl Default for OptimizeGrid {
    fn default() -> Self {
        Self {
            points_per_axis: 33,
            refine_passes: 1,
            max_sweeps: 8,
        }
    }
}

/// Free knobs for a fixed `(L, K')`, all in `[0, 1]`:
/// `shares` (one per sub-channel), `common` (`P'_m / P_m` for `m >= L`),
/// `dirty` (`P''_m / P'_m` for `L <= m < K'`) and one `tilt` that trades the
/// coarse-layer distortions between the two users.
#[derive(Debug, Clone, PartialEq)]
struct Knobs(Vec<f64>);

struct Layout {
    l: usize,
    kp: usize,
    m: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.m + (self.m - self.l) + (self.kp - self.l) + 1
    }
    fn share(&self, x: &Knobs, m: usize) -> f64 {
        x.0[m]
    }
    fn common(&self, x: &Knobs, m: usize) -> f64 {
        x.0[self.m + m - self.l]
    }
    fn dirty(&self, x: &Knobs, m: usize) -> f64 {
        x.0[self.m + (self.m - self.l) + m - self.l]
    }
    fn tilt(&self, x: &Knobs) -> f64 {
        x.0[self.len() - 1]
    }
    fn generic_seed(&self, w: f64) -> Knobs {
        let mut v = vec![1.0; self.m];
        v.extend(std::iter::repeat_n(
            0.5,
            (self.m - self.l) + (self.kp - self.l),
        ));
        v.push(w);
        Knobs(v)
    }
    fn seed_from(&self, params: &Theorem3Params, tilt: f64) -> Knobs {
        let mut v = vec![1.0; self.m];
        for m in self.l..self.m {
            let p = params.p[m];
            v.push(if p > 0.0 {
                params.p_prime_at(m) / p
            } else {
                0.0
            });
        }
        for m in self.l..self.kp {
            let pp = params.p_prime_at(m);
            v.push(if pp > 0.0 {
                params.p_dprime_at(m) / pp
            } else {
                0.0
            });
        }
        v.push(tilt);
        Knobs(v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect())
    }
}

/// Builds a parameter vector that meets every condition by construction:
/// middle distortions come from the equality condition, and the coarse and
/// refinement layers are water-filled at exactly the available rates.
fn realize(spec: &ProblemSpec, lay: &Layout, x: &Knobs) -> Theorem3Params {
    let (l, kp, m_total) = (lay.l, lay.kp, lay.m);
    let k_total = spec.components();
    let var = spec.variances();
    let (ns, nw) = (spec.noise_strong(), spec.noise_weak());
    let budget = m_total as f64 * spec.power();

    let share_sum: f64 = (0..m_total).map(|m| lay.share(x, m)).sum();
    let p: Vec<f64> = if share_sum > 0.0 {
        (0..m_total)
            .map(|m| budget * lay.share(x, m) / share_sum)
            .collect()
    } else {
        vec![spec.power(); m_total]
    };
    let p_prime: Vec<f64> = (l..m_total).map(|m| lay.common(x, m) * p[m]).collect();
    let p_dprime: Vec<f64> = (l..kp).map(|m| lay.dirty(x, m) * p_prime[m - l]).collect();

    let mut d = vec![0.0; k_total];
    for k in l..kp {
        let (pp, ppp) = (p_prime[k - l], p_dprime[k - l]);
        d[k] = var[k] / (1.0 + (pp - ppp) / (ppp + ns));
    }

    let common_rate: f64 = (l..m_total)
        .map(|m| {
            let pp = p_prime[m - l];
            0.5 * ((p[m] - pp) / (pp + nw)).ln_1p()
        })
        .sum();
    let refine_rate: f64 = (l..kp)
        .map(|m| 0.5 * (p_dprime[m - l] / ns).ln_1p())
        .chain((kp..m_total).map(|m| 0.5 * (p_prime[m - l] / ns).ln_1p()))
        .sum();

    let coarse: Vec<usize> = (0..l).chain(kp..k_total).collect();
    let mut d_prime = vec![0.0; coarse.len()];
    let mut d_dprime = vec![0.0; l];
    if !coarse.is_empty() {
        let theta = lay.tilt(x);
        let strong_gain = |k: usize| if k < l { 1.0 + p[k] / ns } else { 1.0 };
        let weak_gain = |k: usize| if k < l { 1.0 + p[k] / nw } else { 1.0 };
        // Weighted variances: theta = 0 is the weak user's view, theta = 1 the strong user's.
        let tilted: Vec<f64> = coarse
            .iter()
            .map(|&k| {
                let weak = var[k] / weak_gain(k);
                let strong = var[k] / strong_gain(k);
                weak.powf(1.0 - theta) * strong.powf(theta)
            })
            .collect();
        let wf = reverse_waterfill(&tilted, common_rate).expect("positive weighted variances");
        for (i, &k) in coarse.iter().enumerate() {
            d_prime[i] = (var[k] * wf.distortions[i] / tilted[i]).min(var[k]);
        }
        let side_info: Vec<f64> = coarse
            .iter()
            .enumerate()
            .map(|(i, &k)| d_prime[i] / strong_gain(k))
            .collect();
        let refined =
            reverse_waterfill(&side_info, refine_rate).expect("positive side-information");
        for (i, &k) in coarse.iter().enumerate() {
            d[k] = refined.distortions[i].min(side_info[i]);
            if k < l {
                d_dprime[k] = side_info[i];
            }
        }
    }

    Theorem3Params {
        l,
        k_prime: kp,
        p,
        p_prime,
        p_dprime,
        d,
        d_prime,
        d_dprime,
    }
}

struct Candidate {
    d_s: f64,
    d_w: f64,
    params: Theorem3Params,
}

/// Pareto archive pruned whenever it grows past a threshold.
struct Archive {
    items: Vec<(f64, f64, usize)>,
    params: Vec<Theorem3Params>,
}

impl Archive {
    const PRUNE_AT: usize = 2048;

    fn new() -> Self {
        Self {
            items: Vec::new(),
            params: Vec::new(),
        }
    }

    fn push(&mut self, c: Candidate) {
        self.items.push((c.d_s, c.d_w, self.params.len()));
        self.params.push(c.params);
        if self.items.len() >= Self::PRUNE_AT {
            self.prune();
        }
    }

    fn prune(&mut self) {
        let kept = crate::frontier::pareto_filter(&self.items);
        let mut params = Vec::with_capacity(kept.len());
        let mut items = Vec::with_capacity(kept.len());
        for (i, (s, w, idx)) in kept.into_iter().enumerate() {
            params.push(std::mem::take(&mut self.params[idx]));
            items.push((s, w, i));
        }
        self.items = items;
        self.params = params;
    }

    fn into_candidates(mut self) -> Vec<Candidate> {
        self.prune();
        self.items
            .into_iter()
            .zip(self.params)
            .map(|((d_s, d_w, _), params)| Candidate { d_s, d_w, params })
            .collect()
    }
}

impl crate::frontier::Tradeoff for (f64, f64, usize) {
    fn d_s(&self) -> f64 {
        self.0
    }
    fn d_w(&self) -> f64 {
        self.1
    }
}

struct Search<'a> {
    spec: &'a ProblemSpec,
    lay: Layout,
    weight: f64,
    archive: Archive,
}

impl Search<'_> {
    fn score(&mut self, x: &Knobs) -> f64 {
        let params = realize(self.spec, &self.lay, x);
        let (d_s, d_w) = evaluate_unchecked(self.spec, &params);
        if !(d_s.is_finite() && d_w.is_finite()) {
            return f64::INFINITY;
        }
        self.archive.push(Candidate { d_s, d_w, params });
        self.weight * d_s + (1.0 - self.weight) * d_w
    }

    /// Best value of one axis over `points` samples of `[lo, hi]`.
    fn line_search(
        &mut self,
        x: &mut Knobs,
        axis: usize,
        lo: f64,
        hi: f64,
        points: usize,
        best: &mut f64,
    ) -> bool {
        let mut improved = false;
        let mut best_value = x.0[axis];
        for i in 0..points {
            let v = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let mut trial = x.clone();
            trial.0[axis] = v.clamp(0.0, 1.0);
            let s = self.score(&trial);
            if s < *best {
                *best = s;
                best_value = trial.0[axis];
                improved = true;
            }
        }
        x.0[axis] = best_value;
        improved
    }

    fn run(&mut self, seed: Knobs, grid: &OptimizeGrid) {
        let mut x = seed;
        let mut best = self.score(&x);
        let n = self.lay.len();
        for _ in 0..grid.max_sweeps {
            let mut improved = false;
            for axis in 0..n {
                improved |=
                    self.line_search(&mut x, axis, 0.0, 1.0, grid.points_per_axis, &mut best);
            }
            if !improved {
                break;
            }
        }
        let mut step = 1.0 / (grid.points_per_axis - 1) as f64;
        for _ in 0..grid.refine_passes {
            step /= 2.0;
            for axis in 0..n {
                let c = x.0[axis];
                let (lo, hi) = ((c - 2.0 * step).max(0.0), (c + 2.0 * step).min(1.0));
                self.line_search(&mut x, axis, lo, hi, grid.points_per_axis, &mut best);
            }
        }
    }
}

/// Searches the general scheme for the weighted objective
/// `w * D_s + (1 - w) * D_w` over every `(L, K')` and returns the
/// non-dominated set of every point visited along the way.
pub fn theorem3_optimize(
    spec: &ProblemSpec,
    w: f64,
    grid: &OptimizeGrid,
) -> Result<Vec<SchemePoint>> {
    if grid.points_per_axis < 3 {
        return Err(Error::GridTooCoarse(grid.points_per_axis));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidArgument(format!(
            "weight must lie in [0, 1], got {w}"
        )));
    }
    let (k_total, m_total) = (spec.components(), spec.subchannels());
    if k_total > MAX_DIMENSION || m_total > MAX_DIMENSION {
        return Err(Error::InvalidArgument(format!(
            "search supports K, M <= {MAX_DIMENSION}, got K = {k_total}, M = {m_total}"
        )));
    }
    // Keep both objectives in play so the archive never loses its tie-breaker.
    let weight = w.clamp(1e-9, 1.0 - 1e-9);

    let (t1, _) = theorem1_params(spec);
    let (t2, _) = theorem2_params(spec);
    let pairs: Vec<(usize, usize)> = (0..=k_total.min(m_total))
        .flat_map(|kp| (0..=kp).map(move |l| (l, kp)))
        .collect();

    let per_pair: Vec<Vec<Candidate>> = pairs
        .par_iter()
        .map(|&(l, kp)| {
            let lay = Layout { l, kp, m: m_total };
            let mut seeds = vec![lay.generic_seed(w)];
            if (t1.l, t1.k_prime) == (l, kp) {
                seeds.push(lay.seed_from(&t1, 0.0));
            }
            if (t2.l, t2.k_prime) == (l, kp) {
                seeds.push(lay.seed_from(&t2, 1.0));
            }
            let mut search = Search {
                spec,
                lay,
                weight,
                archive: Archive::new(),
            };
            for seed in seeds {
                search.run(seed, grid);
            }
            search.archive.into_candidates()
        })
        .collect();

    let mut points = Vec::new();
    for c in per_pair.into_iter().flatten() {
        if theorem3_feasible(spec, &c.params, FEASIBILITY_TOL)?.feasible {
            points.push(SchemePoint::new(
                c.d_s,
                c.d_w,
                Scheme::General,
                SchemeParams::Theorem3(Box::new(c.params)),
            ));
        }
    }
    Ok(pareto_filter_eps(&points, 1e-12 * spec.mean_variance()))
}

#[cfg(test)]
mod tests {
    use super::super::{strong_user_optimal, weak_user_optimal};
    use super::*;

    fn spec_k2() -> ProblemSpec {
        ProblemSpec::new(vec![1.0, 0.25], 2, 1.0, 0.1, 1.0).unwrap()
    }

    fn small_grid() -> OptimizeGrid {
        OptimizeGrid {
            points_per_axis: 9,
            refine_passes: 1,
            max_sweeps: 4,
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = OptimizeGrid {
            points_per_axis: 2,
            ..OptimizeGrid::default()
        };
        assert_eq!(
            theorem3_optimize(&spec_k2(), 0.5, &grid),
            Err(Error::GridTooCoarse(2))
        );
    }

    #[test]
    fn extremes_are_reached() {
        let spec = spec_k2();
        let weak = weak_user_optimal(&spec);
        let strong = strong_user_optimal(&spec);
        let front0 = theorem3_optimize(&spec, 0.0, &small_grid()).unwrap();
        let best_w = front0.iter().map(|p| p.d_w).fold(f64::INFINITY, f64::min);
        assert!(
            (best_w - weak.d_w).abs() <= 1e-9 * weak.d_w,
            "{best_w} {}",
            weak.d_w
        );
        let front1 = theorem3_optimize(&spec, 1.0, &small_grid()).unwrap();
        let best_s = front1.iter().map(|p| p.d_s).fold(f64::INFINITY, f64::min);
        assert!(
            (best_s - strong.d_s).abs() <= 1e-9 * strong.d_s,
            "{best_s} {}",
            strong.d_s
        );
    }

    #[test]
    fn output_is_non_dominated_and_feasible() {
        let spec = ProblemSpec::new(vec![1.0, 0.4, 0.1], 2, 2.0, 0.2, 1.0).unwrap();
        let front = theorem3_optimize(&spec, 0.5, &small_grid()).unwrap();
        assert!(!front.is_empty());
        for p in &front {
            assert!(p.d_s <= p.d_w * (1.0 + 1e-12));
            for q in &front {
                assert!(!(q.d_s <= p.d_s && q.d_w <= p.d_w && q != p));
            }
            let SchemeParams::Theorem3(params) = &p.params else {
                panic!()
            };
            assert!(
                theorem3_feasible(&spec, params, FEASIBILITY_TOL)
                    .unwrap()
                    .feasible
            );
        }
    }

    #[test]
    fn equal_noise_collapses_to_one_point() {
        let spec = ProblemSpec::new(vec![1.0, 0.25], 2, 1.0, 0.5, 0.5).unwrap();
        let dw = weak_user_optimal(&spec).d_w;
        let front = theorem3_optimize(&spec, 0.5, &small_grid()).unwrap();
        assert_eq!(front.len(), 1, "{front:?}");
        assert!((front[0].d_s - dw).abs() <= 1e-10 * dw);
        assert!((front[0].d_w - dw).abs() <= 1e-10 * dw);
    }

    #[test]
    fn result_is_deterministic() {
        let spec = spec_k2();
        let a = theorem3_optimize(&spec, 0.3, &small_grid()).unwrap();
        let b = theorem3_optimize(&spec, 0.3, &small_grid()).unwrap();
        assert_eq!(a, b);
    }
}
