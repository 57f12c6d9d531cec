//! Pareto filtering and time-sharing hulls of `(D_s, D_w)` point sets.

use crate::model::SchemePoint;

/// Anything with a strong-user and a weak-user distortion.
pub trait Tradeoff {
    fn d_s(&self) -> f64;
    fn d_w(&self) -> f64;
}

impl Tradeoff for SchemePoint {
    fn d_s(&self) -> f64 {
        self.d_s
    }
    fn d_w(&self) -> f64 {
        self.d_w
    }
}

impl Tradeoff for (f64, f64) {
    fn d_s(&self) -> f64 {
        self.0
    }
    fn d_w(&self) -> f64 {
        self.1
    }
}

fn lex_order<T: Tradeoff>(a: &T, b: &T) -> std::cmp::Ordering {
    a.d_s()
        .total_cmp(&b.d_s())
        .then_with(|| a.d_w().total_cmp(&b.d_w()))
}

/// Non-dominated subset, sorted by ascending `D_s` (so descending `D_w`).
/// Exact duplicates keep the first occurrence after a stable sort.
pub fn pareto_filter<T: Tradeoff + Clone>(points: &[T]) -> Vec<T> {
    pareto_filter_eps(points, 0.0)
}

/// Like [`pareto_filter`], but a point is also dropped when another kept
/// point is within `eps` of dominating it. Only meant for thinning plots.
pub fn pareto_filter_eps<T: Tradeoff + Clone>(points: &[T], eps: f64) -> Vec<T> {
    let mut sorted: Vec<&T> = points.iter().collect();
    sorted.sort_by(|a, b| lex_order(*a, *b));

    let mut kept: Vec<&T> = Vec::new();
    let mut best_dw = f64::INFINITY;
    for p in sorted {
        if p.d_w() < best_dw - eps {
            best_dw = p.d_w();
            kept.push(p);
        }
    }
    if eps > 0.0 {
        // A later point with almost the same D_s and a smaller D_w absorbs
        // the earlier one.
        let mut thinned: Vec<&T> = Vec::with_capacity(kept.len());
        for p in kept.into_iter().rev() {
            match thinned.last() {
                Some(q) if q.d_s() <= p.d_s() + eps => {}
                _ => thinned.push(p),
            }
        }
        thinned.reverse();
        kept = thinned;
    }
    kept.into_iter().cloned().collect()
}

/// Vertices of the lower-left convex hull of the Pareto set, sorted by
/// ascending `D_s`. Time sharing between consecutive vertices achieves the
/// segment joining them. Collinear points on the boundary are kept.
pub fn hull_with_timesharing<T: Tradeoff + Clone>(points: &[T]) -> Vec<T> {
    let pareto = pareto_filter(points);
    let mut hull: Vec<T> = Vec::with_capacity(pareto.len());
    for p in pareto {
        while hull.len() >= 2 {
            let o = &hull[hull.len() - 2];
            let a = &hull[hull.len() - 1];
            let cross = (a.d_s() - o.d_s()) * (p.d_w() - o.d_w())
                - (a.d_w() - o.d_w()) * (p.d_s() - o.d_s());
            if cross < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_pareto(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .filter(|p| {
                !points
                    .iter()
                    .any(|q| q.0 <= p.0 && q.1 <= p.1 && (q.0 < p.0 || q.1 < p.1))
            })
            .collect();
        out.sort_by(lex_order);
        out.dedup();
        out
    }

    #[test]
    fn incomparable_points_are_kept() {
        assert_eq!(
            pareto_filter(&[(1.0, 2.0), (2.0, 1.0)]),
            vec![(1.0, 2.0), (2.0, 1.0)]
        );
    }

    #[test]
    fn dominated_point_is_dropped() {
        assert_eq!(pareto_filter(&[(1.0, 2.0), (1.0, 3.0)]), vec![(1.0, 2.0)]);
        assert_eq!(pareto_filter(&[(1.0, 2.0), (1.0, 2.0)]), vec![(1.0, 2.0)]);
    }

    #[test]
    fn ten_thousand_points_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let points: Vec<(f64, f64)> = (0..10_000)
            .map(|_| {
                let x: f64 = rng.random_range(0.01..1.0);
                // Points scattered above the curve x * y = 0.01.
                (x, 0.01 / x + rng.random_range(0.0..0.05))
            })
            .collect();
        assert_eq!(pareto_filter(&points), brute_force_pareto(&points));
    }

    #[test]
    fn eps_thinning_collapses_near_duplicates() {
        let pts = [(0.5, 0.5 + 1e-15), (0.5 + 1e-15, 0.5), (0.4, 0.9)];
        assert_eq!(pareto_filter(&pts).len(), 3);
        let thin = pareto_filter_eps(&pts, 1e-12);
        assert_eq!(thin, vec![(0.4, 0.9), (0.5, 0.5 + 1e-15)]);
        let reversed = pareto_filter_eps(&[(0.5, 0.5 - 1e-15), (0.5 - 1e-15, 0.5)], 1e-12);
        assert_eq!(reversed, vec![(0.5 - 1e-15, 0.5)]);
    }

    #[test]
    fn two_point_hull() {
        let pts = [(1.0, 2.0), (2.0, 1.0)];
        assert_eq!(hull_with_timesharing(&pts), pts.to_vec());
    }

    #[test]
    fn collinear_middle_point_stays() {
        let pts = [(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)];
        assert_eq!(hull_with_timesharing(&pts), pts.to_vec());
    }

    #[test]
    fn concave_middle_point_is_removed() {
        let pts = [(1.0, 3.0), (2.0, 2.5), (3.0, 1.0)];
        assert_eq!(hull_with_timesharing(&pts), vec![(1.0, 3.0), (3.0, 1.0)]);
    }

    /// Exhaustive check: a Pareto point is a hull vertex iff it is not
    /// strictly above the chord of any two other Pareto points around it.
    fn brute_force_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let pareto = brute_force_pareto(points);
        pareto
            .iter()
            .copied()
            .filter(|&p| {
                !pareto.iter().any(|&a| {
                    pareto.iter().any(|&b| {
                        if !(a.0 < p.0 && p.0 < b.0) {
                            return false;
                        }
                        let t = (p.0 - a.0) / (b.0 - a.0);
                        let chord = a.1 + t * (b.1 - a.1);
                        p.1 > chord + 1e-12
                    })
                })
            })
            .collect()
    }

    #[test]
    fn random_cloud_hull_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let points: Vec<(f64, f64)> = (0..60)
                .map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
                .collect();
            assert_eq!(hull_with_timesharing(&points), brute_force_hull(&points));
        }
    }

    proptest! {
        #[test]
        fn pareto_is_idempotent_subset(
            raw in prop::collection::vec((0.001f64..10.0, 0.001f64..10.0), 1..200)
        ) {
            let once = pareto_filter(&raw);
            prop_assert_eq!(pareto_filter(&once), once.clone());
            for p in &once {
                prop_assert!(raw.contains(p));
                for q in &once {
                    let dominates = q.0 <= p.0 && q.1 <= p.1 && q != p;
                    prop_assert!(!dominates);
                }
            }
        }

        #[test]
        fn hull_is_convex_subset(
            raw in prop::collection::vec((0.001f64..10.0, 0.001f64..10.0), 1..200)
        ) {
            let pareto = pareto_filter(&raw);
            let hull = hull_with_timesharing(&raw);
            for w in hull.windows(3) {
                let cross = (w[1].0 - w[0].0) * (w[2].1 - w[0].1)
                    - (w[1].1 - w[0].1) * (w[2].0 - w[0].0);
                prop_assert!(cross >= 0.0);
            }
            for p in &hull {
                prop_assert!(pareto.contains(p));
            }
        }
    }
}
