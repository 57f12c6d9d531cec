use crate::model::{ProblemSpec, Scheme, SchemeParams, SchemePoint, Theorem3Params, User};
use crate::ratedist::{point_to_point_optimum, WaterfillResult};

/// Index ranges and water-filling solution behind an extreme point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeStructure {
    pub waterfill: WaterfillResult,
    pub l: usize,
    pub k_prime: usize,
}

fn structure(spec: &ProblemSpec, user: User) -> ExtremeStructure {
    let waterfill = point_to_point_optimum(spec, user);
    let snr_gain = 1.0 + spec.power() / spec.channel().noise(user);
    let var = spec.variances();
    let k_total = spec.components();
    let m_total = spec.subchannels();
    let uncoded = var
        .iter()
        .zip(&waterfill.distortions)
        .filter(|(s, d)| *s / *d >= snr_gain)
        .count();
    let active = var.iter().filter(|s| waterfill.mu <= **s).count();
    // Components are sorted, so both sets are prefixes.
    let k_prime = active.min(k_total).min(m_total);
    let l = uncoded.min(m_total).min(k_prime);
    ExtremeStructure {
        waterfill,
        l,
        k_prime,
    }
}

/// Parameters of the general scheme that realize the weak-user-optimal point.
pub fn theorem1_params(spec: &ProblemSpec) -> (Theorem3Params, ExtremeStructure) {
    let st = structure(spec, User::Weak);
    let (l, kp) = (st.l, st.k_prime);
    let (k_total, m_total) = (spec.components(), spec.subchannels());
    let var = spec.variances();
    let dist = &st.waterfill.distortions;
    let (p, ns, nw) = (spec.power(), spec.noise_strong(), spec.noise_weak());

    let mut params = Theorem3Params {
        l,
        k_prime: kp,
        p: vec![p; m_total],
        p_prime: vec![0.0; m_total - l],
        p_dprime: vec![0.0; kp - l],
        d: vec![0.0; k_total],
        d_prime: vec![0.0; l + k_total - kp],
        d_dprime: vec![0.0; l],
    };
    for k in 0..l {
        let dp = var[k].min(dist[k] * (1.0 + p / nw));
        params.d_prime[k] = dp;
        params.d_dprime[k] = dp / (1.0 + p / ns);
        params.d[k] = params.d_dprime[k];
    }
    for k in l..kp {
        let pp = (nw * (var[k] / dist[k] - 1.0)).clamp(0.0, p);
        params.p_prime[k - l] = pp;
        params.d[k] = var[k] / (1.0 + pp / ns);
    }
    for k in kp..k_total {
        *params.d_prime_at_mut(k) = dist[k];
        params.d[k] = dist[k];
    }
    (params, st)
}

/// Parameters of the general scheme that realize the strong-user-optimal point.
pub fn theorem2_params(spec: &ProblemSpec) -> (Theorem3Params, ExtremeStructure) {
    let st = structure(spec, User::Strong);
    let (l, kp) = (st.l, st.k_prime);
    let (k_total, m_total) = (spec.components(), spec.subchannels());
    let var = spec.variances();
    let dist = &st.waterfill.distortions;
    let (p, ns) = (spec.power(), spec.noise_strong());

    let mut params = Theorem3Params {
        l,
        k_prime: kp,
        p: vec![p; m_total],
        p_prime: vec![p; m_total - l],
        p_dprime: vec![0.0; kp - l],
        d: dist.clone(),
        d_prime: vec![0.0; l + k_total - kp],
        d_dprime: vec![0.0; l],
    };
    for k in 0..l {
        params.d_prime[k] = var[k];
        params.d_dprime[k] = (var[k] / (1.0 + p / ns)).max(dist[k]);
    }
    for k in l..kp {
        params.p_dprime[k - l] = ((p + ns) * dist[k] / var[k] - ns).clamp(0.0, p);
    }
    for k in kp..k_total {
        *params.d_prime_at_mut(k) = var[k];
    }
    (params, st)
}

/// Point where the weak user is point-to-point optimal and the strong user
/// gains from the uncoded transmissions.
pub fn weak_user_optimal(spec: &ProblemSpec) -> SchemePoint {
    let (params, st) = theorem1_params(spec);
    let (l, kp) = (st.l, st.k_prime);
    let var = spec.variances();
    let dist = &st.waterfill.distortions;
    let (p, ns, nw) = (spec.power(), spec.noise_strong(), spec.noise_weak());

    let head: f64 = (0..l)
        .map(|k| (1.0 + p / nw) / (1.0 + p / ns) * dist[k])
        .sum();
    let middle: f64 = (l..kp)
        .map(|k| {
            let pp = nw * (var[k] / dist[k] - 1.0);
            (1.0 + pp / nw) / (1.0 + pp / ns) * dist[k]
        })
        .sum();
    let tail: f64 = dist[kp..].iter().sum();
    let d_s = (head + middle + tail) / spec.components() as f64;
    SchemePoint::new(
        d_s,
        st.waterfill.total_distortion,
        Scheme::WeakOpt,
        SchemeParams::Theorem3(Box::new(params)),
    )
}

/// Point where the strong user is point-to-point optimal and the weak user
/// decodes only the uncoded transmissions.
pub fn strong_user_optimal(spec: &ProblemSpec) -> SchemePoint {
    let (params, st) = theorem2_params(spec);
    let (l, kp) = (st.l, st.k_prime);
    let var = spec.variances();
    let dist = &st.waterfill.distortions;
    let (p, ns, nw) = (spec.power(), spec.noise_strong(), spec.noise_weak());

    let head: f64 = var[..l].iter().map(|s| s / (1.0 + p / nw)).sum();
    let middle: f64 = (l..kp)
        .map(|k| {
            let ppp = ((p + ns) * dist[k] / var[k] - ns).clamp(0.0, p);
            var[k] / (1.0 + (p - ppp) / (ppp + nw))
        })
        .sum();
    let tail: f64 = var[kp..].iter().sum();
    let d_w = (head + middle + tail) / spec.components() as f64;
    SchemePoint::new(
        st.waterfill.total_distortion,
        d_w,
        Scheme::StrongOpt,
        SchemeParams::Theorem3(Box::new(params)),
    )
}
