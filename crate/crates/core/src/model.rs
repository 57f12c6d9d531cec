//! Domain types shared by every module.
//!
//! Conventions used throughout the crate:
//!
//! * all rates are in nats (natural logarithm); the CLI converts to bits for display,
//! * variances, powers and noises are linear (not dB),
//! * source components and sub-channels are indexed from zero in code. A range
//!   written `1..=L` in the usual mathematical notation is `0..l` here.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{non_negative, positive, unit_interval, Error, Result};

/// The two broadcast receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum User {
    /// Receiver with the smaller noise variance.
    Strong,
    /// Receiver with the larger noise variance.
    Weak,
}

/// Per-sub-channel power budget and the two receiver noise variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroadcastChannel {
    pub power: f64,
    pub noise_strong: f64,
    pub noise_weak: f64,
}

impl BroadcastChannel {
    /// Checks `P >= 0` and `0 < N_s <= N_w`.
    pub fn new(power: f64, noise_strong: f64, noise_weak: f64) -> Result<Self> {
        non_negative("power", power)?;
        positive("noise_strong", noise_strong)?;
        positive("noise_weak", noise_weak)?;
        if noise_strong > noise_weak {
            return Err(Error::NoiseOrderViolation {
                noise_strong,
                noise_weak,
            });
        }
        Ok(Self {
            power,
            noise_strong,
            noise_weak,
        })
    }

    /// Channel with `P = 1` and noises set from the two SNRs `P/N_s`, `P/N_w` (linear).
    pub fn from_snr(snr_strong: f64, snr_weak: f64) -> Result<Self> {
        positive("snr_strong", snr_strong)?;
        positive("snr_weak", snr_weak)?;
        Self::new(1.0, 1.0 / snr_strong, 1.0 / snr_weak)
    }

    pub fn noise(&self, user: User) -> f64 {
        match user {
            User::Strong => self.noise_strong,
            User::Weak => self.noise_weak,
        }
    }
}

/// Unvalidated problem description, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawProblemSpec {
    pub variances: Vec<f64>,
    pub subchannels: usize,
    pub power: f64,
    pub noise_strong: f64,
    pub noise_weak: f64,
}

impl RawProblemSpec {
    pub fn validate(self) -> Result<ProblemSpec> {
        validate(self)
    }
}

/// A validated problem: `K` independent Gaussian source components with
/// variances sorted non-increasing, `M` parallel broadcast sub-channels with
/// average power `P` each, and noise variances `N_s <= N_w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblemSpec", into = "RawProblemSpec")]
pub struct ProblemSpec {
    variances: Vec<f64>,
    subchannels: usize,
    channel: BroadcastChannel,
}

/// Validates a raw spec, sorting the variances non-increasing.
pub fn validate(raw: RawProblemSpec) -> Result<ProblemSpec> {
    if raw.variances.is_empty() {
        return Err(Error::NonPositiveParameter {
            name: "number of source components",
            value: 0.0,
        });
    }
    if raw.subchannels == 0 {
        return Err(Error::NonPositiveParameter {
            name: "subchannels",
            value: 0.0,
        });
    }
    for &v in &raw.variances {
        positive("variance", v)?;
    }
    positive("power", raw.power)?;
    let channel = BroadcastChannel::new(raw.power, raw.noise_strong, raw.noise_weak)?;
    let mut variances = raw.variances;
    variances.sort_by(|a, b| b.total_cmp(a));
    Ok(ProblemSpec {
        variances,
        subchannels: raw.subchannels,
        channel,
    })
}

impl TryFrom<RawProblemSpec> for ProblemSpec {
    type Error = Error;

    fn try_from(raw: RawProblemSpec) -> Result<Self> {
        validate(raw)
    }
}

impl From<ProblemSpec> for RawProblemSpec {
    fn from(spec: ProblemSpec) -> Self {
        spec.to_raw()
    }
}

impl ProblemSpec {
    pub fn new(
        variances: Vec<f64>,
        subchannels: usize,
        power: f64,
        noise_strong: f64,
        noise_weak: f64,
    ) -> Result<Self> {
        validate(RawProblemSpec {
            variances,
            subchannels,
            power,
            noise_strong,
            noise_weak,
        })
    }

    /// White source of `k` components with variance `sigma2` over `m` sub-channels.
    pub fn white(sigma2: f64, k: usize, m: usize, channel: BroadcastChannel) -> Result<Self> {
        Self::new(
            vec![sigma2; k],
            m,
            channel.power,
            channel.noise_strong,
            channel.noise_weak,
        )
    }

    pub fn to_raw(&self) -> RawProblemSpec {
        RawProblemSpec {
            variances: self.variances.clone(),
            subchannels: self.subchannels,
            power: self.channel.power,
            noise_strong: self.channel.noise_strong,
            noise_weak: self.channel.noise_weak,
        }
    }

    /// Source variances, sorted non-increasing.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Number of source components `K`.
    pub fn components(&self) -> usize {
        self.variances.len()
    }

    /// Number of sub-channels `M`.
    pub fn subchannels(&self) -> usize {
        self.subchannels
    }

    pub fn channel(&self) -> &BroadcastChannel {
        &self.channel
    }

    pub fn power(&self) -> f64 {
        self.channel.power
    }

    pub fn noise_strong(&self) -> f64 {
        self.channel.noise_strong
    }

    pub fn noise_weak(&self) -> f64 {
        self.channel.noise_weak
    }

    /// Average source variance, the distortion at zero rate.
    pub fn mean_variance(&self) -> f64 {
        self.variances.iter().sum::<f64>() / self.variances.len() as f64
    }

    /// Bandwidth ratio `M/K`.
    pub fn alpha(&self) -> f64 {
        self.subchannels as f64 / self.variances.len() as f64
    }

    pub fn is_white(&self) -> bool {
        let first = self.variances[0];
        self.variances
            .iter()
            .all(|&v| (v - first).abs() <= 1e-12 * first)
    }
}

/// Full parameter vector of the general hybrid scheme for fixed `(L, K')`.
///
/// Index ranges (zero-based):
///
/// | field       | indices            | meaning                                       |
/// |-------------|--------------------|-----------------------------------------------|
/// | `p`         | `0..M`             | sub-channel power                             |
/// | `p_prime`   | `L..M`             | power left after the common layer             |
/// | `p_dprime`  | `L..K'`            | dirty-paper (strong-only) power               |
/// | `d`         | `0..K`             | strong-user distortion                        |
/// | `d_prime`   | `0..L` and `K'..K` | coarse (common) layer distortion              |
/// | `d_dprime`  | `0..L`             | strong side-information distortion            |
///
/// `d_prime` stores the `0..L` block first, followed by the `K'..K` block.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Params {
    pub l: usize,
    pub k_prime: usize,
    pub p: Vec<f64>,
    pub p_prime: Vec<f64>,
    pub p_dprime: Vec<f64>,
    pub d: Vec<f64>,
    pub d_prime: Vec<f64>,
    pub d_dprime: Vec<f64>,
}

impl Theorem3Params {
    /// Checks that `0 <= L <= K' <= min(K, M)` and every list has the length
    /// implied by `(L, K', K, M)`.
    pub fn check_shape(&self, k: usize, m: usize) -> Result<()> {
        let fail = |what: String| Err(Error::IndexRangeMismatch(what));
        if self.l > self.k_prime || self.k_prime > k.min(m) {
            return fail(format!(
                "need L <= K' <= min(K, M); got L = {}, K' = {}, K = {k}, M = {m}",
                self.l, self.k_prime
            ));
        }
        let expect = [
            ("p", self.p.len(), m),
            ("p_prime", self.p_prime.len(), m - self.l),
            ("p_dprime", self.p_dprime.len(), self.k_prime - self.l),
            ("d", self.d.len(), k),
            ("d_prime", self.d_prime.len(), self.l + k - self.k_prime),
            ("d_dprime", self.d_dprime.len(), self.l),
        ];
        for (name, got, want) in expect {
            if got != want {
                return fail(format!("`{name}` has length {got}, expected {want}"));
            }
        }
        Ok(())
    }

    /// `P'_m` for `m >= L`.
    pub fn p_prime_at(&self, m: usize) -> f64 {
        self.p_prime[m - self.l]
    }

    /// `P''_m` for `L <= m < K'`.
    pub fn p_dprime_at(&self, m: usize) -> f64 {
        self.p_dprime[m - self.l]
    }

    /// `D'_k` for `k < L` or `k >= K'`.
    pub fn d_prime_at(&self, k: usize) -> f64 {
        if k < self.l {
            self.d_prime[k]
        } else {
            assert!(k >= self.k_prime, "D'_{k} is undefined for L <= k < K'");
            self.d_prime[self.l + k - self.k_prime]
        }
    }

    pub fn d_prime_at_mut(&mut self, k: usize) -> &mut f64 {
        if k < self.l {
            &mut self.d_prime[k]
        } else {
            assert!(k >= self.k_prime, "D'_{k} is undefined for L <= k < K'");
            let idx = self.l + k - self.k_prime;
            &mut self.d_prime[idx]
        }
    }

    /// Indices of the components with a coarse digital layer: `0..L` then `K'..K`.
    pub fn coarse_components(&self, k: usize) -> impl Iterator<Item = usize> {
        (0..self.l).chain(self.k_prime..k)
    }
}

/// Which construction produced a [`SchemePoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Separation,
    Analog,
    WeakOpt,
    StrongOpt,
    General,
    BcClosed,
    BeClosed,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Separation => "separation",
            Scheme::Analog => "analog",
            Scheme::WeakOpt => "weak_opt",
            Scheme::StrongOpt => "strong_opt",
            Scheme::General => "general",
            Scheme::BcClosed => "bc_closed",
            Scheme::BeClosed => "be_closed",
        }
    }

    pub fn all() -> [Scheme; 7] {
        [
            Scheme::Separation,
            Scheme::Analog,
            Scheme::WeakOpt,
            Scheme::StrongOpt,
            Scheme::General,
            Scheme::BcClosed,
            Scheme::BeClosed,
        ]
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::all()
            .into_iter()
            .find(|scheme| scheme.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown scheme tag `{s}`")))
    }
}

/// Parameters attached to a [`SchemePoint`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeParams {
    None,
    Theorem3(Box<Theorem3Params>),
    Mismatch { lambda: f64, gamma: f64 },
    Separation { beta: f64 },
    Analog { powers: Vec<f64> },
}

/// An achievable `(D_s, D_w)` pair together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemePoint {
    pub d_s: f64,
    pub d_w: f64,
    pub scheme: Scheme,
    pub params: SchemeParams,
}

impl SchemePoint {
    pub fn new(d_s: f64, d_w: f64, scheme: Scheme, params: SchemeParams) -> Self {
        Self {
            d_s,
            d_w,
            scheme,
            params,
        }
    }

    pub fn distortion(&self, user: User) -> f64 {
        match user {
            User::Strong => self.d_s,
            User::Weak => self.d_w,
        }
    }
}

/// White-source bandwidth-mismatch setting with the two trade-off knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MismatchParams {
    pub sigma2: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl MismatchParams {
    pub fn new(sigma2: f64, alpha: f64, lambda: f64, gamma: f64) -> Result<Self> {
        positive("sigma2", sigma2)?;
        positive("alpha", alpha)?;
        if alpha == 1.0 {
            return Err(Error::AlphaOutOfRange {
                alpha,
                expected: "alpha != 1",
            });
        }
        unit_interval("lambda", lambda)?;
        unit_interval("gamma", gamma)?;
        Ok(Self {
            sigma2,
            alpha,
            lambda,
            gamma,
        })
    }
}

/// Fraction of each sub-channel's power given to the refinement message in
/// the separation baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationParams {
    pub beta: f64,
}

impl SeparationParams {
    pub fn new(beta: f64) -> Result<Self> {
        unit_interval("beta", beta)?;
        Ok(Self { beta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(variances: Vec<f64>, m: usize, p: f64, ns: f64, nw: f64) -> RawProblemSpec {
        RawProblemSpec {
            variances,
            subchannels: m,
            power: p,
            noise_strong: ns,
            noise_weak: nw,
        }
    }

    #[test]
    fn variances_are_sorted() {
        let spec = validate(raw(vec![0.25, 1.0], 2, 1.0, 0.5, 1.0)).unwrap();
        assert_eq!(spec.variances(), &[1.0, 0.25]);
    }

    #[test]
    fn equal_noises_allowed() {
        assert!(validate(raw(vec![1.0], 1, 1.0, 1.0, 1.0)).is_ok());
    }

    #[test]
    fn noise_order_violation() {
        let err = validate(raw(vec![1.0], 1, 1.0, 2.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NoiseOrderViolation { .. }));
    }

    #[test]
    fn non_positive_parameters_rejected() {
        for bad in [
            raw(vec![0.0], 1, 1.0, 0.5, 1.0),
            raw(vec![1.0, -2.0], 1, 1.0, 0.5, 1.0),
            raw(vec![1.0], 1, 0.0, 0.5, 1.0),
            raw(vec![1.0], 1, 1.0, 0.0, 1.0),
            raw(vec![1.0], 1, f64::NAN, 0.5, 1.0),
            raw(vec![], 1, 1.0, 0.5, 1.0),
            raw(vec![1.0], 0, 1.0, 0.5, 1.0),
        ] {
            assert!(matches!(
                validate(bad).unwrap_err(),
                Error::NonPositiveParameter { .. }
            ));
        }
    }

    #[test]
    fn json_round_trip_sorts() {
        let json = r#"{"variances":[0.5,2.0],"subchannels":3,"power":1.0,"noise_strong":0.1,"noise_weak":1.0}"#;
        let spec: ProblemSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.variances(), &[2.0, 0.5]);
        let back: ProblemSpec =
            serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let bad = r#"{"variances":[1.0],"subchannels":1,"power":1.0,"noise_strong":2.0,"noise_weak":1.0}"#;
        assert!(serde_json::from_str::<ProblemSpec>(bad).is_err());
    }

    #[test]
    fn theorem3_shape_check() {
        let params = Theorem3Params {
            l: 1,
            k_prime: 2,
            p: vec![1.0, 1.0],
            p_prime: vec![0.5],
            p_dprime: vec![0.1],
            d: vec![0.1, 0.2],
            d_prime: vec![0.5],
            d_dprime: vec![0.2],
        };
        params.check_shape(2, 2).unwrap();
        assert!(params.check_shape(3, 2).is_err());
        let mut bad = params.clone();
        bad.k_prime = 3;
        assert!(matches!(
            bad.check_shape(2, 2),
            Err(Error::IndexRangeMismatch(_))
        ));
        assert_eq!(params.coarse_components(2).collect::<Vec<_>>(), vec![0]);
        assert_eq!(params.d_prime_at(0), 0.5);
    }

    #[test]
    fn scheme_tags_parse() {
        for scheme in Scheme::all() {
            assert_eq!(scheme.as_str().parse::<Scheme>().unwrap(), scheme);
        }
        assert!("hybrid".parse::<Scheme>().is_err());
    }

    #[test]
    fn mismatch_params_ranges() {
        assert!(MismatchParams::new(1.0, 1.0, 0.5, 0.5).is_err());
        assert!(MismatchParams::new(1.0, 2.0, 1.5, 0.5).is_err());
        assert!(MismatchParams::new(1.0, 0.5, 0.0, 1.0).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn validate_is_idempotent_and_preserves_multiset(
                variances in prop::collection::vec(1e-3f64..1e3, 1..8),
                m in 1usize..6,
                p in 1e-2f64..1e2,
                ns in 1e-3f64..1.0,
                extra in 0.0f64..10.0,
            ) {
                let spec = validate(raw(variances.clone(), m, p, ns, ns + extra)).unwrap();
                let again = validate(spec.to_raw()).unwrap();
                prop_assert_eq!(&again, &spec);
                let mut sorted = variances;
                sorted.sort_by(|a, b| b.total_cmp(a));
                prop_assert_eq!(spec.variances(), sorted.as_slice());
            }
        }
    }
}
