//! Weight sequences `{b_k}` and their admissibility condition.
//!
//! A weight sequence turns a base series `f(theta) = sum a_k theta^k` into
//! `g(theta) = sum b_k a_k theta^k`. The family construction requires
//! (the "admissibility condition"):
//!
//! * `b_0 = 1` and `b_k >= 1` for all `k`;
//! * `J = {k : b_k = 1}` is finite;
//! * `{b_k}` is unbounded;
//! * `h(theta) = sum b_k^2 a_k theta^k` has positive radius of convergence.
//!
//! Four constructor kinds are provided, each with a known growth limit
//! `L = lim b_k^{1/k}`:
//!
//! | constructor            | `b_k` for `k >= 1`                            | `L`        |
//! |------------------------|-----------------------------------------------|------------|
//! | [`BSequence::geometric_mix`]      | `sum_j w_j d_{j,k}^k`, `d_{j,k} = d_j + c_j/(k+1)` | `max d_j`  |
//! | [`BSequence::power_mix`]          | `sum_j w_j k^{p_j}`                     | 1          |
//! | [`BSequence::binomial_ratio_mix`] | `sum_j w_j t(beta_j,k)/t(alpha_j,k)`    | 1          |
//! | [`BSequence::log_poly_mix`]       | `sum_j w_j ln p_j(k)`                   | 1          |
//!
//! with `b_0 = 1` by definition in every case, positive weights, and
//! `sum_j w_j >= 1`. [`BSequence::combine`] mixes already-built sequences of
//! the three `L = 1` kinds (mixing in geometric-growth members would make the
//! growth limit of the mixture depend on the dominant member and is not
//! admitted). All values are handled in the log domain.

use std::sync::Arc;

use crate::series::{t_ratio_log, CoeffSource, CoefficientStream};
use crate::{Error, Interval, Result};

/// Absolute tolerance at which a numerically evaluated `b_k` counts as 1 for
/// index-set membership (used only where no structural rule decides).
pub const J_MEMBERSHIP_TOL: f64 = 1e-12;

/// One component of a geometric-growth mixture: `w * (d + c/(k+1))^k`.
#[derive(Clone, Copy, Debug)]
pub struct GeometricTerm {
    pub weight: f64,
    /// Limiting base `d`; must exceed 1.
    pub limit: f64,
    /// Offset `c` in `d + c/(k+1)`; zero gives a constant base.
    pub offset: f64,
}

/// One component of a power mixture: `w * k^p`.
#[derive(Clone, Copy, Debug)]
pub struct PowerTerm {
    pub weight: f64,
    pub power: f64,
}

/// One component of a binomial-coefficient-ratio mixture:
/// `w * t(beta, k) / t(alpha, k)` with `0 < alpha < beta`.
#[derive(Clone, Copy, Debug)]
pub struct BinomialRatioTerm {
    pub weight: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// One component of a log-polynomial mixture: `w * ln p(k)` where `p` has
/// nonnegative coefficients (ascending order), is non-constant, and
/// `p(1) >= e` so that `ln p(k) >= 1` for all `k >= 1`.
#[derive(Clone, Debug)]
pub struct LogPolyTerm {
    pub weight: f64,
    /// Polynomial coefficients `c_0 + c_1 x + ... + c_m x^m`.
    pub coeffs: Vec<f64>,
}

#[derive(Debug)]
enum Kind {
    GeometricMix(Vec<GeometricTerm>),
    PowerMix(Vec<PowerTerm>),
    BinomialRatioMix(Vec<BinomialRatioTerm>),
    LogPolyMix(Vec<LogPolyTerm>),
    Combined(Vec<(f64, BSequence)>),
    /// Fault-injection wrapper: behaves like `inner` except at one index.
    /// Exists so validation and verification failure paths can be exercised
    /// end to end; see [`BSequence::with_injected_value`].
    Injected {
        inner: Arc<Kind>,
        at: u64,
        ln_value: f64,
    },
}

/// An immutable, shareable weight sequence.
#[derive(Clone, Debug)]
pub struct BSequence {
    kind: Arc<Kind>,
    /// `sum_j w_j` of the top-level mixture, used by structural membership
    /// rules (`b_k = 1` requires the weights to sum to exactly 1).
    weight_sum: f64,
    declared_growth: Option<f64>,
    label: String,
}

fn validate_weights<'a>(weights: impl Iterator<Item = &'a f64>) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for w in weights {
        if !(*w > 0.0 && w.is_finite()) {
            return Err(Error::Param(format!("weights must be positive and finite, got {w}")));
        }
        sum += *w;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Param("mixture must have at least one term".into()));
    }
    if sum < 1.0 {
        return Err(Error::Param(format!(
            "mixture weights must sum to at least 1, got {sum}"
        )));
    }
    Ok(sum)
}

impl BSequence {
    /// Geometric-growth mixture `b_k = sum_j w_j (d_j + c_j/(k+1))^k`.
    /// Each base must have limit `d_j > 1` and values `>= 1` for all `k >= 1`
    /// (for negative offsets the minimum is at `k = 1`).
    pub fn geometric_mix(terms: Vec<GeometricTerm>) -> Result<Self> {
        let weight_sum = validate_weights(terms.iter().map(|t| &t.weight))?;
        for t in &terms {
            if !(t.limit > 1.0 && t.limit.is_finite()) {
                return Err(Error::Param(format!(
                    "geometric base limit must exceed 1, got {}",
                    t.limit
                )));
            }
            if !t.offset.is_finite() {
                return Err(Error::Param("geometric base offset must be finite".into()));
            }
            // d + c/(k+1) is monotone in k, so for c < 0 the minimum over
            // k >= 1 is at k = 1.
            if t.offset < 0.0 && t.limit + t.offset / 2.0 < 1.0 {
                return Err(Error::Param(format!(
                    "geometric base dips below 1 at k = 1: {} + {}/2 < 1",
                    t.limit, t.offset
                )));
            }
        }
        let declared = terms.iter().map(|t| t.limit).fold(f64::NEG_INFINITY, f64::max);
        let label = format!(
            "geometric-mix({})",
            terms
                .iter()
                .map(|t| format!("{}*({}{:+}/(k+1))^k", t.weight, t.limit, t.offset))
                .collect::<Vec<_>>()
                .join(" + ")
        );
        Ok(Self {
            kind: Arc::new(Kind::GeometricMix(terms)),
            weight_sum,
            declared_growth: Some(declared),
            label,
        })
    }

    /// Power mixture `b_k = sum_j w_j k^{p_j}` with all `p_j > 0`.
    pub fn power_mix(terms: Vec<PowerTerm>) -> Result<Self> {
        let weight_sum = validate_weights(terms.iter().map(|t| &t.weight))?;
        for t in &terms {
            if !(t.power > 0.0 && t.power.is_finite()) {
                return Err(Error::Param(format!("powers must be positive, got {}", t.power)));
            }
        }
        let label = format!(
            "power-mix({})",
            terms
                .iter()
                .map(|t| format!("{}*k^{}", t.weight, t.power))
                .collect::<Vec<_>>()
                .join(" + ")
        );
        Ok(Self {
            kind: Arc::new(Kind::PowerMix(terms)),
            weight_sum,
            declared_growth: Some(1.0),
            label,
        })
    }

    /// Binomial-coefficient-ratio mixture
    /// `b_k = sum_j w_j t(beta_j, k) / t(alpha_j, k)` with `0 < alpha_j < beta_j`.
    pub fn binomial_ratio_mix(terms: Vec<BinomialRatioTerm>) -> Result<Self> {
        let weight_sum = validate_weights(terms.iter().map(|t| &t.weight))?;
        for t in &terms {
            if !(t.alpha > 0.0 && t.beta > t.alpha && t.beta.is_finite()) {
                return Err(Error::Param(format!(
                    "binomial-ratio term requires 0 < alpha < beta, got ({}, {})",
                    t.alpha, t.beta
                )));
            }
        }
        let label = format!(
            "binomial-ratio-mix({})",
            terms
                .iter()
                .map(|t| format!("{}*t({},k)/t({},k)", t.weight, t.beta, t.alpha))
                .collect::<Vec<_>>()
                .join(" + ")
        );
        Ok(Self {
            kind: Arc::new(Kind::BinomialRatioMix(terms)),
            weight_sum,
            declared_growth: Some(1.0),
            label,
        })
    }

    /// Log-polynomial mixture `b_k = sum_j w_j ln p_j(k)`.
    pub fn log_poly_mix(terms: Vec<LogPolyTerm>) -> Result<Self> {
        let weight_sum = validate_weights(terms.iter().map(|t| &t.weight))?;
        for t in &terms {
            if t.coeffs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
                return Err(Error::Param(
                    "polynomial coefficients must be nonnegative and finite".into(),
                ));
            }
            if !t.coeffs.iter().skip(1).any(|c| *c > 0.0) {
                return Err(Error::Param(
                    "polynomial must be non-constant (some coefficient beyond the constant term)"
                        .into(),
                ));
            }
            let at_one: f64 = t.coeffs.iter().sum();
            if at_one < std::f64::consts::E {
                return Err(Error::Param(format!(
                    "polynomial must satisfy p(1) >= e so that ln p(k) >= 1; got p(1) = {at_one}"
                )));
            }
        }
        let label = format!(
            "log-poly-mix({})",
            terms
                .iter()
                .map(|t| format!("{}*ln(poly deg {})", t.weight, t.coeffs.len().saturating_sub(1)))
                .collect::<Vec<_>>()
                .join(" + ")
        );
        Ok(Self {
            kind: Arc::new(Kind::LogPolyMix(terms)),
            weight_sum,
            declared_growth: Some(1.0),
            label,
        })
    }

    /// Mixture `b_k = sum_j w_j b_{j,k}` of already-built sequences. Members
    /// must be of the three unit-growth kinds (power, binomial-ratio,
    /// log-poly); the result again has `L = 1`.
    pub fn combine(members: Vec<(f64, BSequence)>) -> Result<Self> {
        let weight_sum = validate_weights(members.iter().map(|(w, _)| w))?;
        for (_, m) in &members {
            match *m.kind {
                Kind::PowerMix(_) | Kind::BinomialRatioMix(_) | Kind::LogPolyMix(_) => {}
                _ => {
                    return Err(Error::Param(format!(
                        "combine only admits power, binomial-ratio, and log-poly members; got `{}`",
                        m.label
                    )));
                }
            }
        }
        let label = format!(
            "combined({})",
            members
                .iter()
                .map(|(w, m)| format!("{w}*{}", m.label))
                .collect::<Vec<_>>()
                .join(" + ")
        );
        Ok(Self {
            kind: Arc::new(Kind::Combined(members)),
            weight_sum,
            declared_growth: Some(1.0),
            label,
        })
    }

    /// Fault-injection hook: a copy of `self` whose value at index `at` is
    /// replaced by `value`. Used to exercise validation/verification failure
    /// paths (e.g. forcing `b_1 = 0.5` must trip the admissibility check).
    pub fn with_injected_value(&self, at: u64, value: f64) -> Result<Self> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Param(format!(
                "injected value must be positive and finite, got {value}"
            )));
        }
        Ok(Self {
            kind: Arc::new(Kind::Injected {
                inner: Arc::clone(&self.kind),
                at,
                ln_value: value.ln(),
            }),
            weight_sum: self.weight_sum,
            declared_growth: self.declared_growth,
            label: format!("{} with b_{at} := {value}", self.label),
        })
    }

    /// A copy of `self` with the analytic growth limit erased, forcing
    /// downstream radius computations onto the numeric-bracket path.
    pub fn without_declared_growth(&self) -> Self {
        let mut c = self.clone();
        c.declared_growth = None;
        c
    }

    /// `ln b_k`; `b_0 = 1` by definition. May cost O(k) for ratio-driven
    /// kinds; prefer [`BSequence::log_bs`] for sweeps.
    pub fn log_b(&self, k: u64) -> f64 {
        self.kind.log_b_at(k)
    }

    /// Iterator over `ln b_0, ln b_1, ...` with O(1) amortized stepping.
    pub fn log_bs(&self) -> Box<dyn Iterator<Item = f64> + Send + 'static> {
        Kind::log_bs(Arc::clone(&self.kind))
    }

    /// The analytic growth limit `L = lim b_k^{1/k}` when known.
    pub fn declared_growth(&self) -> Option<f64> {
        self.declared_growth
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Exact (structural) test for `b_k = 1`, used before any floating-point
    /// comparison: e.g. a power mixture has `b_k = 1` for `k >= 1` iff
    /// `k = 1` and the weights sum to exactly 1, since every `k^p > 1` for
    /// `k >= 2`.
    fn is_one_structural(&self, k: u64) -> bool {
        self.kind.is_one_structural(k, self.weight_sum)
    }

    /// Derived series with coefficients `b_k^power * a_k` (power 1 builds the
    /// normalizer `g`, power 2 builds the second-moment series `h`). The
    /// radius is `f`'s radius divided by `L^power` when the growth limit is
    /// declared.
    pub fn weighted_stream(&self, f: &CoefficientStream, power: u8) -> CoefficientStream {
        assert!(power == 1 || power == 2, "only powers 1 and 2 are used");
        let known_radius = match (f.known_radius(), self.declared_growth) {
            (Some(r), Some(l)) => Some(r / l.powi(power as i32)),
            _ => None,
        };
        let tag = format!(
            "{}-weighted(f = {}, b = {}, power = {power})",
            if power == 1 { "g" } else { "h" },
            f.tag(),
            self.label
        );
        CoefficientStream::from_source(
            Arc::new(WeightedSource {
                b: self.clone(),
                f: f.clone(),
                power,
            }),
            known_radius,
            tag,
        )
    }
}

/// Streaming log-sum-exp: running maximum with rescaled partial sums, so
/// mixtures of any size combine without allocating.
fn log_sum_exp<I: Iterator<Item = f64>>(items: I) -> f64 {
    let mut m = f64::NEG_INFINITY;
    let mut s = 0.0f64;
    for x in items {
        if x == f64::NEG_INFINITY {
            continue;
        }
        if x <= m {
            s += (x - m).exp();
        } else {
            s = s * (m - x).exp() + 1.0;
            m = x;
        }
    }
    if m == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        m + s.ln()
    }
}

/// `ln p(k)` for a nonnegative-coefficient polynomial, in the log domain so
/// high-degree polynomials at large `k` cannot overflow.
fn poly_log_value(coeffs: &[f64], k: u64) -> f64 {
    let ln_k = (k as f64).ln();
    log_sum_exp(
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0.0)
            .map(|(i, c)| c.ln() + i as f64 * ln_k),
    )
}

impl Kind {
    fn log_b_at(&self, k: u64) -> f64 {
        if let Kind::Injected { inner, at, ln_value } = self {
            return if k == *at { *ln_value } else { inner.log_b_at(k) };
        }
        if k == 0 {
            return 0.0;
        }
        match self {
            Kind::GeometricMix(terms) => log_sum_exp(terms.iter().map(|t| {
                t.weight.ln() + k as f64 * (t.limit + t.offset / (k as f64 + 1.0)).ln()
            })),
            Kind::PowerMix(terms) => {
                let ln_k = (k as f64).ln();
                log_sum_exp(terms.iter().map(|t| t.weight.ln() + t.power * ln_k))
            }
            Kind::BinomialRatioMix(terms) => log_sum_exp(terms.iter().map(|t| {
                t.weight.ln() + t_ratio_log(t.alpha, t.beta, k).expect("validated at construction")
            })),
            Kind::LogPolyMix(terms) => log_sum_exp(
                terms
                    .iter()
                    .map(|t| t.weight.ln() + poly_log_value(&t.coeffs, k).ln()),
            ),
            Kind::Combined(members) => {
                log_sum_exp(members.iter().map(|(w, m)| w.ln() + m.log_b(k)))
            }
            Kind::Injected { .. } => unreachable!("handled above"),
        }
    }

    fn is_one_structural(&self, k: u64, weight_sum: f64) -> bool {
        if let Kind::Injected { inner, at, ln_value } = self {
            return if k == *at {
                *ln_value == 0.0
            } else {
                inner.is_one_structural(k, weight_sum)
            };
        }
        if k == 0 {
            return true;
        }
        if weight_sum != 1.0 {
            // Every component value is >= 1, so b_k > 1 whenever the weights
            // sum above 1.
            return false;
        }
        match self {
            // (d + c/(k+1))^k = 1 at k >= 1 only if the base is exactly 1.
            Kind::GeometricMix(terms) => terms
                .iter()
                .all(|t| t.limit + t.offset / (k as f64 + 1.0) == 1.0),
            // k^p = 1 for p > 0 exactly when k = 1.
            Kind::PowerMix(_) => k == 1,
            // t(beta,k)/t(alpha,k) > 1 strictly for k >= 1 when beta > alpha.
            Kind::BinomialRatioMix(_) => false,
            // ln p(k) = 1 would need p(k) = e exactly; left to the numeric rule.
            Kind::LogPolyMix(_) => false,
            Kind::Combined(members) => members.iter().all(|(_, m)| m.is_one_structural(k)),
            Kind::Injected { .. } => unreachable!("handled above"),
        }
    }

    fn log_bs(kind: Arc<Kind>) -> Box<dyn Iterator<Item = f64> + Send + 'static> {
        match &*kind {
            Kind::BinomialRatioMix(terms) => Box::new(BinomialRatioIter {
                terms: terms.clone(),
                log_u: vec![0.0; terms.len()],
                k: 0,
            }),
            Kind::Combined(members) => {
                let weights: Vec<f64> = members.iter().map(|(w, _)| w.ln()).collect();
                let iters: Vec<_> = members.iter().map(|(_, m)| m.log_bs()).collect();
                Box::new(CombinedIter {
                    ln_weights: weights,
                    members: iters,
                    k: 0,
                })
            }
            Kind::Injected { inner, at, ln_value } => {
                let at = *at;
                let ln_value = *ln_value;
                Box::new(
                    Kind::log_bs(Arc::clone(inner))
                        .enumerate()
                        .map(move |(k, lv)| if k as u64 == at { ln_value } else { lv }),
                )
            }
            // The remaining kinds are O(terms) per index with no carried state.
            _ => Box::new((0u64..).map(move |k| kind.log_b_at(k))),
        }
    }
}

/// O(1)-per-step iterator for binomial-ratio mixtures, carrying the running
/// log-products `ln u_{j,k}` (ratio step `(beta + k) / (alpha + k)`).
struct BinomialRatioIter {
    terms: Vec<BinomialRatioTerm>,
    log_u: Vec<f64>,
    k: u64,
}

impl Iterator for BinomialRatioIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let k = self.k;
        let out = if k == 0 {
            0.0
        } else {
            log_sum_exp(
                self.terms
                    .iter()
                    .zip(&self.log_u)
                    .map(|(t, lu)| t.weight.ln() + lu),
            )
        };
        for (t, lu) in self.terms.iter().zip(self.log_u.iter_mut()) {
            // u_{j,k+1} = u_{j,k} * (beta + k) / (alpha + k); u at k = 0 is 1,
            // and the first applied factor must be beta/alpha.
            *lu += ((t.beta - t.alpha) / (t.alpha + k as f64)).ln_1p();
        }
        self.k += 1;
        Some(out)
    }
}

struct CombinedIter {
    ln_weights: Vec<f64>,
    members: Vec<Box<dyn Iterator<Item = f64> + Send>>,
    k: u64,
}

impl Iterator for CombinedIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let vals: Vec<f64> = self
            .members
            .iter_mut()
            .map(|m| m.next().expect("member sequences are infinite"))
            .collect();
        let out = if self.k == 0 {
            0.0
        } else {
            log_sum_exp(self.ln_weights.iter().zip(&vals).map(|(w, v)| w + v))
        };
        self.k += 1;
        Some(out)
    }
}

/// Coefficients `b_k^power * a_k` of a weighted series.
struct WeightedSource {
    b: BSequence,
    f: CoefficientStream,
    power: u8,
}

impl CoeffSource for WeightedSource {
    fn log_coeff(&self, k: u64) -> f64 {
        self.f.log_coeff(k) + self.power as f64 * self.b.log_b(k)
    }

    fn log_coeffs(&self) -> Box<dyn Iterator<Item = f64> + Send + '_> {
        let power = self.power as f64;
        Box::new(
            self.f
                .log_coeffs()
                .zip(self.b.log_bs())
                .map(move |(lf, lb)| lf + power * lb),
        )
    }
}

/// The index set `J = {k : b_k = 1}` together with the extent of the probe
/// that certified it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JSet {
    /// Sorted member indices; always contains 0.
    pub indices: Vec<u64>,
    /// Every `k <= certified_beyond` outside `indices` satisfied
    /// `b_k > 1 + margin`, and the tail of the probe window was certified
    /// nondecreasing with `b_{certified_beyond} > 1 + margin`.
    pub certified_beyond: u64,
}

impl JSet {
    pub fn contains(&self, k: u64) -> bool {
        self.indices.binary_search(&k).is_ok()
    }
}

/// Compute `J = {k : b_k = 1}` over `k <= k_probe` (at least 64) and certify
/// that no members hide beyond the probe: all non-members must clear
/// `1 + margin`, and the last quarter of the window must be nondecreasing and
/// end above `1 + margin`.
pub fn compute_j(b: &BSequence, k_probe: u64, margin: f64) -> Result<JSet> {
    if k_probe < 64 {
        return Err(Error::InsufficientData(format!(
            "index-set probe needs k_probe >= 64, got {k_probe}"
        )));
    }
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::Param(format!("margin must be positive, got {margin}")));
    }
    let ln_gap = margin.ln_1p();
    let values: Vec<f64> = b.log_bs().take(k_probe as usize + 1).collect();
    let mut indices = Vec::new();
    for (k, &lv) in values.iter().enumerate() {
        let k = k as u64;
        if b.is_one_structural(k) || lv.exp_m1().abs() <= J_MEMBERSHIP_TOL {
            indices.push(k);
        } else if lv <= ln_gap {
            return Err(Error::TailUncertified(format!(
                "b_{k} = {} is neither 1 (within {J_MEMBERSHIP_TOL:.0e}) nor above 1 + margin = {}",
                lv.exp(),
                1.0 + margin
            )));
        }
    }
    let tail_start = (3 * k_probe / 4) as usize;
    for w in values[tail_start..].windows(2) {
        if w[1] < w[0] - 1e-12 {
            return Err(Error::TailUncertified(format!(
                "weights not nondecreasing over the last quarter of the probe window \
                 (drop of {:.3e} observed)",
                w[0] - w[1]
            )));
        }
    }
    if values[k_probe as usize] <= ln_gap {
        return Err(Error::TailUncertified(format!(
            "b_{k_probe} = {} has not cleared 1 + margin = {}",
            values[k_probe as usize].exp(),
            1.0 + margin
        )));
    }
    Ok(JSet {
        indices,
        certified_beyond: k_probe,
    })
}

/// Growth-limit estimate: a bracket for `L = limsup b_k^{1/k}` plus the
/// consecutive-ratio diagnostic `b_K / b_{K-1}` (a stricter notion of growth
/// that equals `L` for all built-in kinds).
#[derive(Clone, Copy, Debug)]
pub struct GrowthEstimate {
    pub bracket: Interval,
    pub tail_ratio: f64,
}

/// Bracket `limsup b_k^{1/k}` from the probe window `[k_probe/2, k_probe]`
/// (`k_probe >= 64`).
pub fn estimate_growth_l(b: &BSequence, k_probe: u64) -> Result<GrowthEstimate> {
    if k_probe < 64 {
        return Err(Error::InsufficientData(format!(
            "growth estimation needs k_probe >= 64, got {k_probe}"
        )));
    }
    let values: Vec<f64> = b.log_bs().take(k_probe as usize + 1).collect();
    let start = (k_probe / 2).max(1);
    let window: Vec<(u64, f64)> = (start..=k_probe).map(|k| (k, values[k as usize])).collect();
    let bracket = crate::series::root_limsup_bracket(&window);
    let tail_ratio = (values[k_probe as usize] - values[k_probe as usize - 1]).exp();
    Ok(GrowthEstimate { bracket, tail_ratio })
}

/// One named clause of the admissibility condition.
#[derive(Clone, Debug)]
pub struct Clause {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of [`validate_condition_a`]: per-clause results, the certified
/// index set when available, and a lower end for the radius of the
/// second-moment series `h`.
#[derive(Clone, Debug)]
pub struct ConditionAReport {
    pub clauses: Vec<Clause>,
    pub j: Option<JSet>,
    /// Certified lower end for the radius of `h` (`+inf` allowed). From the
    /// declared growth limit when present, otherwise from a numeric bracket.
    pub r2_lower: f64,
    pub pass: bool,
}

impl ConditionAReport {
    /// First failing clause, if any.
    pub fn first_failure(&self) -> Option<&Clause> {
        self.clauses.iter().find(|c| !c.pass)
    }
}

/// Knobs for [`validate_condition_a`] (and family construction).
#[derive(Clone, Copy, Debug)]
pub struct ValidateOptions {
    /// Probe extent for the `b_k >= 1` scan and the index-set certificate.
    pub k_probe: u64,
    /// Gap non-members of `J` must clear above 1.
    pub margin: f64,
    /// Probe extent for the numeric radius bracket of `h` when no growth
    /// limit is declared.
    pub radius_probe: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            k_probe: 10_000,
            margin: 0.5,
            radius_probe: 256,
        }
    }
}

/// Check the admissibility condition of `{b_k}` against the base series `f`:
/// `b_0 = 1`, all `b_k >= 1`, finite certified index set, unbounded growth,
/// and positive radius for the second-moment series `h`.
pub fn validate_condition_a(
    b: &BSequence,
    f: &CoefficientStream,
    opts: &ValidateOptions,
) -> ConditionAReport {
    let mut clauses = Vec::with_capacity(5);

    let lb0 = b.log_b(0);
    clauses.push(Clause {
        name: "b0_is_one",
        pass: lb0.exp_m1().abs() <= J_MEMBERSHIP_TOL,
        detail: format!("b_0 = {}", lb0.exp()),
    });

    let mut first_low: Option<(u64, f64)> = None;
    for (k, lv) in b.log_bs().take(opts.k_probe as usize + 1).enumerate() {
        if lv < -J_MEMBERSHIP_TOL {
            first_low = Some((k as u64, lv.exp()));
            break;
        }
    }
    clauses.push(Clause {
        name: "b_at_least_one",
        pass: first_low.is_none(),
        detail: match first_low {
            None => format!("b_k >= 1 for all k <= {}", opts.k_probe),
            Some((k, v)) => format!("b_{k} = {v} < 1"),
        },
    });

    let j = compute_j(b, opts.k_probe, opts.margin);
    clauses.push(Clause {
        name: "j_finite",
        pass: j.is_ok(),
        detail: match &j {
            Ok(j) => format!("J = {:?} certified to {}", j.indices, j.certified_beyond),
            Err(e) => e.to_string(),
        },
    });

    // Unboundedness: every admissible constructor kind diverges by
    // construction (geometric bases exceed 1, powers/ratio products/log-polys
    // grow without bound); the monotone-tail certificate above corroborates
    // it inside the probe window.
    clauses.push(Clause {
        name: "b_unbounded",
        pass: j.is_ok(),
        detail: if j.is_ok() {
            format!("divergent by construction (`{}`), tail certified monotone", b.label())
        } else {
            "tail certificate unavailable".into()
        },
    });

    let (r2_lower, r2_detail) = match (f.known_radius(), b.declared_growth()) {
        (Some(r1), Some(l)) => {
            let r2 = r1 / (l * l);
            (r2, format!("radius of h = {r2} from declared growth limit {l}"))
        }
        _ => {
            let h = b.weighted_stream(f, 2);
            match crate::series::estimate_radius(&h, opts.radius_probe) {
                Ok(bracket) => (
                    bracket.lo,
                    format!("numeric radius bracket for h: {bracket}"),
                ),
                Err(e) => (0.0, format!("radius estimation failed: {e}")),
            }
        }
    };
    clauses.push(Clause {
        name: "h_radius_positive",
        pass: r2_lower > 0.0,
        detail: r2_detail,
    });

    let pass = clauses.iter().all(|c| c.pass);
    ConditionAReport {
        clauses,
        j: j.ok(),
        r2_lower,
        pass,
    }
}
