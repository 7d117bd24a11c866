//! Positive-coefficient power series with certified evaluation.
//!
//! A [`CoefficientStream`] describes `f(theta) = sum_{k>=0} a_k theta^k`
//! through the log-coefficients `ln a_k` (all coefficient arithmetic stays in
//! the log domain until terms are summed). [`eval_series`] sums terms until a
//! geometric tail certificate stabilizes: once eight consecutive term ratios
//! sit below a common bound `rbar < 1` the remaining tail is at most
//! `term_m * rbar / (1 - rbar)`, which becomes the reported error bound.
//!
//! The certificate assumes term ratios are eventually monotone, which holds
//! for every stream this crate constructs (built-ins, finite tables with
//! geometric tails, and weighted streams derived from them). For streams whose
//! ratios increase toward their limit, the observed window alone would
//! under-estimate future ratios, so when the radius of convergence is known
//! the limit `theta / radius` is folded into `rbar`.

use std::sync::Arc;

use crate::{Error, Interval, Result};

/// Default cap on the number of series terms examined before giving up.
pub const DEFAULT_TERM_BUDGET: u64 = 100_000;

/// Number of consecutive in-bound term ratios required by the tail
/// certificate.
const CERT_WINDOW: usize = 8;

/// A certified partial sum of a power series.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    /// The partial sum of all examined terms.
    pub value: f64,
    /// Certified bound on `|true sum - value|` (truncation plus rounding).
    pub error_bound: f64,
    /// Number of terms consumed (indices `0..terms_used`).
    pub terms_used: u64,
}

impl SeriesValue {
    /// Enclosure of the true sum. For a series with nonnegative terms the
    /// partial sum can only undershoot, so the enclosure is one-sided up to
    /// rounding slack.
    pub fn interval(&self) -> Interval {
        let slack = rounding_slack(self.terms_used, self.value);
        Interval::new(self.value - slack, self.value + self.error_bound + slack)
    }
}

/// Rounding slack for a compensated sum of `terms` nonnegative terms whose
/// log-domain coefficients were built by O(terms) recurrences.
fn rounding_slack(terms: u64, value: f64) -> f64 {
    16.0 * f64::EPSILON * (terms as f64 + 1.0) * value.abs()
}

/// Source of log-coefficients `ln a_k` for a power series.
///
/// `log_coeffs` must yield the same values as repeated `log_coeff` calls;
/// it exists because several sources (binomial-coefficient streams, weight
/// sequences driven by product recurrences) step in O(1) but pay O(k) for
/// random access.
pub trait CoeffSource: Send + Sync {
    /// `ln a_k`. Must be finite for every `k` (coefficients are positive).
    fn log_coeff(&self, k: u64) -> f64;

    /// Iterator over `ln a_0, ln a_1, ...`.
    fn log_coeffs(&self) -> Box<dyn Iterator<Item = f64> + Send + '_> {
        Box::new((0u64..).map(move |k| self.log_coeff(k)))
    }
}

/// An immutable, shareable power series `sum a_k theta^k` with `a_k > 0`.
#[derive(Clone)]
pub struct CoefficientStream {
    source: Arc<dyn CoeffSource>,
    known_radius: Option<f64>,
    tag: String,
}

impl std::fmt::Debug for CoefficientStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoefficientStream")
            .field("tag", &self.tag)
            .field("known_radius", &self.known_radius)
            .finish()
    }
}

impl CoefficientStream {
    /// Stream with `a_k = 1/k!`, so `f(theta) = exp(theta)`; infinite radius.
    pub fn exponential() -> Self {
        Self {
            source: Arc::new(ExpSource),
            known_radius: Some(f64::INFINITY),
            tag: "exp".to_owned(),
        }
    }

    /// Stream with `a_k` equal to the coefficient of `theta^k` in
    /// `(1 - theta)^{-gamma}` (see [`t_gamma`]); radius 1. `gamma = 1` gives
    /// the plain geometric series `a_k = 1`.
    pub fn geometric(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Param(format!(
                "geometric stream requires gamma > 0, got {gamma}"
            )));
        }
        Ok(Self {
            source: Arc::new(GammaBinomialSource { gamma }),
            known_radius: Some(1.0),
            tag: format!("geometric({gamma})"),
        })
    }

    /// Stream with `a_0 = 1`, `a_k = 1/k` for `k >= 1`, so
    /// `f(theta) = 1 - ln(1 - theta)`; radius 1.
    pub fn log_series_plus_one() -> Self {
        Self {
            source: Arc::new(LogSeriesPlusOneSource),
            known_radius: Some(1.0),
            tag: "logseries-plus-one".to_owned(),
        }
    }

    /// Stream from an explicit head of positive coefficients followed by a
    /// geometric tail: `a_k = head[k]` for `k < head.len()`, then
    /// `a_{k+1} = tail_ratio * a_k`. The tail makes the series a genuine
    /// infinite power series with known radius `1 / tail_ratio`.
    pub fn from_table(head: Vec<f64>, tail_ratio: f64) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::Param("coefficient table must be nonempty".into()));
        }
        if let Some(bad) = head.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::Param(format!(
                "coefficient table entries must be positive and finite, got {bad}"
            )));
        }
        if !(tail_ratio > 0.0 && tail_ratio.is_finite()) {
            return Err(Error::Param(format!(
                "tail ratio must be positive and finite, got {tail_ratio}"
            )));
        }
        let n = head.len();
        Ok(Self {
            source: Arc::new(TableSource {
                head: head.iter().map(|c| c.ln()).collect(),
                ln_tail_ratio: tail_ratio.ln(),
            }),
            known_radius: Some(1.0 / tail_ratio),
            tag: format!("table({n} coeffs, tail ratio {tail_ratio})"),
        })
    }

    /// Wrap an arbitrary source (used for weighted streams derived from a
    /// base series and a weight sequence).
    pub(crate) fn from_source(
        source: Arc<dyn CoeffSource>,
        known_radius: Option<f64>,
        tag: String,
    ) -> Self {
        Self {
            source,
            known_radius,
            tag,
        }
    }

    /// `ln a_k`. May cost O(k) for sources driven by recurrences; prefer
    /// [`CoefficientStream::log_coeffs`] for sweeps.
    pub fn log_coeff(&self, k: u64) -> f64 {
        self.source.log_coeff(k)
    }

    /// Iterator over `ln a_0, ln a_1, ...` with O(1) amortized stepping.
    pub fn log_coeffs(&self) -> Box<dyn Iterator<Item = f64> + Send + '_> {
        self.source.log_coeffs()
    }

    /// Radius of convergence when known analytically (`+inf` is allowed).
    pub fn known_radius(&self) -> Option<f64> {
        self.known_radius
    }

    /// Human-readable identity of the stream.
    pub fn tag(&self) -> &str {
        &self.tag
    }
}

struct ExpSource;

impl CoeffSource for ExpSource {
    fn log_coeff(&self, k: u64) -> f64 {
        // -ln k!, summed exactly rather than via a gamma approximation; k is
        // small in every random-access use.
        -(1..=k).map(|i| (i as f64).ln()).sum::<f64>()
    }

    fn log_coeffs(&self) -> Box<dyn Iterator<Item = f64> + Send + '_> {
        Box::new((0u64..).scan(0.0f64, |lc, k| {
            let cur = *lc;
            *lc -= ((k + 1) as f64).ln();
            Some(cur)
        }))
    }
}

struct GammaBinomialSource {
    gamma: f64,
}

impl CoeffSource for GammaBinomialSource {
    fn log_coeff(&self, k: u64) -> f64 {
        t_gamma_log(self.gamma, k)
    }

    fn log_coeffs(&self) -> Box<dyn Iterator<Item = f64> + Send + '_> {
        let gamma = self.gamma;
        Box::new((0u64..).scan(0.0f64, move |lc, k| {
            let cur = *lc;
            *lc += (gamma + k as f64).ln() - ((k + 1) as f64).ln();
            Some(cur)
        }))
    }
}

struct LogSeriesPlusOneSource;

impl CoeffSource for LogSeriesPlusOneSource {
    fn log_coeff(&self, k: u64) -> f64 {
        if k == 0 {
            0.0
        } else {
            -(k as f64).ln()
        }
    }
}

struct TableSource {
    head: Vec<f64>,
    ln_tail_ratio: f64,
}

impl CoeffSource for TableSource {
    fn log_coeff(&self, k: u64) -> f64 {
        let n = self.head.len() as u64;
        if k < n {
            self.head[k as usize]
        } else {
            self.head[self.head.len() - 1] + (k - (n - 1)) as f64 * self.ln_tail_ratio
        }
    }
}

/// Incremental certified scan over the terms `exp(ln a_k + k ln theta)`.
///
/// Terms are summed with Neumaier compensation; ratios are tracked in the log
/// domain so underflowing terms still certify. A structural zero coefficient
/// (`ln a_k = -inf`, produced by difference series at weight indices where
/// `b_k = 1`) resets the ratio window; such zeros only occur in a finite
/// prefix for every series this crate builds.
pub(crate) struct CertScan {
    ln_theta: f64,
    /// Log of the limiting term ratio `theta / radius` when the radius is
    /// known; `-inf` otherwise.
    ln_ratio_cap: f64,
    k: u64,
    sum: f64,
    comp: f64,
    prev_log_term: f64,
    window: [f64; CERT_WINDOW],
    window_len: usize,
    window_pos: usize,
}

impl CertScan {
    pub(crate) fn new(theta: f64, ln_ratio_cap: f64) -> Self {
        Self {
            ln_theta: theta.ln(),
            ln_ratio_cap,
            k: 0,
            sum: 0.0,
            comp: 0.0,
            prev_log_term: f64::NAN,
            window: [0.0; CERT_WINDOW],
            window_len: 0,
            window_pos: 0,
        }
    }

    /// Feed `ln a_k` for the next index; returns the certified bound on the
    /// remaining tail if the certificate currently holds.
    pub(crate) fn push(&mut self, log_coeff: f64) -> Option<f64> {
        let log_term = if log_coeff == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            log_coeff + self.k as f64 * self.ln_theta
        };
        self.k += 1;
        if log_term == f64::NEG_INFINITY {
            // Structural zero: ratios across it carry no information.
            self.window_len = 0;
            self.window_pos = 0;
            self.prev_log_term = f64::NAN;
            return None;
        }
        let term = log_term.exp();
        // Neumaier compensated accumulation.
        let t = self.sum + term;
        self.comp += if self.sum.abs() >= term.abs() {
            (self.sum - t) + term
        } else {
            (term - t) + self.sum
        };
        self.sum = t;
        if !self.prev_log_term.is_nan() {
            self.window[self.window_pos] = log_term - self.prev_log_term;
            self.window_pos = (self.window_pos + 1) % CERT_WINDOW;
            self.window_len = (self.window_len + 1).min(CERT_WINDOW);
        }
        self.prev_log_term = log_term;
        if self.window_len < CERT_WINDOW {
            return None;
        }
        let window_max = self.window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ln_rbar = window_max.max(self.ln_ratio_cap);
        if ln_rbar >= 0.0 {
            return None;
        }
        let rbar = ln_rbar.exp();
        let last = term.max(f64::MIN_POSITIVE);
        Some(last * rbar / (1.0 - rbar))
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.comp
    }

    /// Number of coefficients consumed so far.
    pub(crate) fn consumed(&self) -> u64 {
        self.k
    }
}

/// Certified summation of `sum exp(lc_k + k ln theta)` over an explicit
/// log-coefficient iterator. `ln_ratio_cap` is the log of the limiting term
/// ratio when known (`-inf` otherwise, see module docs).
pub(crate) fn sum_certified(
    log_coeffs: impl Iterator<Item = f64>,
    theta: f64,
    tol: f64,
    budget: u64,
    ln_ratio_cap: f64,
) -> Result<SeriesValue> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("theta must be in (0, radius), got {theta}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut scan = CertScan::new(theta, ln_ratio_cap);
    let mut last_tail = f64::INFINITY;
    for lc in log_coeffs.take(budget as usize) {
        if let Some(tail) = scan.push(lc) {
            last_tail = tail;
            if tail <= tol {
                return Ok(SeriesValue {
                    value: scan.sum(),
                    error_bound: tail,
                    terms_used: scan.consumed(),
                });
            }
        }
    }
    Err(Error::NoConvergenceCertificate {
        budget,
        detail: if last_tail.is_finite() {
            format!("tail bound still {last_tail:.3e} at theta = {theta}, tol = {tol:.3e}")
        } else {
            format!("term ratios never stabilized below 1 at theta = {theta}")
        },
    })
}

pub(crate) fn ln_ratio_cap(theta: f64, known_radius: Option<f64>) -> f64 {
    match known_radius {
        Some(r) if r.is_finite() => theta.ln() - r.ln(),
        _ => f64::NEG_INFINITY,
    }
}

/// Evaluate `f(theta)` with a certified truncation bound `<= tol`, using the
/// default term budget of [`DEFAULT_TERM_BUDGET`].
pub fn eval_series(stream: &CoefficientStream, theta: f64, tol: f64) -> Result<SeriesValue> {
    eval_series_with_budget(stream, theta, tol, DEFAULT_TERM_BUDGET)
}

/// [`eval_series`] with an explicit term budget.
pub fn eval_series_with_budget(
    stream: &CoefficientStream,
    theta: f64,
    tol: f64,
    budget: u64,
) -> Result<SeriesValue> {
    if let Some(r) = stream.known_radius() {
        if theta >= r {
            return Err(Error::Domain(format!(
                "theta = {theta} is outside (0, {r}) for stream `{}`",
                stream.tag()
            )));
        }
    }
    sum_certified(
        stream.log_coeffs(),
        theta,
        tol,
        budget,
        ln_ratio_cap(theta, stream.known_radius()),
    )
}

/// Bracket for `limsup v_k^{1/k}` from log-values over the tail window
/// `[K/2, K]`: the window extremes widened by twice the window spread, with
/// the lower end clamped at zero. A window that has not stabilized (spread
/// comparable to its level) therefore yields a one-sided bracket.
pub(crate) fn root_limsup_bracket(log_values: &[(u64, f64)]) -> Interval {
    debug_assert!(!log_values.is_empty());
    let mut mx = f64::NEG_INFINITY;
    let mut mn = f64::INFINITY;
    for &(k, lv) in log_values {
        debug_assert!(k > 0);
        let rho = (lv / k as f64).exp();
        mx = mx.max(rho);
        mn = mn.min(rho);
    }
    let spread = mx - mn;
    Interval::new((mn - 2.0 * spread).max(0.0), mx + 2.0 * spread)
}

/// Bracket the radius of convergence `1 / limsup a_k^{1/k}` from the
/// coefficients up to index `k_probe` (at least 16). The upper end is `+inf`
/// when the root-test window is still falling too fast to bound the limsup
/// away from zero.
pub fn estimate_radius(stream: &CoefficientStream, k_probe: u64) -> Result<Interval> {
    if k_probe < 16 {
        return Err(Error::InsufficientData(format!(
            "radius estimation needs k_probe >= 16, got {k_probe}"
        )));
    }
    let start = k_probe / 2;
    let window: Vec<(u64, f64)> = stream
        .log_coeffs()
        .enumerate()
        .map(|(k, lv)| (k as u64, lv))
        .take(k_probe as usize + 1)
        .filter(|&(k, _)| k >= start.max(1))
        .collect();
    let limsup = root_limsup_bracket(&window);
    let lo = 1.0 / limsup.hi;
    let hi = if limsup.lo > 0.0 {
        1.0 / limsup.lo
    } else {
        f64::INFINITY
    };
    Ok(Interval::new(lo, hi))
}

/// `ln t(gamma, k)` where `t(gamma, k)` is the coefficient of `theta^k` in
/// `(1 - theta)^{-gamma}`, by the product recurrence
/// `t(gamma, 0) = 1`, `t(gamma, k+1) = t(gamma, k) * (gamma + k) / (k + 1)`.
pub fn t_gamma_log(gamma: f64, k: u64) -> f64 {
    (0..k)
        .map(|i| (gamma + i as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// `t(gamma, k)` in the linear domain. Errors unless `gamma > 0`.
pub fn t_gamma(gamma: f64, k: u64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("t_gamma requires gamma > 0, got {gamma}")));
    }
    Ok(t_gamma_log(gamma, k).exp())
}

/// `ln (t(beta, k) / t(alpha, k))` via the stable product
/// `prod_{i=1}^{k} (1 + (beta - alpha) / (alpha + i - 1))`, i.e. a sum of
/// `ln(1 + x)` terms that never forms the two large factorials separately.
pub fn t_ratio_log(alpha: f64, beta: f64, k: u64) -> Result<f64> {
    if !(alpha > 0.0 && beta > alpha && beta.is_finite()) {
        return Err(Error::Domain(format!(
            "t_ratio requires 0 < alpha < beta, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let d = beta - alpha;
    Ok((0..k).map(|i| (d / (alpha + i as f64)).ln_1p()).sum())
}

/// `t(beta, k) / t(alpha, k)` in the linear domain.
pub fn t_ratio(alpha: f64, beta: f64, k: u64) -> Result<f64> {
    Ok(t_ratio_log(alpha, beta, k)?.exp())
}
