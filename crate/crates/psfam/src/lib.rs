//! Construction and verification toolkit for a class of discrete distributions
//! built from power series.
//!
//! A family starts from a base series `f(theta) = sum a_k theta^k` with
//! strictly positive coefficients and a weight sequence `{b_k}` with `b_0 = 1`,
//! `b_k >= 1`, finitely many `b_k = 1`, and `b_k` unbounded. The derived series
//! `g(theta) = sum b_k a_k theta^k` defines a probability mass function on
//! `{atom} ∪ {0, 1, 2, ...}`:
//!
//! ```text
//! p(atom; theta) = 1 - f(theta) / g(theta)
//! p(k; theta)    = a_k theta^k / g(theta)
//! ```
//!
//! Such a family is incomplete (it admits a nontrivial unbiased estimator of
//! zero) yet boundedly complete, and a small class of functionals of `theta`
//! retains exactly computable UMVUEs. This crate provides:
//!
//! * [`series`] — certified evaluation of positive-coefficient power series,
//!   radius-of-convergence bracketing, and the binomial-coefficient helpers
//!   `t_gamma` / `t_ratio`.
//! * [`bseq`] — constructors for the four admissible weight-sequence kinds and
//!   their mixtures, the index set `J = {k : b_k = 1}`, growth-limit
//!   estimation, and validation of the admissibility condition.
//! * [`family`] — assembled distribution families: pmf with certified error
//!   bounds, tail cutoffs, theta grids, and closed-form oracles for the
//!   built-in example families.
//! * [`estimator`] — structured estimators on the support: the scaled
//!   unbiased-estimator-of-zero rule, finite tables, UMVUEs for the admissible
//!   functional class, and certified moment/inner-product evaluation.
//! * [`sampler`] — deterministic inversion sampling (ChaCha8, per-batch
//!   streams) with empirical total-variation and Monte Carlo summaries.
//! * [`verify`] — an executable battery of checks that re-derives the
//!   structural claims about each family and aggregates them into a report.
//! * [`config`] / [`cli`] — the flat key-value configuration format and the
//!   `psfam` command-line interface built on top of it.
//!
//! With the default `parallel` feature the hot loops (sampling, grid sweeps,
//! report generation) run on rayon; disabling the feature selects the
//! equivalent sequential fallback. [`Parallelism`] selects the mode per call
//! where a caller wants control (e.g. benchmarks comparing the two).

#![forbid(unsafe_code)]

use thiserror::Error;

pub mod bseq;
pub mod cli;
pub mod config;
pub mod estimator;
pub mod family;
pub mod sampler;
pub mod series;
pub mod verify;

pub(crate) mod exec;

pub use exec::Parallelism;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the construction and verification toolkit.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// A series evaluation exhausted its term budget before the geometric
    /// tail certificate stabilized (slow convergence, or divergence).
    #[error("no convergence certificate within {budget} terms: {detail}")]
    NoConvergenceCertificate { budget: u64, detail: String },

    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A probe or window size is too small for the requested certificate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A constructor parameter violates its admissibility constraints.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// The tail of a weight sequence could not be certified within the
    /// probe window (index-set membership or monotone-growth check failed).
    #[error("tail uncertified: {0}")]
    TailUncertified(String),

    /// A family construction failed the admissibility condition; carries the
    /// first failing clause by name.
    #[error("admissibility condition violated: clause `{clause}` failed: {detail}")]
    ConditionAViolation { clause: &'static str, detail: String },

    /// A UMVUE was requested for a target outside the admissible class: some
    /// coefficient key is not in the family's index set `J`.
    #[error("target not in admissible class: key {key} not in J = {j:?}")]
    NotInPsi0 { key: u64, j: Vec<u64> },

    /// An oracle was requested for a tag with no registered closed form.
    #[error("unknown oracle tag: {0}")]
    UnknownTag(String),

    /// A configuration file failed to parse; carries the line number.
    #[error("config parse error at line {line}: {message}")]
    Config { line: usize, message: String },

    /// Underlying I/O failure (file read/write).
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A closed interval `[lo, hi]` on the extended real line, used for certified
/// enclosures (series values, radius brackets, moment bounds).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Interval from endpoints; callers must pass `lo <= hi`.
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    /// Degenerate interval containing a single point.
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    /// Midpoint; for half-infinite intervals this is infinite.
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Half the width; the certified error bound around [`Interval::mid`].
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn add(&self, other: Interval) -> Interval {
        Interval::new(self.lo + other.lo, self.hi + other.hi)
    }

    pub fn sub(&self, other: Interval) -> Interval {
        Interval::new(self.lo - other.hi, self.hi - other.lo)
    }

    /// Scale by a constant (sign-aware).
    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::new(c * self.lo, c * self.hi)
        } else {
            Interval::new(c * self.hi, c * self.lo)
        }
    }

    pub fn mul(&self, other: Interval) -> Interval {
        let cands = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = cands.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cands.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }

    /// Interval division with a strictly positive denominator interval.
    ///
    /// Panics in debug builds if `den.lo <= 0`; certified evaluations always
    /// produce positive enclosures for the series used as denominators.
    pub fn div_pos(&self, den: Interval) -> Interval {
        debug_assert!(den.lo > 0.0, "denominator interval must be positive");
        let lo = if self.lo >= 0.0 {
            self.lo / den.hi
        } else {
            self.lo / den.lo
        };
        let hi = if self.hi >= 0.0 {
            self.hi / den.lo
        } else {
            self.hi / den.hi
        };
        Interval::new(lo, hi)
    }

    /// The interval `[1 - hi, 1 - lo]` (used for atom probabilities).
    pub fn one_minus(&self) -> Interval {
        Interval::new(1.0 - self.hi, 1.0 - self.lo)
    }

    /// Tight range of `x^2` over the interval (unlike `mul(self, self)`,
    /// which treats the two factors as independent).
    pub fn square(&self) -> Interval {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        if self.lo <= 0.0 && self.hi >= 0.0 {
            Interval::new(0.0, a.max(b))
        } else {
            Interval::new(a.min(b), a.max(b))
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:.6e}, {:.6e}]", self.lo, self.hi)
    }
}
