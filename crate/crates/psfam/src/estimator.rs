//! Estimators on a family's support and their certified moments.
//!
//! Every estimator this crate manipulates is affine in `(b_k - 1)` up to
//! finitely many per-index overrides:
//!
//! ```text
//! delta(atom) = atom_value
//! delta(k)    = base + slope * (b_k - 1) + exceptions[k]
//! ```
//!
//! This one shape covers the two structures the toolkit cares about:
//!
//! * the *zero class* — estimators with `E[delta] = 0` for every parameter
//!   value, which here are exactly `delta(k) = -delta(atom) (b_k - 1)`
//!   ([`Estimator::zero_class`]);
//! * indicator combinations `a + sum c_k / a_k 1{X = k}` over the certified
//!   index set, which are the minimum-variance unbiased estimators of the
//!   targets in [`PsiTarget`] ([`umvue`]).
//!
//! Moments reduce to evaluations of `f`, the difference series
//! `D1 = sum (b_k - 1) a_k theta^k` and `D2 = sum (b_k - 1)^2 a_k theta^k`,
//! and the normalizer `g`; every evaluation carries a certified truncation
//! bound and the combination is propagated with interval arithmetic, so a
//! reported expectation interval is guaranteed to contain the true moment.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bseq::BSequence;
use crate::family::{Family, SupportPoint};
use crate::series::{CoeffSource, CoefficientStream};
use crate::{Error, Interval, Result};

/// Structural classification of an estimator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorForm {
    /// `delta(k) = -delta(atom) (b_k - 1)`: unbiased for zero at every theta.
    ZeroClass,
    /// Finite support plus an atom value (`base = slope = 0`).
    Table,
    General,
}

/// An estimator on `{atom} ∪ {0, 1, ...}`, affine in `(b_k - 1)` with finite
/// overrides. See the module docs for the exact shape.
#[derive(Clone, Debug)]
pub struct Estimator {
    atom_value: f64,
    base: f64,
    slope: f64,
    exceptions: BTreeMap<u64, f64>,
    label: String,
}

fn require_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Param(format!("{name} must be finite, got {v}")))
    }
}

impl Estimator {
    /// The zero-class member with atom value `scale`:
    /// `delta(atom) = scale`, `delta(k) = -scale (b_k - 1)`.
    pub fn zero_class(scale: f64) -> Result<Estimator> {
        require_finite("scale", scale)?;
        Ok(Estimator {
            atom_value: scale,
            base: 0.0,
            slope: -scale,
            exceptions: BTreeMap::new(),
            label: format!("zero-class(scale = {scale})"),
        })
    }

    /// An explicit affine estimator (no overrides).
    pub fn affine(atom_value: f64, base: f64, slope: f64) -> Result<Estimator> {
        require_finite("atom_value", atom_value)?;
        require_finite("base", base)?;
        require_finite("slope", slope)?;
        Ok(Estimator {
            atom_value,
            base,
            slope,
            exceptions: BTreeMap::new(),
            label: format!("affine(atom = {atom_value}, base = {base}, slope = {slope})"),
        })
    }

    /// A finite-support table: `delta(k) = values[k]` for `k < values.len()`,
    /// zero beyond, plus the atom value.
    pub fn from_table(atom_value: f64, values: &[f64]) -> Result<Estimator> {
        require_finite("atom_value", atom_value)?;
        let mut exceptions = BTreeMap::new();
        for (k, v) in values.iter().enumerate() {
            require_finite("table value", *v)?;
            if *v != 0.0 {
                exceptions.insert(k as u64, *v);
            }
        }
        Ok(Estimator {
            atom_value,
            base: 0.0,
            slope: 0.0,
            exceptions,
            label: format!("table({} entries)", values.len()),
        })
    }

    /// A copy with `amount` added at lattice index `k` (for probing how the
    /// moment machinery reacts to small departures from a structure).
    pub fn with_bump(&self, k: u64, amount: f64) -> Result<Estimator> {
        require_finite("bump", amount)?;
        let mut out = self.clone();
        *out.exceptions.entry(k).or_insert(0.0) += amount;
        out.label = format!("{} + bump({amount} at {k})", self.label);
        Ok(out)
    }

    pub fn atom_value(&self) -> f64 {
        self.atom_value
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, f64> {
        &self.exceptions
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn form(&self) -> EstimatorForm {
        if self.base == 0.0 && self.slope == -self.atom_value && self.overrides_all_zero() {
            EstimatorForm::ZeroClass
        } else if self.base == 0.0 && self.slope == 0.0 {
            EstimatorForm::Table
        } else {
            EstimatorForm::General
        }
    }

    fn overrides_all_zero(&self) -> bool {
        self.exceptions.values().all(|v| *v == 0.0)
    }

    fn lattice_value(&self, k: u64, log_b: f64) -> f64 {
        self.base
            + self.slope * log_b.exp_m1()
            + self.exceptions.get(&k).copied().unwrap_or(0.0)
    }

    /// Value at one support point. Lattice lookups cost one weight evaluation
    /// (O(k) for mixtures with stateful recurrences); prefer
    /// [`Estimator::lattice_values`] for sweeps.
    pub fn value_at(&self, b: &BSequence, point: SupportPoint) -> f64 {
        match point {
            SupportPoint::Atom => self.atom_value,
            SupportPoint::Index(k) => self.lattice_value(k, b.log_b(k)),
        }
    }

    /// Iterator over `delta(0), delta(1), ...` with O(1) amortized stepping.
    pub fn lattice_values<'a>(
        &'a self,
        b: &BSequence,
    ) -> Box<dyn Iterator<Item = f64> + Send + 'a> {
        Box::new(
            b.log_bs()
                .enumerate()
                .map(move |(k, lb)| self.lattice_value(k as u64, lb)),
        )
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label)
    }
}

/// A target functional `psi(theta) = a + sum_k c_k theta^k / g(theta)` with
/// finitely many terms. Targets whose keys all lie in the certified index set
/// `J` admit an unbiased estimator with minimal variance at every parameter
/// value; see [`umvue`].
#[derive(Clone, Debug)]
pub struct PsiTarget {
    pub a: f64,
    pub c: BTreeMap<u64, f64>,
}

impl PsiTarget {
    pub fn new(a: f64, c: impl IntoIterator<Item = (u64, f64)>) -> Result<PsiTarget> {
        require_finite("a", a)?;
        let c: BTreeMap<u64, f64> = c.into_iter().collect();
        for (k, v) in &c {
            require_finite(&format!("c[{k}]"), *v)?;
        }
        Ok(PsiTarget { a, c })
    }

    /// Constant target `psi = a` (estimated exactly by the constant).
    pub fn constant(a: f64) -> Result<PsiTarget> {
        PsiTarget::new(a, [])
    }
}

/// Certified value of the target functional at `theta`.
pub fn psi_value(psi: &PsiTarget, fam: &Family, theta: f64, tol: f64) -> Result<Interval> {
    fam.check_theta(theta)?;
    let g = fam.eval_stream(fam.g(), theta, tol)?.interval();
    let mut num = 0.0;
    let mut abs = 0.0;
    for (k, c) in &psi.c {
        let t = c * theta.powi(*k as i32);
        num += t;
        abs += t.abs();
    }
    let fuzz = 1e-14 * abs;
    Ok(Interval::new(num - fuzz, num + fuzz)
        .div_pos(g)
        .add(Interval::point(psi.a)))
}

/// The minimum-variance unbiased estimator of `psi`:
/// `T(atom) = a`, `T(k) = a + c_k / a_k 1{k has a target term}`.
///
/// Fails with [`Error::NotInPsi0`] when a target key lies outside the
/// family's certified index set `J` — off `J` the weight `b_k` exceeds 1 and
/// no unbiased estimator of the corresponding term exists in this class.
pub fn umvue(psi: &PsiTarget, fam: &Family) -> Result<Estimator> {
    for key in psi.c.keys() {
        if !fam.j().contains(*key) {
            return Err(Error::NotInPsi0 {
                key: *key,
                j: fam.j().indices.clone(),
            });
        }
    }
    let mut exceptions = BTreeMap::new();
    for (k, c) in &psi.c {
        if *c != 0.0 {
            exceptions.insert(*k, c * (-fam.f().log_coeff(*k)).exp());
        }
    }
    let keys: Vec<u64> = exceptions.keys().copied().collect();
    Ok(Estimator {
        atom_value: psi.a,
        base: psi.a,
        slope: 0.0,
        exceptions,
        label: format!("umvue(a = {}, indicators at {keys:?})", psi.a),
    })
}

// --- difference series -----------------------------------------------------

/// Weights within `1e-12` of 1 are treated as exactly 1 (their difference
/// coefficient is a structural zero); matches the membership tolerance used
/// when certifying the index set.
const LN_B_UNIT_TOL: f64 = 1e-12;

fn diff_log_coeff(lf: f64, lb: f64, power: f64) -> f64 {
    if lb <= LN_B_UNIT_TOL {
        f64::NEG_INFINITY
    } else {
        // ln(b - 1) = ln b + ln(1 - exp(-ln b)), overflow-free for any b.
        lf + power * (lb + (-(-lb).exp_m1()).ln())
    }
}

struct DiffSource {
    f: CoefficientStream,
    b: BSequence,
    power: f64,
}

impl CoeffSource for DiffSource {
    fn log_coeff(&self, k: u64) -> f64 {
        diff_log_coeff(self.f.log_coeff(k), self.b.log_b(k), self.power)
    }

    fn log_coeffs(&self) -> Box<dyn Iterator<Item = f64> + Send + '_> {
        let power = self.power;
        Box::new(
            self.f
                .log_coeffs()
                .zip(self.b.log_bs())
                .map(move |(lf, lb)| diff_log_coeff(lf, lb, power)),
        )
    }
}

/// The series `sum (b_k - 1)^power a_k theta^k` (`power` 1 or 2). Its radius
/// is `R1 / L^power` when both the base radius and the growth limit are
/// declared.
pub(crate) fn difference_stream(
    f: &CoefficientStream,
    b: &BSequence,
    power: u8,
) -> CoefficientStream {
    let known = match (f.known_radius(), b.declared_growth()) {
        (Some(r), Some(l)) => Some(r / l.powi(power as i32)),
        _ => None,
    };
    CoefficientStream::from_source(
        Arc::new(DiffSource {
            f: f.clone(),
            b: b.clone(),
            power: power as f64,
        }),
        known,
        format!("d{power}[{}]", f.tag()),
    )
}

// --- the moment engine -----------------------------------------------------

/// A lattice functional `atom_coeff * p(atom) +
/// (c0 f + c1 D1 + c2 D2 + sum_k corr_k a_k theta^k) / g`, which is the shape
/// of every first or second moment of the estimators above.
struct QuadraticMoment {
    atom_coeff: f64,
    c0: f64,
    c1: f64,
    c2: f64,
    corrections: Vec<(u64, f64)>,
}

impl QuadraticMoment {
    fn eval(&self, fam: &Family, theta: f64, tol: f64) -> Result<Interval> {
        fam.check_theta(theta)?;
        let f = fam.eval_stream(fam.f(), theta, tol)?.interval();
        let g = fam.eval_stream(fam.g(), theta, tol)?.interval();
        let mut num = f.scale(self.c0);
        if self.c1 != 0.0 {
            let d1 = difference_stream(fam.f(), fam.b(), 1);
            num = num.add(fam.eval_stream(&d1, theta, tol)?.interval().scale(self.c1));
        }
        if self.c2 != 0.0 {
            let d2 = difference_stream(fam.f(), fam.b(), 2);
            num = num.add(fam.eval_stream(&d2, theta, tol)?.interval().scale(self.c2));
        }
        if !self.corrections.is_empty() {
            let ln_theta = theta.ln();
            let mut s = 0.0;
            let mut abs = 0.0;
            for (k, amount) in &self.corrections {
                let t = amount * (fam.f().log_coeff(*k) + *k as f64 * ln_theta).exp();
                s += t;
                abs += t.abs();
            }
            let fuzz = 1e-14 * abs;
            num = num.add(Interval::new(s - fuzz, s + fuzz));
        }
        // p(atom) = 1 - f/g, clamped to [0, 1] (valid: the true value is a
        // probability, so intersecting preserves containment).
        let p_atom = f.div_pos(g).one_minus();
        let lo = p_atom.lo.max(0.0);
        let p_atom = Interval::new(lo, p_atom.hi.min(1.0).max(lo));
        Ok(p_atom.scale(self.atom_coeff).add(num.div_pos(g)))
    }
}

/// Certified `E_theta[delta(X)]`.
pub fn expectation(est: &Estimator, fam: &Family, theta: f64, tol: f64) -> Result<Interval> {
    QuadraticMoment {
        atom_coeff: est.atom_value,
        c0: est.base,
        c1: est.slope,
        c2: 0.0,
        corrections: est
            .exceptions
            .iter()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, v)| (*k, *v))
            .collect(),
    }
    .eval(fam, theta, tol)
}

/// Certified `E_theta[delta1(X) delta2(X)]`.
pub fn inner_product(
    e1: &Estimator,
    e2: &Estimator,
    fam: &Family,
    theta: f64,
    tol: f64,
) -> Result<Interval> {
    // Product of the affine parts expands over f, D1, D2; indices carrying an
    // override on either factor get a finite correction
    // delta1 delta2 - A1 A2 computed pointwise.
    let mut corrections = Vec::new();
    let keys: std::collections::BTreeSet<u64> = e1
        .exceptions
        .keys()
        .chain(e2.exceptions.keys())
        .copied()
        .collect();
    for k in keys {
        let lb = fam.b().log_b(k);
        let a1 = e1.base + e1.slope * lb.exp_m1();
        let a2 = e2.base + e2.slope * lb.exp_m1();
        let v1 = e1.lattice_value(k, lb);
        let v2 = e2.lattice_value(k, lb);
        let corr = v1 * v2 - a1 * a2;
        if corr != 0.0 {
            corrections.push((k, corr));
        }
    }
    QuadraticMoment {
        atom_coeff: e1.atom_value * e2.atom_value,
        c0: e1.base * e2.base,
        c1: e1.base * e2.slope + e2.base * e1.slope,
        c2: e1.slope * e2.slope,
        corrections,
    }
    .eval(fam, theta, tol)
}

/// Certified `Var_theta[delta(X)] = E[delta^2] - E[delta]^2`.
pub fn variance(est: &Estimator, fam: &Family, theta: f64, tol: f64) -> Result<Interval> {
    let second = inner_product(est, est, fam, theta, tol)?;
    let mean = expectation(est, fam, theta, tol)?;
    Ok(second.sub(mean.square()))
}

// --- zero-class membership --------------------------------------------------

/// Where a scan found an estimator departing from the zero-class shape.
#[derive(Clone, Copy, Debug)]
pub struct MembershipWitness {
    pub k: u64,
    pub value: f64,
    pub required: f64,
}

/// Outcome of [`check_zero_class`].
#[derive(Clone, Debug)]
pub struct MembershipReport {
    pub is_member: bool,
    pub witness: Option<MembershipWitness>,
    /// `None`: certified for every index by structure alone.
    /// `Some(K)`: verified pointwise up to `K`.
    pub checked_to: Option<u64>,
}

/// Decide whether `delta` is unbiased for zero at every parameter value,
/// i.e. matches `delta(k) = -delta(atom) (b_k - 1)`. Structurally conforming
/// estimators are certified for all indices; otherwise the values are
/// compared pointwise up to `k_probe` and the first violation is reported.
pub fn check_zero_class(est: &Estimator, fam: &Family, k_probe: u64) -> MembershipReport {
    if est.form() == EstimatorForm::ZeroClass {
        return MembershipReport {
            is_member: true,
            witness: None,
            checked_to: None,
        };
    }
    let atom = est.atom_value;
    let mut witness = None;
    for (k, lb) in fam.b().log_bs().take(k_probe as usize + 1).enumerate() {
        let k = k as u64;
        let required = if atom == 0.0 { 0.0 } else { -atom * lb.exp_m1() };
        let value = est.lattice_value(k, lb);
        let tol = 1e-9 * (1.0 + required.abs());
        let gap = (value - required).abs();
        if gap > tol || gap.is_nan() {
            witness = Some(MembershipWitness { k, value, required });
            break;
        }
    }
    MembershipReport {
        is_member: witness.is_none(),
        witness,
        checked_to: Some(k_probe),
    }
}
