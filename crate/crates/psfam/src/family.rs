//! Assembled distribution families on `{atom} ∪ {0, 1, 2, ...}`.
//!
//! A [`Family`] pairs a base series `f` with an admissible weight sequence
//! `{b_k}` (see [`crate::bseq`]) and carries the derived normalizer
//! `g(theta) = sum b_k a_k theta^k`:
//!
//! ```text
//! p(atom; theta) = 1 - f(theta) / g(theta)
//! p(k; theta)    = a_k theta^k / g(theta)
//! ```
//!
//! for `theta` in `(0, R)`, where `R = min(R1, R1 / L^2)` combines the radius
//! of `f` with the growth limit of the weights (the second term is the radius
//! of the second-moment series `h`). All probabilities are certified: series
//! truncation errors propagate through the quotient by interval arithmetic.
//!
//! Four built-in families with closed-form oracles ship with the crate; see
//! [`closed_form_oracle`].

use crate::bseq::{
    validate_condition_a, BSequence, BinomialRatioTerm, GeometricTerm, JSet, PowerTerm,
    ValidateOptions,
};
use crate::series::{
    eval_series_with_budget, ln_ratio_cap, CertScan, CoefficientStream, SeriesValue,
    DEFAULT_TERM_BUDGET,
};
use crate::{Error, Interval, Result};

/// A point of the support: the off-lattice atom or a lattice index.
///
/// The atom is kept as a label and never mixed into index arithmetic; its
/// numeric display value lives in [`Family::atom_label`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SupportPoint {
    Atom,
    Index(u64),
}

/// A certified probability: `|probability - true value| <= error_bound`.
#[derive(Clone, Copy, Debug)]
pub struct PmfValue {
    pub probability: f64,
    pub error_bound: f64,
}

impl PmfValue {
    fn from_interval(iv: Interval) -> Self {
        // Probabilities live in [0, 1]; intersecting preserves containment.
        let iv = Interval::new(iv.lo.max(0.0), iv.hi.min(1.0).max(iv.lo.max(0.0)));
        PmfValue {
            probability: iv.mid(),
            error_bound: iv.half_width(),
        }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(
            self.probability - self.error_bound,
            self.probability + self.error_bound,
        )
    }
}

/// Construction-time knobs for a family.
#[derive(Clone, Copy, Debug)]
pub struct FamilyOptions {
    /// Default absolute tolerance for internal series evaluations.
    pub series_tol: f64,
    /// Default tail mass for sampling tables.
    pub epsilon_tail: f64,
    /// Probe extent for the weight-sequence certificates.
    pub k_probe: u64,
    /// Gap non-members of `J` must clear above 1.
    pub margin: f64,
    /// Probe extent for numeric radius brackets (no declared growth limit).
    pub radius_probe: u64,
    /// Cap on series terms per evaluation.
    pub term_budget: u64,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        Self {
            series_tol: 1e-12,
            epsilon_tail: 1e-10,
            k_probe: 10_000,
            margin: 0.5,
            radius_probe: 256,
            term_budget: DEFAULT_TERM_BUDGET,
        }
    }
}

impl FamilyOptions {
    pub(crate) fn validate_options(&self) -> ValidateOptions {
        ValidateOptions {
            k_probe: self.k_probe,
            margin: self.margin,
            radius_probe: self.radius_probe,
        }
    }
}

/// Identifier of a built-in family with registered closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleTag {
    /// `f = exp(theta)`, `b_k = 2^k`: `g = exp(2 theta)`.
    Example1,
    /// `f = 1 - ln(1-theta)`, `b_0 = 1, b_k = k`: `g = (1-theta)^{-1}`.
    Example2,
    /// `f = (1-theta)^{-1}`, `b_k = (k+1)(k+2)/2`: `g = (1-theta)^{-3}`.
    Example3,
    /// `f = (1-theta)^{-1}`, `b_k = k + 1`: `g = (1-theta)^{-2}`.
    LehmannScheffe,
}

impl OracleTag {
    pub const ALL: [OracleTag; 4] = [
        OracleTag::Example1,
        OracleTag::Example2,
        OracleTag::Example3,
        OracleTag::LehmannScheffe,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OracleTag::Example1 => "example1",
            OracleTag::Example2 => "example2",
            OracleTag::Example3 => "example3",
            OracleTag::LehmannScheffe => "lehmann-scheffe",
        }
    }
}

impl std::str::FromStr for OracleTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OracleTag::ALL
            .iter()
            .copied()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_owned()))
    }
}

impl std::fmt::Display for OracleTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which closed-form quantity to look up in the oracle registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleQuantity {
    /// The normalizer `g(theta)`.
    Normalizer,
    /// `p(atom; theta)`.
    PmfAtom,
    /// `p(k; theta)`; requires `k`.
    PmfIndex,
}

/// Closed-form values for the built-in families, for use as independent
/// cross-checks of the series machinery. `k` is required for
/// [`OracleQuantity::PmfIndex`] and ignored otherwise.
pub fn closed_form_oracle(
    tag: &str,
    quantity: OracleQuantity,
    theta: f64,
    k: Option<u64>,
) -> Result<f64> {
    let tag: OracleTag = tag.parse()?;
    let radius = match tag {
        OracleTag::Example1 => f64::INFINITY,
        _ => 1.0,
    };
    if !(theta > 0.0 && theta < radius) {
        return Err(Error::Domain(format!(
            "theta = {theta} outside (0, {radius}) for oracle `{tag}`"
        )));
    }
    let need_k = || -> Result<u64> {
        k.ok_or_else(|| Error::Domain("pmf oracle requires an index k".into()))
    };
    let om = 1.0 - theta;
    Ok(match (tag, quantity) {
        (OracleTag::Example1, OracleQuantity::Normalizer) => (2.0 * theta).exp(),
        (OracleTag::Example1, OracleQuantity::PmfAtom) => -(-theta).exp_m1(),
        (OracleTag::Example1, OracleQuantity::PmfIndex) => {
            let k = need_k()?;
            let ln_kfact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
            (-2.0 * theta + k as f64 * theta.ln() - ln_kfact).exp()
        }
        (OracleTag::Example2, OracleQuantity::Normalizer) => 1.0 / om,
        (OracleTag::Example2, OracleQuantity::PmfAtom) => 1.0 - om * (1.0 - om.ln()),
        (OracleTag::Example2, OracleQuantity::PmfIndex) => {
            let k = need_k()?;
            if k == 0 {
                om
            } else {
                theta.powi(k as i32) * om / k as f64
            }
        }
        (OracleTag::Example3, OracleQuantity::Normalizer) => 1.0 / (om * om * om),
        (OracleTag::Example3, OracleQuantity::PmfAtom) => 1.0 - om * om,
        (OracleTag::Example3, OracleQuantity::PmfIndex) => {
            om * om * om * theta.powi(need_k()? as i32)
        }
        (OracleTag::LehmannScheffe, OracleQuantity::Normalizer) => 1.0 / (om * om),
        (OracleTag::LehmannScheffe, OracleQuantity::PmfAtom) => theta,
        (OracleTag::LehmannScheffe, OracleQuantity::PmfIndex) => {
            om * om * theta.powi(need_k()? as i32)
        }
    })
}

/// An assembled family. Immutable and cheap to clone (streams share state
/// behind `Arc`s).
#[derive(Clone, Debug)]
pub struct Family {
    f: CoefficientStream,
    b: BSequence,
    g: CoefficientStream,
    h: CoefficientStream,
    radius: f64,
    j: JSet,
    atom_label: f64,
    oracle_tag: Option<OracleTag>,
    label: String,
    opts: FamilyOptions,
}

/// Validate inputs and assemble a family. Fails with
/// [`Error::ConditionAViolation`] naming the first failing admissibility
/// clause, or [`Error::Param`] for an atom label that collides with the
/// lattice (any nonnegative integer).
pub fn build_family(
    f: CoefficientStream,
    b: BSequence,
    atom_label: f64,
    opts: FamilyOptions,
) -> Result<Family> {
    if !atom_label.is_finite() || (atom_label >= 0.0 && atom_label.fract() == 0.0) {
        return Err(Error::Param(format!(
            "atom label must be a finite real outside {{0, 1, 2, ...}}, got {atom_label}"
        )));
    }
    let report = validate_condition_a(&b, &f, &opts.validate_options());
    if !report.pass {
        let failing = report.first_failure().expect("failed report has a failing clause");
        return Err(Error::ConditionAViolation {
            clause: failing.name,
            detail: failing.detail.clone(),
        });
    }
    let g = b.weighted_stream(&f, 1);
    let h = b.weighted_stream(&f, 2);
    let r1 = match f.known_radius() {
        Some(r) => r,
        None => crate::series::estimate_radius(&f, opts.radius_probe)?.lo,
    };
    let radius = r1.min(report.r2_lower);
    if radius <= 0.0 || radius.is_nan() {
        return Err(Error::ConditionAViolation {
            clause: "h_radius_positive",
            detail: format!("combined radius bound is {radius}"),
        });
    }
    let label = format!("f = {}, b = {}", f.tag(), b.label());
    Ok(Family {
        f,
        b,
        g,
        h,
        radius,
        j: report.j.expect("passing report carries the index set"),
        atom_label,
        oracle_tag: None,
        label,
        opts,
    })
}

impl Family {
    /// The base series `f`.
    pub fn f(&self) -> &CoefficientStream {
        &self.f
    }

    /// The weight sequence.
    pub fn b(&self) -> &BSequence {
        &self.b
    }

    /// The normalizer series `g` (coefficients `b_k a_k`).
    pub fn g(&self) -> &CoefficientStream {
        &self.g
    }

    /// The second-moment series `h` (coefficients `b_k^2 a_k`).
    pub fn h(&self) -> &CoefficientStream {
        &self.h
    }

    /// Parameter domain: `theta` ranges over `(0, radius)`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The certified index set `J = {k : b_k = 1}`.
    pub fn j(&self) -> &JSet {
        &self.j
    }

    /// Numeric display label of the atom (default -1).
    pub fn atom_label(&self) -> f64 {
        self.atom_label
    }

    pub fn oracle_tag(&self) -> Option<OracleTag> {
        self.oracle_tag
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn options(&self) -> &FamilyOptions {
        &self.opts
    }

    /// Evaluate a derived series at `theta` under this family's budget.
    pub fn eval_stream(
        &self,
        stream: &CoefficientStream,
        theta: f64,
        tol: f64,
    ) -> Result<SeriesValue> {
        eval_series_with_budget(stream, theta, tol, self.opts.term_budget)
    }

    pub(crate) fn check_theta(&self, theta: f64) -> Result<()> {
        if !(theta > 0.0 && theta < self.radius) {
            return Err(Error::Domain(format!(
                "theta = {theta} outside (0, {}) for family `{}`",
                self.radius, self.label
            )));
        }
        Ok(())
    }

    /// Certified pmf at one support point.
    pub fn pmf(&self, point: SupportPoint, theta: f64, tol: f64) -> Result<PmfValue> {
        self.check_theta(theta)?;
        let g = self.eval_stream(&self.g, theta, tol)?.interval();
        Ok(match point {
            SupportPoint::Atom => {
                let f = self.eval_stream(&self.f, theta, tol)?.interval();
                PmfValue::from_interval(f.div_pos(g).one_minus())
            }
            SupportPoint::Index(k) => {
                let a = (self.f.log_coeff(k) + k as f64 * theta.ln()).exp();
                let fuzz = a * 1e-14;
                PmfValue::from_interval(Interval::new(a - fuzz, a + fuzz).div_pos(g))
            }
        })
    }

    /// Smallest certified cutoff `m` such that the lattice tail mass beyond
    /// `m` is at most `epsilon`: the geometric tail certificate bounds the
    /// remaining terms of `g`, each of which dominates the corresponding pmf
    /// numerator (`b_k >= 1`), and the partial sum of `g` is a lower bound
    /// for the denominator.
    pub fn cdf_tail_cutoff(&self, theta: f64, epsilon: f64) -> Result<u64> {
        self.check_theta(theta)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon must be in (0, 1), got {epsilon}"
            )));
        }
        let mut scan = CertScan::new(theta, ln_ratio_cap(theta, self.g.known_radius()));
        for lc in self.g.log_coeffs().take(self.opts.term_budget as usize) {
            if let Some(tail) = scan.push(lc) {
                if tail / scan.sum() <= epsilon {
                    return Ok(scan.consumed() - 1);
                }
            }
        }
        Err(Error::NoConvergenceCertificate {
            budget: self.opts.term_budget,
            detail: format!("tail cutoff for epsilon = {epsilon:.3e} at theta = {theta}"),
        })
    }

    /// Certified pmf rows for the atom and every lattice index `0..=kmax`,
    /// sharing one normalizer evaluation across all rows.
    pub fn pmf_prefix(
        &self,
        theta: f64,
        kmax: u64,
        tol: f64,
    ) -> Result<(PmfValue, Vec<PmfValue>)> {
        self.check_theta(theta)?;
        let g = self.eval_stream(&self.g, theta, tol)?.interval();
        let f = self.eval_stream(&self.f, theta, tol)?.interval();
        let atom = PmfValue::from_interval(f.div_pos(g).one_minus());
        let ln_theta = theta.ln();
        let entries: Vec<PmfValue> = self
            .f
            .log_coeffs()
            .take(kmax as usize + 1)
            .enumerate()
            .map(|(k, lc)| {
                let a = (lc + k as f64 * ln_theta).exp();
                let fuzz = a * 1e-14;
                PmfValue::from_interval(Interval::new(a - fuzz, a + fuzz).div_pos(g))
            })
            .collect();
        Ok((atom, entries))
    }

    /// Certified probability table up to the `epsilon`-tail cutoff, with the
    /// residual lattice mass reported separately (never renormalized away).
    pub fn pmf_table(&self, theta: f64, epsilon: f64, tol: f64) -> Result<PmfTable> {
        let cutoff = self.cdf_tail_cutoff(theta, epsilon)?;
        let (atom, entries) = self.pmf_prefix(theta, cutoff, tol)?;
        let assigned: f64 =
            atom.probability + entries.iter().map(|e| e.probability).sum::<f64>();
        Ok(PmfTable {
            theta,
            epsilon,
            atom,
            entries,
            cutoff,
            residual: (1.0 - assigned).max(0.0),
        })
    }

    /// The standard evaluation grid for this family: 20 evenly spaced interior
    /// points `radius * j / 21`, or `{0.25, 0.5, ..., 5.0}` when the parameter
    /// domain is unbounded.
    pub fn theta_grid(&self) -> Vec<f64> {
        theta_grid(self.radius)
    }

    /// Display a support point using this family's atom label.
    pub fn format_point(&self, p: SupportPoint) -> String {
        match p {
            SupportPoint::Atom => format!("{}", self.atom_label),
            SupportPoint::Index(k) => format!("{k}"),
        }
    }

    /// Replace the auto-generated label (configuration files may name the
    /// family explicitly).
    pub(crate) fn with_label(mut self, label: String) -> Self {
        self.label = label;
        self
    }

    fn with_tag(mut self, tag: OracleTag) -> Self {
        self.label = format!("{} ({})", tag.name(), self.label);
        self.oracle_tag = Some(tag);
        self
    }

    /// Built-in family `f = exp`, `b_k = 2^k` (atom mass `1 - e^{-theta}`).
    pub fn example1() -> Family {
        build_family(
            CoefficientStream::exponential(),
            BSequence::geometric_mix(vec![GeometricTerm {
                weight: 1.0,
                limit: 2.0,
                offset: 0.0,
            }])
            .expect("valid parameters"),
            -1.0,
            FamilyOptions::default(),
        )
        .expect("built-in family is admissible")
        .with_tag(OracleTag::Example1)
    }

    /// Built-in family `f = 1 - ln(1-theta)`, `b_0 = 1, b_k = k`.
    pub fn example2() -> Family {
        build_family(
            CoefficientStream::log_series_plus_one(),
            BSequence::power_mix(vec![PowerTerm { weight: 1.0, power: 1.0 }])
                .expect("valid parameters"),
            -1.0,
            FamilyOptions::default(),
        )
        .expect("built-in family is admissible")
        .with_tag(OracleTag::Example2)
    }

    /// Built-in family `f = (1-theta)^{-1}`, `b_k = (k+1)(k+2)/2`.
    pub fn example3() -> Family {
        build_family(
            CoefficientStream::geometric(1.0).expect("valid parameters"),
            BSequence::binomial_ratio_mix(vec![BinomialRatioTerm {
                weight: 1.0,
                alpha: 1.0,
                beta: 3.0,
            }])
            .expect("valid parameters"),
            -1.0,
            FamilyOptions::default(),
        )
        .expect("built-in family is admissible")
        .with_tag(OracleTag::Example3)
    }

    /// Built-in family `f = (1-theta)^{-1}`, `b_k = k + 1` (the classic
    /// minimal-variance textbook case).
    pub fn lehmann_scheffe() -> Family {
        build_family(
            CoefficientStream::geometric(1.0).expect("valid parameters"),
            BSequence::binomial_ratio_mix(vec![BinomialRatioTerm {
                weight: 1.0,
                alpha: 1.0,
                beta: 2.0,
            }])
            .expect("valid parameters"),
            -1.0,
            FamilyOptions::default(),
        )
        .expect("built-in family is admissible")
        .with_tag(OracleTag::LehmannScheffe)
    }

    pub fn builtin(tag: OracleTag) -> Family {
        match tag {
            OracleTag::Example1 => Family::example1(),
            OracleTag::Example2 => Family::example2(),
            OracleTag::Example3 => Family::example3(),
            OracleTag::LehmannScheffe => Family::lehmann_scheffe(),
        }
    }

    pub fn builtin_all() -> Vec<Family> {
        OracleTag::ALL.iter().map(|t| Family::builtin(*t)).collect()
    }
}

/// Standard 20-point evaluation grid for a parameter domain `(0, radius)`.
pub fn theta_grid(radius: f64) -> Vec<f64> {
    if radius.is_finite() {
        (1..=20).map(|j| radius * j as f64 / 21.0).collect()
    } else {
        (1..=20).map(|j| 0.25 * j as f64).collect()
    }
}

/// Certified probability table up to a tail cutoff.
#[derive(Clone, Debug)]
pub struct PmfTable {
    pub theta: f64,
    pub epsilon: f64,
    pub atom: PmfValue,
    /// `entries[k]` is the certified `p(k; theta)` for `k <= cutoff`.
    pub entries: Vec<PmfValue>,
    pub cutoff: u64,
    /// Lattice mass beyond the cutoff (at most `epsilon` up to the certified
    /// evaluation error); assigned to the overflow sentinel when sampling.
    pub residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn example_families_have_expected_structure() {
        let fam = Family::example1();
        assert_eq!(fam.radius(), f64::INFINITY);
        assert_eq!(fam.j().indices, vec![0]);
        let fam = Family::example2();
        assert_eq!(fam.radius(), 1.0);
        assert_eq!(fam.j().indices, vec![0, 1]);
        let fam = Family::example3();
        assert_eq!(fam.radius(), 1.0);
        assert_eq!(fam.j().indices, vec![0]);
        let fam = Family::lehmann_scheffe();
        assert_eq!(fam.radius(), 1.0);
        assert_eq!(fam.j().indices, vec![0]);
    }

    #[test]
    fn pmf_matches_frozen_closed_form_values() {
        let cases: Vec<(Family, SupportPoint, f64)> = vec![
            (Family::example1(), SupportPoint::Atom, 0.3934693402873666),
            (Family::example1(), SupportPoint::Index(3), 0.007664155024405049),
            (Family::example2(), SupportPoint::Atom, 0.1534264097200273),
            (Family::example2(), SupportPoint::Index(0), 0.5),
            (Family::example2(), SupportPoint::Index(4), 0.0078125),
            (Family::example3(), SupportPoint::Atom, 0.75),
            (Family::example3(), SupportPoint::Index(2), 0.03125),
            (Family::lehmann_scheffe(), SupportPoint::Atom, 0.5),
            (Family::lehmann_scheffe(), SupportPoint::Index(2), 0.0625),
        ];
        for (fam, point, oracle) in cases {
            let p = fam.pmf(point, 0.5, TOL).unwrap();
            assert!(
                (p.probability - oracle).abs() <= p.error_bound + 1e-13,
                "family `{}` point {point:?}: {} vs oracle {oracle} (bound {:.3e})",
                fam.label(),
                p.probability,
                p.error_bound
            );
            assert!(p.error_bound <= 1e-10);
        }
    }

    #[test]
    fn normalizer_matches_oracle_across_the_grid() {
        for fam in Family::builtin_all() {
            let tag = fam.oracle_tag().unwrap().name();
            for theta in fam.theta_grid() {
                let g = fam.eval_stream(fam.g(), theta, TOL).unwrap();
                let oracle =
                    closed_form_oracle(tag, OracleQuantity::Normalizer, theta, None).unwrap();
                assert!(
                    (g.value - oracle).abs() <= oracle * 1e-10,
                    "`{tag}` at theta = {theta}: {} vs {oracle}",
                    g.value
                );
            }
        }
    }

    #[test]
    fn probabilities_sum_to_one_within_certified_slack() {
        for fam in Family::builtin_all() {
            for theta in fam.theta_grid() {
                let table = fam.pmf_table(theta, 1e-10, TOL).unwrap();
                let total = table.atom.probability
                    + table.entries.iter().map(|e| e.probability).sum::<f64>()
                    + table.residual;
                assert!(
                    (1.0 - 2e-10..=1.0 + 1e-9).contains(&total),
                    "family `{}` at theta = {theta}: total {total}",
                    fam.label()
                );
            }
        }
    }

    #[test]
    fn tail_cutoff_is_certified_and_tight() {
        // Frozen check: at theta = 0.5, epsilon = 2^-20, the third example's
        // cutoff lands in the mid-20s to mid-30s and the true remaining mass
        // (closed form: quadratic-weighted geometric tail over g) is below
        // epsilon.
        let fam = Family::example3();
        let eps = (2.0f64).powi(-20);
        let m = fam.cdf_tail_cutoff(0.5, eps).unwrap();
        assert!(
            (25..=35).contains(&m),
            "cutoff {m} outside the expected band"
        );
        // True lattice tail: sum_{k>m} (1-t)^3 t^k = (1-t)^2 * t^{m+1} at t = 1/2.
        let true_tail = 0.25 * 0.5f64.powi(m as i32 + 1);
        assert!(true_tail <= eps);
        // One step earlier must not satisfy the certificate's guarantee
        // target: the certified bound is conservative, but the cutoff must
        // still be within a few indices of the information-theoretic minimum
        // (2^-(m+3) <= eps gives m >= 17).
        assert!(m >= 17);
    }

    #[test]
    fn atom_labels_off_the_lattice_are_accepted() {
        let f = CoefficientStream::geometric(1.0).unwrap();
        let b = BSequence::binomial_ratio_mix(vec![BinomialRatioTerm {
            weight: 1.0,
            alpha: 1.0,
            beta: 3.0,
        }])
        .unwrap();
        let fam = build_family(f.clone(), b.clone(), -2.5, FamilyOptions::default()).unwrap();
        assert_eq!(fam.atom_label(), -2.5);
        assert!(matches!(
            build_family(f.clone(), b.clone(), 3.0, FamilyOptions::default()),
            Err(Error::Param(_))
        ));
        assert!(matches!(
            build_family(f, b, f64::NAN, FamilyOptions::default()),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn construction_rejects_inadmissible_weights() {
        let f = CoefficientStream::log_series_plus_one();
        let b = BSequence::power_mix(vec![PowerTerm { weight: 1.0, power: 1.0 }])
            .unwrap()
            .with_injected_value(1, 0.5)
            .unwrap();
        match build_family(f, b, -1.0, FamilyOptions::default()) {
            Err(Error::ConditionAViolation { clause, .. }) => {
                assert_eq!(clause, "b_at_least_one");
            }
            other => panic!("expected admissibility violation, got {other:?}"),
        }
    }

    #[test]
    fn pmf_rejects_out_of_domain_theta() {
        let fam = Family::example3();
        assert!(matches!(
            fam.pmf(SupportPoint::Atom, 1.0, TOL),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fam.pmf(SupportPoint::Atom, 0.0, TOL),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn oracle_registry_rejects_unknown_tags_and_bad_domains() {
        assert!(matches!(
            closed_form_oracle("example9", OracleQuantity::Normalizer, 0.5, None),
            Err(Error::UnknownTag(_))
        ));
        assert!(matches!(
            closed_form_oracle("example2", OracleQuantity::Normalizer, 1.5, None),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            closed_form_oracle("example2", OracleQuantity::PmfIndex, 0.5, None),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn theta_grid_follows_the_two_conventions() {
        let g = theta_grid(1.0);
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1.0 / 21.0).abs() <= 1e-15);
        assert!((g[19] - 20.0 / 21.0).abs() <= 1e-15);
        let g = theta_grid(f64::INFINITY);
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 0.25);
        assert_eq!(g[19], 5.0);
    }
}
