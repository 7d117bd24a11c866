//! Flat, line-oriented configuration files describing a family.
//!
//! The format is sectioned key-value text with no nesting — trivially
//! parseable from any language and diff-friendly as a fixture format:
//!
//! ```text
//! # comment (also ';')
//! [f]
//! name = geometric          # exp | geometric | logseries-plus-one | coefficient-file
//! gamma = 1.0               # geometric only
//! # path = coeffs.txt       # coefficient-file only: one positive value per line
//! # tail_ratio = 0.5        # coefficient-file only: geometric continuation ratio
//!
//! [b]
//! kind = binomial-ratio-mix # geometric-mix | power-mix | binomial-ratio-mix |
//!                           # log-poly-mix | combined (aliases cor1..cor4)
//! weights = 1
//! alphas = 1
//! betas = 3
//! # inject_at = 1           # optional fault injection for negative tests
//! # inject_value = 0.5
//!
//! [family]
//! atom = -1                 # any finite real outside {0, 1, 2, ...}
//! label = my-family
//!
//! [options]
//! series_tol = 1e-12
//! epsilon_tail = 1e-10
//! k_probe = 10000
//! margin = 0.5
//! radius_probe = 256
//! term_budget = 100000
//! ```
//!
//! Per-kind parameter keys: `limits`/`offsets` (geometric-mix), `powers`
//! (power-mix), `alphas`/`betas` (binomial-ratio-mix), `poly1`, `poly2`, ...
//! (log-poly-mix, one low-to-high coefficient list per mixture term). A
//! `combined` kind takes `member_weights = w1, w2, ...` plus one
//! `memberN.<key>` group per member describing a non-geometric mixture.
//!
//! The environment variable `PSFAM_TERM_BUDGET` overrides `term_budget`
//! everywhere; it is the only environment influence on the toolkit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::bseq::{BSequence, BinomialRatioTerm, GeometricTerm, LogPolyTerm, PowerTerm};
use crate::family::{build_family, Family, FamilyOptions};
use crate::series::CoefficientStream;
use crate::{Error, Result};

/// One parsed key: value text plus the line it came from (for error reports).
#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: String,
}

#[derive(Clone, Debug, Default)]
struct Section {
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn require(&self, key: &str, section: &str) -> Result<&Entry> {
        self.get(key).ok_or_else(|| Error::Config {
            line: 0,
            message: format!("missing key `{key}` in section [{section}]"),
        })
    }
}

fn parse_f64(e: &Entry, key: &str) -> Result<f64> {
    e.value.trim().parse::<f64>().map_err(|_| Error::Config {
        line: e.line,
        message: format!("key `{key}`: expected a number, got `{}`", e.value),
    })
}

fn parse_u64(e: &Entry, key: &str) -> Result<u64> {
    e.value.trim().parse::<u64>().map_err(|_| Error::Config {
        line: e.line,
        message: format!("key `{key}`: expected a nonnegative integer, got `{}`", e.value),
    })
}

fn parse_list(e: &Entry, key: &str) -> Result<Vec<f64>> {
    e.value
        .split(',')
        .map(|tok| {
            tok.trim().parse::<f64>().map_err(|_| Error::Config {
                line: e.line,
                message: format!("key `{key}`: `{}` is not a number", tok.trim()),
            })
        })
        .collect()
}

/// A parsed configuration, ready to build.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub f: CoefficientStream,
    pub b: BSequence,
    pub atom: f64,
    pub label: Option<String>,
    pub options: FamilyOptions,
}

impl FamilySpec {
    /// Assemble the family (admissibility validation happens here).
    pub fn build(self) -> Result<Family> {
        let fam = build_family(self.f, self.b, self.atom, self.options)?;
        Ok(match self.label {
            Some(label) => fam.with_label(label),
            None => fam,
        })
    }
}

/// Parse configuration text. `base_dir` anchors relative coefficient-file
/// paths (use the config file's directory).
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<FamilySpec> {
    let sections = split_sections(text)?;
    let empty = Section::default();
    let f_sec = sections.get("f").ok_or_else(|| Error::Config {
        line: 0,
        message: "missing section [f]".into(),
    })?;
    let b_sec = sections.get("b").ok_or_else(|| Error::Config {
        line: 0,
        message: "missing section [b]".into(),
    })?;
    let fam_sec = sections.get("family").unwrap_or(&empty);
    let opt_sec = sections.get("options").unwrap_or(&empty);

    let f = build_f(f_sec, base_dir)?;
    let b = build_b(b_sec)?;
    let atom = match fam_sec.get("atom") {
        Some(e) => parse_f64(e, "atom")?,
        None => -1.0,
    };
    let label = fam_sec.get("label").map(|e| e.value.clone());
    let options = build_options(opt_sec)?;
    Ok(FamilySpec {
        f,
        b,
        atom,
        label,
        options,
    })
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<FamilySpec> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text, path.parent())
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find(['#', ';']) {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("malformed section header `{}`", raw.trim()),
            })?;
            let name = name.trim().to_ascii_lowercase();
            current = Some(name.clone());
            sections.entry(name).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let section = current.clone().ok_or_else(|| Error::Config {
            line: line_no,
            message: "key outside any [section]".into(),
        })?;
        let key = key.trim().to_ascii_lowercase();
        let entry = Entry {
            line: line_no,
            value: value.trim().to_owned(),
        };
        let slot = sections.entry(section).or_default();
        if slot.entries.insert(key.clone(), entry).is_some() {
            return Err(Error::Config {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(sections)
}

fn build_f(sec: &Section, base_dir: Option<&Path>) -> Result<CoefficientStream> {
    let name_entry = sec.require("name", "f")?;
    let name = name_entry.value.to_ascii_lowercase();
    match name.as_str() {
        "exp" | "exponential" => Ok(CoefficientStream::exponential()),
        "geometric" => {
            let gamma = parse_f64(sec.require("gamma", "f")?, "gamma")?;
            CoefficientStream::geometric(gamma)
        }
        "logseries-plus-one" | "log-series-plus-one" => {
            Ok(CoefficientStream::log_series_plus_one())
        }
        "coefficient-file" | "custom-coefficient-file" => {
            let path_entry = sec.require("path", "f")?;
            let tail = parse_f64(sec.require("tail_ratio", "f")?, "tail_ratio")?;
            let mut path = PathBuf::from(&path_entry.value);
            if path.is_relative() {
                if let Some(dir) = base_dir {
                    path = dir.join(path);
                }
            }
            let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            let mut head = Vec::new();
            for (idx, raw) in text.lines().enumerate() {
                let line = match raw.find(['#', ';']) {
                    Some(pos) => &raw[..pos],
                    None => raw,
                }
                .trim();
                if line.is_empty() {
                    continue;
                }
                head.push(line.parse::<f64>().map_err(|_| Error::Config {
                    line: idx + 1,
                    message: format!(
                        "coefficient file {}: `{line}` is not a number",
                        path.display()
                    ),
                })?);
            }
            CoefficientStream::from_table(head, tail)
        }
        other => Err(Error::Config {
            line: name_entry.line,
            message: format!(
                "unknown base series `{other}` (expected exp, geometric, \
                 logseries-plus-one, or coefficient-file)"
            ),
        }),
    }
}

fn canonical_kind(raw: &str) -> &str {
    match raw {
        "cor1" => "geometric-mix",
        "cor2" => "power-mix",
        "cor3" => "binomial-ratio-mix",
        "cor4" => "log-poly-mix",
        "combine" => "combined",
        other => other,
    }
}

fn build_b(sec: &Section) -> Result<BSequence> {
    let kind_entry = sec.require("kind", "b")?;
    let kind = kind_entry.value.to_ascii_lowercase();
    let b = build_b_kind(sec, canonical_kind(&kind), kind_entry.line)?;
    match (sec.get("inject_at"), sec.get("inject_value")) {
        (Some(at), Some(value)) => {
            b.with_injected_value(parse_u64(at, "inject_at")?, parse_f64(value, "inject_value")?)
        }
        (None, None) => Ok(b),
        (Some(e), None) | (None, Some(e)) => Err(Error::Config {
            line: e.line,
            message: "inject_at and inject_value must be given together".into(),
        }),
    }
}

fn build_b_kind(sec: &Section, kind: &str, kind_line: usize) -> Result<BSequence> {
    match kind {
        "geometric-mix" => {
            let weights = parse_list(sec.require("weights", "b")?, "weights")?;
            let limits = parse_list(sec.require("limits", "b")?, "limits")?;
            let offsets = match sec.get("offsets") {
                Some(e) => parse_list(e, "offsets")?,
                None => vec![0.0; weights.len()],
            };
            if weights.len() != limits.len() || weights.len() != offsets.len() {
                return Err(Error::Config {
                    line: kind_line,
                    message: "weights, limits, and offsets must have equal length".into(),
                });
            }
            BSequence::geometric_mix(
                weights
                    .into_iter()
                    .zip(limits)
                    .zip(offsets)
                    .map(|((weight, limit), offset)| GeometricTerm {
                        weight,
                        limit,
                        offset,
                    })
                    .collect(),
            )
        }
        "power-mix" => {
            let weights = parse_list(sec.require("weights", "b")?, "weights")?;
            let powers = parse_list(sec.require("powers", "b")?, "powers")?;
            if weights.len() != powers.len() {
                return Err(Error::Config {
                    line: kind_line,
                    message: "weights and powers must have equal length".into(),
                });
            }
            BSequence::power_mix(
                weights
                    .into_iter()
                    .zip(powers)
                    .map(|(weight, power)| PowerTerm { weight, power })
                    .collect(),
            )
        }
        "binomial-ratio-mix" => {
            let weights = parse_list(sec.require("weights", "b")?, "weights")?;
            let alphas = parse_list(sec.require("alphas", "b")?, "alphas")?;
            let betas = parse_list(sec.require("betas", "b")?, "betas")?;
            if weights.len() != alphas.len() || weights.len() != betas.len() {
                return Err(Error::Config {
                    line: kind_line,
                    message: "weights, alphas, and betas must have equal length".into(),
                });
            }
            BSequence::binomial_ratio_mix(
                weights
                    .into_iter()
                    .zip(alphas.into_iter().zip(betas))
                    .map(|(weight, (alpha, beta))| BinomialRatioTerm {
                        weight,
                        alpha,
                        beta,
                    })
                    .collect(),
            )
        }
        "log-poly-mix" => {
            let weights = parse_list(sec.require("weights", "b")?, "weights")?;
            let mut terms = Vec::new();
            for (i, weight) in weights.iter().enumerate() {
                let key = format!("poly{}", i + 1);
                let coeffs = parse_list(sec.require(&key, "b")?, &key)?;
                terms.push(LogPolyTerm {
                    weight: *weight,
                    coeffs,
                });
            }
            BSequence::log_poly_mix(terms)
        }
        "combined" => {
            let outer = parse_list(sec.require("member_weights", "b")?, "member_weights")?;
            let mut members = Vec::new();
            for (i, w) in outer.iter().enumerate() {
                let prefix = format!("member{}.", i + 1);
                let mut sub = Section::default();
                for (key, entry) in &sec.entries {
                    if let Some(stripped) = key.strip_prefix(&prefix) {
                        sub.entries.insert(stripped.to_owned(), entry.clone());
                    }
                }
                let kind_entry = sub.require("kind", "b")?.clone();
                let kind = kind_entry.value.to_ascii_lowercase();
                let member = build_b_kind(&sub, canonical_kind(&kind), kind_entry.line)?;
                members.push((*w, member));
            }
            BSequence::combine(members)
        }
        other => Err(Error::Config {
            line: kind_line,
            message: format!(
                "unknown weight-sequence kind `{other}` (expected geometric-mix, \
                 power-mix, binomial-ratio-mix, log-poly-mix, or combined)"
            ),
        }),
    }
}

fn build_options(sec: &Section) -> Result<FamilyOptions> {
    let mut opts = FamilyOptions::default();
    if let Some(e) = sec.get("series_tol") {
        opts.series_tol = parse_f64(e, "series_tol")?;
    }
    if let Some(e) = sec.get("epsilon_tail") {
        opts.epsilon_tail = parse_f64(e, "epsilon_tail")?;
    }
    if let Some(e) = sec.get("k_probe") {
        opts.k_probe = parse_u64(e, "k_probe")?;
    }
    if let Some(e) = sec.get("margin") {
        opts.margin = parse_f64(e, "margin")?;
    }
    if let Some(e) = sec.get("radius_probe") {
        opts.radius_probe = parse_u64(e, "radius_probe")?;
    }
    if let Some(e) = sec.get("term_budget") {
        opts.term_budget = parse_u64(e, "term_budget")?;
    }
    if let Ok(raw) = std::env::var("PSFAM_TERM_BUDGET") {
        opts.term_budget = raw.trim().parse::<u64>().map_err(|_| Error::Config {
            line: 0,
            message: format!("PSFAM_TERM_BUDGET: `{raw}` is not a nonnegative integer"),
        })?;
    }
    Ok(opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::SupportPoint;

    const EX3: &str = "
# cubic-normalizer family
[f]
name = geometric
gamma = 1.0

[b]
kind = binomial-ratio-mix
weights = 1
alphas = 1
betas = 3

[family]
atom = -1
label = fixture-three
";

    #[test]
    fn parses_and_builds_a_full_family() {
        let spec = parse_config(EX3, None).unwrap();
        assert_eq!(spec.label.as_deref(), Some("fixture-three"));
        let fam = spec.build().unwrap();
        assert_eq!(fam.label(), "fixture-three");
        assert_eq!(fam.radius(), 1.0);
        let p = fam.pmf(SupportPoint::Atom, 0.5, 1e-12).unwrap();
        assert!((p.probability - 0.75).abs() <= 1e-10);
    }

    #[test]
    fn kind_aliases_map_to_descriptive_names() {
        let text = EX3.replace("binomial-ratio-mix", "cor3");
        let spec = parse_config(&text, None).unwrap();
        let fam = spec.build().unwrap();
        assert_eq!(fam.j().indices, vec![0]);
    }

    #[test]
    fn combined_kind_reads_prefixed_member_groups() {
        let text = "
[f]
name = exp
[b]
kind = combined
member_weights = 0.5, 0.5
member1.kind = power-mix
member1.weights = 1
member1.powers = 2
member2.kind = cor3
member2.weights = 1
member2.alphas = 1
member2.betas = 3
";
        let spec = parse_config(text, None).unwrap();
        // b_1 = 0.5 * 1 + 0.5 * 1 = 1; b_3 = 0.5 * 9 + 0.5 * 10 = 9.5.
        let b = &spec.b;
        assert!((b.log_b(3).exp() - 9.5).abs() <= 1e-12);
        assert!(spec.build().is_ok());
    }

    #[test]
    fn coefficient_files_feed_the_table_stream() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("coeffs.txt"), "2.0\n3.0\n").unwrap();
        let text = "
[f]
name = coefficient-file
path = coeffs.txt
tail_ratio = 0.5
[b]
kind = power-mix
weights = 1
powers = 1
";
        let spec = parse_config(text, Some(dir.path())).unwrap();
        // a_0 = 2, a_1 = 3, a_k = 3 * 0.5^{k-1}: radius 2, f(1) = 2 + 3 * 2 = 8.
        let v = crate::series::eval_series(&spec.f, 1.0, 1e-12).unwrap();
        assert!((v.value - 8.0).abs() <= 1e-10);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "[f]\nname = exp\n[b]\nkind = power-mix\nweights = one\npowers = 1\n";
        match parse_config(text, None) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("not a number"), "{message}");
            }
            other => panic!("expected a located parse error, got {other:?}"),
        }
        let text = "name = exp\n";
        match parse_config(text, None) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected a located parse error, got {other:?}"),
        }
        let text = "[f]\nname = exp\nname = exp\n";
        match parse_config(text, None) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("duplicate"), "{message}");
            }
            other => panic!("expected a duplicate-key error, got {other:?}"),
        }
    }

    #[test]
    fn fault_injection_keys_dent_the_sequence() {
        let text = "
[f]
name = logseries-plus-one
[b]
kind = power-mix
weights = 1
powers = 1
inject_at = 1
inject_value = 0.5
";
        let spec = parse_config(text, None).unwrap();
        match spec.build() {
            Err(Error::ConditionAViolation { clause, .. }) => {
                assert_eq!(clause, "b_at_least_one")
            }
            other => panic!("expected admissibility rejection, got {other:?}"),
        }
    }

    #[test]
    fn missing_sections_and_keys_are_reported() {
        assert!(matches!(
            parse_config("[f]\nname = exp\n", None),
            Err(Error::Config { .. })
        ));
        assert!(matches!(
            parse_config("[f]\nname = geometric\n[b]\nkind = power-mix\nweights = 1\npowers = 1\n", None),
            Err(Error::Config { .. })
        ));
    }
}
