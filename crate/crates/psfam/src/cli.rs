//! Command-line interface for the `psfam` binary.
//!
//! Subcommands: `describe`, `pmf`, `sample`, `verify`, `umvue`. Exit codes
//! are a stable contract:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | argument or configuration parse error     |
//! | 2    | domain or validation error                |
//! | 3    | i/o error                                 |
//! | 4    | verification failure (some claim not pass)|

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand};

use crate::bseq::{estimate_growth_l, validate_condition_a};
use crate::config::load_config;
use crate::estimator::{expectation, psi_value, umvue, variance, PsiTarget};
use crate::family::SupportPoint;
use crate::sampler::sample;
use crate::series::estimate_radius;
use crate::verify::{run_all, VerificationReport, VerifyConfig};
use crate::{Error, Interval};

/// Success.
pub const EXIT_OK: u8 = 0;
/// Argument or configuration parse error.
pub const EXIT_PARSE: u8 = 1;
/// Domain or validation error (bad parameter, inadmissible family, target
/// outside the admissible class).
pub const EXIT_DOMAIN: u8 = 2;
/// I/O error (unreadable config, unwritable output).
pub const EXIT_IO: u8 = 3;
/// Verification ran but some claim did not pass.
pub const EXIT_VERIFY: u8 = 4;

/// Largest `epsilon` the `sample` subcommand accepts: the discarded lattice
/// tail must be negligible relative to Monte Carlo noise at any feasible
/// sample size.
pub const MAX_SAMPLE_EPSILON: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "psfam",
    version,
    about = "Power-series families with an off-lattice atom: certified \
             evaluation, sampling, estimation, verification",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Summarize a family: series radii, weight growth, the exceptional
    /// index set J, the admissible target class, and the admissibility
    /// checklist.
    Describe {
        /// Path to a family configuration file.
        config: PathBuf,
    },

    /// Print certified probabilities as CSV. Columns: `k, probability,
    /// error_bound`; one row for the atom, one per lattice index `0..=kmax`,
    /// then a final `TOTAL` row holding the partial sum and a bound on the
    /// mass beyond the listed rows.
    Pmf {
        /// Path to a family configuration file.
        config: PathBuf,
        /// Parameter value (must lie in the open parameter domain).
        #[arg(long)]
        theta: f64,
        /// Largest lattice index to list.
        #[arg(long, default_value_t = 20)]
        kmax: u64,
    },

    /// Draw a reproducible sample and write it to a file: header comment
    /// lines record the generator, seed, theta, epsilon, tail cutoff and
    /// residual mass, then one draw per line. Fixed seeds give
    /// byte-identical files.
    Sample {
        /// Path to a family configuration file.
        config: PathBuf,
        /// Parameter value.
        #[arg(long)]
        theta: f64,
        /// Number of draws.
        #[arg(long)]
        n: usize,
        /// Seed for the deterministic generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Certified bound on the lattice tail mass folded into the sentinel
        /// index; must lie in (0, 1e-6].
        #[arg(long, default_value_t = 1e-10)]
        epsilon: f64,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Run the verification battery and print one line per claim. Exits 0
    /// only if every claim passes; 4 if any claim fails or cannot be
    /// certified.
    #[command(group = ArgGroup::new("subject").required(true).args(["config", "builtin_examples"]))]
    Verify {
        /// Path to a family configuration file.
        config: Option<PathBuf>,
        /// Verify the built-in worked examples instead of a configured
        /// family.
        #[arg(long)]
        builtin_examples: bool,
        /// Also write the report as CSV (`claim_id,status,measured,tolerance`).
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },

    /// Construct the minimum-variance unbiased estimator of the target
    /// `a + (sum_k c_k theta^k) / g(theta)` and tabulate target value,
    /// estimator mean, estimator variance and a certified error bound over
    /// the parameter grid.
    Umvue {
        /// Path to a family configuration file.
        config: PathBuf,
        /// Constant part of the target.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        /// Polynomial part as comma-separated `k=v` pairs (e.g. `0=1,1=0.5`);
        /// every index must lie in the family's exceptional set J.
        #[arg(long, default_value = "")]
        c: String,
        /// Evaluate at a single parameter value instead of the grid.
        #[arg(long, conflicts_with = "theta_grid", allow_negative_numbers = true)]
        theta: Option<f64>,
        /// Evaluate over the standard 20-point parameter grid (the default).
        #[arg(long)]
        theta_grid: bool,
    },
}

/// Run the CLI against explicit arguments (first element is the program
/// name) and return the process exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let kind = e.kind();
            let _ = e.print();
            return match kind {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARSE,
            };
        }
    };
    match run_cmd(cli.cmd) {
        Ok(code) => code,
        Err(CmdError::Lib(e)) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
        Err(CmdError::Msg { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    }
}

/// Run the CLI against the process arguments.
pub fn run() -> u8 {
    run_from(std::env::args_os())
}

enum CmdError {
    Lib(Error),
    Msg { code: u8, message: String },
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Lib(e)
    }
}

fn fail(code: u8, message: String) -> CmdError {
    CmdError::Msg { code, message }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => EXIT_PARSE,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_DOMAIN,
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn run_cmd(cmd: Cmd) -> Result<u8, CmdError> {
    match cmd {
        Cmd::Describe { config } => cmd_describe(&config),
        Cmd::Pmf {
            config,
            theta,
            kmax,
        } => cmd_pmf(&config, theta, kmax),
        Cmd::Sample {
            config,
            theta,
            n,
            seed,
            epsilon,
            out,
        } => cmd_sample(&config, theta, n, seed, epsilon, &out),
        Cmd::Verify {
            config,
            builtin_examples,
            out_csv,
        } => cmd_verify(config.as_deref(), builtin_examples, out_csv.as_deref()),
        Cmd::Umvue {
            config,
            a,
            c,
            theta,
            theta_grid: _,
        } => cmd_umvue(&config, a, &c, theta),
    }
}

/// Plain rendering for structural numbers: `1`, `0.75`, `inf`.
fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn fmt_set(indices: &[u64]) -> String {
    let inner: Vec<String> = indices.iter().map(|k| k.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

fn psi0_string(indices: &[u64]) -> String {
    let mut s = String::from("a");
    for k in indices {
        s.push_str(&format!(" + c{k}*theta^{k}/g(theta)"));
    }
    s
}

fn cmd_describe(config: &Path) -> Result<u8, CmdError> {
    let spec = load_config(config)?;
    println!("config: {}", config.display());
    println!("f: {} (coefficient stream)", spec.f.tag());
    println!("b: {} (weight sequence)", spec.b.label());
    println!("atom: {}", fmt_num(spec.atom));

    // Structural quantities that exist even when admissibility fails.
    let r1 = spec.f.known_radius();
    match r1 {
        Some(r) => println!("R1 = {}", fmt_num(r)),
        None => {
            let bracket = estimate_radius(&spec.f, spec.options.radius_probe)?;
            println!("R1 in [{}, {}] (numeric)", fmt_num(bracket.lo), fmt_num(bracket.hi));
        }
    }
    let growth = spec.b.declared_growth();
    match growth {
        Some(l) => println!("L = {}", fmt_num(l)),
        None => {
            let est = estimate_growth_l(&spec.b, spec.options.k_probe.max(256))?;
            println!(
                "L in [{}, {}] (numeric)",
                fmt_num(est.bracket.lo),
                fmt_num(est.bracket.hi)
            );
        }
    }
    let report = validate_condition_a(&spec.b, &spec.f, &spec.options.validate_options());
    match (r1, growth) {
        (Some(r), Some(l)) => {
            let r2 = if r.is_infinite() && l <= 1.0 + 1e-12 {
                f64::INFINITY
            } else {
                r / (l * l)
            };
            println!("R2 = {} (radius of the second-moment series, R1/L^2)", fmt_num(r2));
        }
        _ => println!("R2 >= {} (numeric lower bound)", fmt_num(report.r2_lower)),
    }

    println!("admissibility checklist:");
    for clause in &report.clauses {
        println!(
            "  [{}] {}: {}",
            if clause.pass { "ok" } else { "FAIL" },
            clause.name,
            clause.detail
        );
    }

    let fam = spec.build()?;
    println!("admissibility: pass");
    println!("R = {}", fmt_num(fam.radius()));
    println!("parameter domain: theta in (0, {})", fmt_num(fam.radius()));
    println!("J = {}", fmt_set(&fam.j().indices));
    println!("Psi0 = {}", psi0_string(&fam.j().indices));
    println!(
        "zero-class estimators: delta({}) = s, delta(k) = -s*(b_k - 1)",
        fam.format_point(SupportPoint::Atom)
    );
    Ok(EXIT_OK)
}

fn cmd_pmf(config: &Path, theta: f64, kmax: u64) -> Result<u8, CmdError> {
    let fam = load_config(config)?.build()?;
    let tol = fam.options().series_tol;
    let (atom, entries) = fam.pmf_prefix(theta, kmax, tol)?;

    println!("k,probability,error_bound");
    println!(
        "{},{:.16e},{:.16e}",
        fam.format_point(SupportPoint::Atom),
        atom.probability,
        atom.error_bound
    );
    let mut sum_mid = atom.probability;
    let mut sum_lo = atom.probability - atom.error_bound;
    for (k, e) in entries.iter().enumerate() {
        println!("{},{:.16e},{:.16e}", k, e.probability, e.error_bound);
        sum_mid += e.probability;
        sum_lo += e.probability - e.error_bound;
    }
    println!("TOTAL,{:.16e},{:.16e}", sum_mid, (1.0 - sum_lo).max(0.0));
    Ok(EXIT_OK)
}

fn cmd_sample(
    config: &Path,
    theta: f64,
    n: usize,
    seed: u64,
    epsilon: f64,
    out: &Path,
) -> Result<u8, CmdError> {
    if !(epsilon > 0.0 && epsilon <= MAX_SAMPLE_EPSILON) {
        return Err(Error::Domain(format!(
            "epsilon must lie in (0, {MAX_SAMPLE_EPSILON:e}], got {epsilon}"
        ))
        .into());
    }
    let fam = load_config(config)?.build()?;
    let batch = sample(&fam, theta, n, seed, epsilon)?;

    let file = File::create(out).map_err(|e| io_err(out, e))?;
    let mut w = BufWriter::new(file);
    let header = format!(
        "# psfam sample\n\
         # family = {}\n\
         # generator = chacha8\n\
         # seed = {}\n\
         # theta = {:.16e}\n\
         # epsilon = {:.16e}\n\
         # cutoff = {}\n\
         # residual_mass = {:.16e}\n\
         # n = {}\n",
        fam.label(),
        batch.seed,
        batch.theta,
        batch.epsilon,
        batch.cutoff_index,
        batch.residual_mass,
        batch.draws.len()
    );
    w.write_all(header.as_bytes()).map_err(|e| io_err(out, e))?;
    for d in &batch.draws {
        writeln!(w, "{}", fam.format_point(*d)).map_err(|e| io_err(out, e))?;
    }
    w.flush().map_err(|e| io_err(out, e))?;
    println!("wrote {} draws to {}", batch.draws.len(), out.display());
    Ok(EXIT_OK)
}

fn cmd_verify(
    config: Option<&Path>,
    builtin_examples: bool,
    out_csv: Option<&Path>,
) -> Result<u8, CmdError> {
    let report = if builtin_examples {
        run_all(&VerifyConfig::default())
    } else {
        let path = config.expect("clap enforces: config xor --builtin-examples");
        let spec = load_config(path)?;
        let label = spec
            .label
            .clone()
            .unwrap_or_else(|| path.display().to_string());
        match spec.build() {
            Ok(fam) => run_all(&VerifyConfig {
                families: vec![fam],
                ..VerifyConfig::default()
            }),
            Err(e @ Error::ConditionAViolation { .. }) => {
                VerificationReport::for_failed_construction(&label, &e.to_string())
            }
            Err(e) => return Err(e.into()),
        }
    };

    print!("{}", report.render_text());
    if let Some(path) = out_csv {
        std::fs::write(path, report.render_csv()).map_err(|e| io_err(path, e))?;
    }
    Ok(if report.overall_pass() {
        EXIT_OK
    } else {
        EXIT_VERIFY
    })
}

fn parse_targets(c: &str) -> Result<Vec<(u64, f64)>, CmdError> {
    let mut out = Vec::new();
    for part in c.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part.split_once('=').ok_or_else(|| {
            fail(
                EXIT_PARSE,
                format!("bad target term `{part}`: expected `k=value`"),
            )
        })?;
        let k: u64 = k.trim().parse().map_err(|_| {
            fail(
                EXIT_PARSE,
                format!("bad target index in `{part}`: expected a nonnegative integer"),
            )
        })?;
        let v: f64 = v.trim().parse().map_err(|_| {
            fail(
                EXIT_PARSE,
                format!("bad target coefficient in `{part}`: expected a real number"),
            )
        })?;
        out.push((k, v));
    }
    Ok(out)
}

/// Clamp a certified variance enclosure to the nonnegative axis (variances
/// are nonnegative, so the intersection stays a valid enclosure).
fn clamp_variance(v: Interval) -> Interval {
    Interval::new(v.lo.max(0.0), v.hi.max(0.0))
}

fn cmd_umvue(config: &Path, a: f64, c: &str, theta: Option<f64>) -> Result<u8, CmdError> {
    let pairs = parse_targets(c)?;
    let fam = load_config(config)?.build()?;
    let psi = PsiTarget::new(a, pairs)?;
    let est = umvue(&psi, &fam)?;

    println!(
        "# target: psi(theta) = {}",
        psi0_target_string(a, &psi)
    );
    println!(
        "# T({}) = {}",
        fam.format_point(SupportPoint::Atom),
        fmt_num(est.atom_value())
    );
    for (k, add) in est.exceptions() {
        println!("# T({k}) = {}", fmt_num(est.base() + add));
    }
    println!("# T(k) = {} for every other lattice index k", fmt_num(est.base()));

    if let Some(t) = theta {
        if !(t.is_finite() && t > 0.0 && t < fam.radius()) {
            return Err(Error::Domain(format!(
                "theta = {t} is outside the parameter domain (0, {})",
                fmt_num(fam.radius())
            ))
            .into());
        }
    }
    let thetas = match theta {
        Some(t) => vec![t],
        None => fam.theta_grid(),
    };
    let tol = fam.options().series_tol;

    println!("theta,psi,estimator_mean,estimator_variance,bound");
    for t in thetas {
        let psi_iv = psi_value(&psi, &fam, t, tol)?;
        let mean = expectation(&est, &fam, t, tol)?;
        let var = clamp_variance(variance(&est, &fam, t, tol)?);
        let bound = psi_iv
            .half_width()
            .max(mean.half_width())
            .max(var.half_width());
        println!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            t,
            psi_iv.mid(),
            mean.mid(),
            var.mid(),
            bound
        );
    }
    Ok(EXIT_OK)
}

fn psi0_target_string(a: f64, psi: &PsiTarget) -> String {
    let mut s = fmt_num(a);
    for (k, v) in &psi.c {
        s.push_str(&format!(" + {}*theta^{k}/g(theta)", fmt_num(*v)));
    }
    s
}
