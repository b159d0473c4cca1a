//! Command-line front end. Every subcommand builds a JSON report, which is
//! written as JSON, flattened `key,value` CSV, or `key: value` text.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{parse_gamma, DomainSpec};
use crate::kernel::{
    bound_ratio_sup, kernel_bound, kernel_series_ab, sample_pairs, series_closed_agreement, ClosedKernel,
    KernelEvalOptions,
};
use crate::lattice::RationalExponent;
use crate::monomial::{monomial_lp, monomial_norm_sq, FullIndex};
use crate::projection::{
    eval_monomial, project_antiholo_monomial, project_extrapolated, reproducing_residual, spread_targets, GridPlan,
    ProjectionKind,
};
use crate::range::{
    approximants, corollary_a, counterexample, divergence_certificate, irrational_witness, schur_p_interval,
    sharp_range, verify_auxiliary_integrals, verify_schur, AuxiliaryKind,
};
use crate::report::{flatten_json, ratio_string, Config};

/// Exit code for invalid input.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hartogs", version, about = "Bergman kernels and L^p ranges on generalized Hartogs triangles")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Refuse to run randomized computations without an explicit seed.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct DomainArgs {
    /// Numerator of gamma = m/l.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<i64>,
    /// Denominator of gamma = m/l.
    #[arg(long, allow_negative_numbers = true)]
    l: Option<i64>,
    /// Exponent as a token (sqrt2, sqrt3, sqrt5, sqrt(k), pi, e, golden), fraction or decimal.
    #[arg(long)]
    gamma: Option<String>,
    /// Dimension of the z variable.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Decimal digits carried for irrational exponents.
    #[arg(long, default_value_t = crate::precise::DEFAULT_DIGITS)]
    digits: u32,
}

impl DomainArgs {
    fn domain(&self) -> Result<DomainSpec> {
        match (self.m, self.l, &self.gamma) {
            (Some(m), Some(l), None) => DomainSpec::from_ml(m, l, self.n),
            (None, None, Some(g)) => DomainSpec::new(parse_gamma(g, self.digits)?, self.n),
            _ => Err(Error::Parse("give either both --m and --l, or --gamma".into())),
        }
    }

    fn rational(&self) -> Result<(RationalExponent, DomainSpec)> {
        let d = self.domain()?;
        Ok((rational_exponent(&d)?, d))
    }
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Gauss-Legendre nodes per radial direction.
    #[arg(long, default_value_t = 24)]
    radial: usize,
    /// Equispaced nodes per angle.
    #[arg(long, default_value_t = 48)]
    angular: usize,
    /// Truncation margin of the coarsest grid.
    #[arg(long, default_value_t = 1e-2)]
    margin: f64,
    /// Margins combined by Richardson extrapolation.
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Number of interior target points.
    #[arg(long, default_value_t = 10)]
    targets: usize,
}

impl GridArgs {
    fn plan(&self) -> GridPlan {
        GridPlan::new(self.radial, self.angular, self.margin, self.levels)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sharp L^p range and the Schur-test window.
    Range(DomainArgs),
    /// Kernel at one (a, b) = (z . conj(s), w conj(t)), or a CSV batch.
    Kernel {
        #[command(flatten)]
        domain: DomainArgs,
        /// `re` or `re,im`.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        a: String,
        /// `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
        /// Restrict to the residue class alpha1 = j (mod m).
        #[arg(long)]
        residue: Option<u64>,
        /// Relative tolerance of the series.
        #[arg(long, default_value_t = 1e-12)]
        rel_tol: f64,
        /// CSV of point pairs (z, w, s, t as re/im columns); writes kernel rows.
        #[arg(long, conflicts_with = "b")]
        batch: Option<PathBuf>,
    },
    /// Projection of z_1^eta1 conj(w)^eta2, exactly and optionally by quadrature.
    Project {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, default_value_t = 0)]
        eta1: u64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        eta2: i64,
        /// Also integrate against the closed-form kernel.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Numerical verification reports.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Bounded function with unbounded projection, with divergence certificate.
    Counterexample {
        #[command(flatten)]
        domain: DomainArgs,
        /// Number of cutoffs 2^-1, ..., 2^-k for the truncated integrals.
        #[arg(long, default_value_t = 20)]
        cutoffs: u32,
        /// Exponent of the certificate (default: the threshold).
        #[arg(long)]
        p: Option<f64>,
    },
    /// Rational approximants of an irrational exponent and a divergent witness.
    Irrational {
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 3.0)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        max_m: u64,
        #[arg(long, default_value_t = crate::precise::DEFAULT_DIGITS)]
        digits: u32,
    },
    /// Squared L^2 norm and L^p norm of a monomial.
    Norms {
        #[command(flatten)]
        domain: DomainArgs,
        /// Comma-separated exponents of z_1, ..., z_n.
        #[arg(long, default_value = "0")]
        alpha: String,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        beta: i64,
        #[arg(long)]
        p: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Monte Carlo Schur-test ratios at boundary-stratified probes.
    Schur {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        probes: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Series against closed form, and the kernel-to-bound ratio.
    Kernel {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        bound_samples: usize,
        #[arg(long, default_value_t = 0.8)]
        max_b: f64,
        #[arg(long, default_value_t = 0.1)]
        min_cone: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Reproducing residual of monomials under the numerical projection.
    Reproducing {
        #[command(flatten)]
        domain: DomainArgs,
        /// Semicolon-separated `alpha1,...,alphan:beta` indices.
        #[arg(long, default_value = "0:0;1:0;1:-1", allow_hyphen_values = true)]
        monomials: String,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Quadrature of the disk and ball auxiliary integrals.
    Auxiliary {
        #[arg(long, value_enum, default_value_t = AuxKind::Disk)]
        kind: AuxKind,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Comma-separated |z| or |Delta| values.
        #[arg(long, default_value = "0,0.5,0.9,0.99")]
        points: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AuxKind {
    Disk,
    Ball,
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("bad complex number {s:?}; use re or re,im"));
    let mut parts = s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad()));
    let re = parts.next().ok_or_else(bad)??;
    let im = parts.next().transpose()?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad {what} {x:?}"))))
        .collect()
}

fn parse_monomials(s: &str, n: u32) -> Result<Vec<FullIndex>> {
    s.split(';')
        .map(|item| {
            let (alpha, beta) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("monomial {item:?} needs alpha:beta")))?;
            let mut alpha: Vec<u64> = parse_list(alpha, "exponent")?;
            if alpha.len() == 1 && n > 1 {
                alpha.resize(n as usize, 0);
            }
            if alpha.len() != n as usize {
                return Err(Error::Parse(format!("monomial {item:?} needs {n} z exponents")));
            }
            let beta = beta
                .trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad exponent {beta:?}")))?;
            Ok(FullIndex::new(alpha, beta))
        })
        .collect()
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn seed_or_default(seed: Option<u64>, strict: bool, log: &mut dyn Write) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None if strict => Err(Error::Domain("--strict requires an explicit --seed".into())),
        None => {
            let _ = writeln!(log, "note: no --seed given, using 0");
            Ok(0)
        }
    }
}

enum Output {
    Report(Value),
    Raw(Vec<u8>),
}

fn rational_exponent(domain: &DomainSpec) -> Result<RationalExponent> {
    domain.exponent().copied().ok_or_else(|| {
        Error::Domain(format!(
            "this computation needs a rational exponent; gamma = {} (see the irrational subcommand)",
            domain.gamma().label()
        ))
    })
}

/// Sharp range and Schur window report.
pub fn range_value(domain: &DomainSpec) -> Result<Value> {
    let exp = rational_exponent(domain)?;
    let n = domain.n();
    let sharp = sharp_range(&exp, n);
    let (p_interval, params) = schur_p_interval(&exp, n, &corollary_a(&exp, n))?;
    Ok(json!({
        "config": Config::of(domain),
        "sharp_range": sharp,
        "holder_conjugate": sharp.is_self_dual(),
        "schur": {
            "A": ratio_string(&params.a),
            "eps_window": [ratio_string(&params.eps_lo), ratio_string(&params.eps_hi)],
            "p_interval": p_interval,
        },
    }))
}

fn kernel_report(args: &DomainArgs, a: &str, b: &str, residue: Option<u64>, rel_tol: f64) -> Result<Value> {
    let domain = args.domain()?;
    let (a, b) = (parse_complex(a)?, parse_complex(b)?);
    let opts = KernelEvalOptions {
        rel_tol,
        ..KernelEvalOptions::default()
    };
    let series = kernel_series_ab(&domain, a, b, &opts, residue)?;
    let mut report = json!({
        "config": Config::of(&domain),
        "a": complex_json(a),
        "b": complex_json(b),
        "series": series,
    });
    if let Some(exp) = domain.exponent() {
        let kernel = ClosedKernel::new(exp, domain.n())?;
        let closed = match residue {
            Some(j) => kernel.eval_residue(j, a, b)?,
            None => kernel.eval_ab(a, b)?,
        };
        let bound = kernel_bound(exp, domain.n(), a, b, residue)?;
        report["closed"] = complex_json(closed);
        report["bound"] = json!(bound);
        report["ratio"] = json!(closed.norm() / bound);
        report["series_rel_error"] = json!((series.value - closed).norm() / closed.norm());
    }
    if let Some(j) = residue {
        report["residue"] = json!(j);
    }
    Ok(report)
}

fn project_report(args: &DomainArgs, eta1: u64, eta2: i64, numeric: bool, grid: &GridArgs) -> Result<Value> {
    let domain = args.domain()?;
    let exact = project_antiholo_monomial(&domain, eta1, eta2, None)?;
    let mut report = json!({
        "config": Config::of(&domain),
        "f": format!("z_1^{eta1} conj(w)^{eta2}"),
        "analytic": exact,
    });
    if numeric {
        let (exp, _) = args.rational()?;
        let kernel = ClosedKernel::new(&exp, domain.n())?;
        let targets = spread_targets(&domain, grid.targets, 0.3, 0.7, 0.5);
        let plan = grid.plan();
        let c = exact.constant.unwrap_or(0.0);
        let mut alpha = vec![0; domain.n() as usize];
        alpha[0] = eta1;
        let image = FullIndex::new(alpha, -eta2);
        let values = project_extrapolated(
            &kernel,
            |p| p.z[0].powu(eta1 as u32) * p.w.conj().powi(eta2 as i32),
            &domain,
            &plan,
            &targets,
        )?;
        let mut rows = Vec::new();
        let mut max_err: f64 = 0.0;
        for (t, v) in targets.iter().zip(&values) {
            let expected = if exact.kind == ProjectionKind::Monomial {
                eval_monomial(&image, t) * c
            } else {
                Complex64::new(0.0, 0.0)
            };
            let err = if expected.norm() > 0.0 {
                (v - expected).norm() / expected.norm()
            } else {
                v.norm()
            };
            max_err = max_err.max(err);
            rows.push(json!({
                "abs_z": t.z_norm(),
                "abs_w": t.w.norm(),
                "numeric": complex_json(*v),
                "analytic": complex_json(expected),
                "error": err,
            }));
        }
        report["numeric"] = json!({ "plan": plan, "targets": rows, "max_error": max_err });
    }
    Ok(report)
}

fn verify_report(cmd: &VerifyCommand, strict: bool, log: &mut dyn Write) -> Result<Value> {
    match cmd {
        VerifyCommand::Schur {
            domain,
            epsilon,
            samples,
            probes,
            seed,
        } => {
            let seed = seed_or_default(*seed, strict, log)?;
            let (exp, d) = domain.rational()?;
            let r = verify_schur(&exp, d.n(), *epsilon, *samples, *probes, seed)?;
            for w in &r.warnings {
                let _ = writeln!(log, "warning: {w}");
            }
            let (p_interval, _) = schur_p_interval(&exp, d.n(), &r.params.a)?;
            Ok(json!({
                "config": Config::of(&d),
                "seed": seed,
                "schur": {
                    "A": ratio_string(&r.params.a),
                    "eps_window": [ratio_string(&r.params.eps_lo), ratio_string(&r.params.eps_hi)],
                    "p_interval": p_interval,
                    "epsilon": r.epsilon,
                    "in_window": r.in_window,
                    "locally_integrable": r.locally_integrable,
                    "warnings": r.warnings,
                    "samples": r.samples,
                    "ratios": {
                        "max": r.max,
                        "median": r.median,
                        "max_doubled": r.max_doubled,
                        "refinement_drift": r.refinement_drift,
                    },
                    "growth": r.growth,
                    "probes": r.probes,
                },
            }))
        }
        VerifyCommand::Kernel {
            domain,
            samples,
            bound_samples,
            max_b,
            min_cone,
            seed,
        } => {
            let seed = seed_or_default(*seed, strict, log)?;
            let (exp, d) = domain.rational()?;
            let pairs = sample_pairs(&d, *samples, seed, *max_b, *min_cone, 0.0)?;
            let agreement = series_closed_agreement(&exp, d.n(), &pairs, &KernelEvalOptions::default())?;
            let bound = bound_ratio_sup(&exp, d.n(), *bound_samples, seed)?;
            Ok(json!({
                "config": Config::of(&d),
                "seed": seed,
                "agreement": agreement,
                "bound_ratio": bound,
            }))
        }
        VerifyCommand::Reproducing { domain, monomials, grid } => {
            let (exp, d) = domain.rational()?;
            let kernel = ClosedKernel::new(&exp, d.n())?;
            let probes = spread_targets(&d, grid.targets, 0.3, 0.7, 0.5);
            let plan = grid.plan();
            let rows = parse_monomials(monomials, d.n())?
                .into_iter()
                .map(|idx| {
                    let residual = reproducing_residual(&kernel, &idx, &plan, &probes)?;
                    Ok(json!({ "alpha": idx.alpha, "beta": idx.beta, "residual": residual }))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(json!({ "config": Config::of(&d), "plan": plan, "residuals": rows }))
        }
        VerifyCommand::Auxiliary {
            kind,
            epsilon,
            beta,
            k,
            n,
            points,
        } => {
            let points: Vec<f64> = parse_list(points, "point")?;
            let kind = match kind {
                AuxKind::Disk => AuxiliaryKind::Disk {
                    epsilon: *epsilon,
                    beta: *beta,
                    points,
                },
                AuxKind::Ball => AuxiliaryKind::Ball {
                    n: *n,
                    k: *k,
                    epsilon: *epsilon,
                    points,
                },
            };
            Ok(json!({ "auxiliary": verify_auxiliary_integrals(&kind)? }))
        }
    }
}

/// Counterexample report with the truncated-integral certificate at cutoffs
/// `2^-1, ..., 2^-cutoffs` and exponent `p` (default: the threshold).
pub fn counterexample_value(domain: &DomainSpec, cutoffs: u32, p: Option<f64>) -> Result<Value> {
    let exp = rational_exponent(domain)?;
    let c = counterexample(&exp, domain.n())?;
    if cutoffs < 3 {
        return Err(Error::Domain("need at least 3 cutoffs".into()));
    }
    let p = match p {
        Some(p) => p,
        None => num_traits::ToPrimitive::to_f64(&c.threshold).unwrap_or(f64::NAN),
    };
    let deltas: Vec<f64> = (1..=cutoffs as i32).map(|k| 0.5f64.powi(k)).collect();
    let cert = divergence_certificate(domain, c.eta.0, c.eta.1, p, &deltas)?;
    let mut report = to_value(&c)?;
    report["config"] = to_value(&Config::of(domain))?;
    report["certificate"]["truncated_integrals"] = to_value(&cert)?;
    report["certificate"]["p"] = json!(p);
    Ok(report)
}

fn irrational_report(gamma: &str, n: u32, p: f64, max_m: u64, digits: u32) -> Result<Value> {
    let g = parse_gamma(gamma, digits)?;
    let domain = DomainSpec::new(g.clone(), n)?;
    let list = approximants(&g, n, max_m)?;
    let witness = irrational_witness(&g, n, p, max_m)?;
    Ok(json!({
        "config": Config::of(&domain),
        "irrational": {
            "p": p,
            "max_m": max_m,
            "approximants": list.approximants,
            "precision_exhausted": list.precision_exhausted,
            "witness": witness,
        },
    }))
}

fn norms_report(args: &DomainArgs, alpha: &str, beta: i64, p: Option<f64>) -> Result<Value> {
    let domain = args.domain()?;
    let mut alpha: Vec<u64> = parse_list(alpha, "exponent")?;
    if alpha.len() == 1 && domain.n() > 1 {
        alpha.resize(domain.n() as usize, 0);
    }
    if alpha.len() != domain.n() as usize {
        return Err(Error::Parse(format!("--alpha needs {} exponents", domain.n())));
    }
    let idx = FullIndex::new(alpha, beta);
    let mut report = json!({
        "config": Config::of(&domain),
        "alpha": idx.alpha,
        "beta": beta,
        "norm_sq": monomial_norm_sq(&domain, &idx)?,
    });
    if let Some(p) = p {
        if idx.alpha[1..].iter().any(|&a| a != 0) {
            return Err(Error::Domain("L^p norms are computed for z_1^alpha1 w^beta".into()));
        }
        report["lp"] = to_value(&monomial_lp(&domain, idx.alpha[0], beta, p)?)?;
        report["p"] = json!(p);
    }
    Ok(report)
}

fn execute(cli: &Cli, log: &mut dyn Write) -> Result<Output> {
    let report = match &cli.command {
        Command::Range(args) => range_value(&args.domain()?)?,
        Command::Kernel {
            domain,
            a,
            b,
            residue,
            rel_tol,
            batch,
        } => {
            if let Some(path) = batch {
                let (exp, d) = domain.rational()?;
                let input = std::fs::File::open(path)?;
                let mut out = Vec::new();
                crate::kernel::batch_csv(&exp, d.n(), input, &mut out)?;
                return Ok(Output::Raw(out));
            }
            let b = b
                .as_deref()
                .ok_or_else(|| Error::Parse("kernel needs --b (or --batch)".into()))?;
            kernel_report(domain, a, b, *residue, *rel_tol)?
        }
        Command::Project {
            domain,
            eta1,
            eta2,
            numeric,
            grid,
        } => project_report(domain, *eta1, *eta2, *numeric, grid)?,
        Command::Verify(cmd) => verify_report(cmd, cli.strict, log)?,
        Command::Counterexample { domain, cutoffs, p } => counterexample_value(&domain.domain()?, *cutoffs, *p)?,
        Command::Irrational {
            gamma,
            n,
            p,
            max_m,
            digits,
        } => irrational_report(gamma, *n, *p, *max_m, *digits)?,
        Command::Norms { domain, alpha, beta, p } => norms_report(domain, alpha, *beta, *p)?,
    };
    Ok(Output::Report(report))
}

/// Renders a report in the requested format.
pub fn render(report: &Value, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, v) in flatten_json(report) {
                w.write_record([k, v])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        Format::Text => {
            let mut s = String::new();
            for (k, v) in flatten_json(report) {
                s.push_str(&format!("{k}: {v}\n"));
            }
            Ok(s.into_bytes())
        }
    }
}

/// Runs the command line `argv` (program name first), writing the report to
/// `out` (or `--output`) and diagnostics to `err`. Returns the exit code.
pub fn run_command_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_VALIDATION
                }
            };
        }
    };
    let result = execute(&cli, err).and_then(|o| match o {
        Output::Report(v) => render(&v, cli.format),
        Output::Raw(bytes) => Ok(bytes),
    });
    let bytes = match result {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL };
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &bytes),
        None => out.write_all(&bytes).and_then(|_| out.flush()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_NUMERICAL
        }
    }
}

/// [`run_command_with`] on the process streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_command_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
