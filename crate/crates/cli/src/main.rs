//! `rankone`: command-line frontend for measure validation, Herglotz
//! evaluations, extension-parameter maps, spectral scans, coupling sweeps,
//! and the matrix oracle suite.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 numerical
//! error (a forbidden energy or an oracle deviation where a value was
//! required). Reports are byte-deterministic under `--no-meta`.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use rankone_core::ad::{
    classify_hits, coupling_sweep_with, eigenvalues_for_extension_with, extension_for_energy_with,
    forbidden_energy_scan_with, AdError, AdProblem,
};
use rankone_core::herglotz::{
    boundary_value_with, inverse_square_moment_with, transform, HerglotzError, Tolerances,
};
use rankone_core::measure::{validate, Measure, Window};
use rankone_core::oracle::{consistency_suite, OracleError};
use rankone_core::params::{
    gamma_from_coupling, theta_from_coupling, theta_from_v, v_from_gamma, Coupling,
    CouplingStrength, ExtensionParam, GammaParam, ParamError,
};
use rankone_core::report::{
    energy_class_json, fmt_f64, oracle_suite_csv, oracle_suite_json, scan_report_csv,
    scan_report_json, Meta,
};

/// Oracle suite gate: deviations above this exit with a numerical error.
const ORACLE_GATE: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "rankone",
    version,
    about = "Spectral toolkit for rank-one singular perturbations: Herglotz transforms, extension parameters, eigenvalue scans, matrix oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Output format for reports
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Absolute root tolerance for eigenvalue bisection
    #[arg(long = "tol-root", global = true)]
    tol_root: Option<f64>,
    /// Divergence cap for the G_n classifier
    #[arg(long, global = true)]
    cap: Option<f64>,
    /// Worker threads for scans (default: HS_NUM_THREADS or all cores)
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Base seed for reproducible model generation
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Omit the meta block so reruns are byte-identical
    #[arg(long = "no-meta", global = true)]
    no_meta: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Measure I/O and validation
    Measure {
        #[command(subcommand)]
        action: MeasureCmd,
    },
    /// Herglotz transform evaluations
    Herglotz {
        #[command(subcommand)]
        action: HerglotzCmd,
    },
    /// Eigenvalues of the extension family
    Spectrum {
        #[command(subcommand)]
        action: SpectrumCmd,
    },
    /// Grid scans over energies or couplings
    Scan {
        #[command(subcommand)]
        action: ScanCmd,
    },
    /// Coupling-parameter maps
    Couple {
        #[command(subcommand)]
        action: CoupleCmd,
    },
    /// Matrix-model oracle suites
    Oracle {
        #[command(subcommand)]
        action: OracleCmd,
    },
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Check every measure invariant and report violations
    Validate {
        #[arg(long)]
        measure: String,
    },
}

#[derive(Subcommand)]
enum HerglotzCmd {
    /// Evaluate F_mu at a point of the upper half-plane
    Eval {
        #[arg(long)]
        measure: String,
        /// Evaluation point as "re,im" with im > 0
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Boundary value F_mu(y + i0) at a convergent energy
    Boundary {
        #[arg(long)]
        measure: String,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// Classify the inverse-square moment at an energy
    Classify {
        #[arg(long)]
        measure: String,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
}

#[derive(Subcommand)]
enum SpectrumCmd {
    /// Eigenvalues of T_theta inside a window
    Extension {
        #[arg(long)]
        measure: String,
        /// Base extension angle (defaults to pi/2)
        #[arg(long, allow_hyphen_values = true)]
        theta0: Option<f64>,
        /// Extension angle; omit with --base to list the base point spectrum
        #[arg(long, conflicts_with = "base", allow_hyphen_values = true)]
        theta: Option<f64>,
        /// Report the base extension's own eigenvalues (the atoms of mu0)
        #[arg(long)]
        base: bool,
        /// Search window "a,b"
        #[arg(long, allow_hyphen_values = true)]
        window: String,
    },
    /// The unique extension angle with a given eigenvalue
    Energy2theta {
        #[arg(long)]
        measure: String,
        #[arg(long, allow_hyphen_values = true)]
        theta0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
}

#[derive(Subcommand)]
enum ScanCmd {
    /// Classify a grid of energies, optionally sweeping extension angles
    Energies {
        #[arg(long)]
        measure: String,
        #[arg(long, allow_hyphen_values = true)]
        theta0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        grid: usize,
        /// Comma-separated extension angles to sweep
        #[arg(long, allow_hyphen_values = true)]
        thetas: Option<String>,
    },
    /// Map couplings to extensions and detect embedded eigenvalues
    Couplings {
        #[arg(long)]
        measure: String,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        /// Comma-separated coupling constants
        #[arg(long, allow_hyphen_values = true)]
        alphas: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        grid: usize,
        /// Also sweep the alpha = infinity extension
        #[arg(long = "include-infinity")]
        include_infinity: bool,
    },
}

#[derive(Subcommand)]
enum CoupleCmd {
    /// Map a coupling (alpha, c) through gamma and v to theta
    Map {
        /// Coupling constant; "inf" selects the extension missing from the
        /// regular family
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Run the AD-vs-diagonalization suite on random models
    Verify {
        /// Model dimension; omitted, it cycles through 2..=10 by seed
        #[arg(long)]
        dim: Option<usize>,
        /// Comma-separated coupling constants
        #[arg(long, allow_hyphen_values = true)]
        alphas: String,
        /// Number of models (seeds seed, seed+1, ...)
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<HerglotzError> for CliError {
    fn from(e: HerglotzError) -> Self {
        match e {
            HerglotzError::NonUpperHalfPlane { .. } => CliError::Validation(e.to_string()),
            HerglotzError::ForbiddenEnergy { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<AdError> for CliError {
    fn from(e: AdError) -> Self {
        match e {
            AdError::ForbiddenEnergy { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        match e {
            ParamError::NotUnimodular { .. } => CliError::Validation(e.to_string()),
            ParamError::ExcludedAngle { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::DimensionOutOfRange(_) | OracleError::ShapeMismatch => {
                CliError::Validation(e.to_string())
            }
            OracleError::Ad(inner) => inner.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    configure_threads(&cli.common);
    match run(&cli) {
        Ok((output, code)) => {
            println!("{output}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn configure_threads(common: &Common) {
    let threads = common.parallel.or_else(|| {
        std::env::var("HS_NUM_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn run(cli: &Cli) -> Result<(String, u8), CliError> {
    let tol = tolerances(&cli.common)?;
    let meta = if cli.common.no_meta {
        None
    } else {
        Some(Meta {
            unix_time: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tool: format!("rankone {}", env!("CARGO_PKG_VERSION")),
        })
    };
    match &cli.command {
        Command::Measure { action } => run_measure(action, cli, meta.as_ref()),
        Command::Herglotz { action } => run_herglotz(action, cli, &tol, meta.as_ref()),
        Command::Spectrum { action } => run_spectrum(action, cli, &tol, meta.as_ref()),
        Command::Scan { action } => run_scan(action, cli, &tol, meta.as_ref()),
        Command::Couple { action } => run_couple(action, cli, meta.as_ref()),
        Command::Oracle { action } => run_oracle(action, cli, meta.as_ref()),
    }
}

fn tolerances(common: &Common) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    if let Some(r) = common.tol_root {
        if r.is_nan() || r <= 0.0 {
            return Err(CliError::Validation(format!(
                "--tol-root must be positive, got {r}"
            )));
        }
        tol.root_tol = r;
    }
    if let Some(c) = common.cap {
        if c.is_nan() || c <= 0.0 {
            return Err(CliError::Validation(format!(
                "--cap must be positive, got {c}"
            )));
        }
        tol.divergence_cap = c;
    }
    Ok(tol)
}

fn load_measure(path: &str) -> Result<Measure, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {path}: {e}")))?;
    Measure::from_json(&text).map_err(|e| CliError::Validation(e.to_string()))
}

/// Loads a measure and requires it to pass validation, the precondition of
/// every downstream operation.
fn load_valid_measure(path: &str) -> Result<Measure, CliError> {
    let m = load_measure(path)?;
    let report = validate(&m);
    if !report.is_valid() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Validation(format!(
            "measure {path} is invalid: {}",
            list.join("; ")
        )));
    }
    Ok(m)
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Validation(format!(
            "{what} must be two comma-separated numbers, got '{text}'"
        )));
    }
    let a = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("cannot parse '{}' in {what}", parts[0])))?;
    let b = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("cannot parse '{}' in {what}", parts[1])))?;
    Ok((a, b))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("cannot parse '{p}' in {what}")))
        })
        .collect()
}

fn parse_window(text: &str) -> Result<Window, CliError> {
    let (lo, hi) = parse_pair(text, "--window")?;
    Window::new(lo, hi).map_err(|e| CliError::Validation(e.to_string()))
}

fn meta_fragment(meta: Option<&Meta>) -> String {
    match meta {
        None => String::new(),
        Some(m) => format!(
            ",\"meta\":{{\"unix_time\":{},\"tool\":\"{}\"}}",
            m.unix_time, m.tool
        ),
    }
}

fn run_measure(
    action: &MeasureCmd,
    cli: &Cli,
    meta: Option<&Meta>,
) -> Result<(String, u8), CliError> {
    match action {
        MeasureCmd::Validate { measure } => {
            let m = load_measure(measure)?;
            let report = validate(&m);
            let code = if report.is_valid() { 0 } else { 2 };
            let out = match cli.common.format {
                Format::Json => {
                    let violations: Vec<String> = report
                        .violations
                        .iter()
                        .map(|v| format!("\"{v}\""))
                        .collect();
                    format!(
                        "{{\"schema\":\"measure-validate/1\"{},\"valid\":{},\"violations\":[{}],\"integral_inv_one_plus_sq\":{}}}",
                        meta_fragment(meta),
                        report.is_valid(),
                        violations.join(","),
                        fmt_f64(report.integral_inv_one_plus_sq)
                    )
                }
                Format::Csv => {
                    format!(
                        "valid,integral_inv_one_plus_sq,violations\n{},{},{}\n",
                        report.is_valid(),
                        fmt_f64(report.integral_inv_one_plus_sq),
                        report
                            .violations
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join(";")
                    )
                }
            };
            Ok((out, code))
        }
    }
}

fn run_herglotz(
    action: &HerglotzCmd,
    cli: &Cli,
    tol: &Tolerances,
    meta: Option<&Meta>,
) -> Result<(String, u8), CliError> {
    match action {
        HerglotzCmd::Eval { measure, z } => {
            let m = load_valid_measure(measure)?;
            let (re, im) = parse_pair(z, "--z")?;
            let eval = transform(&m, Complex64::new(re, im))?;
            let out = match cli.common.format {
                Format::Json => format!(
                    "{{\"schema\":\"herglotz-eval/1\"{},\"z\":{{\"re\":{},\"im\":{}}},\"value\":{{\"re\":{},\"im\":{}}}}}",
                    meta_fragment(meta),
                    fmt_f64(re),
                    fmt_f64(im),
                    fmt_f64(eval.value.re),
                    fmt_f64(eval.value.im)
                ),
                Format::Csv => format!(
                    "z_re,z_im,value_re,value_im\n{},{},{},{}\n",
                    fmt_f64(re),
                    fmt_f64(im),
                    fmt_f64(eval.value.re),
                    fmt_f64(eval.value.im)
                ),
            };
            Ok((out, 0))
        }
        HerglotzCmd::Boundary { measure, y } => {
            let m = load_valid_measure(measure)?;
            let value = boundary_value_with(&m, *y, tol)?;
            let out = match cli.common.format {
                Format::Json => format!(
                    "{{\"schema\":\"herglotz-boundary/1\"{},\"y\":{},\"value\":{}}}",
                    meta_fragment(meta),
                    fmt_f64(*y),
                    fmt_f64(value)
                ),
                Format::Csv => format!("y,value\n{},{}\n", fmt_f64(*y), fmt_f64(value)),
            };
            Ok((out, 0))
        }
        HerglotzCmd::Classify { measure, y } => {
            let m = load_valid_measure(measure)?;
            let class = inverse_square_moment_with(&m, *y, tol);
            let out = match cli.common.format {
                Format::Json => format!(
                    "{{\"schema\":\"herglotz-classify/1\"{},\"y\":{},\"class\":{}}}",
                    meta_fragment(meta),
                    fmt_f64(*y),
                    energy_class_json(&class)
                ),
                Format::Csv => {
                    let (label, value) = match &class {
                        rankone_core::EnergyClass::Convergent { moment, .. } => {
                            ("convergent", *moment)
                        }
                        rankone_core::EnergyClass::Divergent { witness, .. } => {
                            ("divergent", witness.last)
                        }
                    };
                    format!(
                        "y,class,I_or_cap\n{},{},{}\n",
                        fmt_f64(*y),
                        label,
                        fmt_f64(value)
                    )
                }
            };
            Ok((out, 0))
        }
    }
}

fn run_spectrum(
    action: &SpectrumCmd,
    cli: &Cli,
    tol: &Tolerances,
    meta: Option<&Meta>,
) -> Result<(String, u8), CliError> {
    match action {
        SpectrumCmd::Extension {
            measure,
            theta0,
            theta,
            base,
            window,
        } => {
            let m = load_valid_measure(measure)?;
            let w = parse_window(window)?;
            let problem = AdProblem::new(m, ExtensionParam::new(theta0.unwrap_or(FRAC_PI_2)));
            let (theta_used, hits) = if *base {
                let hits: Vec<rankone_core::ad::SweepHit> = problem
                    .base_point_spectrum(&w)
                    .into_iter()
                    .map(|y| rankone_core::ad::SweepHit {
                        y,
                        near_atom: false,
                        convergent: false,
                    })
                    .collect();
                (problem.theta0.theta, hits)
            } else {
                let t = theta.ok_or_else(|| {
                    CliError::Validation("either --theta or --base is required".into())
                })?;
                let param = ExtensionParam::new(t);
                let raw = eigenvalues_for_extension_with(&problem, &param, &w, tol)?;
                (param.theta, classify_hits(&problem, raw, tol))
            };
            let out = match cli.common.format {
                Format::Json => {
                    let mut s = format!(
                        "{{\"schema\":\"spectrum-extension/1\"{},\"theta0\":{},\"theta\":{},\"base\":{},\"window\":{{\"lo\":{},\"hi\":{}}},\"eigenvalues\":[",
                        meta_fragment(meta),
                        fmt_f64(problem.theta0.theta),
                        fmt_f64(theta_used),
                        base,
                        fmt_f64(w.lo),
                        fmt_f64(w.hi)
                    );
                    for (i, h) in hits.iter().enumerate() {
                        if i > 0 {
                            s.push(',');
                        }
                        s.push_str(&format!(
                            "{{\"y\":{},\"near_atom\":{},\"convergent\":{}}}",
                            fmt_f64(h.y),
                            h.near_atom,
                            h.convergent
                        ));
                    }
                    s.push_str("]}");
                    s
                }
                Format::Csv => {
                    let mut s = String::from("y,near_atom,convergent\n");
                    for h in &hits {
                        s.push_str(&format!(
                            "{},{},{}\n",
                            fmt_f64(h.y),
                            h.near_atom,
                            h.convergent
                        ));
                    }
                    s
                }
            };
            Ok((out, 0))
        }
        SpectrumCmd::Energy2theta { measure, theta0, y } => {
            let m = load_valid_measure(measure)?;
            let problem = AdProblem::new(m, ExtensionParam::new(theta0.unwrap_or(FRAC_PI_2)));
            let theta = extension_for_energy_with(&problem, *y, tol)?;
            let out = match cli.common.format {
                Format::Json => format!(
                    "{{\"schema\":\"spectrum-energy2theta/1\"{},\"theta0\":{},\"y\":{},\"theta\":{}}}",
                    meta_fragment(meta),
                    fmt_f64(problem.theta0.theta),
                    fmt_f64(*y),
                    fmt_f64(theta.theta)
                ),
                Format::Csv => format!("y,theta\n{},{}\n", fmt_f64(*y), fmt_f64(theta.theta)),
            };
            Ok((out, 0))
        }
    }
}

fn run_scan(
    action: &ScanCmd,
    cli: &Cli,
    tol: &Tolerances,
    meta: Option<&Meta>,
) -> Result<(String, u8), CliError> {
    let report = match action {
        ScanCmd::Energies {
            measure,
            theta0,
            window,
            grid,
            thetas,
        } => {
            let m = load_valid_measure(measure)?;
            let w = parse_window(window)?;
            let theta_list = match thetas {
                Some(t) => parse_list(t, "--thetas")?,
                None => Vec::new(),
            };
            let problem = AdProblem::new(m, ExtensionParam::new(theta0.unwrap_or(FRAC_PI_2)));
            forbidden_energy_scan_with(&problem, &w, *grid, &theta_list, tol)?
        }
        ScanCmd::Couplings {
            measure,
            c,
            alphas,
            window,
            grid,
            include_infinity,
        } => {
            let m = load_valid_measure(measure)?;
            let w = parse_window(window)?;
            let alpha_list = parse_list(alphas, "--alphas")?;
            let problem = AdProblem::new(m, ExtensionParam::new(FRAC_PI_2));
            coupling_sweep_with(&problem, *c, &alpha_list, &w, *grid, *include_infinity, tol)?
        }
    };
    let out = match cli.common.format {
        Format::Json => scan_report_json(&report, meta),
        Format::Csv => scan_report_csv(&report),
    };
    Ok((out, 0))
}

fn run_couple(
    action: &CoupleCmd,
    cli: &Cli,
    meta: Option<&Meta>,
) -> Result<(String, u8), CliError> {
    match action {
        CoupleCmd::Map { alpha, c } => {
            let coupling = if alpha.trim() == "inf" {
                Coupling::infinite(*c)
            } else {
                let a: f64 = alpha
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Validation(format!("cannot parse --alpha '{alpha}'")))?;
                Coupling::new(a, *c)
            };
            let gamma = gamma_from_coupling(&coupling);
            let v = v_from_gamma(&gamma);
            let theta = theta_from_v(&v)?;
            let direct = theta_from_coupling(&coupling);
            debug_assert!(
                rankone_core::params::angle_distance_mod_pi(theta.theta, direct.theta) < 1e-12
            );
            let gamma_text = match gamma {
                GammaParam::Finite(g) => fmt_f64(g),
                GammaParam::Infinite => "\"inf\"".to_string(),
            };
            let alpha_text = match coupling.alpha {
                CouplingStrength::Finite(a) => fmt_f64(a),
                CouplingStrength::Infinite => "\"inf\"".to_string(),
            };
            let out = match cli.common.format {
                Format::Json => format!(
                    "{{\"schema\":\"couple-map/1\"{},\"alpha\":{},\"c\":{},\"gamma\":{},\"v\":{{\"re\":{},\"im\":{}}},\"theta\":{}}}",
                    meta_fragment(meta),
                    alpha_text,
                    fmt_f64(*c),
                    gamma_text,
                    fmt_f64(v.v.re),
                    fmt_f64(v.v.im),
                    fmt_f64(direct.theta)
                ),
                Format::Csv => format!(
                    "alpha,c,gamma,v_re,v_im,theta\n{},{},{},{},{},{}\n",
                    alpha_text.replace('"', ""),
                    fmt_f64(*c),
                    gamma_text.replace('"', ""),
                    fmt_f64(v.v.re),
                    fmt_f64(v.v.im),
                    fmt_f64(direct.theta)
                ),
            };
            Ok((out, 0))
        }
    }
}

fn run_oracle(
    action: &OracleCmd,
    cli: &Cli,
    meta: Option<&Meta>,
) -> Result<(String, u8), CliError> {
    match action {
        OracleCmd::Verify { dim, alphas, count } => {
            let alpha_list = parse_list(alphas, "--alphas")?;
            if alpha_list.contains(&0.0) {
                return Err(CliError::Validation(
                    "--alphas must be nonzero; alpha = 0 is the unperturbed operator".into(),
                ));
            }
            if let Some(n) = dim {
                if !(2..=rankone_core::oracle::MAX_DIM).contains(n) {
                    return Err(CliError::Validation(format!(
                        "--dim must lie in 2..={}, got {n}",
                        rankone_core::oracle::MAX_DIM
                    )));
                }
            }
            let seeds: Vec<u64> = (0..*count).map(|i| cli.common.seed + i).collect();
            let dim_rule = |seed: u64| dim.unwrap_or(2 + (seed.wrapping_sub(1) % 9) as usize);
            let cases = consistency_suite(&seeds, dim_rule, &alpha_list)?;
            let max_dev = cases.iter().map(|c| c.deviation).fold(0.0f64, f64::max);
            let out = match cli.common.format {
                Format::Json => oracle_suite_json(&cases, meta),
                Format::Csv => oracle_suite_csv(&cases),
            };
            if max_dev >= ORACLE_GATE {
                eprintln!("error: oracle deviation {max_dev:e} exceeds the {ORACLE_GATE:e} gate");
                return Ok((out, 3));
            }
            Ok((out, 0))
        }
    }
}
