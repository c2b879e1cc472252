use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use entmon::conversion::{self, AlphaGrid};
use entmon::dilution::{self, DilutionTarget};
use entmon::io::{fmt_num, fmt_sig, Certificate, LoadedState, StateFile};
use entmon::locc::{self, C1Options, C2Options};
use entmon::monotone::{self, e_alpha, AlphaParam, Monotone};
use entmon::roof::{self, RoofOptions};
use entmon::Error;

const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_PROPERTY: u8 = 4;

#[derive(Parser)]
#[command(name = "entmon", version, about = "Entanglement monotones for bipartite pure states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schmidt spectrum and α-entropy table of a state file.
    Schmidt(SchmidtArgs),
    /// Upper bound on the conversion probability between two pure states.
    Bound(BoundArgs),
    /// Truncated dilution curves for cos θ|11⟩ + sin θ|22⟩.
    Dilution(DilutionArgs),
    /// Monte-Carlo monotonicity check.
    Check(CheckArgs),
    /// Convex-roof upper bound with an exported certificate ensemble.
    Roof(RoofArgs),
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SchmidtArgs {
    file: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
    alphas: Vec<f64>,
    /// Emit the spectrum (`index,coefficient`) instead of the entropy table.
    #[arg(long)]
    spectrum: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BoundArgs {
    source: PathBuf,
    target: PathBuf,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    /// Number of α grid points on [0, 1].
    #[arg(long, default_value_t = conversion::DEFAULT_GRID_POINTS)]
    grid: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DilutionArgs {
    /// Angle in radians; accepts forms like `pi/6`.
    #[arg(long, value_parser = parse_angle)]
    theta: f64,
    /// Number of target copies Ñ.
    #[arg(long)]
    n: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    alphas: Vec<f64>,
    /// Number of uniform x samples on [0, 1].
    #[arg(long, default_value_t = 101)]
    samples: usize,
    /// Explicit x samples; overrides `--samples`.
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<f64>>,
    /// Emit the discontinuity table at x* + delta over `--schedule` instead.
    #[arg(long)]
    discontinuity: bool,
    #[arg(long, value_delimiter = ',', default_value = "100,500,1000,5000")]
    schedule: Vec<u64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum Condition {
    C1,
    C2,
}

#[derive(Args)]
struct CheckArgs {
    /// `e0`, `e1`, `entropy`, `e_alpha:<α>` or `trace_fn:<entropy|linear|sqrt|square>`.
    #[arg(long)]
    monotone: String,
    #[arg(long, value_enum, default_value = "c1")]
    condition: Condition,
    #[arg(long)]
    trials: Option<usize>,
    /// Local dimensions as `AxB`.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<(usize, usize)>,
    #[arg(long, env = "ENTMON_SEED", default_value_t = 0)]
    seed: u64,
    /// C1 only: restrict to local unitaries.
    #[arg(long)]
    unitary_only: bool,
    /// Use the monotone without concavity/symmetry validation.
    #[arg(long)]
    skip_validation: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct RoofArgs {
    /// Pure-state, density or certificate file.
    file: PathBuf,
    #[arg(long, default_value = "entropy")]
    monotone: String,
    /// Ensemble size; defaults to rank + 2.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 4000)]
    iterations: usize,
    #[arg(long, env = "ENTMON_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the certificate ensemble as a state file.
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Re-evaluate a certificate file instead of searching.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    skip_validation: bool,
    #[command(flatten)]
    output: Output,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_PARSE,
            _ => EXIT_PRECONDITION,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult = Result<(), Failure>;

fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("cannot parse angle `{s}`");
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s, 1.0),
    };
    let num = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*').trim();
            let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
            c * std::f64::consts::PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(num / den)
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected AxB, got `{s}`"))?;
    let a: usize = a.parse().map_err(|_| format!("bad dimension `{a}`"))?;
    let b: usize = b.parse().map_err(|_| format!("bad dimension `{b}`"))?;
    if a == 0 || b == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok((a, b))
}

fn emit(output: &Output, csv: &str) -> CliResult {
    let res = match &output.out {
        Some(path) => std::fs::write(path, csv),
        None => std::io::stdout().lock().write_all(csv.as_bytes()),
    };
    res.map_err(|e| Failure { code: 1, message: format!("write failed: {e}") })
}

fn load(path: &Path) -> Result<LoadedState, Failure> {
    Ok(StateFile::load(path)?.state()?)
}

fn monotone_for(name: &str, skip_validation: bool) -> Result<Monotone, Failure> {
    Ok(if skip_validation {
        Monotone::unchecked(monotone::lookup(name)?)
    } else {
        monotone::resolve(name)?
    })
}

fn cmd_schmidt(args: SchmidtArgs) -> CliResult {
    let spectrum = load(&args.file)?.spectrum()?;
    let values: Vec<String> = spectrum.values().iter().map(|&v| fmt_sig(v, 4)).collect();
    eprintln!("spectrum: {}", values.join(", "));
    let mut csv = String::new();
    if args.spectrum {
        csv.push_str("index,coefficient\n");
        for (i, v) in spectrum.values().iter().enumerate() {
            let _ = writeln!(csv, "{i},{}", fmt_num(*v));
        }
    } else {
        csv.push_str("alpha,E_alpha\n");
        for &a in &args.alphas {
            let e = e_alpha(&spectrum, AlphaParam::new(a)?);
            let _ = writeln!(csv, "{},{}", fmt_num(a), fmt_num(e));
            eprintln!("E_{a} = {}", fmt_sig(e, 4));
        }
    }
    emit(&args.output, &csv)
}

fn cmd_bound(args: BoundArgs) -> CliResult {
    let source = load(&args.source)?.spectrum()?;
    let target = load(&args.target)?.spectrum()?;
    let grid = AlphaGrid::uniform(args.grid)?;
    let bound = conversion::bound_multicopy(&source, &target, args.copies, &grid)?;
    eprintln!(
        "upper bound on conversion probability: {} (alpha = {})",
        fmt_sig(bound.value, 4),
        fmt_sig(bound.minimizing_alpha, 4)
    );
    if args.copies > 1 {
        let y = conversion::bound_average_yield(&source, &target, args.copies, &grid)?;
        eprintln!("upper bound on average yield from {} copies: {}", args.copies, fmt_sig(y, 4));
    }
    emit(&args.output, &bound.curve_csv())
}

fn cmd_dilution(args: DilutionArgs) -> CliResult {
    let target = DilutionTarget::new(args.theta)?;
    if args.discontinuity {
        let alpha = args.alphas.first().copied().unwrap_or(0.5);
        let rows = dilution::discontinuity_report(&target, &args.schedule, alpha, args.delta)?;
        eprintln!("E_{alpha}(target) = {}", fmt_sig(target.e_alpha(alpha), 4));
        for r in &rows {
            eprintln!("N = {}: F = {}, gap = {}", r.n_tilde, fmt_sig(r.fidelity_normalized, 4), fmt_sig(r.gap, 4));
        }
        return emit(&args.output, &dilution::discontinuity_csv(&rows));
    }
    let xs = args.x.clone().unwrap_or_else(|| dilution::uniform_samples(args.samples));
    let curve = dilution::entropy_curves(&target, args.n, &xs, &args.alphas)?;
    eprintln!(
        "x* = {} (asymptotic), {} (N = {})",
        fmt_sig(curve.x_star, 4),
        fmt_sig(curve.x_star_finite, 4),
        args.n
    );
    emit(&args.output, &curve.to_csv())
}

fn cmd_check(args: CheckArgs) -> CliResult {
    let m = monotone_for(&args.monotone, args.skip_validation)?;
    let report = match args.condition {
        Condition::C1 => {
            let d = C1Options::default();
            let (dim_a, dim_b) = args.dims.unwrap_or((d.dim_a, d.dim_b));
            let opts = C1Options {
                trials: args.trials.unwrap_or(d.trials),
                dim_a,
                dim_b,
                seed: args.seed,
                unitary_only: args.unitary_only,
                ..d
            };
            locc::check_c1(&m, &opts)
        }
        Condition::C2 => {
            let d = C2Options::default();
            let (dim_a, dim_b) = args.dims.unwrap_or((d.dim_a, d.dim_b));
            let opts = C2Options { trials: args.trials.unwrap_or(d.trials), dim_a, dim_b, seed: args.seed, ..d };
            locc::check_c2(&m, &opts)
        }
    };
    eprintln!("{}", report.summary());
    emit(&args.output, &report.to_csv())?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_PROPERTY, message: format!("{} violations", report.violations()) })
    }
}

fn cmd_roof(args: RoofArgs) -> CliResult {
    let m = monotone_for(&args.monotone, args.skip_validation)?;
    let loaded = load(&args.file)?;
    if args.verify {
        let LoadedState::Certificate(cert) = &loaded else {
            return Err(Error::Precondition("--verify needs a certificate file".into()).into());
        };
        let value = cert.reevaluate(&m)?;
        eprintln!("stored {}, recomputed {}", fmt_sig(cert.value, 4), fmt_sig(value, 4));
        let csv = format!("stored_value,recomputed_value\n{},{}\n", fmt_num(cert.value), fmt_num(value));
        emit(&args.output, &csv)?;
        if (value - cert.value).abs() > 1e-10 {
            return Err(Failure { code: EXIT_PROPERTY, message: "certificate value does not match".into() });
        }
        return Ok(());
    }
    let (rho, dim_a, dim_b) = loaded.density()?;
    let opts = RoofOptions {
        ensemble_size: args.m,
        restarts: args.restarts,
        iterations: args.iterations,
        seed: args.seed,
        ..Default::default()
    };
    let est = roof::roof_estimate(&rho, dim_a, dim_b, &m, &opts)?;
    eprintln!(
        "roof upper bound for {}: {} (m = {}, {} restarts{})",
        m.name(),
        fmt_sig(est.value, 4),
        est.ensemble_size,
        est.restarts,
        if est.converged { "" } else { ", not converged" }
    );
    if let Some(path) = &args.certificate {
        let cert = Certificate::from_estimate(&est, m.name(), dim_a, dim_b);
        std::fs::write(path, StateFile::from_certificate(cert).to_json())
            .map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })?;
    }
    let csv = format!(
        "upper_bound,ensemble_size,restarts,converged\n{},{},{},{}\n",
        fmt_num(est.value),
        est.ensemble_size,
        est.restarts,
        est.converged
    );
    emit(&args.output, &csv)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Schmidt(a) => cmd_schmidt(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Dilution(a) => cmd_dilution(a),
        Command::Check(a) => cmd_check(a),
        Command::Roof(a) => cmd_roof(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
