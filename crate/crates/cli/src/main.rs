use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use dicke::oracle;
use dicke::spectra::ConvergenceOptions;
use dicke::sweep::{self, Grid, MeasureSet, NvParams, OutputFormat, SweepConfig};

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "dicke", version, about = "Ground-state correlations of the generalized Dicke model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point and print it as JSON
    Ground(GroundArgs),
    /// Scan a (λ/√N, η/N) grid
    Sweep(SweepArgs),
    /// List the critical couplings
    Critical(CriticalArgs),
    /// I¹ against λ/√N at η = 0 for several N
    Extensivity(ExtensivityArgs),
    /// Map NV-magnon parameters onto the model
    Nvmap(NvmapArgs),
    /// Compare the symmetric pipeline with full-space brute force
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct Frequencies {
    #[arg(long = "omega-c", default_value_t = 1.0)]
    omega_c: f64,
    #[arg(long = "omega-0", default_value_t = 1.0)]
    omega_0: f64,
}

#[derive(Args)]
struct Convergence {
    #[arg(long = "e-tol", default_value_t = 1e-9)]
    e_tol: f64,
    #[arg(long = "obs-tol", default_value_t = 1e-8)]
    obs_tol: f64,
    #[arg(long = "n-max-cap", default_value_t = 1024)]
    n_max_cap: usize,
}

impl Convergence {
    fn options(&self) -> ConvergenceOptions {
        ConvergenceOptions {
            e_tol: self.e_tol,
            obs_tol: self.obs_tol,
            n_max_cap: self.n_max_cap,
            ..ConvergenceOptions::default()
        }
    }
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: OutputFormat,
}

impl Output {
    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => sweep::write_output(path, text)
                .with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn default_workers() -> String {
    std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .to_string()
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: dicke::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse().map_err(|e: dicke::Error| e.to_string())
}

fn parse_measures(s: &str) -> Result<MeasureSet, String> {
    s.parse().map_err(|e: dicke::Error| e.to_string())
}

#[derive(Args)]
struct GroundArgs {
    #[arg(long = "N")]
    n: usize,
    #[command(flatten)]
    freq: Frequencies,
    #[arg(long = "lambda-scaled", allow_negative_numbers = true)]
    lambda_scaled: f64,
    #[arg(long = "eta-scaled", allow_negative_numbers = true)]
    eta_scaled: f64,
    #[arg(long, default_value = "all", value_parser = parse_measures)]
    measures: MeasureSet,
    #[command(flatten)]
    conv: Convergence,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "N")]
    n: usize,
    #[command(flatten)]
    freq: Frequencies,
    /// min:max:steps in units of λ/√N
    #[arg(long = "lambda-grid", default_value = "0:2:41", value_parser = parse_grid)]
    lambda_grid: Grid,
    /// min:max:steps in units of η/N
    #[arg(long = "eta-grid", default_value = "0:1:41", value_parser = parse_grid)]
    eta_grid: Grid,
    #[arg(long, default_value = "all", value_parser = parse_measures)]
    measures: MeasureSet,
    #[arg(long, env = "DICKE_WORKERS", default_value_t = default_workers())]
    workers: String,
    #[command(flatten)]
    conv: Convergence,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CriticalArgs {
    #[arg(long = "N")]
    n: usize,
    #[command(flatten)]
    freq: Frequencies,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExtensivityArgs {
    /// Comma-separated qubit numbers
    #[arg(long = "N", value_delimiter = ',', default_value = "8,12,16,20,24")]
    n: Vec<usize>,
    #[command(flatten)]
    freq: Frequencies,
    #[arg(long = "lambda-grid", default_value = "0:1.2:49", value_parser = parse_grid)]
    lambda_grid: Grid,
    #[arg(long, env = "DICKE_WORKERS", default_value_t = default_workers())]
    workers: String,
    #[command(flatten)]
    conv: Convergence,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NvmapArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "g-nu", allow_negative_numbers = true)]
    g_nu: f64,
    #[arg(long = "g-eff", default_value_t = 0.0, allow_negative_numbers = true)]
    g_eff: f64,
    #[arg(long = "omega-nv")]
    omega_nv: f64,
    #[arg(long = "omega-nu")]
    omega_nu: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long = "N", default_value_t = 5)]
    n: usize,
    /// Fock cutoff shared by both sides of the comparison
    #[arg(long = "n-max", default_value_t = oracle::DEFAULT_ORACLE_N_MAX)]
    n_max: usize,
}

/// Failure category deciding the exit status.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<dicke::Error>() {
            Some(
                dicke::Error::InvalidParams(_)
                | dicke::Error::GridSpec(_)
                | dicke::Error::UnknownMeasure(_)
                | dicke::Error::OrderOutOfRange { .. },
            ) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e),
        }
    }
}

impl From<dicke::Error> for Failure {
    fn from(e: dicke::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn parse_workers(s: &str) -> Result<usize, Failure> {
    match s.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Failure::Usage(format!("invalid worker count `{s}`"))),
    }
}

fn ground(args: &GroundArgs) -> Result<ExitCode, Failure> {
    let row = sweep::evaluate_point(
        args.freq.omega_c,
        args.freq.omega_0,
        args.n,
        args.lambda_scaled,
        args.eta_scaled,
        args.measures,
        &args.conv.options(),
    )?;
    let json = serde_json::to_string_pretty(&row.to_json()?).map_err(anyhow::Error::from)?;
    println!("{json}");
    Ok(if row.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NOT_CONVERGED)
    })
}

fn run_sweep(args: &SweepArgs) -> Result<ExitCode, Failure> {
    let config = SweepConfig {
        omega_c: args.freq.omega_c,
        omega_0: args.freq.omega_0,
        n_qubits: args.n,
        lambda_grid: args.lambda_grid,
        eta_grid: args.eta_grid,
        measures: args.measures,
        convergence: args.conv.options(),
        workers: parse_workers(&args.workers)?,
    };
    let rows = sweep::run_sweep(&config)?;
    let text = sweep::render_rows(args.n, &rows, args.output.format)?;
    args.output.emit(&text)?;
    let unconverged = rows.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        eprintln!("{unconverged} of {} points did not converge", rows.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn critical(args: &CriticalArgs) -> Result<ExitCode, Failure> {
    let table = sweep::critical_table(args.n, args.freq.omega_c, args.freq.omega_0)?;
    let text = match args.output.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => {
            serde_json::to_string_pretty(&table).map_err(anyhow::Error::from)? + "\n"
        }
    };
    args.output.emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn extensivity(args: &ExtensivityArgs) -> Result<ExitCode, Failure> {
    let scan = sweep::extensivity_scan(
        &args.n,
        &args.lambda_grid,
        args.freq.omega_c,
        args.freq.omega_0,
        &args.conv.options(),
        parse_workers(&args.workers)?,
    )?;
    let text = match args.output.format {
        OutputFormat::Csv => scan.to_csv(),
        OutputFormat::Json => {
            serde_json::to_string_pretty(&scan).map_err(anyhow::Error::from)? + "\n"
        }
    };
    args.output.emit(&text)?;
    Ok(ExitCode::SUCCESS)
}

fn nvmap(args: &NvmapArgs) -> Result<ExitCode, Failure> {
    let nv = NvParams {
        g_nu: args.g_nu,
        g_eff: args.g_eff,
        omega_nv: args.omega_nv,
        omega_nu: args.omega_nu,
    };
    let p = nv.to_model(args.n, 0)?;
    let out = serde_json::json!({
        "omega_c": p.omega_c,
        "omega_0": p.omega_0,
        "lambda": p.lambda,
        "eta": p.eta,
        "N": p.n_qubits,
        "lambda_over_sqrtN": p.lambda_scaled(),
        "eta_over_N": p.eta_scaled(),
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(anyhow::Error::from)?);
    Ok(ExitCode::SUCCESS)
}

fn oracle_check(args: &OracleArgs) -> Result<ExitCode, Failure> {
    if args.n == 0 || args.n > 5 {
        return Err(Failure::Usage("oracle-check supports 1 ≤ N ≤ 5".into()));
    }
    let report = oracle::oracle_check(args.n, &oracle::default_sample_points(), args.n_max)?;
    for c in report.failures() {
        println!(
            "FAIL lambda_over_sqrtN={} eta_over_N={} {}: deviation {:e}",
            c.lambda_scaled, c.eta_scaled, c.quantity, c.deviation
        );
    }
    println!(
        "{} comparisons, max deviation {:e}, tolerance {:e}: {}",
        report.comparisons.len(),
        report.max_deviation(),
        report.tolerance,
        if report.passed() { "pass" } else { "fail" }
    );
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Ground(a) => ground(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Critical(a) => critical(a),
        Command::Extensivity(a) => extensivity(a),
        Command::Nvmap(a) => nvmap(a),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
