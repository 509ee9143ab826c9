use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracbessel::mittag_leffler::{ml_multinomial, MLParams, DEFAULT_TOL};
use fracbessel::solver::DEFAULT_MODES;
use fracbessel::specfun::{bessel_zeros, BesselOrder};
use fracbessel_cli::config::RunConfig;
use fracbessel_cli::output::{self, CHECK_REPORT_FILE, ZEROS_FILE};
use fracbessel_cli::suites::{run_suite, SuiteParams, SuiteResult, SUITE_COUNT};
use fracbessel_cli::{run, CliError, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "fracbessel",
    version,
    about = "Fourier-Bessel solutions of multi-term fractional problems with a nonlocal time condition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write the grid, mode table and report.
    Solve(RunArgs),
    /// Run the property suites.
    Check {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated suite numbers (default: all).
        #[arg(long, value_delimiter = ',')]
        suites: Vec<usize>,
    },
    /// Print zeros of J_nu as `k,gamma`.
    Zeros {
        /// Take nu and the mode count from this config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        modes: Option<usize>,
        /// Write `zeros.csv` here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one multinomial Mittag-Leffler value.
    Ml {
        /// Comma-separated exponents a_1..a_m.
        #[arg(long, value_delimiter = ',', required = true)]
        exponents: Vec<f64>,
        #[arg(long)]
        offset: f64,
        /// Comma-separated arguments z_1..z_m.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        args: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run config; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overrides `run.out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of modes K, overrides `problem.modes`.
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

impl RunArgs {
    fn load(&self, required: bool) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None if required => return Err(CliError::Config("--config is required".into())),
            None => RunConfig::default(),
        };
        if let Some(k) = self.modes {
            cfg.problem.modes = k;
        }
        if let Some(n) = self.threads {
            cfg.run.threads = n;
        }
        if let Some(out) = &self.out {
            cfg.run.out_dir = out.clone();
        }
        for spec in &self.tol {
            cfg.tolerances.apply_override(spec)?;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { EXIT_OK as u8 });
        }
    };
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Solve(args) => solve(&args),
        Command::Check { run, suites } => check(&run, &suites),
        Command::Zeros { config, nu, modes, out } => zeros(config, nu, modes, out),
        Command::Ml { exponents, offset, args, tol } => ml(exponents, offset, args, tol),
    }
}

fn solve(args: &RunArgs) -> Result<i32, CliError> {
    let cfg = args.load(true)?;
    let outcome = run::solve(&cfg);
    let written = output::write_outcome(&cfg.run.out_dir, &outcome)?;
    let r = &outcome.report;
    println!("status: {:?} (exit {})", r.status, r.exit_code);
    if let Some(msg) = &r.message {
        println!("{msg}");
    }
    if let Some(c) = &r.checks {
        println!("nonlocal defect / max|u|  {:.3e} (tol {:.1e})", c.nonlocal.observed, c.nonlocal.tol);
        println!("boundary defect / max|u|  {:.3e} (tol {:.1e})", c.boundary.observed, c.boundary.tol);
        if let Some(m) = &c.mode_residual {
            println!("worst mode residual       {:.3e} (tol {:.1e})", m.observed, m.tol);
        }
        if let Some(p) = &c.pde_residual {
            println!("pde probe residual        {:.3e} (tol {:.1e})", p.observed, p.tol);
        }
        println!("smallest margin           {:.3e}", c.min_margin);
    }
    for w in &r.warnings {
        println!("warning: {w}");
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(r.exit_code)
}

#[derive(Serialize)]
struct CheckReport<'a> {
    all_passed: bool,
    params: &'a SuiteParams,
    suites: &'a [SuiteResult],
}

fn check(args: &RunArgs, selected: &[usize]) -> Result<i32, CliError> {
    let cfg = args.load(false)?;
    cfg.operator()?;
    let ids: Vec<usize> = if selected.is_empty() { (1..=SUITE_COUNT).collect() } else { selected.to_vec() };
    if let Some(bad) = ids.iter().find(|&&id| !(1..=SUITE_COUNT).contains(&id)) {
        return Err(CliError::Config(format!("suite {bad} does not exist (1..={SUITE_COUNT})")));
    }
    let params = SuiteParams::from_config(&cfg);
    let mut results = Vec::with_capacity(ids.len());
    for id in ids {
        let r = run_suite(id, &params);
        println!("{}", r.line());
        let _ = io::stdout().flush();
        results.push(r);
    }
    let all_passed = results.iter().all(|r| r.passed);
    output::ensure_dir(&cfg.run.out_dir)?;
    let path = cfg.run.out_dir.join(CHECK_REPORT_FILE);
    output::write_toml(&path, &CheckReport { all_passed, params: &params, suites: &results })?;
    println!("wrote {}", path.display());
    Ok(if all_passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn zeros(
    config: Option<PathBuf>,
    nu: Option<f64>,
    modes: Option<usize>,
    out: Option<PathBuf>,
) -> Result<i32, CliError> {
    let cfg = config.as_deref().map(RunConfig::load).transpose()?;
    let nu =
        nu.or(cfg.as_ref().map(|c| c.problem.nu)).ok_or_else(|| CliError::Config("give --nu or --config".into()))?;
    let count = modes.or(cfg.as_ref().map(|c| c.problem.modes)).unwrap_or(DEFAULT_MODES);
    let order = BesselOrder::new(nu).map_err(|e| CliError::Config(e.to_string()))?;
    let table = bessel_zeros(order, count)?;
    match out {
        Some(dir) => {
            output::ensure_dir(&dir)?;
            let path = dir.join(ZEROS_FILE);
            let mut buf = Vec::new();
            output::write_zeros(&mut buf, &table).expect("in-memory write");
            std::fs::write(&path, buf).map_err(|source| CliError::Io { path: path.clone(), source })?;
            println!("wrote {}", path.display());
        }
        None => {
            let mut stdout = io::stdout().lock();
            output::write_zeros(&mut stdout, &table)
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(EXIT_OK)
}

fn ml(exponents: Vec<f64>, offset: f64, args: Vec<f64>, tol: f64) -> Result<i32, CliError> {
    let params = MLParams::new(exponents, offset, args)?;
    let v = ml_multinomial(&params, tol)?;
    println!("value = {}", output::fmt_f64(v.value));
    println!("layers_used = {}", v.layers_used);
    println!("tail_estimate = {:e}", v.tail_estimate);
    println!("precision_bits = {}", v.precision_bits);
    println!("condition = {:e}", v.condition);
    Ok(EXIT_OK)
}
