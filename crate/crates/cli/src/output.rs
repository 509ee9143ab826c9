//! Delimited-text and TOML writers. Floats carry 17 significant digits.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fracbessel::solver::SolutionGrid;
use fracbessel::specfun::BesselZeroTable;
use serde::Serialize;

use crate::run::SolveOutcome;
use crate::CliError;

pub const SOLUTION_FILE: &str = "solution.csv";
pub const MODES_FILE: &str = "modes.csv";
pub const REPORT_FILE: &str = "report.toml";
pub const CHECK_REPORT_FILE: &str = "check_report.toml";
pub const ZEROS_FILE: &str = "zeros.csv";

/// `{:.16e}`: one leading digit and sixteen more.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Header `t,x,u`, rows over t then x.
pub fn write_grid(out: &mut impl Write, grid: &SolutionGrid) -> std::io::Result<()> {
    out.write_all(b"t,x,u\n")?;
    for (j, &t) in grid.t_grid.iter().enumerate() {
        for (i, &x) in grid.x_grid.iter().enumerate() {
            writeln!(out, "{},{},{}", fmt_f64(t), fmt_f64(x), fmt_f64(grid.value(j, i)))?;
        }
    }
    Ok(())
}

pub fn write_zeros(out: &mut impl Write, zeros: &BesselZeroTable) -> std::io::Result<()> {
    out.write_all(b"k,gamma\n")?;
    for (k, g) in zeros.zeros().iter().enumerate() {
        writeln!(out, "{},{}", k + 1, fmt_f64(*g))?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_f64)
}

/// Write whatever the outcome holds into `dir`; returns the files written.
pub fn write_outcome(dir: &Path, outcome: &SolveOutcome) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    if let Some(grid) = &outcome.grid {
        let path = dir.join(SOLUTION_FILE);
        let mut w = create(&path)?;
        write_grid(&mut w, grid).and_then(|_| w.flush()).map_err(io_err(&path))?;
        written.push(path);

        let path = dir.join(MODES_FILE);
        let mut w = create(&path)?;
        let mut rows = || -> std::io::Result<()> {
            w.write_all(b"k,gamma,u0_at_t,margin,forbidden_m,amplitude,max_abs_f,max_abs_u,residual\n")?;
            for m in &outcome.report.modes {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    m.k,
                    fmt_f64(m.gamma),
                    fmt_f64(m.u0_at_t),
                    fmt_f64(m.margin),
                    fmt_f64(m.forbidden_m),
                    fmt_f64(m.amplitude),
                    fmt_f64(m.max_abs_f),
                    fmt_f64(m.max_abs_u),
                    opt(m.residual)
                )?;
            }
            w.flush()
        };
        rows().map_err(io_err(&path))?;
        written.push(path);
    }
    let path = dir.join(REPORT_FILE);
    write_toml(&path, &outcome.report)?;
    written.push(path);
    Ok(written)
}

pub fn write_toml(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = toml::to_string(value).map_err(|e| CliError::Config(format!("report serialization: {e}")))?;
    fs::write(path, text).map_err(io_err(path))
}
