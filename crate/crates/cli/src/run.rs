//! `solve`: config in, solution grid and report out.

use fracbessel::solver::{assemble_with, SolutionGrid};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{CliError, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_ML, EXIT_OK, EXIT_RESONANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    ChecksFailed,
    Resonance,
    MlNonconvergence,
    InvalidConfig,
    InternalError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::ChecksFailed | Status::InternalError => EXIT_CHECK_FAILED,
            Status::Resonance => EXIT_RESONANCE,
            Status::MlNonconvergence => EXIT_ML,
            Status::InvalidConfig => EXIT_CONFIG,
        }
    }

    fn from_error(e: &CliError) -> Self {
        match e.exit_code() {
            EXIT_RESONANCE => Status::Resonance,
            EXIT_ML => Status::MlNonconvergence,
            EXIT_CONFIG => Status::InvalidConfig,
            _ => Status::InternalError,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Check {
    pub observed: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    fn new(observed: f64, tol: f64) -> Self {
        Check { observed, tol, passed: observed <= tol }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocityRow {
    pub fine: f64,
    pub coarse: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub all_passed: bool,
    /// Worst mode residual; absent when the grid is too coarse to verify.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_residual: Option<Check>,
    /// Defects relative to `max|u|`.
    pub nonlocal: Check,
    pub boundary: Check,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pde_residual: Option<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_velocity: Option<VelocityRow>,
    pub min_margin: f64,
    pub margin_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxRow {
    pub x: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Defects {
    pub max_abs_u: f64,
    pub nonlocal: f64,
    pub boundary: f64,
    /// `max_t |x u_x|` near the axis.
    pub flux: Vec<FluxRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub last_mode: f64,
    pub constant: f64,
    pub decay_exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted_exponent: Option<f64>,
    pub estimate: f64,
    pub threshold: f64,
    pub warn: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeRow {
    pub k: usize,
    pub gamma: f64,
    pub u0_at_t: f64,
    pub margin: f64,
    pub forbidden_m: f64,
    pub amplitude: f64,
    pub max_abs_f: f64,
    pub max_abs_u: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_node: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonantRow {
    pub k: usize,
    pub margin: f64,
    pub forbidden_m: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub defects: Option<Defects>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailReport>,
    pub resonant_modes: Vec<ResonantRow>,
    pub modes: Vec<ModeRow>,
    pub config: RunConfig,
}

pub struct SolveOutcome {
    pub report: SolveReport,
    pub grid: Option<SolutionGrid>,
}

impl SolveOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

/// Validate, check non-resonance, assemble and verify. Never panics on bad
/// input; the failure lands in the report's status.
pub fn solve(cfg: &RunConfig) -> SolveOutcome {
    match try_solve(cfg) {
        Ok(grid) => {
            let report = grid_report(cfg, &grid);
            SolveOutcome { report, grid: Some(grid) }
        }
        Err(e) => SolveOutcome { report: failure_report(cfg, &e), grid: None },
    }
}

fn try_solve(cfg: &RunConfig) -> Result<SolutionGrid, CliError> {
    let spec = cfg.problem_spec()?;
    Ok(assemble_with(&spec, &cfg.solve_options())?)
}

fn failure_report(cfg: &RunConfig, e: &CliError) -> SolveReport {
    let status = Status::from_error(e);
    let resonant_modes = match e {
        CliError::Solver(fracbessel::Error::Resonance { modes }) => {
            modes.iter().map(|m| ResonantRow { k: m.k, margin: m.margin, forbidden_m: m.forbidden_m }).collect()
        }
        _ => Vec::new(),
    };
    let message = if resonant_modes.is_empty() {
        e.to_string()
    } else {
        let list: Vec<String> =
            resonant_modes.iter().map(|r| format!("k={} forbids M={:.17e}", r.k, r.forbidden_m)).collect();
        format!("{e}: {}", list.join(", "))
    };
    SolveReport {
        status,
        exit_code: status.exit_code(),
        message: Some(message),
        warnings: Vec::new(),
        checks: None,
        defects: None,
        tail: None,
        resonant_modes,
        modes: Vec::new(),
        config: cfg.clone(),
    }
}

fn grid_report(cfg: &RunConfig, grid: &SolutionGrid) -> SolveReport {
    let d = &grid.diagnostics;
    let rel = |v: f64| if d.max_abs_u > 0.0 { v / d.max_abs_u } else { v };
    let mode_residual = grid.mode_residuals.iter().map(|r| r.observed).reduce(f64::max).map(|worst| Check {
        observed: worst,
        tol: cfg.tolerances.mode_residual,
        passed: grid.mode_residuals.iter().all(|r| r.passed),
    });
    let checks = CheckSummary {
        all_passed: grid.checks_passed(),
        mode_residual,
        nonlocal: Check { passed: d.nonlocal_passed(), ..Check::new(rel(d.nonlocal_defect), d.nonlocal_tol) },
        boundary: Check { passed: d.boundary_passed(), ..Check::new(rel(d.boundary_defect), d.boundary_tol) },
        pde_residual: d.pde_residual.as_ref().map(|p| Check { observed: p.observed, tol: p.tol, passed: p.passed }),
        initial_velocity: d.initial_velocity.as_ref().map(|v| VelocityRow {
            fine: v.fine,
            coarse: v.coarse,
            passed: v.passed,
        }),
        min_margin: grid.margins.min_margin(),
        margin_tol: grid.margins.margin_tol,
    };
    let modes = grid
        .modes
        .iter()
        .zip(&grid.margins.margins)
        .map(|(m, margin)| {
            let residual = grid.mode_residuals.iter().find(|r| r.k == m.k);
            ModeRow {
                k: m.k,
                gamma: m.gamma,
                u0_at_t: m.u0_at_t,
                margin: margin.margin,
                forbidden_m: margin.forbidden_m,
                amplitude: m.amplitude,
                max_abs_f: m.f_k.max_abs(),
                max_abs_u: m.max_abs(),
                residual: residual.map(|r| r.observed),
                residual_node: residual.map(|r| r.worst_node),
            }
        })
        .collect();
    let status = if checks.all_passed { Status::Ok } else { Status::ChecksFailed };
    let t = &d.tail;
    SolveReport {
        status,
        exit_code: status.exit_code(),
        message: None,
        warnings: grid.warnings.clone(),
        checks: Some(checks),
        defects: Some(Defects {
            max_abs_u: d.max_abs_u,
            nonlocal: d.nonlocal_defect,
            boundary: d.boundary_defect,
            flux: d.flux_defect.iter().map(|&(x, v)| FluxRow { x, max_abs: v }).collect(),
        }),
        tail: Some(TailReport {
            last_mode: t.last_mode,
            constant: t.constant,
            decay_exponent: t.decay_exponent,
            fitted_exponent: t.fitted_exponent,
            estimate: t.estimate,
            threshold: t.threshold,
            warn: t.warn,
        }),
        resonant_modes: Vec::new(),
        modes,
        config: cfg.clone(),
    }
}
