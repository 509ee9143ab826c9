//! Run configuration, read from TOML.
//!
//! ```toml
//! [problem]
//! nu = 1.0
//! alpha = 1.5
//! m = 0.5
//! t_end = 1.0
//! modes = 32
//!
//! [[problem.terms]]
//! lambda = -0.5
//! order = 0.5
//!
//! [grid]
//! t_intervals = 256
//! x_nodes = 51
//!
//! [source]
//! kind = "separable"
//! theorem_compliant = true
//! time = { kind = "sine", omega = 2.0 }
//! space = { kind = "power-bump", p = 4.0, q = 3.0 }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use fracbessel::fourier_bessel::{SourceFunction, SpaceProfile, TabulatedSource, TimeProfile};
use fracbessel::fractional::{LowerTerm, TimeOperator};
use fracbessel::solver::{ProblemSpec, Response, SolveOptions, DEFAULT_MODES, MARGIN_TOL};
use fracbessel::specfun::{bessel_zeros, BesselOrder};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub source: SourceConfig,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub checks: ChecksSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub nu: f64,
    pub alpha: f64,
    #[serde(default)]
    pub terms: Vec<TermConfig>,
    #[serde(default)]
    pub m: f64,
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub response: ResponseName,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            nu: 1.0,
            alpha: 2.0,
            terms: Vec::new(),
            m: 0.0,
            t_end: 1.0,
            modes: DEFAULT_MODES,
            response: ResponseName::Caputo,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub lambda: f64,
    pub order: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseName {
    #[default]
    Caputo,
    SingleMl,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub t_intervals: usize,
    /// Uniform x grid on `[x_min, 1]`, unless `x` lists the points.
    pub x_nodes: usize,
    pub x_min: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { t_intervals: 256, x_nodes: 51, x_min: 0.02, x: None }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceConfig {
    #[default]
    Zero,
    Separable {
        time: TimeConfig,
        space: SpaceConfig,
        #[serde(default)]
        theorem_compliant: bool,
    },
    /// Delimited file with header `t,x,f`, rows ordered over t then x.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeConfig {
    Constant {
        value: f64,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    Exp {
        #[serde(default = "one")]
        amplitude: f64,
        rate: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceConfig {
    Zero,
    /// `J_ν(γ_mode x)` for the problem's own `ν`.
    BesselMode {
        mode: usize,
    },
    Polynomial {
        coeffs: Vec<f64>,
    },
    PowerBump {
        p: f64,
        q: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub modes: bool,
    pub pde_probe: bool,
    pub probe_x_nodes: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection { modes: true, pde_probe: true, probe_x_nodes: 512 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub margin: f64,
    pub mode_residual: f64,
    pub pde_residual: f64,
    pub nonlocal: f64,
    pub boundary: f64,
    pub tail: f64,
    /// Threshold of the Mittag-Leffler reduction suite.
    pub ml: f64,
    pub liu: f64,
    pub zeros: f64,
    pub orthogonality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            margin: MARGIN_TOL,
            mode_residual: 1e-2,
            pde_residual: 5e-2,
            nonlocal: 1e-8,
            boundary: 1e-10,
            tail: 1e-2,
            ml: 1e-12,
            liu: 1e-10,
            zeros: 1e-12,
            orthogonality: 1e-8,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 10] = [
        "margin",
        "mode_residual",
        "pde_residual",
        "nonlocal",
        "boundary",
        "tail",
        "ml",
        "liu",
        "zeros",
        "orthogonality",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "margin" => &mut self.margin,
            "mode_residual" => &mut self.mode_residual,
            "pde_residual" => &mut self.pde_residual,
            "nonlocal" => &mut self.nonlocal,
            "boundary" => &mut self.boundary,
            "tail" => &mut self.tail,
            "ml" => &mut self.ml,
            "liu" => &mut self.liu,
            "zeros" => &mut self.zeros,
            "orthogonality" => &mut self.orthogonality,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), CliError> {
        let slot = self.slot(name).ok_or_else(|| {
            CliError::Config(format!("unknown tolerance '{name}' (known: {})", Self::NAMES.join(", ")))
        })?;
        *slot = value;
        self.validate()
    }

    /// Apply `name=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), CliError> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("tolerance override '{spec}' is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("tolerance '{name}': '{value}' is not a number")))?;
        self.set(name.trim(), value)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let mut copy = self.clone();
        for name in Self::NAMES {
            let v = *copy.slot(name).expect("listed name");
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("tolerance '{name}' = {v} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub out_dir: PathBuf,
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { out_dir: PathBuf::from("out"), threads: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksSection {
    pub seed: u64,
    pub liu_draws: usize,
    pub nonlocal_configs: usize,
}

impl Default for ChecksSection {
    fn default() -> Self {
        ChecksSection { seed: 7, liu_draws: 50, nonlocal_configs: 10 }
    }
}

fn one() -> f64 {
    1.0
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // relative source paths are taken from the config's directory
        if let SourceConfig::Tabulated { path: p } = &mut cfg.source {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.tolerances.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn operator(&self) -> Result<TimeOperator, CliError> {
        let terms = self.problem.terms.iter().map(|t| LowerTerm { lambda: t.lambda, order: t.order }).collect();
        TimeOperator::new(self.problem.alpha, terms).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn nu(&self) -> Result<BesselOrder, CliError> {
        BesselOrder::new(self.problem.nu).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn x_grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(x) = &self.grid.x {
            return Ok(x.clone());
        }
        let g = &self.grid;
        if g.x_nodes < 2 || !(g.x_min > 0.0 && g.x_min < 1.0) {
            return Err(CliError::Config(format!(
                "x grid needs x_nodes >= 2 and 0 < x_min < 1 (got {} and {})",
                g.x_nodes, g.x_min
            )));
        }
        let h = (1.0 - g.x_min) / (g.x_nodes - 1) as f64;
        Ok((0..g.x_nodes).map(|i| if i + 1 == g.x_nodes { 1.0 } else { g.x_min + h * i as f64 }).collect())
    }

    pub fn source(&self) -> Result<SourceFunction, CliError> {
        let nu = self.nu()?;
        match &self.source {
            SourceConfig::Zero => Ok(SourceFunction::zero()),
            SourceConfig::Separable { time, space, theorem_compliant } => {
                let time = match time {
                    TimeConfig::Constant { value } => TimeProfile::Constant(*value),
                    TimeConfig::Polynomial { coeffs } => TimeProfile::Polynomial(coeffs.clone()),
                    TimeConfig::Sine { amplitude, omega, phase } => {
                        TimeProfile::Sine { amplitude: *amplitude, omega: *omega, phase: *phase }
                    }
                    TimeConfig::Exp { amplitude, rate } => TimeProfile::Exp { amplitude: *amplitude, rate: *rate },
                };
                let space = match space {
                    SpaceConfig::Zero => SpaceProfile::Zero,
                    SpaceConfig::BesselMode { mode } => {
                        if *mode == 0 {
                            return Err(CliError::Config("bessel-mode index starts at 1".into()));
                        }
                        let zeros = bessel_zeros(nu, *mode).map_err(|e| CliError::Config(e.to_string()))?;
                        SpaceProfile::BesselMode { nu, gamma: zeros.gamma(*mode) }
                    }
                    SpaceConfig::Polynomial { coeffs } => SpaceProfile::Polynomial(coeffs.clone()),
                    SpaceConfig::PowerBump { p, q } => SpaceProfile::PowerBump { p: *p, q: *q },
                };
                SourceFunction::separable(time, space, *theorem_compliant).map_err(|e| CliError::Config(e.to_string()))
            }
            SourceConfig::Tabulated { path } => Ok(SourceFunction::Tabulated(read_tabulated(path)?)),
        }
    }

    pub fn problem_spec(&self) -> Result<ProblemSpec, CliError> {
        let spec = ProblemSpec {
            nu: self.nu()?,
            op: self.operator()?,
            m: self.problem.m,
            t_end: self.problem.t_end,
            source: self.source()?,
            modes: self.problem.modes,
            t_intervals: self.grid.t_intervals,
            x_grid: self.x_grid()?,
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn response(&self) -> Response {
        match self.problem.response {
            ResponseName::Caputo => Response::Caputo,
            ResponseName::SingleMl => Response::SingleMl,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        let t = &self.tolerances;
        SolveOptions {
            threads: self.run.threads.max(1),
            margin_tol: t.margin,
            response: self.response(),
            verify_modes: self.verify.modes,
            mode_residual_tol: t.mode_residual,
            pde_probe: self.verify.pde_probe,
            probe_x_nodes: self.verify.probe_x_nodes,
            pde_residual_tol: t.pde_residual,
            nonlocal_tol: t.nonlocal,
            boundary_tol: t.boundary,
            tail_tol: t.tail,
        }
    }
}

/// Read `t,x,f` rows; both grids must be strictly increasing and complete.
pub fn read_tabulated(path: &Path) -> Result<TabulatedSource, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let field = |i: usize| -> Result<f64, CliError> {
            record.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
                CliError::Config(format!("{} row {}: column {} is not a number", path.display(), line + 2, i + 1))
            })
        };
        rows.push((field(0)?, field(1)?, field(2)?));
    }
    let mut t: Vec<f64> = Vec::new();
    let mut x: Vec<f64> = Vec::new();
    for &(ti, xi, _) in &rows {
        if t.last() != Some(&ti) {
            t.push(ti);
        }
        if t.len() == 1 {
            x.push(xi);
        }
    }
    if t.len() * x.len() != rows.len() {
        return Err(CliError::Config(format!("{}: rows do not form a full t-by-x grid", path.display())));
    }
    for (i, &(ti, xi, _)) in rows.iter().enumerate() {
        if ti != t[i / x.len()] || xi != x[i % x.len()] {
            return Err(CliError::Config(format!("{}: row {} breaks the t-major grid order", path.display(), i + 2)));
        }
    }
    let values = rows.into_iter().map(|r| r.2).collect();
    TabulatedSource::new(t, x, values).map_err(|e| CliError::Config(e.to_string()))
}
