//! Fourier–Bessel expansion on `(0, 1)` with weight `x`.
//!
//! `h(x) = Σ c_k J_ν(γ_k x)`, `c_k = 2/J_{ν+1}²(γ_k) ∫_0^1 x h(x) J_ν(γ_k x) dx`.
//!
//! All coefficients share one composite Gauss–Legendre node set sized for
//! the largest zero, so an expansion is a fixed linear map applied to the
//! samples of `h` at the nodes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fractional::SampledFunction;
use crate::numeric::NeumaierSum;
use crate::quadrature::GaussRule;
use crate::specfun::{bessel_j, BesselOrder, BesselZeroTable};

/// Smallest `x` accepted by [`fb_reconstruct`].
pub const MIN_RECONSTRUCT_X: f64 = 1e-6;
/// Gauss–Legendre points per panel.
const POINTS_PER_PANEL: usize = 10;
const MIN_PANELS: usize = 32;
/// Panels per oscillation period `2π/γ`.
const PANELS_PER_PERIOD: f64 = 8.0;
/// Dyadic refinement levels of the first panel toward `x = 0`.
const GRADING_LEVELS: usize = 30;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Time factor `g(t)` of a separable source.
#[derive(Clone)]
pub enum TimeProfile {
    Constant(f64),
    /// `Σ c_i t^i`.
    Polynomial(Vec<f64>),
    /// `a sin(ω t + φ)`.
    Sine {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// `a e^{r t}`.
    Exp {
        amplitude: f64,
        rate: f64,
    },
    Custom(Profile),
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant(c) => *c,
            TimeProfile::Polynomial(c) => horner(c, t),
            TimeProfile::Sine { amplitude, omega, phase } => amplitude * (omega * t + phase).sin(),
            TimeProfile::Exp { amplitude, rate } => amplitude * (rate * t).exp(),
            TimeProfile::Custom(g) => g(t),
        }
    }
}

impl fmt::Debug for TimeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeProfile::Constant(c) => write!(f, "Constant({c})"),
            TimeProfile::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            TimeProfile::Sine { amplitude, omega, phase } => {
                write!(f, "Sine {{ amplitude: {amplitude}, omega: {omega}, phase: {phase} }}")
            }
            TimeProfile::Exp { amplitude, rate } => write!(f, "Exp {{ amplitude: {amplitude}, rate: {rate} }}"),
            TimeProfile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Space factor `h(x)` of a separable source.
#[derive(Clone)]
pub enum SpaceProfile {
    Zero,
    /// `J_ν(γ x)`; normally `γ` is one of the zeros of `J_ν`.
    BesselMode {
        nu: BesselOrder,
        gamma: f64,
    },
    /// `Σ c_i x^i`.
    Polynomial(Vec<f64>),
    /// `x^p (1 − x)^q`.
    PowerBump {
        p: f64,
        q: f64,
    },
    Custom(Profile),
}

impl SpaceProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SpaceProfile::Zero => 0.0,
            SpaceProfile::BesselMode { nu, gamma } => bessel_j(*nu, gamma * x).unwrap_or(f64::NAN),
            SpaceProfile::Polynomial(c) => horner(c, x),
            SpaceProfile::PowerBump { p, q } => x.powf(*p) * (1.0 - x).powf(*q),
            SpaceProfile::Custom(h) => h(x),
        }
    }
}

impl fmt::Debug for SpaceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceProfile::Zero => write!(f, "Zero"),
            SpaceProfile::BesselMode { nu, gamma } => {
                write!(f, "BesselMode {{ nu: {}, gamma: {gamma} }}", nu.value())
            }
            SpaceProfile::Polynomial(c) => write!(f, "Polynomial({c:?})"),
            SpaceProfile::PowerBump { p, q } => write!(f, "PowerBump {{ p: {p}, q: {q} }}"),
            SpaceProfile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Samples `f(t_i, x_j)` on a tensor grid, bilinear in between and clamped
/// outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSource {
    t: Vec<f64>,
    x: Vec<f64>,
    /// Row-major over `t`, then `x`.
    values: Vec<f64>,
}

impl TabulatedSource {
    pub fn new(t: Vec<f64>, x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&t) || !increasing(&x) {
            return Err(Error::InvalidProblem(
                "tabulated source needs at least two strictly increasing t and x nodes".into(),
            ));
        }
        if values.len() != t.len() * x.len() {
            return Err(Error::InvalidProblem(format!(
                "tabulated source has {} values for a {}x{} grid",
                values.len(),
                t.len(),
                x.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("tabulated source has non-finite values".into()));
        }
        Ok(TabulatedSource { t, x, values })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let (i, u) = locate(&self.t, t);
        let (j, v) = locate(&self.x, x);
        let nx = self.x.len();
        let f = |a: usize, b: usize| self.values[a * nx + b];
        (1.0 - u) * ((1.0 - v) * f(i, j) + v * f(i, j + 1)) + u * ((1.0 - v) * f(i + 1, j) + v * f(i + 1, j + 1))
    }
}

/// Cell index and clamped local coordinate in `[0, 1]`.
fn locate(grid: &[f64], s: f64) -> (usize, f64) {
    let n = grid.len();
    let i = grid.partition_point(|&g| g <= s).clamp(1, n - 1) - 1;
    let u = ((s - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
    (i, u)
}

/// Source term `f(t, x)`.
#[derive(Debug, Clone)]
pub enum SourceFunction {
    Separable {
        time: TimeProfile,
        space: SpaceProfile,
        theorem_compliant: bool,
    },
    Tabulated(TabulatedSource),
    /// `Σ w_i f_i`.
    Sum(Vec<(f64, SourceFunction)>),
}

impl SourceFunction {
    pub fn zero() -> Self {
        SourceFunction::Separable {
            time: TimeProfile::Constant(0.0),
            space: SpaceProfile::Zero,
            theorem_compliant: true,
        }
    }

    /// Separable source; when `theorem_compliant` is set the endpoint
    /// conditions on `h` are checked numerically.
    pub fn separable(time: TimeProfile, space: SpaceProfile, theorem_compliant: bool) -> Result<Self> {
        if theorem_compliant {
            check_endpoint_conditions(&|x| space.eval(x))?;
        }
        Ok(SourceFunction::Separable { time, space, theorem_compliant })
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            SourceFunction::Separable { time, space, .. } => time.eval(t) * space.eval(x),
            SourceFunction::Tabulated(tab) => tab.eval(t, x),
            SourceFunction::Sum(parts) => parts.iter().map(|(w, f)| w * f.eval(t, x)).sum(),
        }
    }

    pub fn is_theorem_compliant(&self) -> bool {
        match self {
            SourceFunction::Separable { theorem_compliant, .. } => *theorem_compliant,
            SourceFunction::Tabulated(_) => false,
            SourceFunction::Sum(parts) => parts.iter().all(|(_, f)| f.is_theorem_compliant()),
        }
    }
}

/// Local power-law exponent of `h` at an endpoint, from two samples at
/// distances `δ` and `δ/2`. Values below `floor` count as exact zeros.
fn endpoint_order(h: &dyn Fn(f64) -> f64, at: f64, toward: f64, floor: f64) -> f64 {
    let d = 1e-2;
    let a = h(at + toward * d).abs();
    let b = h(at + toward * 0.5 * d).abs();
    if a <= floor && b <= floor {
        return f64::INFINITY;
    }
    (a / b).log2()
}

/// `h, h′, h″, h‴` vanish at 0 and `h, h′, h″` vanish at 1, checked as
/// local orders `≥ 4` and `≥ 3` (with slack for the finite step).
fn check_endpoint_conditions(h: &dyn Fn(f64) -> f64) -> Result<()> {
    let scale = (1..100).map(|i| h(i as f64 / 100.0).abs()).fold(0.0, f64::max);
    if !scale.is_finite() {
        return Err(Error::InvalidProblem("space profile is not finite on (0, 1)".into()));
    }
    let floor = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let at0 = endpoint_order(h, 0.0, 1.0, floor);
    let at1 = endpoint_order(h, 1.0, -1.0, floor);
    if at0 < 3.7 || at1 < 2.7 {
        return Err(Error::InvalidProblem(format!(
            "space profile flagged theorem-compliant but vanishes only to order {at0:.2} at x=0 \
             and {at1:.2} at x=1 (need 4 and 3)"
        )));
    }
    Ok(())
}

/// Composite Gauss–Legendre rule on `(0, 1]`: uniform panels with the
/// first one split dyadically toward `x = 0`.
#[derive(Debug, Clone)]
pub struct FbQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FbQuadrature {
    pub fn for_gamma(gamma_max: f64) -> Result<Self> {
        if !(gamma_max.is_finite() && gamma_max > 0.0) {
            return Err(Error::domain("FbQuadrature", format!("gamma_max = {gamma_max} must be positive")));
        }
        let panels = MIN_PANELS.max((PANELS_PER_PERIOD * gamma_max / (2.0 * std::f64::consts::PI)).ceil() as usize);
        let rule = GaussRule::legendre(POINTS_PER_PANEL)?;
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity((panels + GRADING_LEVELS) * POINTS_PER_PANEL);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut push = |lo: f64, hi: f64| {
            for (x, w) in rule.mapped(lo, hi) {
                nodes.push(x);
                weights.push(w);
            }
        };
        let mut lo = h * 0.5f64.powi(GRADING_LEVELS as i32);
        push(0.0, lo);
        while lo < h * 0.75 {
            push(lo, 2.0 * lo);
            lo *= 2.0;
        }
        for i in 1..panels {
            push(i as f64 * h, (i + 1) as f64 * h);
        }
        Ok(FbQuadrature { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).collect::<NeumaierSum>().value()
    }
}

fn norm_factor(nu: BesselOrder, gamma: f64) -> Result<f64> {
    let next = BesselOrder::new(nu.value() + 1.0)?;
    let j1 = bessel_j(next, gamma)?;
    if j1.abs() < 1e-12 {
        return Err(Error::Internal(format!("J_(nu+1)({gamma}) vanishes; gamma is not a zero of J_nu")));
    }
    Ok(2.0 / (j1 * j1))
}

/// `2/J_{ν+1}²(γ) ∫_0^1 x h(x) J_ν(γ x) dx`.
pub fn fb_coefficient(h: impl Fn(f64) -> f64, nu: BesselOrder, gamma_k: f64) -> Result<f64> {
    let quad = FbQuadrature::for_gamma(gamma_k)?;
    let norm = norm_factor(nu, gamma_k)?;
    let mut s = NeumaierSum::new();
    for (&x, &w) in quad.nodes.iter().zip(&quad.weights) {
        s.add(w * x * h(x) * bessel_j(nu, gamma_k * x)?);
    }
    Ok(norm * s.value())
}

/// Linear map from samples of `h` at the shared nodes to the first `K`
/// coefficients.
#[derive(Debug, Clone)]
pub struct FbProjector {
    quad: FbQuadrature,
    /// Row `k`: `2/J_{ν+1}²(γ_k) · w_q x_q J_ν(γ_k x_q)`.
    rows: Vec<Vec<f64>>,
}

impl FbProjector {
    pub fn new(nu: BesselOrder, zeros: &BesselZeroTable) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::domain("FbProjector", "empty zero table"));
        }
        let gamma_max = zeros.zeros().iter().cloned().fold(0.0, f64::max);
        let quad = FbQuadrature::for_gamma(gamma_max)?;
        let rows = zeros
            .zeros()
            .iter()
            .map(|&g| {
                let norm = norm_factor(nu, g)?;
                quad.nodes
                    .iter()
                    .zip(&quad.weights)
                    .map(|(&x, &w)| Ok(norm * w * x * bessel_j(nu, g * x)?))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FbProjector { quad, rows })
    }

    pub fn nodes(&self) -> &[f64] {
        self.quad.nodes()
    }

    pub fn modes(&self) -> usize {
        self.rows.len()
    }

    /// Coefficients of a profile given by its samples at [`Self::nodes`].
    pub fn project_samples(&self, samples: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(samples).map(|(r, s)| r * s).collect::<NeumaierSum>().value())
            .collect()
    }

    pub fn project(&self, h: impl Fn(f64) -> f64) -> Vec<f64> {
        let samples: Vec<f64> = self.quad.nodes.iter().map(|&x| h(x)).collect();
        self.project_samples(&samples)
    }
}

/// Mode coefficients `f_k(t_j)` on a uniform time grid.
#[derive(Debug, Clone)]
pub struct ModeCoefficients {
    pub nu: BesselOrder,
    pub zeros: BesselZeroTable,
    pub coeffs: Vec<SampledFunction>,
}

impl ModeCoefficients {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `f_k` with 1-based `k`.
    pub fn mode(&self, k: usize) -> &SampledFunction {
        &self.coeffs[k - 1]
    }
}

/// Expand `f(t_j, ·)` for every node `t_j = j·t_end/intervals`.
pub fn fb_expand(
    f: &SourceFunction,
    nu: BesselOrder,
    zeros: &BesselZeroTable,
    t_end: f64,
    intervals: usize,
) -> Result<ModeCoefficients> {
    let proj = FbProjector::new(nu, zeros)?;
    fb_expand_with(&proj, f, nu, zeros, t_end, intervals)
}

/// [`fb_expand`] with a prebuilt projector.
pub fn fb_expand_with(
    proj: &FbProjector,
    f: &SourceFunction,
    nu: BesselOrder,
    zeros: &BesselZeroTable,
    t_end: f64,
    intervals: usize,
) -> Result<ModeCoefficients> {
    if proj.modes() != zeros.len() {
        return Err(Error::Internal("projector and zero table disagree on the mode count".into()));
    }
    let k = zeros.len();
    let dt = t_end / intervals as f64;
    let mut table = vec![vec![0.0; intervals + 1]; k];
    match f {
        SourceFunction::Separable { time, space, .. } => {
            let c = proj.project(|x| space.eval(x));
            for j in 0..=intervals {
                let g = time.eval(j as f64 * dt);
                for (row, ck) in table.iter_mut().zip(&c) {
                    row[j] = ck * g;
                }
            }
        }
        _ => {
            let mut samples = vec![0.0; proj.nodes().len()];
            for j in 0..=intervals {
                let t = j as f64 * dt;
                for (s, &x) in samples.iter_mut().zip(proj.nodes()) {
                    *s = f.eval(t, x);
                }
                for (row, ck) in table.iter_mut().zip(proj.project_samples(&samples)) {
                    row[j] = ck;
                }
            }
        }
    }
    if table.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidProblem("source expansion produced non-finite coefficients".into()));
    }
    let coeffs = table.into_iter().map(|values| SampledFunction::new(t_end, values)).collect::<Result<Vec<_>>>()?;
    Ok(ModeCoefficients { nu, zeros: zeros.clone(), coeffs })
}

/// `Σ_k c_k J_ν(γ_k x)` in ascending `k` with compensated summation.
pub fn fb_reconstruct(coeffs: &[f64], nu: BesselOrder, zeros: &BesselZeroTable, x: f64) -> Result<f64> {
    if !(MIN_RECONSTRUCT_X..=1.0).contains(&x) {
        return Err(Error::domain("fb_reconstruct", format!("x = {x} outside [{MIN_RECONSTRUCT_X}, 1]")));
    }
    if coeffs.len() > zeros.len() {
        return Err(Error::domain(
            "fb_reconstruct",
            format!("{} coefficients but only {} zeros", coeffs.len(), zeros.len()),
        ));
    }
    let mut s = NeumaierSum::new();
    for (c, &g) in coeffs.iter().zip(zeros.zeros()) {
        s.add(c * bessel_j(nu, g * x)?);
    }
    Ok(s.value())
}
