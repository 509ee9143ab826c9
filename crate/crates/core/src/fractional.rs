//! Caputo derivatives of sampled functions and a finite-difference Bessel
//! operator.
//!
//! These are residual oracles. The solver never calls them; the checks use
//! them to substitute computed modes and fields back into the equations.

use crate::error::{Error, Result};
use crate::specfun::{gamma, BesselOrder};

/// Maximum number of lower-order terms in [`TimeOperator`].
pub const MAX_LOWER_TERMS: usize = 4;

/// One lower-order term `λ ∂^{order}` of the time operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerTerm {
    pub lambda: f64,
    pub order: f64,
}

/// `L = ∂^α − Σ λ_i ∂^{α_i}` with `0 < α_i ≤ 1`, `α_i < α ≤ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeOperator {
    alpha: f64,
    terms: Vec<LowerTerm>,
}

impl TimeOperator {
    pub fn new(alpha: f64, terms: Vec<LowerTerm>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidProblem(format!("alpha = {alpha} must lie in (0, 2]")));
        }
        if terms.len() > MAX_LOWER_TERMS {
            return Err(Error::InvalidProblem(format!(
                "{} lower-order terms given, at most {MAX_LOWER_TERMS} supported",
                terms.len()
            )));
        }
        for (i, t) in terms.iter().enumerate() {
            if !(t.order > 0.0 && t.order <= 1.0) {
                return Err(Error::InvalidProblem(format!("term {}: order {} must lie in (0, 1]", i + 1, t.order)));
            }
            if t.order >= alpha {
                return Err(Error::InvalidProblem(format!(
                    "term {}: order {} must be strictly below alpha = {alpha}",
                    i + 1,
                    t.order
                )));
            }
            if !t.lambda.is_finite() {
                return Err(Error::InvalidProblem(format!("term {}: lambda is not finite", i + 1)));
            }
        }
        Ok(TimeOperator { alpha, terms })
    }

    /// Pure `∂^α` with no lower-order terms.
    pub fn leading_only(alpha: f64) -> Result<Self> {
        Self::new(alpha, Vec::new())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn terms(&self) -> &[LowerTerm] {
        &self.terms
    }

    /// `[α]`, the integer part of the leading order.
    pub fn alpha_floor(&self) -> u32 {
        self.alpha.floor() as u32
    }
}

/// Values of a function on the uniform grid `t_j = j·dt`, `j = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    dt: f64,
    values: Vec<f64>,
}

pub const MIN_INTERVALS: usize = 8;

impl SampledFunction {
    /// Samples on `[0, t_end]` with `values.len() − 1` intervals.
    pub fn new(t_end: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_INTERVALS + 1 {
            return Err(Error::domain(
                "SampledFunction",
                format!("need at least {} nodes, got {}", MIN_INTERVALS + 1, values.len()),
            ));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::domain("SampledFunction", format!("t_end = {t_end}")));
        }
        let dt = t_end / (values.len() - 1) as f64;
        Ok(SampledFunction { dt, values })
    }

    pub fn from_fn(t_end: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = t_end / intervals as f64;
        let values = (0..=intervals).map(|j| if j == intervals { f(t_end) } else { f(j as f64 * dt) }).collect();
        Self::new(t_end, values)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        self.dt * self.intervals() as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        if j == self.intervals() {
            self.t_end()
        } else {
            j as f64 * self.dt
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn with_values(&self, values: Vec<f64>) -> SampledFunction {
        SampledFunction { dt: self.dt, values }
    }

    /// Piecewise-cubic Lagrange interpolation through the four nodes
    /// surrounding `t` (shifted inwards at the ends).
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.intervals();
        let s = (t / self.dt).clamp(0.0, n as f64);
        let cell = (s.floor() as usize).min(n - 1);
        let first = cell.saturating_sub(1).min(n - 3);
        let x = s - first as f64;
        let v = &self.values[first..first + 4];
        // nodes at 0, 1, 2, 3
        let l0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        let l1 = x * (x - 2.0) * (x - 3.0) / 2.0;
        let l2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
        let l3 = x * (x - 1.0) * (x - 2.0) / 6.0;
        l0 * v[0] + l1 * v[1] + l2 * v[2] + l3 * v[3]
    }
}

/// Nodal first derivative: central differences inside, second-order
/// one-sided differences at both ends.
fn first_derivative(v: &[f64], dt: f64) -> Vec<f64> {
    let n = v.len() - 1;
    let mut d = vec![0.0; n + 1];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    d[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * dt);
    for j in 1..n {
        d[j] = (v[j + 1] - v[j - 1]) / (2.0 * dt);
    }
    d
}

fn second_derivative(v: &[f64], dt: f64) -> Vec<f64> {
    let n = v.len() - 1;
    let h2 = dt * dt;
    let mut d = vec![0.0; n + 1];
    d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    d[n] = (2.0 * v[n] - 5.0 * v[n - 1] + 4.0 * v[n - 2] - v[n - 3]) / h2;
    for j in 1..n {
        d[j] = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / h2;
    }
    d
}

/// L1 scheme for `0 < β < 1`:
/// `∂^β g(t_n) ≈ Δt^{-β}/Γ(2−β) Σ_{j<n} b_j (g_{n−j} − g_{n−j−1})`,
/// `b_j = (j+1)^{1−β} − j^{1−β}`.
fn l1(v: &[f64], dt: f64, beta: f64) -> Vec<f64> {
    let n = v.len() - 1;
    let p = 1.0 - beta;
    let b: Vec<f64> = (0..n).map(|j| ((j + 1) as f64).powf(p) - (j as f64).powf(p)).collect();
    let diff: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = dt.powf(-beta) / gamma(2.0 - beta).expect("2 - beta > 1");
    let mut out = vec![0.0; n + 1];
    for (m, o) in out.iter_mut().enumerate().skip(1) {
        // Σ_{j=0}^{m-1} b_j diff[m-1-j]
        let s: f64 = b[..m].iter().zip(diff[..m].iter().rev()).map(|(w, d)| w * d).sum();
        *o = scale * s;
    }
    out
}

/// Caputo derivative `∂^β g` at every grid node.
///
/// * `β = 0`: the function itself.
/// * `0 < β < 1`: L1 scheme, `O(Δt^{2−β})`.
/// * `β = 1`, `β = 2`: second-order finite differences.
/// * `1 < β < 2`: the L1 scheme of order `β − 1` applied to the nodal
///   derivative `g′` (piecewise-linear `g′`), `O(Δt^{3−β})` for smooth g.
pub fn caputo(g: &SampledFunction, beta: f64) -> Result<SampledFunction> {
    if !(0.0..=2.0).contains(&beta) {
        return Err(Error::domain("caputo", format!("order {beta} outside (0, 2]")));
    }
    if beta > 1.0 && g.intervals() < 16 {
        return Err(Error::domain("caputo", "orders above 1 need at least 16 intervals"));
    }
    let v = &g.values;
    let out = if beta == 0.0 {
        v.clone()
    } else if beta < 1.0 {
        l1(v, g.dt, beta)
    } else if beta == 1.0 {
        first_derivative(v, g.dt)
    } else if beta < 2.0 {
        l1(&first_derivative(v, g.dt), g.dt, beta - 1.0)
    } else {
        second_derivative(v, g.dt)
    };
    Ok(g.with_values(out))
}

/// `L g = ∂^α g − Σ λ_i ∂^{α_i} g` nodewise.
pub fn apply_l(op: &TimeOperator, g: &SampledFunction) -> Result<SampledFunction> {
    let mut acc = caputo(g, op.alpha)?.values;
    for term in &op.terms {
        let d = caputo(g, term.order)?;
        for (a, b) in acc.iter_mut().zip(&d.values) {
            *a -= term.lambda * b;
        }
    }
    Ok(g.with_values(acc))
}

/// Samples of an x-profile on the uniform grid from `x_min` to `x_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct XProfile {
    pub x_min: f64,
    pub x_max: f64,
    pub values: Vec<f64>,
}

impl XProfile {
    pub fn from_fn(x_min: f64, x_max: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = (x_max - x_min) / (nodes - 1) as f64;
        let values = (0..nodes).map(|i| f(x_min + h * i as f64)).collect();
        XProfile { x_min, x_max, values }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.values.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + self.dx() * i as f64
    }
}

pub const MIN_X_NODES: usize = 32;
pub const MIN_X: f64 = 1e-3;

/// `B_ν u = u_xx + u_x/x − ν² u/x²` by second-order differences
/// (one-sided at the two ends).
pub fn apply_bessel(profile: &XProfile, nu: BesselOrder) -> Result<XProfile> {
    let n = profile.values.len();
    if n < MIN_X_NODES {
        return Err(Error::domain("apply_bessel", format!("{n} nodes, need at least {MIN_X_NODES}")));
    }
    if profile.x_min < MIN_X || profile.x_max <= profile.x_min {
        return Err(Error::domain(
            "apply_bessel",
            format!("grid [{}, {}] must start at x >= {MIN_X}", profile.x_min, profile.x_max),
        ));
    }
    let h = profile.dx();
    let ux = first_derivative(&profile.values, h);
    let uxx = second_derivative(&profile.values, h);
    let nu2 = nu.value() * nu.value();
    let values = (0..n)
        .map(|i| {
            let x = profile.x(i);
            uxx[i] + ux[i] / x - nu2 * profile.values[i] / (x * x)
        })
        .collect();
    Ok(XProfile { x_min: profile.x_min, x_max: profile.x_max, values })
}
