//! Explicit solution of
//! `L u − B_ν u = f` on `0 < x < 1, 0 < t < T`,
//! `u(t, 1) = 0`, `u(0, x) + M u(T, x) = 0`.
//!
//! With `u = Σ_k U_k(t) J_ν(γ_k x)` every mode solves `L U + γ_k² U = f_k`,
//! `U(0) + M U(T) = 0`, so
//! `U = F − M F(T) Ū / (1 + M Ū(T))` where `F = (z^{α−1} E_{…,α}) ∗ f_k` is the
//! zero-initial-value response and `Ū` the unit-initial-value response.

use std::thread;

use crate::error::{Error, ResonantMode, Result};
use crate::fourier_bessel::{fb_expand, SourceFunction, MIN_RECONSTRUCT_X};
use crate::fractional::{apply_bessel, apply_l, SampledFunction, TimeOperator, XProfile, MIN_INTERVALS};
use crate::mittag_leffler::{homogeneous_response, u0_bar, OperatorKernel};
use crate::numeric::{loglog_slope, NeumaierSum};
use crate::quadrature::GaussRule;
use crate::specfun::{bessel_j, bessel_zeros, BesselOrder, BesselZeroTable};

pub const DEFAULT_MODES: usize = 32;
/// Largest accepted `γ_K`.
pub const MAX_GAMMA: f64 = 250.0;
/// Relative non-resonance margin `|1 + M Ū(T)| / max(1, |M Ū(T)|)`.
pub const MARGIN_TOL: f64 = 1e-8;
pub const CONVOLUTION_TOL: f64 = 1e-8;
const GJ_START: usize = 64;
const GJ_MAX: usize = 4096;
/// Smallest grid accepted by [`verify_mode`].
pub const MIN_VERIFY_INTERVALS: usize = 256;
/// Mode decay `|U_k| ≲ γ_k^{-3/2}` for sources meeting the endpoint conditions.
pub const DECAY_EXPONENT: f64 = 1.5;
/// Points at which `x u_x` is sampled.
pub const FLUX_X: [f64; 2] = [1e-3, 1e-2];
const PROBES: usize = 8;
const PROBE_X_MIN: f64 = 0.02;
const CELL_POINTS: usize = 8;
const MAX_SUBPANELS: usize = 256;

/// Which unit-initial-value response enters the mode formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Response {
    /// `1 − γ² t^α E_{(α−α_i,…,α),1+α}(…)`, which solves the mode equation
    /// with Caputo lower-order terms.
    #[default]
    Caputo,
    /// `E_{(α−α_i,…,α),1}(…)`. Differs from `Caputo` by
    /// `Σ λ_i t^{α−α_i} E_{…,1+α−α_i}` and leaves the residual
    /// `Σ λ_i t^{−α_i}/Γ(1−α_i)` in the mode equation.
    SingleMl,
}

impl Response {
    fn offset(self, alpha: f64) -> f64 {
        match self {
            Response::Caputo => 1.0 + alpha,
            Response::SingleMl => 1.0,
        }
    }

    /// `Ū(t)` for one mode.
    pub fn eval(self, op: &TimeOperator, gamma_sq: f64, t: f64) -> Result<f64> {
        match self {
            Response::Caputo => homogeneous_response(op, gamma_sq, t),
            Response::SingleMl => u0_bar(op, gamma_sq, t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub nu: BesselOrder,
    pub op: TimeOperator,
    pub m: f64,
    pub t_end: f64,
    pub source: SourceFunction,
    pub modes: usize,
    /// Intervals of the uniform time grid; the field is reported on every node.
    pub t_intervals: usize,
    pub x_grid: Vec<f64>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        if !(self.nu.value() > 0.0) {
            return bad(format!("nu = {} must be positive", self.nu.value()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("T = {} must be positive", self.t_end));
        }
        if !self.m.is_finite() {
            return bad(format!("M = {} is not finite", self.m));
        }
        if self.modes == 0 {
            return bad("at least one mode is required".into());
        }
        if self.t_intervals < MIN_INTERVALS {
            return bad(format!("{} time intervals, need at least {MIN_INTERVALS}", self.t_intervals));
        }
        if self.x_grid.is_empty() {
            return bad("empty x grid".into());
        }
        if let Some(x) = self.x_grid.iter().find(|x| !(MIN_RECONSTRUCT_X..=1.0).contains(*x)) {
            return bad(format!("x = {x} outside [{MIN_RECONSTRUCT_X}, 1]"));
        }
        Ok(())
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let dt = self.t_end / self.t_intervals as f64;
        (0..=self.t_intervals).map(|j| if j == self.t_intervals { self.t_end } else { j as f64 * dt }).collect()
    }
}

/// One solved mode.
#[derive(Debug, Clone)]
pub struct Mode {
    pub k: usize,
    pub gamma: f64,
    pub f_k: SampledFunction,
    /// Zero-initial-value response `F_k`.
    pub forced: SampledFunction,
    /// Unit-initial-value response `Ū`.
    pub response: SampledFunction,
    pub u0_at_t: f64,
    pub amplitude: f64,
    pub u_k: SampledFunction,
}

impl Mode {
    pub fn max_abs(&self) -> f64 {
        self.u_k.max_abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeMargin {
    pub k: usize,
    pub u0_at_t: f64,
    pub margin: f64,
    pub forbidden_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonresonanceReport {
    pub margins: Vec<ModeMargin>,
    pub margin_tol: f64,
}

impl NonresonanceReport {
    pub fn passed(&self) -> bool {
        self.margins.iter().all(|m| m.margin > self.margin_tol)
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.margin).fold(f64::INFINITY, f64::min)
    }
}

fn margin(m: f64, u0: f64) -> f64 {
    (1.0 + m * u0).abs() / (m * u0).abs().max(1.0)
}

fn forbidden(u0: f64) -> f64 {
    if u0 == 0.0 {
        f64::INFINITY
    } else {
        -1.0 / u0
    }
}

/// `Ū(T)` and the margin for every mode; fails with [`Error::Resonance`]
/// listing the offending modes when any margin is at most [`MARGIN_TOL`].
pub fn nonresonance_check(
    op: &TimeOperator,
    m: f64,
    t_end: f64,
    zeros: &BesselZeroTable,
) -> Result<NonresonanceReport> {
    nonresonance_check_with(op, m, t_end, zeros, MARGIN_TOL, Response::default())
}

pub fn nonresonance_check_with(
    op: &TimeOperator,
    m: f64,
    t_end: f64,
    zeros: &BesselZeroTable,
    margin_tol: f64,
    response: Response,
) -> Result<NonresonanceReport> {
    let mut margins = Vec::with_capacity(zeros.len());
    for (i, g) in zeros.zeros().iter().enumerate() {
        let u0 = response.eval(op, g * g, t_end)?;
        margins.push(ModeMargin { k: i + 1, u0_at_t: u0, margin: margin(m, u0), forbidden_m: forbidden(u0) });
    }
    let report = NonresonanceReport { margins, margin_tol };
    if report.passed() {
        return Ok(report);
    }
    let modes = report
        .margins
        .iter()
        .filter(|mm| !(mm.margin > margin_tol))
        .map(|mm| ResonantMode { k: mm.k, margin: mm.margin, forbidden_m: mm.forbidden_m })
        .collect();
    Err(Error::Resonance { modes })
}

/// `F_k(t) = ∫_0^t z^{α−1} E_{…,α}(…) f_k(t − z) dz` with `f_k` interpolated
/// by piecewise cubics.
///
/// `[0, t]` is split at the kinks of the interpolant, panels touching or
/// near the origin are graded geometrically, the innermost piece `[0, ε]`
/// takes a Gauss–Jacobi rule with weight `z^{α−1}` and every other panel a
/// Gauss–Legendre rule. Node counts double from 64 until two results
/// agree to [`CONVOLUTION_TOL`].
pub fn mode_convolution(op: &TimeOperator, gamma: f64, f_k: &SampledFunction, t: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain("mode_convolution", format!("gamma = {gamma} must be positive")));
    }
    if !(0.0..=f_k.t_end()).contains(&t) {
        return Err(Error::domain("mode_convolution", format!("t = {t} outside [0, {}]", f_k.t_end())));
    }
    if t == 0.0 || f_k.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let alpha = op.alpha();
    let kernel = OperatorKernel::new(op, gamma * gamma, alpha, t)?;
    let panels = convolution_panels(t, f_k.dt(), alpha);
    let g = |z: f64| f_k.interpolate(t - z);
    let pass = |n: usize| -> Result<(f64, f64)> {
        let inner = GaussRule::jacobi(n, 0.0, alpha - 1.0)?;
        let outer = GaussRule::legendre((n / 8).max(8))?;
        let mut s = NeumaierSum::new();
        let mut abs = 0.0;
        for (z, w) in inner.mapped(0.0, panels[0].1) {
            let v = w * kernel.eval(z) * g(z);
            s.add(v);
            abs += v.abs();
        }
        for &(lo, hi) in &panels[1..] {
            for (z, w) in outer.mapped(lo, hi) {
                let v = w * kernel.eval_weighted(z) * g(z);
                s.add(v);
                abs += v.abs();
            }
        }
        Ok((s.value(), abs))
    };
    let mut n = GJ_START;
    let (mut prev, _) = pass(n)?;
    while n < GJ_MAX {
        n *= 2;
        let (cur, abs) = pass(n)?;
        if (cur - prev).abs() <= CONVOLUTION_TOL * cur.abs().max(1e-3 * abs) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Internal(format!("convolution quadrature unsettled after {GJ_MAX} nodes (gamma = {gamma}, t = {t})")))
}

/// Panels of `[0, t]`: breaks at `t − t_m`, ratio at most 2 away from the
/// origin, and a first panel `[0, ε]` small enough that the non-smooth
/// part of the integrand there is below `1e-12` of the first grid cell.
fn convolution_panels(t: f64, dt: f64, alpha: f64) -> Vec<(f64, f64)> {
    let mut breaks = vec![0.0];
    let first = t - (t / dt).floor() * dt;
    let mut z = if first > 1e-14 * dt { first } else { first + dt };
    while z < t * (1.0 - 1e-14) {
        breaks.push(z);
        z += dt;
    }
    breaks.push(t);
    let levels = ((12.0 * std::f64::consts::LOG2_10 / alpha).ceil() as usize).min(400);
    let mut panels = Vec::new();
    let top = breaks[1];
    let eps = top * 0.5f64.powi(levels as i32);
    panels.push((0.0, eps));
    let mut lo = eps;
    while lo < top {
        let hi = (2.0 * lo).min(top);
        panels.push((lo, hi));
        lo = hi;
    }
    for w in breaks[1..].windows(2) {
        let (mut lo, hi) = (w[0], w[1]);
        while hi > 2.0 * lo {
            panels.push((lo, 2.0 * lo));
            lo *= 2.0;
        }
        panels.push((lo, hi));
    }
    panels
}

/// Node offsets of the three cubic stencils relative to the cell start:
/// first cell, interior cells, last cell.
const STENCILS: [[f64; 4]; 3] = [[0.0, 1.0, 2.0, 3.0], [-1.0, 0.0, 1.0, 2.0], [-2.0, -1.0, 0.0, 1.0]];

/// Stencil shape and first node for the cell `[t_m, t_{m+1}]` of `n`;
/// the same choice as [`SampledFunction::interpolate`].
fn stencil(m: usize, n: usize) -> (usize, usize) {
    if m == 0 {
        (0, 0)
    } else if m + 1 == n {
        (2, n - 3)
    } else {
        (1, m - 1)
    }
}

fn lagrange(nodes: &[f64; 4], q: usize, u: f64) -> f64 {
    let mut p = 1.0;
    for (r, e) in nodes.iter().enumerate() {
        if r != q {
            p *= (u - e) / (nodes[q] - e);
        }
    }
    p
}

/// Coefficients of `ℓ_q(1 − v)` in powers of `v`.
fn lagrange_flipped(nodes: &[f64; 4], q: usize) -> [f64; 4] {
    let mut c = [1.0, 0.0, 0.0, 0.0];
    let mut deg = 0;
    for (r, e) in nodes.iter().enumerate() {
        if r == q {
            continue;
        }
        // multiply by ((1 − e) − v)/(e_q − e)
        let d = nodes[q] - e;
        let (a, b) = ((1.0 - e) / d, -1.0 / d);
        for i in (0..=deg + 1).rev() {
            let hi = if i > 0 { c[i - 1] * b } else { 0.0 };
            let lo = if i <= deg { c[i] * a } else { 0.0 };
            c[i] = hi + lo;
        }
        deg += 1;
    }
    c
}

type CellMoments = [[f64; 4]; 3];

fn subpanels(kernel: &OperatorKernel, lo: f64, width: f64) -> usize {
    ((kernel.rate_at(lo) * width / 2.0).ceil() as usize).clamp(1, MAX_SUBPANELS)
}

/// `∫ K(z) ℓ_{σ,q}(i + 1 − z/h) dz` over `[lo, hi]` for all shapes σ and nodes q.
fn panel_moments(
    kernel: &OperatorKernel,
    rule: &GaussRule,
    lo: f64,
    hi: f64,
    shift: f64,
    h: f64,
    acc: &mut CellMoments,
) {
    let parts = subpanels(kernel, lo, hi - lo);
    let step = (hi - lo) / parts as f64;
    for p in 0..parts {
        let a = lo + p as f64 * step;
        let b = if p + 1 == parts { hi } else { a + step };
        for (z, w) in rule.mapped(a, b) {
            let kz = w * kernel.eval_weighted(z);
            let u = shift - z / h;
            for (sigma, nodes) in STENCILS.iter().enumerate() {
                for q in 0..4 {
                    acc[sigma][q] += kz * lagrange(nodes, q, u);
                }
            }
        }
    }
}

/// Moments of the kernel against the cubic basis, cell by cell.
fn cell_moments(kernel: &OperatorKernel, h: f64, n: usize) -> Result<Vec<CellMoments>> {
    let rule = GaussRule::legendre(CELL_POINTS)?;
    let mut out = vec![[[0.0; 4]; 3]; n];
    // first cell: series moments on [0, a], dyadic panels on [a, h]
    let mut a = h;
    while a > kernel.switch() {
        a *= 0.5;
    }
    let series = kernel.series();
    let b = kernel.offset();
    let flipped: Vec<[f64; 4]> =
        STENCILS.iter().flat_map(|nodes| (0..4).map(move |q| lagrange_flipped(nodes, q))).collect();
    let ratio = a / h;
    let ln_s = (a / series.t_max()).ln();
    for &(p, w) in series.terms() {
        let f = w * a.powf(b) * (p * ln_s).exp();
        if f == 0.0 {
            continue;
        }
        for sigma in 0..3 {
            for q in 0..4 {
                let c = &flipped[4 * sigma + q];
                let mut s = 0.0;
                let mut r = 1.0;
                for (e, ce) in c.iter().enumerate() {
                    s += ce * r / (b + p + e as f64);
                    r *= ratio;
                }
                out[0][sigma][q] += f * s;
            }
        }
    }
    let mut lo = a;
    while lo < h {
        let hi = (2.0 * lo).min(h);
        panel_moments(kernel, &rule, lo, hi, 1.0, h, &mut out[0]);
        lo = hi;
    }
    for (i, cell) in out.iter_mut().enumerate().skip(1) {
        let lo = i as f64 * h;
        let hi = if i + 1 == n { kernel.z_max() } else { lo + h };
        panel_moments(kernel, &rule, lo, hi, (i + 1) as f64, h, cell);
    }
    if out.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Internal("kernel moments are not finite".into()));
    }
    Ok(out)
}

/// `∫_0^{t_j} K(z) f̃(t_j − z) dz` at every node, `f̃` the cubic interpolant.
fn grid_convolution(kernel: &OperatorKernel, f: &SampledFunction) -> Result<Vec<f64>> {
    let n = f.intervals();
    let v = f.values();
    let mu = cell_moments(kernel, f.dt(), n)?;
    let mut out = vec![0.0; n + 1];
    for (j, o) in out.iter_mut().enumerate().skip(1) {
        let mut s = 0.0;
        for (i, cell) in mu[..j].iter().enumerate() {
            let (sigma, first) = stencil(j - i - 1, n);
            let c = &cell[sigma];
            s += c[0] * v[first] + c[1] * v[first + 1] + c[2] * v[first + 2] + c[3] * v[first + 3];
        }
        *o = s;
    }
    Ok(out)
}

/// Solve one mode on the grid of `f_k`.
pub fn solve_mode(op: &TimeOperator, k: usize, gamma: f64, f_k: &SampledFunction, m: f64, t_end: f64) -> Result<Mode> {
    solve_mode_with(op, k, gamma, f_k, m, t_end, MARGIN_TOL, Response::default())
}

#[allow(clippy::too_many_arguments)]
pub fn solve_mode_with(
    op: &TimeOperator,
    k: usize,
    gamma: f64,
    f_k: &SampledFunction,
    m: f64,
    t_end: f64,
    margin_tol: f64,
    response: Response,
) -> Result<Mode> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain("solve_mode", format!("gamma = {gamma} must be positive")));
    }
    if (f_k.t_end() - t_end).abs() > 1e-12 * t_end {
        return Err(Error::domain("solve_mode", format!("f_k spans [0, {}], T = {t_end}", f_k.t_end())));
    }
    let g2 = gamma * gamma;
    let n = f_k.intervals();
    let alpha = op.alpha();

    let u0 = response.eval(op, g2, t_end)?;
    let mg = margin(m, u0);
    if !(mg > margin_tol) {
        return Err(Error::Resonance { modes: vec![ResonantMode { k, margin: mg, forbidden_m: forbidden(u0) }] });
    }

    let resp_kernel = OperatorKernel::new(op, g2, response.offset(alpha), t_end)?;
    let mut resp: Vec<f64> = (0..=n)
        .map(|j| match response {
            Response::Caputo if j > 0 => 1.0 - g2 * resp_kernel.eval_weighted(f_k.t(j)),
            Response::Caputo => 1.0,
            Response::SingleMl => resp_kernel.eval(f_k.t(j)),
        })
        .collect();
    resp[n] = u0;

    let forced = if f_k.max_abs() == 0.0 {
        vec![0.0; n + 1]
    } else {
        let kernel = OperatorKernel::new(op, g2, alpha, t_end)?;
        grid_convolution(&kernel, f_k)?
    };
    let amplitude = -m * forced[n] / (1.0 + m * u0);
    let u_k: Vec<f64> = forced.iter().zip(&resp).map(|(f, r)| f + amplitude * r).collect();
    if u_k.iter().any(|v| !v.is_finite()) {
        return Err(Error::Internal(format!("mode {k} produced non-finite values")));
    }
    Ok(Mode {
        k,
        gamma,
        f_k: f_k.clone(),
        forced: SampledFunction::new(t_end, forced)?,
        response: SampledFunction::new(t_end, resp)?,
        u0_at_t: u0,
        amplitude,
        u_k: SampledFunction::new(t_end, u_k)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeResidual {
    pub k: usize,
    pub observed: f64,
    /// Grid index where the maximum sits.
    pub worst_node: usize,
    pub tol: f64,
    pub passed: bool,
}

/// `(L U_k + γ_k² U_k − f_k)(t_j) / (max|f_k| + γ_k² max|U_k|)` at the interior
/// nodes `j = 1..N−1` (entry `j − 1`). `L` is the finite-difference operator
/// of [`apply_l`].
pub fn mode_residual_profile(op: &TimeOperator, mode: &Mode) -> Result<Vec<f64>> {
    let n = mode.u_k.intervals();
    let lu = apply_l(op, &mode.u_k)?;
    let g2 = mode.gamma * mode.gamma;
    let norm = mode.f_k.max_abs() + g2 * mode.u_k.max_abs();
    let u = mode.u_k.values();
    let f = mode.f_k.values();
    Ok((1..n).map(|j| if norm == 0.0 { 0.0 } else { (lu.values()[j] + g2 * u[j] - f[j]) / norm }).collect())
}

/// Largest entry of [`mode_residual_profile`] in magnitude. Grids coarser
/// than [`MIN_VERIFY_INTERVALS`] report NaN.
///
/// For orders below 2 the solution behaves like `t^α` (and `t^{α−α_i}`) at
/// the origin, where the L1 scheme has a relative error that does not shrink
/// with the step; the maximum then sits at the first nodes.
pub fn verify_mode(op: &TimeOperator, mode: &Mode, tol: f64) -> ModeResidual {
    let report = |observed: f64, worst_node: usize| ModeResidual {
        k: mode.k,
        observed,
        worst_node,
        tol,
        passed: observed <= tol,
    };
    if mode.u_k.intervals() < MIN_VERIFY_INTERVALS {
        return report(f64::NAN, 0);
    }
    match mode_residual_profile(op, mode) {
        Ok(r) => {
            let (j, v) = r
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bj, bv), (j, v)| if v.abs() > bv { (j, v.abs()) } else { (bj, bv) });
            report(v, j + 1)
        }
        Err(_) => report(f64::NAN, 0),
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Worker threads for the mode loop; results do not depend on it.
    pub threads: usize,
    pub margin_tol: f64,
    pub response: Response,
    pub verify_modes: bool,
    pub mode_residual_tol: f64,
    pub pde_probe: bool,
    /// Nodes of the x grid used by the probe's `B_ν`.
    pub probe_x_nodes: usize,
    pub pde_residual_tol: f64,
    /// Relative tolerances for the nonlocal and boundary defects.
    pub nonlocal_tol: f64,
    pub boundary_tol: f64,
    /// Tail estimate above this fraction of `max|u|` raises a warning.
    pub tail_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            threads: 1,
            margin_tol: MARGIN_TOL,
            response: Response::default(),
            verify_modes: true,
            mode_residual_tol: 1e-2,
            pde_probe: true,
            probe_x_nodes: 512,
            pde_residual_tol: 5e-2,
            nonlocal_tol: 1e-8,
            boundary_tol: 1e-10,
            tail_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual {
    /// `max |L u − B_ν u − f|` over the probes.
    pub max_abs: f64,
    /// `max(|L u|, |B_ν u|, |f|)` over the probes.
    pub scale: f64,
    pub observed: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailIndicator {
    /// `max_t |U_K| γ_K^{3/2}`.
    pub last_mode: f64,
    /// `max_{K/2 ≤ k ≤ K} max_t |U_k| γ_k^{3/2}`.
    pub constant: f64,
    pub decay_exponent: f64,
    /// Slope of `log max_t|U_k|` against `log γ_k` over `k ≥ 5`, when there
    /// are enough active modes.
    pub fitted_exponent: Option<f64>,
    /// `constant · Σ_{k > K} γ_k^{-3/2}`.
    pub estimate: f64,
    pub threshold: f64,
    pub warn: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityCheck {
    /// `max_x |u_t(0, x)|` by second-order one-sided differences with step `Δt`.
    pub fine: f64,
    /// The same with step `2Δt`.
    pub coarse: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDiagnostics {
    pub max_abs_u: f64,
    /// `max_x |u(0, x) + M u(T, x)|`.
    pub nonlocal_defect: f64,
    /// `max_t |u(t, 1)|`.
    pub boundary_defect: f64,
    /// `(x, max_t |x u_x(t, x)|)`.
    pub flux_defect: Vec<(f64, f64)>,
    pub pde_residual: Option<PdeResidual>,
    pub tail: TailIndicator,
    /// Present when `α > 1`.
    pub initial_velocity: Option<VelocityCheck>,
    pub nonlocal_tol: f64,
    pub boundary_tol: f64,
}

impl FieldDiagnostics {
    pub fn nonlocal_passed(&self) -> bool {
        self.nonlocal_defect <= self.nonlocal_tol * self.max_abs_u
    }

    pub fn boundary_passed(&self) -> bool {
        self.boundary_defect <= self.boundary_tol * self.max_abs_u
    }
}

#[derive(Debug, Clone)]
pub struct SolutionGrid {
    pub nu: BesselOrder,
    pub m: f64,
    pub t_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// `u(t_j, x_i)` at `j * x_grid.len() + i`.
    pub values: Vec<f64>,
    pub modes: Vec<Mode>,
    pub margins: NonresonanceReport,
    pub mode_residuals: Vec<ModeResidual>,
    pub diagnostics: FieldDiagnostics,
    pub warnings: Vec<String>,
}

impl SolutionGrid {
    pub fn value(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.x_grid.len() + i]
    }

    /// `u(t_j, x)` at any `x ∈ [MIN_RECONSTRUCT_X, 1]`.
    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        let mut s = NeumaierSum::new();
        for mode in &self.modes {
            s.add(mode.u_k.values()[j] * bessel_j(self.nu, mode.gamma * x)?);
        }
        Ok(s.value())
    }

    /// Every enabled check passed; the tail warning does not count.
    pub fn checks_passed(&self) -> bool {
        let d = &self.diagnostics;
        self.mode_residuals.iter().all(|r| r.passed)
            && d.nonlocal_passed()
            && d.boundary_passed()
            && d.pde_residual.as_ref().is_none_or(|p| p.passed)
            && d.initial_velocity.as_ref().is_none_or(|v| v.passed)
    }
}

/// Solve and evaluate with default options.
pub fn assemble(spec: &ProblemSpec) -> Result<SolutionGrid> {
    assemble_with(spec, &SolveOptions::default())
}

pub fn assemble_with(spec: &ProblemSpec, opts: &SolveOptions) -> Result<SolutionGrid> {
    spec.validate()?;
    let zeros = bessel_zeros(spec.nu, spec.modes)?;
    let gamma_max = zeros.gamma(spec.modes);
    if gamma_max > MAX_GAMMA {
        return Err(Error::InvalidProblem(format!("gamma_K = {gamma_max:.3} exceeds {MAX_GAMMA}; use fewer modes")));
    }
    let margins = nonresonance_check_with(&spec.op, spec.m, spec.t_end, &zeros, opts.margin_tol, opts.response)?;
    let coeffs = fb_expand(&spec.source, spec.nu, &zeros, spec.t_end, spec.t_intervals)?;

    let solve = |k: usize| -> Result<(Mode, Option<ModeResidual>)> {
        let mode = solve_mode_with(
            &spec.op,
            k,
            zeros.gamma(k),
            coeffs.mode(k),
            spec.m,
            spec.t_end,
            opts.margin_tol,
            opts.response,
        )?;
        let residual = (opts.verify_modes && mode.u_k.intervals() >= MIN_VERIFY_INTERVALS)
            .then(|| verify_mode(&spec.op, &mode, opts.mode_residual_tol));
        Ok((mode, residual))
    };
    let results = run_modes(spec.modes, opts.threads.max(1), &solve);
    let mut modes = Vec::with_capacity(spec.modes);
    let mut mode_residuals = Vec::new();
    for r in results {
        let (mode, residual) = r?;
        modes.push(mode);
        mode_residuals.extend(residual);
    }

    let t_grid = spec.t_grid();
    let nx = spec.x_grid.len();
    let basis = bessel_rows(spec.nu, &modes, &spec.x_grid)?;
    let mut values = vec![0.0; t_grid.len() * nx];
    for (j, row) in values.chunks_mut(nx).enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            let mut s = NeumaierSum::new();
            for (mode, b) in modes.iter().zip(&basis) {
                s.add(mode.u_k.values()[j] * b[i]);
            }
            *v = s.value();
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Internal("assembled field is not finite".into()));
    }

    let mut grid = SolutionGrid {
        nu: spec.nu,
        m: spec.m,
        t_grid,
        x_grid: spec.x_grid.clone(),
        values,
        modes,
        margins,
        mode_residuals,
        diagnostics: FieldDiagnostics {
            max_abs_u: 0.0,
            nonlocal_defect: 0.0,
            boundary_defect: 0.0,
            flux_defect: Vec::new(),
            pde_residual: None,
            tail: TailIndicator {
                last_mode: 0.0,
                constant: 0.0,
                decay_exponent: DECAY_EXPONENT,
                fitted_exponent: None,
                estimate: 0.0,
                threshold: 0.0,
                warn: false,
            },
            initial_velocity: None,
            nonlocal_tol: opts.nonlocal_tol,
            boundary_tol: opts.boundary_tol,
        },
        warnings: Vec::new(),
    };
    grid.diagnostics = diagnose(spec, opts, &grid)?;
    if grid.diagnostics.tail.warn {
        grid.warnings.push(format!(
            "truncation: tail estimate {:.3e} exceeds {:.1e} max|u|",
            grid.diagnostics.tail.estimate, opts.tail_tol
        ));
    }
    if !spec.source.is_theorem_compliant() {
        grid.warnings
            .push("source not flagged as meeting the endpoint conditions; decay rates are not guaranteed".into());
    }
    Ok(grid)
}

/// Mode results in ascending `k`, whatever the thread count.
fn run_modes<T: Send>(count: usize, threads: usize, solve: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
    if threads <= 1 || count <= 1 {
        return (1..=count).map(solve).collect();
    }
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..threads.min(count))
            .map(|w| {
                scope.spawn(move || (1..=count).skip(w).step_by(threads).map(|k| (k, solve(k))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("mode worker panicked") {
                slots[k - 1] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every mode solved")).collect()
}

/// `J_ν(γ_k x_i)` per mode.
fn bessel_rows(nu: BesselOrder, modes: &[Mode], x: &[f64]) -> Result<Vec<Vec<f64>>> {
    modes.iter().map(|m| x.iter().map(|&xi| bessel_j(nu, m.gamma * xi)).collect()).collect()
}

/// `Σ_k U_k(t_j) φ_k` for all `j`.
fn time_series(modes: &[Mode], phi: &[f64]) -> Vec<f64> {
    let n = modes.first().map_or(0, |m| m.u_k.values().len());
    (0..n)
        .map(|j| {
            let mut s = NeumaierSum::new();
            for (mode, p) in modes.iter().zip(phi) {
                s.add(mode.u_k.values()[j] * p);
            }
            s.value()
        })
        .collect()
}

fn diagnose(spec: &ProblemSpec, opts: &SolveOptions, grid: &SolutionGrid) -> Result<FieldDiagnostics> {
    let modes = &grid.modes;
    let nx = grid.x_grid.len();
    let nt = grid.t_grid.len();
    let max_abs_u = grid.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let last = nt - 1;
    let nonlocal_defect = (0..nx).map(|i| (grid.value(0, i) + spec.m * grid.value(last, i)).abs()).fold(0.0, f64::max);

    let at = |x: f64| -> Result<Vec<f64>> {
        let phi: Vec<f64> = modes.iter().map(|m| bessel_j(spec.nu, m.gamma * x)).collect::<Result<_>>()?;
        Ok(time_series(modes, &phi))
    };
    let boundary_defect = at(1.0)?.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let mut flux_defect = Vec::with_capacity(FLUX_X.len());
    for &x in &FLUX_X {
        let d = 1e-3 * x;
        let (up, dn) = (at(x + d)?, at(x - d)?);
        let worst = up.iter().zip(&dn).map(|(a, b)| (x * (a - b) / (2.0 * d)).abs()).fold(0.0, f64::max);
        flux_defect.push((x, worst));
    }

    let pde_residual = if opts.pde_probe { Some(pde_probe(spec, opts, modes)?) } else { None };
    let tail = tail_indicator(spec, modes, max_abs_u, opts.tail_tol);

    let initial_velocity = (spec.op.alpha() > 1.0 && nt > 4).then(|| {
        let dt = grid.t_grid[1];
        let mut fine = 0.0f64;
        let mut coarse = 0.0f64;
        for i in 0..nx {
            let u = |j: usize| grid.value(j, i);
            fine = fine.max(((-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * dt)).abs());
            coarse = coarse.max(((-3.0 * u(0) + 4.0 * u(2) - u(4)) / (4.0 * dt)).abs());
        }
        let floor = 1e-10 * max_abs_u / spec.t_end;
        VelocityCheck { fine, coarse, passed: fine <= floor || fine < coarse }
    });

    Ok(FieldDiagnostics {
        max_abs_u,
        nonlocal_defect,
        boundary_defect,
        flux_defect,
        pde_residual,
        tail,
        initial_velocity,
        nonlocal_tol: opts.nonlocal_tol,
        boundary_tol: opts.boundary_tol,
    })
}

/// `|L u − B_ν u − f|` on an 8 × 8 interior grid. `L` acts on full time
/// series at fixed `x`, `B_ν` on uniform x profiles at fixed `t`.
fn pde_probe(spec: &ProblemSpec, opts: &SolveOptions, modes: &[Mode]) -> Result<PdeResidual> {
    let nodes = opts.probe_x_nodes.max(crate::fractional::MIN_X_NODES);
    let xs: Vec<f64> = (0..nodes).map(|i| PROBE_X_MIN + (1.0 - PROBE_X_MIN) * i as f64 / (nodes - 1) as f64).collect();
    let xi: Vec<usize> = (0..PROBES)
        .map(|p| {
            let x = 0.1 + 0.8 * p as f64 / (PROBES - 1) as f64;
            ((x - PROBE_X_MIN) / (1.0 - PROBE_X_MIN) * (nodes - 1) as f64).round() as usize
        })
        .collect();
    let n = spec.t_intervals;
    let tj: Vec<usize> = (0..PROBES).map(|p| ((p + 1) * n) / (PROBES + 1)).collect();
    let basis = bessel_rows(spec.nu, modes, &xs)?;
    let dt = spec.t_end / n as f64;

    let mut lu = vec![vec![0.0; PROBES]; PROBES];
    for (a, &i) in xi.iter().enumerate() {
        let phi: Vec<f64> = basis.iter().map(|b| b[i]).collect();
        let series = SampledFunction::new(spec.t_end, time_series(modes, &phi))?;
        let l = apply_l(&spec.op, &series)?;
        for (b, &j) in tj.iter().enumerate() {
            lu[a][b] = l.values()[j];
        }
    }
    let mut max_abs = 0.0f64;
    let mut scale = 0.0f64;
    for (b, &j) in tj.iter().enumerate() {
        let profile: Vec<f64> = (0..nodes)
            .map(|i| {
                let mut s = NeumaierSum::new();
                for (mode, row) in modes.iter().zip(&basis) {
                    s.add(mode.u_k.values()[j] * row[i]);
                }
                s.value()
            })
            .collect();
        let bu = apply_bessel(&XProfile { x_min: PROBE_X_MIN, x_max: 1.0, values: profile }, spec.nu)?;
        let t = j as f64 * dt;
        for (a, &i) in xi.iter().enumerate() {
            let f = spec.source.eval(t, xs[i]);
            let (l, bv) = (lu[a][b], bu.values[i]);
            max_abs = max_abs.max((l - bv - f).abs());
            scale = scale.max(l.abs()).max(bv.abs()).max(f.abs());
        }
    }
    let observed = if scale > 0.0 { max_abs / scale } else { 0.0 };
    Ok(PdeResidual { max_abs, scale, observed, tol: opts.pde_residual_tol, passed: observed <= opts.pde_residual_tol })
}

/// Sum of `γ_k^{-p}` over `k > K`, with zeros from McMahon's leading term and
/// the remainder past `10⁴` terms by an integral.
fn tail_sum(nu: f64, k: usize, p: f64) -> f64 {
    let z = |j: usize| (j as f64 + 0.5 * nu - 0.25) * std::f64::consts::PI;
    let stop = k + 10_000;
    let head: f64 = (k + 1..=stop).map(|j| z(j).powf(-p)).sum();
    head + z(stop).powf(1.0 - p) / (std::f64::consts::PI * (p - 1.0))
}

fn tail_indicator(spec: &ProblemSpec, modes: &[Mode], max_abs_u: f64, tail_tol: f64) -> TailIndicator {
    let weighted = |m: &Mode| m.max_abs() * m.gamma.powf(DECAY_EXPONENT);
    let big_k = modes.len();
    let last_mode = modes.last().map_or(0.0, weighted);
    let constant = modes[(big_k / 2).saturating_sub(1)..].iter().map(weighted).fold(0.0, f64::max);
    let active: Vec<&Mode> = modes.iter().filter(|m| m.k >= 5 && m.max_abs() > 0.0).collect();
    let fitted_exponent = (active.len() >= 4).then(|| {
        let g: Vec<f64> = active.iter().map(|m| m.gamma).collect();
        let u: Vec<f64> = active.iter().map(|m| m.max_abs()).collect();
        loglog_slope(&g, &u)
    });
    let estimate = constant * tail_sum(spec.nu.value(), big_k, DECAY_EXPONENT);
    let threshold = tail_tol * max_abs_u;
    TailIndicator {
        last_mode,
        constant,
        decay_exponent: DECAY_EXPONENT,
        fitted_exponent,
        estimate,
        threshold,
        warn: estimate > threshold,
    }
}

#[cfg(test)]
mod tests;
