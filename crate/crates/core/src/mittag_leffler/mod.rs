//! Multinomial Mittag-Leffler function
//!
//! `E_{(a_1..a_m),b}(z_1..z_m) = Σ_k Σ_{l_1+…+l_m=k} k!/(l_1!…l_m!) Π z_i^{l_i} / Γ(b + Σ a_i l_i)`
//!
//! The series is summed by total degree `k`. A double-precision pass in
//! log space runs first and measures the cancellation; when the largest
//! term dwarfs the result, the sum is redone in MPFR arithmetic at a
//! precision that covers the lost bits.

mod compositions;
mod kernel;
mod laplace;
mod mp;
mod series;
mod walker;

pub use compositions::{count as composition_count, Compositions};
pub use kernel::OperatorKernel;
pub use mp::MAX_PRECISION_BITS;
pub use series::{MlSeries, DEFAULT_AMPLIFICATION_LIMIT};

use crate::error::{Error, Result};
use crate::fractional::TimeOperator;
use crate::numeric::NeumaierSum;
use crate::specfun::ln_gamma_unchecked;
use walker::{ln_add, Walker};

/// Default relative truncation tolerance.
pub const DEFAULT_TOL: f64 = 1e-14;
/// Smallest accepted tolerance.
pub const MIN_TOL: f64 = 1e-15;
/// Hard cap on the number of degree layers.
pub const MAX_LAYERS: usize = 100_000;
/// Hard cap on the number of terms and subtree bounds visited in one pass.
pub const MAX_TERMS: u64 = 2_000_000;
/// Budget for the estimated extended-precision work of one evaluation.
pub const MP_BUDGET_SECONDS: f64 = 1.0;

/// Parameters `(a_1..a_m; b; z_1..z_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MLParams {
    pub(crate) exponents: Vec<f64>,
    pub(crate) offset: f64,
    pub(crate) args: Vec<f64>,
}

impl MLParams {
    pub fn new(exponents: Vec<f64>, offset: f64, args: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::domain("ml_multinomial", "at least one argument is required"));
        }
        if exponents.len() != args.len() {
            return Err(Error::domain(
                "ml_multinomial",
                format!("{} exponents but {} arguments", exponents.len(), args.len()),
            ));
        }
        if let Some(a) = exponents.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::domain("ml_multinomial", format!("exponent {a} must be positive")));
        }
        if !(offset.is_finite() && offset > 0.0) {
            return Err(Error::domain("ml_multinomial", format!("offset {offset} must be positive")));
        }
        if let Some(z) = args.iter().find(|z| !z.is_finite()) {
            return Err(Error::domain("ml_multinomial", format!("argument {z} is not finite")));
        }
        Ok(MLParams { exponents, offset, args })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn args(&self) -> &[f64] {
        &self.args
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }
}

/// A summed value with truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLValue {
    pub value: f64,
    pub layers_used: usize,
    /// Estimated discarded remainder relative to `|value|`.
    pub tail_estimate: f64,
    /// Working precision of the pass that produced `value` (53 for double).
    pub precision_bits: u32,
    /// `Σ|terms| / |value|`.
    pub condition: f64,
}

fn check_tol(func: &'static str, tol: f64) -> Result<()> {
    if tol.is_finite() && (MIN_TOL..1.0).contains(&tol) {
        Ok(())
    } else {
        Err(Error::domain(func, format!("tolerance {tol} must lie in [{MIN_TOL}, 1)")))
    }
}

fn bits_for(tol: f64) -> u32 {
    (-tol.log2()).ceil() as u32 + 8
}

pub(crate) const OVERFLOW_LN: f64 = 700.0;
/// Subtrees this far (in nats) below the running peak are skipped in
/// double precision; they sit under the rounding of the peak term.
const DOUBLE_CUT_DEPTH: f64 = 45.0;

/// Result of the double-precision probe.
struct Probe {
    value: f64,
    layers: usize,
    tail: f64,
    peak_ln: f64,
    condition: f64,
    error_estimate: f64,
    /// Terms too large for doubles were met; only `peak_ln` and `layers`
    /// are meaningful.
    overflowed: bool,
}

fn probe(p: &MLParams, tol: f64, budget: f64) -> Result<Probe> {
    let mut walker = Walker::new(p);
    let mut sum = NeumaierSum::new();
    let mut abs_sum = 0.0;
    let mut pruned_total = f64::NEG_INFINITY;
    let mut peak_ln = f64::NEG_INFINITY;
    let mut max_scale: f64 = 0.0;
    let mut quiet = 0;
    let mut leaves: u64 = 0;
    let mut prev_mag = 0.0;
    let lattice = mp::detect_lattice(&p.exponents).is_some();
    let mut overflowed = false;
    // Once terms overflow, keep going until they are negligible in absolute
    // terms so the layer count covers the extended-precision pass.
    let negligible_ln = tol.ln() - 40.0;
    for k in 0..MAX_LAYERS {
        let mut layer = NeumaierSum::new();
        let mut layer_mag = 0.0;
        let mut layer_peak = f64::NEG_INFINITY;
        let cut = peak_ln - DOUBLE_CUT_DEPTH;
        let pruned = walker.layer(k, cut, &mut |_, t| {
            leaves += 1;
            layer_peak = layer_peak.max(t.ln);
            if t.ln > OVERFLOW_LN {
                overflowed = true;
                return;
            }
            let v = t.ln.exp();
            layer.add(if t.negative { -v } else { v });
            layer_mag += v;
            max_scale = max_scale.max(t.scale);
        });
        peak_ln = peak_ln.max(layer_peak);
        pruned_total = ln_add(pruned_total, pruned);
        if walker.nodes > MAX_TERMS {
            return Err(Error::MlNonConvergence {
                layers: k + 1,
                last_layer: layer_mag,
                reason: "term budget exhausted",
            });
        }
        if overflowed {
            let top = layer_peak.max(pruned);
            if top < peak_ln - 60.0 {
                // Past the peak: the working precision is known, and the
                // terms seen so far already bound the extended-precision work.
                let bits = peak_ln / std::f64::consts::LN_2 + (bits_for(tol) + 96) as f64;
                if bits > MAX_PRECISION_BITS as f64 {
                    return Err(Error::MlNonConvergence {
                        layers: k + 1,
                        last_layer: layer_peak.exp(),
                        reason: "required working precision exceeds the cap",
                    });
                }
                if !lattice && leaves as f64 * mp_gamma_cost_us(bits as u32) * 1e-6 > budget {
                    return Err(budget_error(k + 1, peak_ln));
                }
            }
            if top < negligible_ln && top < peak_ln - 60.0 {
                return Ok(Probe {
                    value: f64::NAN,
                    layers: k + 1,
                    tail: f64::INFINITY,
                    peak_ln,
                    condition: f64::INFINITY,
                    error_estimate: f64::INFINITY,
                    overflowed,
                });
            }
            continue;
        }
        sum.add(layer.value());
        abs_sum += layer_mag;
        let layer_bound = layer_mag + pruned.exp();
        let partial = sum.value().abs();
        if k > 0 && layer_bound <= tol * partial {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet == 3 {
            let value = sum.value();
            let ratio = if prev_mag > 0.0 { layer_bound / prev_mag } else { 0.0 };
            let tail =
                if value != 0.0 { layer_bound / value.abs() * (ratio / (1.0 - ratio)).clamp(0.0, 1.0) } else { 0.0 };
            let condition = abs_sum / value.abs();
            let error_estimate = condition * (max_scale + 8.0) * 2.0 * f64::EPSILON + pruned_total.exp() / value.abs();
            return Ok(Probe { value, layers: k + 1, tail, peak_ln, condition, error_estimate, overflowed });
        }
        prev_mag = layer_bound;
    }
    Err(Error::MlNonConvergence { layers: MAX_LAYERS, last_layer: prev_mag, reason: "layer cap reached" })
}

/// Rough MPFR timings in microseconds, used only to refuse hopeless sums
/// before starting them.
fn mp_gamma_cost_us(bits: u32) -> f64 {
    let b = bits as f64 / 128.0;
    11.5 * b.powf(if bits <= 1024 { 1.15 } else { 1.9 })
}

fn mp_mul_cost_us(bits: u32) -> f64 {
    0.05 * (bits as f64 / 128.0).powf(1.3)
}

/// Seconds of extended-precision work for a pass at `bits`, from a
/// counting walk with the cutoff that pass will use.
fn mp_cost_estimate(p: &MLParams, peak_ln: f64, layers: usize, bits: u32) -> Result<f64> {
    let cut = peak_ln - mp::cut_depth(bits);
    let mut walker = Walker::new(p);
    let mut kept: u64 = 0;
    let mut max_n: f64 = 0.0;
    let a_max = p.exponents.iter().fold(0.0f64, |a, &e| a.max(e));
    for k in 0..layers {
        let before = kept;
        walker.layer(k, cut, &mut |_, _| kept += 1);
        if kept > before {
            max_n = a_max * k as f64;
        }
        if kept > MAX_TERMS {
            return Ok(f64::INFINITY);
        }
    }
    let m = p.len() as f64;
    let kept = kept as f64;
    let us = match mp::detect_lattice(&p.exponents) {
        Some(l) => {
            let table = l.q as f64 * (max_n + 1.0);
            (3.0 * table + (m + 3.0) * kept) * mp_mul_cost_us(bits) + l.q as f64 * mp_gamma_cost_us(bits)
        }
        None => kept * (mp_gamma_cost_us(bits) + (m + 2.0) * mp_mul_cost_us(bits)),
    };
    Ok(us * 1e-6)
}

fn budget_error(layers: usize, peak_ln: f64) -> Error {
    Error::MlNonConvergence {
        layers,
        last_layer: peak_ln.exp(),
        reason: "cancellation needs more extended-precision work than the budget allows",
    }
}

/// Evaluate the multinomial Mittag-Leffler function.
///
/// `tol` is both the relative truncation tolerance and the target accuracy.
/// Fails with [`Error::MlNonConvergence`] when the layer, term, precision
/// or work budget is exhausted.
pub fn ml_multinomial(p: &MLParams, tol: f64) -> Result<MLValue> {
    check_tol("ml_multinomial", tol)?;
    ml_multinomial_budget(p, tol, MP_BUDGET_SECONDS)
}

fn ml_multinomial_budget(p: &MLParams, tol: f64, budget: f64) -> Result<MLValue> {
    if p.args.iter().all(|&z| z == 0.0) {
        return Ok(MLValue {
            value: (-ln_gamma_unchecked(p.offset)).exp(),
            layers_used: 1,
            tail_estimate: 0.0,
            precision_bits: 53,
            condition: 1.0,
        });
    }
    let pr = probe(p, tol, budget)?;
    if !pr.overflowed && pr.value != 0.0 && pr.error_estimate <= tol {
        return Ok(MLValue {
            value: pr.value,
            layers_used: pr.layers,
            tail_estimate: pr.tail,
            precision_bits: 53,
            condition: pr.condition,
        });
    }
    let needed = bits_for(tol);
    let guess_lost = if pr.overflowed || pr.value == 0.0 {
        pr.peak_ln / std::f64::consts::LN_2 + 64.0
    } else {
        (pr.peak_ln - pr.value.abs().ln()) / std::f64::consts::LN_2
    };
    let initial = (guess_lost.max(0.0) as u32).saturating_add(needed + 32);
    if initial > MAX_PRECISION_BITS {
        return Err(Error::MlNonConvergence {
            layers: pr.layers,
            last_layer: pr.peak_ln.exp(),
            reason: "required working precision exceeds the cap",
        });
    }
    if mp_cost_estimate(p, pr.peak_ln, pr.layers + 8, initial)? > budget {
        return Err(budget_error(pr.layers, pr.peak_ln));
    }
    let (out, bits) = mp::with_adaptive_precision(initial, needed, |prec| {
        mp::multinomial_sum(p, tol, prec, pr.peak_ln, MAX_LAYERS, MAX_TERMS)
    })?;
    Ok(MLValue {
        value: out.value,
        layers_used: out.layers,
        tail_estimate: out.tail,
        precision_bits: bits,
        condition: 2f64.powi(out.lost_bits.clamp(0, 1023) as i32),
    })
}

/// Classical `E_{a,b}(z) = Σ z^k / Γ(b + a k)`, summed by its own loop.
pub fn ml_two_param(a: f64, b: f64, z: f64, tol: f64) -> Result<f64> {
    check_tol("ml_two_param", tol)?;
    if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
        return Err(Error::domain("ml_two_param", format!("need a > 0 and b > 0, got a = {a}, b = {b}")));
    }
    if !z.is_finite() {
        return Err(Error::domain("ml_two_param", format!("argument {z} is not finite")));
    }
    if z == 0.0 {
        return Ok((-ln_gamma_unchecked(b)).exp());
    }
    let lz = z.abs().ln();
    let mut sum = NeumaierSum::new();
    let mut abs_sum = 0.0;
    let mut peak = f64::NEG_INFINITY;
    let mut worst_scale: f64 = 0.0;
    let mut quiet = 0;
    let mut overflow = false;
    let mut last = 0.0;
    let mut k = 0usize;
    let converged = loop {
        if k == MAX_LAYERS {
            break false;
        }
        let lg = ln_gamma_unchecked(b + a * k as f64);
        let ln = k as f64 * lz - lg;
        peak = peak.max(ln);
        if ln > OVERFLOW_LN {
            overflow = true;
        }
        if overflow {
            if ln < peak - 60.0 {
                break true;
            }
            k += 1;
            continue;
        }
        let mag = ln.exp();
        worst_scale = worst_scale.max((k as f64 * lz).abs() + lg.abs());
        sum.add(if z < 0.0 && k % 2 == 1 { -mag } else { mag });
        abs_sum += mag;
        last = mag;
        if k > 0 && mag <= tol * sum.value().abs() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet == 3 {
            break true;
        }
        k += 1;
    };
    if !converged {
        return Err(Error::MlNonConvergence { layers: MAX_LAYERS, last_layer: last, reason: "layer cap reached" });
    }
    let value = sum.value();
    if !overflow && value != 0.0 && abs_sum / value.abs() * (worst_scale + 8.0) * 2.0 * f64::EPSILON <= tol {
        return Ok(value);
    }
    let needed = bits_for(tol);
    let guess_lost = if overflow || value == 0.0 {
        peak / std::f64::consts::LN_2 + 64.0
    } else {
        (peak - value.abs().ln()) / std::f64::consts::LN_2
    };
    let initial = (guess_lost.max(0.0) as u32).saturating_add(needed + 32);
    let bits = initial.min(MAX_PRECISION_BITS);
    // the lattice table costs q gamma calls once, then a few divisions per term
    let us = match mp::detect_lattice(&[a]) {
        Some(l) => {
            let steps = l.steps[0] as f64;
            k as f64 * (3.0 * steps + 3.0) * mp_mul_cost_us(bits) + l.q as f64 * mp_gamma_cost_us(bits)
        }
        None => k as f64 * mp_gamma_cost_us(bits),
    };
    if us * 1e-6 > MP_BUDGET_SECONDS {
        return Err(budget_error(k, peak));
    }
    let (out, _) =
        mp::with_adaptive_precision(initial, needed, |prec| mp::two_param_sum(a, b, z, tol, prec, MAX_LAYERS))?;
    Ok(out.value)
}

fn operator_params(op: &TimeOperator, gamma_sq: f64, t: f64, offset: f64) -> Result<MLParams> {
    let alpha = op.alpha();
    let mut exponents = Vec::with_capacity(op.terms().len() + 1);
    let mut args = Vec::with_capacity(op.terms().len() + 1);
    for (i, term) in op.terms().iter().enumerate() {
        let e = alpha - term.order;
        if !(e > 0.0) {
            return Err(Error::domain(
                "u0_bar",
                format!("term {}: exponent alpha - order = {e} must be positive", i + 1),
            ));
        }
        exponents.push(e);
        args.push(term.lambda * t.powf(e));
    }
    exponents.push(alpha);
    args.push(-gamma_sq * t.powf(alpha));
    MLParams::new(exponents, offset, args)
}

fn check_mode_args(func: &'static str, gamma_sq: f64, t: f64) -> Result<()> {
    if !(gamma_sq.is_finite() && gamma_sq > 0.0) {
        return Err(Error::domain(func, format!("gamma^2 = {gamma_sq} must be positive")));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(func, format!("t = {t} must be nonnegative")));
    }
    Ok(())
}

/// Work budget for the extended-precision pass inside [`operator_ml`];
/// beyond it the value comes from Laplace inversion instead.
const OPERATOR_MP_BUDGET: f64 = 0.02;

/// `E_{(α−α_1,…,α−α_n,α),ρ}(λ_1 t^{α−α_1},…,λ_n t^{α−α_n},−γ² t^α)`.
///
/// Summed as a series when that is affordable. Otherwise, for `ρ ≤ α + 1`,
/// the value is recovered from its Laplace transform
/// `s^{α−ρ}/(s^α − Σ λ_i s^{α_i} + γ²)`; `layers_used` is then 0.
pub fn operator_ml(op: &TimeOperator, gamma_sq: f64, t: f64, rho: f64, tol: f64) -> Result<MLValue> {
    check_mode_args("operator_ml", gamma_sq, t)?;
    check_tol("operator_ml", tol)?;
    let p = operator_params(op, gamma_sq, t, rho)?;
    match ml_multinomial_budget(&p, tol, OPERATOR_MP_BUDGET) {
        Err(Error::MlNonConvergence { .. }) if t > 0.0 && rho <= op.alpha() + 1.0 => {
            let k = laplace::LaplaceKernel::new(op, gamma_sq, rho, t, t)?;
            let (v, scale) = k.eval_with_scale(t);
            let condition = scale / v.abs();
            Ok(MLValue {
                value: v / t.powf(rho - 1.0),
                layers_used: 0,
                tail_estimate: k.rel_error() * condition,
                precision_bits: 53,
                condition,
            })
        }
        other => other,
    }
}

/// `Ū_0(t) = E_{(α−α_1,…,α),1}(λ_1 t^{α−α_1},…,−γ² t^α)`.
///
/// With Caputo lower-order terms this solves `L U + γ² U = Σ λ_i t^{−α_i}/Γ(1−α_i)`,
/// so it is the unit-initial-value response only when every `λ_i` is 0.
/// See [`homogeneous_response`].
pub fn u0_bar(op: &TimeOperator, gamma_sq: f64, t: f64) -> Result<f64> {
    check_mode_args("u0_bar", gamma_sq, t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok(operator_ml(op, gamma_sq, t, 1.0, DEFAULT_TOL)?.value)
}

/// Solution of `L U + γ² U = 0`, `U(0) = 1`, `U'(0) = 0` with Caputo
/// derivatives throughout: `1 − γ² t^α E_{(α−α_1,…,α),1+α}(…)`.
pub fn homogeneous_response(op: &TimeOperator, gamma_sq: f64, t: f64) -> Result<f64> {
    check_mode_args("homogeneous_response", gamma_sq, t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let e = operator_ml(op, gamma_sq, t, 1.0 + op.alpha(), DEFAULT_TOL)?.value;
    Ok(1.0 - gamma_sq * t.powf(op.alpha()) * e)
}

#[cfg(test)]
mod tests;
