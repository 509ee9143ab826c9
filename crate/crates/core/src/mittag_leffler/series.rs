//! `E_{(a),b}(c_1 t^{a_1}, …, c_m t^{a_m})` as a generalized power series in
//! `t`, for repeated evaluation on `[0, t_max]`.
//!
//! Terms sharing a power of `t` are merged. Each merged term is stored as
//! `w (t/t_max)^P`, so `|w|` is its magnitude at the right end.

use std::collections::BTreeMap;

use super::walker::{ln_add, Walker};
use super::{MLParams, MAX_LAYERS, MAX_TERMS, OVERFLOW_LN};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::specfun::ln_gamma_unchecked;

/// Default bound on `Σ|terms| / max(|E|, 1/Γ(b))` at `t_max`.
pub const DEFAULT_AMPLIFICATION_LIMIT: f64 = 1e10;

#[derive(Debug, Clone)]
pub struct MlSeries {
    t_max: f64,
    offset: f64,
    /// `(P, w)` sorted by `P`.
    terms: Vec<(f64, f64)>,
    amplification: f64,
    value_at_max: f64,
}

/// Reason given when the walk exceeds the caller's term budget.
pub const BUDGET_REASON: &str = "term budget exhausted";

/// Subtrees this far (in nats) below the peak term are dropped.
const PRUNE_DEPTH: f64 = 48.0;

fn power_key(p: f64) -> i64 {
    (p * 1e9).round() as i64
}

impl MlSeries {
    /// Build the series for exponents `a_i`, coefficients `c_i`, offset `b`.
    ///
    /// Fails with [`Error::MlNonConvergence`] when the sum at `t_max` would
    /// lose more than `amplification_limit` in relative accuracy, or when the
    /// walk visits more than `max_terms` terms.
    pub fn new(
        exponents: &[f64],
        coeffs: &[f64],
        offset: f64,
        t_max: f64,
        tol: f64,
        amplification_limit: f64,
        max_terms: u64,
    ) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::domain("MlSeries", format!("t_max = {t_max} must be positive")));
        }
        let args: Vec<f64> = exponents.iter().zip(coeffs).map(|(&a, &c)| c * t_max.powf(a)).collect();
        let p = MLParams::new(exponents.to_vec(), offset, args)?;
        let mut walker = Walker::new(&p);
        let mut merged: BTreeMap<i64, (f64, NeumaierSum)> = BTreeMap::new();
        let mut total = NeumaierSum::new();
        let mut abs_sum = 0.0;
        let mut pruned_total = f64::NEG_INFINITY;
        let mut peak_ln = f64::NEG_INFINITY;
        let mut quiet = 0;
        let mut terms: u64 = 0;
        let mut last_mag = 0.0;
        let mut converged = false;
        for k in 0..MAX_LAYERS {
            let mut layer_mag = 0.0;
            let mut overflow = false;
            let pruned = walker.layer(k, peak_ln - PRUNE_DEPTH, &mut |parts, t| {
                terms += 1;
                if t.ln > OVERFLOW_LN {
                    overflow = true;
                    return;
                }
                peak_ln = peak_ln.max(t.ln);
                let v = t.ln.exp();
                let w = if t.negative { -v } else { v };
                let power: f64 = parts.iter().zip(exponents).map(|(&l, &a)| l as f64 * a).sum();
                let entry = merged.entry(power_key(power)).or_insert((power, NeumaierSum::new()));
                entry.1.add(w);
                total.add(w);
                layer_mag += v;
            });
            pruned_total = ln_add(pruned_total, pruned);
            if terms > max_terms.min(MAX_TERMS) && !overflow {
                return Err(Error::MlNonConvergence { layers: k + 1, last_layer: layer_mag, reason: BUDGET_REASON });
            }
            if overflow {
                return Err(Error::MlNonConvergence {
                    layers: k + 1,
                    last_layer: layer_mag,
                    reason: "series terms too large for double precision",
                });
            }
            let layer_mag = layer_mag + pruned.exp();
            abs_sum += layer_mag;
            last_mag = layer_mag;
            if k > 0 && layer_mag <= tol * total.value().abs() {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet == 3 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::MlNonConvergence {
                layers: MAX_LAYERS,
                last_layer: last_mag,
                reason: "layer cap reached",
            });
        }
        let value_at_max = total.value();
        let floor = value_at_max.abs().max((-ln_gamma_unchecked(offset)).exp());
        let amplification = (abs_sum + pruned_total.exp()) / floor;
        if amplification > amplification_limit {
            return Err(Error::MlNonConvergence {
                layers: 0,
                last_layer: abs_sum,
                reason: "cancellation at the right end exceeds the amplification limit",
            });
        }
        let cut = floor * f64::EPSILON * 1e-4;
        let terms =
            merged.into_values().map(|(power, s)| (power, s.value())).filter(|&(_, w)| w.abs() >= cut).collect();
        Ok(MlSeries { t_max, offset, terms, amplification, value_at_max })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `(P, w)` pairs: the function is `Σ w (t/t_max)^P`.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn amplification(&self) -> f64 {
        self.amplification
    }

    pub fn value_at_max(&self) -> f64 {
        self.value_at_max
    }

    /// Value at `t ∈ [0, t_max]`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.terms.iter().filter(|(p, _)| *p == 0.0).map(|(_, w)| w).sum();
        }
        let lr = (t / self.t_max).ln();
        let mut s = NeumaierSum::new();
        for &(p, w) in &self.terms {
            s.add(w * (p * lr).exp());
        }
        s.value()
    }
}
