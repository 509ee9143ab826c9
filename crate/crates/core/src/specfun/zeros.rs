//! Positive zeros `γ_k` of `J_ν`.
//!
//! Each zero is seeded with McMahon's expansion around
//! `β = (k + ν/2 − 1/4)π`, then refined by Newton steps kept inside a sign
//! bracket of width π around the seed. When the bracket does not straddle
//! exactly one sign change, the interval after the previous zero is scanned
//! in steps of 1/4 instead (consecutive zeros are more than 2.4 apart).

use std::f64::consts::PI;

use super::bessel::{j_pair, BesselOrder};
use crate::error::{Error, Result};

/// Largest admissible `|J_ν(γ_k)|`.
pub const ZERO_TOL: f64 = 1e-12;

/// The first `K` positive zeros of `J_ν`, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselZeroTable {
    nu: BesselOrder,
    zeros: Vec<f64>,
}

impl BesselZeroTable {
    pub fn nu(&self) -> BesselOrder {
        self.nu
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// `γ_k` with 1-based `k`.
    pub fn gamma(&self, k: usize) -> f64 {
        self.zeros[k - 1]
    }

    /// Table restricted to the first `count` zeros.
    pub fn truncated(&self, count: usize) -> BesselZeroTable {
        BesselZeroTable { nu: self.nu, zeros: self.zeros[..count.min(self.zeros.len())].to_vec() }
    }
}

/// Leading term of the large-k asymptotic `kπ + νπ/2 − π/4`.
pub fn asymptotic_zero(nu: f64, k: usize) -> f64 {
    (k as f64 + 0.5 * nu - 0.25) * PI
}

fn mcmahon_seed(nu: f64, k: usize) -> f64 {
    let beta = asymptotic_zero(nu, k);
    let mu = 4.0 * nu * nu;
    let eb = 8.0 * beta;
    beta - (mu - 1.0) / eb - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * eb.powi(3))
}

/// First `count` positive zeros of `J_ν`.
pub fn bessel_zeros(nu: BesselOrder, count: usize) -> Result<BesselZeroTable> {
    if count == 0 {
        return Err(Error::domain("bessel_zeros", "count must be >= 1"));
    }
    let v = nu.value();
    let j = |x: f64| j_pair(v, x).0;
    let mut zeros: Vec<f64> = Vec::with_capacity(count);
    for k in 1..=count {
        // j_{ν,1} > ν, and later zeros sit more than 2.4 past their predecessor
        let floor = match zeros.last() {
            Some(&prev) => prev + 1.0,
            None => v.max(1e-3),
        };
        let seed = mcmahon_seed(v, k);
        let mut lo = (seed - 0.5 * PI).max(floor);
        let mut hi = (seed + 0.5 * PI).max(lo + 0.25);
        if j(lo) * j(hi) > 0.0 {
            (lo, hi) = scan_bracket(&j, floor).ok_or(Error::ZeroBracket { nu: v, index: k })?;
        }
        let root = refine(v, lo, hi);
        if j(root).abs() > ZERO_TOL {
            return Err(Error::ZeroBracket { nu: v, index: k });
        }
        zeros.push(root);
    }
    Ok(BesselZeroTable { nu, zeros })
}

fn scan_bracket(j: &impl Fn(f64) -> f64, from: f64) -> Option<(f64, f64)> {
    let step = 0.25;
    let mut a = from;
    let mut fa = j(a);
    for _ in 0..64 {
        let b = a + step;
        let fb = j(b);
        if fa == 0.0 {
            return Some((a, a));
        }
        if fa * fb <= 0.0 {
            return Some((a, b));
        }
        a = b;
        fa = fb;
    }
    None
}

/// Newton iteration safeguarded by bisection on `[lo, hi]`.
fn refine(nu: f64, mut lo: f64, mut hi: f64) -> f64 {
    let eval = |x: f64| {
        let (jv, jv1) = j_pair(nu, x);
        (jv, nu / x * jv - jv1)
    };
    let mut f_lo = eval(lo).0;
    if f_lo == 0.0 {
        return lo;
    }
    if lo == hi {
        return lo;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (f, df) = eval(x);
        if f == 0.0 {
            return x;
        }
        if f.signum() == f_lo.signum() {
            lo = x;
            f_lo = f;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if newton > lo && newton < hi && df != 0.0 { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}
