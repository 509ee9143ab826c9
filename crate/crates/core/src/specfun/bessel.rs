//! Bessel functions of the first kind `J_ν(z)` for real `ν ≥ 0`, `z ≥ 0`.
//!
//! Three evaluation regimes:
//!
//! * `z ≤ 8`: the defining power series, summed with Neumaier compensation.
//!   The largest term is below ~120 there, so cancellation costs at most two
//!   digits.
//! * `8 < z` below the asymptotic threshold: Miller's backward recurrence,
//!   normalised with `(z/2)^ν = Σ_k (ν+2k) Γ(ν+k)/k! · J_{ν+2k}(z)`.
//! * `z ≥ max(50, ν²)`: Hankel's large-argument expansion in amplitude–phase
//!   form, truncated at its smallest term.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::gamma::ln_gamma_unchecked;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;

/// Order `ν` of a Bessel function. Evaluation accepts `ν ≥ 0`; the problem
/// definition itself requires `ν > 0` (checked by the solver).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu >= 0.0 && nu.is_finite() {
            Ok(BesselOrder(nu))
        } else {
            Err(Error::domain("BesselOrder", format!("nu = {nu} must be finite and >= 0")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub(crate) const SERIES_MAX_Z: f64 = 8.0;
pub(crate) const ASYMPTOTIC_MIN_Z: f64 = 50.0;

/// `J_ν(z)`.
pub fn bessel_j(nu: BesselOrder, z: f64) -> Result<f64> {
    check_arg("bessel_j", z, false)?;
    Ok(j_pair(nu.0, z).0)
}

/// `J_ν′(z)` from `J_ν′ = (ν/z) J_ν − J_{ν+1}`.
pub fn bessel_j_d(nu: BesselOrder, z: f64) -> Result<f64> {
    check_arg("bessel_j_d", z, true)?;
    let (j, j1) = j_pair(nu.0, z);
    Ok(nu.0 / z * j - j1)
}

/// `J_ν″(z)`, obtained from the Bessel equation
/// `z² J″ + z J′ + (z² − ν²) J = 0`.
pub fn bessel_j_dd(nu: BesselOrder, z: f64) -> Result<f64> {
    check_arg("bessel_j_dd", z, true)?;
    let nu = nu.0;
    let (j, j1) = j_pair(nu, z);
    let jd = nu / z * j - j1;
    Ok(-jd / z - (1.0 - nu * nu / (z * z)) * j)
}

fn check_arg(func: &'static str, z: f64, strictly_positive: bool) -> Result<()> {
    let ok = if strictly_positive { z > 0.0 } else { z >= 0.0 };
    if ok && z.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("z = {z}")))
    }
}

/// `(J_ν(z), J_{ν+1}(z))` for `ν ≥ 0`, `z ≥ 0`; no argument checking.
pub(crate) fn j_pair(nu: f64, z: f64) -> (f64, f64) {
    if z == 0.0 {
        return (if nu == 0.0 { 1.0 } else { 0.0 }, 0.0);
    }
    if z <= SERIES_MAX_Z {
        (j_series(nu, z), j_series(nu + 1.0, z))
    } else if z >= ASYMPTOTIC_MIN_Z.max(nu * nu) {
        (j_asymptotic(nu, z), j_asymptotic(nu + 1.0, z))
    } else {
        j_miller(nu, z)
    }
}

/// Direct summation of `Σ (−1)^i (z/2)^{2i+ν} / (i! Γ(i+ν+1))`.
pub(crate) fn j_series(nu: f64, z: f64) -> f64 {
    let half = 0.5 * z;
    let q = half * half;
    let mut term = if nu == 0.0 { 1.0 } else { (nu * half.ln() - ln_gamma_unchecked(nu + 1.0)).exp() };
    let mut sum = NeumaierSum::new();
    sum.add(term);
    for i in 1..200 {
        let fi = i as f64;
        term *= -q / (fi * (fi + nu));
        sum.add(term);
        if term.abs() <= 1e-18 * sum.value().abs() && fi > half {
            break;
        }
    }
    sum.value()
}

/// Hankel expansion `J_ν(z) = √(2/(πz)) (P cos ω − Q sin ω)`,
/// `ω = z − νπ/2 − π/4`.
pub(crate) fn j_asymptotic(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let inv8z = 1.0 / (8.0 * z);
    let mut p = 1.0;
    let mut q = 0.0;
    // a_k = Π_{j=1..k} (μ − (2j−1)²) / (k! (8z)^k)
    let mut a = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) * inv8z / k as f64;
        if a == 0.0 {
            break;
        }
        if a.abs() >= prev {
            // asymptotic series started to diverge
            break;
        }
        prev = a.abs();
        // P = a0 − a2 + a4 − …,  Q = a1 − a3 + a5 − …
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let omega = reduced_phase(z, nu);
    (2.0 / (PI * z)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// `z − νπ/2 − π/4`, with the multiple of 2π in `z` removed first so the
/// trig evaluation sees a small argument.
fn reduced_phase(z: f64, nu: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let turns = (z / two_pi).floor();
    // two-term split of 2π keeps the reduction accurate for z ≲ 1e4
    const TWO_PI_HI: f64 = std::f64::consts::TAU;
    const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;
    let r = (z - turns * TWO_PI_HI) - turns * TWO_PI_LO;
    r - nu * FRAC_PI_2 - FRAC_PI_4
}

/// Miller backward recurrence returning `(J_ν, J_{ν+1})`.
pub(crate) fn j_miller(nu: f64, z: f64) -> (f64, f64) {
    let start = z + 12.0 * z.cbrt() + 30.0;
    let n_max = 2 * ((start / 2.0).ceil() as usize);

    const BIG: f64 = 1e250;
    let mut j_above = 0.0f64; // J̃_{ν+n+1}
    let mut j_here = 1e-300f64; // J̃_{ν+n}
    let mut norm = NeumaierSum::new();
    // c_k = (ν+2k) Γ(ν+k) / k!
    let log_c = |k: usize| -> f64 {
        if k == 0 {
            ln_gamma_unchecked(nu + 1.0)
        } else {
            let kf = k as f64;
            (nu + 2.0 * kf).ln() + ln_gamma_unchecked(nu + kf) - ln_gamma_unchecked(kf + 1.0)
        }
    };
    let mut j_nu_plus_1 = 0.0;
    let mut n = n_max;
    loop {
        if n.is_multiple_of(2) {
            norm.add(log_c(n / 2).exp() * j_here);
        }
        if n == 1 {
            j_nu_plus_1 = j_here;
        }
        if n == 0 {
            break;
        }
        let mu = nu + n as f64;
        let j_below = 2.0 * mu / z * j_here - j_above;
        j_above = j_here;
        j_here = j_below;
        n -= 1;
        if j_here.abs() > BIG {
            j_here /= BIG;
            j_above /= BIG;
            j_nu_plus_1 /= BIG;
            norm.scale(1.0 / BIG);
        }
    }
    let s = norm.value();
    // J_ν = (z/2)^ν · J̃_ν / S
    let factor = if nu == 0.0 { 1.0 / s } else { s.signum() * (nu * (0.5 * z).ln() - s.abs().ln()).exp() };
    (j_here * factor, j_nu_plus_1 * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    /// `J_{1/2}(z) = √(2/(πz)) sin z`, `J_{3/2}(z) = √(2/(πz)) (sin z / z − cos z)`.
    fn j_half(z: f64) -> f64 {
        (2.0 / (PI * z)).sqrt() * z.sin()
    }
    fn j_three_halves(z: f64) -> f64 {
        (2.0 / (PI * z)).sqrt() * (z.sin() / z - z.cos())
    }

    #[test]
    fn value_at_origin() {
        assert_eq!(bessel_j(order(0.0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(order(1.3), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_integer_closed_forms() {
        let mut z = 0.05;
        while z <= 200.0 {
            let a = bessel_j(order(0.5), z).unwrap();
            let b = bessel_j(order(1.5), z).unwrap();
            assert!((a - j_half(z)).abs() < 1e-12, "J_1/2({z}): {a} vs {}", j_half(z));
            assert!((b - j_three_halves(z)).abs() < 1e-12, "J_3/2({z})");
            z += 0.37;
        }
        assert!(bessel_j(order(0.5), PI).unwrap().abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_argument() {
        assert!(bessel_j(order(1.0), -1.0).is_err());
        assert!(bessel_j_dd(order(1.0), 0.0).is_err());
        assert!(BesselOrder::new(-0.5).is_err());
    }

    #[test]
    fn miller_agrees_with_series_and_asymptotic() {
        for &nu in &[0.0, 0.3, 1.0, 2.5, 4.0] {
            for i in 0..20 {
                let z = 6.0 + 0.1 * i as f64;
                let s = j_series(nu, z);
                let m = j_miller(nu, z).0;
                assert!((s - m).abs() < 1e-13, "nu={nu} z={z}: {s} vs {m}");
            }
            for i in 0..=40 {
                let z = 40.0 + 0.5 * i as f64;
                let a = j_asymptotic(nu, z);
                let m = j_miller(nu, z).0;
                assert!((a - m).abs() < 1e-10, "nu={nu} z={z}: {a} vs {m}");
            }
        }
    }

    #[test]
    fn second_derivative_half_order() {
        // d²/dz² [√(2/(πz)) sin z]
        let z = FRAC_PI_2;
        let c = (2.0 / PI).sqrt();
        let s = z.sin();
        let co = z.cos();
        let want = c * (0.75 * z.powf(-2.5) * s - z.powf(-1.5) * co - z.powf(-0.5) * s);
        let got = bessel_j_dd(order(0.5), z).unwrap();
        assert!((got - want).abs() < 1e-13, "{got} vs {want}");
    }
}
