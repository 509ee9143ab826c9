//! `z ↦ E_{(α−α_1,…,α),b}(λ_1 z^{α−α_1},…,−γ² z^α)` on a whole interval
//! `[0, z_max]`, for repeated evaluation.
//!
//! The merged power series serves `[0, z_s]`, where its cancellation stays
//! below [`SERIES_AMPLIFICATION`]; Laplace inversion serves `(z_s, z_max]`.

use super::laplace::LaplaceKernel;
use super::series::{MlSeries, BUDGET_REASON};
use super::MIN_TOL;
use crate::error::{Error, Result};
use crate::fractional::TimeOperator;

/// Largest accepted `Σ|terms| / max(|E|, 1/Γ(b))` on the series part.
pub const SERIES_AMPLIFICATION: f64 = 1e3;
/// Walker terms allowed for the series part. Small exponents `α − α_i`
/// converge slowly; past this budget the inversion takes over.
const SERIES_TERM_BUDGET: u64 = 20_000;
/// Range reduction after a blown term budget; halving barely helps when
/// some exponent is small.
const BUDGET_SHRINK: f64 = 1.0 / 16.0;
/// Starting guess for the series range: `Σ |c_i| z^{a_i}` at most this.
const SERIES_ARG_GUESS: f64 = 30.0;

#[derive(Debug, Clone)]
pub struct OperatorKernel {
    offset: f64,
    z_max: f64,
    switch: f64,
    series: MlSeries,
    laplace: Option<LaplaceKernel>,
}

impl OperatorKernel {
    /// Kernel with offset `b ≤ α + 1` for `λ`'s and orders from `op`.
    pub fn new(op: &TimeOperator, gamma_sq: f64, offset: f64, z_max: f64) -> Result<Self> {
        if !(gamma_sq > 0.0 && gamma_sq.is_finite()) {
            return Err(Error::domain("OperatorKernel", format!("gamma^2 = {gamma_sq} must be positive")));
        }
        if !(z_max > 0.0 && z_max.is_finite()) {
            return Err(Error::domain("OperatorKernel", format!("z_max = {z_max} must be positive")));
        }
        if !(offset > 0.0 && offset <= op.alpha() + 1.0) {
            return Err(Error::domain("OperatorKernel", format!("offset {offset} must lie in (0, alpha + 1]")));
        }
        let mut exponents: Vec<f64> = op.terms().iter().map(|t| op.alpha() - t.order).collect();
        let mut coeffs: Vec<f64> = op.terms().iter().map(|t| t.lambda).collect();
        exponents.push(op.alpha());
        coeffs.push(-gamma_sq);
        let size = |z: f64| exponents.iter().zip(&coeffs).map(|(a, c)| c.abs() * z.powf(*a)).sum::<f64>();
        let mut z = z_max;
        while size(z) > SERIES_ARG_GUESS {
            z *= 0.5;
        }
        let series = loop {
            match MlSeries::new(&exponents, &coeffs, offset, z, MIN_TOL, SERIES_AMPLIFICATION, SERIES_TERM_BUDGET) {
                Ok(s) => break s,
                Err(Error::MlNonConvergence { reason, .. }) if reason == BUDGET_REASON && z > 1e-300 => {
                    z *= BUDGET_SHRINK
                }
                Err(Error::MlNonConvergence { .. }) if z > 1e-300 => z *= 0.5,
                Err(e) => return Err(e),
            }
        };
        let laplace = if z < z_max { Some(LaplaceKernel::new(op, gamma_sq, offset, z, z_max)?) } else { None };
        Ok(OperatorKernel { offset, z_max, switch: z, series, laplace })
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Right end of the series range.
    pub fn switch(&self) -> f64 {
        self.switch
    }

    pub fn series(&self) -> &MlSeries {
        &self.series
    }

    /// Estimated error of the inversion part relative to its absolute scale.
    pub fn inversion_error(&self) -> f64 {
        self.laplace.as_ref().map_or(0.0, |l| l.rel_error())
    }

    /// Inverse of the shortest time scale on which the kernel still varies
    /// near `z`, beyond the algebraic behaviour at the origin.
    pub fn rate_at(&self, z: f64) -> f64 {
        self.laplace.as_ref().map_or(0.0, |l| l.live_pole_modulus(z))
    }

    /// `E(z)` for `z ∈ [0, z_max]`.
    pub fn eval(&self, z: f64) -> f64 {
        match &self.laplace {
            Some(l) if z > self.switch => l.eval(z) / z.powf(self.offset - 1.0),
            _ => self.series.eval(z),
        }
    }

    /// `z^{b−1} E(z)` for `z ∈ (0, z_max]`.
    pub fn eval_weighted(&self, z: f64) -> f64 {
        match &self.laplace {
            Some(l) if z > self.switch => l.eval(z),
            _ => z.powf(self.offset - 1.0) * self.series.eval(z),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractional::LowerTerm;
    use crate::mittag_leffler::{ml_two_param, operator_ml};

    #[test]
    fn wave_kernel_over_many_periods() {
        let g = 150.0f64;
        let k = OperatorKernel::new(&TimeOperator::leading_only(2.0).unwrap(), g * g, 2.0, 1.0).unwrap();
        assert!(k.switch() < 1.0);
        for i in 1..=400 {
            let z = i as f64 / 400.0;
            assert!((k.eval_weighted(z) - (g * z).sin() / g).abs() < 1e-14, "z={z}");
        }
        assert_eq!(k.eval(0.0), 1.0);
    }

    #[test]
    fn both_sides_of_the_switch() {
        let op = TimeOperator::new(0.7, vec![LowerTerm { lambda: -0.5, order: 0.35 }]).unwrap();
        let g2 = 900.0;
        for b in [0.7, 1.0] {
            let k = OperatorKernel::new(&op, g2, b, 2.0).unwrap();
            let s = k.switch();
            assert!(s < 2.0);
            for z in [0.25 * s, s, s * (1.0 + 1e-9), 3.0 * s, 0.5, 2.0] {
                let want = operator_ml(&op, g2, z, b, 1e-14).unwrap().value;
                assert!((k.eval(z) - want).abs() < 1e-11 * want.abs().max(1e-3), "b={b} z={z}");
            }
        }
    }

    #[test]
    fn small_exponent_gap_stays_cheap() {
        // α − α_1 ≈ 0.094 makes the merged series converge very slowly
        let op = TimeOperator::new(
            0.5174,
            vec![LowerTerm { lambda: 1.466, order: 0.4234 }, LowerTerm { lambda: -0.3965, order: 0.2035 }],
        )
        .unwrap();
        let start = std::time::Instant::now();
        let k = OperatorKernel::new(&op, 9.0, 1.0 + op.alpha(), 0.8).unwrap();
        assert!(start.elapsed().as_secs_f64() < 1.0);
        assert!(k.series().terms().len() <= SERIES_TERM_BUDGET as usize);
        for z in [0.5 * k.switch(), 2.0 * k.switch(), 1e-3, 0.1, 0.8] {
            let want = operator_ml(&op, 9.0, z, 1.0 + op.alpha(), 1e-14).unwrap().value;
            assert!((k.eval(z) - want).abs() < 1e-11 * want.abs(), "z={z}");
        }
    }

    #[test]
    fn fractional_relaxation() {
        let k = OperatorKernel::new(&TimeOperator::leading_only(0.5).unwrap(), 4.0, 1.0, 1.0).unwrap();
        for z in [0.0, 0.01, 0.3, 1.0f64] {
            let want = ml_two_param(0.5, 1.0, -4.0 * z.sqrt(), 1e-15).unwrap();
            assert!((k.eval(z) - want).abs() < 1e-12);
        }
    }
}
