//! Gauss–Jacobi and Gauss–Legendre rules via Golub–Welsch.
//!
//! The symmetric tridiagonal Jacobi matrix of the monic Jacobi polynomials is
//! diagonalised with implicit QL; nodes are its eigenvalues and weights are
//! `μ₀ v₀²` where `v₀` is the first eigenvector component.

use crate::error::{Error, Result};
use crate::specfun::ln_gamma_unchecked;

/// Nodes and weights on `[-1, 1]` for the weight `(1 − x)^a (1 + x)^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    a: f64,
    b: f64,
}

impl GaussRule {
    pub fn jacobi(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("GaussRule::jacobi", "need at least one node"));
        }
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::domain("GaussRule::jacobi", format!("a = {a}, b = {b} must exceed -1")));
        }
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        let ab = a + b;
        diag[0] = (b - a) / (ab + 2.0);
        for i in 1..n {
            let k = i as f64;
            let s = 2.0 * k + ab;
            diag[i] = (b * b - a * a) / (s * (s + 2.0));
            let beta = if i == 1 {
                // (k + a + b) cancels against (s − 1); keeps a + b = −1 finite
                4.0 * (1.0 + a) * (1.0 + b) / (s * s * (s + 1.0))
            } else {
                4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off[i - 1] = beta.sqrt();
        }
        let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma_unchecked(a + 1.0) + ln_gamma_unchecked(b + 1.0)
            - ln_gamma_unchecked(ab + 2.0);
        let mu0 = ln_mu0.exp();
        let mut first = vec![0.0; n];
        first[0] = 1.0;
        tridiagonal_ql(&mut diag, &mut off, &mut first)?;
        let mut pairs: Vec<(f64, f64)> = diag.into_iter().zip(first).map(|(x, v)| (x, mu0 * v * v)).collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(GaussRule { nodes, weights, a, b })
    }

    pub fn legendre(n: usize) -> Result<Self> {
        Self::jacobi(n, 0.0, 0.0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_lo^hi w(x) g(x) dx` where the weight is the rule's Jacobi weight
    /// transplanted to `[lo, hi]`: `(hi − x)^a (x − lo)^b`.
    pub fn integrate(&self, lo: f64, hi: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let scale = half.powf(1.0 + self.a + self.b);
        let s: f64 = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(mid + half * x)).sum();
        scale * s
    }

    /// Nodes and weights mapped to `[lo, hi]`, weight included in the weights.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let scale = half.powf(1.0 + self.a + self.b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, scale * w))
    }
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// `off[i]` couples rows `i` and `i+1`. On return `diag` holds the
/// eigenvalues and `z` the first components of the normalised eigenvectors
/// (when called with `z = e₁`).
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 1 {
        return Ok(());
    }
    off[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Internal("tridiagonal QL did not converge".into()));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let mut f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::legendre(8).unwrap();
        // degree 15 is the limit for 8 nodes
        let got = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((got - 2f64.powi(16) / 16.0).abs() < 1e-9);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn known_legendre_nodes() {
        let rule = GaussRule::legendre(3).unwrap();
        let r = (0.6f64).sqrt();
        assert!((rule.nodes[0] + r).abs() < 1e-15);
        assert!(rule.nodes[1].abs() < 1e-15);
        assert!((rule.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn jacobi_weight_moments() {
        // ∫_0^t z^{β-1} z^j dz = t^{β+j}/(β+j)
        for &beta in &[0.2, 0.5, 0.8, 1.0, 1.5, 2.0] {
            let rule = GaussRule::jacobi(12, 0.0, beta - 1.0).unwrap();
            for j in 0..10 {
                let t = 1.7;
                let got = rule.integrate(0.0, t, |z| z.powi(j));
                let want = t.powf(beta + j as f64) / (beta + j as f64);
                assert!((got - want).abs() < 1e-13 * want, "beta={beta} j={j}");
            }
        }
    }

    #[test]
    fn large_rule_is_stable() {
        let rule = GaussRule::jacobi(512, 0.0, -0.5).unwrap();
        let got = rule.integrate(0.0, 1.0, |z| z.cos());
        // ∫_0^1 z^{-1/2} cos z dz = √(2π) C(√(2/π)), C the Fresnel integral
        let want = 1.809_048_475_800_544;
        assert!((got - want).abs() < 1e-13, "{got}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GaussRule::jacobi(0, 0.0, 0.0).is_err());
        assert!(GaussRule::jacobi(4, -1.0, 0.0).is_err());
    }
}
