//! Extended-precision summation for arguments where double precision
//! cancels catastrophically.
//!
//! Every term is formed in MPFR arithmetic at a working precision chosen
//! from the ratio between the largest term and the result. When all
//! exponents are rational with a small common denominator `q` the Gamma
//! arguments `b + Σ a_i l_i` lie on the lattice `b + n/q`, and the
//! reciprocal Gamma values are generated by `Γ(x + 1) = x Γ(x)` from `q`
//! base values instead of one MPFR Gamma call per term.

use rug::{Assign, Float};

use super::walker::Walker;
use super::MLParams;
use crate::error::{Error, Result};

/// Precision cap for the extended-precision path, in bits.
pub const MAX_PRECISION_BITS: u32 = 8192;
/// Largest denominator tried when looking for a rational exponent lattice.
const MAX_LATTICE_DENOMINATOR: u32 = 1000;

/// Exponents `a_i = steps_i / q`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Lattice {
    pub q: u32,
    pub steps: Vec<u64>,
}

pub(crate) fn detect_lattice(exponents: &[f64]) -> Option<Lattice> {
    (1..=MAX_LATTICE_DENOMINATOR).find_map(|q| {
        let qf = q as f64;
        let steps: Option<Vec<u64>> = exponents
            .iter()
            .map(|&a| {
                let s = a * qf;
                let r = s.round();
                ((s - r).abs() <= 1e-10 * s.max(1.0) && r >= 1.0).then_some(r as u64)
            })
            .collect();
        steps.map(|steps| Lattice { q, steps })
    })
}

/// `1/Γ(b + n/q)` for `n = 0, 1, …`, extended on demand.
pub(crate) struct RecipGammaLattice {
    prec: u32,
    b: Float,
    q: u32,
    table: Vec<Float>,
}

impl RecipGammaLattice {
    pub fn new(b: f64, q: u32, prec: u32) -> Self {
        let bf = Float::with_val(prec, b);
        let table = (0..q)
            .map(|r| {
                let x = Float::with_val(prec, r) / q + &bf;
                x.gamma().recip()
            })
            .collect();
        RecipGammaLattice { prec, b: bf, q, table }
    }

    pub fn get(&mut self, n: usize) -> &Float {
        let q = self.q as usize;
        while self.table.len() <= n {
            let j = self.table.len() - q;
            let x = Float::with_val(self.prec, j) / self.q + &self.b;
            let v = Float::with_val(self.prec, &self.table[j] / &x);
            self.table.push(v);
        }
        &self.table[n]
    }
}

/// Source of `1/Γ(b + Σ a_i l_i)` at working precision.
pub(crate) enum RecipGamma {
    Lattice { lattice: Lattice, table: RecipGammaLattice },
    Direct { prec: u32, b: Float, exponents: Vec<Float> },
}

impl RecipGamma {
    pub fn new(exponents: &[f64], b: f64, prec: u32) -> Self {
        match detect_lattice(exponents) {
            Some(lattice) => {
                let table = RecipGammaLattice::new(b, lattice.q, prec);
                RecipGamma::Lattice { lattice, table }
            }
            None => RecipGamma::Direct {
                prec,
                b: Float::with_val(prec, b),
                exponents: exponents.iter().map(|&a| Float::with_val(prec, a)).collect(),
            },
        }
    }

    pub fn eval(&mut self, parts: &[u32]) -> Float {
        match self {
            RecipGamma::Lattice { lattice, table } => {
                let n: u64 = lattice.steps.iter().zip(parts).map(|(s, &l)| s * l as u64).sum();
                table.get(n as usize).clone()
            }
            RecipGamma::Direct { prec, b, exponents } => {
                let mut x = b.clone();
                for (a, &l) in exponents.iter().zip(parts) {
                    if l > 0 {
                        x += Float::with_val(*prec, a * l);
                    }
                }
                x.gamma().recip()
            }
        }
    }
}

/// Outcome of one extended-precision summation.
#[derive(Debug, Clone)]
pub(crate) struct MpSum {
    pub value: f64,
    pub layers: usize,
    pub tail: f64,
    /// `log2(max |term|) − log2(|sum|)`: bits lost to cancellation.
    pub lost_bits: i64,
}

fn exp2_of(x: &Float) -> i64 {
    x.get_exp().map(i64::from).unwrap_or(i64::MIN / 4)
}

/// Depth in nats below the peak term at which a pass at `bits` skips
/// subtrees: they cannot change the rounded sum.
pub(crate) fn cut_depth(bits: u32) -> f64 {
    (bits as f64 + 40.0) * std::f64::consts::LN_2
}

/// Layered summation of the multinomial series at `prec` bits.
///
/// `peak_hint` is the logarithm of the largest term, known from the double
/// pass; it sets the pruning cutoff from the first layer on.
pub(crate) fn multinomial_sum(
    p: &MLParams,
    tol: f64,
    prec: u32,
    peak_hint: f64,
    max_layers: usize,
    max_terms: u64,
) -> Result<MpSum> {
    let m = p.exponents.len();
    let mut rg = RecipGamma::new(&p.exponents, p.offset, prec);
    let mut walker = Walker::new(p);
    let zs: Vec<Float> = p.args.iter().map(|&z| Float::with_val(prec, z)).collect();
    // zf[i][l] = z_i^l / l!
    let mut zf: Vec<Vec<Float>> = vec![vec![Float::with_val(prec, 1)]; m];
    let mut fact = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let mut max_term = Float::with_val(prec, 0);
    let depth = cut_depth(prec);
    let mut peak_ln = peak_hint;
    let mut quiet_layers = 0;
    let mut terms_used: u64 = 0;
    let mut prev_mag = Float::with_val(prec, 0);
    let mut term = Float::with_val(prec, 0);
    for k in 0..max_layers {
        if k > 0 {
            fact *= k as u32;
            for (i, z) in zs.iter().enumerate() {
                let next = Float::with_val(prec, &zf[i][k - 1] * z) / k as u32;
                zf[i].push(next);
            }
        }
        let mut layer = Float::with_val(prec, 0);
        let mut layer_mag = Float::with_val(prec, 0);
        let pruned = walker.layer(k, peak_ln - depth, &mut |parts, t| {
            terms_used += 1;
            peak_ln = peak_ln.max(t.ln);
            term.assign(&fact);
            for (i, &l) in parts.iter().enumerate() {
                if l > 0 {
                    term *= &zf[i][l as usize];
                }
            }
            term *= rg.eval(parts);
            layer += &term;
            let a = Float::with_val(prec, term.abs_ref());
            if a > max_term {
                max_term.assign(&a);
            }
            layer_mag += &a;
        });
        sum += &layer;
        if pruned > f64::NEG_INFINITY {
            layer_mag += Float::with_val(prec, pruned).exp();
        }
        if terms_used > max_terms {
            return Err(Error::MlNonConvergence {
                layers: k + 1,
                last_layer: layer_mag.to_f64(),
                reason: "term budget exhausted",
            });
        }
        if let Some(out) = layer_done(k, &sum, &layer_mag, &prev_mag, &max_term, tol, &mut quiet_layers) {
            return Ok(out);
        }
        prev_mag = layer_mag;
    }
    Err(Error::MlNonConvergence { layers: max_layers, last_layer: prev_mag.to_f64(), reason: "layer cap reached" })
}

/// Stopping rule: three consecutive layers below `tol·|partial sum|`.
fn layer_done(
    k: usize,
    sum: &Float,
    layer_mag: &Float,
    prev_mag: &Float,
    max_term: &Float,
    tol: f64,
    quiet: &mut u32,
) -> Option<MpSum> {
    let prec = sum.prec();
    let threshold = Float::with_val(prec, sum.abs_ref()) * tol;
    if k > 0 && *layer_mag <= threshold {
        *quiet += 1;
    } else {
        *quiet = 0;
    }
    if *quiet < 3 {
        return None;
    }
    let ratio = if prev_mag.is_zero() { 0.0 } else { Float::with_val(prec, layer_mag / prev_mag).to_f64() };
    let rel = if sum.is_zero() { 0.0 } else { Float::with_val(prec, layer_mag / sum).abs().to_f64() };
    Some(MpSum {
        value: sum.to_f64(),
        layers: k + 1,
        tail: rel * (ratio / (1.0 - ratio)).clamp(0.0, 1.0),
        lost_bits: if sum.is_zero() { i64::MAX / 4 } else { exp2_of(max_term) - exp2_of(sum) },
    })
}

/// `Σ z^k / Γ(b + a k)` at `prec` bits.
pub(crate) fn two_param_sum(a: f64, b: f64, z: f64, tol: f64, prec: u32, max_layers: usize) -> Result<MpSum> {
    let mut rg = RecipGamma::new(&[a], b, prec);
    let zf = Float::with_val(prec, z);
    let mut zk = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let mut max_term = Float::with_val(prec, 0);
    let mut prev_mag = Float::with_val(prec, 0);
    let mut quiet = 0;
    for k in 0..max_layers {
        if k > 0 {
            zk *= &zf;
        }
        let term = Float::with_val(prec, &zk * rg.eval(&[k as u32]));
        sum += &term;
        let mag = Float::with_val(prec, term.abs_ref());
        if mag > max_term {
            max_term.assign(&mag);
        }
        if let Some(out) = layer_done(k, &sum, &mag, &prev_mag, &max_term, tol, &mut quiet) {
            return Ok(out);
        }
        prev_mag = mag;
    }
    Err(Error::MlNonConvergence { layers: max_layers, last_layer: prev_mag.to_f64(), reason: "layer cap reached" })
}

/// Repeat `sum_at` with increasing precision until the bits lost to
/// cancellation leave at least `needed_bits` of accuracy.
pub(crate) fn with_adaptive_precision(
    initial_bits: u32,
    needed_bits: u32,
    mut sum_at: impl FnMut(u32) -> Result<MpSum>,
) -> Result<(MpSum, u32)> {
    let mut bits = initial_bits.clamp(64, MAX_PRECISION_BITS);
    loop {
        let out = sum_at(bits)?;
        let required = out.lost_bits.max(0) as u64 + needed_bits as u64 + 16;
        if required <= bits as u64 {
            return Ok((out, bits));
        }
        if bits == MAX_PRECISION_BITS {
            return Err(Error::MlNonConvergence {
                layers: out.layers,
                last_layer: out.tail,
                reason: "required working precision exceeds the cap",
            });
        }
        bits = (required as u32 + 64).min(MAX_PRECISION_BITS);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_detection() {
        let l = detect_lattice(&[0.3, 1.7]).unwrap();
        assert_eq!(l.q, 10);
        assert_eq!(l.steps, vec![3, 17]);
        assert_eq!(detect_lattice(&[2.0]).unwrap().q, 1);
        assert!(detect_lattice(&[std::f64::consts::PI / 10.0]).is_none());
    }

    #[test]
    fn lattice_table_matches_direct_gamma() {
        let prec = 200;
        let mut t = RecipGammaLattice::new(0.5, 10, prec);
        for n in [0usize, 3, 10, 27, 113] {
            let x = Float::with_val(prec, n) / 10u32 + 0.5f64;
            let direct = x.gamma().recip();
            let got = t.get(n).clone();
            let rel = Float::with_val(prec, &got - &direct).abs() / &direct;
            assert!(rel.to_f64() < 1e-55, "n={n}");
        }
    }
}
