//! Depth-first walk over the compositions of one degree layer with subtree
//! pruning.
//!
//! Indices are assigned from the last to the first, which visits the
//! compositions in colexicographic order. Before descending, the total
//! absolute mass of a subtree is bounded with the multinomial theorem:
//! for `r` units left to spread over indices `< j`,
//! `Σ r!/Π l_i! Π |z_i|^{l_i} = (Σ_{i<j} |z_i|)^r`, and `1/Γ` is bounded by
//! its maximum over the reachable range of Gamma arguments. Subtrees whose
//! bound falls below the cutoff are skipped and their bound is accumulated.

use super::MLParams;
use crate::specfun::ln_gamma_unchecked;

/// Position of the minimum of `Γ` on the positive axis.
const GAMMA_MIN_X: f64 = 1.461_632_144_968_362_2;
/// `−ln Γ(GAMMA_MIN_X)`.
const LN_RECIP_GAMMA_MAX: f64 = 0.121_486_290_535_849_6;

/// `ln|term|`, its sign, and the sum of absolute values of the pieces that
/// entered the logarithm (a bound on its rounding error, in ulps).
#[derive(Debug, Clone, Copy)]
pub(crate) struct TermLog {
    pub ln: f64,
    pub negative: bool,
    pub scale: f64,
}

/// `ln(e^a + e^b)`.
pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn ln_max_recip_gamma(lo: f64, hi: f64) -> f64 {
    if hi <= GAMMA_MIN_X {
        -ln_gamma_unchecked(hi)
    } else if lo >= GAMMA_MIN_X {
        -ln_gamma_unchecked(lo)
    } else {
        LN_RECIP_GAMMA_MAX
    }
}

pub(crate) struct Walker<'a> {
    p: &'a MLParams,
    ln_abs_z: Vec<f64>,
    negative: Vec<bool>,
    ln_fact: Vec<f64>,
    /// `ln Σ_{i<j} |z_i|`, `min_{i<j} a_i`, `max_{i<j} a_i`, indexed by `j`.
    ln_prefix_abs: Vec<f64>,
    prefix_min_a: Vec<f64>,
    prefix_max_a: Vec<f64>,
    parts: Vec<u32>,
    /// Leaves visited plus subtree bounds evaluated, over the walker's life.
    pub nodes: u64,
}

struct LayerState<'v> {
    cut_ln: f64,
    pruned_ln: f64,
    visit: &'v mut dyn FnMut(&[u32], TermLog),
}

impl<'a> Walker<'a> {
    pub fn new(p: &'a MLParams) -> Self {
        let m = p.len();
        let mut ln_prefix_abs = vec![f64::NEG_INFINITY; m];
        let mut prefix_min_a = vec![f64::INFINITY; m];
        let mut prefix_max_a = vec![0.0; m];
        let mut s = 0.0;
        for j in 1..m {
            s += p.args[j - 1].abs();
            ln_prefix_abs[j] = s.ln();
            prefix_min_a[j] = prefix_min_a[j - 1].min(p.exponents[j - 1]);
            prefix_max_a[j] = f64::max(prefix_max_a[j - 1], p.exponents[j - 1]);
        }
        Walker {
            p,
            ln_abs_z: p.args.iter().map(|z| z.abs().ln()).collect(),
            negative: p.args.iter().map(|&z| z < 0.0).collect(),
            ln_fact: vec![0.0],
            ln_prefix_abs,
            prefix_min_a,
            prefix_max_a,
            parts: vec![0; m],
            nodes: 0,
        }
    }

    fn reserve(&mut self, k: usize) {
        while self.ln_fact.len() <= k {
            let j = self.ln_fact.len();
            self.ln_fact.push(self.ln_fact[j - 1] + (j as f64).ln());
        }
    }

    /// Visit every composition of degree `k` whose subtree bound reaches
    /// `cut_ln`. Returns `ln` of the total bound of the skipped subtrees.
    pub fn layer(&mut self, k: usize, cut_ln: f64, visit: &mut dyn FnMut(&[u32], TermLog)) -> f64 {
        self.reserve(k);
        let mut st = LayerState { cut_ln, pruned_ln: f64::NEG_INFINITY, visit };
        let m = self.p.len();
        let lf = self.ln_fact[k];
        self.descend(m - 1, k as u32, lf, lf, self.p.offset, false, &mut st);
        st.pruned_ln
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(&mut self, j: usize, r: u32, ln: f64, scale: f64, x: f64, neg: bool, st: &mut LayerState) {
        if j == 0 {
            let Some((ln, scale, x, neg)) = self.assign(0, r, ln, scale, x, neg) else { return };
            self.parts[0] = r;
            let lg = ln_gamma_unchecked(x);
            self.nodes += 1;
            let t = TermLog { ln: ln - lg, negative: neg, scale: scale + lg.abs() };
            (st.visit)(&self.parts, t);
            return;
        }
        for l in 0..=r {
            let Some((ln2, scale2, x2, neg2)) = self.assign(j, l, ln, scale, x, neg) else { break };
            let rest = r - l;
            if rest > 0 {
                self.nodes += 1;
                let lps = self.ln_prefix_abs[j];
                if lps == f64::NEG_INFINITY {
                    continue;
                }
                let rf = rest as f64;
                let bound = ln2 - self.ln_fact[rest as usize]
                    + rf * lps
                    + ln_max_recip_gamma(x2 + rf * self.prefix_min_a[j], x2 + rf * self.prefix_max_a[j]);
                if bound < st.cut_ln {
                    st.pruned_ln = ln_add(st.pruned_ln, bound);
                    continue;
                }
            }
            self.parts[j] = l;
            self.descend(j - 1, rest, ln2, scale2, x2, neg2, st);
        }
        self.parts[j] = 0;
    }

    /// Fold `l_j = l` into the running logarithm; `None` for `0^l`, `l > 0`.
    fn assign(&self, j: usize, l: u32, ln: f64, scale: f64, x: f64, neg: bool) -> Option<(f64, f64, f64, bool)> {
        if l == 0 {
            return Some((ln, scale, x, neg));
        }
        let lz = self.ln_abs_z[j];
        if lz == f64::NEG_INFINITY {
            return None;
        }
        let piece = l as f64 * lz;
        let lf = self.ln_fact[l as usize];
        Some((
            ln + piece - lf,
            scale + piece.abs() + lf,
            x + self.p.exponents[j] * l as f64,
            neg ^ (self.negative[j] && l % 2 == 1),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mittag_leffler::Compositions;

    #[test]
    fn unpruned_walk_matches_enumeration() {
        let p = MLParams::new(vec![0.5, 1.2, 2.0], 1.3, vec![0.7, -1.5, 0.0]).unwrap();
        let mut w = Walker::new(&p);
        for k in 0..9 {
            let mut walked = Vec::new();
            let pruned = w.layer(k, f64::NEG_INFINITY, &mut |parts, _| walked.push(parts.to_vec()));
            assert_eq!(pruned, f64::NEG_INFINITY);
            let mut listed = Vec::new();
            Compositions::new(k as u32, 3).for_each(|parts| {
                if parts[2] == 0 {
                    listed.push(parts.to_vec());
                }
            });
            assert_eq!(walked, listed, "k={k}");
        }
    }

    #[test]
    fn pruned_mass_bounds_skipped_terms() {
        let p = MLParams::new(vec![0.4, 0.9, 1.7], 1.0, vec![0.3, -2.0, -5.0]).unwrap();
        let mut w = Walker::new(&p);
        for k in [6usize, 15, 30] {
            let mut all = 0.0;
            w.layer(k, f64::NEG_INFINITY, &mut |_, t| all += t.ln.exp());
            let mut kept = 0.0;
            let mut peak = f64::NEG_INFINITY;
            w.layer(k, f64::NEG_INFINITY, &mut |_, t| peak = peak.max(t.ln));
            let pruned = w.layer(k, peak - 10.0, &mut |_, t| kept += t.ln.exp());
            assert!(all - kept <= pruned.exp() * (1.0 + 1e-12) + 1e-300, "k={k}");
        }
    }
}
