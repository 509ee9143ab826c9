//! Weak compositions `l_1 + … + l_m = k`, `l_i ≥ 0`, in colexicographic order.

/// Iterator over the weak compositions of `k` into `m` parts.
#[derive(Debug, Clone)]
pub struct Compositions {
    parts: Vec<u32>,
    done: bool,
}

impl Compositions {
    pub fn new(k: u32, m: usize) -> Self {
        assert!(m >= 1);
        let mut parts = vec![0; m];
        parts[0] = k;
        Compositions { parts, done: false }
    }

    fn step(&mut self) {
        let m = self.parts.len();
        match (0..m - 1).find(|&i| self.parts[i] > 0) {
            None => self.done = true,
            Some(i) => {
                let t = self.parts[i];
                self.parts[i] = 0;
                self.parts[0] = t - 1;
                self.parts[i + 1] += 1;
            }
        }
    }

    /// Visit every composition.
    pub fn for_each(mut self, mut f: impl FnMut(&[u32])) {
        while !self.done {
            f(&self.parts);
            self.step();
        }
    }
}

/// Number of weak compositions, `C(k + m − 1, m − 1)`.
pub fn count(k: u64, m: u64) -> u64 {
    let mut c = 1u64;
    for j in 1..m {
        c = c * (k + j) / j;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_all_once() {
        for m in 1..=5usize {
            for k in 0..=7u32 {
                let mut seen = std::collections::HashSet::new();
                Compositions::new(k, m).for_each(|p| {
                    assert_eq!(p.iter().sum::<u32>(), k);
                    assert!(seen.insert(p.to_vec()));
                });
                assert_eq!(seen.len() as u64, count(k as u64, m as u64), "k={k} m={m}");
            }
        }
    }

    #[test]
    fn colex_order_for_two_parts() {
        let mut v = Vec::new();
        Compositions::new(2, 2).for_each(|p| v.push(p.to_vec()));
        assert_eq!(v, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }
}
