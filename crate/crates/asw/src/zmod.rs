//! Linear algebra over `Z/p^n`: Smith form, kernels, and invariant factors of
//! subquotients of `(Z/p^n)^N`.

use num_integer::Integer;

/// `Z/p^n` with `q = p^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZMod {
    pub p: u64,
    pub n: u32,
    pub q: u64,
}

/// A matrix as rows of residues in `[0, q)`.
pub type ZMat = Vec<Vec<u64>>;

impl ZMod {
    pub fn new(p: u64, n: u32) -> ZMod {
        ZMod { p, n, q: p.pow(n) }
    }

    pub fn reduce(&self, a: i128) -> u64 {
        a.rem_euclid(self.q as i128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.q as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.q - b % self.q)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a % self.q) % self.q
    }

    /// `p`-adic valuation, `n` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        let mut a = a % self.q;
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let g = (a as i128).extended_gcd(&(self.q as i128));
        if g.gcd != 1 {
            return None;
        }
        Some(self.reduce(g.x))
    }

    pub fn pow_p(&self, k: u32) -> u64 {
        if k >= self.n {
            0
        } else {
            self.p.pow(k)
        }
    }

    pub fn mat_vec(&self, a: &ZMat, v: &[u64]) -> Vec<u64> {
        a.iter()
            .map(|row| row.iter().zip(v).fold(0, |acc, (x, y)| self.add(acc, self.mul(*x, *y))))
            .collect()
    }

    pub fn mat_mul(&self, a: &ZMat, b: &ZMat) -> ZMat {
        let cols = b.first().map_or(0, |r| r.len());
        a.iter()
            .map(|row| {
                (0..cols)
                    .map(|j| {
                        row.iter()
                            .zip(b)
                            .fold(0, |acc, (x, brow)| self.add(acc, self.mul(*x, brow[j])))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn identity(&self, d: usize) -> ZMat {
        (0..d).map(|i| (0..d).map(|j| u64::from(i == j)).collect()).collect()
    }

    /// Smith form of `a` (rows x cols): the pivot valuations and a column
    /// transform `v` with `a v = u^{-1} diag(p^{k_i})` for some invertible `u`.
    pub fn smith(&self, a: &ZMat, cols: usize) -> (Vec<u32>, ZMat) {
        let mut m: ZMat = a.iter().map(|r| r.iter().map(|x| x % self.q).collect()).collect();
        let mut v = self.identity(cols);
        let rows = m.len();
        let mut pivots = Vec::new();
        for t in 0..rows.min(cols) {
            let mut best: Option<(u32, usize, usize)> = None;
            for (i, row) in m.iter().enumerate().skip(t) {
                for (j, &x) in row.iter().enumerate().skip(t) {
                    if x != 0 {
                        let val = self.valuation(x);
                        if best.is_none_or(|b| val < b.0) {
                            best = Some((val, i, j));
                        }
                    }
                }
                if best.is_some_and(|b| b.0 == 0) {
                    break;
                }
            }
            let Some((k, bi, bj)) = best else { break };
            m.swap(t, bi);
            for row in m.iter_mut() {
                row.swap(t, bj);
            }
            for row in v.iter_mut() {
                row.swap(t, bj);
            }
            let pk = self.p.pow(k);
            let unit = self.inv(m[t][t] / pk).expect("unit part");
            for x in m[t].iter_mut() {
                *x = self.mul(*x, unit);
            }
            for i in 0..rows {
                if i == t || m[i][t] == 0 {
                    continue;
                }
                let f = m[i][t] / pk;
                for j in t..cols {
                    let d = self.mul(f, m[t][j]);
                    m[i][j] = self.sub(m[i][j], d);
                }
            }
            for j in t + 1..cols {
                if m[t][j] == 0 {
                    continue;
                }
                let f = m[t][j] / pk;
                for row in m.iter_mut() {
                    let d = self.mul(f, row[t]);
                    row[j] = self.sub(row[j], d);
                }
                for row in v.iter_mut() {
                    let d = self.mul(f, row[t]);
                    row[j] = self.sub(row[j], d);
                }
            }
            pivots.push(k);
        }
        (pivots, v)
    }

    /// Generators of `{x : a x = 0}`.
    pub fn kernel(&self, a: &ZMat, cols: usize) -> Vec<Vec<u64>> {
        let (pivots, v) = self.smith(a, cols);
        let column = |i: usize, scale: u64| -> Vec<u64> { v.iter().map(|r| self.mul(r[i], scale)).collect() };
        let mut out = Vec::new();
        for (i, &k) in pivots.iter().enumerate() {
            if k > 0 {
                out.push(column(i, self.p.pow(self.n - k)));
            }
        }
        for i in pivots.len()..cols {
            out.push(column(i, 1));
        }
        out.retain(|g| g.iter().any(|&x| x != 0));
        out
    }

    /// `log_p` of the order of the submodule spanned by `gens`.
    pub fn span_log(&self, gens: &[Vec<u64>], dim: usize) -> u32 {
        if gens.is_empty() {
            return 0;
        }
        let rows: ZMat = gens.to_vec();
        let (pivots, _) = self.smith(&rows, dim);
        pivots.iter().map(|&k| self.n - k).sum()
    }

    /// Exponents `a_i` with `span(z) / span(w) = sum Z/p^{a_i}`, ascending.
    /// Requires `span(w)` inside `span(z)`.
    pub fn quotient_invariants(&self, z: &[Vec<u64>], w: &[Vec<u64>], dim: usize) -> Vec<u32> {
        let lw = self.span_log(w, dim);
        let e: Vec<u32> = (0..=self.n + 1)
            .map(|k| {
                let mut gens: Vec<Vec<u64>> = z
                    .iter()
                    .map(|g| g.iter().map(|&x| self.mul(x, self.pow_p(k))).collect())
                    .collect();
                gens.extend(w.iter().cloned());
                self.span_log(&gens, dim) - lw
            })
            .collect();
        let mut out = Vec::new();
        for k in 0..=self.n as usize {
            let above_k = e[k] - e[k + 1];
            let above_k1 = if k + 2 < e.len() { e[k + 1] - e[k + 2] } else { 0 };
            for _ in 0..above_k - above_k1 {
                out.push(k as u32 + 1);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_multiplication_by_p() {
        let z = ZMod::new(3, 2);
        let k = z.kernel(&vec![vec![3]], 1);
        assert_eq!(k, vec![vec![3]]);
        assert_eq!(z.span_log(&k, 1), 1);
    }

    #[test]
    fn quotient_of_cyclic_groups() {
        let z = ZMod::new(5, 2);
        let full = z.identity(2);
        let w = vec![vec![5, 0]];
        assert_eq!(z.quotient_invariants(&full, &w, 2), vec![1, 2]);
        assert_eq!(z.quotient_invariants(&full, &[], 2), vec![2, 2]);
        assert_eq!(z.quotient_invariants(&full, &full, 2), Vec::<u32>::new());
    }

    #[test]
    fn kernel_vectors_are_killed() {
        let z = ZMod::new(2, 3);
        let a = vec![vec![2, 4, 6], vec![1, 3, 5]];
        for g in z.kernel(&a, 3) {
            assert!(z.mat_vec(&a, &g).iter().all(|&x| x == 0));
        }
        // |ker| * |image| = 8^3
        let img: Vec<Vec<u64>> = (0..3).map(|j| a.iter().map(|r| r[j]).collect()).collect();
        assert_eq!(z.span_log(&z.kernel(&a, 3), 3) + z.span_log(&img, 2), 9);
    }
}
