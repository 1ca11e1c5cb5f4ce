//! Truncated Laurent series `sum c_i t^i + O(t^prec)` over a lattice field.
//!
//! Coefficients are stored flattened (`m` residues per term) so that products can
//! accumulate without intermediate reductions. An exact series (a Laurent
//! polynomial) carries the precision [`EXACT`].

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{AswError, Result};
use crate::field::{common_field_of, Fe, Field};
use crate::ring::Ring;

pub const EXACT: i64 = i64::MAX;

#[derive(Clone)]
pub struct Laurent {
    f: Arc<Field>,
    val: i64,
    c: Vec<u32>,
    prec: i64,
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for i in 0..self.len() {
            let c = self.term(i);
            if !c.is_zero() {
                parts.push(format!("({})*t^{}", c, self.val + i as i64));
            }
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        if self.prec != EXACT {
            parts.push(format!("O(t^{})", self.prec));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl PartialEq for Laurent {
    /// Equality of the known coefficients up to the smaller precision.
    fn eq(&self, o: &Laurent) -> bool {
        let prec = self.prec.min(o.prec);
        let lo = self.val.min(o.val);
        let hi = if prec == EXACT {
            (self.val + self.len() as i64).max(o.val + o.len() as i64)
        } else {
            prec
        };
        (lo..hi).all(|k| self.coefficient(k) == o.coefficient(k))
    }
}

fn add_prec(a: i64, b: i64) -> i64 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a + b
    }
}

impl Laurent {
    pub fn zero(field: &Arc<Field>) -> Laurent {
        Laurent {
            f: field.clone(),
            val: 0,
            c: Vec::new(),
            prec: EXACT,
        }
    }

    /// Zero known only up to `O(t^prec)`.
    pub fn big_o(field: &Arc<Field>, prec: i64) -> Laurent {
        Laurent {
            f: field.clone(),
            val: prec,
            c: Vec::new(),
            prec,
        }
    }

    pub fn constant(c: &Fe) -> Laurent {
        Laurent::monomial(c, 0)
    }

    pub fn one(field: &Arc<Field>) -> Laurent {
        Laurent::constant(&Fe::one(field))
    }

    /// `c t^k`.
    pub fn monomial(c: &Fe, k: i64) -> Laurent {
        let mut l = Laurent {
            f: c.field().clone(),
            val: k,
            c: c.coeffs().to_vec(),
            prec: EXACT,
        };
        l.normalize();
        l
    }

    /// Series from explicit terms starting at `val`, with absolute precision `prec`.
    pub fn from_terms(field: &Arc<Field>, val: i64, terms: &[Fe], prec: i64) -> Laurent {
        let m = field.degree();
        let mut c = Vec::with_capacity(terms.len() * m);
        for t in terms {
            c.extend_from_slice(t.embed(field).unwrap().coeffs());
        }
        let mut l = Laurent {
            f: field.clone(),
            val,
            c,
            prec,
        };
        l.clip();
        l.normalize();
        l
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.f
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec == EXACT
    }

    fn m(&self) -> usize {
        self.f.degree()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.c.len() / self.m()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    fn term_slice(&self, i: usize) -> &[u32] {
        let m = self.m();
        &self.c[i * m..(i + 1) * m]
    }

    fn term(&self, i: usize) -> Fe {
        Fe::from_coeffs(&self.f, self.term_slice(i).to_vec())
    }

    /// Coefficient of `t^k`; panics if `k` is beyond the precision.
    pub fn coefficient(&self, k: i64) -> Fe {
        assert!(k < self.prec, "coefficient t^{k} beyond precision {}", self.prec);
        if k < self.val || k >= self.val + self.len() as i64 {
            return Fe::zero(&self.f);
        }
        self.term((k - self.val) as usize)
    }

    /// Drop terms at or beyond the precision.
    fn clip(&mut self) {
        if self.prec != EXACT {
            let keep = (self.prec - self.val).max(0) as usize;
            let m = self.m();
            if self.c.len() > keep * m {
                self.c.truncate(keep * m);
            }
        }
    }

    /// Strip leading and trailing zero terms.
    fn normalize(&mut self) {
        let m = self.m();
        let mut lead = 0;
        while lead * m < self.c.len() && self.c[lead * m..(lead + 1) * m].iter().all(|&x| x == 0) {
            lead += 1;
        }
        if lead > 0 {
            self.c.drain(..lead * m);
            self.val += lead as i64;
        }
        while self.c.len() >= m && self.c[self.c.len() - m..].iter().all(|&x| x == 0) {
            self.c.truncate(self.c.len() - m);
        }
        if self.c.is_empty() {
            self.val = if self.prec == EXACT { 0 } else { self.prec };
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Valuation if some known coefficient is nonzero.
    pub fn valuation(&self) -> Option<i64> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Lower bound for the valuation (the precision when nothing is known).
    pub fn valuation_lower_bound(&self) -> i64 {
        if self.c.is_empty() {
            if self.prec == EXACT {
                i64::MAX
            } else {
                self.prec
            }
        } else {
            self.val
        }
    }

    pub fn embed(&self, field: &Arc<Field>) -> Laurent {
        if Arc::ptr_eq(&self.f, field) {
            return self.clone();
        }
        let m = field.degree();
        let mut c = Vec::with_capacity(self.len() * m);
        for i in 0..self.len() {
            c.extend_from_slice(self.term(i).embed(field).unwrap().coeffs());
        }
        Laurent {
            f: field.clone(),
            val: self.val,
            c,
            prec: self.prec,
        }
    }

    fn align(&self, o: &Laurent) -> (Laurent, Laurent) {
        if Arc::ptr_eq(&self.f, &o.f) {
            return (self.clone(), o.clone());
        }
        let z1 = Fe::zero(&self.f);
        let z2 = Fe::zero(&o.f);
        let field = common_field_of(&[&z1, &z2]);
        (self.embed(&field), o.embed(&field))
    }

    /// Reduce the precision to at most `prec`.
    pub fn truncate(&self, prec: i64) -> Laurent {
        let mut l = self.clone();
        l.prec = l.prec.min(prec);
        l.clip();
        l.normalize();
        l
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        if !Arc::ptr_eq(&self.f, &o.f) {
            let (a, b) = self.align(o);
            return a.add(&b);
        }
        let prec = self.prec.min(o.prec);
        if o.c.is_empty() && o.prec >= self.prec {
            return self.clone();
        }
        if self.c.is_empty() && self.prec >= o.prec {
            return o.clone();
        }
        let lo = match (self.c.is_empty(), o.c.is_empty()) {
            (true, true) => prec.min(self.val.min(o.val)),
            (true, false) => o.val,
            (false, true) => self.val,
            (false, false) => self.val.min(o.val),
        };
        let hi_a = self.val + self.len() as i64;
        let hi_b = o.val + o.len() as i64;
        let mut hi = hi_a.max(hi_b);
        if prec != EXACT {
            hi = hi.min(prec);
        }
        let m = self.m();
        let p = self.f.characteristic();
        let count = (hi - lo).max(0) as usize;
        let mut c = vec![0u32; count * m];
        for (src, sv) in [(self, self.val), (o, o.val)] {
            for i in 0..src.len() {
                let k = sv + i as i64;
                if k < lo || k >= hi {
                    continue;
                }
                let dst = (k - lo) as usize * m;
                for (j, &x) in src.term_slice(i).iter().enumerate() {
                    let s = c[dst + j] + x;
                    c[dst + j] = if s >= p { s - p } else { s };
                }
            }
        }
        let mut l = Laurent {
            f: self.f.clone(),
            val: lo,
            c,
            prec,
        };
        l.normalize();
        l
    }

    pub fn neg(&self) -> Laurent {
        Laurent {
            f: self.f.clone(),
            val: self.val,
            c: self.f.neg_raw(&self.c),
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Laurent) -> Laurent {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Fe) -> Laurent {
        self.mul(&Laurent::constant(s))
    }

    pub fn shift(&self, k: i64) -> Laurent {
        Laurent {
            f: self.f.clone(),
            val: self.val + k,
            c: self.c.clone(),
            prec: add_prec(self.prec, k),
        }
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        if !Arc::ptr_eq(&self.f, &o.f) {
            let (a, b) = self.align(o);
            return a.mul(&b);
        }
        let va = self.valuation_lower_bound();
        let vb = o.valuation_lower_bound();
        let prec = match (self.prec == EXACT, o.prec == EXACT) {
            (true, true) => EXACT,
            (true, false) => {
                if self.c.is_empty() {
                    EXACT
                } else {
                    self.val.saturating_add(o.prec)
                }
            }
            (false, true) => {
                if o.c.is_empty() {
                    EXACT
                } else {
                    o.val.saturating_add(self.prec)
                }
            }
            (false, false) => va.saturating_add(o.prec).min(vb.saturating_add(self.prec)),
        };
        if self.c.is_empty() || o.c.is_empty() {
            return if prec == EXACT {
                Laurent::zero(&self.f)
            } else {
                Laurent::big_o(&self.f, prec)
            };
        }
        let val = self.val + o.val;
        let mut count = self.len() + o.len() - 1;
        if prec != EXACT {
            count = count.min((prec - val).max(0) as usize);
        }
        let m = self.m();
        let width = 2 * m - 1;
        let p = self.f.characteristic() as u64;
        let mut c = vec![0u32; count * m];
        let mut acc = vec![0u64; width];
        // bound on accumulated products before a reduction is needed
        let per = (m as u64) * (p - 1) * (p - 1);
        let limit = (u64::MAX / 2) / per.max(1);
        for k in 0..count {
            acc.iter_mut().for_each(|x| *x = 0);
            let i_lo = k.saturating_sub(o.len() - 1);
            let i_hi = k.min(self.len() - 1);
            let mut pending = 0u64;
            for i in i_lo..=i_hi {
                let a = self.term_slice(i);
                let b = o.term_slice(k - i);
                self.f.mul_acc(a, b, &mut acc);
                pending += 1;
                if pending >= limit {
                    acc.iter_mut().for_each(|x| *x %= p);
                    pending = 0;
                }
            }
            let r = if m == 1 {
                vec![(acc[0] % p) as u32]
            } else {
                self.f.reduce_wide(&mut acc)
            };
            c[k * m..(k + 1) * m].copy_from_slice(&r);
        }
        let mut l = Laurent {
            f: self.f.clone(),
            val,
            c,
            prec,
        };
        l.normalize();
        l
    }

    /// Multiplicative inverse. An exact input yields a series of relative
    /// precision `rel_if_exact`.
    pub fn inv(&self, rel_if_exact: usize) -> Result<Laurent> {
        if self.c.is_empty() {
            return Err(AswError::Inconsistent(
                "cannot invert a series with no known nonzero coefficient".into(),
            ));
        }
        let rel = if self.prec == EXACT {
            rel_if_exact as i64
        } else {
            self.prec - self.val
        };
        let n = rel.max(1) as usize;
        let m = self.m();
        let lead_inv = self.term(0).inv().unwrap();
        let mut out: Vec<Fe> = Vec::with_capacity(n);
        let terms: Vec<Fe> = (0..self.len().min(n)).map(|i| self.term(i)).collect();
        for k in 0..n {
            if k == 0 {
                out.push(lead_inv.clone());
                continue;
            }
            let mut s = Fe::zero(&self.f);
            for i in 1..=k.min(terms.len() - 1) {
                if !terms[i].is_zero() {
                    s = s.add(&terms[i].mul(&out[k - i]));
                }
            }
            out.push(s.mul(&lead_inv).neg());
        }
        let mut c = Vec::with_capacity(n * m);
        for t in &out {
            c.extend_from_slice(t.coeffs());
        }
        let mut l = Laurent {
            f: self.f.clone(),
            val: -self.val,
            c,
            prec: -self.val + n as i64,
        };
        l.normalize();
        Ok(l)
    }

    pub fn div(&self, o: &Laurent, rel_if_exact: usize) -> Result<Laurent> {
        Ok(self.mul(&o.inv(rel_if_exact)?))
    }

    /// `p`-th power through the Frobenius: coefficients to the `p`-th power, `t -> t^p`.
    pub fn frobenius_power(&self) -> Laurent {
        let p = self.f.characteristic() as i64;
        let m = self.m();
        let n = self.len();
        let count = if n == 0 { 0 } else { (n - 1) * p as usize + 1 };
        let mut c = vec![0u32; count * m];
        for i in 0..n {
            let t = self.f.frob_raw(self.term_slice(i));
            let k = i * p as usize;
            c[k * m..(k + 1) * m].copy_from_slice(&t);
        }
        let prec = if self.prec == EXACT { EXACT } else { self.prec * p };
        let val = if n == 0 { prec.min(self.val * p) } else { self.val * p };
        let mut l = Laurent {
            f: self.f.clone(),
            val,
            c,
            prec,
        };
        l.clip();
        l.normalize();
        l
    }

    /// Apply `x -> x^{p^k}` to every coefficient.
    pub fn map_coefficients_frobenius(&self, k: usize) -> Laurent {
        let mut out = self.clone();
        let m = self.m();
        for i in 0..self.len() {
            let t = self.term(i).frobenius(k);
            out.c[i * m..(i + 1) * m].copy_from_slice(t.coeffs());
        }
        out
    }

    /// Declare the series known up to `O(t^prec)`, padding with zero terms.
    pub fn assume_precision(&self, prec: i64) -> Laurent {
        let mut l = self.clone();
        l.prec = prec;
        l.clip();
        l.normalize();
        l
    }

    /// Formal derivative in `t`.
    pub fn derivative(&self) -> Laurent {
        let p = self.f.characteristic() as i64;
        let m = self.m();
        let mut c = vec![0u32; self.c.len()];
        for i in 0..self.len() {
            let k = self.val + i as i64;
            let factor = k.rem_euclid(p) as u32;
            if factor != 0 {
                let t = self.f.scale_raw(self.term_slice(i), factor);
                c[i * m..(i + 1) * m].copy_from_slice(&t);
            }
        }
        let mut l = Laurent {
            f: self.f.clone(),
            val: self.val - 1,
            c,
            prec: if self.prec == EXACT { EXACT } else { self.prec - 1 },
        };
        l.normalize();
        l
    }

    /// Coefficients of `t^{-s}, ..., t^{-1}`.
    pub fn principal_part(&self, s: usize) -> Result<Vec<Fe>> {
        if self.prec < 0 {
            return Err(AswError::Inconsistent(format!(
                "precision {} too low for a principal part",
                self.prec
            )));
        }
        if let Some(v) = self.valuation() {
            if v < -(s as i64) {
                return Err(AswError::Dimension(format!(
                    "pole of order {} exceeds requested principal-part length {s}",
                    -v
                )));
            }
        }
        Ok((1..=s as i64).rev().map(|k| self.coefficient(-k)).collect())
    }

    /// Coefficients of `t^k` for `lo <= k < hi`.
    pub fn coefficients(&self, lo: i64, hi: i64) -> Vec<Fe> {
        (lo..hi).map(|k| self.coefficient(k)).collect()
    }

    /// Substitute a series of positive valuation for the variable.
    pub fn compose(&self, inner: &Laurent, rel_if_exact: usize) -> Result<Laurent> {
        let v = inner.valuation().ok_or_else(|| {
            AswError::Inconsistent("composition with a series of unknown valuation".into())
        })?;
        if v <= 0 {
            return Err(AswError::Inconsistent("composition needs positive valuation".into()));
        }
        let (a, b) = self.align(inner);
        let mut acc = if a.prec == EXACT {
            Laurent::zero(&a.f)
        } else {
            // O(t^prec) composes to O(inner^prec)
            Laurent::big_o(&a.f, a.prec.saturating_mul(v))
        };
        if a.c.is_empty() {
            return Ok(acc);
        }
        let hi = a.val + a.len() as i64;
        let mut pw = if a.val >= 0 {
            pow_series(&b, a.val as u64)
        } else {
            pow_series(&b.inv(rel_if_exact)?, (-a.val) as u64)
        };
        for k in a.val..hi {
            let c = a.coefficient(k);
            if !c.is_zero() {
                acc = acc.add(&pw.scale(&c));
            }
            pw = pw.mul(&b);
        }
        Ok(acc)
    }
}

fn pow_series(s: &Laurent, e: u64) -> Laurent {
    let mut result = Laurent::one(&s.f);
    let mut base = s.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    result
}

impl Ring for Laurent {
    fn zero_like(&self) -> Self {
        Laurent::zero(&self.f)
    }
    fn one_like(&self) -> Self {
        Laurent::one(&self.f)
    }
    fn from_int_like(&self, n: &BigInt) -> Self {
        let p = BigInt::from(self.f.characteristic());
        let r = n.mod_floor(&p).to_u32().unwrap();
        Laurent::constant(&Fe::from_u32(&self.f, r))
    }
    fn from_small(&self, n: i64) -> Self {
        Laurent::constant(&Fe::from_i64(&self.f, n))
    }
    fn add(&self, o: &Self) -> Self {
        Laurent::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Laurent::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Laurent::mul(self, o)
    }
    fn neg(&self) -> Self {
        Laurent::neg(self)
    }
    fn is_zero(&self) -> bool {
        Laurent::is_zero(self)
    }
    fn characteristic(&self) -> u64 {
        self.f.characteristic() as u64
    }
    fn pow(&self, e: u64) -> Self {
        if e == self.f.characteristic() as u64 {
            return self.frobenius_power();
        }
        pow_series(self, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldLattice;

    #[test]
    fn inverse_of_one_plus_t() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(1).unwrap();
        let one = Fe::one(&f);
        let s = Laurent::from_terms(&f, 0, &[one.clone(), one.clone()], EXACT);
        let inv = s.inv(6).unwrap();
        let prod = s.mul(&inv);
        assert_eq!(prod.precision(), 6);
        assert!(prod.sub(&Laurent::one(&f)).is_zero());
    }

    #[test]
    fn principal_part_of_one_plus_t_over_t_squared() {
        let lat = FieldLattice::get(5).unwrap();
        let f = lat.field(1).unwrap();
        let one = Fe::one(&f);
        let s = Laurent::from_terms(&f, -2, &[one.clone(), one.clone()], EXACT);
        let pp = s.principal_part(2).unwrap();
        assert!(pp[0].is_one() && pp[1].is_one());
    }

    #[test]
    fn frobenius_power_matches_repeated_product() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(2).unwrap();
        let z = Fe::generator(&f);
        let s = Laurent::from_terms(&f, -1, &[z.clone(), Fe::one(&f), z.square()], 5);
        let a = s.frobenius_power();
        let b = s.mul(&s).mul(&s);
        assert_eq!(a.truncate(b.precision()), b);
    }
}
