//! p-typical truncated Witt vectors over an arbitrary coefficient ring.
//!
//! The universal sum and negation polynomials are derived once per `(p, n)` from
//! the ghost components with exact integer division. Multiplication is reduced to
//! sums through `V^i[a] * V^j[b] = p^i V^j[a^{p^{j-i}} b]` for `i <= j`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{AswError, Result};
use crate::intpoly::{CompiledPoly, IntPoly, MAX_VARS};
use crate::ring::Ring;

pub const MAX_LENGTH: usize = MAX_VARS / 2;

/// Universal polynomials for `W_n` at the prime `p`.
///
/// Sum, carry, negation and product polynomials use the interleaved variable order
/// `X_0, Y_0, X_1, Y_1, ...` (variable `2i` is `X_i`, `2i + 1` is `Y_i`). The lift
/// polynomial `P_m` uses the same layout with `x_i, y_i`. The universal tower part
/// `Q_j` is a polynomial in `t_0, ..., t_{j-1}` (variable `i` is `t_i`).
pub struct WittStructure {
    pub p: u32,
    pub n: usize,
    pub sum: Vec<IntPoly>,
    pub carry: Vec<IntPoly>,
    pub neg: Vec<IntPoly>,
    carry_int: Vec<CompiledPoly>,
    neg_int: Vec<CompiledPoly>,
    carry_mod_p: Vec<CompiledPoly>,
    neg_mod_p: Vec<CompiledPoly>,
    product: OnceLock<Vec<IntPoly>>,
    lift: OnceLock<Vec<IntPoly>>,
    universal: OnceLock<Vec<IntPoly>>,
}

impl fmt::Debug for WittStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WittStructure(p={}, n={})", self.p, self.n)
    }
}

type Cache = Mutex<HashMap<(u32, usize), Arc<WittStructure>>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

fn ghost_component(p: u32, k: usize, var_of: impl Fn(usize) -> usize) -> IntPoly {
    let mut g = IntPoly::zero();
    for j in 0..=k {
        let coef = BigInt::from(p).pow(j as u32);
        let e = p.pow((k - j) as u32);
        g = g.add(&IntPoly::var(var_of(j)).pow(e).scale(&coef));
    }
    g
}

/// Solve the ghost recursion `sum_{j<=k} p^j Z_j^{p^{k-j}} = targets[k]` for `Z`.
fn ghost_invert(p: u32, targets: &[IntPoly]) -> Vec<IntPoly> {
    let mut out: Vec<IntPoly> = Vec::with_capacity(targets.len());
    // powers[j][e] = Z_j^{p^e}
    let mut powers: Vec<Vec<IntPoly>> = Vec::new();
    for (k, target) in targets.iter().enumerate() {
        let mut acc = target.clone();
        for j in 0..k {
            while powers[j].len() <= k - j {
                let next = powers[j].last().unwrap().pow(p);
                powers[j].push(next);
            }
            let coef = BigInt::from(p).pow(j as u32);
            acc = acc.sub(&powers[j][k - j].scale(&coef));
        }
        let z = acc.div_exact(&BigInt::from(p).pow(k as u32));
        powers.push(vec![z.clone()]);
        out.push(z);
    }
    out
}

/// Structure polynomials for `(p, n)`, computed once and cached.
pub fn structure(p: u32, n: usize) -> Result<Arc<WittStructure>> {
    if n == 0 || n > MAX_LENGTH {
        return Err(AswError::Unsupported(format!(
            "Witt length {n} outside the supported range 1..={MAX_LENGTH}"
        )));
    }
    if (p as u64).pow(n as u32) > u16::MAX as u64 {
        return Err(AswError::Unsupported(format!(
            "p^n = {p}^{n} exceeds the exponent range of the structure polynomials"
        )));
    }
    if let Some(s) = cache().lock().unwrap().get(&(p, n)) {
        return Ok(s.clone());
    }
    let s = Arc::new(build_structure(p, n));
    cache().lock().unwrap().insert((p, n), s.clone());
    Ok(s)
}

fn build_structure(p: u32, n: usize) -> WittStructure {
    let gx: Vec<IntPoly> = (0..n).map(|k| ghost_component(p, k, |j| 2 * j)).collect();
    let gy: Vec<IntPoly> = (0..n).map(|k| ghost_component(p, k, |j| 2 * j + 1)).collect();
    let sum_targets: Vec<IntPoly> = gx.iter().zip(&gy).map(|(a, b)| a.add(b)).collect();
    let sum = ghost_invert(p, &sum_targets);
    let carry: Vec<IntPoly> = sum
        .iter()
        .enumerate()
        .map(|(k, s)| s.sub(&IntPoly::var(2 * k)).sub(&IntPoly::var(2 * k + 1)))
        .collect();
    let neg = if p == 2 {
        let targets: Vec<IntPoly> = gx.iter().map(|g| g.neg()).collect();
        ghost_invert(p, &targets)
    } else {
        (0..n).map(|k| IntPoly::var(2 * k).neg()).collect()
    };
    let carry_int = carry.iter().map(|c| c.compile(0)).collect();
    let neg_int = neg.iter().map(|c| c.compile(0)).collect();
    let carry_mod_p = carry.iter().map(|c| c.compile(p as u64)).collect();
    let neg_mod_p = neg.iter().map(|c| c.compile(p as u64)).collect();

    WittStructure {
        p,
        n,
        sum,
        carry,
        neg,
        carry_int,
        neg_int,
        carry_mod_p,
        neg_mod_p,
        product: OnceLock::new(),
        lift: OnceLock::new(),
        universal: OnceLock::new(),
    }
}

impl WittStructure {
    /// Lift polynomials `P_0..P_{n-1}`: `P_m` is the last coordinate of
    /// `(x^p, 0) - (x, 0) - (y, 0)` in `W_{m+1}` over the integers.
    pub fn lift(&self) -> &[IntPoly] {
        self.lift.get_or_init(|| {
            let p = self.p;
            let mut lift = vec![IntPoly::zero()];
            for m in 1..self.n {
                let xs: Vec<IntPoly> = (0..m).map(|i| IntPoly::var(2 * i)).collect();
                let ys: Vec<IntPoly> = (0..m).map(|i| IntPoly::var(2 * i + 1)).collect();
                let mut a: Vec<IntPoly> = xs.iter().map(|x| x.pow(p)).collect();
                a.push(IntPoly::zero());
                let mut b = xs.clone();
                b.push(IntPoly::zero());
                let mut c = ys.clone();
                c.push(IntPoly::zero());
                let nb = neg_with(&self.neg_int, &b, p);
                let nc = neg_with(&self.neg_int, &c, p);
                let r = add_with(&self.carry_int, &add_with(&self.carry_int, &a, &nb), &nc);
                lift.push(r[m].clone());
            }
            lift
        })
    }

    /// Universal tower parts `Q_j(t) = P_j(t_{<j}, wp(t)_{<j})`, so that
    /// `wp(t)_j = t_j^p - t_j + Q_j(t_{<j})`.
    pub fn universal(&self) -> &[IntPoly] {
        self.universal.get_or_init(|| {
            let p = self.p;
            let lift = self.lift();
            let mut universal = vec![IntPoly::zero()];
            for j in 1..self.n {
                let mut subs = Vec::with_capacity(2 * j);
                for i in 0..j {
                    let t = IntPoly::var(i);
                    let y = t.pow(p).sub(&t).add(&universal[i]);
                    subs.push(t);
                    subs.push(y);
                }
                universal.push(lift[j].substitute(&subs));
            }
            universal
        })
    }

    /// Product polynomials (ghost-derived; expensive for large `p^n`).
    pub fn product(&self) -> &[IntPoly] {
        self.product.get_or_init(|| {
            let gx: Vec<IntPoly> =
                (0..self.n).map(|k| ghost_component(self.p, k, |j| 2 * j)).collect();
            let gy: Vec<IntPoly> =
                (0..self.n).map(|k| ghost_component(self.p, k, |j| 2 * j + 1)).collect();
            let targets: Vec<IntPoly> = gx.iter().zip(&gy).map(|(a, b)| a.mul(b)).collect();
            ghost_invert(self.p, &targets)
        })
    }
}

fn interleave<R: Ring>(x: &[R], y: &[R], upto: usize) -> Vec<R> {
    let mut v = Vec::with_capacity(2 * upto);
    for i in 0..upto {
        v.push(x[i].clone());
        v.push(y[i].clone());
    }
    v
}

fn add_with<R: Ring>(carry: &[CompiledPoly], x: &[R], y: &[R]) -> Vec<R> {
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut c = x[k].add(&y[k]);
        if k > 0 && !carry[k].is_zero() {
            let vals = interleave(x, y, k);
            c = c.add(&carry[k].eval(&vals));
        }
        out.push(c);
    }
    out
}

fn neg_with<R: Ring>(neg: &[CompiledPoly], x: &[R], p: u32) -> Vec<R> {
    if p != 2 {
        return x.iter().map(|v| v.neg()).collect();
    }
    let n = x.len();
    (0..n)
        .map(|k| {
            let zero = x[0].zero_like();
            let vals: Vec<R> = (0..=k).flat_map(|i| [x[i].clone(), zero.clone()]).collect();
            neg[k].eval(&vals)
        })
        .collect()
}

/// A Witt vector of fixed length over the ring `R`.
#[derive(Clone, PartialEq)]
pub struct WittVector<R> {
    p: u32,
    c: Vec<R>,
}

impl<R: Ring> fmt::Debug for WittVector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.c)
    }
}

impl<R: Ring + fmt::Display> fmt::Display for WittVector<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.c.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl<R: Ring> WittVector<R> {
    pub fn new(p: u32, coords: Vec<R>) -> WittVector<R> {
        assert!(!coords.is_empty(), "Witt vectors need at least one coordinate");
        WittVector { p, c: coords }
    }

    pub fn zero(p: u32, n: usize, like: &R) -> WittVector<R> {
        WittVector {
            p,
            c: vec![like.zero_like(); n],
        }
    }

    pub fn one(p: u32, n: usize, like: &R) -> WittVector<R> {
        WittVector::teichmuller(p, n, &like.one_like())
    }

    /// The Teichmüller lift `(a, 0, ..., 0)`.
    pub fn teichmuller(p: u32, n: usize, a: &R) -> WittVector<R> {
        let mut c = vec![a.zero_like(); n];
        c[0] = a.clone();
        WittVector { p, c }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn coords(&self) -> &[R] {
        &self.c
    }

    pub fn into_coords(self) -> Vec<R> {
        self.c
    }

    pub fn coord(&self, i: usize) -> &R {
        &self.c[i]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn truncate(&self, m: usize) -> WittVector<R> {
        WittVector {
            p: self.p,
            c: self.c[..m].to_vec(),
        }
    }

    /// Append zero coordinates up to length `n`.
    pub fn extend_zero(&self, n: usize) -> WittVector<R> {
        let mut c = self.c.clone();
        let z = c[0].zero_like();
        c.resize(n, z);
        WittVector { p: self.p, c }
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> WittVector<S> {
        WittVector {
            p: self.p,
            c: self.c.iter().map(f).collect(),
        }
    }

    fn check(&self, o: &WittVector<R>) -> Result<Arc<WittStructure>> {
        if self.p != o.p {
            return Err(AswError::Characteristic(format!(
                "Witt primes {} and {} differ",
                self.p, o.p
            )));
        }
        if self.c.len() != o.c.len() {
            return Err(AswError::Dimension(format!(
                "Witt lengths {} and {} differ",
                self.c.len(),
                o.c.len()
            )));
        }
        self.check_char()?;
        structure(self.p, self.c.len())
    }

    fn check_char(&self) -> Result<()> {
        let ch = self.c[0].characteristic();
        if ch != 0 && ch != self.p as u64 {
            return Err(AswError::Characteristic(format!(
                "coefficient ring of characteristic {ch} for Witt prime {}",
                self.p
            )));
        }
        Ok(())
    }

    fn char_p(&self) -> bool {
        self.c[0].characteristic() == self.p as u64
    }

    pub fn try_add(&self, o: &WittVector<R>) -> Result<WittVector<R>> {
        let s = self.check(o)?;
        if o.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(o.clone());
        }
        let carry = if self.char_p() { &s.carry_mod_p } else { &s.carry_int };
        Ok(WittVector {
            p: self.p,
            c: add_with(carry, &self.c, &o.c),
        })
    }

    /// Sum; panics on mismatched prime, length, or characteristic.
    pub fn add(&self, o: &WittVector<R>) -> WittVector<R> {
        self.try_add(o).expect("Witt addition")
    }

    pub fn try_neg(&self) -> Result<WittVector<R>> {
        self.check_char()?;
        let s = structure(self.p, self.c.len())?;
        let neg = if self.char_p() { &s.neg_mod_p } else { &s.neg_int };
        Ok(WittVector {
            p: self.p,
            c: neg_with(neg, &self.c, self.p),
        })
    }

    pub fn neg(&self) -> WittVector<R> {
        self.try_neg().expect("Witt negation")
    }

    pub fn sub(&self, o: &WittVector<R>) -> WittVector<R> {
        self.add(&o.neg())
    }

    /// Componentwise `p`-th power; defined for coefficient rings of characteristic `p`.
    pub fn try_frobenius(&self) -> Result<WittVector<R>> {
        if !self.char_p() {
            return Err(AswError::Characteristic(
                "Frobenius needs a coefficient ring of characteristic p".into(),
            ));
        }
        Ok(WittVector {
            p: self.p,
            c: self.c.iter().map(|x| x.pow(self.p as u64)).collect(),
        })
    }

    pub fn frobenius(&self) -> WittVector<R> {
        self.try_frobenius().expect("Witt Frobenius")
    }

    /// Frobenius given an explicit `p`-th power map on coordinates.
    pub fn frobenius_with(&self, f: impl Fn(&R) -> R) -> WittVector<R> {
        WittVector {
            p: self.p,
            c: self.c.iter().map(f).collect(),
        }
    }

    pub fn verschiebung(&self) -> WittVector<R> {
        let n = self.c.len();
        let mut c = Vec::with_capacity(n);
        c.push(self.c[0].zero_like());
        c.extend(self.c[..n - 1].iter().cloned());
        WittVector { p: self.p, c }
    }

    /// `F - id`.
    pub fn wp(&self) -> WittVector<R> {
        self.frobenius().sub(self)
    }

    /// Multiplication by the integer `k`.
    pub fn int_mul(&self, k: &BigInt) -> WittVector<R> {
        let mut acc = WittVector::zero(self.p, self.c.len(), &self.c[0]);
        let mut base = if k.is_negative() { self.neg() } else { self.clone() };
        let mut e = k.abs();
        let two = BigInt::from(2);
        while !Zero::is_zero(&e) {
            if (&e % &two).is_one() {
                acc = acc.add(&base);
            }
            e /= &two;
            if !Zero::is_zero(&e) {
                base = base.add(&base);
            }
        }
        acc
    }

    fn times_p_power(&self, i: usize) -> WittVector<R> {
        if i == 0 {
            return self.clone();
        }
        if self.char_p() {
            let mut v = self.clone();
            for _ in 0..i {
                v = v.frobenius().verschiebung();
            }
            v
        } else {
            self.int_mul(&BigInt::from(self.p).pow(i as u32))
        }
    }

    pub fn try_mul(&self, o: &WittVector<R>) -> Result<WittVector<R>> {
        self.check(o)?;
        let n = self.c.len();
        let p = self.p as u64;
        let like = &self.c[0];
        let mut acc = WittVector::zero(self.p, n, like);
        for i in 0..n {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if o.c[j].is_zero() {
                    continue;
                }
                let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
                if self.char_p() && lo + hi >= n {
                    continue;
                }
                let (a, b) = if i <= j { (&self.c[i], &o.c[j]) } else { (&o.c[j], &self.c[i]) };
                let coef = a.pow(p.pow((hi - lo) as u32)).mul(b);
                let mut t = vec![like.zero_like(); n];
                t[hi] = coef;
                let term = WittVector { p: self.p, c: t }.times_p_power(lo);
                acc = acc.add(&term);
            }
        }
        Ok(acc)
    }

    pub fn mul(&self, o: &WittVector<R>) -> WittVector<R> {
        self.try_mul(o).expect("Witt multiplication")
    }

    /// Multiply by an element of `W_n(F_p)` given by its coordinates.
    pub fn scale_fp(&self, alpha: &[u32]) -> WittVector<R> {
        let like = &self.c[0];
        let a = WittVector {
            p: self.p,
            c: alpha.iter().map(|&x| like.from_small(x as i64)).collect(),
        };
        a.mul(self)
    }
}

/// Integer `k mod p^n` as a Witt vector over `F_p` (coordinates in `[0, p)`).
pub fn int_to_witt_fp(p: u32, n: usize, k: &BigInt) -> Vec<u32> {
    // iterative digit extraction: k = sum V^i [a_i] with Teichmüller digits a_i = a_i^p in F_p
    let modulus = BigInt::from(p).pow(n as u32);
    let mut rest = ((k % &modulus) + &modulus) % &modulus;
    let mut out = vec![0u32; n];
    // In W_n(F_p), V^i[a] corresponds to p^i * teich(a), and teich(a) = a^{p^{n-1}} mod p^n
    for (i, slot) in out.iter_mut().enumerate() {
        let pi = BigInt::from(p).pow(i as u32);
        let digit = ((&rest / &pi) % BigInt::from(p)).to_string().parse::<u32>().unwrap();
        *slot = digit;
        if digit != 0 {
            let teich = BigInt::from(digit).modpow(&BigInt::from(p).pow((n - 1) as u32), &modulus);
            rest = ((&rest - teich * &pi) % &modulus + &modulus) % &modulus;
        }
    }
    out
}

/// Inverse of [`int_to_witt_fp`].
pub fn witt_fp_to_int(p: u32, coords: &[u32]) -> BigInt {
    let n = coords.len();
    let modulus = BigInt::from(p).pow(n as u32);
    let mut acc = BigInt::zero();
    for (i, &a) in coords.iter().enumerate() {
        let teich = BigInt::from(a).modpow(&BigInt::from(p).pow((n - 1) as u32), &modulus);
        acc += teich * BigInt::from(p).pow(i as u32);
    }
    acc % modulus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intpoly::FpPoly;

    #[test]
    fn first_sum_polynomial_is_linear() {
        for p in [2, 3, 5] {
            let s = structure(p, 2).unwrap();
            assert_eq!(s.sum[0], IntPoly::var(0).add(&IntPoly::var(1)));
        }
    }

    #[test]
    fn carry_polynomials_avoid_top_variables() {
        let s = structure(3, 3).unwrap();
        for (k, r) in s.carry.iter().enumerate() {
            assert!(!r.involves(2 * k) && !r.involves(2 * k + 1));
        }
    }

    #[test]
    fn wp_second_coordinate_for_p3() {
        let p = 3;
        let t = WittVector::new(p, vec![FpPoly::var(0, 3), FpPoly::var(1, 3)]);
        let w = t.wp();
        let t0 = IntPoly::var(0);
        let t1 = IntPoly::var(1);
        let expect = t1.pow(3).sub(&t1).add(&t0.pow(7)).sub(&t0.pow(5));
        assert_eq!(w.coord(1).poly, expect.reduce_mod(3));
    }

    #[test]
    fn integer_witt_round_trip() {
        for k in 0..27 {
            let w = int_to_witt_fp(3, 3, &BigInt::from(k));
            assert_eq!(witt_fp_to_int(3, &w), BigInt::from(k));
        }
    }
}
