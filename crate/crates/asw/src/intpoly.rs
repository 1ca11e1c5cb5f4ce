//! Sparse multivariate polynomials with integer coefficients in at most eight variables.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ring::Ring;

pub const MAX_VARS: usize = 8;
const BITS: u32 = 16;

pub type Exponents = [u16; MAX_VARS];

pub fn pack(e: &Exponents) -> u128 {
    e.iter()
        .enumerate()
        .fold(0u128, |acc, (i, &x)| acc | ((x as u128) << (BITS * i as u32)))
}

pub fn unpack(k: u128) -> Exponents {
    let mut e = [0u16; MAX_VARS];
    for (i, slot) in e.iter_mut().enumerate() {
        *slot = ((k >> (BITS * i as u32)) & 0xffff) as u16;
    }
    e
}

#[derive(Clone, Default, PartialEq, Eq)]
pub struct IntPoly {
    terms: HashMap<u128, BigInt>,
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..MAX_VARS).map(|i| format!("v{i}")).collect();
        write!(f, "{}", self.display(&names))
    }
}

impl IntPoly {
    pub fn zero() -> IntPoly {
        IntPoly::default()
    }

    pub fn constant<T: Into<BigInt>>(c: T) -> IntPoly {
        let c = c.into();
        let mut terms = HashMap::new();
        if !Zero::is_zero(&c) {
            terms.insert(0u128, c);
        }
        IntPoly { terms }
    }

    pub fn one() -> IntPoly {
        IntPoly::constant(1)
    }

    pub fn var(i: usize) -> IntPoly {
        IntPoly::monomial(BigInt::one(), &{
            let mut e = [0u16; MAX_VARS];
            e[i] = 1;
            e
        })
    }

    pub fn monomial(c: BigInt, e: &Exponents) -> IntPoly {
        let mut terms = HashMap::new();
        if !Zero::is_zero(&c) {
            terms.insert(pack(e), c);
        }
        IntPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponents, &BigInt)> {
        self.terms.iter().map(|(&k, c)| (unpack(k), c))
    }

    /// Terms sorted by total degree descending, then exponent vector descending.
    pub fn sorted_terms(&self) -> Vec<(Exponents, BigInt)> {
        let mut v: Vec<(Exponents, BigInt)> =
            self.terms.iter().map(|(&k, c)| (unpack(k), c.clone())).collect();
        v.sort_by(|a, b| {
            let da: u32 = a.0.iter().map(|&x| x as u32).sum();
            let db: u32 = b.0.iter().map(|&x| x as u32).sum();
            db.cmp(&da).then_with(|| b.0.cmp(&a.0))
        });
        v
    }

    pub fn coefficient(&self, e: &Exponents) -> BigInt {
        self.terms.get(&pack(e)).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, k: u128, c: BigInt) {
        if Zero::is_zero(&c) {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(k) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if Zero::is_zero(o.get()) {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, o: &IntPoly) -> IntPoly {
        let (big, small) = if self.terms.len() >= o.terms.len() { (self, o) } else { (o, self) };
        let mut out = big.clone();
        for (&k, c) in &small.terms {
            out.add_term(k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly {
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &IntPoly) -> IntPoly {
        let mut out = self.clone();
        for (&k, c) in &o.terms {
            out.add_term(k, -c);
        }
        out
    }

    pub fn mul(&self, o: &IntPoly) -> IntPoly {
        let mut out = IntPoly::zero();
        if self.is_zero() || o.is_zero() {
            return out;
        }
        out.terms.reserve(self.terms.len() * o.terms.len() / 2 + 1);
        for (&k1, c1) in &self.terms {
            for (&k2, c2) in &o.terms {
                out.add_term(k1 + k2, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> IntPoly {
        let mut result = IntPoly::one();
        let mut base = self.clone();
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

    pub fn scale(&self, s: &BigInt) -> IntPoly {
        if Zero::is_zero(s) {
            return IntPoly::zero();
        }
        IntPoly {
            terms: self.terms.iter().map(|(&k, c)| (k, c * s)).collect(),
        }
    }

    /// Divide every coefficient by `d`; panics when some coefficient is not divisible.
    pub fn div_exact(&self, d: &BigInt) -> IntPoly {
        IntPoly {
            terms: self
                .terms
                .iter()
                .map(|(&k, c)| {
                    let (q, r) = c.div_rem(d);
                    assert!(Zero::is_zero(&r), "inexact coefficient division");
                    (k, q)
                })
                .collect(),
        }
    }

    /// Coefficients reduced into `[0, m)`, zero terms dropped.
    pub fn reduce_mod(&self, m: u64) -> IntPoly {
        let mb = BigInt::from(m);
        let mut terms = HashMap::new();
        for (&k, c) in &self.terms {
            let r = c.mod_floor(&mb);
            if !Zero::is_zero(&r) {
                terms.insert(k, r);
            }
        }
        IntPoly { terms }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|&k| unpack(k).iter().map(|&x| x as u32).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|&k| unpack(k)[var] as u32).max().unwrap_or(0)
    }

    pub fn involves(&self, var: usize) -> bool {
        self.degree_in(var) > 0
    }

    /// Set the listed variables to zero.
    pub fn kill_vars(&self, vars: &[usize]) -> IntPoly {
        IntPoly {
            terms: self
                .terms
                .iter()
                .filter(|(&k, _)| {
                    let e = unpack(k);
                    vars.iter().all(|&v| e[v] == 0)
                })
                .map(|(&k, c)| (k, c.clone()))
                .collect(),
        }
    }

    /// Substitute polynomials for variables (`subs[i]` replaces variable `i`).
    pub fn substitute(&self, subs: &[IntPoly]) -> IntPoly {
        self.eval(subs)
    }

    /// Evaluate at ring elements, caching variable powers.
    pub fn eval<R: Ring>(&self, vals: &[R]) -> R {
        self.compile(vals[0].characteristic()).eval(vals)
    }

    /// Sorted term list with coefficients reduced for rings of characteristic `char`.
    pub fn compile(&self, char: u64) -> CompiledPoly {
        let mut keys: Vec<&u128> = self.terms.keys().collect();
        keys.sort();
        let mut terms = Vec::with_capacity(keys.len());
        for k in keys {
            let c = &self.terms[k];
            let coef = if char > 0 { c.mod_floor(&BigInt::from(char)) } else { c.clone() };
            if Zero::is_zero(&coef) {
                continue;
            }
            let e = unpack(*k);
            let vars = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| (i, x as usize))
                .collect();
            terms.push(CompiledTerm {
                small: coef.to_i64(),
                coef,
                vars,
            });
        }
        CompiledPoly { char, terms }
    }

    /// Render using the given variable names.
    pub fn display(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| {
                    if x == 1 {
                        names[i].clone()
                    } else {
                        format!("{}^{}", names[i], x)
                    }
                })
                .collect();
            let body = if mono.is_empty() {
                abs.to_string()
            } else if abs.is_one() {
                mono.join("*")
            } else {
                format!("{}*{}", abs, mono.join("*"))
            };
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

struct CompiledTerm {
    coef: BigInt,
    small: Option<i64>,
    vars: Vec<(usize, usize)>,
}

/// An [`IntPoly`] prepared for repeated evaluation in one characteristic.
pub struct CompiledPoly {
    char: u64,
    terms: Vec<CompiledTerm>,
}

impl CompiledPoly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval<R: Ring>(&self, vals: &[R]) -> R {
        let like = &vals[0];
        debug_assert_eq!(like.characteristic(), self.char);
        let mut powers: Vec<Vec<R>> = vals.iter().map(|v| vec![v.one_like(), v.clone()]).collect();
        let zero: Vec<bool> = vals.iter().map(|v| v.is_zero()).collect();
        let mut acc = like.zero_like();
        for t in &self.terms {
            if t.vars.iter().any(|&(i, _)| zero[i]) {
                continue;
            }
            let mut term: Option<R> = None;
            for &(i, e) in &t.vars {
                let pw = power_cached(&mut powers[i], e);
                term = Some(match term {
                    None => pw,
                    Some(x) => x.mul(&pw),
                });
            }
            let cterm = || match t.small {
                Some(small) => like.from_small(small),
                None => like.from_int_like(&t.coef),
            };
            let value = match term {
                None => cterm(),
                Some(x) if t.coef.is_one() => x,
                Some(x) => x.mul(&cterm()),
            };
            acc = acc.add(&value);
        }
        acc
    }
}

fn power_cached<R: Ring>(cache: &mut Vec<R>, e: usize) -> R {
    while cache.len() <= e {
        let next = cache.last().unwrap().mul(&cache[1]);
        cache.push(next);
    }
    cache[e].clone()
}

impl Ring for IntPoly {
    fn zero_like(&self) -> Self {
        IntPoly::zero()
    }
    fn one_like(&self) -> Self {
        IntPoly::one()
    }
    fn from_int_like(&self, n: &BigInt) -> Self {
        IntPoly::constant(n.clone())
    }
    fn add(&self, o: &Self) -> Self {
        IntPoly::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        IntPoly::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        IntPoly::mul(self, o)
    }
    fn neg(&self) -> Self {
        IntPoly::neg(self)
    }
    fn is_zero(&self) -> bool {
        IntPoly::is_zero(self)
    }
    fn characteristic(&self) -> u64 {
        0
    }
}

/// Integer polynomials taken modulo a prime: the polynomial ring `F_p[v0..v7]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpPoly {
    pub poly: IntPoly,
    pub p: u64,
}

impl FpPoly {
    pub fn new(poly: IntPoly, p: u64) -> FpPoly {
        FpPoly {
            poly: poly.reduce_mod(p),
            p,
        }
    }

    pub fn var(i: usize, p: u64) -> FpPoly {
        FpPoly::new(IntPoly::var(i), p)
    }
}

impl Ring for FpPoly {
    fn zero_like(&self) -> Self {
        FpPoly::new(IntPoly::zero(), self.p)
    }
    fn one_like(&self) -> Self {
        FpPoly::new(IntPoly::one(), self.p)
    }
    fn from_int_like(&self, n: &BigInt) -> Self {
        FpPoly::new(IntPoly::constant(n.clone()), self.p)
    }
    fn add(&self, o: &Self) -> Self {
        FpPoly::new(self.poly.add(&o.poly), self.p)
    }
    fn sub(&self, o: &Self) -> Self {
        FpPoly::new(self.poly.sub(&o.poly), self.p)
    }
    fn mul(&self, o: &Self) -> Self {
        FpPoly::new(self.poly.mul(&o.poly), self.p)
    }
    fn neg(&self) -> Self {
        FpPoly::new(self.poly.neg(), self.p)
    }
    fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
    fn characteristic(&self) -> u64 {
        self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_square() {
        let x = IntPoly::var(0);
        let y = IntPoly::var(1);
        let s = x.add(&y).pow(2);
        let expect = x.mul(&x).add(&x.mul(&y).scale(&BigInt::from(2))).add(&y.mul(&y));
        assert_eq!(s, expect);
    }

    #[test]
    fn display_order() {
        let x = IntPoly::var(0);
        let p = x.pow(3).neg().add(&x).add(&IntPoly::constant(2));
        let names = vec!["t".to_string()];
        assert_eq!(p.display(&names), "-t^3 + t + 2");
    }
}
