//! Univariate polynomials over a single field of the lattice, with root finding
//! over the algebraic closure.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::field::{common_field_of, Fe, Field};

#[derive(Clone)]
pub struct UPoly {
    f: Arc<Field>,
    c: Vec<Fe>,
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_var("X"))
    }
}

impl PartialEq for UPoly {
    fn eq(&self, o: &UPoly) -> bool {
        self.c.len() == o.c.len() && self.c.iter().zip(&o.c).all(|(a, b)| a == b)
    }
}

impl Eq for UPoly {}

impl UPoly {
    pub fn new(field: &Arc<Field>, coeffs: Vec<Fe>) -> UPoly {
        let c = coeffs
            .into_iter()
            .map(|e| e.embed(field).expect("coefficient embeds"))
            .collect();
        let mut p = UPoly { f: field.clone(), c };
        p.trim();
        p
    }

    /// Build from coefficients that may live in different fields.
    pub fn from_coeffs(coeffs: Vec<Fe>) -> UPoly {
        assert!(!coeffs.is_empty(), "need at least one coefficient to fix the field");
        let refs: Vec<&Fe> = coeffs.iter().collect();
        let field = common_field_of(&refs);
        UPoly::new(&field, coeffs)
    }

    pub fn zero(field: &Arc<Field>) -> UPoly {
        UPoly {
            f: field.clone(),
            c: Vec::new(),
        }
    }

    pub fn one(field: &Arc<Field>) -> UPoly {
        UPoly::constant(Fe::one(field))
    }

    pub fn constant(c: Fe) -> UPoly {
        let f = c.field().clone();
        let mut p = UPoly { f, c: vec![c] };
        p.trim();
        p
    }

    pub fn x(field: &Arc<Field>) -> UPoly {
        UPoly::monomial(Fe::one(field), 1)
    }

    pub fn monomial(c: Fe, e: usize) -> UPoly {
        let f = c.field().clone();
        let mut v = vec![Fe::zero(&f); e];
        v.push(c);
        let mut p = UPoly { f, c: v };
        p.trim();
        p
    }

    /// `X - a`.
    pub fn linear(a: &Fe) -> UPoly {
        let f = a.field().clone();
        UPoly {
            c: vec![a.neg(), Fe::one(&f)],
            f,
        }
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.f
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.c.get(i).cloned().unwrap_or_else(|| Fe::zero(&self.f))
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn deg_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> Fe {
        self.c.last().cloned().unwrap_or_else(|| Fe::zero(&self.f))
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn embed(&self, field: &Arc<Field>) -> UPoly {
        if Arc::ptr_eq(&self.f, field) {
            return self.clone();
        }
        UPoly::new(field, self.c.clone())
    }

    fn align(&self, o: &UPoly) -> (UPoly, UPoly) {
        if Arc::ptr_eq(&self.f, &o.f) {
            return (self.clone(), o.clone());
        }
        let z1 = Fe::zero(&self.f);
        let z2 = Fe::zero(&o.f);
        let field = common_field_of(&[&z1, &z2]);
        (self.embed(&field), o.embed(&field))
    }

    pub fn add(&self, o: &UPoly) -> UPoly {
        if !Arc::ptr_eq(&self.f, &o.f) {
            let (a, b) = self.align(o);
            return a.add(&b);
        }
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            c.push(match (self.c.get(i), o.c.get(i)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        let mut p = UPoly { f: self.f.clone(), c };
        p.trim();
        p
    }

    pub fn neg(&self) -> UPoly {
        UPoly {
            f: self.f.clone(),
            c: self.c.iter().map(|x| x.neg()).collect(),
        }
    }

    pub fn sub(&self, o: &UPoly) -> UPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if !Arc::ptr_eq(&self.f, &o.f) {
            let (a, b) = self.align(o);
            return a.mul(&b);
        }
        if self.is_zero() || o.is_zero() {
            return UPoly::zero(&self.f);
        }
        let f = &self.f;
        let m = f.degree();
        let n = self.c.len() + o.c.len() - 1;
        let width = 2 * m - 1;
        let mut acc = vec![0u64; n * width];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = i + j;
                f.mul_acc(a.coeffs(), b.coeffs(), &mut acc[k * width..(k + 1) * width]);
            }
            // keep the accumulators below overflow
            if i % 1024 == 1023 {
                let p = f.characteristic() as u64;
                for v in acc.iter_mut() {
                    *v %= p;
                }
            }
        }
        let c = (0..n)
            .map(|k| {
                let v = f.reduce_wide(&mut acc[k * width..(k + 1) * width]);
                Fe::from_coeffs(f, v)
            })
            .collect();
        let mut p = UPoly { f: f.clone(), c };
        p.trim();
        p
    }

    pub fn scale(&self, s: &Fe) -> UPoly {
        if s.is_zero() {
            return UPoly::zero(&self.f);
        }
        let s = s.embed(&self.f).unwrap_or_else(|_| s.clone());
        if !Arc::ptr_eq(s.field(), &self.f) {
            let field = s.field().clone();
            return self.embed(&field).scale(&s);
        }
        let mut p = UPoly {
            f: self.f.clone(),
            c: self.c.iter().map(|x| x.mul(&s)).collect(),
        };
        p.trim();
        p
    }

    pub fn shift(&self, k: usize) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![Fe::zero(&self.f); k];
        c.extend(self.c.iter().cloned());
        UPoly { f: self.f.clone(), c }
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lead().inv().unwrap();
        self.scale(&inv)
    }

    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        if !Arc::ptr_eq(&self.f, &d.f) {
            let (a, b) = self.align(d);
            return a.divrem(&b);
        }
        assert!(!d.is_zero(), "polynomial division by zero");
        let f = self.f.clone();
        let mut r = self.c.clone();
        let dl = d.c.len();
        if r.len() < dl {
            return (UPoly::zero(&f), self.clone());
        }
        let inv = d.lead().inv().unwrap();
        let mut q = vec![Fe::zero(&f); r.len() - dl + 1];
        for k in (0..q.len()).rev() {
            let top = &r[k + dl - 1];
            if top.is_zero() {
                continue;
            }
            let c = top.mul(&inv);
            for (i, di) in d.c.iter().enumerate() {
                if !di.is_zero() {
                    r[k + i] = r[k + i].sub(&c.mul(di));
                }
            }
            q[k] = c;
        }
        r.truncate(dl - 1);
        let mut qp = UPoly { f: f.clone(), c: q };
        qp.trim();
        let mut rp = UPoly { f, c: r };
        rp.trim();
        (qp, rp)
    }

    pub fn rem(&self, d: &UPoly) -> UPoly {
        self.divrem(d).1
    }

    /// Exact quotient; panics if the division leaves a remainder.
    pub fn exact_div(&self, d: &UPoly) -> UPoly {
        let (q, r) = self.divrem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic gcd.
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = self.align(o);
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns (g, s, t) with s*self + t*o = g, g monic.
    pub fn xgcd(&self, o: &UPoly) -> (UPoly, UPoly, UPoly) {
        let (a, b) = self.align(o);
        let f = a.f.clone();
        let (mut r0, mut r1) = (a, b);
        let (mut s0, mut s1) = (UPoly::one(&f), UPoly::zero(&f));
        let (mut t0, mut t1) = (UPoly::zero(&f), UPoly::one(&f));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s2 = s0.sub(&q.mul(&s1));
            let t2 = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lead().inv().unwrap();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    pub fn eval(&self, x: &Fe) -> Fe {
        let mut acc = Fe::zero(&self.f);
        if !Arc::ptr_eq(x.field(), &self.f) {
            acc = Fe::zero(&common_field_of(&[x, &acc]));
        }
        for c in self.c.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn derivative(&self) -> UPoly {
        if self.c.len() <= 1 {
            return UPoly::zero(&self.f);
        }
        let c = self.c[1..]
            .iter()
            .enumerate()
            .map(|(i, x)| x.scale(((i + 1) as u64 % self.f.characteristic() as u64) as u32))
            .collect();
        let mut p = UPoly { f: self.f.clone(), c };
        p.trim();
        p
    }

    pub fn pow(&self, e: usize) -> UPoly {
        let mut result = UPoly::one(&self.f);
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

    /// Substitute `g` for the variable.
    pub fn compose(&self, g: &UPoly) -> UPoly {
        let mut acc = UPoly::zero(&self.f);
        for c in self.c.iter().rev() {
            acc = acc.mul(g).add(&UPoly::constant(c.clone()));
        }
        acc
    }

    /// Apply `x -> x^{p^k}` to every coefficient.
    pub fn frobenius_coeffs(&self, k: usize) -> UPoly {
        UPoly {
            f: self.f.clone(),
            c: self.c.iter().map(|x| x.frobenius(k)).collect(),
        }
    }

    pub fn to_string_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut terms = Vec::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = c.to_string();
            let cs = if cs.contains(" + ") { format!("({cs})") } else { cs };
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            terms.push(if mono.is_empty() {
                cs
            } else if c.is_one() {
                mono
            } else {
                format!("{cs}*{mono}")
            });
        }
        terms.join(" + ")
    }

    /// Distinct roots over the algebraic closure, each with its multiplicity,
    /// living in the splitting field of the polynomial.
    pub fn roots_with_multiplicity(&self) -> Result<Vec<(Fe, usize)>> {
        if self.degree().unwrap_or(0) == 0 {
            return Ok(Vec::new());
        }
        let k = self.splitting_degree();
        let lat = self.f.lattice();
        let target = lat.field(self.f.degree() * k)?;
        let lifted = self.embed(&target);
        let distinct = roots_in_single_field(&target, &lifted.c);
        let mut out = Vec::with_capacity(distinct.len());
        for r in distinct {
            let lin = UPoly::linear(&r);
            let mut cur = lifted.clone();
            let mut mult = 0;
            loop {
                let (q, rem) = cur.divrem(&lin);
                if !rem.is_zero() {
                    break;
                }
                mult += 1;
                cur = q;
            }
            out.push((r, mult));
        }
        Ok(out)
    }

    pub fn roots(&self) -> Result<Vec<Fe>> {
        Ok(self.roots_with_multiplicity()?.into_iter().map(|(r, _)| r).collect())
    }

    /// Degree over the coefficient field of the splitting field: the lcm of the
    /// degrees of the irreducible factors (distinct-degree factorisation).
    pub fn splitting_degree(&self) -> usize {
        let mut rest = self.monic();
        if rest.degree().unwrap_or(0) == 0 {
            return 1;
        }
        let m = self.f.degree();
        let x = UPoly::x(&self.f);
        let mut h = x.clone();
        let mut lcm = 1usize;
        let mut d = 0;
        while rest.degree().unwrap_or(0) > 0 {
            d += 1;
            let table = frobenius_table(&rest);
            h = h.rem(&rest);
            for _ in 0..m {
                h = apply_power_p(&h, &table, &rest);
            }
            let mut g = rest.gcd(&h.sub(&x));
            if g.degree().unwrap_or(0) > 0 {
                lcm = lcm.lcm(&d);
                while g.degree().unwrap_or(0) > 0 {
                    rest = rest.exact_div(&g);
                    g = rest.gcd(&g);
                }
            }
        }
        lcm
    }
}

/// `X^{p i} mod g` for `i < deg g`.
fn frobenius_table(g: &UPoly) -> Vec<UPoly> {
    let n = g.deg_or_zero();
    let f = g.field().clone();
    let p = f.characteristic() as usize;
    let xp = powmod_x(&f, p, g);
    let mut out = Vec::with_capacity(n);
    let mut cur = UPoly::one(&f).rem(g);
    for _ in 0..n {
        out.push(cur.clone());
        cur = cur.mul(&xp).rem(g);
    }
    out
}

fn powmod_x(f: &Arc<Field>, e: usize, g: &UPoly) -> UPoly {
    let mut result = UPoly::one(f).rem(g);
    let mut base = UPoly::x(f).rem(g);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base).rem(g);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base).rem(g);
        }
    }
    result
}

/// `a^p mod g` via the coefficient Frobenius and the table of `X^{p i}`.
fn apply_power_p(a: &UPoly, table: &[UPoly], g: &UPoly) -> UPoly {
    let f = g.field();
    let mut acc = UPoly::zero(f);
    for (i, c) in a.c.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&table[i].scale(&c.frobenius(1)));
    }
    acc.rem(g)
}

/// Distinct roots of `coeffs` that lie in `field` itself, sorted ascending.
pub(crate) fn roots_in_single_field(field: &Arc<Field>, coeffs: &[Fe]) -> Vec<Fe> {
    let f = UPoly::new(field, coeffs.to_vec()).monic();
    if f.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    // product of the distinct linear factors: gcd(f, X^Q - X)
    let table = frobenius_table(&f);
    let mut h = UPoly::x(field).rem(&f);
    for _ in 0..field.degree() {
        h = apply_power_p(&h, &table, &f);
    }
    let split = f.gcd(&h.sub(&UPoly::x(field)));
    let mut roots = Vec::new();
    let seed = field.degree() as u64 * 0x1000 + split.deg_or_zero() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    equal_degree_split(&split, &mut rng, &mut roots);
    roots.sort();
    roots
}

/// Split a squarefree product of distinct linear factors via absolute traces.
fn equal_degree_split(g: &UPoly, rng: &mut ChaCha8Rng, out: &mut Vec<Fe>) {
    let n = g.deg_or_zero();
    if n == 0 {
        return;
    }
    if n == 1 {
        out.push(g.coeff(0).neg());
        return;
    }
    let field = g.field().clone();
    let p = field.characteristic();
    let m = field.degree();
    let table = frobenius_table(g);
    loop {
        let b: Vec<u32> = (0..m).map(|_| rng.gen_range(0..p)).collect();
        let a: Vec<u32> = (0..m).map(|_| rng.gen_range(0..p)).collect();
        let lin = UPoly::new(
            &field,
            vec![Fe::from_coeffs(&field, a), Fe::from_coeffs(&field, b)],
        )
        .rem(g);
        // trace of lin to F_p, reduced mod g
        let mut t = lin.clone();
        let mut acc = lin;
        for _ in 1..m {
            t = apply_power_p(&t, &table, g);
            acc = acc.add(&t);
        }
        let mut parts = Vec::new();
        let mut covered = 0;
        for c in 0..p {
            if covered == n {
                break;
            }
            let shifted = acc.sub(&UPoly::constant(Fe::from_u32(&field, c)));
            let part = g.gcd(&shifted);
            let d = part.deg_or_zero();
            if d > 0 {
                covered += d;
                parts.push(part);
            }
        }
        if parts.len() > 1 {
            for part in parts {
                equal_degree_split(&part, rng, out);
            }
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldLattice;

    #[test]
    fn division_identity() {
        let lat = FieldLattice::get(5).unwrap();
        let f = lat.field(2).unwrap();
        let z = Fe::generator(&f);
        let a = UPoly::new(&f, vec![z.clone(), Fe::one(&f), z.square(), Fe::from_u32(&f, 3)]);
        let b = UPoly::new(&f, vec![Fe::from_u32(&f, 2), z.clone()]);
        let (q, r) = a.divrem(&b);
        assert_eq!(q.mul(&b).add(&r), a);
    }

    #[test]
    fn roots_of_x2_plus_x_plus_1_over_f2() {
        let lat = FieldLattice::get(2).unwrap();
        let f = lat.field(1).unwrap();
        let one = Fe::one(&f);
        let poly = UPoly::new(&f, vec![one.clone(), one.clone(), one]);
        assert_eq!(poly.splitting_degree(), 2);
        let roots = poly.roots().unwrap();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert!(poly.eval(&r).is_zero());
            assert_eq!(r.degree(), 2);
        }
    }

    #[test]
    fn multiplicities() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(1).unwrap();
        let a = Fe::from_u32(&f, 1);
        let lin = UPoly::linear(&a);
        let poly = lin.pow(3).mul(&UPoly::linear(&Fe::from_u32(&f, 2)));
        let roots = poly.roots_with_multiplicity().unwrap();
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0].1, 3);
        assert_eq!(roots[1].1, 1);
    }
}
