//! Bivariate polynomials `sum_i a_i(x) y^i` stored by powers of `y`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{AswError, Result};
use crate::expr::{self, ExprTarget};
use crate::field::{common_field_of, Fe, Field, FieldLattice};
use crate::laurent::Laurent;
use crate::upoly::UPoly;

#[derive(Clone)]
pub struct BiPoly {
    f: Arc<Field>,
    rows: Vec<UPoly>,
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl PartialEq for BiPoly {
    fn eq(&self, o: &BiPoly) -> bool {
        self.rows.len() == o.rows.len() && self.rows.iter().zip(&o.rows).all(|(a, b)| a == b)
    }
}

impl Eq for BiPoly {}

impl BiPoly {
    pub fn new(field: &Arc<Field>, rows: Vec<UPoly>) -> BiPoly {
        let rows = rows.into_iter().map(|r| r.embed(field)).collect();
        let mut b = BiPoly {
            f: field.clone(),
            rows,
        };
        b.trim();
        b
    }

    /// Rows may live in different fields.
    pub fn from_rows(rows: Vec<UPoly>) -> BiPoly {
        assert!(!rows.is_empty());
        let zs: Vec<Fe> = rows.iter().map(|r| Fe::zero(r.field())).collect();
        let refs: Vec<&Fe> = zs.iter().collect();
        let field = common_field_of(&refs);
        BiPoly::new(&field, rows)
    }

    pub fn zero(field: &Arc<Field>) -> BiPoly {
        BiPoly {
            f: field.clone(),
            rows: Vec::new(),
        }
    }

    pub fn constant(c: &Fe) -> BiPoly {
        BiPoly::new(c.field(), vec![UPoly::constant(c.clone())])
    }

    pub fn from_x(p: UPoly) -> BiPoly {
        let f = p.field().clone();
        BiPoly::new(&f, vec![p])
    }

    /// `c x^a y^b`.
    pub fn monomial(c: &Fe, a: usize, b: usize) -> BiPoly {
        let f = c.field().clone();
        let mut rows = vec![UPoly::zero(&f); b];
        rows.push(UPoly::monomial(c.clone(), a));
        BiPoly::new(&f, rows)
    }

    fn trim(&mut self) {
        while self.rows.last().is_some_and(|r| r.is_zero()) {
            self.rows.pop();
        }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.f
    }

    pub fn rows(&self) -> &[UPoly] {
        &self.rows
    }

    /// Coefficient of `y^i` as a polynomial in `x`.
    pub fn row(&self, i: usize) -> UPoly {
        self.rows.get(i).cloned().unwrap_or_else(|| UPoly::zero(&self.f))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Degree in `y`; `None` for zero.
    pub fn y_degree(&self) -> Option<usize> {
        self.rows.len().checked_sub(1)
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.degree().map(|d| d + i))
            .max()
    }

    /// Homogeneous part of total degree `d`, as coefficients indexed by the `y` power.
    pub fn homogeneous_part(&self, d: usize) -> Vec<Fe> {
        (0..=d)
            .map(|i| {
                if i < self.rows.len() && d >= i {
                    self.rows[i].coeff(d - i)
                } else {
                    Fe::zero(&self.f)
                }
            })
            .collect()
    }

    pub fn embed(&self, field: &Arc<Field>) -> BiPoly {
        BiPoly::new(field, self.rows.clone())
    }

    fn align(&self, o: &BiPoly) -> (BiPoly, BiPoly) {
        if Arc::ptr_eq(&self.f, &o.f) {
            return (self.clone(), o.clone());
        }
        let z1 = Fe::zero(&self.f);
        let z2 = Fe::zero(&o.f);
        let field = common_field_of(&[&z1, &z2]);
        (self.embed(&field), o.embed(&field))
    }

    pub fn add(&self, o: &BiPoly) -> BiPoly {
        let (a, b) = self.align(o);
        let n = a.rows.len().max(b.rows.len());
        let rows = (0..n).map(|i| a.row(i).add(&b.row(i))).collect();
        BiPoly::new(&a.f, rows)
    }

    pub fn neg(&self) -> BiPoly {
        BiPoly {
            f: self.f.clone(),
            rows: self.rows.iter().map(|r| r.neg()).collect(),
        }
    }

    pub fn sub(&self, o: &BiPoly) -> BiPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BiPoly) -> BiPoly {
        let (a, b) = self.align(o);
        if a.is_zero() || b.is_zero() {
            return BiPoly::zero(&a.f);
        }
        let mut rows = vec![UPoly::zero(&a.f); a.rows.len() + b.rows.len() - 1];
        for (i, ra) in a.rows.iter().enumerate() {
            if ra.is_zero() {
                continue;
            }
            for (j, rb) in b.rows.iter().enumerate() {
                if !rb.is_zero() {
                    rows[i + j] = rows[i + j].add(&ra.mul(rb));
                }
            }
        }
        BiPoly::new(&a.f, rows)
    }

    pub fn mul_x(&self, p: &UPoly) -> BiPoly {
        let rows = self.rows.iter().map(|r| r.mul(p)).collect();
        BiPoly::from_rows_or_zero(rows, &self.f, p.field())
    }

    fn from_rows_or_zero(rows: Vec<UPoly>, a: &Arc<Field>, b: &Arc<Field>) -> BiPoly {
        if rows.is_empty() {
            let z1 = Fe::zero(a);
            let z2 = Fe::zero(b);
            return BiPoly::zero(&common_field_of(&[&z1, &z2]));
        }
        BiPoly::from_rows(rows)
    }

    pub fn scale(&self, s: &Fe) -> BiPoly {
        let rows: Vec<UPoly> = self.rows.iter().map(|r| r.scale(s)).collect();
        BiPoly::from_rows_or_zero(rows, &self.f, s.field())
    }

    pub fn pow(&self, e: usize) -> BiPoly {
        let mut acc = BiPoly::constant(&Fe::one(&self.f));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative_x(&self) -> BiPoly {
        BiPoly::new(&self.f, self.rows.iter().map(|r| r.derivative()).collect())
    }

    pub fn derivative_y(&self) -> BiPoly {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, r)| r.scale(&Fe::from_u32(&self.f, (i as u32) % self.f.characteristic())))
            .collect();
        BiPoly::new(&self.f, rows)
    }

    pub fn eval(&self, x: &Fe, y: &Fe) -> Fe {
        let mut acc = Fe::zero(x.field()).add(&Fe::zero(&self.f));
        for r in self.rows.iter().rev() {
            acc = acc.mul(y).add(&r.eval(x));
        }
        acc
    }

    /// Substitute `x` only, giving a polynomial in `y`.
    pub fn eval_x(&self, x: &Fe) -> UPoly {
        let coeffs: Vec<Fe> = self.rows.iter().map(|r| r.eval(x)).collect();
        if coeffs.is_empty() {
            return UPoly::zero(&self.f);
        }
        UPoly::from_coeffs(coeffs)
    }

    pub fn eval_series(&self, x: &Laurent, y: &Laurent) -> Laurent {
        let mut acc = Laurent::zero(&self.f);
        for r in self.rows.iter().rev() {
            acc = acc.mul(y).add(&upoly_series(r, x));
        }
        acc
    }

    /// Apply `c -> c^{p^k}` to every coefficient.
    pub fn frobenius_coeffs(&self, k: usize) -> BiPoly {
        BiPoly {
            f: self.f.clone(),
            rows: self.rows.iter().map(|r| r.frobenius_coeffs(k)).collect(),
        }
    }

    /// Replace every coefficient by its representative in the smallest subfield
    /// of the lattice containing all of them.
    pub fn descend(&self) -> BiPoly {
        let mut coeffs: Vec<Fe> = Vec::new();
        for r in &self.rows {
            coeffs.extend(r.coeffs().iter().map(|c| c.minimal()));
        }
        if coeffs.is_empty() {
            return BiPoly::zero(&self.f.lattice().prime_field());
        }
        let refs: Vec<&Fe> = coeffs.iter().collect();
        let field = common_field_of(&refs);
        let rows = self
            .rows
            .iter()
            .map(|r| {
                UPoly::new(
                    &field,
                    r.coeffs().iter().map(|c| c.minimal().embed(&field).unwrap()).collect(),
                )
            })
            .collect();
        BiPoly::new(&field, rows)
    }

    /// Nonzero terms `(c, a, b)` for `c x^a y^b`, sorted by total degree descending,
    /// then by the `x` exponent descending.
    pub fn terms(&self) -> Vec<(Fe, usize, usize)> {
        let mut out = Vec::new();
        for (b, r) in self.rows.iter().enumerate() {
            for (a, c) in r.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    out.push((c.clone(), a, b));
                }
            }
        }
        out.sort_by_key(|x| std::cmp::Reverse((x.1 + x.2, x.1)));
        out
    }

    pub fn is_constant(&self) -> bool {
        self.rows.len() <= 1 && self.row(0).is_constant()
    }

    pub fn constant_term(&self) -> Fe {
        self.row(0).coeff(0)
    }
}

/// Evaluate a polynomial at a series by Horner's rule.
pub fn upoly_series(p: &UPoly, x: &Laurent) -> Laurent {
    let mut acc = Laurent::zero(p.field());
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x);
        if !c.is_zero() {
            acc = acc.add(&Laurent::constant(c));
        }
    }
    acc
}

fn coeff_string(c: &Fe) -> String {
    let s = c.to_string();
    if s.contains(' ') {
        format!("({s})")
    } else {
        s
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (c, a, b) in terms {
            let mut mono = Vec::new();
            match a {
                0 => {}
                1 => mono.push("x".to_string()),
                _ => mono.push(format!("x^{a}")),
            }
            match b {
                0 => {}
                1 => mono.push("y".to_string()),
                _ => mono.push(format!("y^{b}")),
            }
            let m = mono.join("*");
            parts.push(if m.is_empty() {
                coeff_string(&c)
            } else if c.is_one() {
                m
            } else {
                format!("{}*{m}", coeff_string(&c))
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Expression evaluation into bivariate polynomials (division by constants only).
#[derive(Clone)]
pub(crate) struct BiCtx {
    pub lattice: Arc<FieldLattice>,
    pub value: Option<BiPoly>,
}

impl BiCtx {
    fn wrap(&self, v: BiPoly) -> BiCtx {
        BiCtx {
            lattice: self.lattice.clone(),
            value: Some(v),
        }
    }
    fn v(&self) -> &BiPoly {
        self.value.as_ref().unwrap()
    }
}

impl ExprTarget for BiCtx {
    fn num(&self, n: &BigInt) -> Result<Self> {
        let f = self.lattice.prime_field();
        let p = BigInt::from(self.lattice.characteristic());
        let r = n.mod_floor(&p).to_u32().unwrap();
        Ok(self.wrap(BiPoly::constant(&Fe::from_u32(&f, r))))
    }
    fn var(&self, name: &str) -> Result<Self> {
        let f = self.lattice.prime_field();
        let one = Fe::one(&f);
        match name {
            "x" => Ok(self.wrap(BiPoly::monomial(&one, 1, 0))),
            "y" => Ok(self.wrap(BiPoly::monomial(&one, 0, 1))),
            _ => {
                let m = expr::generator_degree(name)
                    .ok_or_else(|| AswError::Parse(format!("unknown variable `{name}`")))?;
                let g = Fe::generator(&self.lattice.field(m)?);
                Ok(self.wrap(BiPoly::constant(&g)))
            }
        }
    }
    fn add(&self, a: &Self, b: &Self) -> Self {
        self.wrap(a.v().add(b.v()))
    }
    fn sub(&self, a: &Self, b: &Self) -> Self {
        self.wrap(a.v().sub(b.v()))
    }
    fn mul(&self, a: &Self, b: &Self) -> Self {
        self.wrap(a.v().mul(b.v()))
    }
    fn div(&self, a: &Self, b: &Self) -> Result<Self> {
        let d = b.v();
        if !d.is_constant() || d.is_zero() {
            return Err(AswError::Parse(
                "only division by nonzero constants is allowed in a polynomial".into(),
            ));
        }
        let inv = d.constant_term().inv().unwrap();
        Ok(self.wrap(a.v().scale(&inv)))
    }
    fn neg(&self, a: &Self) -> Self {
        self.wrap(a.v().neg())
    }
    fn pow(&self, a: &Self, e: u32) -> Self {
        self.wrap(a.v().pow(e as usize))
    }
}

/// Parse a polynomial in `x`, `y` with field-element coefficients. An equation
/// `lhs = rhs` is read as `lhs - rhs`.
pub fn parse_bipoly(lattice: &Arc<FieldLattice>, s: &str) -> Result<BiPoly> {
    let ctx = BiCtx {
        lattice: lattice.clone(),
        value: None,
    };
    let mut parts = s.split('=');
    let lhs = parts.next().unwrap_or("");
    let rhs = parts.next();
    if parts.next().is_some() {
        return Err(AswError::Parse(format!("more than one `=` in `{s}`")));
    }
    let l = expr::eval(&expr::parse(lhs)?, &ctx)?.value.unwrap();
    Ok(match rhs {
        Some(r) => l.sub(&expr::eval(&expr::parse(r)?, &ctx)?.value.unwrap()),
        None => l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let lat = FieldLattice::get(5).unwrap();
        let f = parse_bipoly(&lat, "x^4 + y^4 - 1").unwrap();
        assert_eq!(f.to_string(), "x^4 + y^4 + 4");
        assert_eq!(f.total_degree(), Some(4));
        let g = parse_bipoly(&lat, "y^2 = x^5 + x^2 + 1").unwrap();
        assert_eq!(g.to_string(), "4*x^5 + 4*x^2 + y^2 + 4");
    }

    #[test]
    fn partial_derivatives() {
        let lat = FieldLattice::get(3).unwrap();
        let f = parse_bipoly(&lat, "x*y^2 + x^2").unwrap();
        assert_eq!(f.derivative_y().to_string(), "2*x*y");
        assert_eq!(f.derivative_x().to_string(), "y^2 + 2*x");
    }
}
