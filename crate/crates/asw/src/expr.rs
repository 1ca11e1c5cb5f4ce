//! Recursive-descent parser for the arithmetic expressions used in input files.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{AswError, Result};
use crate::field::{Fe, FieldLattice};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigInt),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> AswError {
        AswError::Parse(format!(
            "{msg} at offset {} in `{}`",
            self.pos,
            String::from_utf8_lossy(self.s)
        ))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(c) if c == b'(' || c.is_ascii_alphanumeric() => {
                    // implicit multiplication such as `2x` or `x(y+1)`
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected exponent"));
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| self.err("exponent too large"))?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                Ok(Expr::Num(txt.parse().unwrap()))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                // a variable is a letter followed by digits / underscores
                self.pos += 1;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                Ok(Expr::Var(txt.to_string()))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

pub fn parse(s: &str) -> Result<Expr> {
    let mut p = Parser {
        s: s.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Arithmetic needed to evaluate an expression in some target structure.
pub trait ExprTarget: Sized + Clone {
    fn num(&self, n: &BigInt) -> Result<Self>;
    fn var(&self, name: &str) -> Result<Self>;
    fn add(&self, a: &Self, b: &Self) -> Self;
    fn sub(&self, a: &Self, b: &Self) -> Self;
    fn mul(&self, a: &Self, b: &Self) -> Self;
    fn div(&self, a: &Self, b: &Self) -> Result<Self>;
    fn neg(&self, a: &Self) -> Self;
    fn pow(&self, a: &Self, e: u32) -> Self {
        let mut r = self.num(&BigInt::from(1)).expect("one");
        for _ in 0..e {
            r = self.mul(&r, a);
        }
        r
    }
}

pub fn eval<T: ExprTarget>(e: &Expr, ctx: &T) -> Result<T> {
    Ok(match e {
        Expr::Num(n) => ctx.num(n)?,
        Expr::Var(v) => ctx.var(v)?,
        Expr::Add(a, b) => ctx.add(&eval(a, ctx)?, &eval(b, ctx)?),
        Expr::Sub(a, b) => ctx.sub(&eval(a, ctx)?, &eval(b, ctx)?),
        Expr::Mul(a, b) => ctx.mul(&eval(a, ctx)?, &eval(b, ctx)?),
        Expr::Div(a, b) => ctx.div(&eval(a, ctx)?, &eval(b, ctx)?)?,
        Expr::Neg(a) => ctx.neg(&eval(a, ctx)?),
        Expr::Pow(a, k) => ctx.pow(&eval(a, ctx)?, *k),
    })
}

/// Parse `z<m>` into `m`.
pub fn generator_degree(name: &str) -> Option<usize> {
    name.strip_prefix('z').and_then(|d| d.parse().ok())
}

#[derive(Clone)]
struct FeCtx {
    lattice: Arc<FieldLattice>,
    value: Option<Fe>,
}

impl ExprTarget for FeCtx {
    fn num(&self, n: &BigInt) -> Result<Self> {
        let f = self.lattice.prime_field();
        let p = BigInt::from(self.lattice.characteristic());
        let r: i64 = ((n % &p + &p) % &p).try_into().unwrap();
        Ok(FeCtx {
            lattice: self.lattice.clone(),
            value: Some(Fe::from_i64(&f, r)),
        })
    }
    fn var(&self, name: &str) -> Result<Self> {
        let m = generator_degree(name)
            .ok_or_else(|| AswError::Parse(format!("unknown field generator `{name}`")))?;
        let f = self.lattice.field(m)?;
        Ok(FeCtx {
            lattice: self.lattice.clone(),
            value: Some(Fe::generator(&f)),
        })
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
        let q = a
            .v()
            .div(b.v())
            .ok_or_else(|| AswError::Parse("division by zero field element".into()))?;
        Ok(self.wrap(q))
    }
    fn neg(&self, a: &Self) -> Self {
        self.wrap(a.v().neg())
    }
    fn pow(&self, a: &Self, e: u32) -> Self {
        self.wrap(a.v().pow(e as u64))
    }
}

impl FeCtx {
    fn v(&self) -> &Fe {
        self.value.as_ref().unwrap()
    }
    fn wrap(&self, v: Fe) -> Self {
        FeCtx {
            lattice: self.lattice.clone(),
            value: Some(v),
        }
    }
}

pub fn eval_fe(e: &Expr, lattice: &Arc<FieldLattice>) -> Result<Fe> {
    let ctx = FeCtx {
        lattice: lattice.clone(),
        value: None,
    };
    Ok(eval(e, &ctx)?.value.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_element_round_trip() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(4).unwrap();
        let x = Fe::from_coeffs(&f, vec![1, 1, 0, 2]);
        let back = crate::field::parse_fe(&lat, &x.to_string()).unwrap();
        assert_eq!(back, x);
        assert_eq!(back.degree(), 4);
    }

    #[test]
    fn precedence() {
        let lat = FieldLattice::get(7).unwrap();
        let v = crate::field::parse_fe(&lat, "2 + 3*4^2 - 1").unwrap();
        assert_eq!(v.as_prime(), Some((2 + 48 - 1) % 7));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("x + * y").is_err());
        assert!(parse("(x").is_err());
    }
}
