//! Minimal commutative-ring interface shared by every Witt coefficient ring.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::field::Fe;

#[allow(clippy::wrong_self_convention)]
pub trait Ring: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_int_like(&self, n: &BigInt) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// 0 for characteristic zero.
    fn characteristic(&self) -> u64;

    fn from_small(&self, n: i64) -> Self {
        self.from_int_like(&BigInt::from(n))
    }

    fn pow(&self, e: u64) -> Self {
        let mut result = self.one_like();
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
}

impl Ring for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::from(1)
    }
    fn from_int_like(&self, n: &BigInt) -> Self {
        n.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn characteristic(&self) -> u64 {
        0
    }
}

impl Ring for Fe {
    fn zero_like(&self) -> Self {
        Fe::zero_like(self)
    }
    fn one_like(&self) -> Self {
        Fe::one_like(self)
    }
    fn from_int_like(&self, n: &BigInt) -> Self {
        let p = BigInt::from(self.characteristic());
        let r = n.mod_floor(&p).to_u32().unwrap();
        Fe::from_u32(self.field(), r)
    }
    fn from_small(&self, n: i64) -> Self {
        Fe::from_i64(self.field(), n)
    }
    fn add(&self, o: &Self) -> Self {
        Fe::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Fe::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Fe::mul(self, o)
    }
    fn neg(&self) -> Self {
        Fe::neg(self)
    }
    fn is_zero(&self) -> bool {
        Fe::is_zero(self)
    }
    fn characteristic(&self) -> u64 {
        Fe::characteristic(self) as u64
    }
    fn pow(&self, e: u64) -> Self {
        Fe::pow(self, e)
    }
}
