//! Prime-field arithmetic with a modulus chosen at runtime.
//!
//! A [`Field`] is a validated prime modulus. [`Fe`] is an element tagged with
//! its modulus, so mixing elements of different fields is caught: the
//! `try_*` methods return [`FieldError::ContextMismatch`] and the operator
//! impls panic.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("elements belong to different fields (q = {left} vs q = {right})")]
    ContextMismatch { left: u64, right: u64 },
    #[error("division by zero in F_{0}")]
    DivisionByZero(u64),
}

/// The prime field `F_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Field {
    q: u64,
}

impl TryFrom<u64> for Field {
    type Error = FieldError;

    fn try_from(q: u64) -> Result<Self, Self::Error> {
        Field::new(q)
    }
}

impl From<Field> for u64 {
    fn from(f: Field) -> u64 {
        f.q
    }
}

impl Field {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if is_prime(q) {
            Ok(Field { q })
        } else {
            Err(FieldError::NotPrime(q))
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Reduces `v` into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> Fe {
        Fe { value: v % self.q, q: self.q }
    }

    pub fn from_i64(&self, v: i64) -> Fe {
        let r = (v as i128).rem_euclid(self.q as i128);
        self.elem(r as u64)
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        Fe { value: 0, q: self.q }
    }

    #[inline]
    pub fn one(&self) -> Fe {
        Fe { value: 1 % self.q, q: self.q }
    }

    /// All elements `0, 1, ..., q-1` in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.q).map(move |v| Fe { value: v, q: self.q })
    }

    /// Uniform element drawn by rejection from the smallest power-of-two
    /// range covering `[0, q)`. Exactly uniform whenever `rng` emits uniform
    /// bits.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Fe {
        let bits = 64 - (self.q - 1).leading_zeros();
        let mask = if bits >= 64 { u64::MAX } else { (1u64 << bits) - 1 };
        loop {
            let v = rng.next_u64() & mask;
            if v < self.q {
                return Fe { value: v, q: self.q };
            }
        }
    }

    pub fn sample_vec<R: RngCore + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<Fe> {
        (0..len).map(|_| self.sample(rng)).collect()
    }

    pub fn sample_nonzero<R: RngCore + ?Sized>(&self, rng: &mut R) -> Fe {
        loop {
            let x = self.sample(rng);
            if !x.is_zero() {
                return x;
            }
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

/// An element of `F_q`, stored as its canonical representative in `[0, q)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe {
    value: u64,
    q: u64,
}

impl Fe {
    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn field(self) -> Field {
        Field { q: self.q }
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    #[inline]
    fn check(self, other: Fe) -> Result<(), FieldError> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(FieldError::ContextMismatch { left: self.q, right: other.q })
        }
    }

    pub fn try_add(self, other: Fe) -> Result<Fe, FieldError> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(self, other: Fe) -> Result<Fe, FieldError> {
        self.check(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn try_mul(self, other: Fe) -> Result<Fe, FieldError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn try_div(self, other: Fe) -> Result<Fe, FieldError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other.inv()?))
    }

    #[inline]
    fn add_unchecked(self, other: Fe) -> Fe {
        let (s, carry) = self.value.overflowing_add(other.value);
        let v = if carry || s >= self.q { s.wrapping_sub(self.q) } else { s };
        Fe { value: v, q: self.q }
    }

    #[inline]
    fn sub_unchecked(self, other: Fe) -> Fe {
        let v = if self.value >= other.value {
            self.value - other.value
        } else {
            self.q - (other.value - self.value)
        };
        Fe { value: v, q: self.q }
    }

    #[inline]
    fn mul_unchecked(self, other: Fe) -> Fe {
        let v = (self.value as u128 * other.value as u128) % self.q as u128;
        Fe { value: v as u64, q: self.q }
    }

    pub fn pow(self, mut e: u64) -> Fe {
        let mut base = self;
        let mut acc = Fe { value: 1 % self.q, q: self.q };
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(base);
            }
            base = base.mul_unchecked(base);
            e >>= 1;
        }
        acc
    }

    /// `self^e` for a signed exponent; negative exponents need `self != 0`.
    pub fn pow_signed(self, e: i64) -> Result<Fe, FieldError> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self) -> Result<Fe, FieldError> {
        if self.value == 0 {
            return Err(FieldError::DivisionByZero(self.q));
        }
        let (mut r0, mut r1) = (self.q as i128, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Fe { value: t0.rem_euclid(self.q as i128) as u64, q: self.q })
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident, $inner:ident) => {
        impl $trait for Fe {
            type Output = Fe;
            #[inline]
            fn $method(self, rhs: Fe) -> Fe {
                assert_eq!(self.q, rhs.q, "field element context mismatch");
                self.$inner(rhs)
            }
        }
        impl $assign_trait for Fe {
            #[inline]
            fn $assign_method(&mut self, rhs: Fe) {
                *self = $trait::$method(*self, rhs);
            }
        }
    };
}

binop!(Add, add, AddAssign, add_assign, add_unchecked);
binop!(Sub, sub, SubAssign, sub_assign, sub_unchecked);
binop!(Mul, mul, MulAssign, mul_assign, mul_unchecked);

impl Neg for Fe {
    type Output = Fe;
    fn neg(self) -> Fe {
        Fe { value: 0, q: self.q }.sub_unchecked(self)
    }
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for a in SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An `RngCore` that replays a fixed list of words and then emits zeros.
///
/// Feeding values below `q` makes [`Field::sample`] return exactly those
/// values, which is how the privacy audit enumerates every random draw.
#[derive(Debug, Clone, Default)]
pub struct ReplayRng {
    words: Vec<u64>,
    pos: usize,
}

impl ReplayRng {
    pub fn new(words: Vec<u64>) -> Self {
        ReplayRng { words, pos: 0 }
    }

    /// Number of words consumed so far.
    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl RngCore for ReplayRng {
    fn next_u32(&mut self) -> u32 {
        self.next_u64() as u32
    }

    fn next_u64(&mut self) -> u64 {
        let w = self.words.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        w
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}
