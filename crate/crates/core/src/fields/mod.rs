//! Finite fields used by every protocol in the crate.
//!
//! Two families are supported: prime fields `F_p` with `p < 2^61`, and binary
//! extension fields `GF(2^k)` with `k <= 32`. Elements are carried around as
//! canonical `u64` values; a [`FieldSpec`] is a small `Copy` context that knows
//! how to combine them. [`FieldElement`] pairs a value with its spec for the
//! checked, spec-aware API.

mod cnf;
mod mle;
mod poly;
mod prime;

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cnf::{arithmetize, ArithPoly, Cnf3, Literal};
pub use mle::{mle_values, multilinear_extension, BoolTable};
pub use poly::{interpolate, poly_eval, UnivariatePoly};
pub use prime::{is_prime, largest_prime_below, smallest_prime_above, sqrt_mod};

/// Largest admissible prime modulus (exclusive).
pub const MAX_PRIME: u64 = 1 << 61;
/// Largest admissible binary extension degree.
pub const MAX_BINARY_K: u32 = 32;
/// Default extension degree for bit-mode commitments.
pub const DEFAULT_BINARY_K: u32 = 16;

/// Low-weight irreducible polynomials over GF(2), one per degree 1..=32.
/// Trinomials where one exists, otherwise the lexicographically smallest
/// pentanomial. Bit `i` is the coefficient of `x^i`.
const IRREDUCIBLE: [u64; 32] = [
    0x3,
    0x7,
    0xb,
    0x13,
    0x25,
    0x43,
    0x83,
    0x11b,
    0x203,
    0x409,
    0x805,
    0x1009,
    0x201b,
    0x4021,
    0x8003,
    0x1002b,
    0x20009,
    0x40009,
    0x80027,
    0x100009,
    0x200005,
    0x400003,
    0x800021,
    0x100001b,
    0x2000009,
    0x400001b,
    0x8000027,
    0x10000003,
    0x20000005,
    0x40000003,
    0x80000009,
    0x10000008d,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("prime modulus {0} outside 2..2^61")]
    PrimeOutOfRange(u64),
    #[error("binary extension degree {0} unsupported (1..=32)")]
    BadDegree(u32),
    #[error("polynomial {poly:#x} is not irreducible of degree {k}")]
    Reducible { poly: u64, k: u32 },
    #[error("field mismatch: {0} vs {1}")]
    Mismatch(FieldSpec, FieldSpec),
    #[error("value {value} is not canonical in {field}")]
    NonCanonical { value: u64, field: FieldSpec },
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("polynomial degree {degree} exceeds bound {bound}")]
    DegreeBound { degree: usize, bound: usize },
    #[error("malformed formula: {0}")]
    Formula(String),
}

/// A prime field or a binary extension field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Prime { p: u64 },
    Binary { k: u32, poly: u64 },
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime { p } => write!(f, "F_{p}"),
            FieldSpec::Binary { k, poly } => write!(f, "GF(2^{k})/{poly:#x}"),
        }
    }
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if !(2..MAX_PRIME).contains(&p) {
            return Err(FieldError::PrimeOutOfRange(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(FieldSpec::Prime { p })
    }

    /// `GF(2^k)` with the tabulated reduction polynomial.
    pub fn binary(k: u32) -> Result<Self, FieldError> {
        if !(1..=MAX_BINARY_K).contains(&k) {
            return Err(FieldError::BadDegree(k));
        }
        Self::binary_with(k, IRREDUCIBLE[(k - 1) as usize])
    }

    /// `GF(2^k)` with a caller-supplied reduction polynomial, checked for
    /// irreducibility by trial division.
    pub fn binary_with(k: u32, poly: u64) -> Result<Self, FieldError> {
        if !(1..=MAX_BINARY_K).contains(&k) {
            return Err(FieldError::BadDegree(k));
        }
        if 63 - poly.leading_zeros() != k || !gf2_irreducible(poly) {
            return Err(FieldError::Reducible { poly, k });
        }
        Ok(FieldSpec::Binary { k, poly })
    }

    /// Number of elements.
    pub fn order(&self) -> u64 {
        match *self {
            FieldSpec::Prime { p } => p,
            FieldSpec::Binary { k, .. } => 1u64 << k,
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, FieldSpec::Binary { .. })
    }

    pub fn characteristic(&self) -> u64 {
        match *self {
            FieldSpec::Prime { p } => p,
            FieldSpec::Binary { .. } => 2,
        }
    }

    pub fn is_canonical(&self, v: u64) -> bool {
        v < self.order()
    }

    pub fn check(&self, v: u64) -> Result<u64, FieldError> {
        if self.is_canonical(v) {
            Ok(v)
        } else {
            Err(FieldError::NonCanonical { value: v, field: *self })
        }
    }

    /// Maps an integer into the field: reduction mod p, or truncation to k
    /// bits (interpreting the integer as a bit vector) for binary fields.
    pub fn reduce(&self, v: u64) -> u64 {
        match *self {
            FieldSpec::Prime { p } => v % p,
            FieldSpec::Binary { k, .. } => v & ((1u64 << k) - 1),
        }
    }

    /// Signed integer embedding (`-1` maps to `p - 1`, or to `1` in char 2).
    pub fn from_i64(&self, v: i64) -> u64 {
        match *self {
            FieldSpec::Prime { p } => v.rem_euclid(p as i64) as u64,
            FieldSpec::Binary { .. } => (v.rem_euclid(2)) as u64,
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        match *self {
            FieldSpec::Prime { p } => {
                let s = a + b;
                if s >= p {
                    s - p
                } else {
                    s
                }
            }
            FieldSpec::Binary { .. } => a ^ b,
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        match *self {
            FieldSpec::Prime { p } => {
                if a >= b {
                    a - b
                } else {
                    a + p - b
                }
            }
            FieldSpec::Binary { .. } => a ^ b,
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        self.sub(0, a)
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        match *self {
            FieldSpec::Prime { p } => ((a as u128 * b as u128) % p as u128) as u64,
            FieldSpec::Binary { k, poly } => gf2_reduce(clmul(a, b), k, poly),
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64, FieldError> {
        if a == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    pub fn div(&self, a: u64, b: u64) -> Result<u64, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.order())
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(1..self.order())
    }

    /// Every element, in increasing integer order. Meant for small fields.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.order()
    }

    pub fn elem(&self, v: u64) -> Result<FieldElement, FieldError> {
        FieldElement::new(*self, v)
    }

    /// Canonical little-endian byte width of an element.
    pub fn byte_width(&self) -> usize {
        let bits = 64 - (self.order() - 1).leading_zeros() as usize;
        bits.div_ceil(8).max(1)
    }
}

/// Carry-less product of two polynomials over GF(2) of degree < 32.
#[inline]
pub(crate) fn clmul(a: u64, b: u64) -> u64 {
    let mut acc = 0u64;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

#[inline]
fn gf2_reduce(mut v: u64, k: u32, poly: u64) -> u64 {
    while v >> k != 0 {
        let top = 63 - v.leading_zeros();
        v ^= poly << (top - k);
    }
    v
}

fn gf2_mod(mut a: u64, m: u64) -> u64 {
    let dm = 63 - m.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= dm {
        a ^= m << (63 - a.leading_zeros() - dm);
    }
    a
}

/// Trial division by every polynomial of degree 1..=k/2.
fn gf2_irreducible(poly: u64) -> bool {
    if poly < 2 {
        return false;
    }
    let k = 63 - poly.leading_zeros();
    if k == 1 {
        return true;
    }
    let max_div = 1u64 << (k / 2 + 1);
    (2..max_div).all(|q| gf2_mod(poly, q) != 0)
}

/// A field value bound to its field, with spec-checked arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    spec: FieldSpec,
    value: u64,
}

impl FieldElement {
    pub fn new(spec: FieldSpec, value: u64) -> Result<Self, FieldError> {
        spec.check(value)?;
        Ok(Self { spec, value })
    }

    pub fn zero(spec: FieldSpec) -> Self {
        Self { spec, value: 0 }
    }

    pub fn one(spec: FieldSpec) -> Self {
        Self { spec, value: 1 }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    fn same(&self, other: &Self) -> Result<FieldSpec, FieldError> {
        if self.spec == other.spec {
            Ok(self.spec)
        } else {
            Err(FieldError::Mismatch(self.spec, other.spec))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, FieldError> {
        let f = self.same(other)?;
        Ok(Self { spec: f, value: f.add(self.value, other.value) })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, FieldError> {
        let f = self.same(other)?;
        Ok(Self { spec: f, value: f.sub(self.value, other.value) })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, FieldError> {
        let f = self.same(other)?;
        Ok(Self { spec: f, value: f.mul(self.value, other.value) })
    }

    pub fn neg(&self) -> Self {
        Self { spec: self.spec, value: self.spec.neg(self.value) }
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        Ok(Self { spec: self.spec, value: self.spec.inv(self.value)? })
    }

    /// Little-endian canonical encoding, `spec.byte_width()` bytes.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.value.to_le_bytes()[..self.spec.byte_width()].to_vec()
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Checked field multiplication.
pub fn ff_mul(a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
    a.try_mul(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Schoolbook oracle: multiply polynomials bit by bit into a Vec<bool>,
    /// then long-divide by the modulus.
    fn schoolbook_gf2(a: u64, b: u64, k: u32, poly: u64) -> u64 {
        let mut prod = vec![false; 2 * k as usize];
        for i in 0..k as usize {
            for j in 0..k as usize {
                if (a >> i) & 1 == 1 && (b >> j) & 1 == 1 {
                    prod[i + j] ^= true;
                }
            }
        }
        for deg in (k as usize..prod.len()).rev() {
            if prod[deg] {
                for t in 0..=k as usize {
                    if (poly >> t) & 1 == 1 {
                        prod[deg - k as usize + t] ^= true;
                    }
                }
            }
        }
        prod.iter().take(k as usize).enumerate().map(|(i, &b)| (b as u64) << i).sum()
    }

    #[test]
    fn gf8_example() {
        let f = FieldSpec::binary(3).unwrap();
        assert_eq!(f, FieldSpec::Binary { k: 3, poly: 0b1011 });
        assert_eq!(schoolbook_gf2(0b010, 0b100, 3, 0b1011), 0b011);
        let p = ff_mul(f.elem(0b010).unwrap(), f.elem(0b100).unwrap()).unwrap();
        assert_eq!(p.value(), 0b011);
    }

    #[test]
    fn f7_example_and_identity() {
        let f = FieldSpec::prime(7).unwrap();
        assert_eq!(f.mul(3, 5), 1);
        for a in f.elements() {
            assert_eq!(ff_mul(f.elem(a).unwrap(), FieldElement::one(f)).unwrap().value(), a);
        }
        let g = FieldSpec::binary(16).unwrap();
        assert_eq!(g.mul(0xbeef, 1), 0xbeef);
    }

    #[test]
    fn mismatched_specs_rejected() {
        let a = FieldSpec::prime(7).unwrap().elem(3).unwrap();
        let b = FieldSpec::prime(11).unwrap().elem(3).unwrap();
        assert!(matches!(ff_mul(a, b), Err(FieldError::Mismatch(..))));
        assert!(FieldSpec::prime(7).unwrap().elem(7).is_err());
    }

    #[test]
    fn construction_checks() {
        assert_eq!(FieldSpec::prime(15), Err(FieldError::NotPrime(15)));
        assert!(FieldSpec::prime(MAX_PRIME).is_err());
        assert!(FieldSpec::binary(0).is_err());
        assert!(FieldSpec::binary(33).is_err());
        // x^2 + 1 = (x + 1)^2
        assert!(FieldSpec::binary_with(2, 0b101).is_err());
        // wrong degree for k
        assert!(FieldSpec::binary_with(4, 0b1011).is_err());
    }

    #[test]
    fn irreducible_table_entries_verify() {
        for k in 1..=MAX_BINARY_K {
            FieldSpec::binary(k).unwrap_or_else(|e| panic!("k={k}: {e}"));
        }
    }

    #[test]
    fn binary_mul_matches_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in [1u32, 2, 3, 5, 8, 13, 16, 24, 32] {
            let f = FieldSpec::binary(k).unwrap();
            let FieldSpec::Binary { poly, .. } = f else { unreachable!() };
            for _ in 0..200 {
                let a = f.random(&mut rng);
                let b = f.random(&mut rng);
                assert_eq!(f.mul(a, b), schoolbook_gf2(a, b, k, poly), "k={k} a={a} b={b}");
            }
        }
    }

    fn axioms(f: FieldSpec, trials: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            assert_eq!(f.add(a, f.neg(a)), 0);
            assert_eq!(f.sub(f.add(a, b), b), a);
        }
    }

    #[test]
    fn field_axioms_random_triples() {
        axioms(FieldSpec::prime(65521).unwrap(), 10_000, 2);
        axioms(FieldSpec::prime((1 << 61) - 1).unwrap(), 10_000, 3);
        axioms(FieldSpec::binary(16).unwrap(), 10_000, 4);
        axioms(FieldSpec::binary(32).unwrap(), 10_000, 5);
    }

    #[test]
    fn inverses_exhaustive_small_fields() {
        for f in [FieldSpec::prime(65521).unwrap(), FieldSpec::binary(16).unwrap(), FieldSpec::binary(3).unwrap()] {
            assert!(f.inv(0).is_err());
            for a in 1..f.order() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1, "{f} a={a}");
            }
        }
    }

    #[test]
    fn byte_width_and_encoding() {
        let f = FieldSpec::binary(16).unwrap();
        assert_eq!(f.byte_width(), 2);
        assert_eq!(f.elem(0x1234).unwrap().to_le_bytes(), vec![0x34, 0x12]);
        assert_eq!(FieldSpec::prime(7).unwrap().byte_width(), 1);
    }
}
