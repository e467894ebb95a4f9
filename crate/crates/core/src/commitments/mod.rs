//! The BGKW bit commitment and the PR-type commitment over a field, with
//! homomorphic linear combinations and PR-box equivocation.

mod lin;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::{BoxError, Functional, PrBox, PrBoxBank};
use crate::fields::{FieldError, FieldSpec};

pub use lin::Lin;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitError {
    #[error("bit string length mismatch: expected {expected}, got {got}")]
    Length { expected: u32, got: u32 },
    #[error("rejected: {0}")]
    Rejected(&'static str),
    #[error("commitments use different keys")]
    KeyMismatch,
    #[error("{0} coefficients for {1} commitments")]
    Arity(usize, usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Box(#[from] BoxError),
}

/// A `len`-bit string held in the low bits of a `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bits {
    pub len: u32,
    pub value: u64,
}

impl Bits {
    pub fn new(len: u32, value: u64) -> Result<Self, CommitError> {
        if len > 64 || (len < 64 && value >> len != 0) {
            return Err(CommitError::Length { expected: len, got: 64 - value.leading_zeros() });
        }
        Ok(Self { len, value })
    }

    /// Parses a string of `0`/`1`, most significant bit first.
    pub fn parse(s: &str) -> Result<Self, CommitError> {
        let value = u64::from_str_radix(s, 2).map_err(|_| CommitError::Rejected("not a bit string"))?;
        Self::new(s.len() as u32, value)
    }

    fn same_len(&self, other: &Bits) -> Result<(), CommitError> {
        if self.len == other.len {
            Ok(())
        } else {
            Err(CommitError::Length { expected: self.len, got: other.len })
        }
    }
}

impl std::fmt::Display for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:0width$b}", self.value, width = self.len as usize)
    }
}

/// `x = b·r ⊕ w`.
pub fn bgkw_commit(b: bool, r: Bits, w: Bits) -> Result<Bits, CommitError> {
    r.same_len(&w)?;
    Ok(Bits { len: r.len, value: if b { r.value ^ w.value } else { w.value } })
}

/// Accepts iff `w' ⊕ x ∈ {0, r}` and returns the unveiled bit.
pub fn bgkw_verify(x: Bits, w_prime: Bits, r: Bits) -> Result<bool, CommitError> {
    x.same_len(&w_prime)?;
    x.same_len(&r)?;
    match x.value ^ w_prime.value {
        0 => Ok(false),
        v if v == r.value => Ok(true),
        _ => Err(CommitError::Rejected("w' xor x is neither 0 nor r")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Committed value is a bit: `c - w1 ∈ {0, z1}`.
    Bit,
    /// Committed value is any field element: `v = (c - w1) / z1`.
    Field,
}

/// `z1` goes to the committing prover's verifier, `z2` to the other one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommitKeys {
    pub z1: u64,
    pub z2: u64,
}

impl CommitKeys {
    /// Draws both keys uniformly, redrawing zeros. Returns the number of
    /// redraws alongside the keys.
    pub fn sample<R: rand::Rng + ?Sized>(field: &FieldSpec, rng: &mut R) -> (Self, u32) {
        let mut redraws = 0;
        let mut draw = |rng: &mut R| loop {
            let v = field.random(rng);
            if v != 0 {
                return v;
            }
            redraws += 1;
        };
        let z1 = draw(rng);
        let z2 = draw(rng);
        (Self { z1, z2 }, redraws)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Opening {
    pub w1: u64,
    pub w2: u64,
}

/// The public strings of one commitment: `c` on the committer's side, `d`
/// on the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrCommitment {
    pub keys: CommitKeys,
    pub c: u64,
    pub d: u64,
}

/// `c = v·z1 + w1`.
pub fn pr_commit(field: &FieldSpec, v: u64, z1: u64, w1: u64) -> Result<u64, CommitError> {
    for x in [v, z1, w1] {
        field.check(x)?;
    }
    Ok(field.add(field.mul(v, z1), w1))
}

/// `d = w1·z2 + w2`.
pub fn pr_cross(field: &FieldSpec, w1: u64, z2: u64, w2: u64) -> Result<u64, CommitError> {
    for x in [w1, z2, w2] {
        field.check(x)?;
    }
    Ok(field.add(field.mul(w1, z2), w2))
}

/// Honest commitment with both public strings.
pub fn pr_commit_full(field: &FieldSpec, keys: CommitKeys, v: u64, opening: Opening) -> Result<PrCommitment, CommitError> {
    Ok(PrCommitment {
        keys,
        c: pr_commit(field, v, keys.z1, opening.w1)?,
        d: pr_cross(field, opening.w1, keys.z2, opening.w2)?,
    })
}

/// The committer-side half of unveiling: recovers `v` from `c` and `w1`.
pub fn pr_unveil_value(field: &FieldSpec, c: u64, z1: u64, w1: u64, mode: Mode) -> Result<u64, CommitError> {
    let diff = field.sub(c, w1);
    match mode {
        Mode::Bit if diff == 0 => Ok(0),
        Mode::Bit if diff == z1 => Ok(1),
        Mode::Bit => Err(CommitError::Rejected("c - w1 is neither 0 nor z1")),
        Mode::Field if z1 == 0 => Err(CommitError::Rejected("zero key z1")),
        Mode::Field => Ok(field.div(diff, z1)?),
    }
}

/// The cross check: `d - w2 = w1·z2`.
pub fn pr_cross_check(field: &FieldSpec, d: u64, z2: u64, opening: Opening) -> bool {
    field.sub(d, opening.w2) == field.mul(opening.w1, z2)
}

pub fn pr_unveil_verify(
    field: &FieldSpec,
    com: &PrCommitment,
    opening: Opening,
    mode: Mode,
) -> Result<u64, CommitError> {
    field.check(opening.w1)?;
    field.check(opening.w2)?;
    let v = pr_unveil_value(field, com.c, com.keys.z1, opening.w1, mode)?;
    if !pr_cross_check(field, com.d, com.keys.z2, opening) {
        return Err(CommitError::Rejected("d - w2 differs from w1·z2"));
    }
    Ok(v)
}

/// `sum a_i · com_i`, with the matching prover-side opening.
pub fn hom_linear(
    field: &FieldSpec,
    items: &[(PrCommitment, Opening)],
    coeffs: &[u64],
) -> Result<(PrCommitment, Opening), CommitError> {
    if items.len() != coeffs.len() {
        return Err(CommitError::Arity(coeffs.len(), items.len()));
    }
    let keys = match items.first() {
        Some((c, _)) => c.keys,
        None => CommitKeys { z1: 1, z2: 1 },
    };
    let (mut c, mut d, mut w1, mut w2) = (0, 0, 0, 0);
    for ((com, op), &a) in items.iter().zip(coeffs) {
        if com.keys != keys {
            return Err(CommitError::KeyMismatch);
        }
        field.check(a)?;
        c = field.add(c, field.mul(a, com.c));
        d = field.add(d, field.mul(a, com.d));
        w1 = field.add(w1, field.mul(a, op.w1));
        w2 = field.add(w2, field.mul(a, op.w2));
    }
    Ok((PrCommitment { keys, c, d }, Opening { w1, w2 }))
}

/// Opens a commitment whose cross string `d` is the side-B output of `bx`
/// (side B having input `z2`) to any target value. Side A receives `-w1`,
/// so that its output is `x - w1·z2`.
pub fn equivocate(field: &FieldSpec, bx: &mut PrBox, target: u64, c: u64, z1: u64) -> Result<Opening, CommitError> {
    let w1 = field.sub(c, field.mul(target, z1));
    let w2 = bx.input_a(field.neg(w1))?.ok_or(CommitError::Rejected("side B has not input z2"))?;
    Ok(Opening { w1, w2 })
}

/// [`equivocate`] for a (possibly derived) commitment whose cross string is
/// the combination `phi` of bank outputs.
pub fn equivocate_indexed(
    field: &FieldSpec,
    bank: &mut PrBoxBank,
    phi: &Functional,
    target: u64,
    c: u64,
    z1: u64,
) -> Result<Opening, CommitError> {
    let w1 = field.sub(c, field.mul(target, z1));
    let w2 = bank.query_a(phi, field.neg(w1))?.ok_or(CommitError::Rejected("side B has not input z2"))?;
    Ok(Opening { w1, w2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    #[test]
    fn bgkw_examples() {
        let r = Bits::parse("1010").unwrap();
        let w = Bits::parse("0110").unwrap();
        assert_eq!(bgkw_commit(false, r, w).unwrap(), w);
        assert_eq!(bgkw_commit(true, r, w).unwrap().to_string(), "1100");
        let x = bgkw_commit(true, r, w).unwrap();
        assert_eq!(bgkw_verify(x, w, r).unwrap(), true);
        assert_eq!(bgkw_verify(w, w, r).unwrap(), false);
        assert!(bgkw_verify(x, Bits::parse("0000").unwrap(), r).is_err());
        assert!(bgkw_commit(true, r, Bits::parse("01").unwrap()).is_err());
    }

    #[test]
    fn bgkw_commit_is_uniform_for_both_bits() {
        let k = 3;
        for rv in 0..8u64 {
            let r = Bits::new(k, rv).unwrap();
            for b in [false, true] {
                let mut seen = [0u32; 8];
                for wv in 0..8u64 {
                    seen[bgkw_commit(b, r, Bits::new(k, wv).unwrap()).unwrap().value as usize] += 1;
                }
                assert_eq!(seen, [1; 8]);
            }
        }
    }

    #[test]
    fn pr_commit_examples() {
        let gf = FieldSpec::binary(16).unwrap();
        assert_eq!(pr_commit(&gf, 0, 1234, 99).unwrap(), 99);
        let c = pr_commit(&gf, 1, 1234, 99).unwrap();
        assert_eq!(c ^ 99, 1234);
        let f7 = FieldSpec::prime(7).unwrap();
        assert_eq!(pr_commit(&f7, 3, 2, 5).unwrap(), 4);
        assert!(pr_commit(&f7, 7, 2, 5).is_err());
    }

    #[test]
    fn unveil_roundtrip_and_tamper() {
        let f = FieldSpec::binary(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (keys, _) = CommitKeys::sample(&f, &mut rng);
        let op = Opening { w1: f.random(&mut rng), w2: f.random(&mut rng) };
        let com = pr_commit_full(&f, keys, 0, op).unwrap();
        assert_eq!(pr_unveil_verify(&f, &com, op, Mode::Bit).unwrap(), 0);
        let tampered = Opening { w2: op.w2 ^ 1, ..op };
        assert!(pr_unveil_verify(&f, &com, tampered, Mode::Bit).is_err());

        let p = FieldSpec::prime(65521).unwrap();
        let (keys, _) = CommitKeys::sample(&p, &mut rng);
        let op = Opening { w1: p.random(&mut rng), w2: p.random(&mut rng) };
        let com = pr_commit_full(&p, keys, 4242, op).unwrap();
        assert_eq!(pr_unveil_verify(&p, &com, op, Mode::Field).unwrap(), 4242);
        assert!(pr_unveil_verify(&p, &com, op, Mode::Bit).is_err());
    }

    /// Exact distribution of `(c, d)` over all `(w1, w2)` for every key pair.
    fn commit_distribution(f: &FieldSpec, keys: CommitKeys, v: u64) -> BTreeMap<(u64, u64), u32> {
        let mut m = BTreeMap::new();
        for w1 in f.elements() {
            for w2 in f.elements() {
                let com = pr_commit_full(f, keys, v, Opening { w1, w2 }).unwrap();
                *m.entry((com.c, com.d)).or_insert(0) += 1;
            }
        }
        m
    }

    #[test]
    fn perfectly_concealing_small_fields() {
        for f in [FieldSpec::binary(1).unwrap(), FieldSpec::binary(2).unwrap(), FieldSpec::binary(3).unwrap(), FieldSpec::prime(7).unwrap()] {
            for z1 in f.elements() {
                for z2 in f.elements() {
                    let keys = CommitKeys { z1, z2 };
                    let reference = commit_distribution(&f, keys, 0);
                    for v in f.elements() {
                        assert_eq!(commit_distribution(&f, keys, v), reference);
                    }
                }
            }
        }
    }

    #[test]
    fn homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in [FieldSpec::binary(16).unwrap(), FieldSpec::prime(65521).unwrap()] {
            for _ in 0..1000 {
                let (keys, _) = CommitKeys::sample(&f, &mut rng);
                let vs: Vec<u64> = (0..3).map(|_| f.random(&mut rng)).collect();
                let items: Vec<(PrCommitment, Opening)> = vs
                    .iter()
                    .map(|&v| {
                        let op = Opening { w1: f.random(&mut rng), w2: f.random(&mut rng) };
                        (pr_commit_full(&f, keys, v, op).unwrap(), op)
                    })
                    .collect();
                let a: Vec<u64> = (0..3).map(|_| f.random(&mut rng)).collect();
                let (com, op) = hom_linear(&f, &items, &a).unwrap();
                let expect = (0..3).fold(0, |acc, i| f.add(acc, f.mul(a[i], vs[i])));
                assert_eq!(pr_unveil_verify(&f, &com, op, Mode::Field).unwrap(), expect);
            }
        }
        let f = FieldSpec::prime(13).unwrap();
        let keys = CommitKeys { z1: 3, z2: 5 };
        let op = Opening { w1: 4, w2: 9 };
        let com = pr_commit_full(&f, keys, 6, op).unwrap();
        let (zero, zop) = hom_linear(&f, &[(com, op)], &[0]).unwrap();
        assert_eq!((zero.c, zero.d, zop), (0, 0, Opening::default()));
        let other = pr_commit_full(&f, CommitKeys { z1: 3, z2: 6 }, 6, op).unwrap();
        assert_eq!(hom_linear(&f, &[(com, op), (other, op)], &[1, 1]), Err(CommitError::KeyMismatch));
    }

    #[test]
    fn equivocation_through_a_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in [FieldSpec::binary(16).unwrap(), FieldSpec::prime(65521).unwrap()] {
            for trial in 0..1000 {
                let (keys, _) = CommitKeys::sample(&f, &mut rng);
                let mut bx = PrBox::new(f, &mut rng);
                let d = bx.input_b(keys.z2).unwrap();
                let c = f.random(&mut rng);
                let target = (trial % 2) as u64;
                let op = equivocate(&f, &mut bx, target, c, keys.z1).unwrap();
                let com = PrCommitment { keys, c, d };
                assert_eq!(pr_unveil_verify(&f, &com, op, Mode::Bit).unwrap(), target);
            }
        }
    }

    #[test]
    fn binding_without_boxes_admits_one_key() {
        // Fixed strategy: both openings (to 0 and to 1) chosen before z2 is
        // known; P2's answer d may depend on z2 arbitrarily.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in [2u32, 4, 8] {
            let f = FieldSpec::binary(k).unwrap();
            for _ in 0..20 {
                let z1 = f.random_nonzero(&mut rng);
                let c = f.random(&mut rng);
                let open0 = Opening { w1: c, w2: f.random(&mut rng) };
                let open1 = Opening { w1: f.sub(c, z1), w2: f.random(&mut rng) };
                let d_table: Vec<u64> = f.elements().map(|_| f.random(&mut rng)).collect();
                let mut good = 0;
                for z2 in f.elements() {
                    let com = PrCommitment { keys: CommitKeys { z1, z2 }, c, d: d_table[z2 as usize] };
                    let both = pr_unveil_verify(&f, &com, open0, Mode::Bit) == Ok(0)
                        && pr_unveil_verify(&f, &com, open1, Mode::Bit) == Ok(1);
                    good += both as u32;
                }
                assert!(good <= 1);
            }
        }
    }
}
