//! Correlators: shared random tapes, PR boxes over a finite field, and the
//! bulletin board.

mod bank;
mod programs;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{FieldError, FieldSpec};
use crate::runtime::PartyId;

pub use bank::{Functional, PrBoxBank};
pub use programs::{
    box_query, bulletin_await, bulletin_post, bulletin_read, bulletin_program, pr_box_program,
    shared_randomness_program, shared_randomness_read, BoxRequest,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoxError {
    #[error("side {0:?} already queried box {1}")]
    DoubleQuery(Side, u64),
    #[error("unknown box index {0}")]
    UnknownIndex(u64),
    #[error("box {0}: side-B inputs differ across a derived query")]
    MixedInputs(u64),
    #[error("dependent query with inconsistent input would reveal side B's input")]
    Inconsistent,
    #[error("party {0} is not attached")]
    Unattached(PartyId),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartyClass {
    Provers,
    Verifiers,
}

/// A class-wide random string. Streams of the same seed and class are
/// identical byte for byte.
#[derive(Clone, Debug)]
pub struct SharedTape {
    rng: ChaCha20Rng,
}

pub fn shared_tape(seed: u64, class: PartyClass) -> SharedTape {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(match class {
        PartyClass::Provers => 0x5052,
        PartyClass::Verifiers => 0x5653,
    });
    SharedTape { rng }
}

impl SharedTape {
    pub fn read(&mut self, n: usize) -> Vec<u8> {
        let mut buf = vec![0; n];
        self.rng.fill_bytes(&mut buf);
        buf
    }
}

impl RngCore for SharedTape {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// One-shot PR box over a field: side B gets `x` at once; side A gets
/// `u = a·b + x` once both inputs exist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrBox {
    field: FieldSpec,
    x: u64,
    a: Option<u64>,
    b: Option<u64>,
}

impl PrBox {
    /// Draws the side-B output before any input exists.
    pub fn new<R: rand::Rng + ?Sized>(field: FieldSpec, rng: &mut R) -> Self {
        Self { field, x: field.random(rng), a: None, b: None }
    }

    pub fn with_output(field: FieldSpec, x: u64) -> Result<Self, BoxError> {
        field.check(x)?;
        Ok(Self { field, x, a: None, b: None })
    }

    pub fn input_b(&mut self, b: u64) -> Result<u64, BoxError> {
        self.field.check(b)?;
        if self.b.is_some() {
            return Err(BoxError::DoubleQuery(Side::B, 0));
        }
        self.b = Some(b);
        Ok(self.x)
    }

    /// Returns `Some(u)` when side B has already input, otherwise `None`
    /// and the answer is available later through [`PrBox::output_a`].
    pub fn input_a(&mut self, a: u64) -> Result<Option<u64>, BoxError> {
        self.field.check(a)?;
        if self.a.is_some() {
            return Err(BoxError::DoubleQuery(Side::A, 0));
        }
        self.a = Some(a);
        Ok(self.output_a())
    }

    pub fn output_a(&self) -> Option<u64> {
        Some(self.field.add(self.field.mul(self.a?, self.b?), self.x))
    }

    pub fn output_b(&self) -> Option<u64> {
        self.b.map(|_| self.x)
    }
}

/// Append-only board readable by its attached parties.
#[derive(Clone, Debug, Default)]
pub struct BulletinBoard {
    attached: Vec<PartyId>,
    posts: Vec<(PartyId, Vec<u8>)>,
}

impl BulletinBoard {
    pub fn new(attached: Vec<PartyId>) -> Self {
        Self { attached, posts: Vec::new() }
    }

    pub fn post(&mut self, party: PartyId, payload: Vec<u8>) -> Result<(), BoxError> {
        self.guard(party)?;
        self.posts.push((party, payload));
        Ok(())
    }

    pub fn read(&self, party: PartyId) -> Result<Vec<Vec<u8>>, BoxError> {
        self.guard(party)?;
        Ok(self.posts.iter().map(|(_, p)| p.clone()).collect())
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    fn guard(&self, party: PartyId) -> Result<(), BoxError> {
        if self.attached.contains(&party) {
            Ok(())
        } else {
            Err(BoxError::Unattached(party))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::chi_square_uniform;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_a_gives_x() {
        let f = FieldSpec::binary(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut bx = PrBox::new(f, &mut rng);
        let x = bx.input_b(37).unwrap();
        assert_eq!(bx.input_a(0).unwrap(), Some(x));
    }

    #[test]
    fn bit_times_string_box() {
        let f = FieldSpec::binary(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let r = f.random(&mut rng);
            let mut bx = PrBox::new(f, &mut rng);
            let x = bx.input_b(r).unwrap();
            let u = bx.input_a(1).unwrap().unwrap();
            assert_eq!(u ^ x, r);
        }
    }

    #[test]
    fn deferred_delivery_and_one_shot() {
        let f = FieldSpec::prime(13).unwrap();
        let mut bx = PrBox::with_output(f, 5).unwrap();
        assert_eq!(bx.input_a(3).unwrap(), None);
        assert_eq!(bx.output_a(), None);
        assert_eq!(bx.input_b(4).unwrap(), 5);
        assert_eq!(bx.output_a(), Some((3 * 4 + 5) % 13));
        assert!(bx.input_a(1).is_err());
        assert!(bx.input_b(1).is_err());
    }

    #[test]
    fn correlation_law_and_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in [FieldSpec::binary(3).unwrap(), FieldSpec::prime(7).unwrap()] {
            let q = f.order() as usize;
            let (mut xs, mut us) = (vec![0u64; q], vec![0u64; q]);
            for _ in 0..10_000 {
                let (a, b) = (f.random(&mut rng), f.random(&mut rng));
                let mut bx = PrBox::new(f, &mut rng);
                let x = bx.input_b(b).unwrap();
                let u = bx.input_a(a).unwrap().unwrap();
                assert_eq!(f.sub(u, x), f.mul(a, b));
                xs[x as usize] += 1;
                us[u as usize] += 1;
            }
            assert!(chi_square_uniform(&xs).passes(0.01));
            assert!(chi_square_uniform(&us).passes(0.01));
        }
    }

    #[test]
    fn shared_tapes() {
        let mut a = shared_tape(9, PartyClass::Provers);
        let mut b = shared_tape(9, PartyClass::Provers);
        assert_eq!(a.read(32), b.read(32));
        let mut v = shared_tape(9, PartyClass::Verifiers);
        assert_ne!(shared_tape(9, PartyClass::Provers).read(32), v.read(32));
    }

    #[test]
    fn bulletin_board_basics() {
        let (v1, v2) = (PartyId::verifier(1), PartyId::verifier(2));
        let mut bb = BulletinBoard::new(vec![v1, v2]);
        assert!(bb.read(v1).unwrap().is_empty());
        bb.post(v1, b"one".to_vec()).unwrap();
        bb.post(v2, b"two".to_vec()).unwrap();
        assert_eq!(bb.read(v2).unwrap(), vec![b"one".to_vec(), b"two".to_vec()]);
        assert!(bb.post(PartyId::prover(1), vec![]).is_err());
    }
}
