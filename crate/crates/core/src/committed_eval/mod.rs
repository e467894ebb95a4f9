//! Proofs about committed field elements. Linear relations come for free
//! from the homomorphism; products use audited multiplication triples.
//!
//! The committing prover keeps a [`ProverBook`], its verifier a
//! [`VerifierBook`]. Both sides run the same sequence of steps, so a
//! combination [`Lin`] names the same value on both. Openings are checked
//! by the verifier for their value and recorded on its tape; V0 later
//! checks each record against the other prover's cross shares `d`.

mod poly;
mod triples;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::boxes::{box_query, BoxRequest, Functional};
use crate::commitments::{Lin, Opening};
use crate::fields::FieldSpec;
use crate::runtime::wire::{Reader, Writer};
use crate::runtime::{Endpoint, PartyId, RuntimeError, TapeEntry, Tapes};

pub use poly::{
    prover_poly_eval, run_poly_eval, verifier_poly_eval, CommittedPoly, Monomial, PolyEvalCheat, PolyEvalReport,
};
pub use triples::{
    audit_catches, prover_mul, prover_triples, verifier_mul, verifier_triples, AuditPlan, TripleConfig, TripleLins,
    TripleQueue,
};

#[derive(Debug, Error)]
pub enum CeError {
    /// The verifier caught a failed check.
    #[error("rejected: {0}")]
    Reject(&'static str),
    #[error("no audited triple left")]
    Exhausted,
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Tape labels shared by every protocol built on committed evaluation.
pub const LABEL_OPENING: u8 = 0x10;
pub const LABEL_Z2: u8 = 0x11;
pub const LABEL_CROSS_SHARES: u8 = 0x12;
pub const LABEL_KEY_REDRAWS: u8 = 0x13;

const TAG_COMMIT: u8 = 0x41;
const TAG_OPEN: u8 = 0x42;
const TAG_KEY: u8 = 0x43;
const TAG_COINS: u8 = 0x44;

/// The shared opening stream `(w1_j, w2_j)`: the committing prover and the
/// prover holding cross shares read it identically from their shared tape.
#[derive(Clone, Debug)]
pub struct OpeningStream {
    field: FieldSpec,
    rng: ChaCha20Rng,
}

impl OpeningStream {
    pub fn new(field: FieldSpec, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(0x4F50);
        Self { field, rng }
    }

    pub fn next_opening(&mut self) -> Opening {
        Opening { w1: self.field.random(&mut self.rng), w2: self.field.random(&mut self.rng) }
    }
}

/// What the committer needs to do to open one combination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpenStep {
    Ready(Opening),
    /// Ask the box bank for `u = input·z2 + sum x_j` over `phi`; then
    /// `w2 = u`.
    Equivocate { phi: Functional, input: u64, w1: u64 },
}

/// How a committing party produces commitments and openings.
pub trait CommitBackend {
    fn commit(&mut self, field: &FieldSpec, z1: u64, value: u64) -> u64;
    /// `c_lin` is the combination's `c`; `claimed` the value to show.
    fn open(&mut self, field: &FieldSpec, z1: u64, lin: &Lin, claimed: u64, c_lin: u64) -> OpenStep;
}

/// Real commitments from the shared opening stream. Openings always show
/// the true value, whatever is claimed.
#[derive(Clone, Debug)]
pub struct HonestBackend {
    stream: OpeningStream,
    openings: Vec<Opening>,
}

impl HonestBackend {
    pub fn new(stream: OpeningStream) -> Self {
        Self { stream, openings: Vec::new() }
    }

    fn true_opening(&self, field: &FieldSpec, lin: &Lin) -> Opening {
        lin.opening(field, &self.openings).expect("combination over committed indices")
    }
}

impl CommitBackend for HonestBackend {
    fn commit(&mut self, field: &FieldSpec, z1: u64, value: u64) -> u64 {
        let o = self.stream.next_opening();
        self.openings.push(o);
        field.add(field.mul(value, z1), o.w1)
    }

    fn open(&mut self, field: &FieldSpec, _z1: u64, lin: &Lin, _claimed: u64, _c_lin: u64) -> OpenStep {
        OpenStep::Ready(self.true_opening(field, lin))
    }
}

/// A committer without nonlocal help that shows any claimed value by
/// betting on one guess of `z2`: the opening passes V0 exactly when the
/// guess is right or the claim is true.
#[derive(Clone, Debug)]
pub struct GuessingBackend {
    honest: HonestBackend,
    z2_guess: u64,
}

impl GuessingBackend {
    pub fn new(stream: OpeningStream, z2_guess: u64) -> Self {
        Self { honest: HonestBackend::new(stream), z2_guess }
    }
}

impl CommitBackend for GuessingBackend {
    fn commit(&mut self, field: &FieldSpec, z1: u64, value: u64) -> u64 {
        self.honest.commit(field, z1, value)
    }

    fn open(&mut self, field: &FieldSpec, z1: u64, lin: &Lin, claimed: u64, c_lin: u64) -> OpenStep {
        let truth = self.honest.true_opening(field, lin);
        let w1 = field.sub(c_lin, field.mul(claimed, z1));
        let w2 = field.add(truth.w2, field.mul(field.sub(truth.w1, w1), self.z2_guess));
        OpenStep::Ready(Opening { w1, w2 })
    }
}

/// The simulator's committer: uniform `c`, and every opening equivocated
/// through the indexed PR boxes so that it shows the claimed value.
#[derive(Clone, Debug)]
pub struct EquivocatingBackend {
    rng: ChaCha20Rng,
}

impl EquivocatingBackend {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha20Rng::seed_from_u64(seed) }
    }
}

impl CommitBackend for EquivocatingBackend {
    fn commit(&mut self, field: &FieldSpec, _z1: u64, _value: u64) -> u64 {
        field.random(&mut self.rng)
    }

    fn open(&mut self, field: &FieldSpec, z1: u64, lin: &Lin, claimed: u64, c_lin: u64) -> OpenStep {
        let w1 = field.sub(c_lin, field.mul(claimed, z1));
        let phi = lin.functional(field);
        if phi.is_empty() {
            return OpenStep::Ready(Opening::default());
        }
        OpenStep::Equivocate { phi, input: field.neg(w1), w1 }
    }
}

/// A broken simulator's committer: uniform `c` and uniform openings.
#[derive(Clone, Debug)]
pub struct RandomOpeningBackend {
    rng: ChaCha20Rng,
}

impl RandomOpeningBackend {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha20Rng::seed_from_u64(seed) }
    }
}

impl CommitBackend for RandomOpeningBackend {
    fn commit(&mut self, field: &FieldSpec, _z1: u64, _value: u64) -> u64 {
        field.random(&mut self.rng)
    }

    fn open(&mut self, field: &FieldSpec, _z1: u64, _lin: &Lin, _claimed: u64, _c_lin: u64) -> OpenStep {
        OpenStep::Ready(Opening { w1: field.random(&mut self.rng), w2: field.random(&mut self.rng) })
    }
}

/// The committing prover's state: its commitments `c_j`, the values it
/// believes they hold, and a backend.
pub struct ProverBook<B> {
    pub field: FieldSpec,
    pub z1: u64,
    peer: PartyId,
    cs: Vec<u64>,
    values: Vec<u64>,
    outbox: Vec<u64>,
    backend: B,
}

impl<B: CommitBackend> ProverBook<B> {
    pub fn new(field: FieldSpec, z1: u64, peer: PartyId, backend: B) -> Self {
        Self { field, z1, peer, cs: Vec::new(), values: Vec::new(), outbox: Vec::new(), backend }
    }

    /// Receives `z1` from the verifier.
    pub async fn start(ep: &Endpoint, field: FieldSpec, peer: PartyId, backend: B) -> Result<Self, CeError> {
        let buf = ep.recv(peer).await?;
        let mut r = Reader::expect(&buf, TAG_KEY)?;
        let z1 = r.u64()?;
        r.end()?;
        Ok(Self::new(field, z1, peer, backend))
    }

    pub fn count(&self) -> usize {
        self.cs.len()
    }

    /// Commits to `value`; the commitment is sent at the next flush.
    pub fn commit(&mut self, value: u64) -> Lin {
        let c = self.backend.commit(&self.field, self.z1, value);
        self.cs.push(c);
        self.values.push(value);
        self.outbox.push(c);
        Lin::var(self.cs.len() - 1)
    }

    pub fn flush(&mut self, ep: &Endpoint) -> Result<(), CeError> {
        let out = std::mem::take(&mut self.outbox);
        ep.send(self.peer, Writer::new(TAG_COMMIT).elems(&out).finish())?;
        Ok(())
    }

    /// The value this prover believes `lin` holds.
    pub fn value(&self, lin: &Lin) -> u64 {
        lin.value(&self.field, &self.values).expect("combination over committed indices")
    }

    /// Opens each combination to the given claim in one message.
    pub async fn open_claims(&mut self, ep: &Endpoint, items: &[(Lin, u64)]) -> Result<(), CeError> {
        let mut flat = Vec::with_capacity(2 * items.len());
        for (lin, claimed) in items {
            let c_lin = lin.c(&self.field, &self.cs, self.z1).expect("combination over committed indices");
            let o = match self.backend.open(&self.field, self.z1, lin, *claimed, c_lin) {
                OpenStep::Ready(o) => o,
                OpenStep::Equivocate { phi, input, w1 } => {
                    let w2 = box_query(ep, BoxRequest::A { phi, input }).await?;
                    Opening { w1, w2 }
                }
            };
            flat.extend([o.w1, o.w2]);
        }
        ep.send(self.peer, Writer::new(TAG_OPEN).elems(&flat).finish())?;
        Ok(())
    }

    /// Opens each combination to the value the prover believes it holds.
    pub async fn open(&mut self, ep: &Endpoint, lins: &[Lin]) -> Result<(), CeError> {
        let items: Vec<(Lin, u64)> = lins.iter().map(|l| (l.clone(), self.value(l))).collect();
        self.open_claims(ep, &items).await
    }

    /// Opens each combination as zero.
    pub async fn prove_zero(&mut self, ep: &Endpoint, lins: &[Lin]) -> Result<(), CeError> {
        let items: Vec<(Lin, u64)> = lins.iter().map(|l| (l.clone(), 0)).collect();
        self.open_claims(ep, &items).await
    }

    /// Receives a coin seed from the verifier.
    pub async fn recv_coins(&self, ep: &Endpoint) -> Result<u64, CeError> {
        let buf = ep.recv(self.peer).await?;
        let mut r = Reader::expect(&buf, TAG_COINS)?;
        let seed = r.u64()?;
        r.end()?;
        Ok(seed)
    }
}

/// The verifier's state: the `c_j` received and every opening it checked.
pub struct VerifierBook {
    pub field: FieldSpec,
    pub z1: u64,
    peer: PartyId,
    cs: Vec<u64>,
    records: Vec<(Lin, Opening)>,
}

impl VerifierBook {
    /// Sends `z1` to the prover.
    pub fn start(ep: &Endpoint, field: FieldSpec, z1: u64, peer: PartyId) -> Result<Self, CeError> {
        ep.send(peer, Writer::new(TAG_KEY).u64(z1).finish())?;
        Ok(Self { field, z1, peer, cs: Vec::new(), records: Vec::new() })
    }

    pub fn count(&self) -> usize {
        self.cs.len()
    }

    pub fn records(&self) -> &[(Lin, Opening)] {
        &self.records
    }

    pub fn commitments(&self) -> &[u64] {
        &self.cs
    }

    /// Receives one batch of commitments; it must hold exactly `n`.
    pub async fn recv_commits(&mut self, ep: &Endpoint, n: usize) -> Result<Vec<Lin>, CeError> {
        let buf = ep.recv(self.peer).await?;
        let mut r = Reader::expect(&buf, TAG_COMMIT)?;
        let cs = r.elems()?;
        r.end()?;
        if cs.len() != n || cs.iter().any(|&c| !self.field.is_canonical(c)) {
            return Err(CeError::Reject("malformed commitments"));
        }
        let start = self.cs.len();
        self.cs.extend(cs);
        Ok((start..self.cs.len()).map(Lin::var).collect())
    }

    /// Receives openings of `lins` and returns the values they show.
    pub async fn recv_openings(&mut self, ep: &Endpoint, lins: &[Lin]) -> Result<Vec<u64>, CeError> {
        let f = self.field;
        let buf = ep.recv(self.peer).await?;
        let mut r = Reader::expect(&buf, TAG_OPEN)?;
        let flat = r.elems()?;
        r.end()?;
        if flat.len() != 2 * lins.len() || flat.iter().any(|&x| !f.is_canonical(x)) {
            return Err(CeError::Reject("malformed openings"));
        }
        let mut values = Vec::with_capacity(lins.len());
        for (lin, pair) in lins.iter().zip(flat.chunks_exact(2)) {
            let o = Opening { w1: pair[0], w2: pair[1] };
            let c = lin.c(&f, &self.cs, self.z1).map_err(|_| CeError::Reject("unknown commitment"))?;
            values.push(f.div(f.sub(c, o.w1), self.z1).map_err(|_| CeError::Reject("zero key"))?);
            self.records.push((lin.clone(), o));
        }
        Ok(values)
    }

    /// Receives openings that must all show zero.
    pub async fn check_zero(&mut self, ep: &Endpoint, lins: &[Lin]) -> Result<(), CeError> {
        if self.recv_openings(ep, lins).await?.iter().all(|&v| v == 0) {
            Ok(())
        } else {
            Err(CeError::Reject("zero-proof failed"))
        }
    }

    pub fn send_coins(&self, ep: &Endpoint, seed: u64) -> Result<(), CeError> {
        ep.send(self.peer, Writer::new(TAG_COINS).u64(seed).finish())?;
        Ok(())
    }

    /// Writes every checked opening on this verifier's tape.
    pub fn write_records(&self, ep: &Endpoint) -> Result<(), CeError> {
        for (lin, o) in &self.records {
            let data = lin.write(Writer::new(0)).u64(o.w1).u64(o.w2).finish();
            ep.write_tape(TapeEntry::Record { label: LABEL_OPENING, data })?;
        }
        Ok(())
    }
}

/// The other prover: on `z2`, sends `d_j = w1_j·z2 + w2_j` for the first `n`
/// openings of the shared stream.
pub async fn send_cross_shares(
    ep: &Endpoint,
    field: FieldSpec,
    verifier: PartyId,
    mut stream: OpeningStream,
    n: usize,
) -> Result<u64, CeError> {
    let z2 = recv_key(ep, verifier).await?;
    let ds: Vec<u64> = (0..n)
        .map(|_| {
            let o = stream.next_opening();
            field.add(field.mul(o.w1, z2), o.w2)
        })
        .collect();
    ep.send(verifier, Writer::new(TAG_COMMIT).elems(&ds).finish())?;
    Ok(z2)
}

/// The simulator's other prover: `d_j` is the side-B box output for `z2`.
pub async fn send_box_shares(ep: &Endpoint, verifier: PartyId, n: usize) -> Result<u64, CeError> {
    let z2 = recv_key(ep, verifier).await?;
    let mut ds = Vec::with_capacity(n);
    for j in 0..n {
        ds.push(box_query(ep, BoxRequest::B { index: j as u64, input: z2 }).await?);
    }
    ep.send(verifier, Writer::new(TAG_COMMIT).elems(&ds).finish())?;
    Ok(z2)
}

/// Receives a key message.
pub async fn recv_key(ep: &Endpoint, from: PartyId) -> Result<u64, CeError> {
    let buf = ep.recv(from).await?;
    let mut r = Reader::expect(&buf, TAG_KEY)?;
    let z = r.u64()?;
    r.end()?;
    Ok(z)
}

/// The second verifier: sends `z2`, receives the cross shares, and puts
/// both on its tape.
pub async fn collect_cross_shares(ep: &Endpoint, prover: PartyId, z2: u64) -> Result<Vec<u64>, CeError> {
    ep.send(prover, Writer::new(TAG_KEY).u64(z2).finish())?;
    let buf = ep.recv(prover).await?;
    let mut r = Reader::expect(&buf, TAG_COMMIT)?;
    let ds = r.elems()?;
    r.end()?;
    ep.write_tape(TapeEntry::Value { label: LABEL_Z2, elems: vec![z2] })?;
    ep.write_tape(TapeEntry::Value { label: LABEL_CROSS_SHARES, elems: ds.clone() })?;
    Ok(ds)
}

/// V0's side of every opening: each record on `opener`'s tape satisfies
/// `d - w2 = w1·z2` with `z2` and `d` from `holder`'s tape.
pub fn check_openings(field: &FieldSpec, tapes: &Tapes, opener: usize, holder: usize) -> bool {
    let (Some(z2), Some(ds)) = (tapes.last_value(holder, LABEL_Z2), tapes.last_value(holder, LABEL_CROSS_SHARES)) else {
        return false;
    };
    let [z2] = z2 else { return false };
    tapes.records(opener, LABEL_OPENING).all(|data| {
        let Ok(mut r) = Reader::expect(data, 0) else { return false };
        let (Ok(lin), Ok(w1), Ok(w2)) = (Lin::read(&mut r), r.u64(), r.u64()) else { return false };
        match lin.d(field, ds) {
            Ok(d) => field.sub(d, w2) == field.mul(w1, *z2),
            Err(_) => false,
        }
    })
}
