use std::collections::{HashMap, VecDeque};

use rand::RngCore;

use super::{shared_tape, BoxError, BulletinBoard, Functional, PartyClass, PrBoxBank};
use crate::runtime::wire::{Reader, Writer};
use crate::runtime::{Endpoint, PartyId, Program, RuntimeError};

const TAG_BOX_A: u8 = 0xB1;
const TAG_BOX_B: u8 = 0xB2;
const TAG_BOX_ANSWER: u8 = 0xB3;
const TAG_POST: u8 = 0xC1;
const TAG_READ: u8 = 0xC2;
const TAG_AWAIT: u8 = 0xC3;
const TAG_POSTS: u8 = 0xC4;
const TAG_RAND_REQ: u8 = 0xD1;
const TAG_RAND: u8 = 0xD2;

fn program_error(party: PartyId, e: BoxError) -> RuntimeError {
    RuntimeError::Program { party, message: e.to_string() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoxRequest {
    A { phi: Functional, input: u64 },
    B { index: u64, input: u64 },
}

impl BoxRequest {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            BoxRequest::A { phi, input } => {
                let flat: Vec<u64> = phi.terms().flat_map(|(i, c)| [i, c]).collect();
                Writer::new(TAG_BOX_A).elems(&flat).u64(*input).finish()
            }
            BoxRequest::B { index, input } => Writer::new(TAG_BOX_B).u64(*index).u64(*input).finish(),
        }
    }

    pub fn decode(buf: &[u8]) -> Result<Self, RuntimeError> {
        match Reader::peek_tag(buf) {
            Some(TAG_BOX_A) => {
                let mut r = Reader::expect(buf, TAG_BOX_A)?;
                let flat = r.elems()?;
                let input = r.u64()?;
                r.end()?;
                if flat.len() % 2 != 0 {
                    return Err(RuntimeError::Decode("odd functional length".into()));
                }
                let terms: Vec<(u64, u64)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
                // coefficients are already canonical; merging happens in the bank's field
                Ok(BoxRequest::A { phi: Functional::from_canonical(terms), input })
            }
            Some(TAG_BOX_B) => {
                let mut r = Reader::expect(buf, TAG_BOX_B)?;
                let (index, input) = (r.u64()?, r.u64()?);
                r.end()?;
                Ok(BoxRequest::B { index, input })
            }
            _ => Err(RuntimeError::Decode("not a box request".into())),
        }
    }
}

/// Sends one request to `P^` and waits for its answer.
pub async fn box_query(ep: &Endpoint, req: BoxRequest) -> Result<u64, RuntimeError> {
    ep.send(PartyId::p_hat(), req.encode())?;
    let reply = ep.recv(PartyId::p_hat()).await?;
    let mut r = Reader::expect(&reply, TAG_BOX_ANSWER)?;
    let v = r.u64()?;
    r.end()?;
    Ok(v)
}

/// `P^` serving an indexed PR-box bank. Side-A queries that arrive before
/// the matching side-B input are held and answered once it arrives.
pub fn pr_box_program(bank: PrBoxBank) -> Program {
    let me = PartyId::p_hat();
    Program::new(me, move |ep: Endpoint| async move {
        let mut bank = bank;
        let mut pending: VecDeque<(PartyId, Functional, u64)> = VecDeque::new();
        let answer = |v: u64| Writer::new(TAG_BOX_ANSWER).u64(v).finish();
        loop {
            let (from, msg) = ep.recv_any().await?;
            match BoxRequest::decode(&msg)? {
                BoxRequest::B { index, input } => {
                    let x = bank.query_b(index, input).map_err(|e| program_error(me, e))?;
                    ep.send(from, answer(x))?;
                    let mut still = VecDeque::new();
                    for (who, phi, a) in pending.drain(..) {
                        match bank.query_a(&phi, a).map_err(|e| program_error(me, e))? {
                            Some(u) => ep.send(who, answer(u))?,
                            None => still.push_back((who, phi, a)),
                        }
                    }
                    pending = still;
                }
                BoxRequest::A { phi, input } => match bank.query_a(&phi, input).map_err(|e| program_error(me, e))? {
                    Some(u) => ep.send(from, answer(u))?,
                    None => pending.push_back((from, phi, input)),
                },
            }
        }
    })
}

pub fn bulletin_post(ep: &Endpoint, payload: &[u8]) -> Result<(), RuntimeError> {
    ep.send(PartyId::v_hat(), Writer::new(TAG_POST).bytes(payload).finish())
}

fn decode_posts(reply: &[u8]) -> Result<Vec<Vec<u8>>, RuntimeError> {
    let mut r = Reader::expect(reply, TAG_POSTS)?;
    let n = r.u32()?;
    let posts = (0..n).map(|_| r.bytes()).collect::<Result<_, _>>()?;
    r.end()?;
    Ok(posts)
}

pub async fn bulletin_read(ep: &Endpoint) -> Result<Vec<Vec<u8>>, RuntimeError> {
    ep.send(PartyId::v_hat(), Writer::new(TAG_READ).finish())?;
    decode_posts(&ep.recv(PartyId::v_hat()).await?)
}

/// Blocks until the board holds at least `n` posts, then reads it.
pub async fn bulletin_await(ep: &Endpoint, n: u32) -> Result<Vec<Vec<u8>>, RuntimeError> {
    ep.send(PartyId::v_hat(), Writer::new(TAG_AWAIT).u32(n).finish())?;
    decode_posts(&ep.recv(PartyId::v_hat()).await?)
}

/// `V^` as a bulletin board for the given verifiers.
pub fn bulletin_program(attached: Vec<PartyId>) -> Program {
    let me = PartyId::v_hat();
    Program::new(me, move |ep: Endpoint| async move {
        let mut board = BulletinBoard::new(attached);
        let mut waiting: Vec<(PartyId, u32)> = Vec::new();
        let snapshot = |board: &BulletinBoard, who: PartyId| -> Result<Vec<u8>, RuntimeError> {
            let posts = board.read(who).map_err(|e| program_error(me, e))?;
            let mut w = Writer::new(TAG_POSTS).u32(posts.len() as u32);
            for p in &posts {
                w = w.bytes(p);
            }
            Ok(w.finish())
        };
        loop {
            let (from, msg) = ep.recv_any().await?;
            match Reader::peek_tag(&msg) {
                Some(TAG_POST) => {
                    let mut r = Reader::expect(&msg, TAG_POST)?;
                    let payload = r.bytes()?;
                    r.end()?;
                    board.post(from, payload).map_err(|e| program_error(me, e))?;
                }
                Some(TAG_READ) => ep.send(from, snapshot(&board, from)?)?,
                Some(TAG_AWAIT) => {
                    let mut r = Reader::expect(&msg, TAG_AWAIT)?;
                    waiting.push((from, r.u32()?));
                }
                _ => return Err(RuntimeError::Decode("not a bulletin request".into())),
            }
            let mut i = 0;
            while i < waiting.len() {
                if board.len() >= waiting[i].1 as usize {
                    let (who, _) = waiting.remove(i);
                    ep.send(who, snapshot(&board, who)?)?;
                } else {
                    i += 1;
                }
            }
        }
    })
}

/// A correlator handing every attached party the same random stream.
pub fn shared_randomness_program(party: PartyId, seed: u64) -> Program {
    Program::new(party, move |ep: Endpoint| async move {
        let mut tape = shared_tape(seed, PartyClass::Provers);
        let mut stream: Vec<u8> = Vec::new();
        let mut cursors: HashMap<PartyId, usize> = HashMap::new();
        loop {
            let (from, msg) = ep.recv_any().await?;
            let mut r = Reader::expect(&msg, TAG_RAND_REQ)?;
            let n = r.u32()? as usize;
            let at = cursors.entry(from).or_insert(0);
            if stream.len() < *at + n {
                let mut more = vec![0; *at + n - stream.len()];
                tape.fill_bytes(&mut more);
                stream.extend_from_slice(&more);
            }
            ep.send(from, Writer::new(TAG_RAND).bytes(&stream[*at..*at + n]).finish())?;
            *at += n;
        }
    })
}

pub async fn shared_randomness_read(ep: &Endpoint, correlator: PartyId, n: u32) -> Result<Vec<u8>, RuntimeError> {
    ep.send(correlator, Writer::new(TAG_RAND_REQ).u32(n).finish())?;
    let reply = ep.recv(correlator).await?;
    let mut r = Reader::expect(&reply, TAG_RAND)?;
    let bytes = r.bytes()?;
    r.end()?;
    Ok(bytes)
}
