use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::wire::{Reader, Writer};
use super::RuntimeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    pub fn from_bool(accept: bool) -> Self {
        if accept {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

const TAG_FLAG: u8 = 0xF0;
const TAG_VALUE: u8 = 0xF1;
const TAG_RECORD: u8 = 0xF2;

/// One item written by a verifier on its one-way tape to V0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TapeEntry {
    Flag(Verdict),
    Value { label: u8, elems: Vec<u64> },
    Record { label: u8, data: Vec<u8> },
    /// Bytes that did not decode; rules treat this as a reject.
    Malformed(Vec<u8>),
}

impl TapeEntry {
    pub fn encode(&self) -> Vec<u8> {
        match self {
            TapeEntry::Flag(v) => Writer::new(TAG_FLAG).u8(v.is_accept() as u8).finish(),
            TapeEntry::Value { label, elems } => Writer::new(TAG_VALUE).u8(*label).elems(elems).finish(),
            TapeEntry::Record { label, data } => Writer::new(TAG_RECORD).u8(*label).bytes(data).finish(),
            TapeEntry::Malformed(b) => b.clone(),
        }
    }

    pub fn decode(buf: &[u8]) -> Self {
        Self::try_decode(buf).unwrap_or_else(|_| TapeEntry::Malformed(buf.to_vec()))
    }

    fn try_decode(buf: &[u8]) -> Result<Self, RuntimeError> {
        let entry = match Reader::peek_tag(buf) {
            Some(TAG_FLAG) => {
                let mut r = Reader::expect(buf, TAG_FLAG)?;
                let v = match r.u8()? {
                    0 => Verdict::Reject,
                    1 => Verdict::Accept,
                    b => return Err(RuntimeError::Decode(format!("flag byte {b}"))),
                };
                r.end()?;
                TapeEntry::Flag(v)
            }
            Some(TAG_VALUE) => {
                let mut r = Reader::expect(buf, TAG_VALUE)?;
                let label = r.u8()?;
                let elems = r.elems()?;
                r.end()?;
                TapeEntry::Value { label, elems }
            }
            Some(TAG_RECORD) => {
                let mut r = Reader::expect(buf, TAG_RECORD)?;
                let label = r.u8()?;
                let data = r.bytes()?;
                r.end()?;
                TapeEntry::Record { label, data }
            }
            _ => return Err(RuntimeError::Decode("unknown tape tag".into())),
        };
        Ok(entry)
    }
}

/// The tapes `t_1..t_k`, keyed by verifier index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tapes {
    by_verifier: BTreeMap<usize, Vec<TapeEntry>>,
}

impl Tapes {
    pub fn push(&mut self, verifier: usize, entry: TapeEntry) {
        self.by_verifier.entry(verifier).or_default().push(entry);
    }

    pub fn tape(&self, verifier: usize) -> &[TapeEntry] {
        self.by_verifier.get(&verifier).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn verifiers(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_verifier.keys().copied()
    }

    /// At least one accept flag, no reject flag, nothing malformed.
    pub fn accepted(&self, verifier: usize) -> bool {
        let t = self.tape(verifier);
        t.iter().any(|e| *e == TapeEntry::Flag(Verdict::Accept))
            && !t.iter().any(|e| matches!(e, TapeEntry::Flag(Verdict::Reject) | TapeEntry::Malformed(_)))
    }

    pub fn values(&self, verifier: usize, label: u8) -> impl Iterator<Item = &[u64]> + '_ {
        self.tape(verifier).iter().filter_map(move |e| match e {
            TapeEntry::Value { label: l, elems } if *l == label => Some(elems.as_slice()),
            _ => None,
        })
    }

    pub fn last_value(&self, verifier: usize, label: u8) -> Option<&[u64]> {
        self.values(verifier, label).last()
    }

    pub fn records(&self, verifier: usize, label: u8) -> impl Iterator<Item = &[u8]> + '_ {
        self.tape(verifier).iter().filter_map(move |e| match e {
            TapeEntry::Record { label: l, data } if *l == label => Some(data.as_slice()),
            _ => None,
        })
    }
}

/// V0's decision procedure: a pure function of the tapes.
pub trait V0Rule {
    fn decide(&self, tapes: &Tapes) -> Verdict;
}

impl<F: Fn(&Tapes) -> Verdict> V0Rule for F {
    fn decide(&self, tapes: &Tapes) -> Verdict {
        self(tapes)
    }
}

/// Accept iff every verifier `1..=k` accepted.
#[derive(Clone, Copy, Debug)]
pub struct AllAccept {
    pub verifiers: usize,
}

impl V0Rule for AllAccept {
    fn decide(&self, tapes: &Tapes) -> Verdict {
        Verdict::from_bool((1..=self.verifiers).all(|i| tapes.accepted(i)))
    }
}

/// [`AllAccept`] plus: the last value under `label` on tapes 1 and 2 agree.
#[derive(Clone, Copy, Debug)]
pub struct AllAcceptAndEqual {
    pub verifiers: usize,
    pub label: u8,
}

impl V0Rule for AllAcceptAndEqual {
    fn decide(&self, tapes: &Tapes) -> Verdict {
        let equal = match (tapes.last_value(1, self.label), tapes.last_value(2, self.label)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        };
        Verdict::from_bool(equal && AllAccept { verifiers: self.verifiers }.decide(tapes).is_accept())
    }
}

pub fn v0_decide(tapes: &Tapes, rule: &dyn V0Rule) -> Verdict {
    rule.decide(tapes)
}
