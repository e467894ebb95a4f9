use serde::Serialize;

use super::topology::{PartyId, Role, Topology};
use super::verdict::{Tapes, Verdict};
use super::RuntimeError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub seq: u64,
    pub from: PartyId,
    pub to: PartyId,
    pub channel: usize,
    pub payload: Vec<u8>,
}

#[derive(Serialize)]
struct MessageLine<'a> {
    seq: u64,
    from: String,
    to: String,
    channel: usize,
    payload_hex: &'a str,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub tapes: Tapes,
    /// `None` when the run aborted before V0 could decide.
    pub verdict: Option<Verdict>,
    /// Verifiers whose blocked read was answered with a timeout.
    pub starved: Vec<PartyId>,
    /// Non-verifier programs still blocked when every verifier had halted.
    pub abandoned: Vec<PartyId>,
}

impl Transcript {
    pub fn accepted(&self) -> bool {
        self.verdict == Some(Verdict::Accept)
    }

    /// One JSON object per message.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            let hex = hex::encode(&m.payload);
            let line = MessageLine {
                seq: m.seq,
                from: m.from.to_string(),
                to: m.to.to_string(),
                channel: m.channel,
                payload_hex: &hex,
            };
            out.push_str(&serde_json::to_string(&line).expect("plain struct serializes"));
            out.push('\n');
        }
        out
    }

    /// Canonical byte encoding of the message log, for replay comparisons.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for m in &self.messages {
            out.extend_from_slice(&m.seq.to_le_bytes());
            out.extend_from_slice(m.from.to_string().as_bytes());
            out.push(0);
            out.extend_from_slice(m.to.to_string().as_bytes());
            out.push(0);
            out.extend_from_slice(&(m.channel as u64).to_le_bytes());
            out.extend_from_slice(&(m.payload.len() as u64).to_le_bytes());
            out.extend_from_slice(&m.payload);
        }
        out
    }

    /// Every message travels on a declared channel in a permitted direction.
    pub fn audit(&self, topology: &Topology) -> Result<(), RuntimeError> {
        for m in &self.messages {
            if topology.route(m.from, m.to) != Some(m.channel) {
                return Err(RuntimeError::LocalityViolation { from: m.from, to: m.to });
            }
        }
        Ok(())
    }

    /// True when every message is either inside a `(V_i, P_i)` pair or on
    /// `V_i`'s tape to V0.
    pub fn partitions_into_pairs(&self) -> bool {
        self.messages.iter().all(|m| {
            let (a, b) = (m.from, m.to);
            let pair = |x: PartyId, y: PartyId| {
                x.role == Role::Verifier && y.role == Role::Prover && x.index == y.index
            };
            pair(a, b) || pair(b, a) || (a.role == Role::Verifier && b.role == Role::Verdict)
        })
    }

    pub fn count_between(&self, a: PartyId, b: PartyId) -> usize {
        self.messages.iter().filter(|m| (m.from == a && m.to == b) || (m.from == b && m.to == a)).count()
    }

    /// Messages sent or received by `party`, in order.
    pub fn view(&self, party: PartyId) -> impl Iterator<Item = &Message> + '_ {
        self.messages.iter().filter(move |m| m.from == party || m.to == party)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_shape() {
        let t = Transcript {
            messages: vec![Message {
                seq: 0,
                from: PartyId::verifier(1),
                to: PartyId::prover(1),
                channel: 0,
                payload: vec![0xab, 0x01],
            }],
            ..Default::default()
        };
        let line = t.to_jsonl();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(v["from"], "V1");
        assert_eq!(v["to"], "P1");
        assert_eq!(v["payload_hex"], "ab01");
        assert_eq!(v["seq"], 0);
        assert!(t.partitions_into_pairs());
    }
}
