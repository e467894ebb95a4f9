//! Parties, declared channels, a deterministic scheduler, transcripts, and
//! the read-only verdict machine V0.

mod exec;
mod topology;
mod transcript;
mod verdict;
pub mod wire;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exec::{run_protocol, Endpoint, PartyFuture, Program, Recv, RunAbort, Runner};
pub use topology::{build_topology, ChannelSpec, CorrelatorKind, Direction, PartyId, Role, Topology, TopologySpec};
pub use transcript::{Message, Transcript};
pub use verdict::{v0_decide, AllAccept, AllAcceptAndEqual, TapeEntry, Tapes, V0Rule, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("topology violation on {channel}: {reason}")]
    TopologyViolation { channel: String, reason: String },
    #[error("locality violation: no channel carries {from} -> {to}")]
    LocalityViolation { from: PartyId, to: PartyId },
    #[error("deadlock: {blocked:?} blocked with no runnable party")]
    Deadlock { blocked: Vec<PartyId> },
    #[error("read timed out")]
    Starved,
    #[error("setup: {0}")]
    Setup(String),
    #[error("decode: {0}")]
    Decode(String),
    #[error("{party}: {message}")]
    Program { party: PartyId, message: String },
}

/// The random strings of one run: `R` (provers), `S` (verifiers), and a seed
/// from which every party's private tape is derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seeds {
    pub provers: u64,
    pub verifiers: u64,
    pub private: u64,
}

impl Seeds {
    pub fn from_master(seed: u64) -> Self {
        Self { provers: derive_seed(seed, 1), verifiers: derive_seed(seed, 2), private: derive_seed(seed, 3) }
    }
}

/// Counter-based seed derivation (SplitMix64 finalizer over `base` and
/// `index`). Distinct indices give unrelated seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn echo_programs(nonce_len: usize) -> Vec<Program> {
        vec![
            Program::new(PartyId::verifier(1), move |ep: Endpoint| async move {
                let mut nonce = vec![0u8; nonce_len];
                ep.private_rng().fill_bytes(&mut nonce);
                ep.send(PartyId::prover(1), nonce.clone())?;
                let back = ep.recv(PartyId::prover(1)).await?;
                ep.write_tape(TapeEntry::Flag(Verdict::from_bool(back == nonce)))
            }),
            Program::new(PartyId::prover(1), |ep: Endpoint| async move {
                let m = ep.recv(PartyId::verifier(1)).await?;
                ep.send(PartyId::verifier(1), m)
            }),
        ]
    }

    #[test]
    fn echo_accepts_and_replays() {
        let topo = build_topology(TopologySpec::local(1)).unwrap();
        let rule = AllAccept { verifiers: 1 };
        let a = run_protocol(&topo, echo_programs(16), Seeds::from_master(5), &rule).unwrap();
        assert_eq!(a.verdict, Some(Verdict::Accept));
        assert_eq!(a.messages.len(), 3);
        a.audit(&topo).unwrap();
        assert!(a.partitions_into_pairs());
        let b = run_protocol(&topo, echo_programs(16), Seeds::from_master(5), &rule).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
        assert_eq!(a, b);
        let c = run_protocol(&topo, echo_programs(16), Seeds::from_master(6), &rule).unwrap();
        assert_ne!(a.to_bytes(), c.to_bytes());
    }

    #[test]
    fn prover_to_prover_send_is_a_violation() {
        let topo = build_topology(TopologySpec::local(2)).unwrap();
        let mut progs = Vec::new();
        for i in 1..=2 {
            progs.push(Program::new(PartyId::verifier(i), move |ep: Endpoint| async move {
                ep.write_tape(TapeEntry::Flag(Verdict::Accept))
            }));
        }
        progs.push(Program::new(PartyId::prover(1), |ep: Endpoint| async move {
            ep.send(PartyId::prover(2), vec![1])
        }));
        progs.push(Program::new(PartyId::prover(2), |_ep: Endpoint| async move { Ok(()) }));
        let err = run_protocol(&topo, progs, Seeds::from_master(1), &AllAccept { verifiers: 2 }).unwrap_err();
        assert_eq!(err.error, RuntimeError::LocalityViolation { from: PartyId::prover(1), to: PartyId::prover(2) });
    }

    #[test]
    fn verifier_to_verifier_in_local_model_is_a_violation() {
        let topo = build_topology(TopologySpec::local(2)).unwrap();
        let mut progs = vec![
            Program::new(PartyId::verifier(1), |ep: Endpoint| async move { ep.send(PartyId::verifier(2), vec![]) }),
            Program::new(PartyId::verifier(2), |_ep: Endpoint| async move { Ok(()) }),
        ];
        for i in 1..=2 {
            progs.push(Program::new(PartyId::prover(i), |_ep: Endpoint| async move { Ok(()) }));
        }
        let err = run_protocol(&topo, progs, Seeds::from_master(1), &AllAccept { verifiers: 2 }).unwrap_err();
        assert!(matches!(err.error, RuntimeError::LocalityViolation { .. }));
    }

    #[test]
    fn every_undeclared_directed_pair_is_rejected() {
        let topo = build_topology(TopologySpec::standard(2)).unwrap();
        let parties = topo.parties().to_vec();
        for &from in &parties {
            for &to in &parties {
                if from == to || from.role == Role::Verdict {
                    continue;
                }
                let allowed = topo.route(from, to).is_some();
                let rule = AllAccept { verifiers: 0 };
                let mut progs: Vec<Program> = parties
                    .iter()
                    .filter(|p| p.role != Role::Verdict && **p != from)
                    .map(|&p| Program::new(p, |_ep: Endpoint| async move { Ok(()) }))
                    .collect();
                progs.push(Program::new(from, move |ep: Endpoint| async move { ep.send(to, vec![0]) }));
                let res = run_protocol(&topo, progs, Seeds::from_master(0), &rule);
                assert_eq!(res.is_ok(), allowed, "{from} -> {to}");
            }
        }
    }

    #[test]
    fn deadlock_and_starvation() {
        let topo = build_topology(TopologySpec::local(1)).unwrap();
        let progs = || {
            vec![
                Program::new(PartyId::verifier(1), |ep: Endpoint| async move {
                    match ep.recv(PartyId::prover(1)).await {
                        Ok(_) => ep.write_tape(TapeEntry::Flag(Verdict::Accept)),
                        Err(RuntimeError::Starved) => ep.write_tape(TapeEntry::Flag(Verdict::Reject)),
                        Err(e) => Err(e),
                    }
                }),
                Program::new(PartyId::prover(1), |ep: Endpoint| async move {
                    ep.recv(PartyId::verifier(1)).await.map(|_| ())
                }),
            ]
        };
        let rule = AllAccept { verifiers: 1 };
        let err = run_protocol(&topo, progs(), Seeds::from_master(0), &rule).unwrap_err();
        assert!(matches!(err.error, RuntimeError::Deadlock { .. }));
        let t = Runner::new(&topo, Seeds::from_master(0)).with_starvation(true).run(progs(), &rule).unwrap();
        assert_eq!(t.verdict, Some(Verdict::Reject));
        assert_eq!(t.starved, vec![PartyId::verifier(1)]);
        assert_eq!(t.abandoned, vec![PartyId::prover(1)]);
    }

    #[test]
    fn missing_program_is_a_setup_error() {
        let topo = build_topology(TopologySpec::local(1)).unwrap();
        let progs = vec![Program::new(PartyId::verifier(1), |_ep: Endpoint| async move { Ok(()) })];
        let err = run_protocol(&topo, progs, Seeds::from_master(0), &AllAccept { verifiers: 1 }).unwrap_err();
        assert!(matches!(err.error, RuntimeError::Setup(_)));
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(s.len(), 1000);
    }
}
