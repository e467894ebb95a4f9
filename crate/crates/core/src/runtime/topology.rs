use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::RuntimeError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Prover,
    Verifier,
    ProverCorrelator,
    VerifierCorrelator,
    Verdict,
}

/// A party slot: `P_i`, `V_i`, the correlators `P^`/`V^`, or the verdict
/// machine `V0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartyId {
    pub role: Role,
    pub index: usize,
}

impl PartyId {
    pub const fn prover(i: usize) -> Self {
        Self { role: Role::Prover, index: i }
    }
    pub const fn verifier(i: usize) -> Self {
        Self { role: Role::Verifier, index: i }
    }
    pub const fn p_hat() -> Self {
        Self { role: Role::ProverCorrelator, index: 0 }
    }
    pub const fn v_hat() -> Self {
        Self { role: Role::VerifierCorrelator, index: 0 }
    }
    pub const fn v0() -> Self {
        Self { role: Role::Verdict, index: 0 }
    }

    pub fn is_prover_side(&self) -> bool {
        matches!(self.role, Role::Prover | Role::ProverCorrelator)
    }

    pub fn is_correlator(&self) -> bool {
        matches!(self.role, Role::ProverCorrelator | Role::VerifierCorrelator)
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Prover => write!(f, "P{}", self.index),
            Role::Verifier => write!(f, "V{}", self.index),
            Role::ProverCorrelator => write!(f, "P^"),
            Role::VerifierCorrelator => write!(f, "V^"),
            Role::Verdict => write!(f, "V0"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    TwoWay,
    /// Only `a` may write, only `b` may read.
    OneWay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub a: PartyId,
    pub b: PartyId,
    pub dir: Direction,
}

impl ChannelSpec {
    pub fn two_way(a: PartyId, b: PartyId) -> Self {
        Self { a, b, dir: Direction::TwoWay }
    }
    pub fn one_way(a: PartyId, b: PartyId) -> Self {
        Self { a, b, dir: Direction::OneWay }
    }

    pub fn permits(&self, from: PartyId, to: PartyId) -> bool {
        (self.a == from && self.b == to) || (self.dir == Direction::TwoWay && self.b == from && self.a == to)
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dir {
            Direction::TwoWay => write!(f, "{}<->{}", self.a, self.b),
            Direction::OneWay => write!(f, "{}->{}", self.a, self.b),
        }
    }
}

/// What a correlator slot provides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorKind {
    /// `∅`: nothing at all; the slot has no party and no channels.
    Empty,
    SharedRandomness,
    BulletinBoard,
    PrBoxes,
}

/// Unvalidated description of parties and channels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub parties: Vec<PartyId>,
    pub channels: Vec<ChannelSpec>,
    pub prover_correlator: CorrelatorKind,
    pub verifier_correlator: CorrelatorKind,
}

impl TopologySpec {
    /// Local LE-MIP wiring: `P_i <-> V_i`, `V_i -> V0`, no correlators.
    pub fn local(k: usize) -> Self {
        let mut parties = vec![PartyId::v0()];
        let mut channels = Vec::new();
        for i in 1..=k {
            parties.push(PartyId::prover(i));
            parties.push(PartyId::verifier(i));
            channels.push(ChannelSpec::two_way(PartyId::verifier(i), PartyId::prover(i)));
            channels.push(ChannelSpec::one_way(PartyId::verifier(i), PartyId::v0()));
        }
        Self {
            parties,
            channels,
            prover_correlator: CorrelatorKind::Empty,
            verifier_correlator: CorrelatorKind::Empty,
        }
    }

    /// Standard-model wiring: local wiring plus a bulletin-board `V^` joining
    /// every verifier.
    pub fn standard(k: usize) -> Self {
        Self::local(k).with_verifier_correlator(CorrelatorKind::BulletinBoard)
    }

    pub fn with_verifier_correlator(mut self, kind: CorrelatorKind) -> Self {
        self.verifier_correlator = kind;
        if kind != CorrelatorKind::Empty {
            self.parties.push(PartyId::v_hat());
            let verifiers: Vec<PartyId> =
                self.parties.iter().copied().filter(|p| p.role == Role::Verifier).collect();
            for v in verifiers {
                self.channels.push(ChannelSpec::two_way(PartyId::v_hat(), v));
            }
        }
        self
    }

    pub fn with_prover_correlator(mut self, kind: CorrelatorKind) -> Self {
        self.prover_correlator = kind;
        if kind != CorrelatorKind::Empty {
            self.parties.push(PartyId::p_hat());
            let provers: Vec<PartyId> = self.parties.iter().copied().filter(|p| p.role == Role::Prover).collect();
            for p in provers {
                self.channels.push(ChannelSpec::two_way(PartyId::p_hat(), p));
            }
        }
        self
    }
}

/// A validated topology. Directed sends are looked up in a precomputed map.
#[derive(Clone, Debug)]
pub struct Topology {
    spec: TopologySpec,
    routes: HashMap<(PartyId, PartyId), usize>,
}

fn violation(ch: &ChannelSpec, reason: &str) -> RuntimeError {
    RuntimeError::TopologyViolation { channel: ch.to_string(), reason: reason.to_string() }
}

/// Checks the locality-explicit wiring rules and builds the route table.
pub fn build_topology(spec: TopologySpec) -> Result<Topology, RuntimeError> {
    let parties: BTreeSet<PartyId> = spec.parties.iter().copied().collect();
    let none = ChannelSpec::two_way(PartyId::v0(), PartyId::v0());
    if parties.len() != spec.parties.len() {
        return Err(violation(&none, "duplicate party"));
    }
    if spec.parties.iter().filter(|p| p.role == Role::Verdict).count() != 1 {
        return Err(violation(&none, "exactly one verdict machine V0 is required"));
    }
    for p in &spec.parties {
        match p.role {
            Role::Prover | Role::Verifier if p.index == 0 => {
                return Err(violation(&none, "prover and verifier indices start at 1"))
            }
            Role::ProverCorrelator if spec.prover_correlator == CorrelatorKind::Empty => {
                return Err(violation(&none, "P^ present but declared empty"))
            }
            Role::VerifierCorrelator if spec.verifier_correlator == CorrelatorKind::Empty => {
                return Err(violation(&none, "V^ present but declared empty"))
            }
            _ => {}
        }
    }

    let mut routes = HashMap::new();
    for (id, ch) in spec.channels.iter().enumerate() {
        if ch.a == ch.b {
            return Err(violation(ch, "endpoints must be distinct"));
        }
        if !parties.contains(&ch.a) || !parties.contains(&ch.b) {
            return Err(violation(ch, "endpoint is not a declared party"));
        }
        let (a, b) = (ch.a, ch.b);
        let ok = match ch.dir {
            Direction::OneWay => a.role == Role::Verifier && b.role == Role::Verdict,
            Direction::TwoWay => {
                let pair = |x: PartyId, y: PartyId| {
                    (x.role == Role::Prover && y.role == Role::Verifier && x.index == y.index)
                        || (x.role == Role::Prover && y.role == Role::ProverCorrelator)
                        || (x.role == Role::Verifier && y.role == Role::VerifierCorrelator)
                };
                pair(a, b) || pair(b, a)
            }
        };
        if !ok {
            let reason = if a.role == Role::Verdict || b.role == Role::Verdict {
                "V0 only reads one-way tapes from verifiers"
            } else if a.role == b.role {
                "parties of the same class never share a tape"
            } else {
                "channel not permitted by the locality-explicit model"
            };
            return Err(violation(ch, reason));
        }
        for (from, to) in [(a, b), (b, a)] {
            if ch.permits(from, to) && routes.insert((from, to), id).is_some() {
                return Err(violation(ch, "duplicate channel"));
            }
        }
    }

    for p in &spec.parties {
        match p.role {
            Role::Prover => {
                let v = PartyId::verifier(p.index);
                if !routes.contains_key(&(*p, v)) {
                    return Err(violation(&ChannelSpec::two_way(v, *p), "prover lacks its verifier channel"));
                }
            }
            Role::Verifier => {
                if !routes.contains_key(&(*p, PartyId::v0())) {
                    return Err(violation(&ChannelSpec::one_way(*p, PartyId::v0()), "verifier lacks its tape to V0"));
                }
            }
            _ => {}
        }
    }
    Ok(Topology { spec, routes })
}

impl Topology {
    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    pub fn parties(&self) -> &[PartyId] {
        &self.spec.parties
    }

    pub fn channels(&self) -> &[ChannelSpec] {
        &self.spec.channels
    }

    /// Channel id carrying `from -> to`, if the wiring permits it.
    pub fn route(&self, from: PartyId, to: PartyId) -> Option<usize> {
        self.routes.get(&(from, to)).copied()
    }

    /// `V^ = P^ = ∅`.
    pub fn is_local(&self) -> bool {
        self.spec.prover_correlator == CorrelatorKind::Empty && self.spec.verifier_correlator == CorrelatorKind::Empty
    }

    pub fn provers(&self) -> usize {
        self.spec.parties.iter().filter(|p| p.role == Role::Prover).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_wirings_validate() {
        build_topology(TopologySpec::local(2)).unwrap();
        build_topology(TopologySpec::standard(2)).unwrap();
        build_topology(TopologySpec::local(3).with_prover_correlator(CorrelatorKind::PrBoxes)).unwrap();
        assert!(build_topology(TopologySpec::local(2)).unwrap().is_local());
        assert!(!build_topology(TopologySpec::standard(2)).unwrap().is_local());
    }

    #[test]
    fn prover_prover_channel_rejected() {
        let mut spec = TopologySpec::local(2);
        spec.channels.push(ChannelSpec::two_way(PartyId::prover(1), PartyId::prover(2)));
        match build_topology(spec) {
            Err(RuntimeError::TopologyViolation { channel, .. }) => assert_eq!(channel, "P1<->P2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn v0_never_writes() {
        let mut spec = TopologySpec::local(2);
        spec.channels.push(ChannelSpec::one_way(PartyId::v0(), PartyId::verifier(1)));
        assert!(matches!(build_topology(spec), Err(RuntimeError::TopologyViolation { .. })));
        let mut spec = TopologySpec::local(1);
        spec.channels[1] = ChannelSpec::two_way(PartyId::verifier(1), PartyId::v0());
        assert!(matches!(build_topology(spec), Err(RuntimeError::TopologyViolation { .. })));
    }

    #[test]
    fn other_illegal_wirings() {
        let cases = [
            ChannelSpec::two_way(PartyId::verifier(1), PartyId::verifier(2)),
            ChannelSpec::two_way(PartyId::verifier(1), PartyId::prover(2)),
            ChannelSpec::two_way(PartyId::prover(1), PartyId::prover(1)),
        ];
        for ch in cases {
            let mut spec = TopologySpec::local(2);
            spec.channels.push(ch);
            assert!(build_topology(spec).is_err(), "{ch}");
        }
        // a second V0
        let mut spec = TopologySpec::local(1);
        spec.parties.push(PartyId { role: Role::Verdict, index: 1 });
        assert!(build_topology(spec).is_err());
        // missing tape to V0
        let mut spec = TopologySpec::local(1);
        spec.channels.pop();
        assert!(build_topology(spec).is_err());
    }
}
