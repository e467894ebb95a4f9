//! Contamination demos: the relay attack on the two-prover "ridiculous"
//! protocol, breaking the binding of the two-prover bit commitment with a
//! PR box, and the same break with a verifier that forwards one string.
//!
//! The commitment is the BGKW scheme over `GF(2^k)`: P2 answers `r` with
//! `x = b·r + w`, P1 unveils by announcing `(c, w')`, and V0 accepts iff
//! `w' + x = c·r`. A double opening succeeds when the same commitment is
//! accepted as both 0 and 1 under identical randomness.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boxes::{box_query, bulletin_await, bulletin_post, bulletin_program, pr_box_program, BoxRequest, Functional, PrBoxBank};
use crate::fields::{FieldError, FieldSpec};
use crate::runtime::wire::{Reader, Writer};
use crate::runtime::{
    build_topology, derive_seed, run_protocol, CorrelatorKind, Endpoint, PartyId, Program, RuntimeError, Seeds,
    TapeEntry, Tapes, TopologySpec, Transcript, Verdict,
};
use crate::stats::RateEstimate;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("string length must be 1..=32 bits, got {0}")]
    Length(u32),
    #[error("need at least one trial")]
    NoTrials,
}

const P1: PartyId = PartyId::prover(1);
const P2: PartyId = PartyId::prover(2);
const V1: PartyId = PartyId::verifier(1);
const V2: PartyId = PartyId::verifier(2);

const TAG_STRING: u8 = 0x61;
const TAG_OPEN_REQ: u8 = 0x62;
const TAG_OPEN: u8 = 0x63;

const LABEL_SENT: u8 = 0x30;
const LABEL_RETURNED: u8 = 0x31;
const LABEL_COMMIT: u8 = 0x32;
const LABEL_UNVEIL: u8 = 0x33;

fn check_bits(bits: u32) -> Result<(), AttackError> {
    if (1..=32).contains(&bits) {
        Ok(())
    } else {
        Err(AttackError::Length(bits))
    }
}

fn check_trials(trials: usize) -> Result<(), AttackError> {
    if trials == 0 {
        Err(AttackError::NoTrials)
    } else {
        Ok(())
    }
}

fn send_elems(ep: &Endpoint, to: PartyId, tag: u8, vs: &[u64]) -> Result<(), RuntimeError> {
    ep.send(to, Writer::new(tag).elems(vs).finish())
}

async fn recv_elems(ep: &Endpoint, from: PartyId, tag: u8) -> Result<Vec<u64>, RuntimeError> {
    let buf = ep.recv(from).await?;
    let mut r = Reader::expect(&buf, tag)?;
    let v = r.elems()?;
    r.end()?;
    Ok(v)
}

fn value(ep: &Endpoint, label: u8, elems: Vec<u64>) -> Result<(), RuntimeError> {
    ep.write_tape(TapeEntry::Value { label, elems })
}

fn accept(ep: &Endpoint) -> Result<(), RuntimeError> {
    ep.write_tape(TapeEntry::Flag(Verdict::Accept))
}

fn random_bits<R: Rng>(rng: &mut R, bits: u32) -> u64 {
    rng.gen::<u64>() & ((1u64 << bits) - 1)
}

fn prover_contact(t: &Transcript) -> usize {
    t.count_between(P1, P2)
}

// The ridiculous protocol

/// How the verifier pair handles the string `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RidiculousWiring {
    /// V1 posts `T` on the bulletin board and V2 forwards it to P2.
    Standard,
    /// The same verifier programs on local wiring: the post has no channel.
    LocalSamePrograms,
    /// Local wiring with verifiers that never carry `T` across; P2 sees an
    /// empty string and guesses.
    LocalIsolated,
}

fn ridiculous_programs(bits: u32, wiring: RidiculousWiring) -> Vec<Program> {
    let relay = wiring != RidiculousWiring::LocalIsolated;
    vec![
        Program::new(V1, move |ep: Endpoint| async move {
            let s = random_bits(&mut ep.private_rng(), bits);
            value(&ep, LABEL_SENT, vec![s])?;
            send_elems(&ep, P1, TAG_STRING, &[s])?;
            let t = recv_elems(&ep, P1, TAG_STRING).await?;
            if relay {
                bulletin_post(&ep, &Writer::new(TAG_STRING).elems(&t).finish())?;
            }
            accept(&ep)
        }),
        Program::new(V2, move |ep: Endpoint| async move {
            let t = if relay {
                let posts = bulletin_await(&ep, 1).await?;
                let mut r = Reader::expect(&posts[0], TAG_STRING)?;
                r.elems()?
            } else {
                Vec::new()
            };
            send_elems(&ep, P2, TAG_STRING, &t)?;
            let s2 = recv_elems(&ep, P2, TAG_STRING).await?;
            value(&ep, LABEL_RETURNED, s2)?;
            accept(&ep)
        }),
        // P1: T := S
        Program::new(P1, |ep: Endpoint| async move {
            let s = recv_elems(&ep, V1, TAG_STRING).await?;
            send_elems(&ep, V1, TAG_STRING, &s)
        }),
        // P2: S' := T, or a uniform guess when T is empty
        Program::new(P2, move |ep: Endpoint| async move {
            let t = recv_elems(&ep, V2, TAG_STRING).await?;
            let s2 = if t.is_empty() { vec![random_bits(&mut ep.private_rng(), bits)] } else { t };
            send_elems(&ep, V2, TAG_STRING, &s2)
        }),
    ]
}

fn ridiculous_rule(tapes: &Tapes) -> Verdict {
    let same = matches!(
        (tapes.last_value(1, LABEL_SENT), tapes.last_value(2, LABEL_RETURNED)),
        (Some(a), Some(b)) if a == b
    );
    Verdict::from_bool(same && tapes.accepted(1) && tapes.accepted(2))
}

/// One run. A run aborted by the runtime is returned as its error.
pub fn run_ridiculous(bits: u32, wiring: RidiculousWiring, seeds: Seeds) -> Result<Transcript, AttackError> {
    check_bits(bits)?;
    let spec = match wiring {
        RidiculousWiring::Standard => TopologySpec::standard(2),
        _ => TopologySpec::local(2),
    };
    let topo = build_topology(spec)?;
    let mut programs = ridiculous_programs(bits, wiring);
    if wiring == RidiculousWiring::Standard {
        programs.push(bulletin_program(vec![V1, V2]));
    }
    run_protocol(&topo, programs, seeds, &ridiculous_rule).map_err(|a| AttackError::Runtime(a.error))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidiculousReport {
    pub bits: u32,
    pub trials: usize,
    pub seed: u64,
    /// Relay provers, standard wiring.
    pub standard: RateEstimate,
    pub prover_messages: usize,
    /// The runtime error from the same programs on local wiring, if any.
    pub local_same_programs: Option<String>,
    /// Guessing provers under local wiring.
    pub local_isolated: RateEstimate,
    pub guess_bound: f64,
}

pub fn demo_ridiculous(bits: u32, trials: usize, seed: u64) -> Result<RidiculousReport, AttackError> {
    check_bits(bits)?;
    check_trials(trials)?;
    let seeds = |j: usize| Seeds::from_master(derive_seed(seed, j as u64));
    let (mut standard, mut isolated, mut contact) = (0, 0, 0);
    for j in 0..trials {
        let t = run_ridiculous(bits, RidiculousWiring::Standard, seeds(j))?;
        standard += t.accepted() as u64;
        contact += prover_contact(&t);
        isolated += run_ridiculous(bits, RidiculousWiring::LocalIsolated, seeds(j))?.accepted() as u64;
    }
    let local_same_programs = match run_ridiculous(bits, RidiculousWiring::LocalSamePrograms, seeds(0)) {
        Err(e) => Some(e.to_string()),
        Ok(_) => None,
    };
    Ok(RidiculousReport {
        bits,
        trials,
        seed,
        standard: RateEstimate::wilson(standard, trials as u64),
        prover_messages: contact,
        local_same_programs,
        local_isolated: RateEstimate::wilson(isolated, trials as u64),
        guess_bound: 0.5f64.powi(bits as i32),
    })
}

// The BGKW commitment and its binding

/// `x = b·r + w`.
pub fn bgkw_commit_field(field: &FieldSpec, b: u64, r: u64, w: u64) -> u64 {
    field.add(field.mul(b, r), w)
}

/// V0's unveil check for an announced bit `c`: `w' + x = c·r`.
pub fn bgkw_accepts(field: &FieldSpec, x: u64, r: u64, c: u64, w_prime: u64) -> bool {
    c <= 1 && field.add(w_prime, x) == field.mul(c, r)
}

/// The box-less cheater: P2 commits to 0, P1 opens to `c` using a guess
/// `g` of `r`. Both openings pass exactly when `g = r`.
pub fn guessing_double_open(field: &FieldSpec, r: u64, w: u64, g: u64) -> bool {
    let x = bgkw_commit_field(field, 0, r, w);
    (0..=1).all(|c| bgkw_accepts(field, x, r, c, field.add(w, field.mul(c, g))))
}

/// How P1 and P2 get around binding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BindingProvers {
    /// One PR box: P2 inputs `r` and sends the output `x`; P1 inputs `c`
    /// and announces the output `c·r + x`.
    PrBox,
    /// Shared `w` only; P1 guesses `r`.
    Guessing,
}

fn commitment_verifiers(field: FieldSpec, forward: Option<bool>) -> [Program; 2] {
    [
        Program::new(V2, move |ep: Endpoint| async move {
            let r = field.random(&mut ep.private_rng());
            send_elems(&ep, P2, TAG_STRING, &[r])?;
            let x = recv_elems(&ep, P2, TAG_STRING).await?;
            value(&ep, LABEL_COMMIT, [vec![r], x.clone()].concat())?;
            if forward.is_some() {
                bulletin_post(&ep, &Writer::new(TAG_STRING).elems(&x).finish())?;
            }
            accept(&ep)
        }),
        Program::new(V1, move |ep: Endpoint| async move {
            let relayed = match forward {
                Some(true) => {
                    let posts = bulletin_await(&ep, 1).await?;
                    let mut r = Reader::expect(&posts[0], TAG_STRING)?;
                    r.elems()?
                }
                _ => Vec::new(),
            };
            send_elems(&ep, P1, TAG_OPEN_REQ, &relayed)?;
            let open = recv_elems(&ep, P1, TAG_OPEN).await?;
            value(&ep, LABEL_UNVEIL, open)?;
            accept(&ep)
        }),
    ]
}

fn binding_rule(field: FieldSpec) -> impl Fn(&Tapes) -> Verdict {
    move |tapes: &Tapes| {
        let ok = match (tapes.last_value(2, LABEL_COMMIT), tapes.last_value(1, LABEL_UNVEIL)) {
            (Some(&[r, x]), Some(&[c, w])) => bgkw_accepts(&field, x, r, c, w),
            _ => false,
        };
        Verdict::from_bool(ok && tapes.accepted(1) && tapes.accepted(2))
    }
}

/// One commit-and-unveil run over local wiring, P1 opening to `target`.
pub fn run_binding(field: FieldSpec, provers: BindingProvers, target: u64, seeds: Seeds) -> Result<Transcript, AttackError> {
    let [v2, v1] = commitment_verifiers(field, None);
    let mut programs = vec![v1, v2];
    let mut spec = TopologySpec::local(2);
    match provers {
        BindingProvers::PrBox => {
            spec = spec.with_prover_correlator(CorrelatorKind::PrBoxes);
            programs.push(pr_box_program(PrBoxBank::new(field, derive_seed(seeds.provers, 0xB0C5))));
            programs.push(Program::new(P2, |ep: Endpoint| async move {
                let r = recv_elems(&ep, V2, TAG_STRING).await?[0];
                let x = box_query(&ep, BoxRequest::B { index: 0, input: r }).await?;
                send_elems(&ep, V2, TAG_STRING, &[x])
            }));
            programs.push(Program::new(P1, move |ep: Endpoint| async move {
                recv_elems(&ep, V1, TAG_OPEN_REQ).await?;
                let w = box_query(&ep, BoxRequest::A { phi: Functional::unit(0), input: target }).await?;
                send_elems(&ep, V1, TAG_OPEN, &[target, w])
            }));
        }
        BindingProvers::Guessing => {
            programs.push(Program::new(P2, move |ep: Endpoint| async move {
                let w = field.random(&mut ep.shared_tape()?);
                let r = recv_elems(&ep, V2, TAG_STRING).await?[0];
                send_elems(&ep, V2, TAG_STRING, &[bgkw_commit_field(&field, 0, r, w)])
            }));
            programs.push(Program::new(P1, move |ep: Endpoint| async move {
                let w = field.random(&mut ep.shared_tape()?);
                let g = field.random(&mut ep.private_rng());
                recv_elems(&ep, V1, TAG_OPEN_REQ).await?;
                send_elems(&ep, V1, TAG_OPEN, &[target, field.add(w, field.mul(target, g))])
            }));
        }
    }
    let topo = build_topology(spec)?;
    run_protocol(&topo, programs, seeds, &binding_rule(field)).map_err(|a| AttackError::Runtime(a.error))
}

/// Both openings of the trial-`j` commitment, under identical seeds.
fn double_open(
    run: impl Fn(u64, Seeds) -> Result<Transcript, AttackError>,
    seeds: Seeds,
) -> Result<(bool, usize), AttackError> {
    let (zero, one) = (run(0, seeds)?, run(1, seeds)?);
    Ok((zero.accepted() && one.accepted(), prover_contact(&zero) + prover_contact(&one)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BindingBreakReport {
    pub k: u32,
    pub trials: usize,
    pub seed: u64,
    pub with_box: RateEstimate,
    pub without_box: RateEstimate,
    /// Exhaustive over `r`, `w` and the guess at `exhaustive_k`.
    pub exhaustive_k: u32,
    pub exhaustive_successes: u64,
    pub exhaustive_cases: u64,
    pub exhaustive_rate: f64,
}

/// Fraction of `(r, w, g)` in `GF(2^k)^3` for which the guessing provers
/// double-open.
pub fn exhaustive_guessing_rate(k: u32) -> Result<(u64, u64), AttackError> {
    let f = FieldSpec::binary(k)?;
    let mut hits = 0;
    for r in f.elements() {
        for w in f.elements() {
            for g in f.elements() {
                hits += guessing_double_open(&f, r, w, g) as u64;
            }
        }
    }
    Ok((hits, f.order().pow(3)))
}

/// With a box, `box_trials` double openings at `GF(2^k)`; without, `trials`.
pub fn demo_prbox_binding_break(
    k: u32,
    box_trials: usize,
    trials: usize,
    exhaustive_k: u32,
    seed: u64,
) -> Result<BindingBreakReport, AttackError> {
    check_trials(box_trials.min(trials))?;
    let field = FieldSpec::binary(k)?;
    let rate = |provers: BindingProvers, n: usize, stream: u64| -> Result<RateEstimate, AttackError> {
        let mut hits = 0;
        for j in 0..n {
            let seeds = Seeds::from_master(derive_seed(derive_seed(seed, stream), j as u64));
            hits += double_open(|c, s| run_binding(field, provers, c, s), seeds)?.0 as u64;
        }
        Ok(RateEstimate::wilson(hits, n as u64))
    };
    let (exhaustive_successes, exhaustive_cases) = exhaustive_guessing_rate(exhaustive_k)?;
    Ok(BindingBreakReport {
        k,
        trials,
        seed,
        with_box: rate(BindingProvers::PrBox, box_trials, 0)?,
        without_box: rate(BindingProvers::Guessing, trials, 1)?,
        exhaustive_k,
        exhaustive_successes,
        exhaustive_cases,
        exhaustive_rate: exhaustive_successes as f64 / exhaustive_cases as f64,
    })
}

// A verifier that relays

/// P2 commits to 1, so `x = r + w`; if V1 hands P1 that `x`, P1 recovers
/// `r = x + w` and opens either way. Without it P1 guesses `r`.
fn relay_provers(field: FieldSpec, target: u64) -> [Program; 2] {
    [
        Program::new(P2, move |ep: Endpoint| async move {
            let w = field.random(&mut ep.shared_tape()?);
            let r = recv_elems(&ep, V2, TAG_STRING).await?[0];
            send_elems(&ep, V2, TAG_STRING, &[bgkw_commit_field(&field, 1, r, w)])
        }),
        Program::new(P1, move |ep: Endpoint| async move {
            let w = field.random(&mut ep.shared_tape()?);
            let g = field.random(&mut ep.private_rng());
            let relayed = recv_elems(&ep, V1, TAG_OPEN_REQ).await?;
            let r = relayed.first().map_or(g, |&x| field.sub(x, w));
            let x = field.add(r, w);
            send_elems(&ep, V1, TAG_OPEN, &[target, field.add(field.mul(target, r), x)])
        }),
    ]
}

/// One run on standard wiring; V2 posts `x` and a contaminating V1 forwards
/// it to P1, an isolating V1 does not.
pub fn run_relay(field: FieldSpec, contaminating: bool, target: u64, seeds: Seeds) -> Result<Transcript, AttackError> {
    let [v2, v1] = commitment_verifiers(field, Some(contaminating));
    let [p2, p1] = relay_provers(field, target);
    let programs = vec![v1, v2, p1, p2, bulletin_program(vec![V1, V2])];
    let topo = build_topology(TopologySpec::standard(2))?;
    run_protocol(&topo, programs, seeds, &binding_rule(field)).map_err(|a| AttackError::Runtime(a.error))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelayVerifierReport {
    pub k: u32,
    pub trials: usize,
    pub seed: u64,
    pub contaminating: RateEstimate,
    pub isolating: RateEstimate,
    pub binding_bound: f64,
    /// Messages between P1 and P2 across every contaminated run.
    pub prover_messages: usize,
    /// Runs whose messages left the declared channels.
    pub audit_failures: usize,
}

pub fn demo_relay_verifier(k: u32, trials: usize, seed: u64) -> Result<RelayVerifierReport, AttackError> {
    check_trials(trials)?;
    let field = FieldSpec::binary(k)?;
    let topo = build_topology(TopologySpec::standard(2))?;
    let (mut contaminated, mut isolated, mut contact, mut audit_failures) = (0, 0, 0, 0);
    for j in 0..trials {
        let seeds = Seeds::from_master(derive_seed(seed, j as u64));
        let (zero, one) = (run_relay(field, true, 0, seeds)?, run_relay(field, true, 1, seeds)?);
        contaminated += (zero.accepted() && one.accepted()) as u64;
        contact += prover_contact(&zero) + prover_contact(&one);
        audit_failures += zero.audit(&topo).is_err() as usize + one.audit(&topo).is_err() as usize;
        isolated += double_open(|c, s| run_relay(field, false, c, s), seeds)?.0 as u64;
    }
    Ok(RelayVerifierReport {
        k,
        trials,
        seed,
        contaminating: RateEstimate::wilson(contaminated, trials as u64),
        isolating: RateEstimate::wilson(isolated, trials as u64),
        binding_bound: 0.5f64.powi(k as i32),
        prover_messages: contact,
        audit_failures,
    })
}
