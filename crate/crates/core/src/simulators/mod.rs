//! PR-local simulators for the zero-knowledge protocol and the harness that
//! compares their transcripts with real ones.
//!
//! The simulator pair runs the prover programs with a fake all-false
//! witness. Its first half commits to uniform strings and opens every
//! combination through indexed PR boxes held by the prover correlator, so
//! each opening shows whatever the fake run needs. Its second half shares
//! the hash key through the provers' common string, so the two hashed
//! answers agree exactly when the verifiers asked the same question.

mod exact;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bfl::{BflStrategy, Oracle3SatInstance};
use crate::fields::BoolTable;
use crate::runtime::{derive_seed, Message, PartyId, Role, Seeds, Transcript};
use crate::stats::{chi_square_homogeneity, ChiSquareResult};
use crate::zk_protocol::{
    run_zk_with, CommitterKind, ProverSide, SharesKind, VerifierSuite, ZkConfig, ZkError, ZkPhase, ZkReport,
};

pub use exact::{
    consistency_histograms, mask_histograms, opening_histograms, ExactComparison, Histogram,
};

/// Below this many samples per side the chi-square approximation is not
/// trusted and the test refuses to run.
pub const MIN_SAMPLES: usize = 200;

/// Significance level of the indistinguishability test.
pub const ALPHA: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Zk(#[from] ZkError),
    #[error("need at least {need} samples per side, got {real} real and {sim} simulated")]
    TooFewSamples { need: usize, real: usize, sim: usize },
    #[error("simulated provers exchanged {0} messages")]
    ProverContact(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatorKind {
    /// Equivocates every opening through the indexed boxes.
    Faithful,
    /// Skips equivocation and unveils uniform openings.
    Broken,
}

/// The simulator as a prover side: a fake witness, box-backed cross shares,
/// and an equivocating (or, for the control, random) committer.
pub fn simulator_side(kind: SimulatorKind, s: usize) -> ProverSide {
    let committer = match kind {
        SimulatorKind::Faithful => CommitterKind::Equivocating,
        SimulatorKind::Broken => CommitterKind::RandomOpening,
    };
    ProverSide { strategy: BflStrategy::Honest(BoolTable::constant(s, false)), committer, shares: SharesKind::Boxes }
}

/// One simulated run against `verifiers`. Fails if the transcript shows
/// any message between the two simulating provers.
pub fn simulate(
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    verifiers: VerifierSuite,
    kind: SimulatorKind,
    seeds: Seeds,
) -> Result<ZkReport, SimError> {
    let report = run_zk_with(cfg, inst, &simulator_side(kind, inst.s()), verifiers, seeds)?;
    let contact = report.transcript.count_between(PartyId::prover(1), PartyId::prover(2));
    if contact > 0 {
        return Err(SimError::ProverContact(contact));
    }
    Ok(report)
}

/// What one verifier sees: every message it sends or receives, including
/// its tape entries to V0, cut after its last outgoing message. Anything
/// that arrives after a verifier halts is never read.
pub fn verifier_view(transcript: &Transcript, verifier: PartyId) -> Vec<&Message> {
    let mine: Vec<&Message> = transcript.messages.iter().filter(|m| m.from == verifier || m.to == verifier).collect();
    let end = mine.iter().rposition(|m| m.from == verifier).map_or(0, |i| i + 1);
    mine[..end].to_vec()
}

/// The verifiers that appear in `transcript`, in order.
fn verifiers(transcript: &Transcript) -> Vec<PartyId> {
    let mut out: Vec<PartyId> = transcript
        .messages
        .iter()
        .flat_map(|m| [m.from, m.to])
        .filter(|p| p.role == Role::Verifier)
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Canonical bytes of the verifiers' joint view: each verifier's own view
/// in turn, as sender, receiver and payload. How the scheduler interleaved
/// the two verifiers is not something either of them observes, so it is
/// left out along with sequence numbers.
pub fn canonical_view(transcript: &Transcript) -> Vec<u8> {
    let mut out = Vec::new();
    for v in verifiers(transcript) {
        for m in verifier_view(transcript, v) {
            out.extend_from_slice(m.from.to_string().as_bytes());
            out.push(0);
            out.extend_from_slice(m.to.to_string().as_bytes());
            out.push(0);
            out.extend_from_slice(&(m.payload.len() as u64).to_le_bytes());
            out.extend_from_slice(&m.payload);
        }
        out.push(0xFF);
    }
    out
}

/// Coarse features of one view plus a 16-way bucket of its hash.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ViewSignature {
    pub accepted: bool,
    pub omega_equal: bool,
    /// `ZkPhase::code`, or 0 when V1 did not reject.
    pub phase: u64,
    pub messages: usize,
    pub bucket: u8,
}

pub fn view_signature(report: &ZkReport) -> ViewSignature {
    let digest = Sha256::digest(canonical_view(&report.transcript));
    ViewSignature {
        accepted: report.verdict.is_accept(),
        omega_equal: matches!(report.omega, (Some(a), Some(b)) if a == b),
        phase: report.failed_phase.map_or(0, ZkPhase::code),
        messages: verifiers(&report.transcript).into_iter().map(|v| verifier_view(&report.transcript, v).len()).sum(),
        bucket: digest[0] & 0x0F,
    }
}

/// Per-phase outcome counts: `"accept"` or the phase V1 rejected in.
pub fn phase_breakdown(sigs: &[ViewSignature]) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for s in sigs {
        let key = match ZkPhase::from_code(s.phase) {
            _ if s.accepted => "accept".to_string(),
            Some(p) => serde_json::to_value(p).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
            None => "reject".to_string(),
        };
        *out.entry(key).or_default() += 1;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndistinguishabilityReport {
    pub real_samples: usize,
    pub sim_samples: usize,
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
    pub real_phases: BTreeMap<String, usize>,
    pub sim_phases: BTreeMap<String, usize>,
}

/// Chi-square homogeneity of two signature samples at [`ALPHA`].
pub fn indistinguishability_test(
    real: &[ViewSignature],
    sim: &[ViewSignature],
) -> Result<IndistinguishabilityReport, SimError> {
    if real.len() < MIN_SAMPLES || sim.len() < MIN_SAMPLES {
        return Err(SimError::TooFewSamples { need: MIN_SAMPLES, real: real.len(), sim: sim.len() });
    }
    let ChiSquareResult { statistic, dof, p_value } = chi_square_homogeneity(real, sim);
    Ok(IndistinguishabilityReport {
        real_samples: real.len(),
        sim_samples: sim.len(),
        statistic,
        dof,
        p_value,
        alpha: ALPHA,
        pass: p_value > ALPHA,
        real_phases: phase_breakdown(real),
        sim_phases: phase_breakdown(sim),
    })
}

/// Signatures of `n` real runs with the honest witness `witness`, seeds
/// `derive_seed(seed, j)`.
pub fn real_signatures(
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    witness: &BoolTable,
    verifiers: VerifierSuite,
    seed: u64,
    range: std::ops::Range<u64>,
) -> Result<Vec<ViewSignature>, SimError> {
    let side = ProverSide::real(BflStrategy::Honest(witness.clone()));
    range
        .map(|j| {
            let report = run_zk_with(cfg, inst, &side, verifiers, Seeds::from_master(derive_seed(seed, j)))?;
            Ok(view_signature(&report))
        })
        .collect()
}

pub fn sim_signatures(
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    kind: SimulatorKind,
    verifiers: VerifierSuite,
    seed: u64,
    range: std::ops::Range<u64>,
) -> Result<Vec<ViewSignature>, SimError> {
    range
        .map(|j| Ok(view_signature(&simulate(cfg, inst, verifiers, kind, Seeds::from_master(derive_seed(seed, j)))?)))
        .collect()
}

/// Real against simulated runs, `n` each, with independent seed streams.
pub fn compare(
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    witness: &BoolTable,
    verifiers: VerifierSuite,
    kind: SimulatorKind,
    n: usize,
    seed: u64,
) -> Result<IndistinguishabilityReport, SimError> {
    let real = real_signatures(cfg, inst, witness, verifiers, derive_seed(seed, 0), 0..n as u64)?;
    let sim = sim_signatures(cfg, inst, kind, verifiers, derive_seed(seed, 1), 0..n as u64)?;
    indistinguishability_test(&real, &sim)
}

/// Messages inside each verifier–prover pair and on each verifier tape.
pub fn pair_message_counts(transcript: &Transcript) -> [usize; 4] {
    [
        transcript.count_between(PartyId::verifier(1), PartyId::prover(1)),
        transcript.count_between(PartyId::verifier(2), PartyId::prover(2)),
        transcript.count_between(PartyId::verifier(1), PartyId::v0()),
        transcript.count_between(PartyId::verifier(2), PartyId::v0()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldSpec;
    use crate::zk_protocol::{FirstVerifier, SecondVerifier};

    fn inst() -> Oracle3SatInstance {
        // (z1 or t1) and (!b1 or t2 or !t3)
        Oracle3SatInstance::new(1, 1, vec![vec![1, 5], vec![-2, 6, -7]]).unwrap()
    }

    fn witness() -> BoolTable {
        crate::bfl::brute_force_oracle(&inst()).unwrap().unwrap()
    }

    fn cfg() -> ZkConfig {
        ZkConfig { field: FieldSpec::prime(65521).unwrap(), sigma: 2 }
    }

    #[test]
    fn simulator_is_accepted_and_box_local() {
        for j in 0..5 {
            let seeds = Seeds::from_master(derive_seed(11, j));
            let sim = simulate(cfg(), &inst(), VerifierSuite::HONEST, SimulatorKind::Faithful, seeds).unwrap();
            assert!(sim.verdict.is_accept());
            assert!(sim.openings_valid);
            assert_eq!(sim.violations, 0);
            assert_eq!(sim.omega.0, sim.omega.1);
            let real = run_zk_with(
                cfg(),
                &inst(),
                &ProverSide::real(BflStrategy::Honest(witness())),
                VerifierSuite::HONEST,
                seeds,
            )
            .unwrap();
            assert_eq!(pair_message_counts(&sim.transcript), pair_message_counts(&real.transcript));
        }
    }

    #[test]
    fn broken_simulator_is_rejected() {
        let seeds = Seeds::from_master(3);
        let sim = simulate(cfg(), &inst(), VerifierSuite::HONEST, SimulatorKind::Broken, seeds).unwrap();
        assert!(!sim.verdict.is_accept());
        assert!(sim.failed_phase.is_some());
    }

    #[test]
    fn substituted_question_splits_omegas() {
        let suite = VerifierSuite { first: FirstVerifier::Honest, second: SecondVerifier::SubstituteQuestion };
        let sim = simulate(cfg(), &inst(), suite, SimulatorKind::Faithful, Seeds::from_master(5)).unwrap();
        assert_ne!(sim.omega.0, sim.omega.1);
        assert!(!sim.verdict.is_accept());
    }

    #[test]
    fn same_sample_has_zero_statistic() {
        let sigs = sim_signatures(cfg(), &inst(), SimulatorKind::Faithful, VerifierSuite::HONEST, 1, 0..MIN_SAMPLES as u64)
            .unwrap();
        let r = indistinguishability_test(&sigs, &sigs).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
        assert_eq!(r.real_phases.get("accept"), Some(&MIN_SAMPLES));
    }

    #[test]
    fn sample_size_guard() {
        let sig = ViewSignature { accepted: true, omega_equal: true, phase: 0, messages: 1, bucket: 0 };
        assert!(matches!(indistinguishability_test(&[sig; 10], &[sig; 500]), Err(SimError::TooFewSamples { .. })));
    }
}
