//! The zero-knowledge LE-MIP for oracle-3-SAT: the locality-explicit BFL
//! protocol run on committed values. The first prover commits every
//! sumcheck coefficient and oracle answer; each check is a zero-proof on a
//! combination of commitments, and the cross-check compares two hashed
//! answers instead of the answers themselves.

mod parties;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfl::{BflCoins, BflError, BflStrategy, Oracle3SatInstance};
use crate::boxes::{pr_box_program, PrBoxBank};
use crate::commitments::Lin;
use crate::committed_eval::{check_openings, CeError, CommittedPoly, Monomial, TripleConfig};
use crate::fields::{ArithPoly, FieldError, FieldSpec};
use crate::runtime::{
    build_topology, derive_seed, run_protocol, CorrelatorKind, RuntimeError, Seeds, Tapes, TopologySpec,
    Transcript, Verdict,
};

pub use parties::{prover_one, prover_two, verifier_one, verifier_two};

#[derive(Debug, Error)]
pub enum ZkError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Bfl(#[from] BflError),
    #[error(transparent)]
    Committed(#[from] CeError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("hash key has dimension {key}, question has {question}")]
    Dimension { key: usize, question: usize },
}

/// Tape labels: `Omega` on both tapes, the failing phase on V1's.
pub const LABEL_OMEGA: u8 = 0x20;
pub const LABEL_PHASE: u8 = 0x21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZkConfig {
    pub field: FieldSpec,
    /// Triples per bucket in the multiplication audit.
    pub sigma: usize,
}

impl Default for ZkConfig {
    fn default() -> Self {
        Self { field: FieldSpec::prime(65521).expect("prime"), sigma: 8 }
    }
}

/// `H(Q) = sum a_j·Q_j + b` over `F^s`, a strongly universal-2 family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashKey {
    pub a: Vec<u64>,
    pub b: u64,
}

impl HashKey {
    pub fn sample<R: RngCore + ?Sized>(field: &FieldSpec, s: usize, rng: &mut R) -> Self {
        Self { a: (0..s).map(|_| field.random(rng)).collect(), b: field.random(rng) }
    }

    /// Key elements in commitment order: `a_1..a_s, b`.
    pub fn elements(&self) -> Vec<u64> {
        let mut out = self.a.clone();
        out.push(self.b);
        out
    }
}

pub fn su2_hash(field: &FieldSpec, key: &HashKey, q: &[u64]) -> Result<u64, ZkError> {
    if key.a.len() != q.len() {
        return Err(ZkError::Dimension { key: key.a.len(), question: q.len() });
    }
    Ok(key.a.iter().zip(q).fold(key.b, |acc, (&a, &x)| field.add(acc, field.mul(a, x))))
}

/// `H` applied to committed key elements `[a_1..a_s, b]` at a public point.
pub fn su2_hash_lin(field: &FieldSpec, key: &[Lin], q: &[u64]) -> Lin {
    let (b, a) = key.split_last().expect("key has a constant term");
    a.iter().zip(q).fold(b.clone(), |acc, (l, &x)| acc.axpy(field, x, l))
}

/// Everything V1 and V2 derive from their shared string: the commitment
/// keys and the BFL coins (questions, sumcheck point, cross-check index).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecomputationBundle {
    pub z1: u64,
    pub z2: u64,
    pub coins: BflCoins,
}

impl PrecomputationBundle {
    /// Both keys are redrawn until nonzero.
    pub fn derive<R: RngCore + ?Sized>(field: &FieldSpec, inst: &Oracle3SatInstance, rng: &mut R) -> Self {
        let coins = BflCoins::draw(field, inst, rng);
        let z1 = field.random_nonzero(rng);
        let z2 = field.random_nonzero(rng);
        Self { z1, z2, coins }
    }

    /// `Q_i`.
    pub fn cross_question(&self) -> &[u64] {
        self.coins.cross_question()
    }
}

/// Sizes of every phase, fixed by the instance and `sigma`. Both provers
/// and both verifiers compute it from public data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZkLayout {
    pub s: usize,
    pub m: usize,
    pub k: usize,
    /// Coefficients per sumcheck round.
    pub coeffs: usize,
    pub triples: TripleConfig,
}

impl ZkLayout {
    pub fn new(inst: &Oracle3SatInstance, sigma: usize) -> Self {
        let m = inst.m();
        let products: usize = inst
            .arith()
            .terms()
            .iter()
            .map(|t| t.iter().filter(|l| l.var() >= m).count().saturating_sub(1))
            .sum();
        let mults = products + 1;
        Self {
            s: inst.s(),
            m: inst.m(),
            k: inst.k(),
            coeffs: inst.round_degree() + 1,
            triples: TripleConfig { sigma, mults },
        }
    }

    /// Commitments made by the first prover in one run.
    pub fn commitments(&self) -> usize {
        (self.s + 1) + self.triples.commitments() + self.m * self.coeffs + 3 + self.k + 1
    }
}

/// `f(point, t)` with the oracle values `t` committed: public literal
/// factors fold into each monomial's coefficient.
pub fn final_check_poly(field: &FieldSpec, arith: &ArithPoly, point: &[u64], t: &[Lin; 3]) -> CommittedPoly {
    let m = point.len();
    let monomials = arith
        .terms()
        .iter()
        .map(|term| {
            let mut coeff = 1;
            let mut factors = Vec::new();
            for &l in term {
                if l.var() < m {
                    coeff = field.mul(coeff, ArithPoly::factor(field, l, point));
                } else {
                    let a = &t[l.var() - m];
                    factors.push(if l.negated() { a.clone() } else { Lin::constant(1).sub(field, a) });
                }
            }
            Monomial { coeff, factors }
        })
        .collect();
    CommittedPoly::new(monomials)
}

/// For every full group of three consecutive questions, the combination
/// that vanishes when the three answers are collinear along the axis where
/// the questions differ. Groups that do not form a line are skipped.
pub fn line_zero_lins(field: &FieldSpec, questions: &[Vec<u64>], answers: &[Lin]) -> Vec<Lin> {
    let groups = questions.len().min(answers.len()) / 3;
    (0..groups)
        .filter_map(|g| {
            let q = &questions[3 * g..3 * g + 3];
            let axis = (0..q[0].len()).find(|&c| q[0][c] != q[1][c])?;
            let [c1, c2, c3] = [q[0][axis], q[1][axis], q[2][axis]];
            let lambda = field.div(field.sub(c3, c1), field.sub(c2, c1)).ok()?;
            let [y1, y2, y3] = [&answers[3 * g], &answers[3 * g + 1], &answers[3 * g + 2]];
            Some(y3.sub(field, y1).axpy(field, field.neg(lambda), &y2.sub(field, y1)))
        })
        .collect()
}

/// Where V1 found a failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZkPhase {
    Setup,
    Triples,
    Sumcheck,
    FinalCheck,
    Multilinearity,
    Consistency,
}

impl ZkPhase {
    pub const ALL: [ZkPhase; 6] = [
        ZkPhase::Setup,
        ZkPhase::Triples,
        ZkPhase::Sumcheck,
        ZkPhase::FinalCheck,
        ZkPhase::Multilinearity,
        ZkPhase::Consistency,
    ];

    pub fn code(self) -> u64 {
        self as u64 + 1
    }

    pub fn from_code(code: u64) -> Option<Self> {
        Self::ALL.get((code as usize).checked_sub(1)?).copied()
    }
}

/// How the first prover (or its simulator) commits and opens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommitterKind {
    Honest,
    /// Opens whatever its program claims, betting on one guess of `z2`.
    Guessing,
    /// Uniform commitments, openings equivocated through PR boxes.
    Equivocating,
    /// Uniform commitments and uniform openings.
    RandomOpening,
}

/// How the second prover produces cross shares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharesKind {
    /// From the opening stream on the provers' shared string.
    Stream,
    /// Side-B outputs of the indexed PR boxes.
    Boxes,
}

/// One side of the prover tuple: an oracle strategy and how commitments
/// are made. The simulator is an instance of this with a fake witness.
#[derive(Clone, Debug, PartialEq)]
pub struct ProverSide {
    pub strategy: BflStrategy,
    pub committer: CommitterKind,
    pub shares: SharesKind,
}

impl ProverSide {
    pub fn real(strategy: BflStrategy) -> Self {
        Self { strategy, committer: CommitterKind::Honest, shares: SharesKind::Stream }
    }

    pub fn guessing(strategy: BflStrategy) -> Self {
        Self { strategy, committer: CommitterKind::Guessing, shares: SharesKind::Stream }
    }

    fn needs_boxes(&self) -> bool {
        self.shares == SharesKind::Boxes || self.committer == CommitterKind::Equivocating
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstVerifier {
    #[default]
    Honest,
    /// Stops after the sumcheck rounds and rejects.
    EarlyAbort,
    /// Sumcheck challenges drawn from `{0, 1}` instead of the field.
    BiasedChallenges,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondVerifier {
    #[default]
    Honest,
    /// Asks the second prover a fresh uniform question instead of `Q_i`.
    SubstituteQuestion,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifierSuite {
    pub first: FirstVerifier,
    pub second: SecondVerifier,
}

impl VerifierSuite {
    pub const HONEST: VerifierSuite = VerifierSuite { first: FirstVerifier::Honest, second: SecondVerifier::Honest };

    /// The honest pair and each bundled malicious variant.
    pub fn bundled() -> Vec<(&'static str, VerifierSuite)> {
        vec![
            ("honest", Self::HONEST),
            ("substitute-question", VerifierSuite { second: SecondVerifier::SubstituteQuestion, ..Self::HONEST }),
            ("early-abort", VerifierSuite { first: FirstVerifier::EarlyAbort, ..Self::HONEST }),
            ("biased-challenges", VerifierSuite { first: FirstVerifier::BiasedChallenges, ..Self::HONEST }),
        ]
    }
}

/// V0's rule: both verifiers accepted, `Omega_1 = Omega_2`, and every
/// opening V1 recorded agrees with V2's cross shares.
pub fn zk_verdict(field: &FieldSpec, tapes: &Tapes) -> Verdict {
    let equal = matches!(
        (tapes.last_value(1, LABEL_OMEGA), tapes.last_value(2, LABEL_OMEGA)),
        (Some(a), Some(b)) if a == b
    );
    Verdict::from_bool(tapes.accepted(1) && tapes.accepted(2) && equal && check_openings(field, tapes, 1, 2))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZkReport {
    pub verdict: Verdict,
    /// The phase V1 rejected in, if it did.
    pub failed_phase: Option<ZkPhase>,
    pub omega: (Option<u64>, Option<u64>),
    pub openings_valid: bool,
    pub commitments: usize,
    pub violations: usize,
    #[serde(skip)]
    pub transcript: Transcript,
}

/// One run with the given prover side and verifier programs. A prover side
/// that uses boxes runs with an indexed PR-box correlator for the provers.
pub fn run_zk_with(
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    provers: &ProverSide,
    verifiers: VerifierSuite,
    seeds: Seeds,
) -> Result<ZkReport, ZkError> {
    let layout = ZkLayout::new(inst, cfg.sigma);
    let (p1, p2) = provers.strategy.build(cfg.field, inst, seeds.provers)?;
    let mut programs = vec![
        prover_one(cfg, inst.clone(), layout, p1, provers.committer),
        prover_two(cfg, layout, p2, provers.shares),
        verifier_one(cfg, inst.clone(), layout, verifiers.first),
        verifier_two(cfg, inst.clone(), verifiers.second),
    ];
    let mut spec = TopologySpec::local(2);
    if provers.needs_boxes() {
        spec = spec.with_prover_correlator(CorrelatorKind::PrBoxes);
        programs.push(pr_box_program(PrBoxBank::new(cfg.field, derive_seed(seeds.provers, 0xB0C5))));
    }
    let topo = build_topology(spec)?;
    let field = cfg.field;
    let rule = move |tapes: &Tapes| zk_verdict(&field, tapes);
    let transcript = run_protocol(&topo, programs, seeds, &rule).map_err(|a| ZkError::Runtime(a.error))?;
    let violations = transcript.audit(&topo).map_or(1, |_| 0);
    Ok(ZkReport {
        verdict: transcript.verdict.unwrap_or(Verdict::Reject),
        failed_phase: transcript.tapes.last_value(1, LABEL_PHASE).and_then(|v| ZkPhase::from_code(v[0])),
        omega: (
            transcript.tapes.last_value(1, LABEL_OMEGA).map(|v| v[0]),
            transcript.tapes.last_value(2, LABEL_OMEGA).map(|v| v[0]),
        ),
        openings_valid: check_openings(&field, &transcript.tapes, 1, 2),
        commitments: layout.commitments(),
        violations,
        transcript,
    })
}

/// The protocol between real provers following `strategy` and honest
/// verifiers.
pub fn run_zk_lemip(
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    strategy: &BflStrategy,
    seeds: Seeds,
) -> Result<ZkReport, ZkError> {
    run_zk_with(cfg, inst, &ProverSide::real(strategy.clone()), VerifierSuite::HONEST, seeds)
}

/// Sequential repetition with seeds `derive_seed(seed, rep)`; accepts iff
/// every repetition accepts, stopping at the first reject.
pub fn run_zk_amplified(
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    provers: &ProverSide,
    seed: u64,
    reps: usize,
) -> Result<Verdict, ZkError> {
    for rep in 0..reps {
        let seeds = Seeds::from_master(derive_seed(seed, rep as u64));
        if !run_zk_with(cfg, inst, provers, VerifierSuite::HONEST, seeds)?.verdict.is_accept() {
            return Ok(Verdict::Reject);
        }
    }
    Ok(Verdict::Accept)
}

/// The provers' shared key material: the opening-stream seed and `gamma`.
fn prover_secrets<R: RngCore>(field: &FieldSpec, s: usize, rng: &mut R) -> (u64, HashKey) {
    let stream = rng.next_u64();
    (stream, HashKey::sample(field, s, rng))
}

/// A private generator seeded from a party's tape.
fn fork<R: RngCore>(rng: &mut R) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(rng.next_u64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfl::{best_constant, brute_force_oracle};
    use crate::boxes::{shared_tape, PartyClass};
    use crate::fields::BoolTable;
    use crate::runtime::PartyId;

    fn f() -> FieldSpec {
        FieldSpec::prime(65521).unwrap()
    }

    fn tiny() -> Oracle3SatInstance {
        // (z1 or t1) and (!b1 or t2 or !t3)
        Oracle3SatInstance::new(1, 1, vec![vec![1, 5], vec![-2, 6, -7]]).unwrap()
    }

    #[test]
    fn hash_examples() {
        let f5 = FieldSpec::prime(5).unwrap();
        assert_eq!(su2_hash(&f5, &HashKey { a: vec![2], b: 3 }, &[4]).unwrap(), 1);
        assert_eq!(su2_hash(&f5, &HashKey { a: vec![0, 0], b: 4 }, &[1, 2]).unwrap(), 4);
        assert!(matches!(su2_hash(&f5, &HashKey { a: vec![1], b: 0 }, &[1, 2]), Err(ZkError::Dimension { .. })));
        let key = [Lin::var(0), Lin::var(1)];
        assert_eq!(su2_hash_lin(&f5, &key, &[4]).value(&f5, &[2, 3]).unwrap(), 1);
    }

    #[test]
    fn hash_pairs_are_uniform_exhaustive() {
        for p in [2, 3, 5, 7] {
            let field = FieldSpec::prime(p).unwrap();
            for s in 1..=2usize {
                let points: Vec<Vec<u64>> = (0..p.pow(s as u32))
                    .map(|x| (0..s).map(|j| (x / p.pow(j as u32)) % p).collect())
                    .collect();
                let keys: Vec<HashKey> = (0..p.pow(s as u32 + 1))
                    .map(|x| HashKey {
                        a: (0..s).map(|j| (x / p.pow(j as u32)) % p).collect(),
                        b: x / p.pow(s as u32),
                    })
                    .collect();
                for q in &points {
                    for q2 in points.iter().filter(|q2| *q2 != q) {
                        let mut counts = vec![0u64; (p * p) as usize];
                        for key in &keys {
                            let (h1, h2) = (su2_hash(&field, key, q).unwrap(), su2_hash(&field, key, q2).unwrap());
                            counts[(h1 * p + h2) as usize] += 1;
                        }
                        let expect = keys.len() as u64 / (p * p);
                        assert!(counts.iter().all(|&c| c == expect), "p={p} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn bundle_is_deterministic() {
        let inst = tiny();
        let a = PrecomputationBundle::derive(&f(), &inst, &mut shared_tape(9, PartyClass::Verifiers));
        let b = PrecomputationBundle::derive(&f(), &inst, &mut shared_tape(9, PartyClass::Verifiers));
        assert_eq!(a, b);
        assert!(a.z1 != 0 && a.z2 != 0);
        let plan = crate::bfl::VerifierProgram::for_instance(f(), &inst).questions(&a.coins.randomness);
        assert_eq!(plan, a.coins.plan);
    }

    #[test]
    fn final_poly_matches_f() {
        let field = f();
        let inst = tiny();
        let point = [5, 9, 11, 13];
        let t = [7, 21, 100];
        let poly = final_check_poly(&field, inst.arith(), &point, &[Lin::var(0), Lin::var(1), Lin::var(2)]);
        assert_eq!(poly.eval_plain(&field, &t), inst.f_with(&field, &point, t));
        assert_eq!(poly.mul_count(), 1);
        assert_eq!(ZkLayout::new(&inst, 2).triples.mults, 2);
    }

    #[test]
    fn honest_runs_accept_without_violations() {
        let inst = tiny();
        let table = brute_force_oracle(&inst).unwrap().unwrap();
        for seed in 0..10 {
            let cfg = ZkConfig { sigma: 2, ..ZkConfig::default() };
            let r = run_zk_lemip(cfg, &inst, &BflStrategy::Honest(table.clone()), Seeds::from_master(seed)).unwrap();
            assert_eq!(r.verdict, Verdict::Accept, "seed {seed}: {:?}", r.failed_phase);
            assert_eq!((r.violations, r.failed_phase), (0, None));
            assert!(r.openings_valid && r.omega.0 == r.omega.1);
            assert_eq!(r.transcript.count_between(PartyId::verifier(1), PartyId::verifier(2)), 0);
            assert_eq!(r.transcript.count_between(PartyId::prover(1), PartyId::prover(2)), 0);
        }
    }

    #[test]
    fn cheats_are_caught_in_their_phase() {
        let inst = Oracle3SatInstance::new(0, 1, vec![vec![4], vec![-5]]).unwrap();
        let cfg = ZkConfig { sigma: 2, ..ZkConfig::default() };
        let seeds = Seeds::from_master(3);
        let r = run_zk_lemip(cfg, &inst, &BflStrategy::RandomAnswers, seeds).unwrap();
        assert_eq!((r.verdict, r.failed_phase), (Verdict::Reject, Some(ZkPhase::Sumcheck)));
        let bad = BflStrategy::Honest(best_constant(&inst));
        let r = run_zk_lemip(cfg, &inst, &bad, seeds).unwrap();
        assert_eq!((r.verdict, r.failed_phase), (Verdict::Reject, Some(ZkPhase::Sumcheck)));
        let r = run_zk_with(cfg, &inst, &ProverSide::guessing(bad), VerifierSuite::HONEST, seeds).unwrap();
        assert_eq!((r.verdict, r.failed_phase, r.openings_valid), (Verdict::Reject, None, false));
    }

    #[test]
    fn inconsistent_second_prover_breaks_omega() {
        let inst = tiny();
        let table = BoolTable::constant(1, true);
        let cfg = ZkConfig { sigma: 1, ..ZkConfig::default() };
        let r = run_zk_lemip(cfg, &inst, &BflStrategy::Inconsistent(table), Seeds::from_master(1)).unwrap();
        assert_eq!(r.failed_phase, None);
        assert_ne!(r.omega.0, r.omega.1);
        assert_eq!(r.verdict, Verdict::Reject);
    }
}
