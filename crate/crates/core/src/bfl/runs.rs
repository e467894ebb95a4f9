use serde::{Deserialize, Serialize};

use super::provers::{BflProver, BflResponder, BflStrategy};
use super::questions::{multilinearity_test, BflCoins};
use super::sumcheck::sumcheck_rounds;
use super::{BflError, Oracle3SatInstance};
use crate::boxes::{bulletin_await, bulletin_post, bulletin_program, shared_tape, PartyClass};
use crate::fields::{FieldSpec, UnivariatePoly};
use crate::runtime::wire::{Reader, Writer};
use crate::runtime::{
    build_topology, derive_seed, run_protocol, AllAccept, CorrelatorKind, AllAcceptAndEqual, Endpoint, PartyId, Program, Seeds,
    TapeEntry, TopologySpec, Transcript, V0Rule, Verdict,
};

/// Tape label under which both verifiers record the answer to `Q_i`.
pub const LABEL_CROSS_ANSWER: u8 = 1;

const TAG_POLY: u8 = 0x31;
const TAG_CHALLENGE: u8 = 0x32;
const TAG_ENDPOINT: u8 = 0x33;
const TAG_QUESTIONS: u8 = 0x34;
const TAG_ANSWERS: u8 = 0x35;
const TAG_CROSS_Q: u8 = 0x36;
const TAG_CROSS_A: u8 = 0x37;
const TAG_POST: u8 = 0x38;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BflFailure {
    /// 1-based sumcheck round.
    Sumcheck(usize),
    FinalCheck,
    /// 0-based line test.
    Multilinearity(usize),
    CrossCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BflOutcome {
    pub verdict: Verdict,
    pub failure: Option<BflFailure>,
}

/// `s_m = f(z, Q, a)^2` at the end of the sumcheck.
fn final_check(field: &FieldSpec, inst: &Oracle3SatInstance, point: &[u64], claim: u64, a: [u64; 3]) -> bool {
    let v = inst.f_with(field, point, a);
    field.mul(v, v) == claim
}

/// The first verifier's side without a runtime. On success, the first
/// prover's answers to all `k + 3` questions.
fn first_phase(
    field: &FieldSpec,
    inst: &Oracle3SatInstance,
    coins: &BflCoins,
    p1: &mut dyn BflProver,
) -> Result<Vec<u64>, BflFailure> {
    let challenges = coins.sumcheck_challenges();
    let (state, failed) =
        sumcheck_rounds(field, inst.round_degree(), &challenges, |p, c| p1.sumcheck_round(p, c));
    if let Some(round) = failed {
        return Err(BflFailure::Sumcheck(round));
    }
    let claim = state.claims[inst.m()];
    let a = p1.endpoint(&challenges, claim);
    if !final_check(field, inst, &challenges, claim, a) {
        return Err(BflFailure::FinalCheck);
    }
    let mut answers: Vec<u64> = coins.plan.line_questions().iter().map(|q| p1.answer(q)).collect();
    multilinearity_test(field, &answers, &coins.plan).map_err(BflFailure::Multilinearity)?;
    answers.extend_from_slice(&a);
    Ok(answers)
}

/// Direct execution with no runtime: the standard-model reference.
pub fn run_bfl_reference(
    field: FieldSpec,
    inst: &Oracle3SatInstance,
    strategy: &BflStrategy,
    seeds: Seeds,
) -> Result<BflOutcome, BflError> {
    let coins = BflCoins::draw(&field, inst, &mut shared_tape(seeds.verifiers, PartyClass::Verifiers));
    let (mut p1, mut p2) = strategy.build(field, inst, seeds.provers)?;
    let (verdict, failure) = match first_phase(&field, inst, &coins, p1.as_mut()) {
        Err(failure) => (Verdict::Reject, Some(failure)),
        Ok(answers) if p2.answer(coins.cross_question()) == answers[coins.index] => (Verdict::Accept, None),
        Ok(_) => (Verdict::Reject, Some(BflFailure::CrossCheck)),
    };
    Ok(BflOutcome { verdict, failure })
}

fn p1_program(field: FieldSpec, inst: Oracle3SatInstance, mut p1: Box<dyn BflProver>) -> Program {
    Program::new(PartyId::prover(1), move |ep: Endpoint| async move {
        let v1 = PartyId::verifier(1);
        let mut prefix = Vec::with_capacity(inst.m());
        let mut claim = 0;
        for _ in 0..inst.m() {
            let g = p1.sumcheck_round(&prefix, claim);
            ep.send(v1, Writer::new(TAG_POLY).elems(&g).finish())?;
            let buf = ep.recv(v1).await?;
            let mut r = Reader::expect(&buf, TAG_CHALLENGE)?;
            let x = r.u64()?;
            r.end()?;
            claim = UnivariatePoly::new(field, g).map(|g| g.eval(x)).unwrap_or(0);
            prefix.push(x);
        }
        let a = p1.endpoint(&prefix, claim);
        ep.send(v1, Writer::new(TAG_ENDPOINT).elems(&a).finish())?;
        let buf = ep.recv(v1).await?;
        let mut r = Reader::expect(&buf, TAG_QUESTIONS)?;
        let flat = r.elems()?;
        r.end()?;
        let answers: Vec<u64> = flat.chunks(inst.s()).map(|q| p1.answer(q)).collect();
        ep.send(v1, Writer::new(TAG_ANSWERS).elems(&answers).finish())?;
        Ok(())
    })
}

fn p2_program(mut p2: Box<dyn BflResponder>, verifier: PartyId) -> Program {
    Program::new(PartyId::prover(2), move |ep: Endpoint| async move {
        let buf = ep.recv(verifier).await?;
        let mut r = Reader::expect(&buf, TAG_CROSS_Q)?;
        let q = r.elems()?;
        r.end()?;
        ep.send(verifier, Writer::new(TAG_CROSS_A).u64(p2.answer(&q)).finish())?;
        Ok(())
    })
}

/// V1's conversation with P1 over the runtime. `Ok(None)` is a reject.
async fn first_phase_remote(
    ep: &Endpoint,
    field: &FieldSpec,
    inst: &Oracle3SatInstance,
    coins: &BflCoins,
) -> Result<Option<Vec<u64>>, crate::runtime::RuntimeError> {
    let p1 = PartyId::prover(1);
    let challenges = coins.sumcheck_challenges();
    let mut claim = 0;
    for &x in &challenges {
        let buf = ep.recv(p1).await?;
        let mut r = Reader::expect(&buf, TAG_POLY)?;
        let coeffs = r.elems()?;
        r.end()?;
        let Ok(g) = UnivariatePoly::with_bound(*field, coeffs, inst.round_degree()) else { return Ok(None) };
        if field.add(g.eval(0), g.eval(1)) != claim {
            return Ok(None);
        }
        claim = g.eval(x);
        ep.send(p1, Writer::new(TAG_CHALLENGE).u64(x).finish())?;
    }
    let buf = ep.recv(p1).await?;
    let mut r = Reader::expect(&buf, TAG_ENDPOINT)?;
    let a: [u64; 3] = r.elems()?.try_into().map_err(|_| crate::runtime::RuntimeError::Decode("endpoint".into()))?;
    r.end()?;
    if !final_check(field, inst, &challenges, claim, a) {
        return Ok(None);
    }
    let flat: Vec<u64> = coins.plan.line_questions().concat();
    ep.send(p1, Writer::new(TAG_QUESTIONS).elems(&flat).finish())?;
    let buf = ep.recv(p1).await?;
    let mut r = Reader::expect(&buf, TAG_ANSWERS)?;
    let mut answers = r.elems()?;
    r.end()?;
    if answers.len() != coins.plan.line_questions().len() || multilinearity_test(field, &answers, &coins.plan).is_err() {
        return Ok(None);
    }
    answers.extend_from_slice(&a);
    Ok(Some(answers))
}

async fn ask_second_prover(ep: &Endpoint, q: &[u64]) -> Result<u64, crate::runtime::RuntimeError> {
    let p2 = PartyId::prover(2);
    ep.send(p2, Writer::new(TAG_CROSS_Q).elems(q).finish())?;
    let buf = ep.recv(p2).await?;
    let mut r = Reader::expect(&buf, TAG_CROSS_A)?;
    let a = r.u64()?;
    r.end()?;
    Ok(a)
}

fn run_programs(
    spec: TopologySpec,
    programs: Vec<Program>,
    seeds: Seeds,
    rule: &dyn V0Rule,
) -> Result<(Verdict, Transcript), BflError> {
    let topo = build_topology(spec)?;
    let transcript = run_protocol(&topo, programs, seeds, rule).map_err(|abort| BflError::Runtime(abort.error))?;
    Ok((transcript.verdict.unwrap_or(Verdict::Reject), transcript))
}

/// The locality-explicit form: V1 and V2 derive every coin from `S`, never
/// talk, and V0 compares their tapes.
pub fn run_bfl_lemip(
    field: FieldSpec,
    inst: &Oracle3SatInstance,
    strategy: &BflStrategy,
    seeds: Seeds,
) -> Result<(Verdict, Transcript), BflError> {
    let (p1, p2) = strategy.build(field, inst, seeds.provers)?;
    let (inst1, inst2) = (inst.clone(), inst.clone());
    let v1 = Program::new(PartyId::verifier(1), move |ep: Endpoint| async move {
        let coins = BflCoins::draw(&field, &inst1, &mut ep.shared_tape()?);
        match first_phase_remote(&ep, &field, &inst1, &coins).await? {
            Some(answers) => {
                ep.write_tape(TapeEntry::Flag(Verdict::Accept))?;
                ep.write_tape(TapeEntry::Value { label: LABEL_CROSS_ANSWER, elems: vec![answers[coins.index]] })?;
            }
            None => ep.write_tape(TapeEntry::Flag(Verdict::Reject))?,
        }
        Ok(())
    });
    let v2 = Program::new(PartyId::verifier(2), move |ep: Endpoint| async move {
        let coins = BflCoins::draw(&field, &inst2, &mut ep.shared_tape()?);
        let a = ask_second_prover(&ep, coins.cross_question()).await?;
        ep.write_tape(TapeEntry::Flag(Verdict::Accept))?;
        ep.write_tape(TapeEntry::Value { label: LABEL_CROSS_ANSWER, elems: vec![a] })?;
        Ok(())
    });
    let programs = vec![p1_program(field, inst.clone(), p1), p2_program(p2, PartyId::verifier(2)), v1, v2];
    run_programs(TopologySpec::local(2), programs, seeds, &AllAcceptAndEqual { verifiers: 2, label: LABEL_CROSS_ANSWER })
}

/// The classic single-verifier form: the two verifier halves share a
/// bulletin board, and the second half compares answers itself.
pub fn run_bfl_classic(
    field: FieldSpec,
    inst: &Oracle3SatInstance,
    strategy: &BflStrategy,
    seeds: Seeds,
) -> Result<(Verdict, Transcript), BflError> {
    let (p1, p2) = strategy.build(field, inst, seeds.provers)?;
    let inst1 = inst.clone();
    let v1 = Program::new(PartyId::verifier(1), move |ep: Endpoint| async move {
        let coins = BflCoins::draw(&field, &inst1, &mut ep.shared_tape()?);
        let result = first_phase_remote(&ep, &field, &inst1, &coins).await?;
        let (ok, answer) = match &result {
            Some(answers) => (1, answers[coins.index]),
            None => (0, 0),
        };
        let post = Writer::new(TAG_POST).elems(coins.cross_question()).u64(answer).u8(ok).finish();
        bulletin_post(&ep, &post)?;
        ep.write_tape(TapeEntry::Flag(Verdict::from_bool(ok == 1)))?;
        Ok(())
    });
    let v2 = Program::new(PartyId::verifier(2), move |ep: Endpoint| async move {
        let posts = bulletin_await(&ep, 1).await?;
        let mut r = Reader::expect(&posts[0], TAG_POST)?;
        let q = r.elems()?;
        let first = r.u64()?;
        let ok = r.u8()? == 1;
        r.end()?;
        let accept = if ok { ask_second_prover(&ep, &q).await? == first } else { false };
        ep.write_tape(TapeEntry::Flag(Verdict::from_bool(accept)))?;
        Ok(())
    });
    let board = bulletin_program(vec![PartyId::verifier(1), PartyId::verifier(2)]);
    let programs = vec![p1_program(field, inst.clone(), p1), p2_program(p2, PartyId::verifier(2)), v1, v2, board];
    let spec = TopologySpec::local(2).with_verifier_correlator(CorrelatorKind::BulletinBoard);
    run_programs(spec, programs, seeds, &AllAccept { verifiers: 2 })
}

/// Smallest `t` with `(1 - 1/(k+3))^t <= 1/4`: enough sequential
/// repetitions to push a cheat caught only by the cross-check index below
/// one quarter.
pub fn amplification_rounds(inst: &Oracle3SatInstance) -> usize {
    let miss = 1.0 - 1.0 / (inst.k() + 3) as f64;
    (0.25f64.ln() / miss.ln()).ceil() as usize
}

/// Which execution the repetitions use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BflMode {
    Reference,
    Classic,
    Lemip,
}

/// Sequential repetition with fresh seeds `derive_seed(seed, rep)`; accepts
/// iff every repetition accepts.
pub fn run_bfl_amplified(
    field: FieldSpec,
    inst: &Oracle3SatInstance,
    strategy: &BflStrategy,
    seed: u64,
    reps: usize,
    mode: BflMode,
) -> Result<Verdict, BflError> {
    for rep in 0..reps {
        let seeds = Seeds::from_master(derive_seed(seed, rep as u64));
        let verdict = match mode {
            BflMode::Reference => run_bfl_reference(field, inst, strategy, seeds)?.verdict,
            BflMode::Classic => run_bfl_classic(field, inst, strategy, seeds)?.0,
            BflMode::Lemip => run_bfl_lemip(field, inst, strategy, seeds)?.0,
        };
        if verdict == Verdict::Reject {
            return Ok(Verdict::Reject);
        }
    }
    Ok(Verdict::Accept)
}
