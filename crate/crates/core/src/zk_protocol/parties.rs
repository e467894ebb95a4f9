use std::cell::Cell;

use rand::{Rng, RngCore};

use super::{
    final_check_poly, fork, line_zero_lins, prover_secrets, su2_hash, su2_hash_lin, CommitterKind, FirstVerifier,
    PrecomputationBundle, SecondVerifier, SharesKind, ZkConfig, ZkLayout, ZkPhase, LABEL_OMEGA, LABEL_PHASE,
};
use crate::bfl::{BflProver, BflResponder, Oracle3SatInstance};
use crate::commitments::Lin;
use crate::committed_eval::{
    collect_cross_shares, prover_mul, prover_poly_eval, prover_triples, send_box_shares, send_cross_shares,
    verifier_mul, verifier_poly_eval, verifier_triples, CeError, CommitBackend, EquivocatingBackend, GuessingBackend,
    HonestBackend, OpeningStream, ProverBook, RandomOpeningBackend, VerifierBook,
};
use crate::fields::FieldSpec;
use crate::runtime::wire::{Reader, Writer};
use crate::runtime::{Endpoint, PartyId, Program, RuntimeError, TapeEntry, Verdict};

const TAG_CHALLENGE: u8 = 0x51;
const TAG_QUESTIONS: u8 = 0x52;
const TAG_INDEX: u8 = 0x53;
const TAG_CROSS_Q: u8 = 0x54;
const TAG_CROSS_A: u8 = 0x55;

const P1: PartyId = PartyId::prover(1);
const P2: PartyId = PartyId::prover(2);
const V1: PartyId = PartyId::verifier(1);
const V2: PartyId = PartyId::verifier(2);

fn poly_at(f: &FieldSpec, coeffs: &[Lin], x: u64) -> Lin {
    coeffs.iter().rev().fold(Lin::default(), |acc, c| acc.scale(f, x).add(f, c))
}

fn round_sum(f: &FieldSpec, coeffs: &[Lin]) -> Lin {
    poly_at(f, coeffs, 0).add(f, &poly_at(f, coeffs, 1))
}

async fn recv_one(ep: &Endpoint, from: PartyId, tag: u8) -> Result<Vec<u64>, RuntimeError> {
    let buf = ep.recv(from).await?;
    let mut r = Reader::expect(&buf, tag)?;
    let v = r.elems()?;
    r.end()?;
    Ok(v)
}

fn program_error(party: PartyId, e: CeError) -> RuntimeError {
    match e {
        CeError::Runtime(e) => e,
        other => RuntimeError::Program { party, message: other.to_string() },
    }
}

/// The first prover's steps, mirrored one for one by [`verifier_one`].
#[allow(clippy::too_many_arguments)]
async fn prove<B: CommitBackend>(
    ep: &Endpoint,
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    layout: ZkLayout,
    prover: &mut dyn BflProver,
    backend: B,
    gamma: &[u64],
    rng: &mut impl Rng,
) -> Result<(), CeError> {
    let f = cfg.field;
    let mut book = ProverBook::start(ep, f, V1, backend).await?;
    let key: Vec<Lin> = gamma.iter().map(|&g| book.commit(g)).collect();
    book.flush(ep)?;
    let mut queue = prover_triples(&mut book, ep, layout.triples, rng, &[]).await?;

    let (mut prefix, mut claim, mut prev) = (Vec::with_capacity(layout.m), 0, Lin::default());
    for _ in 0..layout.m {
        let mut g = prover.sumcheck_round(&prefix, claim);
        g.resize(layout.coeffs, 0);
        let lins: Vec<Lin> = g.iter().map(|&c| book.commit(c)).collect();
        book.flush(ep)?;
        book.prove_zero(ep, &[round_sum(&f, &lins).sub(&f, &prev)]).await?;
        let x = recv_one(ep, V1, TAG_CHALLENGE).await?.first().copied().unwrap_or(0);
        prev = poly_at(&f, &lins, x);
        claim = book.value(&prev);
        prefix.push(x);
    }

    let ends = prover.endpoint(&prefix, claim).map(|a| book.commit(a));
    book.flush(ep)?;
    let poly = final_check_poly(&f, inst.arith(), &prefix, &ends);
    let value = prover_poly_eval(&mut book, ep, &mut queue, &poly).await?;
    let square = prover_mul(&mut book, ep, &mut queue, &value, &value).await?;
    book.prove_zero(ep, &[prev.sub(&f, &square)]).await?;

    let flat = recv_one(ep, V1, TAG_QUESTIONS).await?;
    let questions: Vec<Vec<u64>> = flat.chunks(layout.s).map(<[u64]>::to_vec).collect();
    let answers: Vec<Lin> = questions.iter().map(|q| book.commit(prover.answer(q))).collect();
    book.flush(ep)?;
    book.prove_zero(ep, &line_zero_lins(&f, &questions, &answers)).await?;

    let index = recv_one(ep, V1, TAG_INDEX).await?.first().copied().unwrap_or(0) as usize;
    let (answer, question) = if index < answers.len() {
        (answers[index].clone(), questions[index].clone())
    } else {
        let j = (index - answers.len()).min(2);
        (ends[j].clone(), prefix[inst.block(j)].to_vec())
    };
    let hashed = su2_hash_lin(&f, &key, &question);
    let omega = book.commit(book.value(&answer.add(&f, &hashed)));
    book.flush(ep)?;
    book.prove_zero(ep, &[omega.sub(&f, &answer).sub(&f, &hashed)]).await?;
    book.open(ep, &[omega]).await
}

/// The first prover, or its simulator with a fake witness and an
/// equivocating committer.
pub fn prover_one(
    cfg: ZkConfig,
    inst: Oracle3SatInstance,
    layout: ZkLayout,
    mut prover: Box<dyn BflProver>,
    committer: CommitterKind,
) -> Program {
    Program::new(P1, move |ep: Endpoint| async move {
        let f = cfg.field;
        let (stream_seed, gamma) = prover_secrets(&f, layout.s, &mut ep.shared_tape()?);
        let gamma = gamma.elements();
        let mut private = ep.private_rng();
        let mut rng = fork(&mut private);
        let stream = OpeningStream::new(f, stream_seed);
        let p = prover.as_mut();
        let run = match committer {
            CommitterKind::Honest => prove(&ep, cfg, &inst, layout, p, HonestBackend::new(stream), &gamma, &mut rng).await,
            CommitterKind::Guessing => {
                let backend = GuessingBackend::new(stream, f.random_nonzero(&mut private));
                prove(&ep, cfg, &inst, layout, p, backend, &gamma, &mut rng).await
            }
            CommitterKind::Equivocating => {
                let backend = EquivocatingBackend::new(private.next_u64());
                prove(&ep, cfg, &inst, layout, p, backend, &gamma, &mut rng).await
            }
            CommitterKind::RandomOpening => {
                let backend = RandomOpeningBackend::new(private.next_u64());
                prove(&ep, cfg, &inst, layout, p, backend, &gamma, &mut rng).await
            }
        };
        run.map_err(|e| program_error(P1, e))
    })
}

/// The second prover: cross shares for every commitment, then
/// `Omega_2 = A(Q) + H(Q)` for the one question it is asked.
pub fn prover_two(cfg: ZkConfig, layout: ZkLayout, mut responder: Box<dyn BflResponder>, shares: SharesKind) -> Program {
    Program::new(P2, move |ep: Endpoint| async move {
        let f = cfg.field;
        let (stream_seed, gamma) = prover_secrets(&f, layout.s, &mut ep.shared_tape()?);
        let n = layout.commitments();
        match shares {
            SharesKind::Stream => send_cross_shares(&ep, f, V2, OpeningStream::new(f, stream_seed), n).await,
            SharesKind::Boxes => send_box_shares(&ep, V2, n).await,
        }
        .map_err(|e| program_error(P2, e))?;
        let q = recv_one(&ep, V2, TAG_CROSS_Q).await?;
        let hash = su2_hash(&f, &gamma, &q)
            .map_err(|e| RuntimeError::Program { party: P2, message: e.to_string() })?;
        ep.send(V2, Writer::new(TAG_CROSS_A).u64(f.add(responder.answer(&q), hash)).finish())?;
        Ok(())
    })
}

/// A failed check, malformed traffic, or a timeout is a reject; locality and
/// setup errors abort the run.
fn rejects(e: &CeError) -> bool {
    matches!(
        e,
        CeError::Reject(_) | CeError::Exhausted | CeError::Runtime(RuntimeError::Decode(_) | RuntimeError::Starved)
    )
}

/// `Ok(None)`: the verifier stopped early of its own accord.
async fn verify(
    ep: &Endpoint,
    cfg: ZkConfig,
    inst: &Oracle3SatInstance,
    layout: ZkLayout,
    behavior: FirstVerifier,
    phase: &Cell<ZkPhase>,
) -> Result<Option<(VerifierBook, u64)>, CeError> {
    let f = cfg.field;
    let bundle = PrecomputationBundle::derive(&f, inst, &mut ep.shared_tape()?);
    let mut private = ep.private_rng();
    let mut book = VerifierBook::start(ep, f, bundle.z1, P1)?;
    let key = book.recv_commits(ep, layout.s + 1).await?;
    phase.set(ZkPhase::Triples);
    let mut queue = verifier_triples(&mut book, ep, layout.triples, private.next_u64()).await?;

    phase.set(ZkPhase::Sumcheck);
    let mut point = bundle.coins.sumcheck_challenges();
    if behavior == FirstVerifier::BiasedChallenges {
        point.iter_mut().for_each(|x| *x = private.gen_range(0..2));
    }
    let mut prev = Lin::default();
    for &x in &point {
        let lins = book.recv_commits(ep, layout.coeffs).await?;
        book.check_zero(ep, &[round_sum(&f, &lins).sub(&f, &prev)]).await?;
        ep.send(P1, Writer::new(TAG_CHALLENGE).elems(&[x]).finish())?;
        prev = poly_at(&f, &lins, x);
    }
    if behavior == FirstVerifier::EarlyAbort {
        return Ok(None);
    }

    phase.set(ZkPhase::FinalCheck);
    let ends = book.recv_commits(ep, 3).await?;
    let ends = [ends[0].clone(), ends[1].clone(), ends[2].clone()];
    let poly = final_check_poly(&f, inst.arith(), &point, &ends);
    let value = verifier_poly_eval(&mut book, ep, &mut queue, &poly).await?;
    let square = verifier_mul(&mut book, ep, &mut queue, &value, &value).await?;
    book.check_zero(ep, &[prev.sub(&f, &square)]).await?;

    phase.set(ZkPhase::Multilinearity);
    let questions = bundle.coins.plan.line_questions().to_vec();
    ep.send(P1, Writer::new(TAG_QUESTIONS).elems(&questions.concat()).finish())?;
    let answers = book.recv_commits(ep, questions.len()).await?;
    book.check_zero(ep, &line_zero_lins(&f, &questions, &answers)).await?;

    phase.set(ZkPhase::Consistency);
    let index = bundle.coins.index;
    ep.send(P1, Writer::new(TAG_INDEX).elems(&[index as u64]).finish())?;
    let (answer, question) = if index < answers.len() {
        (answers[index].clone(), questions[index].clone())
    } else {
        let j = index - answers.len();
        (ends[j].clone(), point[inst.block(j)].to_vec())
    };
    let hashed = su2_hash_lin(&f, &key, &question);
    let omega = book.recv_commits(ep, 1).await?.remove(0);
    book.check_zero(ep, &[omega.sub(&f, &answer).sub(&f, &hashed)]).await?;
    let shown = book.recv_openings(ep, &[omega]).await?[0];
    Ok(Some((book, shown)))
}

/// The first verifier: every check against P1 in committed form. Its tape
/// carries the accept flag, the failing phase on reject, every opening it
/// checked, and `Omega_1`.
pub fn verifier_one(cfg: ZkConfig, inst: Oracle3SatInstance, layout: ZkLayout, behavior: FirstVerifier) -> Program {
    Program::new(V1, move |ep: Endpoint| async move {
        let phase = Cell::new(ZkPhase::Setup);
        match verify(&ep, cfg, &inst, layout, behavior, &phase).await {
            Ok(Some((book, omega))) => {
                book.write_records(&ep).map_err(|e| program_error(V1, e))?;
                ep.write_tape(TapeEntry::Value { label: LABEL_OMEGA, elems: vec![omega] })?;
                ep.write_tape(TapeEntry::Flag(Verdict::Accept))
            }
            Ok(None) => ep.write_tape(TapeEntry::Flag(Verdict::Reject)),
            Err(e) if rejects(&e) => {
                ep.write_tape(TapeEntry::Value { label: LABEL_PHASE, elems: vec![phase.get().code()] })?;
                ep.write_tape(TapeEntry::Flag(Verdict::Reject))
            }
            Err(e) => Err(program_error(V1, e)),
        }
    })
}

/// The second verifier: `z2` to P2, the cross shares to its tape, then
/// one question and `Omega_2`.
pub fn verifier_two(cfg: ZkConfig, inst: Oracle3SatInstance, behavior: SecondVerifier) -> Program {
    Program::new(V2, move |ep: Endpoint| async move {
        let f = cfg.field;
        let bundle = PrecomputationBundle::derive(&f, &inst, &mut ep.shared_tape()?);
        let question = match behavior {
            SecondVerifier::Honest => bundle.cross_question().to_vec(),
            SecondVerifier::SubstituteQuestion => {
                let mut rng = ep.private_rng();
                (0..inst.s()).map(|_| f.random(&mut rng)).collect()
            }
        };
        let result = async {
            collect_cross_shares(&ep, P2, bundle.z2).await?;
            ep.send(P2, Writer::new(TAG_CROSS_Q).elems(&question).finish())?;
            let buf = ep.recv(P2).await?;
            let mut r = Reader::expect(&buf, TAG_CROSS_A)?;
            let omega = r.u64()?;
            r.end()?;
            Ok::<u64, CeError>(omega)
        }
        .await;
        match result {
            Ok(omega) => {
                ep.write_tape(TapeEntry::Value { label: LABEL_OMEGA, elems: vec![omega] })?;
                ep.write_tape(TapeEntry::Flag(Verdict::Accept))
            }
            Err(e) if rejects(&e) => ep.write_tape(TapeEntry::Flag(Verdict::Reject)),
            Err(e) => Err(program_error(V2, e)),
        }
    })
}
