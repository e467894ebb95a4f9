//! Browser bindings for three interactive operations: query one PR box,
//! commit and double-open with and without a box, and run the
//! zero-knowledge protocol (real or simulated) on a small instance.
//!
//! Every export returns a JSON string; failures come back as
//! `{"error": "..."}` so the page has a single code path.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use lemip::bfl::{brute_force_oracle, BflStrategy, Oracle3SatInstance};
use lemip::boxes::PrBox;
use lemip::commitments::{equivocate, pr_unveil_verify, CommitKeys, Mode, Opening, PrCommitment};
use lemip::fields::FieldSpec;
use lemip::runtime::{PartyId, Role, Seeds};
use lemip::simulators::{simulate, verifier_view, SimulatorKind};
use lemip::zk_protocol::{run_zk_with, ProverSide, VerifierSuite, ZkConfig, ZkReport};

fn respond(result: Result<Value, String>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn binary_field(k: u32) -> Result<FieldSpec, String> {
    if !(1..=16).contains(&k) {
        return Err(format!("k must be in 1..=16, got {k}"));
    }
    FieldSpec::binary(k).map_err(|e| e.to_string())
}

/// One PR box over `GF(2^k)` with inputs `a` and `b`. Also reports side B's
/// output for the same box had side A typed 0, 1, or nothing.
#[wasm_bindgen]
pub fn pr_box(k: u32, a: u32, b: u32, seed: u32) -> String {
    respond(pr_box_inner(k, a.into(), b.into(), seed.into()))
}

fn pr_box_inner(k: u32, a: u64, b: u64, seed: u64) -> Result<Value, String> {
    let field = binary_field(k)?;
    let (a, b) = (field.check(a).map_err(|e| e.to_string())?, field.check(b).map_err(|e| e.to_string())?);
    let fresh = || PrBox::new(field, &mut ChaCha20Rng::seed_from_u64(seed));
    let mut bx = fresh();
    bx.input_a(a).map_err(|e| e.to_string())?;
    let x = bx.input_b(b).map_err(|e| e.to_string())?;
    let u = bx.output_a().ok_or("side A has no output")?;
    let b_side: Vec<u64> = [Some(0), Some(1), None]
        .into_iter()
        .map(|alt| {
            let mut other = fresh();
            if let Some(alt) = alt {
                other.input_a(alt).expect("fresh box");
            }
            other.input_b(b).expect("fresh box")
        })
        .collect();
    Ok(json!({
        "field": field.to_string(),
        "a": a, "b": b, "x": x, "u": u,
        "u_minus_x": field.sub(u, x),
        "a_times_b": field.mul(a, b),
        "law_holds": field.sub(u, x) == field.mul(a, b),
        "x_if_a_was": { "0": b_side[0], "1": b_side[1], "nothing": b_side[2] },
    }))
}

/// Commit to a uniform string over `GF(2^k)` and try to open it both as 0
/// and as 1: once through a PR box, once by guessing `z2`, where every
/// possible `z2` is tried to count how many let the guess through.
#[wasm_bindgen]
pub fn double_open(k: u32, guess: u32, seed: u32) -> String {
    respond(double_open_inner(k, guess.into(), seed.into()))
}

fn double_open_inner(k: u32, guess: u64, seed: u64) -> Result<Value, String> {
    let field = binary_field(k)?;
    let guess = field.check(guess).map_err(|e| e.to_string())?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let keys = CommitKeys { z1: field.random_nonzero(&mut rng), z2: field.random_nonzero(&mut rng) };
    let mut bx = PrBox::new(field, &mut rng);
    let d = bx.input_b(keys.z2).map_err(|e| e.to_string())?;
    let c = field.random(&mut rng);
    let com = PrCommitment { keys, c, d };
    let mut with_box = Vec::new();
    for target in [0, 1] {
        let mut copy = bx.clone();
        let o = equivocate(&field, &mut copy, target, c, keys.z1).map_err(|e| e.to_string())?;
        let shown = pr_unveil_verify(&field, &com, o, Mode::Bit).ok();
        with_box.push(json!({ "target": target, "w1": o.w1, "w2": o.w2, "verified_as": shown }));
    }
    // Without a box: an honest commitment to 0, then a second opening
    // tuned to the guessed key.
    let (w1, w2) = (field.random(&mut rng), field.random(&mut rng));
    let zero = Opening { w1, w2 };
    let w1_alt = field.sub(w1, keys.z1);
    let one = Opening { w1: w1_alt, w2: field.add(w2, field.mul(keys.z1, guess)) };
    let works = |z2: u64| {
        let com = PrCommitment { keys: CommitKeys { z1: keys.z1, z2 }, c: w1, d: field.add(field.mul(w1, z2), w2) };
        pr_unveil_verify(&field, &com, zero, Mode::Bit).ok() == Some(0)
            && pr_unveil_verify(&field, &com, one, Mode::Bit).ok() == Some(1)
    };
    let lucky: Vec<u64> = field.elements().filter(|&z2| works(z2)).collect();
    Ok(json!({
        "field": field.to_string(),
        "keys": { "z1": keys.z1, "z2": keys.z2 },
        "commitment": { "c": c, "d": d },
        "with_box": with_box,
        "without_box": {
            "guess": guess,
            "actual_z2_works": works(keys.z2),
            "keys_that_work": lucky,
            "out_of": field.order(),
        },
    }))
}

/// One run of the zero-knowledge protocol on an instance given as JSON
/// (`{"r", "s", "clauses"}`), by real provers with a brute-forced witness or
/// by the simulator. Returns the verdict and each verifier's view.
#[wasm_bindgen]
pub fn zk_session(instance_json: &str, simulated: bool, sigma: u32, seed: u32) -> String {
    respond(zk_session_inner(instance_json, simulated, sigma as usize, seed.into()))
}

fn zk_session_inner(instance_json: &str, simulated: bool, sigma: usize, seed: u64) -> Result<Value, String> {
    let inst = Oracle3SatInstance::from_json(instance_json).map_err(|e| e.to_string())?;
    if inst.m() > 8 {
        return Err(format!("instance has m = {}; the demo allows at most 8", inst.m()));
    }
    if !(1..=8).contains(&sigma) {
        return Err("sigma must be in 1..=8".into());
    }
    let cfg = ZkConfig { field: FieldSpec::prime(65521).expect("prime"), sigma };
    let seeds = Seeds::from_master(seed);
    let report = if simulated {
        simulate(cfg, &inst, VerifierSuite::HONEST, SimulatorKind::Faithful, seeds).map_err(|e| e.to_string())?
    } else {
        let witness = brute_force_oracle(&inst)
            .map_err(|e| e.to_string())?
            .ok_or("instance is not oracle-satisfiable, so there is no witness")?;
        let side = ProverSide::real(BflStrategy::Honest(witness));
        run_zk_with(cfg, &inst, &side, VerifierSuite::HONEST, seeds).map_err(|e| e.to_string())?
    };
    Ok(session_json(&report, simulated))
}

fn session_json(report: &ZkReport, simulated: bool) -> Value {
    let t = &report.transcript;
    let views: Vec<Value> = [PartyId::verifier(1), PartyId::verifier(2)]
        .into_iter()
        .map(|v| {
            let lines: Vec<String> = verifier_view(t, v)
                .into_iter()
                .map(|m| {
                    let shown = &m.payload[..m.payload.len().min(12)];
                    let more = if m.payload.len() > 12 { "…" } else { "" };
                    format!("{} → {}  {} bytes  {}{more}", m.from, m.to, m.payload.len(), hex(shown))
                })
                .collect();
            json!({ "verifier": v.to_string(), "messages": lines })
        })
        .collect();
    let prover_link = t
        .messages
        .iter()
        .filter(|m| m.from.role == Role::Prover && m.to.role == Role::Prover)
        .count();
    json!({
        "simulated": simulated,
        "accepted": report.verdict.is_accept(),
        "omega": [report.omega.0, report.omega.1],
        "commitments": report.commitments,
        "total_messages": t.messages.len(),
        "prover_to_prover_messages": prover_link,
        "locality_violations": report.violations,
        "views": views,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    const TINY: &str = r#"{"r": 1, "s": 1, "clauses": [[1, 5], [-2, 6, -7]]}"#;

    #[test]
    fn box_law_and_side_b_independence() {
        for seed in 0..50 {
            let v = parse(pr_box(4, seed % 16, (seed * 7) % 16, seed));
            assert_eq!(v["law_holds"], true);
            let x = &v["x_if_a_was"];
            assert_eq!(x["0"], v["x"]);
            assert_eq!(x["1"], v["x"]);
            assert_eq!(x["nothing"], v["x"]);
        }
    }

    #[test]
    fn out_of_range_inputs_are_errors() {
        assert!(parse(pr_box(4, 16, 0, 1))["error"].is_string());
        assert!(parse(pr_box(0, 0, 0, 1))["error"].is_string());
        assert!(parse(double_open(17, 0, 1))["error"].is_string());
        assert!(parse(zk_session("{", false, 2, 1))["error"].is_string());
    }

    #[test]
    fn box_double_opens_and_guess_works_for_one_key() {
        for seed in 0..20 {
            let v = parse(double_open(8, seed % 256, seed));
            let opened: Vec<&Value> = v["with_box"].as_array().unwrap().iter().map(|o| &o["verified_as"]).collect();
            assert_eq!(opened, [&json!(0), &json!(1)]);
            assert_eq!(v["without_box"]["keys_that_work"], json!([seed % 256]));
        }
    }

    #[test]
    fn real_and_simulated_sessions_accept_without_prover_contact() {
        for simulated in [false, true] {
            let v = parse(zk_session(TINY, simulated, 2, 3));
            assert_eq!(v["accepted"], true, "{v}");
            assert_eq!(v["prover_to_prover_messages"], 0);
            assert_eq!(v["locality_violations"], 0);
            assert_eq!(v["views"].as_array().unwrap().len(), 2);
        }
        let unsat = r#"{"r": 0, "s": 1, "clauses": [[4], [-5]]}"#;
        assert!(parse(zk_session(unsat, false, 2, 3))["error"].as_str().unwrap().contains("satisfiable"));
    }
}
