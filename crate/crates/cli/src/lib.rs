//! The `lemip` command line: experiment configuration, execution, and JSON
//! reports.

pub mod config;

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use lemip::attacks::{demo_prbox_binding_break, demo_relay_verifier, demo_ridiculous};
use lemip::bfl::{
    amplification_rounds, brute_force_oracle, run_bfl_amplified, solve_non_boolean_oracle, BflMode, BflStrategy,
    Oracle3SatInstance,
};
use lemip::fields::FieldSpec;
use lemip::runtime::{derive_seed, PartyId, Seeds};
use lemip::simulators::{compare, pair_message_counts, simulate, SimulatorKind, MIN_SAMPLES};
use lemip::stats::RateEstimate;
use lemip::zk_protocol::{run_zk_amplified, CommitterKind, ProverSide, VerifierSuite, ZkConfig, ZkPhase};

pub use config::{
    Adversary, AttackArgs, AttackName, Cli, Command, Committer, ExperimentArgs, ExperimentConfig,
    FieldChoice, Protocol, SimKind, SimulateArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read instance {path}: {source}")]
    Instance { path: String, source: std::io::Error },
    #[error("{0}")]
    Protocol(String),
    #[error("cannot write report: {0}")]
    Output(#[from] std::io::Error),
}

/// A finished command: the JSON report, a one-line human summary, and
/// whether `run` saw a reject.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub result: Value,
    pub summary: String,
    #[serde(skip)]
    pub rejected: bool,
}

impl Report {
    pub fn exit_code(&self) -> u8 {
        if self.command == "run" && self.rejected {
            EXIT_REJECT
        } else {
            EXIT_OK
        }
    }
}

fn protocol_err(e: impl std::fmt::Display) -> CliError {
    CliError::Protocol(e.to_string())
}

pub fn load_instance(path: &Path) -> Result<Oracle3SatInstance, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Instance { path: path.display().to_string(), source })?;
    Oracle3SatInstance::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn witness_strategy(
    adversary: Adversary,
    field: &FieldSpec,
    inst: &Oracle3SatInstance,
    seed: u64,
) -> Result<BflStrategy, CliError> {
    let witness = || {
        brute_force_oracle(inst)
            .map_err(protocol_err)?
            .ok_or_else(|| CliError::Usage(format!("adversary {adversary:?} needs a satisfiable instance")))
    };
    Ok(match adversary {
        Adversary::Honest => BflStrategy::Honest(witness()?),
        Adversary::Inconsistent => BflStrategy::Inconsistent(witness()?),
        Adversary::BestConstant => BflStrategy::BestConstant,
        Adversary::RandomAnswers => BflStrategy::RandomAnswers,
        Adversary::EndpointLie => BflStrategy::EndpointLie,
        Adversary::NonBoolean => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            BflStrategy::NonBoolean(solve_non_boolean_oracle(field, inst, &mut rng, 256).map_err(protocol_err)?)
        }
    })
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<Report, CliError> {
    match cli.command {
        Command::Run(args) => run_experiment(&args, false),
        Command::Estimate(args) => run_experiment(&args, true),
        Command::Attack(args) => run_attack(&args),
        Command::Simulate(args) => run_simulation(&args),
    }
}

fn check_trials(trials: usize) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    Ok(())
}

fn run_experiment(args: &ExperimentArgs, estimate: bool) -> Result<Report, CliError> {
    let mut config = ExperimentConfig::from_common(&args.common);
    config.protocol = Some(args.protocol);
    config.instance = Some(args.instance.clone());
    config.adversary = Some(args.adversary);
    check_trials(config.trials)?;
    let inst = load_instance(&args.instance)?;
    let field = config.field.spec()?;
    let strategy = witness_strategy(args.adversary, &field, &inst, derive_seed(config.seed, u64::MAX))?;
    let reps = args.reps.unwrap_or(if estimate { amplification_rounds(&inst) } else { 1 });
    if reps == 0 {
        return Err(CliError::Usage("--reps must be at least 1".into()));
    }
    if args.protocol != Protocol::ZkLemip && args.committer != Committer::Honest {
        return Err(CliError::Usage("--committer applies to zk-lemip only".into()));
    }
    let mut accepts = 0;
    for j in 0..config.trials as u64 {
        let seed = derive_seed(config.seed, j);
        let verdict = match args.protocol {
            Protocol::ZkLemip => {
                let cfg = ZkConfig { field, sigma: config.sigma };
                let mut side = ProverSide::real(strategy.clone());
                if args.committer == Committer::Guessing {
                    side.committer = CommitterKind::Guessing;
                }
                run_zk_amplified(cfg, &inst, &side, seed, reps).map_err(protocol_err)?
            }
            p => {
                let mode = match p {
                    Protocol::BflLemip => BflMode::Lemip,
                    Protocol::BflClassic => BflMode::Classic,
                    _ => BflMode::Reference,
                };
                run_bfl_amplified(field, &inst, &strategy, seed, reps, mode).map_err(protocol_err)?
            }
        };
        accepts += verdict.is_accept() as u64;
    }
    let trials = config.trials as u64;
    let rate = RateEstimate::wilson(accepts, trials);
    let command = if estimate { "estimate" } else { "run" };
    let summary = format!(
        "{command} {:?} vs {} on {}: accepted {accepts}/{trials} (rate {:.4}, 95% Wilson [{:.4}, {:.4}]), {reps} repetition(s) per trial",
        args.protocol,
        strategy.name(),
        field,
        rate.point,
        rate.lower,
        rate.upper
    );
    let result = json!({
        "field": field,
        "repetitions": reps,
        "committer": args.committer,
        "accepts": accepts,
        "rejects": trials - accepts,
        "rate": rate,
    });
    Ok(Report { command, seed: config.seed, config, result, summary, rejected: accepts < trials })
}

fn run_attack(args: &AttackArgs) -> Result<Report, CliError> {
    let config = ExperimentConfig::from_common(&args.common);
    check_trials(config.trials)?;
    let (k, n, seed) = (config.commit_k, config.trials, config.seed);
    let (result, summary) = match args.name {
        AttackName::Ridiculous => {
            let r = demo_ridiculous(k, n, seed).map_err(protocol_err)?;
            let s = format!(
                "ridiculous protocol, {k}-bit strings: relaying provers accepted {}/{n} with {} prover-prover messages; \
                 isolated provers {}/{n}",
                r.standard.successes, r.prover_messages, r.local_isolated.successes
            );
            (serde_json::to_value(&r), s)
        }
        AttackName::PrboxBinding => {
            let r = demo_prbox_binding_break(k, n, n, args.exhaustive_k, seed).map_err(protocol_err)?;
            let s = format!(
                "bit commitment over GF(2^{k}): double-opened with a PR box {}/{n}, without {}/{n}; exhaustive at k={} gives rate {}",
                r.with_box.successes, r.without_box.successes, r.exhaustive_k, r.exhaustive_rate
            );
            (serde_json::to_value(&r), s)
        }
        AttackName::RelayVerifier => {
            let r = demo_relay_verifier(k, n, seed).map_err(protocol_err)?;
            let s = format!(
                "relay verifier, GF(2^{k}): binding broken {}/{n} with {} prover-prover messages and {} audit failures; \
                 isolated verifiers {}/{n}",
                r.contaminating.successes, r.prover_messages, r.audit_failures, r.isolating.successes
            );
            (serde_json::to_value(&r), s)
        }
    };
    let result = result.map_err(protocol_err)?;
    let result = json!({ "attack": args.name, "report": result });
    Ok(Report { command: "attack", seed, config, result, summary, rejected: false })
}

fn suite_by_name(name: &str) -> Result<VerifierSuite, CliError> {
    let bundled = VerifierSuite::bundled();
    bundled.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).ok_or_else(|| {
        let names: Vec<&str> = bundled.iter().map(|(n, _)| *n).collect();
        CliError::Usage(format!("unknown verifier {name:?}; expected one of {}", names.join(", ")))
    })
}

fn run_simulation(args: &SimulateArgs) -> Result<Report, CliError> {
    let mut config = ExperimentConfig::from_common(&args.common);
    config.protocol = Some(Protocol::ZkLemip);
    config.instance = Some(args.instance.clone());
    check_trials(config.trials)?;
    let inst = load_instance(&args.instance)?;
    let suite = suite_by_name(&args.verifier)?;
    let cfg = ZkConfig { field: config.field.spec()?, sigma: config.sigma };
    let kind = match args.kind {
        SimKind::Faithful => SimulatorKind::Faithful,
        SimKind::Broken => SimulatorKind::Broken,
    };
    let (n, seed) = (config.trials, config.seed);
    let (result, summary) = if args.compare {
        if n < MIN_SAMPLES {
            return Err(CliError::Usage(format!("--compare needs --trials of at least {MIN_SAMPLES}")));
        }
        let witness = brute_force_oracle(&inst)
            .map_err(protocol_err)?
            .ok_or_else(|| CliError::Usage("--compare needs a satisfiable instance".into()))?;
        let r = compare(cfg, &inst, &witness, suite, kind, n, seed).map_err(protocol_err)?;
        let s = format!(
            "real vs {:?} simulator against {} verifiers, {n} samples each: chi-square {:.2} on {} dof, p = {:.4} ({})",
            args.kind,
            args.verifier,
            r.statistic,
            r.dof,
            r.p_value,
            if r.pass { "indistinguishable at 0.01" } else { "distinguished at 0.01" }
        );
        (serde_json::to_value(&r).map_err(protocol_err)?, s)
    } else {
        let mut accepts = 0u64;
        let mut phases: BTreeMap<String, usize> = BTreeMap::new();
        let mut pair_counts = [0usize; 4];
        for j in 0..n as u64 {
            let report =
                simulate(cfg, &inst, suite, kind, Seeds::from_master(derive_seed(seed, j))).map_err(protocol_err)?;
            accepts += report.verdict.is_accept() as u64;
            let phase = match report.failed_phase {
                _ if report.verdict.is_accept() => "accept".to_string(),
                Some(p) => phase_name(p),
                None => "reject".to_string(),
            };
            *phases.entry(phase).or_default() += 1;
            for (acc, c) in pair_counts.iter_mut().zip(pair_message_counts(&report.transcript)) {
                *acc += c;
            }
            debug_assert_eq!(report.transcript.count_between(PartyId::prover(1), PartyId::prover(2)), 0);
        }
        let rate = RateEstimate::wilson(accepts, n as u64);
        let s = format!(
            "{:?} simulator against {} verifiers: accepted {accepts}/{n}, no prover-prover messages",
            args.kind, args.verifier
        );
        let value = json!({ "rate": rate, "outcomes": phases, "pair_messages": pair_counts });
        (value, s)
    };
    let result = json!({ "verifier": args.verifier, "simulator": args.kind, "compare": args.compare, "report": result });
    Ok(Report { command: "simulate", seed, config, result, summary, rejected: false })
}

fn phase_name(p: ZkPhase) -> String {
    serde_json::to_value(p).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_else(|| format!("{p:?}"))
}

/// Writes the JSON report to `--output` or stdout.
pub fn emit(report: &Report) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| CliError::Protocol(e.to_string()))?;
    match &report.config.output {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}
