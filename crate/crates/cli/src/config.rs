//! Command-line arguments and the experiment configuration they resolve to.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use lemip::fields::FieldSpec;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "lemip", version, about = "Locality-explicit multi-prover proof experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a protocol for a number of trials; exits 1 if any trial rejects.
    Run(ExperimentArgs),
    /// Estimate an acceptance rate with a Wilson interval, amplified by
    /// default.
    Estimate(ExperimentArgs),
    /// Run one of the bundled attack demonstrations.
    Attack(AttackArgs),
    /// Run the PR-local simulator, optionally against real transcripts.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    ZkLemip,
    BflLemip,
    BflClassic,
    BflReference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adversary {
    Honest,
    BestConstant,
    RandomAnswers,
    EndpointLie,
    Inconsistent,
    NonBoolean,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Committer {
    #[default]
    Honest,
    /// Opens whatever the strategy needs, betting on a guess of the key.
    Guessing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackName {
    Ridiculous,
    PrboxBinding,
    RelayVerifier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimKind {
    Faithful,
    Broken,
}

/// Options shared by every subcommand.
#[derive(Clone, Debug, Args)]
pub struct CommonArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Master seed; falls back to `LEMIP_SEED`, then 0.
    #[arg(long, env = "LEMIP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Protocol field `F_p` (default 65521).
    #[arg(long, conflicts_with = "field_k")]
    pub field_p: Option<u64>,
    /// Protocol field `GF(2^k)` instead of a prime field.
    #[arg(long)]
    pub field_k: Option<u32>,
    /// Bit length of the attack demos' commitment strings.
    #[arg(long, default_value_t = 16)]
    pub commit_k: u32,
    /// Triples per bucket in the multiplication audit.
    #[arg(long, default_value_t = 8)]
    pub sigma: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum, default_value_t = Protocol::ZkLemip)]
    pub protocol: Protocol,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Adversary::Honest)]
    pub adversary: Adversary,
    #[arg(long, value_enum, default_value_t = Committer::Honest)]
    pub committer: Committer,
    /// Sequential repetitions per trial.
    #[arg(long)]
    pub reps: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct AttackArgs {
    #[arg(long, value_enum)]
    pub name: AttackName,
    /// Field size exponent for the exhaustive binding count.
    #[arg(long, default_value_t = 4)]
    pub exhaustive_k: u32,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// One of the bundled verifier suites.
    #[arg(long, default_value = "honest")]
    pub verifier: String,
    #[arg(long, value_enum, default_value_t = SimKind::Faithful)]
    pub kind: SimKind,
    /// Also run real provers and test the two view samples for homogeneity.
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Field choice as given on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldChoice {
    P(u64),
    K(u32),
}

impl FieldChoice {
    pub fn spec(self) -> Result<FieldSpec, CliError> {
        let spec = match self {
            FieldChoice::P(p) => FieldSpec::prime(p),
            FieldChoice::K(k) => FieldSpec::binary(k),
        };
        spec.map_err(|e| CliError::Usage(format!("field: {e}")))
    }
}

/// Everything that determines a run, echoed into every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub protocol: Option<Protocol>,
    pub instance: Option<PathBuf>,
    pub trials: usize,
    pub seed: u64,
    pub field: FieldChoice,
    pub commit_k: u32,
    pub sigma: usize,
    pub adversary: Option<Adversary>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_common(common: &CommonArgs) -> Self {
        let field = match (common.field_p, common.field_k) {
            (_, Some(k)) => FieldChoice::K(k),
            (Some(p), None) => FieldChoice::P(p),
            (None, None) => FieldChoice::P(65521),
        };
        Self {
            protocol: None,
            instance: None,
            trials: common.trials,
            seed: common.seed,
            field,
            commit_k: common.commit_k,
            sigma: common.sigma,
            adversary: None,
            output: common.output.clone(),
        }
    }
}
