use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sqkd_core::adversary::AttackSpec;
use sqkd_core::protocol::ProtocolConfig;

#[derive(Debug, Parser)]
#[command(name = "sqkd", version, about = "Simulator and robustness lab for semi-quantum key distribution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full protocol against an attack.
    Run(RunArgs),
    /// Compare the mock and full protocols under the CNOT-probe attack.
    MockDemo(MockDemoArgs),
    /// Exact information/disturbance curve of the rotation-probe family.
    Sweep(SweepArgs),
    /// Check that no attack is both undetectable and informative.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Write results here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_ctrl: f64,
    #[arg(long, default_value_t = 0.05)]
    pub p_test: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Independent runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Bits withheld from the final key beyond the leaked syndromes.
    #[arg(long, default_value_t = 16)]
    pub security_margin: usize,
}

impl ProtocolArgs {
    pub fn config(&self, trial: u64) -> ProtocolConfig {
        ProtocolConfig {
            n: self.n,
            delta: self.delta,
            p_ctrl: self.p_ctrl,
            p_test: self.p_test,
            seed: self.seed.wrapping_add(trial),
            security_margin: self.security_margin,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// none | measure-resend:z|x|random | cnot-probe[:mid] | rotation:<theta>
    #[arg(long, default_value = "none")]
    pub attack: AttackSpec,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct MockDemoArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Attack family to sweep; only `rotation` is available.
    #[arg(long, default_value = "rotation", value_parser = ["rotation"])]
    pub attack: String,
    /// Number of evenly spaced angles in [0, pi/2].
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(2..=100_000))]
    pub points: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Built-in attack to analyze when no random attacks are requested.
    #[arg(long, default_value = "none")]
    pub attack: AttackSpec,
    /// Analyze this many random attacks instead.
    #[arg(long, default_value_t = 0)]
    pub random_attacks: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Detection probabilities below this count as zero disturbance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol_disturb: f64,
    /// Helstrom advantages above this count as information.
    #[arg(long, default_value_t = 1e-6)]
    pub tol_info: f64,
    #[command(flatten)]
    pub output: Output,
}
