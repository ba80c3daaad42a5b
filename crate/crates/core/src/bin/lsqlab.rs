//! Thin command-line front end: every subcommand maps onto one pipeline in
//! `lsqlab::run` driven by a flat config file.

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "lsqlab", version, about = "Finite-chain Gibbs measures, sweeping-out iteration, and coercivity-constant estimation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive the explicit-constant ledger and the coupling feasibility chart
    Constants {
        #[arg(long, default_value = "lsqlab.conf")]
        config: PathBuf,
        /// sweep spec `J=start:end:count` for the feasibility chart
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Run the four standing hypothesis checks on the configured fixture
    CheckHypotheses {
        #[arg(long, default_value = "lsqlab.conf")]
        config: PathBuf,
    },
    /// Margin sweep of the named proof inequalities on random instances
    VerifyLemmas {
        #[arg(long, default_value = "lsqlab.conf")]
        config: PathBuf,
        /// also report the smallest constant scale keeping margins nonnegative
        #[arg(long)]
        fitted: bool,
    },
    /// Iterate the sweeping-out operator and fit its geometric rate
    SweepConverge {
        #[arg(long, default_value = "lsqlab.conf")]
        config: PathBuf,
    },
    /// Estimate Log-Sobolev-q / Spectral-Gap-q constants
    EstimateLs {
        #[arg(long, default_value = "lsqlab.conf")]
        config: PathBuf,
    },
    /// Check the exact consistency identities (tower, telescoping, marginals)
    VerifyIdentities {
        #[arg(long, default_value = "lsqlab.conf")]
        config: PathBuf,
    },
    /// Rerun a target estimate over a discretization ladder
    Refine {
        #[arg(long, default_value = "lsqlab.conf")]
        config: PathBuf,
        /// L, m, or N
        #[arg(long)]
        axis: Option<String>,
        /// comma-separated rungs
        #[arg(long)]
        ladder: Option<String>,
    },
}

fn main() {
    let cli = Cli::parse();
    let (sub, config, overrides): (&str, PathBuf, Vec<(String, String)>) = match cli.cmd {
        Cmd::Constants { config, sweep } => {
            let mut ov = Vec::new();
            if let Some(s) = sweep {
                // accept `J=0:0.2:200` and bare `0:0.2:200`
                let spec = s.strip_prefix("J=").unwrap_or(&s);
                ov.push(("constants.sweep".to_string(), spec.to_string()));
            }
            ("constants", config, ov)
        }
        Cmd::CheckHypotheses { config } => ("check-hypotheses", config, vec![]),
        Cmd::VerifyLemmas { config, fitted } => {
            let mut ov = Vec::new();
            if fitted {
                ov.push(("run.fitted".to_string(), "true".to_string()));
            }
            ("verify-lemmas", config, ov)
        }
        Cmd::SweepConverge { config } => ("sweep-converge", config, vec![]),
        Cmd::EstimateLs { config } => ("estimate-ls", config, vec![]),
        Cmd::VerifyIdentities { config } => ("verify-identities", config, vec![]),
        Cmd::Refine { config, axis, ladder } => {
            let mut ov = Vec::new();
            if let Some(a) = axis {
                ov.push(("run.axis".to_string(), a));
            }
            if let Some(l) = ladder {
                ov.push(("run.ladder".to_string(), l));
            }
            ("refine", config, ov)
        }
    };
    std::process::exit(lsqlab::run::dispatch(sub, &config, &overrides));
}
