//! `reladp`: decides relative termination of TPDB-style `.trs` files.
//!
//! The first output line is exactly `YES`, `NO` or `MAYBE`; a proof
//! follows.  Exit codes: 0 = YES, 1 = NO, 2 = MAYBE, 3 and above = error.

use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use reladp_core::adp::canonical_adp_problem;
use reladp_core::graph::estimate_dependency_graph;
use reladp_core::harness::run_benchmark;
use reladp_core::orders::preprocess_duplicating_base;
use reladp_core::parse::parse_relative_trs;
use reladp_core::proof::{render_proof, ProofFormat};
use reladp_core::prover::{prove, ProverConfig};

#[derive(Parser)]
#[command(
    name = "reladp",
    about = "Relative termination prover for term rewrite systems",
    long_about = "Decides whether the main rules (l -> r) of a relative TRS can only be \
                  applied finitely often while the base rules (l ->= r) may run forever. \
                  Answers YES, NO or MAYBE on the first output line, with a proof below.",
    after_help = "The environment variable RELADP_SEED fixes randomized tie-breaks; the \
                  default pipeline is fully deterministic and leaves the seed unused.\n\
                  Exit codes: 0 = YES, 1 = NO, 2 = MAYBE, >= 3 = error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Prove or disprove relative termination of one .trs file.
    Prove {
        /// Input file in TPDB-style .trs format (`->=` marks base rules).
        file: PathBuf,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
        /// Largest coefficient the interpretation search may use.
        #[arg(long, default_value_t = 2)]
        max_coeff: u64,
        /// Step bound of the non-termination loop search.
        #[arg(long, default_value_t = 6)]
        loop_depth: usize,
        /// Proof output format.
        #[arg(long, value_enum, default_value_t = ProofArg::Text)]
        proof: ProofArg,
        /// Write the dependency graph of the canonical ADP problem to FILE
        /// in GraphViz format.
        #[arg(long, value_name = "FILE")]
        dot: Option<PathBuf>,
        /// Disable the loop search (NO answers become MAYBE).
        #[arg(long)]
        no_loop_search: bool,
    },
    /// Run the prover over every .trs file in a directory.
    Bench {
        /// Directory containing .trs files.
        dir: PathBuf,
        /// Also write the report as CSV to FILE.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
        /// Wall-clock budget per file in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProofArg {
    Text,
    Json,
    Dot,
}

fn main() {
    // RELADP_SEED is accepted for reproducibility contracts; nothing in the
    // pipeline is randomized, so it has no effect.
    let _ = std::env::var("RELADP_SEED");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err)
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) =>
        {
            print!("{err}");
            std::process::exit(0);
        }
        Err(err) => {
            eprint!("{err}");
            std::process::exit(3);
        }
    };
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Prove {
            file,
            timeout,
            max_coeff,
            loop_depth,
            proof,
            dot,
            no_loop_search,
        } => {
            let text = match fs::read_to_string(&file) {
                Ok(text) => text,
                Err(err) => {
                    eprintln!("error: cannot read {}: {err}", file.display());
                    return 3;
                }
            };
            let trs = match parse_relative_trs(&text) {
                Ok(trs) => trs,
                Err(err) => {
                    eprintln!("error: {}: {err}", file.display());
                    return 4;
                }
            };
            let config = ProverConfig {
                timeout: Some(Duration::from_secs(timeout)),
                max_coeff,
                loop_search: !no_loop_search,
                loop_depth,
                ..ProverConfig::default()
            };

            if let Some(dot_path) = dot {
                match dependency_graph_dot(&trs, &config) {
                    Ok(rendered) => {
                        if let Err(err) = fs::write(&dot_path, rendered) {
                            eprintln!("error: cannot write {}: {err}", dot_path.display());
                            return 3;
                        }
                    }
                    Err(message) => {
                        eprintln!("error: {message}");
                        return 4;
                    }
                }
            }

            let result = prove(&trs, &config);
            println!("{}", result.verdict);
            let format = match proof {
                ProofArg::Text => ProofFormat::Text,
                ProofArg::Json => ProofFormat::Json,
                ProofArg::Dot => ProofFormat::Dot,
            };
            print!("{}", render_proof(&result.proof, format));
            result.verdict.exit_code()
        }
        Command::Bench { dir, csv, timeout } => {
            let config = ProverConfig {
                timeout: Some(Duration::from_secs(timeout)),
                ..ProverConfig::default()
            };
            let report = match run_benchmark(&dir, &config) {
                Ok(report) => report,
                Err(err) => {
                    eprintln!("error: cannot read {}: {err}", dir.display());
                    return 3;
                }
            };
            print!("{report}");
            if let Some(csv_path) = csv {
                if let Err(err) = fs::write(&csv_path, report.to_csv()) {
                    eprintln!("error: cannot write {}: {err}", csv_path.display());
                    return 3;
                }
            }
            0
        }
    }
}

/// The dependency graph of the canonical ADP problem, after the same
/// duplicating-base preprocessing the prover applies.
fn dependency_graph_dot(
    trs: &reladp_core::trs::RelativeTrs,
    config: &ProverConfig,
) -> Result<String, String> {
    let (preprocessed, _) = preprocess_duplicating_base(trs, config.max_coeff, None);
    let problem = canonical_adp_problem(&preprocessed).map_err(|e| e.to_string())?;
    Ok(estimate_dependency_graph(&problem).to_dot())
}
