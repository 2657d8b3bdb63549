//! Command-line front end: load a chain configuration, run one
//! verification suite, emit a JSON report.
//!
//! Exit codes: 0 when every asserted check passes ("recorded" entries do
//! not count), 1 when a check fails, 2 on configuration errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod cache;
mod config;
mod report;
mod run;

use config::Backend;

#[derive(Parser)]
#[command(
    name = "bethe",
    about = "Exact verification suite for o(2n+1)-invariant spin chains",
    version
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker cap for parallelizable suites.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Override the configured numeric backend.
    #[arg(long, value_enum)]
    backend: Option<Backend>,
}

#[derive(Args)]
struct ActionArgs {
    #[command(flatten)]
    common: Common,
    /// Auxiliary row index; requires --j.
    #[arg(long, allow_hyphen_values = true)]
    i: Option<i32>,
    /// Auxiliary column index; requires --i.
    #[arg(long, allow_hyphen_values = true)]
    j: Option<i32>,
}

#[derive(Subcommand)]
enum Verb {
    /// Yang-Baxter and unitarity on random rational samples.
    YbCheck(Common),
    /// RTT exchange relation and transfer commutativity on the chain.
    RttCheck(Common),
    /// Locate the reference state and report measured eigenvalues.
    Vacuum(Common),
    /// Central relation, measured z(u) and the lambda constraints.
    Central(Common),
    /// Build the off-shell Bethe vector (content-addressed cache).
    BetheBuild(Common),
    /// Compare the action formula with direct matrix application.
    ActionVerify(ActionArgs),
    /// Zero-mode commutators, zero-mode actions and the corner action.
    ZeroModes(Common),
    /// Last-column vs first-row recursion equality.
    RecursionCrosscheck(Common),
    /// gl(n) collapse checks (requires empty level-0 parameters).
    ReduceGln(Common),
    /// Rank-1 specialization of the action formula (requires n = 1).
    ReduceO3(Common),
    /// Bethe root solving, eigenproperty and diagonalization matching.
    Spectrum(Common),
}

impl Verb {
    fn name(&self) -> &'static str {
        match self {
            Verb::YbCheck(_) => "yb-check",
            Verb::RttCheck(_) => "rtt-check",
            Verb::Vacuum(_) => "vacuum",
            Verb::Central(_) => "central",
            Verb::BetheBuild(_) => "bethe-build",
            Verb::ActionVerify(_) => "action-verify",
            Verb::ZeroModes(_) => "zero-modes",
            Verb::RecursionCrosscheck(_) => "recursion-crosscheck",
            Verb::ReduceGln(_) => "reduce-gln",
            Verb::ReduceO3(_) => "reduce-o3",
            Verb::Spectrum(_) => "spectrum",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Verb::YbCheck(c)
            | Verb::RttCheck(c)
            | Verb::Vacuum(c)
            | Verb::Central(c)
            | Verb::BetheBuild(c)
            | Verb::ZeroModes(c)
            | Verb::RecursionCrosscheck(c)
            | Verb::ReduceGln(c)
            | Verb::ReduceO3(c)
            | Verb::Spectrum(c) => c,
            Verb::ActionVerify(a) => &a.common,
        }
    }

    fn options(&self) -> run::Options {
        let common = self.common();
        let (i, j) = match self {
            Verb::ActionVerify(a) => (a.i, a.j),
            _ => (None, None),
        };
        run::Options {
            jobs: common.jobs,
            backend: common.backend,
            i,
            j,
        }
    }
}

fn real_main() -> i32 {
    let cli = Cli::parse();
    let common = cli.verb.common();
    let loaded = match config::load(&common.config) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let report = match run::dispatch(cli.verb.name(), &loaded, &cli.verb.options()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("cannot write report to '{}': {e}", path.display());
                return 2;
            }
        }
        None => println!("{body}"),
    }
    report.exit_code()
}

fn main() {
    std::process::exit(real_main());
}
