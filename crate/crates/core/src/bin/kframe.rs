use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kframe::cli::{self, Format, RunConfig};

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Parser)]
#[command(name = "kframe", version, about = "Classify observer groups and check gauge covariance")]
struct Args {
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Restrict to time-orthochronous transformations.
    #[arg(long, global = true)]
    pto: bool,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Require naive densities to be flagged as non-invariant.
    #[arg(long, global = true)]
    expect_violation: bool,
    /// Chart-step budget for orbit searches.
    #[arg(long, global = true, default_value_t = 4)]
    max_chain: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a set of transition matrices.
    Classify { matrices: PathBuf },
    /// Pointwise structures and regions of a k field.
    Structure { kfield: PathBuf },
    /// Dimension, section and compatibility checks for a bundle.
    BundleCheck {
        bundle: Option<PathBuf>,
        /// Built-in bundle: congruence, degenerate or so2.
        #[arg(long)]
        example: Option<String>,
        /// k profile for the congruence example: p, omega or a number.
        #[arg(long)]
        k: Option<String>,
    },
    /// Covariance and density invariance; inputs are merged by key.
    GaugeCheck {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Whether two fields lie on one gauge orbit.
    Orbit { psi: PathBuf, psibar: PathBuf, bundle: PathBuf },
    /// Write the example inputs.
    Examples {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { cli::EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = RunConfig {
        tol: args.tol,
        seed: args.seed,
        pto: args.pto,
        format: match args.format {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        },
        expect_violation: args.expect_violation,
        max_chain: args.max_chain,
    };
    let outcome = match &args.command {
        Command::Classify { matrices } => cli::cmd_classify(matrices, &cfg),
        Command::Structure { kfield } => cli::cmd_structure(kfield, &cfg),
        Command::BundleCheck { bundle, example, k } => {
            cli::cmd_bundle_check(bundle.as_deref(), example.as_deref(), k.as_deref(), &cfg)
        }
        Command::GaugeCheck { inputs } => cli::cmd_gauge_check(inputs, &cfg),
        Command::Orbit { psi, psibar, bundle } => cli::cmd_orbit(psi, psibar, bundle, &cfg),
        Command::Examples { out } => cli::cmd_examples(out, &cfg),
    };
    print!("{}", outcome.render(cfg.format));
    ExitCode::from(outcome.code)
}
