use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rankmod::instances::GeneratorSpec;
use rankmod::{Field, IdentityTolerance};
use rankmod_cli::bench::{cmd_bench, BenchOptions};
use rankmod_cli::commands::{
    cmd_check, cmd_det, cmd_gen, cmd_invert, CheckOptions, CliError, DetOptions, InversePath, InvertOptions, Outcome,
    EXIT_PARSE,
};

#[derive(Parser)]
#[command(name = "rankmod", version, about = "Structured inverses of rank-completed singular matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute G, x, y and the dense inverse for a problem file.
    Invert {
        input: PathBuf,
        #[arg(long, default_value = "svd")]
        path: InversePath,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Relative numerical-rank tolerance (default n * eps).
        #[arg(long)]
        tol: Option<f64>,
        /// Seed for the random (u, v, M) of the general path.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Verify the identities satisfied by G, x, y.
    Check {
        input: PathBuf,
        /// Identity tolerance, used both absolutely and relatively.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// Compare both sides of the determinant lemma.
    Det {
        input: PathBuf,
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// Generate a seeded random problem.
    Gen {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time reassembly for a fresh D against dense refactorization.
    Bench {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

#[derive(clap::Args)]
struct SpecArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "real")]
    field: Field,
    #[arg(long, default_value_t = 10.0)]
    spread: f64,
    #[arg(long, default_value_t = 0.5)]
    coupling: f64,
    #[arg(long, default_value_t = 10.0)]
    dcond: f64,
}

impl SpecArgs {
    fn spec(&self) -> GeneratorSpec {
        GeneratorSpec::new(self.n, self.k, self.seed)
            .with_field(self.field)
            .with_spread(self.spread)
            .with_coupling(self.coupling)
            .with_d_cond(self.dcond)
    }
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Invert {
            input,
            path,
            out,
            tol,
            seed,
        } => cmd_invert(&InvertOptions {
            input,
            path,
            out,
            tol_rank: tol,
            seed,
        }),
        Command::Check { input, tol, rank_tol } => cmd_check(&CheckOptions {
            input,
            tol: IdentityTolerance::new(tol, tol)?,
            tol_rank: rank_tol,
        }),
        Command::Det { input, rank_tol } => cmd_det(&DetOptions { input, tol_rank: rank_tol }),
        Command::Gen { spec, out } => cmd_gen(&spec.spec(), out.as_deref()),
        Command::Bench { spec, repeats } => cmd_bench(&BenchOptions {
            spec: spec.spec(),
            repeats,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => {
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
        Err(err) => {
            let err = CliError::parse(err.to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_PARSE as u8);
        }
    };
    match run(cli.command) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.report).expect("reports always serialize"));
            ExitCode::from(outcome.exit as u8)
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit as u8)
        }
    }
}
