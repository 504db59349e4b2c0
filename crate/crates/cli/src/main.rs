use std::io::Read;
use std::path::PathBuf;
use std::process::exit;

use clap::{Args, Parser, Subcommand};

use kat_horn::{run, Command, RunConfig};

/// Verifier for universal Horn formulas of Kleene algebra with tests.
#[derive(Parser)]
#[command(name = "kat-horn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Eliminate hypotheses, decide the result, and fall back to
    /// countermodel search and proof search for leftovers.
    Check(WithInput),
    /// Print the formula after hypothesis elimination, without deciding it.
    Eliminate(WithInput),
    /// Search small relational interpretations for a countermodel.
    Oracle(WithInput),
    /// Run the word-by-word proof search directly.
    Prove(WithInput),
}

#[derive(Args)]
struct WithInput {
    /// Input file, or `-` for stdin.
    file: PathBuf,

    #[command(flatten)]
    opts: CommonOpts,
}

#[derive(Args)]
struct CommonOpts {
    /// Largest base the countermodel search will try.
    #[arg(long, default_value_t = 3)]
    max_base: usize,

    /// Interpretations examined per base before moving on.
    #[arg(long, default_value_t = 200_000)]
    budget: u64,

    /// Hypothesis applications allowed along one proof branch.
    #[arg(long, default_value_t = 8)]
    depth: usize,

    /// Length cap for hypothesis right-hand-side words in the search.
    #[arg(long, default_value_t = 3)]
    tau_max: usize,

    /// Length cap for matched left-hand-side words in the search.
    #[arg(long, default_value_t = 4)]
    rho_max: usize,

    /// Most declared tests the decider will accept.
    #[arg(long, default_value_t = kat_core::decide::MAX_SUPPORTED_TESTS)]
    max_tests: usize,

    /// Rewrite hypotheses of the shape x;b = x to x;!b = 0 first.
    #[arg(long, visible_alias = "normalize-pbp")]
    normalize_postguards: bool,

    /// Print the report as JSON.
    #[arg(long)]
    json: bool,

    /// Include the refutation automaton in dot format, when there is one.
    #[arg(long)]
    dot: bool,
}

fn read_input(path: &PathBuf) -> Result<String, String> {
    if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("stdin: {e}"))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn seed_from_env() -> Result<Option<u64>, String> {
    match std::env::var("KAT_HORN_SEED") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| format!("KAT_HORN_SEED: not a u64: {s:?}")),
        Err(_) => Ok(None),
    }
}

fn main() {
    let cli = Cli::parse();
    let (command, input) = match &cli.command {
        Sub::Check(i) => (Command::Check, i),
        Sub::Eliminate(i) => (Command::Eliminate, i),
        Sub::Oracle(i) => (Command::Oracle, i),
        Sub::Prove(i) => (Command::Prove, i),
    };
    let o = &input.opts;
    let mut cfg = RunConfig {
        max_base: o.max_base,
        budget: o.budget,
        depth: o.depth,
        tau_max: o.tau_max,
        rho_max: o.rho_max,
        max_tests: o.max_tests,
        normalize_postguards: o.normalize_postguards,
        dot: o.dot,
        ..RunConfig::default()
    };
    match seed_from_env() {
        Ok(Some(seed)) => cfg.seed = seed,
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            exit(3);
        }
    }
    let text = match read_input(&input.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            exit(3);
        }
    };
    match run(command, &text, &cfg) {
        Ok(report) => {
            if o.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_human());
            }
            exit(report.exit_code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit(3);
        }
    }
}
