use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ne_cli::commands::{self, GenArgs};

/// Decide values and pure Nash equilibria of concurrent games.
#[derive(Parser)]
#[command(name = "negame", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Can an agent ensure outcomes at least as good as a threshold?
    Value {
        game: PathBuf,
        #[arg(long)]
        agent: String,
        /// JSON threshold file: {"payoff": "bits"} or {"occ": [..], "inf": [..]}
        #[arg(long, conflicts_with = "payoff")]
        threshold: Option<PathBuf>,
        /// Threshold payoff as a bit string
        #[arg(long)]
        payoff: Option<String>,
        /// Initial state (defaults to the first declared state)
        #[arg(long)]
        from: Option<String>,
    },
    /// Is there a pure Nash equilibrium?
    Ne {
        game: PathBuf,
        #[arg(long)]
        from: Option<String>,
    },
    /// Is there a pure Nash equilibrium within the given bounds?
    Cne {
        game: PathBuf,
        /// JSON bounds file: {"lower": {agent: threshold}, "upper": {..}}
        #[arg(long)]
        bounds: PathBuf,
        #[arg(long)]
        from: Option<String>,
    },
    /// Export the reachable suspect arena as DOT
    Suspect {
        game: PathBuf,
        /// Output file (standard output if omitted)
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        from: Option<String>,
    },
    /// Generate a game file
    Gen {
        /// sat, cobuchi, qsat, counting or random
        family: String,
        /// DIMACS file (QDIMACS quantifier lines for qsat)
        #[arg(long)]
        cnf: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Preference class of random games, e.g. buchi or ordered-reach-subset
        #[arg(long, default_value = "reach")]
        class: String,
        #[arg(long, default_value_t = 3)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        agents: usize,
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long, default_value_t = 2)]
        targets: usize,
        /// Output file (standard output if omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Re-check a witness produced by `ne` or `cne`
    Verify {
        game: PathBuf,
        witness: PathBuf,
        #[arg(long)]
        bounds: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    commands::configure_workers()?;
    match &cli.command {
        Command::Value { game, agent, threshold, payoff, from } => {
            commands::cmd_value(game, agent, threshold.as_deref(), payoff.as_deref(), from.as_deref())
        }
        Command::Ne { game, from } => commands::cmd_ne(game, None, from.as_deref()),
        Command::Cne { game, bounds, from } => commands::cmd_ne(game, Some(bounds), from.as_deref()),
        Command::Suspect { game, dot, from } => commands::cmd_suspect(game, dot.as_deref(), from.as_deref()),
        Command::Gen { family, cnf, seed, class, states, agents, actions, targets, out } => commands::cmd_gen(&GenArgs {
            family,
            cnf: cnf.as_deref(),
            seed: *seed,
            class,
            states: *states,
            agents: *agents,
            actions: *actions,
            targets: *targets,
            out: out.as_deref(),
        }),
        Command::Verify { game, witness, bounds } => commands::cmd_verify(game, witness, bounds.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
