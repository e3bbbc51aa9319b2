use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cocon_core::frontend::driver::{run_check, run_eval, EvalOptions, Outcome, EXIT_PARSE_ERROR};
use cocon_core::whnf::DEFAULT_FUEL;

#[derive(Parser)]
#[command(name = "cocon", version, about = "Type check and evaluate cocon programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type check source files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, env = "COCON_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Evaluate a definition (or every `#eval` directive) to weak head normal form.
    Eval {
        file: PathBuf,
        #[arg(long = "def")]
        def: Option<String>,
        /// Keep normalizing under boxes and binders.
        #[arg(long)]
        deep: bool,
        /// Print the reduction rules applied, to stderr.
        #[arg(long)]
        trace: bool,
        #[arg(long, env = "COCON_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not errors
            return if e.use_stderr() { ExitCode::from(EXIT_PARSE_ERROR as u8) } else { ExitCode::SUCCESS };
        }
    };
    let out: Outcome = match cli.command {
        Command::Check { files, fuel } => run_check(&files, fuel),
        Command::Eval {
            file,
            def,
            deep,
            trace,
            fuel,
        } => run_eval(file, &EvalOptions { def, deep, trace, fuel }),
    };
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
