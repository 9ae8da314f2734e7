mod commands;
mod term;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use a4c_core::analysis::Direction;

#[derive(Parser)]
#[command(name = "a4c", version, about = "Check, analyze and render .a4c architecture descriptions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Up,
    Down,
    Both,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Up => Direction::Up,
            DirectionArg::Down => Direction::Down,
            DirectionArg::Both => Direction::Both,
        }
    }
}

#[derive(Args)]
struct Inputs {
    /// Model files, processed in the order given.
    #[arg(required = true, value_name = "FILE")]
    files: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, resolve and validate models.
    Check {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Treat warnings as failures.
        #[arg(long)]
        fail_on_warning: bool,
        /// Run only these rules, by id (V4) or code (E104).
        #[arg(long, value_delimiter = ',', value_name = "RULES")]
        only: Vec<String>,
    },
    /// Write diagrams for one level (c1, c2, c3, c4) or all of them.
    Render {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "all")]
        level: String,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Write every diagram plus the markdown documentation bundle.
    Docs {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Transitive change impact of one element.
    Impact {
        file: PathBuf,
        /// Element name, optionally prefixed by its kind (`task:Developer.fix`).
        seed: String,
        #[arg(long, value_enum, default_value = "down")]
        direction: DirectionArg,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Interaction pattern of every composite task.
    Classify {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Reprint models in canonical layout.
    Fmt {
        #[command(flatten)]
        inputs: Inputs,
        /// Print to standard output instead of rewriting files.
        #[arg(long, conflicts_with = "check")]
        stdout: bool,
        /// Only report files that are not formatted.
        #[arg(long)]
        check: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::USAGE } else { commands::OK });
        }
    };
    let mut t = term::Term::from_env();
    let code = match cli.command {
        Command::Check {
            inputs,
            format,
            fail_on_warning,
            only,
        } => commands::check(&mut t, &inputs.files, format, fail_on_warning, &only),
        Command::Render { inputs, level, out } => commands::render(&mut t, &inputs.files, &level, &out),
        Command::Docs { inputs, out } => commands::docs(&mut t, &inputs.files, &out),
        Command::Impact {
            file,
            seed,
            direction,
            format,
        } => commands::impact(&mut t, &file, &seed, direction.into(), format),
        Command::Classify { inputs, format } => commands::classify(&mut t, &inputs.files, format),
        Command::Fmt { inputs, stdout, check } => commands::fmt(&mut t, &inputs.files, stdout, check),
    };
    ExitCode::from(code)
}
