mod args;
mod commands;
mod resources;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::Cli;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Corpus(#[from] evarena::corpus::CorpusError),
    #[error(transparent)]
    Judge(#[from] evarena::judges::JudgeError),
    #[error(transparent)]
    Agent(#[from] evarena::agents::AgentError),
    #[error(transparent)]
    Train(#[from] evarena::agents::TrainError),
    #[error(transparent)]
    Arena(#[from] evarena::arena::ArenaError),
    #[error(transparent)]
    Eval(#[from] evarena::eval::EvalError),
    #[error(transparent)]
    Service(#[from] evarena_service::ServiceError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Corpus(_) => "corpus",
            CliError::Judge(_) => "judge",
            CliError::Agent(_) => "agent",
            CliError::Train(_) => "train",
            CliError::Arena(_) => "arena",
            CliError::Eval(_) => "eval",
            CliError::Service(_) => "service",
            CliError::Io { .. } => "io",
            CliError::Json(_) => "json",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {line}", e.kind());
            if matches!(e, CliError::Usage(_)) {
                eprintln!("run `evarena --help` for usage");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
