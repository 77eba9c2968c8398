mod args;
mod commands;
mod error;
mod manifest;

use std::ffi::OsString;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, ReplayArgs};
use commands::Outcome;
use error::CliError;
use manifest::{digests, RunManifest};

fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Encode(a) => commands::encode(a),
        Command::Train(a) => commands::train_cmd(a),
        Command::Eval(a) => commands::eval_cmd(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Synth(a) => commands::synth(a),
        Command::Replay(_) => Err(CliError::usage("replay cannot be nested")),
    }
}

fn record(command: &Command, args: Vec<String>) -> Result<(), CliError> {
    let start = Instant::now();
    let outcome = execute(command)?;
    let working_dir = std::env::current_dir().map_err(|e| CliError::io(".".as_ref(), e))?;
    let manifest = RunManifest {
        command: command.name().to_string(),
        args,
        working_dir,
        config: serde_json::to_value(command).expect("arguments serialize"),
        seed: outcome.seed,
        inputs: digests(&outcome.inputs)?,
        outputs: digests(&outcome.outputs)?,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_ms: start.elapsed().as_millis() as u64,
    };
    manifest.save(&outcome.manifest)
}

fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let recorded = RunManifest::load(&args.manifest)?;
    std::env::set_current_dir(&recorded.working_dir).map_err(|e| CliError::io(&recorded.working_dir, e))?;
    let current = digests(&recorded.inputs.keys().map(Into::into).collect::<Vec<_>>())?;
    for (path, digest) in &recorded.inputs {
        if &current[path] != digest {
            return Err(CliError::Data(format!("input {path} changed since the manifest was written")));
        }
    }
    let argv = std::iter::once("score".to_string()).chain(recorded.args.iter().cloned());
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::usage(format!("manifest arguments: {e}")))?;
    execute(&cli.command)?;
    let produced = digests(&recorded.outputs.keys().map(Into::into).collect::<Vec<_>>())?;
    let differing: Vec<&String> = recorded
        .outputs
        .iter()
        .filter(|(p, d)| &produced[*p] != *d)
        .map(|(p, _)| p)
        .collect();
    if !differing.is_empty() {
        return Err(CliError::Data(format!(
            "replay produced different outputs: {}",
            differing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    println!("replay of '{}': {} outputs identical", recorded.command, recorded.outputs.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let raw: Vec<OsString> = std::env::args_os().collect();
    let cli = match Cli::try_parse_from(&raw) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Replay(a) => replay(a),
        command => {
            let args = raw[1..].iter().map(|a| a.to_string_lossy().into_owned()).collect();
            record(command, args)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
