//! `cesaro-growth`: batch driver for the growth-space diagnostics.
//!
//! Exit codes: 0 on success whatever the verdicts, 2 for configuration
//! errors, 3 for numerical failures, 1 when the report cannot be written.

mod commands;
mod config;
mod inputs;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use commands::{CommandSpec, Format, COMMANDS, COMMON_KEYS};
use config::{RunConfig, SUBCOMMAND_KEY};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cesaro_growth::Error),
    #[error("writing output: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Output(_) => 1,
        }
    }
}

fn cli() -> Command {
    let mut cmd = Command::new("cesaro-growth")
        .about("Growth-space diagnostics for harmonic functions on the ball")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true);
    for spec in COMMANDS {
        let mut sub = Command::new(spec.name)
            .about(spec.about)
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .help("key=value defaults; flags override"),
            )
            .arg(
                Arg::new("print-config")
                    .long("print-config")
                    .action(ArgAction::SetTrue)
                    .help("print the merged configuration and exit"),
            );
        for (key, help) in COMMON_KEYS.iter().chain(spec.keys) {
            sub = sub.arg(Arg::new(*key).long(*key).value_name("VALUE").help(*help));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn merged_config(spec: &CommandSpec, m: &ArgMatches) -> Result<RunConfig, CliError> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::new(),
    };
    if let Some(s) = cfg.get(SUBCOMMAND_KEY) {
        if s != spec.name {
            return Err(CliError::Config(format!(
                "config is for `{s}`, not `{}`",
                spec.name
            )));
        }
    }
    for (key, _) in COMMON_KEYS.iter().chain(spec.keys) {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v.clone());
        }
    }
    let allowed = |k: &str| k == SUBCOMMAND_KEY || COMMON_KEYS.iter().chain(spec.keys).any(|(a, _)| *a == k);
    if let Some(k) = cfg.keys().find(|k| !allowed(k)) {
        return Err(CliError::Config(format!("`{k}` is not an option of {}", spec.name)));
    }
    cfg.set(SUBCOMMAND_KEY, spec.name);
    Ok(cfg)
}

fn run(spec: &CommandSpec, m: &ArgMatches) -> Result<(), CliError> {
    let cfg = merged_config(spec, m)?;
    if m.get_flag("print-config") {
        print!("{}", cfg.to_canonical());
        return Ok(());
    }
    let format = match cfg.get("format") {
        None => spec.default_format,
        Some(s) => Format::parse(s)?,
    };
    let out = (spec.run)(&cfg)?;
    let text = out.render(format, &cfg);
    match cfg.get("output") {
        Some(path) => std::fs::write(Path::new(path), text).map_err(|e| CliError::Output(format!("{path}: {e}"))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(e.to_string())),
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let spec = COMMANDS.iter().find(|s| s.name == name).expect("registered subcommand");
    match run(spec, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_tree_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn keys_are_unique_per_command() {
        for spec in COMMANDS {
            let mut keys: Vec<&str> = COMMON_KEYS.iter().chain(spec.keys).map(|k| k.0).collect();
            keys.sort();
            let n = keys.len();
            keys.dedup();
            assert_eq!(keys.len(), n, "{}", spec.name);
        }
    }
}
