use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use diagdec::cli::{documented_keys, parse_with_overrides, run, Subcommand};

/// Runs one decoupling experiment described by `key = value` parameters.
#[derive(Parser, Debug)]
#[command(name = "diagdec", version, about, after_help = key_help())]
struct Args {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Inline `key=value` parameter, overriding the file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write every sampled diagonal circuit to this path (decouple-mc only).
    #[arg(long = "dump-circuits")]
    dump_circuits: Option<PathBuf>,
}

fn key_help() -> String {
    let mut s = String::from("Keys by subcommand:\n");
    for sub in Subcommand::ALL {
        let keys: Vec<&str> = documented_keys(sub).into_iter().map(|(k, _)| k).collect();
        s.push_str(&format!("  {sub}: {}\n", keys.join(", ")));
    }
    s
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("diagdec: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let source = match &args.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => return usage_error(format!("{}: {e}", path.display())),
        },
        None => String::new(),
    };
    let mut overrides = args.set.clone();
    if let Some(p) = &args.dump_circuits {
        overrides.push(format!("circuits={}", p.display()));
    }
    let config = match parse_with_overrides(&source, &overrides) {
        Ok(c) => c,
        Err(errors) => return usage_error(format!("invalid configuration\n{errors}")),
    };
    let output = match run(&config) {
        Ok(o) => o,
        Err(e) => return usage_error(e),
    };
    let out_path = args.out.or_else(|| config.output.clone());
    let written = match &out_path {
        Some(path) => fs::write(path, &output.csv),
        None => std::io::stdout().write_all(output.csv.as_bytes()),
    };
    if let Err(e) = written {
        return usage_error(format!("cannot write CSV: {e}"));
    }
    if let (Some(path), Some(text)) = (config.path("circuits"), &output.circuits) {
        if let Err(e) = fs::write(path, text) {
            return usage_error(format!("cannot write circuits to {}: {e}", path.display()));
        }
    }
    if out_path.is_some() {
        println!("{}", output.summary);
    } else {
        eprintln!("{}", output.summary);
    }
    if output.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
