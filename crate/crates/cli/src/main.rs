//! `rbn`: key generation, scenario runs and chain dump inspection.
//!
//! Exit status: 0 when everything checks out, 1 when an assertion or a chain
//! check fails, 2 on usage, parse or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use robonomics_core::contract_engine::ExecLimits;
use robonomics_core::crypto_identity::{generate_keypair, Address, DidDocument};
use robonomics_core::ledger::{filter_events, validate_dump, Chain, EventFilter};
use robonomics_core::par::ExecMode;
use robonomics_core::simulation::{bundled, load_scenario, replay, run_with, ReplayError, ScenarioScript};
use serde_json::json;

#[derive(Parser)]
#[command(name = "rbn", version, about = "Deterministic robot-human agreement ledger")]
struct Cli {
    /// Print JSON instead of line-oriented text.
    #[arg(long, global = true)]
    json: bool,
    /// Run batch work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive a key pair, address and DID from a 32-byte hex seed.
    Keygen {
        #[arg(long)]
        seed: String,
    },
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Re-execute a chain dump from genesis and print the resulting state.
    Replay { dump: PathBuf },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Run a scenario file (or the name of a bundled scenario).
    Run {
        file: String,
        /// Write the chain dump here.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// List bundled scenarios.
    List,
}

#[derive(Subcommand)]
enum ChainCommand {
    /// Check every block of a dump; reports the first violation.
    Validate { dump: PathBuf },
    /// Print events from a valid dump.
    Events {
        dump: PathBuf,
        #[arg(long)]
        contract: Option<Address>,
        #[arg(long)]
        name: Option<String>,
    },
}

/// Ok(true): success, Ok(false): a check failed, Err: usage or input error.
type Outcome = Result<bool>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mode = if cli.sequential { ExecMode::Sequential } else { ExecMode::Parallel };
    let result = match cli.command {
        Command::Keygen { seed } => keygen(&seed, cli.json),
        Command::Scenario(ScenarioCommand::Run { file, dump }) => scenario_run(&file, dump.as_deref(), cli.json, mode),
        Command::Scenario(ScenarioCommand::List) => scenario_list(cli.json),
        Command::Chain(ChainCommand::Validate { dump }) => chain_validate(&dump, cli.json, mode),
        Command::Chain(ChainCommand::Events { dump, contract, name }) => {
            chain_events(&dump, EventFilter { contract, name }, cli.json, mode)
        }
        Command::Replay { dump } => replay_dump(&dump, cli.json, mode),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn keygen(seed: &str, json: bool) -> Outcome {
    let bytes = hex::decode(seed.strip_prefix("0x").unwrap_or(seed)).context("seed is not hex")?;
    let keys = generate_keypair(&bytes).map_err(|e| anyhow!("{e}"))?;
    let public_key = hex::encode(keys.public_key().as_bytes());
    let address = keys.address();
    let did = DidDocument::did_for(&address);
    if json {
        println!("{}", json!({ "public_key": public_key, "address": address.to_string(), "did": did }));
    } else {
        println!("public_key {public_key}");
        println!("address {address}");
        println!("did {did}");
    }
    Ok(true)
}

fn load(file: &str) -> Result<ScenarioScript> {
    if !Path::new(file).exists() {
        if let Some(script) = bundled::load(file) {
            return Ok(script);
        }
    }
    load_scenario(file).map_err(|e| anyhow!("{file}: {e}"))
}

fn scenario_run(file: &str, dump: Option<&Path>, json: bool, mode: ExecMode) -> Outcome {
    let script = load(file)?;
    let transcript = run_with(&script, mode);
    if let Some(path) = dump {
        fs::write(path, &transcript.dump).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if json {
        println!("{}", transcript.to_json());
    } else {
        print!("{}", transcript.to_text());
    }
    Ok(transcript.passed)
}

fn scenario_list(json: bool) -> Outcome {
    let scripts = bundled::all();
    if json {
        let list: Vec<_> = scripts.iter().map(|s| json!({ "name": s.name, "description": s.description })).collect();
        println!("{}", serde_json::Value::Array(list));
    } else {
        for s in scripts {
            println!("{} {}", s.name, s.description);
        }
    }
    Ok(true)
}

fn chain_validate(path: &Path, json: bool, mode: ExecMode) -> Outcome {
    let report = validate_dump(&read(path)?, &ExecLimits::default(), mode);
    if json {
        println!("{}", serde_json::to_string(&report)?);
    } else if let Some(v) = &report.violation {
        println!("invalid height {}: {}", v.height, v.kind);
    } else {
        let height = report.verified_height.unwrap_or_default();
        let state = report.state_hash.map(|h| h.to_string()).unwrap_or_default();
        println!("valid height {height} state {state} funds {}", report.total_funds);
    }
    Ok(report.valid)
}

fn chain_events(path: &Path, filter: EventFilter, json: bool, mode: ExecMode) -> Outcome {
    let text = read(path)?;
    let report = validate_dump(&text, &ExecLimits::default(), mode);
    if let Some(v) = report.violation {
        eprintln!("invalid height {}: {}", v.height, v.kind);
        return Ok(false);
    }
    let chain = Chain::from_dump(&text).map_err(|e| anyhow!("line {}: {}", e.line, e.reason))?;
    let events = filter_events(chain.blocks.iter().flat_map(|b| &b.events), &filter);
    for ev in &events {
        if json {
            println!("{}", serde_json::to_string(ev)?);
        } else {
            let fields: Vec<String> = ev.fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("{} {} {} {}", ev.block_height, ev.contract, ev.name, fields.join(" "));
        }
    }
    Ok(true)
}

fn replay_dump(path: &Path, json: bool, mode: ExecMode) -> Outcome {
    let report = match replay(&read(path)?, mode) {
        Ok(r) => r,
        Err(e @ ReplayError::Io { .. }) => return Err(e.into()),
        Err(e) => {
            if json {
                println!("{}", json!({ "valid": false, "error": e.to_string() }));
            } else {
                println!("invalid {e}");
            }
            return Ok(false);
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("height {}", report.height);
        println!("state {}", report.state_hash);
        println!("funds {}", report.total_funds);
        for (a, b) in &report.balances {
            println!("balance {a} {b}");
        }
        for (a, h) in &report.held_funds {
            println!("held {a} {h}");
        }
    }
    Ok(true)
}
