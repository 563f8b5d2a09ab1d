//! Scripted multi-agent scenarios over a private ledger.
//!
//! A script names agents by alias, funds some of them at genesis and lists
//! timed actions. [`run`] produces one block per tick, records what happened
//! to every step and checks the script's `expected` block. Runs are pure
//! functions of the script, so transcripts and dumps are byte-identical
//! across repetitions.

pub mod bundled;
mod replay;
mod runner;
mod script;

pub use replay::{replay, replay_file, ReplayError, ReplayReport};
pub use runner::{
    run, run_many, run_with, AgentSummary, AssertionResult, BalanceLine, ContractSummary, RunTranscript, StepOutcome,
    StepStatus,
};
pub use script::{
    agent_seed, load_scenario, parse_scenario, Action, Agent, Expectation, Role, ScenarioError, ScenarioScript, Step,
};
