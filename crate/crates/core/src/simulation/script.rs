//! Scenario script schema and loader.
//!
//! ```json
//! {
//!   "name": "chess_bet",
//!   "seed": "<64 hex chars>",
//!   "config": { "reward": 50, "difficulty": 8, "miner": "miner", "end_tick": 12 },
//!   "agents": [ { "alias": "alice", "role": "human" },
//!               { "alias": "bot", "role": "robot", "controller": "alice",
//!                 "attributes": { "model": "arm-2" } } ],
//!   "genesis": [ { "alias": "alice", "balance": 100 } ],
//!   "steps": [ { "tick": 1, "agent": "alice", "action": "deploy", "kind": "game_betting",
//!                "args": ["chess", 10, 5], "label": "game" },
//!              { "tick": 2, "agent": "alice", "action": "call", "contract": "game",
//!                "method": "join", "amount": 10 } ],
//!   "expected": [ { "check": "balance", "alias": "alice", "equals": 90 } ]
//! }
//! ```
//!
//! Actions: `transfer` (`to`, `amount`), `deploy` (`kind`, `args`, `amount`,
//! `label`), `call` (`contract`, `method`, `args`, `amount`), `publish`
//! (`subject`, `value`; oracle agents only) and `did_update` (`set`, optional
//! `target`). Any step may carry `expect_error` (an error kind such as
//! `WrongAmount`), `expect_output` and an explicit `nonce`.
//!
//! Argument values: integers, booleans, strings and arrays map directly;
//! `"@name"` is the address of an agent or labelled contract (`"@@x"` is the
//! literal string `"@x"`); `{"hex": ".."}` is a byte string;
//! `{"attestation": subject, "by": oracle}` is the latest matching attestation
//! on the bus. In subjects, `{name}` expands to that address.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::codec::{decode_fixed, Hash32};
use crate::contract_engine::ContractKind;
use crate::crypto_identity::{generate_keypair, Address, KeyPair};
use crate::ledger::MAX_DIFFICULTY;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("{field}: unknown alias {alias:?}")]
    UnknownAlias { field: String, alias: String },
    #[error("steps[{index}]: tick {tick} comes after tick {previous}")]
    UnsortedSteps { index: usize, tick: u64, previous: u64 },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Human,
    Robot,
    Oracle,
    Miner,
    ServiceProvider,
    EscrowAgent,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("role serializes");
        f.write_str(s.as_str().expect("role is a string"))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScript {
    name: String,
    #[serde(default)]
    description: String,
    seed: String,
    #[serde(default)]
    config: RawConfig,
    agents: Vec<RawAgent>,
    #[serde(default)]
    genesis: Vec<RawAllocation>,
    #[serde(default)]
    steps: Vec<RawStep>,
    #[serde(default)]
    expected: Vec<Expectation>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    reward: Option<u64>,
    difficulty: Option<u8>,
    miner: Option<String>,
    end_tick: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    alias: String,
    role: Role,
    key_seed: Option<String>,
    controller: Option<String>,
    #[serde(default)]
    attributes: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAllocation {
    alias: String,
    balance: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    tick: u64,
    agent: String,
    action: String,
    to: Option<String>,
    amount: Option<u64>,
    kind: Option<String>,
    args: Option<Vec<serde_json::Value>>,
    label: Option<String>,
    contract: Option<String>,
    method: Option<String>,
    subject: Option<String>,
    value: Option<serde_json::Value>,
    target: Option<String>,
    set: Option<BTreeMap<String, String>>,
    nonce: Option<u64>,
    expect_error: Option<String>,
    expect_output: Option<serde_json::Value>,
}

/// End-state assertion.
#[derive(Debug, Clone, PartialEq, Deserialize, serde::Serialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expectation {
    Balance { alias: String, equals: u64 },
    Phase { contract: String, equals: String },
    HeldFunds { contract: String, equals: u64 },
    EventCount {
        name: String,
        #[serde(default)]
        contract: Option<String>,
        equals: u64,
    },
    /// Dotted path into the contract's state JSON; `"@name"` strings in
    /// `equals` expand to addresses.
    StateField { contract: String, field: String, equals: serde_json::Value },
    Height { equals: u64 },
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub alias: String,
    pub role: Role,
    pub keys: KeyPair,
    pub controller: Option<String>,
    pub attributes: BTreeMap<String, String>,
    /// `key_seed` or the alias; hashed with the script seed into the key.
    keys_label: String,
}

impl Agent {
    fn new(alias: String, role: Role, label: String, seed: &[u8; 32]) -> Agent {
        let keys = generate_keypair(&agent_seed(seed, &label)).expect("32-byte seed");
        Agent { alias, role, keys, controller: None, attributes: BTreeMap::new(), keys_label: label }
    }

    pub fn address(&self) -> Address {
        self.keys.address()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Transfer { to: String, amount: u64 },
    Deploy { kind: String, args: Vec<serde_json::Value>, amount: u64, label: Option<String> },
    Call { contract: String, method: String, args: Vec<serde_json::Value>, amount: u64 },
    Publish { subject: String, value: serde_json::Value },
    DidUpdate { target: String, set: BTreeMap<String, String> },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Transfer { .. } => "transfer",
            Action::Deploy { .. } => "deploy",
            Action::Call { .. } => "call",
            Action::Publish { .. } => "publish",
            Action::DidUpdate { .. } => "did_update",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub tick: u64,
    pub agent: String,
    pub action: Action,
    pub nonce: Option<u64>,
    pub expect_error: Option<String>,
    pub expect_output: Option<serde_json::Value>,
}

/// A validated script with keys derived for every agent.
#[derive(Debug, Clone)]
pub struct ScenarioScript {
    pub name: String,
    pub description: String,
    pub seed: [u8; 32],
    pub reward: u64,
    pub difficulty: u8,
    pub miner: Option<String>,
    pub end_tick: u64,
    pub agents: Vec<Agent>,
    pub genesis: Vec<(String, u64)>,
    pub steps: Vec<Step>,
    pub expected: Vec<Expectation>,
}

/// Agent key seed: `SHA-256(script seed || key_seed or alias)`.
pub fn agent_seed(script_seed: &[u8; 32], label: &str) -> [u8; 32] {
    let mut buf = script_seed.to_vec();
    buf.extend_from_slice(label.as_bytes());
    *Hash32::digest(&buf).as_bytes()
}

impl ScenarioScript {
    pub fn agent(&self, alias: &str) -> Option<&Agent> {
        self.agents.iter().find(|a| a.alias == alias)
    }

    /// Labels of contracts deployed by the script, in step order.
    pub fn contract_labels(&self) -> Vec<&str> {
        self.steps
            .iter()
            .filter_map(|s| match &s.action {
                Action::Deploy { label: Some(l), .. } => Some(l.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn last_tick(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.tick).max(self.end_tick)
    }

    /// Copy with a different seed; aliases, steps and expectations unchanged.
    pub fn with_seed(&self, seed: [u8; 32]) -> ScenarioScript {
        let mut next = self.clone();
        next.seed = seed;
        for agent in &mut next.agents {
            agent.keys = generate_keypair(&agent_seed(&seed, &agent.keys_label)).expect("32-byte seed");
        }
        next
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioScript, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<ScenarioScript, ScenarioError> {
    let raw: RawScript = serde_json::from_str(text)
        .map_err(|e| ScenarioError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
    resolve(raw)
}

fn resolve(raw: RawScript) -> Result<ScenarioScript, ScenarioError> {
    let seed: [u8; 32] = decode_fixed(&raw.seed).map_err(|e| invalid("seed", format!("expected 32-byte hex: {e}")))?;

    let mut agents: Vec<Agent> = Vec::with_capacity(raw.agents.len());
    let mut names = BTreeSet::new();
    for (i, a) in raw.agents.iter().enumerate() {
        let field = format!("agents[{i}].alias");
        if a.alias.is_empty() || a.alias.starts_with('@') || a.alias.starts_with("0x") {
            return Err(invalid(field, "alias must be non-empty and not start with '@' or '0x'"));
        }
        if !names.insert(a.alias.clone()) {
            return Err(invalid(field, format!("duplicate alias {:?}", a.alias)));
        }
        let label = a.key_seed.clone().unwrap_or_else(|| a.alias.clone());
        let mut agent = Agent::new(a.alias.clone(), a.role, label, &seed);
        agent.attributes = a.attributes.clone();
        agent.controller = a.controller.clone();
        agents.push(agent);
    }
    for (i, a) in raw.agents.iter().enumerate() {
        if let Some(c) = &a.controller {
            if !names.contains(c) {
                return Err(ScenarioError::UnknownAlias { field: format!("agents[{i}].controller"), alias: c.clone() });
            }
        }
    }
    let agent_role = |alias: &str| agents.iter().find(|a| a.alias == alias).map(|a| a.role);

    let mut genesis = Vec::with_capacity(raw.genesis.len());
    let mut funded = BTreeSet::new();
    for (i, g) in raw.genesis.iter().enumerate() {
        if agent_role(&g.alias).is_none() {
            return Err(ScenarioError::UnknownAlias { field: format!("genesis[{i}].alias"), alias: g.alias.clone() });
        }
        if !funded.insert(g.alias.clone()) {
            return Err(invalid(format!("genesis[{i}].alias"), "allocated twice"));
        }
        genesis.push((g.alias.clone(), g.balance));
    }

    if let Some(m) = &raw.config.miner {
        if agent_role(m).is_none() {
            return Err(ScenarioError::UnknownAlias { field: "config.miner".into(), alias: m.clone() });
        }
    }
    let miner = raw
        .config
        .miner
        .clone()
        .or_else(|| agents.iter().find(|a| a.role == Role::Miner).map(|a| a.alias.clone()));
    let difficulty = raw.config.difficulty.unwrap_or(0);
    if difficulty > MAX_DIFFICULTY {
        return Err(invalid("config.difficulty", format!("at most {MAX_DIFFICULTY}")));
    }

    // contract labels share the alias namespace
    let mut labels = BTreeSet::new();
    for (i, s) in raw.steps.iter().enumerate() {
        if let Some(l) = &s.label {
            if names.contains(l) || !labels.insert(l.clone()) {
                return Err(invalid(format!("steps[{i}].label"), format!("label {l:?} is already taken")));
            }
        }
    }
    let known = |name: &str| names.contains(name) || labels.contains(name);

    let mut steps = Vec::with_capacity(raw.steps.len());
    let mut previous = 0;
    for (i, s) in raw.steps.into_iter().enumerate() {
        if s.tick == 0 {
            return Err(invalid(format!("steps[{i}].tick"), "ticks start at 1; block 0 is genesis"));
        }
        if s.tick < previous {
            return Err(ScenarioError::UnsortedSteps { index: i, tick: s.tick, previous });
        }
        previous = s.tick;
        steps.push(resolve_step(i, s, &agent_role, &known)?);
    }

    for (i, e) in raw.expected.iter().enumerate() {
        let field = format!("expected[{i}]");
        let refs: Vec<&str> = match e {
            Expectation::Balance { alias, .. } => vec![alias],
            Expectation::Phase { contract, .. } | Expectation::HeldFunds { contract, .. } => vec![contract],
            Expectation::EventCount { contract, .. } => contract.iter().map(String::as_str).collect(),
            Expectation::StateField { contract, equals, .. } => {
                let mut v = vec![contract.as_str()];
                collect_at_refs(equals, &mut v);
                v
            }
            Expectation::Height { .. } => vec![],
        };
        for r in refs {
            if !known(r) && !r.starts_with("0x") {
                return Err(ScenarioError::UnknownAlias { field, alias: r.to_string() });
            }
        }
    }

    Ok(ScenarioScript {
        name: raw.name,
        description: raw.description,
        seed,
        reward: raw.config.reward.unwrap_or(crate::ledger::DEFAULT_BLOCK_REWARD),
        difficulty,
        miner,
        end_tick: raw.config.end_tick.unwrap_or(0),
        agents,
        genesis,
        steps,
        expected: raw.expected,
    })
}

fn collect_at_refs<'a>(v: &'a serde_json::Value, out: &mut Vec<&'a str>) {
    match v {
        serde_json::Value::String(s) => {
            if let Some(name) = s.strip_prefix('@') {
                if !name.starts_with('@') {
                    out.push(name);
                }
            }
        }
        serde_json::Value::Array(items) => items.iter().for_each(|x| collect_at_refs(x, out)),
        serde_json::Value::Object(map) => map.values().for_each(|x| collect_at_refs(x, out)),
        _ => {}
    }
}

fn subject_refs(subject: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = subject;
    while let Some(start) = rest.find('{') {
        let Some(len) = rest[start..].find('}') else { break };
        out.push(&rest[start + 1..start + len]);
        rest = &rest[start + len + 1..];
    }
    out
}

fn resolve_step(
    i: usize,
    s: RawStep,
    agent_role: &dyn Fn(&str) -> Option<Role>,
    known: &dyn Fn(&str) -> bool,
) -> Result<Step, ScenarioError> {
    let field = |name: &str| format!("steps[{i}].{name}");
    let role = agent_role(&s.agent)
        .ok_or_else(|| ScenarioError::UnknownAlias { field: field("agent"), alias: s.agent.clone() })?;
    let require = |v: Option<String>, name: &str| v.ok_or_else(|| invalid(field(name), format!("{} requires {name:?}", s.action)));
    let check_ref = |name: &str, f: &str| -> Result<(), ScenarioError> {
        if known(name) || (name.starts_with("0x") && name.parse::<Address>().is_ok()) {
            Ok(())
        } else {
            Err(ScenarioError::UnknownAlias { field: field(f), alias: name.to_string() })
        }
    };
    let check_args = |args: &[serde_json::Value]| -> Result<(), ScenarioError> {
        let mut refs = Vec::new();
        for a in args {
            collect_at_refs(a, &mut refs);
            collect_subject_refs(a, &mut refs);
        }
        refs.into_iter().try_for_each(|r| check_ref(r, "args"))
    };

    let action = match s.action.as_str() {
        "transfer" => {
            let to = require(s.to.clone(), "to")?;
            check_ref(&to, "to")?;
            Action::Transfer { to, amount: s.amount.unwrap_or(0) }
        }
        "deploy" => {
            let kind = require(s.kind.clone(), "kind")?;
            if kind.parse::<ContractKind>().is_err() {
                return Err(invalid(field("kind"), format!("unknown contract kind {kind:?}")));
            }
            let args = s.args.clone().unwrap_or_default();
            check_args(&args)?;
            Action::Deploy { kind, args, amount: s.amount.unwrap_or(0), label: s.label.clone() }
        }
        "call" => {
            let contract = require(s.contract.clone(), "contract")?;
            check_ref(&contract, "contract")?;
            let args = s.args.clone().unwrap_or_default();
            check_args(&args)?;
            Action::Call { contract, method: require(s.method.clone(), "method")?, args, amount: s.amount.unwrap_or(0) }
        }
        "publish" => {
            if role != Role::Oracle {
                return Err(invalid(field("agent"), "only oracle agents publish attestations"));
            }
            let subject = require(s.subject.clone(), "subject")?;
            for r in subject_refs(&subject) {
                check_ref(r, "subject")?;
            }
            let value = s.value.clone().ok_or_else(|| invalid(field("value"), "publish requires \"value\""))?;
            Action::Publish { subject, value }
        }
        "did_update" => {
            let target = s.target.clone().unwrap_or_else(|| s.agent.clone());
            if agent_role(&target).is_none() {
                return Err(ScenarioError::UnknownAlias { field: field("target"), alias: target });
            }
            Action::DidUpdate { target, set: s.set.clone().unwrap_or_default() }
        }
        other => return Err(invalid(field("action"), format!("unknown action {other:?}"))),
    };
    let stray = match &action {
        Action::Transfer { .. } => s.kind.is_some() || s.contract.is_some() || s.method.is_some() || s.args.is_some(),
        Action::Deploy { .. } => s.to.is_some() || s.contract.is_some() || s.method.is_some(),
        Action::Call { .. } => s.to.is_some() || s.kind.is_some() || s.label.is_some(),
        Action::Publish { .. } | Action::DidUpdate { .. } => s.amount.is_some() || s.args.is_some() || s.to.is_some(),
    };
    if stray || (s.label.is_some() && !matches!(action, Action::Deploy { .. })) {
        return Err(invalid(format!("steps[{i}]"), format!("fields do not fit action {:?}", s.action)));
    }
    Ok(Step {
        tick: s.tick,
        agent: s.agent,
        action,
        nonce: s.nonce,
        expect_error: s.expect_error,
        expect_output: s.expect_output,
    })
}

fn collect_subject_refs<'a>(v: &'a serde_json::Value, out: &mut Vec<&'a str>) {
    match v {
        serde_json::Value::Object(map) => {
            if let Some(serde_json::Value::String(subject)) = map.get("attestation") {
                out.extend(subject_refs(subject));
            }
            if let Some(serde_json::Value::String(by)) = map.get("by") {
                out.push(by);
            }
        }
        serde_json::Value::Array(items) => items.iter().for_each(|x| collect_subject_refs(x, out)),
        _ => {}
    }
}
