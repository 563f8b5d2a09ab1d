//! Tick-by-tick execution of a scenario script.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::script::{Action, Expectation, Role, ScenarioScript, Step};
use crate::codec::{decode_hex, Hash32, Value};
use crate::contract_engine::contract_address;
use crate::crypto_identity::{Address, DidChanges, DidDocument, DidError, DidProof, DidRegistry};
use crate::ledger::{Allocation, ChainEvent, EventFilter, Ledger, LedgerConfig, SignedTransaction};
use crate::oracle::OracleBus;
use crate::par::{self, ExecMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentSummary {
    pub alias: String,
    pub role: Role,
    pub address: Address,
    pub did: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    /// Included with a successful receipt.
    Committed,
    /// Included with a failed receipt; only the nonce was consumed.
    Failed,
    /// Never reached a block.
    Rejected,
    /// Off-chain action (attestation or DID update) accepted.
    Applied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepOutcome {
    pub index: usize,
    pub tick: u64,
    pub agent: String,
    pub action: &'static str,
    pub status: StepStatus,
    pub error: Option<String>,
    pub tx_hash: Option<Hash32>,
    pub contract: Option<Address>,
    pub output: Option<Value>,
}

impl StepOutcome {
    /// Leading error kind, e.g. `WrongAmount`.
    pub fn error_kind(&self) -> Option<&str> {
        self.error.as_deref().map(|e| e.split(':').next().unwrap_or(e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceLine {
    pub alias: String,
    pub address: Address,
    pub balance: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractSummary {
    pub label: Option<String>,
    pub address: Address,
    pub kind: String,
    pub phase: String,
    pub held_funds: u64,
    pub state: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionResult {
    pub description: String,
    pub passed: bool,
    pub actual: String,
}

/// Everything observable about one run. Serializes deterministically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunTranscript {
    pub scenario: String,
    pub seed: String,
    pub height: u64,
    pub tip_hash: Hash32,
    pub dump_sha256: Hash32,
    pub total_funds: u128,
    pub expected_supply: u128,
    pub agents: Vec<AgentSummary>,
    pub steps: Vec<StepOutcome>,
    pub events: Vec<ChainEvent>,
    pub final_balances: Vec<BalanceLine>,
    pub contracts: Vec<ContractSummary>,
    pub dids: Vec<DidDocument>,
    pub assertions: Vec<AssertionResult>,
    pub passed: bool,
    /// Chain dump; not part of the JSON transcript.
    #[serde(skip)]
    pub dump: String,
}

impl RunTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn failed_assertions(&self) -> impl Iterator<Item = &AssertionResult> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {} seed {}", self.scenario, self.seed);
        let _ = writeln!(out, "height {} tip {}", self.height, self.tip_hash);
        for s in &self.steps {
            let _ = write!(out, "step {} tick {} {} {} {:?}", s.index, s.tick, s.agent, s.action, s.status);
            if let Some(c) = s.contract {
                let _ = write!(out, " contract {c}");
            }
            if let Some(o) = &s.output {
                let _ = write!(out, " output {o}");
            }
            if let Some(e) = &s.error {
                let _ = write!(out, " error {e}");
            }
            out.push('\n');
        }
        for b in &self.final_balances {
            let _ = writeln!(out, "balance {} {} {}", b.alias, b.address, b.balance);
        }
        for c in &self.contracts {
            let label = c.label.as_deref().unwrap_or("-");
            let _ = writeln!(out, "contract {label} {} {} phase {} held {}", c.address, c.kind, c.phase, c.held_funds);
        }
        let _ = writeln!(out, "funds {} expected {}", self.total_funds, self.expected_supply);
        for a in &self.assertions {
            let mark = if a.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{mark} {} (actual {})", a.description, a.actual);
        }
        let passed = self.assertions.iter().filter(|a| a.passed).count();
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "result {verdict} {passed}/{} assertions", self.assertions.len());
        out
    }
}

struct Pending {
    outcome: usize,
    tx_hash: Hash32,
    position: usize,
    label: Option<String>,
}

struct Runner<'a> {
    script: &'a ScenarioScript,
    ledger: Ledger,
    bus: OracleBus,
    dids: DidRegistry,
    labels: BTreeMap<String, Address>,
    in_flight: BTreeMap<Address, u64>,
    outcomes: Vec<StepOutcome>,
}

/// Executes `script` with one block per tick and evaluates its expectations.
pub fn run(script: &ScenarioScript) -> RunTranscript {
    run_with(script, ExecMode::default())
}

pub fn run_with(script: &ScenarioScript, mode: ExecMode) -> RunTranscript {
    let mut config = LedgerConfig { reward: script.reward, mode, ..LedgerConfig::default() };
    for (alias, balance) in &script.genesis {
        let address = script.agent(alias).expect("validated alias").address();
        config.genesis.push(Allocation { address, balance: *balance });
    }
    let mut bus = OracleBus::new();
    let mut dids = DidRegistry::new();
    for a in &script.agents {
        if a.role == Role::Oracle {
            bus.register_oracle(a.keys.public_key());
        }
        let controller = a.controller.as_ref().map(|c| script.agent(c).expect("validated alias").address());
        dids.register_did(&a.keys, a.attributes.clone(), controller).expect("aliases are unique");
    }
    let mut runner = Runner {
        script,
        ledger: Ledger::new(config),
        bus,
        dids,
        labels: BTreeMap::new(),
        in_flight: BTreeMap::new(),
        outcomes: Vec::new(),
    };
    let miner = script.miner.as_ref().map_or(Address::ZERO, |m| script.agent(m).expect("validated alias").address());

    let mut next = 0;
    for tick in 1..=script.last_tick() {
        let mut pending = Vec::new();
        while next < script.steps.len() && script.steps[next].tick == tick {
            if let Some(p) = runner.step(next, &script.steps[next]) {
                pending.push(p);
            }
            next += 1;
        }
        runner.seal(miner, pending);
    }
    runner.finish()
}

/// Runs independent scripts, one ledger each, in parallel under `mode`.
pub fn run_many(scripts: &[ScenarioScript], mode: ExecMode) -> Vec<RunTranscript> {
    par::map(mode, scripts, |s| run_with(s, mode))
}

impl Runner<'_> {
    fn address_of(&self, name: &str) -> Result<Address, String> {
        if let Some(a) = self.script.agent(name) {
            return Ok(a.address());
        }
        if let Some(a) = self.labels.get(name) {
            return Ok(*a);
        }
        if name.starts_with("0x") {
            return name.parse().map_err(|e| format!("BadArguments: {e}"));
        }
        Err(format!("UnknownLabel: {name:?} is not deployed"))
    }

    fn expand_subject(&self, subject: &str) -> Result<String, String> {
        let mut out = String::new();
        let mut rest = subject;
        while let Some(start) = rest.find('{') {
            let Some(len) = rest[start..].find('}') else { break };
            out.push_str(&rest[..start]);
            out.push_str(&self.address_of(&rest[start + 1..start + len])?.to_hex());
            rest = &rest[start + len + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }

    fn to_value(&self, v: &serde_json::Value) -> Result<Value, String> {
        use serde_json::Value as J;
        Ok(match v {
            J::Bool(b) => Value::Bool(*b),
            J::Number(n) => Value::U64(n.as_u64().ok_or_else(|| format!("BadArguments: {n} is not a u64"))?),
            J::String(s) => match s.strip_prefix('@') {
                Some(rest) if rest.starts_with('@') => Value::Str(rest.to_string()),
                Some(name) => Value::Addr(self.address_of(name)?),
                None => Value::Str(s.clone()),
            },
            J::Array(items) => Value::List(items.iter().map(|i| self.to_value(i)).collect::<Result<_, _>>()?),
            J::Object(map) => {
                if let Some(J::String(h)) = map.get("hex") {
                    Value::Bytes(decode_hex(h).map_err(|e| format!("BadArguments: {e}"))?)
                } else if let Some(J::String(subject)) = map.get("attestation") {
                    let subject = self.expand_subject(subject)?;
                    let att = match map.get("by") {
                        Some(J::String(by)) => self.bus.query_latest_from(&subject, &self.address_of(by)?),
                        _ => self.bus.query_latest(&subject),
                    };
                    att.ok_or_else(|| format!("NoAttestation: nothing published for {subject:?}"))?.to_value()
                } else {
                    return Err(format!("BadArguments: unsupported argument object {v}"));
                }
            }
            J::Null => return Err("BadArguments: null argument".into()),
        })
    }

    fn record(&mut self, index: usize, step: &Step, status: StepStatus, error: Option<String>) -> usize {
        self.outcomes.push(StepOutcome {
            index,
            tick: step.tick,
            agent: step.agent.clone(),
            action: step.action.name(),
            status,
            error,
            tx_hash: None,
            contract: None,
            output: None,
        });
        self.outcomes.len() - 1
    }

    fn step(&mut self, index: usize, step: &Step) -> Option<Pending> {
        let agent = self.script.agent(&step.agent).expect("validated alias");
        let from = agent.address();
        let nonce = step
            .nonce
            .unwrap_or_else(|| self.ledger.get_nonce(&from) + self.in_flight.get(&from).copied().unwrap_or(0));

        let built: Result<(SignedTransaction, Option<String>), String> = match &step.action {
            Action::Transfer { to, amount } => {
                self.address_of(to).map(|to| (SignedTransaction::transfer(&agent.keys, to, nonce, *amount), None))
            }
            Action::Deploy { kind, args, amount, label } => args
                .iter()
                .map(|a| self.to_value(a))
                .collect::<Result<Vec<_>, _>>()
                .map(|args| (SignedTransaction::deploy(&agent.keys, nonce, *amount, kind, args), label.clone())),
            Action::Call { contract, method, args, amount } => self.address_of(contract).and_then(|to| {
                let args = args.iter().map(|a| self.to_value(a)).collect::<Result<Vec<_>, _>>()?;
                Ok((SignedTransaction::call(&agent.keys, to, nonce, *amount, method, args), None))
            }),
            Action::Publish { subject, value } => {
                let result = self
                    .expand_subject(subject)
                    .and_then(|subject| Ok((subject, self.to_value(value)?)))
                    .and_then(|(subject, value)| {
                        self.bus
                            .publish(from, &agent.keys, &subject, value, step.tick)
                            .map_err(|e| format!("Unauthorized: {e}"))
                    });
                let (status, error) = match result {
                    Ok(_) => (StepStatus::Applied, None),
                    Err(e) => (StepStatus::Rejected, Some(e)),
                };
                self.record(index, step, status, error);
                return None;
            }
            Action::DidUpdate { target, set } => {
                let did = DidDocument::did_for(&self.script.agent(target).expect("validated alias").address());
                let changes = DidChanges { set_attributes: set.clone(), ..DidChanges::default() };
                let result = self.dids.resolve_did(&did).and_then(|doc| {
                    let proof = DidProof::sign_update(&agent.keys, &doc, &changes);
                    self.dids.update_did(&did, &changes, &proof)
                });
                let (status, error) = match result {
                    Ok(_) => (StepStatus::Applied, None),
                    Err(e) => (StepStatus::Rejected, Some(format!("{}: {e}", did_error_kind(&e)))),
                };
                self.record(index, step, status, error);
                return None;
            }
        };
        let (tx, label) = match built {
            Ok(b) => b,
            Err(e) => {
                self.record(index, step, StepStatus::Rejected, Some(e));
                return None;
            }
        };
        let tx_hash = tx.hash();
        match self.ledger.submit_transaction(tx) {
            Ok(receipt) => {
                *self.in_flight.entry(from).or_default() += 1;
                if let Some(l) = &label {
                    self.labels.insert(l.clone(), contract_address(&from, nonce));
                }
                let outcome = self.record(index, step, StepStatus::Rejected, None);
                self.outcomes[outcome].tx_hash = Some(tx_hash);
                Some(Pending { outcome, tx_hash, position: receipt.pool_position, label })
            }
            Err(e) => {
                self.record(index, step, StepStatus::Rejected, Some(e.to_string()));
                None
            }
        }
    }

    fn seal(&mut self, miner: Address, pending: Vec<Pending>) {
        let block = self.ledger.produce_block(miner, self.script.difficulty).expect("difficulty validated at load");
        self.in_flight.clear();
        let mut failed_labels = Vec::new();
        for p in pending {
            debug_assert_eq!(block.transactions[p.position].hash(), p.tx_hash);
            let receipt = &block.receipts[p.position];
            let o = &mut self.outcomes[p.outcome];
            o.status = if receipt.success { StepStatus::Committed } else { StepStatus::Failed };
            o.error = receipt.error.clone();
            o.contract = receipt.contract;
            o.output = receipt.output.clone();
            if !receipt.success {
                failed_labels.extend(p.label);
            }
        }
        for l in failed_labels {
            self.labels.remove(&l);
        }
    }

    fn finish(self) -> RunTranscript {
        let script = self.script;
        let mut assertions = Vec::new();
        for (step, outcome) in script.steps.iter().zip(&self.outcomes) {
            assertions.extend(self.step_assertions(step, outcome));
        }
        for e in &script.expected {
            assertions.push(self.check(e));
        }

        let by_address: BTreeMap<Address, &str> = self.labels.iter().map(|(l, a)| (*a, l.as_str())).collect();
        let contracts = self
            .ledger
            .state()
            .contracts
            .values()
            .map(|c| ContractSummary {
                label: by_address.get(&c.address).map(|l| l.to_string()),
                address: c.address,
                kind: c.kind.to_string(),
                phase: c.phase(),
                held_funds: c.held_funds,
                state: serde_json::from_str(&c.state_json()).expect("state json parses"),
            })
            .collect();
        let dump = self.ledger.chain().to_dump();
        RunTranscript {
            scenario: script.name.clone(),
            seed: hex::encode(script.seed),
            height: self.ledger.height(),
            tip_hash: self.ledger.tip().hash,
            dump_sha256: Hash32::digest(dump.as_bytes()),
            total_funds: self.ledger.state().total_funds(),
            expected_supply: self.ledger.expected_supply(),
            agents: script
                .agents
                .iter()
                .map(|a| AgentSummary {
                    alias: a.alias.clone(),
                    role: a.role,
                    address: a.address(),
                    did: DidDocument::did_for(&a.address()),
                })
                .collect(),
            steps: self.outcomes.clone(),
            events: self.ledger.events().cloned().collect(),
            final_balances: script
                .agents
                .iter()
                .map(|a| BalanceLine { alias: a.alias.clone(), address: a.address(), balance: self.ledger.get_balance(&a.address()) })
                .collect(),
            contracts,
            dids: self.dids.documents().cloned().collect(),
            passed: assertions.iter().all(|a| a.passed),
            assertions,
            dump,
        }
    }

    fn step_assertions(&self, step: &Step, outcome: &StepOutcome) -> Vec<AssertionResult> {
        let mut out = Vec::new();
        let label = format!("step {} ({} {} at tick {})", outcome.index, step.agent, step.action.name(), step.tick);
        let actual = outcome.error.clone().unwrap_or_else(|| "ok".into());
        match &step.expect_error {
            Some(kind) => out.push(AssertionResult {
                description: format!("{label} fails with {kind}"),
                passed: outcome.error_kind() == Some(kind.as_str()),
                actual,
            }),
            None if outcome.error.is_some() => {
                out.push(AssertionResult { description: format!("{label} succeeds"), passed: false, actual })
            }
            None => {}
        }
        if let Some(expected) = &step.expect_output {
            let wanted = self.to_value(expected);
            out.push(AssertionResult {
                description: format!("{label} returns {expected}"),
                passed: wanted.as_ref().ok() == outcome.output.as_ref(),
                actual: outcome.output.as_ref().map_or("none".into(), |v| v.to_string()),
            });
        }
        out
    }

    fn check(&self, e: &Expectation) -> AssertionResult {
        let (description, passed, actual) = match e {
            Expectation::Balance { alias, equals } => {
                let actual = self.address_of(alias).map(|a| self.ledger.get_balance(&a));
                (format!("balance {alias} = {equals}"), actual == Ok(*equals), show(actual))
            }
            Expectation::Phase { contract, equals } => {
                let actual = self
                    .address_of(contract)
                    .and_then(|a| self.ledger.contract_phase(&a).ok_or_else(|| "no contract".into()));
                (format!("phase {contract} = {equals}"), actual.as_ref() == Ok(equals), show(actual))
            }
            Expectation::HeldFunds { contract, equals } => {
                let actual = self
                    .address_of(contract)
                    .and_then(|a| self.ledger.held_funds(&a).ok_or_else(|| "no contract".into()));
                (format!("held_funds {contract} = {equals}"), actual == Ok(*equals), show(actual))
            }
            Expectation::EventCount { name, contract, equals } => {
                let filter = contract.as_ref().map(|c| self.address_of(c)).transpose();
                let actual = filter.map(|contract| {
                    self.ledger.query_events(&EventFilter { contract, name: Some(name.clone()) }).len() as u64
                });
                let scope = contract.as_ref().map_or(String::new(), |c| format!(" on {c}"));
                (format!("events {name}{scope} = {equals}"), actual == Ok(*equals), show(actual))
            }
            Expectation::StateField { contract, field, equals } => {
                let actual = self.address_of(contract).and_then(|a| {
                    let json = self.ledger.contract_state_json(&a).ok_or("no contract")?;
                    let state: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
                    lookup(&state, field).cloned().ok_or_else(|| format!("no field {field}"))
                });
                let wanted = self.expand_json(equals);
                (format!("state {contract}.{field} = {equals}"), actual.is_ok() && actual == wanted, show(actual))
            }
            Expectation::Height { equals } => {
                let h = self.ledger.height();
                (format!("height = {equals}"), h == *equals, h.to_string())
            }
        };
        AssertionResult { description, passed, actual }
    }

    fn expand_json(&self, v: &serde_json::Value) -> Result<serde_json::Value, String> {
        use serde_json::Value as J;
        Ok(match v {
            J::String(s) => match s.strip_prefix('@') {
                Some(rest) if rest.starts_with('@') => J::String(rest.to_string()),
                Some(name) => J::String(self.address_of(name)?.to_hex()),
                None => v.clone(),
            },
            J::Array(items) => J::Array(items.iter().map(|i| self.expand_json(i)).collect::<Result<_, _>>()?),
            J::Object(map) => J::Object(
                map.iter().map(|(k, x)| Ok((k.clone(), self.expand_json(x)?))).collect::<Result<_, String>>()?,
            ),
            other => other.clone(),
        })
    }
}

fn show<T: ToString>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => e,
    }
}

fn lookup<'a>(v: &'a serde_json::Value, path: &str) -> Option<&'a serde_json::Value> {
    path.split('.').try_fold(v, |cur, seg| match cur {
        serde_json::Value::Array(items) => items.get(seg.parse::<usize>().ok()?),
        serde_json::Value::Object(map) => map.get(seg),
        _ => None,
    })
}

fn did_error_kind(e: &DidError) -> &'static str {
    match e {
        DidError::NotFound(_) => "NotFound",
        DidError::Unauthorized => "Unauthorized",
        DidError::Deactivated(_) => "Deactivated",
        DidError::AlreadyRegistered(_) => "AlreadyRegistered",
    }
}
