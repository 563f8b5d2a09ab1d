//! Deterministic execution of native contract state machines.
//!
//! A call runs against a cloned copy of the contract state and a scratch
//! [`CallContext`] holding the contract's working balance, pending payouts
//! and emitted events. Nothing touches the world state until the transition
//! function returns `Ok`, so every call is all-or-nothing. Each call is
//! metered in abstract steps and aborted past [`ExecLimits::step_limit`].

mod token;

pub use token::{token_balance, token_mint, token_transfer, TokenLedger};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codec::{Encoder, Hash32, Value};
use crate::contracts::{
    ArbitratedEscrowState, GameBettingState, MaintenanceEscrowState, RideSharingState, TimeLockCommitmentState,
    UnilateralRewardState,
};
use crate::crypto_identity::Address;
use crate::ledger::{ChainEvent, WorldState};

pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecLimits {
    pub step_limit: u64,
    /// Test hook: fail the call once the step counter reaches this value.
    pub fault_at_step: Option<u64>,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits { step_limit: DEFAULT_STEP_LIMIT, fault_at_step: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error("no contract at {0}")]
    NoSuchContract(Address),
    #[error("unknown contract kind {0:?}")]
    UnknownKind(String),
    #[error("method {0:?} not found")]
    MethodNotFound(String),
    #[error("{0} does not accept funds")]
    NotPayable(String),
    #[error("expected amount {expected}, got {got}")]
    WrongAmount { expected: u64, got: u64 },
    #[error("{0}")]
    BadArguments(String),
    #[error("{0}")]
    ConstructorError(String),
    #[error("{0}")]
    StateError(String),
    #[error("{0}")]
    Unauthorized(String),
    #[error("exceeded {0} steps")]
    StepLimitExceeded(u64),
    #[error("fault injected at step {0}")]
    InjectedFault(u64),
    #[error("{0}")]
    BadAttestation(String),
    #[error("{0}")]
    IllegalMove(String),
    #[error("caller is not the player on turn")]
    NotYourTurn,
    #[error("stake is {expected}, got {got}")]
    WrongStake { expected: u64, got: u64 },
    #[error("owner already voted")]
    DoubleVote,
    #[error("deadline has passed")]
    Expired,
    #[error("token balance {balance}, needed {needed}")]
    InsufficientTokenBalance { balance: u64, needed: u64 },
    #[error("payout {needed} exceeds held funds {held}")]
    InsufficientHeldFunds { held: u64, needed: u64 },
}

impl ContractError {
    pub fn kind(&self) -> &'static str {
        use ContractError::*;
        match self {
            NoSuchContract(_) => "NoSuchContract",
            UnknownKind(_) => "UnknownKind",
            MethodNotFound(_) => "MethodNotFound",
            NotPayable(_) => "NotPayable",
            WrongAmount { .. } => "WrongAmount",
            BadArguments(_) => "BadArguments",
            ConstructorError(_) => "ConstructorError",
            StateError(_) => "StateError",
            Unauthorized(_) => "Unauthorized",
            StepLimitExceeded(_) => "StepLimitExceeded",
            InjectedFault(_) => "InjectedFault",
            BadAttestation(_) => "BadAttestation",
            IllegalMove(_) => "IllegalMove",
            NotYourTurn => "NotYourTurn",
            WrongStake { .. } => "WrongStake",
            DoubleVote => "DoubleVote",
            Expired => "Expired",
            InsufficientTokenBalance { .. } => "InsufficientTokenBalance",
            InsufficientHeldFunds { .. } => "InsufficientHeldFunds",
        }
    }

    pub fn state(msg: impl Into<String>) -> Self {
        ContractError::StateError(msg.into())
    }

    pub fn unauthorized(msg: impl Into<String>) -> Self {
        ContractError::Unauthorized(msg.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractKind {
    RideSharing,
    MaintenanceEscrow,
    UnilateralReward,
    ArbitratedEscrow,
    GameBetting,
    TimeLockCommitment,
    Token,
}

impl ContractKind {
    pub const ALL: [ContractKind; 7] = [
        ContractKind::RideSharing,
        ContractKind::MaintenanceEscrow,
        ContractKind::UnilateralReward,
        ContractKind::ArbitratedEscrow,
        ContractKind::GameBetting,
        ContractKind::TimeLockCommitment,
        ContractKind::Token,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ContractKind::RideSharing => "ride_sharing",
            ContractKind::MaintenanceEscrow => "maintenance_escrow",
            ContractKind::UnilateralReward => "unilateral_reward",
            ContractKind::ArbitratedEscrow => "arbitrated_escrow",
            ContractKind::GameBetting => "game_betting",
            ContractKind::TimeLockCommitment => "time_lock_commitment",
            ContractKind::Token => "token",
        }
    }

    /// `(method, payable)` table.
    pub fn methods(self) -> &'static [(&'static str, bool)] {
        match self {
            ContractKind::RideSharing => RideSharingState::METHODS,
            ContractKind::MaintenanceEscrow => MaintenanceEscrowState::METHODS,
            ContractKind::UnilateralReward => UnilateralRewardState::METHODS,
            ContractKind::ArbitratedEscrow => ArbitratedEscrowState::METHODS,
            ContractKind::GameBetting => GameBettingState::METHODS,
            ContractKind::TimeLockCommitment => TimeLockCommitmentState::METHODS,
            ContractKind::Token => TokenLedger::METHODS,
        }
    }

    pub fn method_payable(self, method: &str) -> Option<bool> {
        self.methods().iter().find(|(m, _)| *m == method).map(|(_, p)| *p)
    }

    pub fn constructor_payable(self) -> bool {
        match self {
            ContractKind::RideSharing => RideSharingState::PAYABLE_CONSTRUCTOR,
            ContractKind::MaintenanceEscrow => MaintenanceEscrowState::PAYABLE_CONSTRUCTOR,
            ContractKind::UnilateralReward => UnilateralRewardState::PAYABLE_CONSTRUCTOR,
            ContractKind::ArbitratedEscrow => ArbitratedEscrowState::PAYABLE_CONSTRUCTOR,
            ContractKind::GameBetting => GameBettingState::PAYABLE_CONSTRUCTOR,
            ContractKind::TimeLockCommitment => TimeLockCommitmentState::PAYABLE_CONSTRUCTOR,
            ContractKind::Token => TokenLedger::PAYABLE_CONSTRUCTOR,
        }
    }
}

impl fmt::Display for ContractKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContractKind {
    type Err = ContractError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ContractKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ContractError::UnknownKind(s.to_string()))
    }
}

/// Positional argument accessor.
#[derive(Debug, Clone, Copy)]
pub struct Args<'a>(pub &'a [Value]);

impl<'a> Args<'a> {
    fn get(&self, i: usize, name: &str) -> Result<&'a Value, ContractError> {
        self.0
            .get(i)
            .ok_or_else(|| ContractError::BadArguments(format!("missing argument {i} ({name})")))
    }

    fn typed<T>(&self, i: usize, name: &str, ty: &str, f: impl Fn(&'a Value) -> Option<T>) -> Result<T, ContractError> {
        f(self.get(i, name)?).ok_or_else(|| ContractError::BadArguments(format!("argument {i} ({name}) must be {ty}")))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn expect_len(&self, n: usize) -> Result<(), ContractError> {
        if self.0.len() == n {
            Ok(())
        } else {
            Err(ContractError::BadArguments(format!("expected {n} arguments, got {}", self.0.len())))
        }
    }

    pub fn u64(&self, i: usize, name: &str) -> Result<u64, ContractError> {
        self.typed(i, name, "u64", Value::as_u64)
    }

    pub fn bool(&self, i: usize, name: &str) -> Result<bool, ContractError> {
        self.typed(i, name, "bool", Value::as_bool)
    }

    pub fn str(&self, i: usize, name: &str) -> Result<&'a str, ContractError> {
        self.typed(i, name, "text", Value::as_str)
    }

    pub fn addr(&self, i: usize, name: &str) -> Result<Address, ContractError> {
        self.typed(i, name, "an address", Value::as_addr)
    }

    pub fn bytes(&self, i: usize, name: &str) -> Result<&'a [u8], ContractError> {
        self.typed(i, name, "bytes", Value::as_bytes)
    }

    pub fn list(&self, i: usize, name: &str) -> Result<&'a [Value], ContractError> {
        self.typed(i, name, "a list", Value::as_list)
    }

    pub fn value(&self, i: usize, name: &str) -> Result<&'a Value, ContractError> {
        self.get(i, name)
    }
}

/// Scratch space for one contract call.
#[derive(Debug)]
pub struct CallContext<'a> {
    pub caller: Address,
    /// Native coin attached to the call, already counted in `held_funds`.
    pub value: u64,
    pub height: u64,
    pub contract: Address,
    held_funds: u64,
    payouts: Vec<(Address, u64)>,
    events: Vec<(String, BTreeMap<String, Value>)>,
    steps: u64,
    limits: &'a ExecLimits,
}

impl<'a> CallContext<'a> {
    pub fn new(caller: Address, value: u64, height: u64, contract: Address, held_funds: u64, limits: &'a ExecLimits) -> Self {
        CallContext { caller, value, height, contract, held_funds, payouts: Vec::new(), events: Vec::new(), steps: 0, limits }
    }

    pub fn charge(&mut self, steps: u64) -> Result<(), ContractError> {
        self.steps = self.steps.saturating_add(steps);
        if let Some(at) = self.limits.fault_at_step {
            if self.steps >= at {
                return Err(ContractError::InjectedFault(at));
            }
        }
        if self.steps > self.limits.step_limit {
            return Err(ContractError::StepLimitExceeded(self.limits.step_limit));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn held_funds(&self) -> u64 {
        self.held_funds
    }

    /// Moves native coin out of the contract.
    pub fn pay(&mut self, to: Address, amount: u64) -> Result<(), ContractError> {
        self.charge(1)?;
        if amount > self.held_funds {
            return Err(ContractError::InsufficientHeldFunds { held: self.held_funds, needed: amount });
        }
        self.held_funds -= amount;
        if amount > 0 {
            self.payouts.push((to, amount));
        }
        Ok(())
    }

    pub fn emit<I, K>(&mut self, name: &str, fields: I) -> Result<(), ContractError>
    where
        I: IntoIterator<Item = (K, Value)>,
        K: Into<String>,
    {
        self.charge(1)?;
        self.events.push((name.to_string(), fields.into_iter().map(|(k, v)| (k.into(), v)).collect()));
        Ok(())
    }

    pub fn require_value(&self, expected: u64) -> Result<(), ContractError> {
        if self.value == expected {
            Ok(())
        } else {
            Err(ContractError::WrongAmount { expected, got: self.value })
        }
    }

    pub fn payouts(&self) -> &[(Address, u64)] {
        &self.payouts
    }
}

/// A contract kind's state machine.
pub trait ContractLogic: Sized + Clone {
    const KIND: ContractKind;
    const METHODS: &'static [(&'static str, bool)];
    const PAYABLE_CONSTRUCTOR: bool;

    fn construct(ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError>;

    fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError>;

    /// Short lifecycle label, e.g. `Funded`.
    fn phase(&self) -> String;

    /// Whether no further transition can move funds.
    fn is_terminal(&self) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ContractState {
    RideSharing(RideSharingState),
    MaintenanceEscrow(MaintenanceEscrowState),
    UnilateralReward(UnilateralRewardState),
    ArbitratedEscrow(ArbitratedEscrowState),
    GameBetting(GameBettingState),
    TimeLockCommitment(TimeLockCommitmentState),
    Token(TokenLedger),
}

macro_rules! dispatch {
    ($self:expr, $s:ident => $body:expr) => {
        match $self {
            ContractState::RideSharing($s) => $body,
            ContractState::MaintenanceEscrow($s) => $body,
            ContractState::UnilateralReward($s) => $body,
            ContractState::ArbitratedEscrow($s) => $body,
            ContractState::GameBetting($s) => $body,
            ContractState::TimeLockCommitment($s) => $body,
            ContractState::Token($s) => $body,
        }
    };
}

impl ContractState {
    pub fn construct(kind: ContractKind, ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError> {
        Ok(match kind {
            ContractKind::RideSharing => ContractState::RideSharing(RideSharingState::construct(ctx, args)?),
            ContractKind::MaintenanceEscrow => {
                ContractState::MaintenanceEscrow(MaintenanceEscrowState::construct(ctx, args)?)
            }
            ContractKind::UnilateralReward => ContractState::UnilateralReward(UnilateralRewardState::construct(ctx, args)?),
            ContractKind::ArbitratedEscrow => ContractState::ArbitratedEscrow(ArbitratedEscrowState::construct(ctx, args)?),
            ContractKind::GameBetting => ContractState::GameBetting(GameBettingState::construct(ctx, args)?),
            ContractKind::TimeLockCommitment => {
                ContractState::TimeLockCommitment(TimeLockCommitmentState::construct(ctx, args)?)
            }
            ContractKind::Token => ContractState::Token(TokenLedger::construct(ctx, args)?),
        })
    }

    pub fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError> {
        dispatch!(self, s => s.call(ctx, method, args))
    }

    pub fn phase(&self) -> String {
        dispatch!(self, s => s.phase())
    }

    pub fn is_terminal(&self) -> bool {
        dispatch!(self, s => s.is_terminal())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractInstance {
    pub address: Address,
    pub kind: ContractKind,
    pub created_at: u64,
    pub held_funds: u64,
    pub state: ContractState,
}

impl ContractInstance {
    /// Canonical JSON of the kind-specific state.
    pub fn state_json(&self) -> String {
        serde_json::to_string(&self.state).expect("state serializes")
    }

    pub fn phase(&self) -> String {
        self.state.phase()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "address": self.address,
            "kind": self.kind,
            "created_at": self.created_at,
            "held_funds": self.held_funds,
            "phase": self.phase(),
            "state": self.state,
        })
    }
}

/// `last20(SHA-256("rbn-contract-v1" || deployer || nonce))`.
pub fn contract_address(deployer: &Address, nonce: u64) -> Address {
    let mut e = Encoder::with_domain("rbn-contract-v1");
    e.raw(deployer.as_bytes()).u64(nonce);
    Address::from_hash(&Hash32::digest(e.as_slice()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallOutcome {
    pub contract: Address,
    pub output: Option<Value>,
    pub events: Vec<ChainEvent>,
}

fn commit(
    state: &mut WorldState,
    caller: Address,
    value: u64,
    ctx: CallContext<'_>,
    height: u64,
    contract: Address,
) -> (u64, Vec<ChainEvent>) {
    if value > 0 {
        state.debit(&caller, value);
    }
    for (to, amount) in &ctx.payouts {
        state.credit(*to, *amount);
    }
    let events = ctx
        .events
        .into_iter()
        .map(|(name, fields)| ChainEvent { block_height: height, contract, name, fields })
        .collect();
    (ctx.held_funds, events)
}

/// Instantiates `kind` at a fresh address derived from the deployer and nonce.
/// Attached value funds the contract when its constructor is payable.
#[allow(clippy::too_many_arguments)]
pub fn deploy_contract(
    state: &mut WorldState,
    deployer: Address,
    nonce: u64,
    value: u64,
    kind: &str,
    args: &[Value],
    height: u64,
    limits: &ExecLimits,
) -> Result<CallOutcome, ContractError> {
    let kind: ContractKind = kind.parse()?;
    if value > 0 && !kind.constructor_payable() {
        return Err(ContractError::NotPayable(format!("{kind} constructor")));
    }
    let address = contract_address(&deployer, nonce);
    if state.contracts.contains_key(&address) {
        return Err(ContractError::state("address already hosts a contract"));
    }
    let mut ctx = CallContext::new(deployer, value, height, address, value, limits);
    ctx.charge(1)?;
    ctx.emit("Deployed", [("kind", Value::from(kind.as_str())), ("deployer", Value::Addr(deployer))])?;
    let contract_state = ContractState::construct(kind, &mut ctx, Args(args)).map_err(|e| match e {
        ContractError::BadArguments(m) => ContractError::ConstructorError(m),
        other => other,
    })?;
    let (held_funds, events) = commit(state, deployer, value, ctx, height, address);
    state.contracts.insert(
        address,
        ContractInstance { address, kind, created_at: height, held_funds, state: contract_state },
    );
    Ok(CallOutcome { contract: address, output: None, events })
}

/// Runs `method` on the contract at `to`; commits all effects or none.
#[allow(clippy::too_many_arguments)]
pub fn call_contract(
    state: &mut WorldState,
    caller: Address,
    to: Address,
    value: u64,
    method: &str,
    args: &[Value],
    height: u64,
    limits: &ExecLimits,
) -> Result<CallOutcome, ContractError> {
    let instance = state.contracts.get(&to).ok_or(ContractError::NoSuchContract(to))?;
    let payable = instance
        .kind
        .method_payable(method)
        .ok_or_else(|| ContractError::MethodNotFound(method.to_string()))?;
    if value > 0 && !payable {
        return Err(ContractError::NotPayable(method.to_string()));
    }
    let mut ctx = CallContext::new(caller, value, height, to, instance.held_funds + value, limits);
    ctx.charge(1)?;
    let mut next = instance.state.clone();
    let output = next.call(&mut ctx, method, Args(args))?;
    let (held_funds, events) = commit(state, caller, value, ctx, height, to);
    let instance = state.contracts.get_mut(&to).expect("contract present");
    instance.state = next;
    instance.held_funds = held_funds;
    Ok(CallOutcome { contract: to, output, events })
}
