//! Hash-chained ledger with native coin balances, nonce replay protection,
//! a toy proof-of-work and a committed event log.
//!
//! One producer owns the ledger. `submit_transaction` takes `&self` and can be
//! called from many threads; it appends to a mutex-guarded FIFO pool.
//! `produce_block` drains the pool in submission order, executes every
//! transaction, mints the block reward and seals the block.

mod block;
mod chain;
mod state;
mod tx;

pub use block::{Allocation, Block, ChainEvent, Receipt, MAX_DIFFICULTY};
pub use chain::{validate_chain, validate_dump, Chain, DumpError, ValidationReport, Violation, ViolationKind};
pub use state::{AccountState, WorldState};
pub use tx::{Payload, SignedTransaction};

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;

use crate::codec::Hash32;
use crate::contract_engine::{self, ExecLimits};
use crate::crypto_identity::Address;
use crate::par::ExecMode;

pub const DEFAULT_GENESIS_SUPPLY: u64 = 1_000_000_000;
pub const DEFAULT_BLOCK_REWARD: u64 = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerConfig {
    pub reward: u64,
    pub genesis: Vec<Allocation>,
    pub limits: ExecLimits,
    pub mode: ExecMode,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig {
            reward: DEFAULT_BLOCK_REWARD,
            genesis: Vec::new(),
            limits: ExecLimits::default(),
            mode: ExecMode::default(),
        }
    }
}

impl LedgerConfig {
    /// Default supply held by a single treasury account.
    pub fn with_treasury(treasury: Address) -> Self {
        LedgerConfig {
            genesis: vec![Allocation { address: treasury, balance: DEFAULT_GENESIS_SUPPLY }],
            ..Self::default()
        }
    }

    pub fn allocate(mut self, address: Address, balance: u64) -> Self {
        self.genesis.push(Allocation { address, balance });
        self
    }

    pub fn genesis_supply(&self) -> u128 {
        self.genesis.iter().map(|a| a.balance as u128).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubmitError {
    #[error("BadSignature: signature does not verify for the sender")]
    BadSignature,
    #[error("BadNonce: expected {expected}, got {got}")]
    BadNonce { expected: u64, got: u64 },
    #[error("InsufficientFunds: balance {balance}, needed {needed}")]
    InsufficientFunds { balance: u64, needed: u64 },
    #[error("UnknownSender: {0} has no account")]
    UnknownSender(Address),
}

impl SubmitError {
    pub fn kind(&self) -> &'static str {
        match self {
            SubmitError::BadSignature => "BadSignature",
            SubmitError::BadNonce { .. } => "BadNonce",
            SubmitError::InsufficientFunds { .. } => "InsufficientFunds",
            SubmitError::UnknownSender(_) => "UnknownSender",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockError {
    #[error("difficulty {0} exceeds the {MAX_DIFFICULTY}-bit bound")]
    DifficultyTooHigh(u8),
}

/// Acknowledgement of a pooled transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmitReceipt {
    pub tx_hash: Hash32,
    pub pool_position: usize,
}

/// A transaction that cannot be included at all (as opposed to a failed call).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TxInvalid {
    #[error("unknown sender")]
    UnknownSender,
    #[error("nonce expected {expected}, got {got}")]
    BadNonce { expected: u64, got: u64 },
    #[error("balance {balance} below amount {needed}")]
    InsufficientFunds { balance: u64, needed: u64 },
}

/// Executes one transaction against `state`. Invalid transactions leave the
/// state untouched; included ones always consume the nonce, and a failed
/// transfer or call has no other effect.
pub fn execute_transaction(
    state: &mut WorldState,
    tx: &SignedTransaction,
    height: u64,
    limits: &ExecLimits,
) -> Result<(Receipt, Vec<ChainEvent>), TxInvalid> {
    let acct = state.accounts.get(&tx.from).ok_or(TxInvalid::UnknownSender)?;
    if acct.nonce != tx.nonce {
        return Err(TxInvalid::BadNonce { expected: acct.nonce, got: tx.nonce });
    }
    if acct.balance < tx.amount {
        return Err(TxInvalid::InsufficientFunds { balance: acct.balance, needed: tx.amount });
    }
    state.accounts.get_mut(&tx.from).unwrap().nonce += 1;

    let result = match &tx.payload {
        None => {
            if state.contracts.contains_key(&tx.to) {
                Err(contract_engine::ContractError::NotPayable("plain transfer to a contract".into()))
            } else {
                state.debit(&tx.from, tx.amount);
                state.credit(tx.to, tx.amount);
                Ok((Receipt::ok(None, None), Vec::new()))
            }
        }
        Some(Payload::Deploy { kind, args }) => {
            contract_engine::deploy_contract(state, tx.from, tx.nonce, tx.amount, kind, args, height, limits)
                .map(|o| (Receipt::ok(Some(o.contract), o.output), o.events))
        }
        Some(Payload::Call { method, args }) => {
            contract_engine::call_contract(state, tx.from, tx.to, tx.amount, method, args, height, limits)
                .map(|o| (Receipt::ok(Some(o.contract), o.output), o.events))
        }
    };
    Ok(result.unwrap_or_else(|e| (Receipt::failed(format!("{}: {}", e.kind(), e)), Vec::new())))
}

/// Fresh state from genesis allocations.
pub fn genesis_state(allocations: &[Allocation]) -> WorldState {
    let mut state = WorldState::default();
    for a in allocations {
        state.credit(a.address, a.balance);
    }
    state
}

#[derive(Debug, Default)]
struct Pool {
    queue: VecDeque<SignedTransaction>,
    /// Pending (count, outgoing amount) per sender.
    per_sender: HashMap<Address, (u64, u64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub contract: Option<Address>,
    pub name: Option<String>,
}

impl EventFilter {
    pub fn matches(&self, ev: &ChainEvent) -> bool {
        self.contract.is_none_or(|c| c == ev.contract) && self.name.as_deref().is_none_or(|n| n == ev.name)
    }
}

pub fn filter_events<'a>(events: impl IntoIterator<Item = &'a ChainEvent>, filter: &EventFilter) -> Vec<ChainEvent> {
    events.into_iter().filter(|e| filter.matches(e)).cloned().collect()
}

#[derive(Debug)]
pub struct Ledger {
    config: LedgerConfig,
    blocks: Vec<Block>,
    state: WorldState,
    pool: Mutex<Pool>,
}

impl Ledger {
    pub fn new(config: LedgerConfig) -> Self {
        let state = genesis_state(&config.genesis);
        let mut genesis = Block {
            height: 0,
            parent_hash: Hash32::ZERO,
            difficulty: 0,
            miner: Address::ZERO,
            reward: 0,
            allocations: config.genesis.clone(),
            transactions: Vec::new(),
            receipts: Vec::new(),
            events: Vec::new(),
            state_hash: state.state_hash(),
            nonce: 0,
            hash: Hash32::ZERO,
        };
        genesis.seal(config.mode);
        Ledger { config, blocks: vec![genesis], state, pool: Mutex::new(Pool::default()) }
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    /// Validates and pools a transaction. Nonce and balance checks account for
    /// the sender's transactions already waiting in the pool.
    pub fn submit_transaction(&self, tx: SignedTransaction) -> Result<SubmitReceipt, SubmitError> {
        if !tx.verify_signature() {
            return Err(SubmitError::BadSignature);
        }
        let acct = *self.state.accounts.get(&tx.from).ok_or(SubmitError::UnknownSender(tx.from))?;
        let mut pool = self.pool.lock().expect("pool lock poisoned");
        let (pending, outgoing) = pool.per_sender.get(&tx.from).copied().unwrap_or((0, 0));
        let expected = acct.nonce + pending;
        if tx.nonce != expected {
            return Err(SubmitError::BadNonce { expected, got: tx.nonce });
        }
        let needed = outgoing.saturating_add(tx.amount);
        if acct.balance < needed {
            return Err(SubmitError::InsufficientFunds { balance: acct.balance, needed });
        }
        let receipt = SubmitReceipt { tx_hash: tx.hash(), pool_position: pool.queue.len() };
        pool.per_sender.insert(tx.from, (pending + 1, needed));
        pool.queue.push_back(tx);
        Ok(receipt)
    }

    pub fn pending_len(&self) -> usize {
        self.pool.lock().expect("pool lock poisoned").queue.len()
    }

    pub fn produce_block(&mut self, miner: Address, difficulty: u8) -> Result<&Block, BlockError> {
        if difficulty > MAX_DIFFICULTY {
            return Err(BlockError::DifficultyTooHigh(difficulty));
        }
        let pending = {
            let mut pool = self.pool.lock().expect("pool lock poisoned");
            pool.per_sender.clear();
            std::mem::take(&mut pool.queue)
        };
        let height = self.height() + 1;
        let mut transactions = Vec::with_capacity(pending.len());
        let mut receipts = Vec::with_capacity(pending.len());
        let mut events = Vec::new();
        for tx in pending {
            // pool admission makes this unreachable; such a transaction is dropped
            let Ok((receipt, evs)) = execute_transaction(&mut self.state, &tx, height, &self.config.limits) else {
                continue;
            };
            transactions.push(tx);
            receipts.push(receipt);
            events.extend(evs);
        }
        self.state.credit(miner, self.config.reward);
        let mut block = Block {
            height,
            parent_hash: self.tip().hash,
            difficulty,
            miner,
            reward: self.config.reward,
            allocations: Vec::new(),
            transactions,
            receipts,
            events,
            state_hash: self.state.state_hash(),
            nonce: 0,
            hash: Hash32::ZERO,
        };
        block.seal(self.config.mode);
        self.blocks.push(block);
        Ok(self.blocks.last().unwrap())
    }

    pub fn height(&self) -> u64 {
        self.tip().height
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("genesis always present")
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn chain(&self) -> Chain {
        Chain { blocks: self.blocks.clone() }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn get_balance(&self, addr: &Address) -> u64 {
        self.state.balance(addr)
    }

    pub fn get_nonce(&self, addr: &Address) -> u64 {
        self.state.nonce(addr)
    }

    /// Expected supply at the current height.
    pub fn expected_supply(&self) -> u128 {
        self.config.genesis_supply() + self.config.reward as u128 * self.height() as u128
    }

    pub fn events(&self) -> impl Iterator<Item = &ChainEvent> {
        self.blocks.iter().flat_map(|b| b.events.iter())
    }

    pub fn query_events(&self, filter: &EventFilter) -> Vec<ChainEvent> {
        filter_events(self.events(), filter)
    }

    /// Canonical JSON of a contract's state.
    pub fn contract_state_json(&self, addr: &Address) -> Option<String> {
        self.state.contracts.get(addr).map(|c| c.state_json())
    }

    pub fn contract_phase(&self, addr: &Address) -> Option<String> {
        self.state.contracts.get(addr).map(|c| c.phase())
    }

    /// Receipt for a committed transaction hash.
    pub fn receipt_for(&self, tx_hash: &Hash32) -> Option<(u64, &Receipt)> {
        self.blocks.iter().find_map(|b| {
            b.transactions
                .iter()
                .position(|t| &t.hash() == tx_hash)
                .map(|i| (b.height, &b.receipts[i]))
        })
    }

    pub fn held_funds(&self, addr: &Address) -> Option<u64> {
        self.state.contracts.get(addr).map(|c| c.held_funds)
    }
}
