//! Chain dumps and full validation by replay.
//!
//! A dump is one compact JSON block per line, in height order, each line
//! terminated by `\n`. Parsing is strict: a line must re-serialize to exactly
//! the same bytes, so any single-byte edit is either a format error or a
//! content change caught by hashing.

use std::collections::BTreeMap;

use serde::Serialize;

use super::block::Block;
use super::{execute_transaction, genesis_state, TxInvalid, WorldState, MAX_DIFFICULTY};
use crate::codec::Hash32;
use crate::contract_engine::ExecLimits;
use crate::crypto_identity::Address;
use crate::par::{self, ExecMode};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Chain {
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct DumpError {
    /// Zero-based line index; equals the block height for well-formed dumps.
    pub line: u64,
    pub reason: String,
}

impl Chain {
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            out.push_str(&b.to_json_line());
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Chain, DumpError> {
        if text.is_empty() {
            return Err(DumpError { line: 0, reason: "empty dump".into() });
        }
        let Some(body) = text.strip_suffix('\n') else {
            let line = text.matches('\n').count() as u64;
            return Err(DumpError { line, reason: "missing trailing newline (truncated?)".into() });
        };
        let mut blocks = Vec::new();
        for (i, line) in body.split('\n').enumerate() {
            let block: Block = serde_json::from_str(line)
                .map_err(|e| DumpError { line: i as u64, reason: e.to_string() })?;
            if block.to_json_line() != line {
                return Err(DumpError { line: i as u64, reason: "non-canonical encoding".into() });
            }
            blocks.push(block);
        }
        Ok(Chain { blocks })
    }

    pub fn height(&self) -> u64 {
        self.blocks.last().map_or(0, |b| b.height)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    #[error("format error: {reason}")]
    Format { reason: String },
    #[error("chain has no blocks")]
    EmptyChain,
    #[error("height {got} at position {expected}")]
    HeightMismatch { expected: u64, got: u64 },
    #[error("parent hash does not match previous block")]
    ParentMismatch,
    #[error("stored hash does not match contents")]
    HashMismatch,
    #[error("hash does not meet difficulty {difficulty}")]
    InsufficientWork { difficulty: u8 },
    #[error("difficulty {difficulty} above bound")]
    DifficultyTooHigh { difficulty: u8 },
    #[error("malformed genesis: {reason}")]
    GenesisMalformed { reason: String },
    #[error("allocations outside genesis")]
    UnexpectedAllocations,
    #[error("transaction {tx}: bad signature")]
    BadSignature { tx: usize },
    #[error("transaction {tx}: {reason}")]
    InvalidTransaction { tx: usize, reason: String },
    #[error("receipt count {got}, expected {expected}")]
    ReceiptCount { expected: usize, got: usize },
    #[error("transaction {tx}: receipt differs from re-execution")]
    ReceiptMismatch { tx: usize },
    #[error("events differ from re-execution")]
    EventMismatch,
    #[error("state hash differs from re-execution")]
    StateMismatch,
}

/// First problem found, located by block height.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub height: u64,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violation: Option<Violation>,
    /// Height of the last block re-executed successfully.
    pub verified_height: Option<u64>,
    pub state_hash: Option<Hash32>,
    pub balances: BTreeMap<Address, u64>,
    pub held_funds: BTreeMap<Address, u64>,
    pub total_funds: u128,
}

impl ValidationReport {
    fn new(state: Option<&WorldState>, verified_height: Option<u64>, violation: Option<Violation>) -> Self {
        let (state_hash, balances, held_funds, total_funds) = match state {
            Some(s) => (
                Some(s.state_hash()),
                s.accounts.iter().map(|(a, acct)| (*a, acct.balance)).collect(),
                s.contracts.iter().map(|(a, c)| (*a, c.held_funds)).collect(),
                s.total_funds(),
            ),
            None => (None, BTreeMap::new(), BTreeMap::new(), 0),
        };
        ValidationReport { valid: violation.is_none(), violation, verified_height, state_hash, balances, held_funds, total_funds }
    }
}

fn structural_check(chain: &Chain, idx: usize) -> Option<ViolationKind> {
    let b = &chain.blocks[idx];
    if b.height != idx as u64 {
        return Some(ViolationKind::HeightMismatch { expected: idx as u64, got: b.height });
    }
    if b.compute_hash() != b.hash {
        return Some(ViolationKind::HashMismatch);
    }
    let expected_parent = if idx == 0 { Hash32::ZERO } else { chain.blocks[idx - 1].hash };
    if b.parent_hash != expected_parent {
        return Some(ViolationKind::ParentMismatch);
    }
    if b.difficulty > MAX_DIFFICULTY {
        return Some(ViolationKind::DifficultyTooHigh { difficulty: b.difficulty });
    }
    if !b.meets_difficulty() {
        return Some(ViolationKind::InsufficientWork { difficulty: b.difficulty });
    }
    if idx == 0 {
        if !b.transactions.is_empty() || !b.receipts.is_empty() || !b.events.is_empty() {
            return Some(ViolationKind::GenesisMalformed { reason: "genesis carries transactions".into() });
        }
        if b.reward != 0 {
            return Some(ViolationKind::GenesisMalformed { reason: "genesis carries a reward".into() });
        }
    } else if !b.allocations.is_empty() {
        return Some(ViolationKind::UnexpectedAllocations);
    }
    if b.receipts.len() != b.transactions.len() {
        return Some(ViolationKind::ReceiptCount { expected: b.transactions.len(), got: b.receipts.len() });
    }
    None
}

/// Checks every block's hash, work and linkage, every signature, and replays
/// all transactions from genesis against the stored receipts, events and
/// state hashes. Per-block checks and signatures run under `mode`; the replay
/// itself is sequential.
pub fn validate_chain(chain: &Chain, limits: &ExecLimits, mode: ExecMode) -> ValidationReport {
    if chain.blocks.is_empty() {
        return ValidationReport::new(None, None, Some(Violation { height: 0, kind: ViolationKind::EmptyChain }));
    }

    let indices: Vec<usize> = (0..chain.blocks.len()).collect();
    let structural = par::map(mode, &indices, |&i| structural_check(chain, i));
    let tx_refs: Vec<(usize, usize)> = chain
        .blocks
        .iter()
        .enumerate()
        .flat_map(|(bi, b)| (0..b.transactions.len()).map(move |ti| (bi, ti)))
        .collect();
    let sig_ok = par::map(mode, &tx_refs, |&(bi, ti)| chain.blocks[bi].transactions[ti].verify_signature());

    let mut first_static: Option<Violation> = structural
        .into_iter()
        .enumerate()
        .find_map(|(i, v)| v.map(|kind| Violation { height: i as u64, kind }));
    if let Some(((bi, ti), _)) = tx_refs.iter().zip(&sig_ok).find(|(_, ok)| !**ok) {
        let candidate = Violation { height: *bi as u64, kind: ViolationKind::BadSignature { tx: *ti } };
        if first_static.as_ref().is_none_or(|v| candidate.height < v.height) {
            first_static = Some(candidate);
        }
    }
    let replay_until = first_static.as_ref().map_or(chain.blocks.len(), |v| v.height as usize);

    let mut state = genesis_state(&chain.blocks[0].allocations);
    let mut verified = None;
    for block in &chain.blocks[..replay_until] {
        if let Err(kind) = replay_block(&mut state, block, limits) {
            let v = Violation { height: block.height, kind };
            return ValidationReport::new(Some(&state), verified, Some(v));
        }
        verified = Some(block.height);
    }
    ValidationReport::new(Some(&state), verified, first_static)
}

fn replay_block(state: &mut WorldState, block: &Block, limits: &ExecLimits) -> Result<(), ViolationKind> {
    let mut events = Vec::new();
    for (i, tx) in block.transactions.iter().enumerate() {
        let (receipt, evs) = execute_transaction(state, tx, block.height, limits).map_err(|e: TxInvalid| {
            ViolationKind::InvalidTransaction { tx: i, reason: e.to_string() }
        })?;
        if receipt != block.receipts[i] {
            return Err(ViolationKind::ReceiptMismatch { tx: i });
        }
        events.extend(evs);
    }
    if events != block.events {
        return Err(ViolationKind::EventMismatch);
    }
    if block.height > 0 {
        state.credit(block.miner, block.reward);
    }
    if state.state_hash() != block.state_hash {
        return Err(ViolationKind::StateMismatch);
    }
    Ok(())
}

/// Parses and validates a dump. Format errors are reported at their line.
pub fn validate_dump(text: &str, limits: &ExecLimits, mode: ExecMode) -> ValidationReport {
    match Chain::from_dump(text) {
        Ok(chain) => validate_chain(&chain, limits, mode),
        Err(e) => ValidationReport::new(
            None,
            None,
            Some(Violation { height: e.line, kind: ViolationKind::Format { reason: e.reason } }),
        ),
    }
}
