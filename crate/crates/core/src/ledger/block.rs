use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::tx::SignedTransaction;
use crate::codec::{Encoder, Hash32, Value};
use crate::crypto_identity::Address;
use crate::par::{self, ExecMode};

/// Difficulty ceiling in leading zero bits.
pub const MAX_DIFFICULTY: u8 = 20;

/// A genesis balance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Allocation {
    pub address: Address,
    pub balance: u64,
}

/// Outcome of an included transaction. Failed calls consume the nonce and
/// nothing else.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Receipt {
    pub success: bool,
    pub error: Option<String>,
    pub contract: Option<Address>,
    pub output: Option<Value>,
}

impl Receipt {
    pub fn ok(contract: Option<Address>, output: Option<Value>) -> Self {
        Receipt { success: true, error: None, contract, output }
    }

    pub fn failed(error: String) -> Self {
        Receipt { success: false, error: Some(error), contract: None, output: None }
    }

    /// Leading error kind, e.g. `Unauthorized`.
    pub fn error_kind(&self) -> Option<&str> {
        self.error.as_deref().map(|e| e.split(':').next().unwrap_or(e))
    }

    fn encode_into(&self, e: &mut Encoder) {
        e.bool(self.success);
        match &self.error {
            Some(s) => e.u8(1).str(s),
            None => e.u8(0),
        };
        e.opt_address(self.contract.as_ref());
        match &self.output {
            Some(v) => e.u8(1).value(v),
            None => e.u8(0),
        };
    }
}

/// An event emitted by a contract during block execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainEvent {
    pub block_height: u64,
    pub contract: Address,
    pub name: String,
    pub fields: BTreeMap<String, Value>,
}

impl ChainEvent {
    pub fn field(&self, key: &str) -> Option<&Value> {
        self.fields.get(key)
    }

    fn encode_into(&self, e: &mut Encoder) {
        e.u64(self.block_height).raw(self.contract.as_bytes()).str(&self.name);
        e.u32(self.fields.len() as u32);
        for (k, v) in &self.fields {
            e.str(k).value(v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub height: u64,
    pub parent_hash: Hash32,
    pub difficulty: u8,
    pub miner: Address,
    pub reward: u64,
    /// Non-empty only in the genesis block.
    pub allocations: Vec<Allocation>,
    pub transactions: Vec<SignedTransaction>,
    pub receipts: Vec<Receipt>,
    pub events: Vec<ChainEvent>,
    /// Hash of the world state after this block.
    pub state_hash: Hash32,
    pub nonce: u64,
    pub hash: Hash32,
}

impl Block {
    /// Canonical encoding of everything except `nonce` and `hash`.
    pub fn header_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::with_domain("rbn-block-v1");
        e.u64(self.height)
            .raw(self.parent_hash.as_bytes())
            .u8(self.difficulty)
            .raw(self.miner.as_bytes())
            .u64(self.reward);
        e.u32(self.allocations.len() as u32);
        for a in &self.allocations {
            e.raw(a.address.as_bytes()).u64(a.balance);
        }
        e.u32(self.transactions.len() as u32);
        for tx in &self.transactions {
            tx.encode_into(&mut e);
        }
        e.u32(self.receipts.len() as u32);
        for r in &self.receipts {
            r.encode_into(&mut e);
        }
        e.u32(self.events.len() as u32);
        for ev in &self.events {
            ev.encode_into(&mut e);
        }
        e.raw(self.state_hash.as_bytes());
        e.finish()
    }

    pub fn compute_hash(&self) -> Hash32 {
        hash_with_nonce(&prefix_hasher(&self.header_bytes()), self.nonce)
    }

    pub fn meets_difficulty(&self) -> bool {
        self.hash.leading_zero_bits() >= self.difficulty as u32
    }

    /// Finds the smallest nonce meeting `self.difficulty` and seals the block.
    /// The result does not depend on `mode`.
    pub fn seal(&mut self, mode: ExecMode) {
        let prefix = prefix_hasher(&self.header_bytes());
        let need = self.difficulty as u32;
        let nonce = search_nonce(&prefix, need, mode);
        self.nonce = nonce;
        self.hash = hash_with_nonce(&prefix, nonce);
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("block serializes")
    }
}

fn prefix_hasher(header: &[u8]) -> Sha256 {
    let mut h = Sha256::new();
    h.update(header);
    h
}

fn hash_with_nonce(prefix: &Sha256, nonce: u64) -> Hash32 {
    let mut h = prefix.clone();
    h.update(nonce.to_be_bytes());
    Hash32(h.finalize().into())
}

const SEARCH_CHUNK: u64 = 1 << 14;

fn search_nonce(prefix: &Sha256, need: u32, mode: ExecMode) -> u64 {
    let mut start = 0u64;
    loop {
        let end = start.saturating_add(SEARCH_CHUNK);
        if let Some(n) = par::find_first_in(mode, start, end, |n| hash_with_nonce(prefix, n).leading_zero_bits() >= need) {
            return n;
        }
        start = end;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_block(difficulty: u8) -> Block {
        Block {
            height: 1,
            parent_hash: Hash32::digest(b"parent"),
            difficulty,
            miner: Address([9u8; 20]),
            reward: 50,
            allocations: vec![],
            transactions: vec![],
            receipts: vec![],
            events: vec![],
            state_hash: Hash32::digest(b"state"),
            nonce: 0,
            hash: Hash32::ZERO,
        }
    }

    #[test]
    fn difficulty_zero_takes_first_nonce() {
        let mut b = empty_block(0);
        b.seal(ExecMode::Sequential);
        assert_eq!(b.nonce, 0);
        assert_eq!(b.hash, b.compute_hash());
    }

    #[test]
    fn difficulty_eight_gives_zero_first_byte() {
        let mut b = empty_block(8);
        b.seal(ExecMode::Parallel);
        assert_eq!(b.hash.0[0], 0);
        assert!(b.meets_difficulty());
        // brute force: no smaller nonce qualifies
        let prefix = prefix_hasher(&b.header_bytes());
        assert!((0..b.nonce).all(|n| hash_with_nonce(&prefix, n).0[0] != 0));
    }

    #[test]
    fn sealing_is_mode_independent() {
        let mut a = empty_block(10);
        let mut b = a.clone();
        a.seal(ExecMode::Sequential);
        b.seal(ExecMode::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn error_kind_prefix() {
        let r = Receipt::failed("Unauthorized: caller is not an owner".into());
        assert_eq!(r.error_kind(), Some("Unauthorized"));
    }
}
