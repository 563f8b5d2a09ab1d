//! A deterministic, single-producer ledger for robot-human agreements.
//!
//! The crate bundles five layers that build on each other:
//!
//! * [`crypto_identity`]: Ed25519 keys, 20-byte addresses and a `did:rbn` registry.
//! * [`ledger`]: signed transactions, a hash-chained block store with a toy
//!   proof-of-work, nonce replay protection and a JSON-lines chain dump.
//! * [`contract_engine`]: atomic execution of native contract state machines
//!   with held funds, events, a step cap and a fungible-token kind.
//! * [`contracts`]: ride sharing with governance, maintenance escrow,
//!   unilateral rewards, arbitrated escrow, game betting (tic-tac-toe, chess)
//!   and time-lock commitments.
//! * [`oracle`] and [`simulation`]: signed attestations and a scripted
//!   multi-agent scenario runner.
//!
//! Batch work (signature checks during validation, nonce search, perft,
//! fuzz sweeps) goes through [`par`], which uses rayon when the `parallel`
//! feature is enabled and plain iterators otherwise.

pub mod codec;
pub mod contract_engine;
pub mod contracts;
pub mod crypto_identity;
pub mod ledger;
pub mod oracle;
pub mod par;
pub mod simulation;

pub use codec::{Hash32, Value};
pub use crypto_identity::{Address, KeyPair, Signature};
pub use ledger::{Block, Chain, Ledger, LedgerConfig, SignedTransaction};
