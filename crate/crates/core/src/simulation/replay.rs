//! Independent re-verification of a chain dump.

use std::path::Path;

use serde::Serialize;

use crate::codec::Hash32;
use crate::contract_engine::ExecLimits;
use crate::crypto_identity::Address;
use crate::ledger::{validate_dump, ViolationKind};
use crate::par::ExecMode;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("format error at line {line}: {reason}")]
    Format { line: u64, reason: String },
    #[error("validation failure at height {height}: {reason}")]
    ValidationFailure { height: u64, reason: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// State recomputed from genesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub height: u64,
    pub state_hash: Hash32,
    pub total_funds: u128,
    pub balances: Vec<(Address, u64)>,
    pub held_funds: Vec<(Address, u64)>,
}

pub fn replay(dump: &str, mode: ExecMode) -> Result<ReplayReport, ReplayError> {
    let report = validate_dump(dump, &ExecLimits::default(), mode);
    if let Some(v) = report.violation {
        return Err(match v.kind {
            ViolationKind::Format { reason } => ReplayError::Format { line: v.height, reason },
            kind => ReplayError::ValidationFailure { height: v.height, reason: kind.to_string() },
        });
    }
    Ok(ReplayReport {
        height: report.verified_height.expect("valid chain has a verified tip"),
        state_hash: report.state_hash.expect("valid chain has a state"),
        total_funds: report.total_funds,
        balances: report.balances.into_iter().collect(),
        held_funds: report.held_funds.into_iter().collect(),
    })
}

pub fn replay_file(path: impl AsRef<Path>, mode: ExecMode) -> Result<ReplayReport, ReplayError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ReplayError::Io { path: path.display().to_string(), message: e.to_string() })?;
    replay(&text, mode)
}
