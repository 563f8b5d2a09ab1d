use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::{Encoder, Hash32};
use crate::contract_engine::ContractInstance;
use crate::crypto_identity::Address;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountState {
    pub balance: u64,
    /// Next expected transaction nonce.
    pub nonce: u64,
}

/// Committed accounts and contracts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorldState {
    pub accounts: BTreeMap<Address, AccountState>,
    pub contracts: BTreeMap<Address, ContractInstance>,
}

impl WorldState {
    pub fn balance(&self, addr: &Address) -> u64 {
        self.accounts.get(addr).map_or(0, |a| a.balance)
    }

    pub fn nonce(&self, addr: &Address) -> u64 {
        self.accounts.get(addr).map_or(0, |a| a.nonce)
    }

    pub fn is_known(&self, addr: &Address) -> bool {
        self.accounts.contains_key(addr)
    }

    pub fn credit(&mut self, addr: Address, amount: u64) {
        let acct = self.accounts.entry(addr).or_default();
        acct.balance = acct.balance.checked_add(amount).expect("balance overflow");
    }

    /// Caller guarantees the balance covers `amount`.
    pub fn debit(&mut self, addr: &Address, amount: u64) {
        let acct = self.accounts.get_mut(addr).expect("debit of unknown account");
        acct.balance = acct.balance.checked_sub(amount).expect("balance underflow");
    }

    /// Account balances plus every contract's held funds.
    pub fn total_funds(&self) -> u128 {
        let accounts: u128 = self.accounts.values().map(|a| a.balance as u128).sum();
        let held: u128 = self.contracts.values().map(|c| c.held_funds as u128).sum();
        accounts + held
    }

    pub fn encode_into(&self, e: &mut Encoder) {
        e.u32(self.accounts.len() as u32);
        for (addr, acct) in &self.accounts {
            e.raw(addr.as_bytes()).u64(acct.balance).u64(acct.nonce);
        }
        e.u32(self.contracts.len() as u32);
        for (addr, c) in &self.contracts {
            e.raw(addr.as_bytes())
                .str(c.kind.as_str())
                .u64(c.created_at)
                .u64(c.held_funds)
                .str(&c.state_json());
        }
    }

    pub fn state_hash(&self) -> Hash32 {
        let mut e = Encoder::with_domain("rbn-state-v1");
        self.encode_into(&mut e);
        Hash32::digest(e.as_slice())
    }
}
