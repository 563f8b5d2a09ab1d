use std::collections::BTreeMap;

use serde::Serialize;

use super::{Args, CallContext, ContractError, ContractKind, ContractLogic};
use crate::codec::Value;
use crate::crypto_identity::Address;

/// Minimal fungible token: the owner mints, holders transfer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenLedger {
    pub symbol: String,
    pub owner: Address,
    pub total_supply: u64,
    pub balances: BTreeMap<Address, u64>,
}

impl TokenLedger {
    pub fn new(symbol: &str, owner: Address) -> Self {
        TokenLedger { symbol: symbol.to_string(), owner, total_supply: 0, balances: BTreeMap::new() }
    }
}

pub fn token_mint(ledger: &mut TokenLedger, to: Address, amount: u64, caller: Address) -> Result<(), ContractError> {
    if caller != ledger.owner {
        return Err(ContractError::unauthorized("only the token owner mints"));
    }
    let supply = ledger
        .total_supply
        .checked_add(amount)
        .ok_or_else(|| ContractError::state("token supply overflow"))?;
    ledger.total_supply = supply;
    *ledger.balances.entry(to).or_default() += amount;
    Ok(())
}

pub fn token_transfer(ledger: &mut TokenLedger, from: Address, to: Address, amount: u64) -> Result<(), ContractError> {
    let balance = token_balance(ledger, &from);
    if balance < amount {
        return Err(ContractError::InsufficientTokenBalance { balance, needed: amount });
    }
    if from == to || amount == 0 {
        return Ok(());
    }
    let remaining = balance - amount;
    if remaining == 0 {
        ledger.balances.remove(&from);
    } else {
        ledger.balances.insert(from, remaining);
    }
    *ledger.balances.entry(to).or_default() += amount;
    Ok(())
}

pub fn token_balance(ledger: &TokenLedger, addr: &Address) -> u64 {
    ledger.balances.get(addr).copied().unwrap_or(0)
}

impl ContractLogic for TokenLedger {
    const KIND: ContractKind = ContractKind::Token;
    const METHODS: &'static [(&'static str, bool)] = &[("mint", false), ("transfer", false), ("balance_of", false)];
    const PAYABLE_CONSTRUCTOR: bool = false;

    /// args: symbol
    fn construct(ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError> {
        args.expect_len(1)?;
        let symbol = args.str(0, "symbol")?;
        if symbol.is_empty() {
            return Err(ContractError::ConstructorError("empty token symbol".into()));
        }
        Ok(TokenLedger::new(symbol, ctx.caller))
    }

    fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError> {
        match method {
            "mint" => {
                args.expect_len(2)?;
                let (to, amount) = (args.addr(0, "to")?, args.u64(1, "amount")?);
                token_mint(self, to, amount, ctx.caller)?;
                ctx.emit(
                    "TokenTransfer",
                    [("from", Value::Addr(Address::ZERO)), ("to", Value::Addr(to)), ("amount", Value::U64(amount))],
                )?;
                Ok(None)
            }
            "transfer" => {
                args.expect_len(2)?;
                let (to, amount) = (args.addr(0, "to")?, args.u64(1, "amount")?);
                token_transfer(self, ctx.caller, to, amount)?;
                ctx.emit(
                    "TokenTransfer",
                    [("from", Value::Addr(ctx.caller)), ("to", Value::Addr(to)), ("amount", Value::U64(amount))],
                )?;
                Ok(None)
            }
            "balance_of" => {
                args.expect_len(1)?;
                Ok(Some(Value::U64(token_balance(self, &args.addr(0, "holder")?))))
            }
            other => Err(ContractError::MethodNotFound(other.to_string())),
        }
    }

    fn phase(&self) -> String {
        "Active".into()
    }

    fn is_terminal(&self) -> bool {
        false
    }
}
