use serde::Serialize;

use crate::codec::Value;
use crate::contract_engine::{Args, CallContext, ContractError, ContractKind, ContractLogic};
use crate::crypto_identity::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EscrowPhase {
    Created,
    Funded,
    Delivered,
    Disputed,
    Released,
    ResolvedRefund,
    ResolvedPay,
}

/// Buyer/seller escrow with a third-party arbiter.
///
/// Every non-final phase carries a deadline `window` blocks after it was
/// entered; past it anyone may call `timeout`, which refunds the buyer unless
/// the seller has already delivered undisputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ArbitratedEscrowState {
    pub buyer: Address,
    pub seller: Address,
    pub agent: Address,
    pub price: u64,
    pub window: u64,
    pub deadline: Option<u64>,
    pub phase: EscrowPhase,
}

impl ArbitratedEscrowState {
    fn expect_phase(&self, allowed: &[EscrowPhase]) -> Result<(), ContractError> {
        if allowed.contains(&self.phase) {
            Ok(())
        } else {
            Err(ContractError::state(format!("not allowed in phase {:?}", self.phase)))
        }
    }

    fn require(&self, who: Address, allowed: &[Address], role: &str) -> Result<(), ContractError> {
        if allowed.contains(&who) {
            Ok(())
        } else {
            Err(ContractError::unauthorized(format!("only the {role} may do this")))
        }
    }

    fn settle(&mut self, ctx: &mut CallContext<'_>, to: Address, phase: EscrowPhase) -> Result<(), ContractError> {
        ctx.pay(to, self.price)?;
        self.phase = phase;
        self.deadline = None;
        ctx.emit("EscrowSettled", [("to", Value::Addr(to)), ("amount", Value::U64(self.price)), ("outcome", Value::from(format!("{phase:?}")))])
    }
}

impl ContractLogic for ArbitratedEscrowState {
    const KIND: ContractKind = ContractKind::ArbitratedEscrow;
    const METHODS: &'static [(&'static str, bool)] = &[
        ("fund", true),
        ("mark_delivered", false),
        ("release", false),
        ("dispute", false),
        ("arbitrate", false),
        ("timeout", false),
    ];
    const PAYABLE_CONSTRUCTOR: bool = false;

    fn construct(_ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError> {
        args.expect_len(5)?;
        let buyer = args.addr(0, "buyer")?;
        let seller = args.addr(1, "seller")?;
        let agent = args.addr(2, "agent")?;
        let price = args.u64(3, "price")?;
        let window = args.u64(4, "window")?;
        if agent == buyer || agent == seller {
            return Err(ContractError::BadArguments("agent must be a third party".into()));
        }
        if buyer == seller {
            return Err(ContractError::BadArguments("buyer and seller must differ".into()));
        }
        if price == 0 || window == 0 {
            return Err(ContractError::BadArguments("price and window must be positive".into()));
        }
        Ok(ArbitratedEscrowState { buyer, seller, agent, price, window, deadline: None, phase: EscrowPhase::Created })
    }

    fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError> {
        use EscrowPhase::*;
        match method {
            "fund" => {
                args.expect_len(0)?;
                self.require(ctx.caller, &[self.buyer], "buyer")?;
                self.expect_phase(&[Created])?;
                ctx.require_value(self.price)?;
                self.phase = Funded;
                self.deadline = Some(ctx.height + self.window);
                ctx.emit("EscrowFunded", [("amount", Value::U64(self.price))])?;
            }
            "mark_delivered" => {
                args.expect_len(0)?;
                self.require(ctx.caller, &[self.seller], "seller")?;
                self.expect_phase(&[Funded])?;
                self.phase = Delivered;
                self.deadline = Some(ctx.height + self.window);
                ctx.emit("Delivered", [("seller", Value::Addr(self.seller))])?;
            }
            "release" => {
                args.expect_len(0)?;
                self.require(ctx.caller, &[self.buyer], "buyer")?;
                self.expect_phase(&[Delivered])?;
                self.settle(ctx, self.seller, Released)?;
            }
            "dispute" => {
                args.expect_len(0)?;
                self.require(ctx.caller, &[self.buyer, self.seller], "buyer or seller")?;
                self.expect_phase(&[Funded, Delivered])?;
                if self.deadline.is_some_and(|d| ctx.height > d) {
                    return Err(ContractError::Expired);
                }
                self.phase = Disputed;
                self.deadline = Some(ctx.height + self.window);
                ctx.emit("Disputed", [("by", Value::Addr(ctx.caller))])?;
            }
            "arbitrate" => {
                args.expect_len(1)?;
                self.require(ctx.caller, &[self.agent], "agent")?;
                self.expect_phase(&[Disputed])?;
                match args.str(0, "decision")? {
                    "refund" => self.settle(ctx, self.buyer, ResolvedRefund)?,
                    "pay" => self.settle(ctx, self.seller, ResolvedPay)?,
                    other => return Err(ContractError::BadArguments(format!("decision must be refund or pay, got {other:?}"))),
                }
            }
            "timeout" => {
                args.expect_len(0)?;
                self.expect_phase(&[Funded, Delivered, Disputed])?;
                if self.deadline.is_some_and(|d| ctx.height <= d) {
                    return Err(ContractError::state("deadline not reached"));
                }
                match self.phase {
                    Delivered => self.settle(ctx, self.seller, Released)?,
                    _ => self.settle(ctx, self.buyer, ResolvedRefund)?,
                }
            }
            other => return Err(ContractError::MethodNotFound(other.to_string())),
        }
        Ok(None)
    }

    fn phase(&self) -> String {
        format!("{:?}", self.phase)
    }

    fn is_terminal(&self) -> bool {
        use EscrowPhase::*;
        matches!(self.phase, Released | ResolvedRefund | ResolvedPay)
    }
}
