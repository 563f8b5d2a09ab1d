use serde::Serialize;

use crate::codec::Value;
use crate::contract_engine::{Args, CallContext, ContractError, ContractKind, ContractLogic};
use crate::crypto_identity::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RewardPhase {
    Open,
    Claimed,
    Paid,
    Expired,
}

/// Public bounty: the offeror escrows a reward for whoever completes a task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnilateralRewardState {
    pub offeror: Address,
    pub task: String,
    pub deadline: u64,
    pub reward: u64,
    pub claimant: Option<Address>,
    pub evidence: Option<String>,
    pub phase: RewardPhase,
}

impl ContractLogic for UnilateralRewardState {
    const KIND: ContractKind = ContractKind::UnilateralReward;
    const METHODS: &'static [(&'static str, bool)] =
        &[("claim", false), ("confirm_and_pay", false), ("reject_claim", false), ("expire", false)];
    const PAYABLE_CONSTRUCTOR: bool = true;

    fn construct(ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError> {
        args.expect_len(3)?;
        let task = args.str(0, "task")?.to_string();
        let deadline = args.u64(1, "deadline")?;
        let reward = args.u64(2, "reward")?;
        if reward == 0 {
            return Err(ContractError::BadArguments("reward must be positive".into()));
        }
        if deadline < ctx.height {
            return Err(ContractError::BadArguments("deadline already passed".into()));
        }
        ctx.require_value(reward)?;
        ctx.emit("RewardPosted", [("task", Value::from(task.as_str())), ("reward", Value::U64(reward))])?;
        Ok(UnilateralRewardState {
            offeror: ctx.caller,
            task,
            deadline,
            reward,
            claimant: None,
            evidence: None,
            phase: RewardPhase::Open,
        })
    }

    fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError> {
        use RewardPhase::*;
        match method {
            "claim" => {
                args.expect_len(1)?;
                let evidence = args.str(0, "evidence")?;
                if self.phase != Open {
                    return Err(ContractError::state(format!("cannot claim in phase {:?}", self.phase)));
                }
                if ctx.height > self.deadline {
                    return Err(ContractError::Expired);
                }
                if ctx.caller == self.offeror {
                    return Err(ContractError::unauthorized("offeror cannot claim its own reward"));
                }
                self.claimant = Some(ctx.caller);
                self.evidence = Some(evidence.to_string());
                self.phase = Claimed;
                ctx.emit("RewardClaimed", [("claimant", Value::Addr(ctx.caller))])?;
            }
            "confirm_and_pay" | "reject_claim" => {
                args.expect_len(0)?;
                if ctx.caller != self.offeror {
                    return Err(ContractError::unauthorized("only the offeror judges claims"));
                }
                let claimant = match (self.phase, self.claimant) {
                    (Claimed, Some(c)) => c,
                    _ => return Err(ContractError::state("no claim to judge")),
                };
                if method == "confirm_and_pay" {
                    ctx.pay(claimant, self.reward)?;
                    self.phase = Paid;
                    ctx.emit("RewardPaid", [("claimant", Value::Addr(claimant)), ("amount", Value::U64(self.reward))])?;
                } else {
                    self.claimant = None;
                    self.evidence = None;
                    self.phase = Open;
                    ctx.emit("ClaimRejected", [("claimant", Value::Addr(claimant))])?;
                }
            }
            "expire" => {
                args.expect_len(0)?;
                if !matches!(self.phase, Open | Claimed) {
                    return Err(ContractError::state(format!("cannot expire in phase {:?}", self.phase)));
                }
                if ctx.height <= self.deadline {
                    return Err(ContractError::state("deadline not reached"));
                }
                ctx.pay(self.offeror, self.reward)?;
                self.phase = Expired;
                ctx.emit("RewardExpired", [("offeror", Value::Addr(self.offeror)), ("amount", Value::U64(self.reward))])?;
            }
            other => return Err(ContractError::MethodNotFound(other.to_string())),
        }
        Ok(None)
    }

    fn phase(&self) -> String {
        format!("{:?}", self.phase)
    }

    fn is_terminal(&self) -> bool {
        matches!(self.phase, RewardPhase::Paid | RewardPhase::Expired)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::testkit::{addr, World};

    const OFFEROR: u8 = 1;
    const ROBOT: u8 = 2;

    fn post(w: &mut World, reward: u64, deadline: u64) -> Address {
        w.deploy(addr(OFFEROR), reward, "unilateral_reward", vec!["haul crate".into(), Value::U64(deadline), Value::U64(reward)])
            .unwrap()
    }

    #[test]
    fn claim_and_pay() {
        let mut w = World::funded(&[(addr(OFFEROR), 100), (addr(ROBOT), 0)]);
        let c = post(&mut w, 25, 5);
        assert_eq!((w.balance(addr(OFFEROR)), w.held(c)), (75, 25));
        w.call(addr(ROBOT), c, 0, "claim", vec!["photo".into()]).unwrap();
        assert!(matches!(w.call(addr(ROBOT), c, 0, "confirm_and_pay", vec![]), Err(ContractError::Unauthorized(_))));
        w.call(addr(OFFEROR), c, 0, "confirm_and_pay", vec![]).unwrap();
        assert_eq!((w.balance(addr(ROBOT)), w.held(c), w.phase(c).as_str()), (25, 0, "Paid"));
        assert!(w.call(addr(OFFEROR), c, 0, "confirm_and_pay", vec![]).is_err());
        assert!(w.call(addr(OFFEROR), c, 0, "expire", vec![]).is_err());
    }

    #[test]
    fn expire_refunds_offeror() {
        let mut w = World::funded(&[(addr(OFFEROR), 100), (addr(ROBOT), 0)]);
        let c = post(&mut w, 25, 5);
        w.height = 5;
        assert!(matches!(w.call(addr(ROBOT), c, 0, "expire", vec![]), Err(ContractError::StateError(_))));
        w.height = 6;
        assert_eq!(w.call(addr(ROBOT), c, 0, "claim", vec!["late".into()]), Err(ContractError::Expired));
        w.call(addr(ROBOT), c, 0, "expire", vec![]).unwrap();
        assert_eq!((w.balance(addr(OFFEROR)), w.held(c)), (100, 0));
    }

    #[test]
    fn reject_reopens() {
        let mut w = World::funded(&[(addr(OFFEROR), 100), (addr(ROBOT), 0), (addr(3), 0)]);
        let c = post(&mut w, 25, 5);
        w.call(addr(ROBOT), c, 0, "claim", vec!["blurry".into()]).unwrap();
        w.call(addr(OFFEROR), c, 0, "reject_claim", vec![]).unwrap();
        w.call(addr(3), c, 0, "claim", vec!["clear".into()]).unwrap();
        w.call(addr(OFFEROR), c, 0, "confirm_and_pay", vec![]).unwrap();
        assert_eq!(w.balance(addr(3)), 25);
    }

    #[test]
    fn constructor_requires_exact_funding() {
        let mut w = World::funded(&[(addr(OFFEROR), 100)]);
        let err = w
            .deploy(addr(OFFEROR), 20, "unilateral_reward", vec!["t".into(), Value::U64(5), Value::U64(25)])
            .unwrap_err();
        assert_eq!(err, ContractError::WrongAmount { expected: 25, got: 20 });
        assert_eq!(w.balance(addr(OFFEROR)), 100);
    }
}
