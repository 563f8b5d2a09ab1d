use serde::Serialize;

use crate::codec::Value;
use crate::contract_engine::{Args, CallContext, ContractError, ContractKind, ContractLogic};
use crate::crypto_identity::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CommitmentPhase {
    Active,
    Expired,
}

/// A human locks a resource behind a device during a time window and stakes
/// collateral; each access attempt inside the window is denied and forfeits
/// one penalty to the beneficiary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimeLockCommitmentState {
    pub human: Address,
    pub device: Address,
    pub beneficiary: Address,
    pub resource: String,
    pub window_start: u64,
    pub window_end: u64,
    /// Zero means the window occurs once at absolute heights.
    pub period: u64,
    pub penalty: u64,
    pub expires_at: u64,
    pub denials: u64,
    pub penalties_paid: u64,
    pub phase: CommitmentPhase,
}

impl TimeLockCommitmentState {
    /// Inclusive window test; recurring windows may wrap past the period end.
    pub fn in_window(&self, height: u64) -> bool {
        let (s, e) = (self.window_start, self.window_end);
        if self.period == 0 {
            return s <= height && height <= e;
        }
        let r = height % self.period;
        if s <= e {
            s <= r && r <= e
        } else {
            r >= s || r <= e
        }
    }
}

impl ContractLogic for TimeLockCommitmentState {
    const KIND: ContractKind = ContractKind::TimeLockCommitment;
    const METHODS: &'static [(&'static str, bool)] = &[("request_access", false), ("expire", false)];
    const PAYABLE_CONSTRUCTOR: bool = true;

    fn construct(ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError> {
        args.expect_len(8)?;
        let device = args.addr(0, "device")?;
        let beneficiary = args.addr(1, "beneficiary")?;
        let resource = args.str(2, "resource")?.to_string();
        let window_start = args.u64(3, "window_start")?;
        let window_end = args.u64(4, "window_end")?;
        let period = args.u64(5, "period")?;
        let penalty = args.u64(6, "penalty")?;
        let duration = args.u64(7, "duration")?;
        let bad = |m: &str| Err(ContractError::BadArguments(m.to_string()));
        if device == ctx.caller || beneficiary == ctx.caller {
            return bad("device and beneficiary must differ from the committer");
        }
        if penalty == 0 || duration == 0 {
            return bad("penalty and duration must be positive");
        }
        if period == 0 && window_start > window_end {
            return bad("window_start after window_end");
        }
        if period > 0 && (window_start >= period || window_end >= period) {
            return bad("recurring window bounds must be below the period");
        }
        if ctx.value < penalty {
            return bad("collateral must cover at least one penalty");
        }
        ctx.emit("CommitmentMade", [("resource", Value::from(resource.as_str())), ("collateral", Value::U64(ctx.value))])?;
        Ok(TimeLockCommitmentState {
            human: ctx.caller,
            device,
            beneficiary,
            resource,
            window_start,
            window_end,
            period,
            penalty,
            expires_at: ctx.height + duration,
            denials: 0,
            penalties_paid: 0,
            phase: CommitmentPhase::Active,
        })
    }

    fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError> {
        match method {
            "request_access" => {
                args.expect_len(1)?;
                let at = args.u64(0, "height")?;
                if ctx.caller != self.device {
                    return Err(ContractError::unauthorized("only the locking device reports attempts"));
                }
                if at > ctx.height {
                    return Err(ContractError::BadArguments("attempt reported from the future".into()));
                }
                let locked = self.phase == CommitmentPhase::Active && at <= self.expires_at && self.in_window(at);
                if !locked {
                    ctx.emit("AccessAllowed", [("height", Value::U64(at))])?;
                    return Ok(Some(Value::from("allow")));
                }
                let forfeit = self.penalty.min(ctx.held_funds());
                ctx.pay(self.beneficiary, forfeit)?;
                self.denials += 1;
                self.penalties_paid += forfeit;
                ctx.emit(
                    "AccessDenied",
                    [("height", Value::U64(at)), ("penalty", Value::U64(forfeit)), ("beneficiary", Value::Addr(self.beneficiary))],
                )?;
                Ok(Some(Value::from("deny")))
            }
            "expire" => {
                args.expect_len(0)?;
                if self.phase != CommitmentPhase::Active {
                    return Err(ContractError::state("already expired"));
                }
                if ctx.height <= self.expires_at {
                    return Err(ContractError::state("commitment still running"));
                }
                let rest = ctx.held_funds();
                ctx.pay(self.human, rest)?;
                self.phase = CommitmentPhase::Expired;
                ctx.emit("CommitmentExpired", [("refund", Value::U64(rest))])?;
                Ok(None)
            }
            other => Err(ContractError::MethodNotFound(other.to_string())),
        }
    }

    fn phase(&self) -> String {
        format!("{:?}", self.phase)
    }

    fn is_terminal(&self) -> bool {
        self.phase == CommitmentPhase::Expired
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::testkit::{addr, World};

    const HUMAN: u8 = 1;
    const FRIDGE: u8 = 2;
    const CHARITY: u8 = 3;

    fn deploy(w: &mut World, collateral: u64, window: (u64, u64), period: u64, duration: u64) -> Address {
        w.deploy(
            addr(HUMAN),
            collateral,
            "time_lock_commitment",
            vec![
                Value::Addr(addr(FRIDGE)),
                Value::Addr(addr(CHARITY)),
                "snacks".into(),
                Value::U64(window.0),
                Value::U64(window.1),
                Value::U64(period),
                Value::U64(10),
                Value::U64(duration),
            ],
        )
        .unwrap()
    }

    fn attempt(w: &mut World, c: Address, at: u64) -> Value {
        w.height = w.height.max(at);
        w.call(addr(FRIDGE), c, 0, "request_access", vec![Value::U64(at)]).unwrap().output.unwrap()
    }

    #[test]
    fn absolute_window() {
        let mut w = World::funded(&[(addr(HUMAN), 100), (addr(CHARITY), 0)]);
        let c = deploy(&mut w, 30, (100, 110), 0, 200);
        assert_eq!(attempt(&mut w, c, 99), Value::from("allow"));
        assert_eq!(attempt(&mut w, c, 100), Value::from("deny"));
        assert_eq!(attempt(&mut w, c, 105), Value::from("deny"));
        assert_eq!(attempt(&mut w, c, 110), Value::from("deny"));
        assert_eq!(attempt(&mut w, c, 111), Value::from("allow"));
        assert_eq!((w.balance(addr(CHARITY)), w.held(c)), (30, 0));
        // collateral exhausted: further denials forfeit nothing
        let c2 = deploy(&mut w, 10, (100, 200), 0, 200);
        attempt(&mut w, c2, 150);
        attempt(&mut w, c2, 151);
        assert_eq!(w.balance(addr(CHARITY)), 40);
    }

    #[test]
    fn wrapping_recurring_window() {
        let s = TimeLockCommitmentState {
            human: addr(HUMAN),
            device: addr(FRIDGE),
            beneficiary: addr(CHARITY),
            resource: "r".into(),
            window_start: 22,
            window_end: 6,
            period: 24,
            penalty: 1,
            expires_at: 1000,
            denials: 0,
            penalties_paid: 0,
            phase: CommitmentPhase::Active,
        };
        let locked: Vec<u64> = (0..48).filter(|h| s.in_window(*h)).collect();
        assert_eq!(locked, [0, 1, 2, 3, 4, 5, 6, 22, 23, 24, 25, 26, 27, 28, 29, 30, 46, 47]);
    }

    #[test]
    fn lapse_and_expire() {
        let mut w = World::funded(&[(addr(HUMAN), 100), (addr(CHARITY), 0)]);
        let c = deploy(&mut w, 30, (0, 9), 10, 20);
        assert_eq!(attempt(&mut w, c, 5), Value::from("deny"));
        assert!(w.call(addr(HUMAN), c, 0, "expire", vec![]).is_err());
        assert_eq!(attempt(&mut w, c, 25), Value::from("allow"));
        w.call(addr(CHARITY), c, 0, "expire", vec![]).unwrap();
        assert_eq!((w.balance(addr(HUMAN)), w.balance(addr(CHARITY)), w.held(c)), (90, 10, 0));
    }

    #[test]
    fn only_device_reports() {
        let mut w = World::funded(&[(addr(HUMAN), 100)]);
        let c = deploy(&mut w, 30, (0, 9), 0, 20);
        assert!(matches!(
            w.call(addr(HUMAN), c, 0, "request_access", vec![Value::U64(1)]),
            Err(ContractError::Unauthorized(_))
        ));
        assert!(matches!(
            w.call(addr(FRIDGE), c, 0, "request_access", vec![Value::U64(50)]),
            Err(ContractError::BadArguments(_))
        ));
    }
}
