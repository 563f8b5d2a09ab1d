use std::collections::BTreeMap;

use serde::Serialize;

use crate::codec::{hex_array, Value};
use crate::contract_engine::{Args, CallContext, ContractError, ContractKind, ContractLogic};
use crate::crypto_identity::Address;

/// Parameters a ballot may change.
pub const GOVERNED_PARAMS: [&str; 2] = ["service_fee", "maintenance_fund_rate"];

/// Strict majority of the electorate; ties fail.
pub fn ballot_passes(yes: usize, electorate: usize) -> bool {
    yes > electorate / 2
}

/// Equal shares; indivisible units go to the first owner.
pub fn split_among_owners(amount: u64, owners: usize) -> Vec<u64> {
    let n = owners as u64;
    let mut shares = vec![amount / n; owners];
    shares[0] += amount % n;
    shares
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PendingTransfer {
    pub from: Address,
    pub to: Address,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BallotState {
    pub proposer: Address,
    pub param: String,
    pub value: u64,
    /// Owners at proposal time.
    pub electorate: Vec<Address>,
    pub votes: BTreeMap<Address, bool>,
    pub deadline: u64,
    pub executed: bool,
    pub passed: Option<bool>,
}

impl BallotState {
    fn tally(&self) -> (usize, usize) {
        let yes = self.votes.values().filter(|v| **v).count();
        (yes, self.votes.len() - yes)
    }

    /// Outcome can no longer change.
    fn decided(&self) -> bool {
        let n = self.electorate.len();
        let (yes, no) = self.tally();
        ballot_passes(yes, n) || !ballot_passes(n - no, n)
    }
}

/// Fractionally owned autonomous taxi with on-chain governance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RideSharingState {
    pub vehicle: Address,
    #[serde(with = "hex_array")]
    pub vin: [u8; 32],
    pub owners: Vec<Address>,
    pub passenger: Option<Address>,
    /// Fare paid by the current passenger.
    pub fare_held: u64,
    pub ride_cost: u64,
    pub pending_transfer: Option<PendingTransfer>,
    /// `maintenance_fund_rate`: percent of each fare routed to the vehicle wallet.
    pub params: BTreeMap<String, u64>,
    pub ballot: Option<BallotState>,
    pub rides_completed: u64,
}

fn parse_owners(list: &[Value]) -> Result<Vec<Address>, ContractError> {
    let mut owners = Vec::with_capacity(list.len());
    for v in list {
        let a = v.as_addr().ok_or_else(|| ContractError::BadArguments("owners must be addresses".into()))?;
        if owners.contains(&a) {
            return Err(ContractError::BadArguments(format!("duplicate owner {a}")));
        }
        owners.push(a);
    }
    if owners.is_empty() {
        return Err(ContractError::BadArguments("owners must be non-empty".into()));
    }
    Ok(owners)
}

impl RideSharingState {
    fn require_owner(&self, who: &Address) -> Result<(), ContractError> {
        if self.owners.contains(who) {
            Ok(())
        } else {
            Err(ContractError::unauthorized("caller is not an owner"))
        }
    }

    pub fn maintenance_fund_rate(&self) -> u64 {
        self.params.get("maintenance_fund_rate").copied().unwrap_or(0)
    }

    fn check_param(param: &str, value: u64) -> Result<(), ContractError> {
        match param {
            "service_fee" if value == 0 => Err(ContractError::BadArguments("service_fee must be positive".into())),
            "maintenance_fund_rate" if value > 100 => Err(ContractError::BadArguments("rate is a percentage".into())),
            p if !GOVERNED_PARAMS.contains(&p) => Err(ContractError::BadArguments(format!("unknown parameter {p:?}"))),
            _ => Ok(()),
        }
    }

    fn apply_param(&mut self, param: &str, value: u64) {
        if param == "service_fee" {
            self.ride_cost = value;
        } else {
            self.params.insert(param.to_string(), value);
        }
    }

    fn open_ballot(&mut self) -> Result<&mut BallotState, ContractError> {
        match &mut self.ballot {
            Some(b) if !b.executed => Ok(b),
            Some(_) => Err(ContractError::state("ballot already executed")),
            None => Err(ContractError::state("no ballot proposed")),
        }
    }
}

impl ContractLogic for RideSharingState {
    const KIND: ContractKind = ContractKind::RideSharing;
    const METHODS: &'static [(&'static str, bool)] = &[
        ("set_owners", false),
        ("approve_transfer", false),
        ("accept_transfer", false),
        ("request_ride", true),
        ("complete_ride", false),
        ("propose", false),
        ("vote", false),
        ("execute", false),
    ];
    const PAYABLE_CONSTRUCTOR: bool = false;

    fn construct(_ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError> {
        args.expect_len(5)?;
        let vehicle = args.addr(0, "vehicle")?;
        let vin: [u8; 32] = args
            .bytes(1, "vin")?
            .try_into()
            .map_err(|_| ContractError::BadArguments("vin must be 32 bytes".into()))?;
        let owners = parse_owners(args.list(2, "owners")?)?;
        let ride_cost = args.u64(3, "ride_cost")?;
        let rate = args.u64(4, "maintenance_fund_rate")?;
        Self::check_param("service_fee", ride_cost)?;
        Self::check_param("maintenance_fund_rate", rate)?;
        Ok(RideSharingState {
            vehicle,
            vin,
            owners,
            passenger: None,
            fare_held: 0,
            ride_cost,
            pending_transfer: None,
            params: BTreeMap::from([("maintenance_fund_rate".to_string(), rate)]),
            ballot: None,
            rides_completed: 0,
        })
    }

    fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError> {
        match method {
            "set_owners" => {
                args.expect_len(1)?;
                self.require_owner(&ctx.caller)?;
                self.owners = parse_owners(args.list(0, "owners")?)?;
                self.pending_transfer = None;
                ctx.emit("OwnersSet", [("count", Value::U64(self.owners.len() as u64))])?;
                Ok(None)
            }
            "approve_transfer" => {
                args.expect_len(1)?;
                self.require_owner(&ctx.caller)?;
                let to = args.addr(0, "to")?;
                if self.owners.contains(&to) {
                    return Err(ContractError::state("recipient already an owner"));
                }
                self.pending_transfer = Some(PendingTransfer { from: ctx.caller, to });
                ctx.emit("Appr", [("_owner", Value::Addr(ctx.caller)), ("_approved", Value::Addr(to))])?;
                Ok(None)
            }
            "accept_transfer" => {
                args.expect_len(0)?;
                let pending = self.pending_transfer.clone().ok_or_else(|| ContractError::state("no pending transfer"))?;
                if pending.to != ctx.caller {
                    return Err(ContractError::unauthorized("only the approved recipient accepts"));
                }
                let idx = self
                    .owners
                    .iter()
                    .position(|o| *o == pending.from)
                    .ok_or_else(|| ContractError::state("approving owner no longer holds a share"))?;
                self.owners[idx] = pending.to;
                self.pending_transfer = None;
                ctx.emit("Transf", [("_from", Value::Addr(pending.from)), ("_to", Value::Addr(pending.to))])?;
                Ok(None)
            }
            "request_ride" => {
                args.expect_len(0)?;
                if self.passenger.is_some() {
                    return Err(ContractError::state("ride already in progress"));
                }
                ctx.require_value(self.ride_cost)?;
                self.passenger = Some(ctx.caller);
                self.fare_held = ctx.value;
                ctx.emit("RideReq", [("_passengerAddr", Value::Addr(ctx.caller)), ("rideCost", Value::U64(ctx.value))])?;
                Ok(None)
            }
            "complete_ride" => {
                args.expect_len(0)?;
                if ctx.caller != self.vehicle {
                    return Err(ContractError::unauthorized("only the vehicle completes rides"));
                }
                let passenger = self.passenger.ok_or_else(|| ContractError::state("no ride in progress"))?;
                let fare = self.fare_held;
                let maintenance = fare * self.maintenance_fund_rate() / 100;
                ctx.pay(self.vehicle, maintenance)?;
                let shares = split_among_owners(fare - maintenance, self.owners.len());
                for (owner, share) in self.owners.clone().into_iter().zip(shares) {
                    ctx.pay(owner, share)?;
                }
                self.passenger = None;
                self.fare_held = 0;
                self.rides_completed += 1;
                ctx.emit(
                    "RideDone",
                    [
                        ("_passengerAddr", Value::Addr(passenger)),
                        ("fare", Value::U64(fare)),
                        ("maintenance", Value::U64(maintenance)),
                    ],
                )?;
                Ok(None)
            }
            "propose" => {
                args.expect_len(3)?;
                self.require_owner(&ctx.caller)?;
                let param = args.str(0, "param")?;
                let value = args.u64(1, "value")?;
                let deadline = args.u64(2, "deadline")?;
                Self::check_param(param, value)?;
                if matches!(&self.ballot, Some(b) if !b.executed) {
                    return Err(ContractError::state("a ballot is already open"));
                }
                if deadline < ctx.height {
                    return Err(ContractError::state("deadline already passed"));
                }
                self.ballot = Some(BallotState {
                    proposer: ctx.caller,
                    param: param.to_string(),
                    value,
                    electorate: self.owners.clone(),
                    votes: BTreeMap::new(),
                    deadline,
                    executed: false,
                    passed: None,
                });
                ctx.emit(
                    "BallotProposed",
                    [("param", Value::from(param)), ("value", Value::U64(value)), ("deadline", Value::U64(deadline))],
                )?;
                Ok(None)
            }
            "vote" => {
                args.expect_len(1)?;
                let yes = args.bool(0, "yes")?;
                let (caller, height) = (ctx.caller, ctx.height);
                let ballot = self.open_ballot()?;
                if !ballot.electorate.contains(&caller) {
                    return Err(ContractError::unauthorized("caller is not in the electorate"));
                }
                if height > ballot.deadline {
                    return Err(ContractError::state("voting closed"));
                }
                if ballot.votes.contains_key(&caller) {
                    return Err(ContractError::DoubleVote);
                }
                ballot.votes.insert(caller, yes);
                ctx.emit("Voted", [("owner", Value::Addr(caller)), ("yes", Value::Bool(yes))])?;
                Ok(None)
            }
            "execute" => {
                args.expect_len(0)?;
                let height = ctx.height;
                let ballot = self.open_ballot()?;
                if height <= ballot.deadline && !ballot.decided() {
                    return Err(ContractError::state("ballot undecided before its deadline"));
                }
                let (yes, _) = ballot.tally();
                let passed = ballot_passes(yes, ballot.electorate.len());
                ballot.executed = true;
                ballot.passed = Some(passed);
                let (param, value) = (ballot.param.clone(), ballot.value);
                if passed {
                    self.apply_param(&param, value);
                }
                ctx.emit(
                    "BallotExecuted",
                    [("param", Value::from(param)), ("value", Value::U64(value)), ("passed", Value::Bool(passed))],
                )?;
                Ok(Some(Value::Bool(passed)))
            }
            other => Err(ContractError::MethodNotFound(other.to_string())),
        }
    }

    fn phase(&self) -> String {
        if self.passenger.is_some() { "Riding" } else { "Idle" }.to_string()
    }

    fn is_terminal(&self) -> bool {
        false
    }
}
