use serde::Serialize;

use crate::codec::Value;
use crate::contract_engine::{Args, CallContext, ContractError, ContractKind, ContractLogic};
use crate::crypto_identity::Address;
use crate::oracle::{verify_attestation, Attestation};

/// Subject the oracle signs to confirm a service.
pub fn service_subject(vehicle: &Address, obligations: &str) -> String {
    format!("service-ok:{vehicle}:{obligations}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaintenancePhase {
    Quoted,
    Funded,
    ProviderSignaled,
    Confirmed,
    Refunded,
}

/// Vehicle pays a service provider once an oracle confirms the work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaintenanceEscrowState {
    pub vehicle: Address,
    pub provider: Address,
    pub oracle: Address,
    pub quote: u64,
    pub obligations: String,
    pub timeout_height: u64,
    pub signaled_at: Option<u64>,
    pub phase: MaintenancePhase,
}

impl MaintenanceEscrowState {
    fn expect_phase(&self, allowed: &[MaintenancePhase]) -> Result<(), ContractError> {
        if allowed.contains(&self.phase) {
            Ok(())
        } else {
            Err(ContractError::state(format!("not allowed in phase {:?}", self.phase)))
        }
    }
}

impl ContractLogic for MaintenanceEscrowState {
    const KIND: ContractKind = ContractKind::MaintenanceEscrow;
    const METHODS: &'static [(&'static str, bool)] =
        &[("fund", true), ("signal_complete", false), ("confirm", false), ("refund_after_timeout", false)];
    const PAYABLE_CONSTRUCTOR: bool = false;

    fn construct(ctx: &mut CallContext<'_>, args: Args<'_>) -> Result<Self, ContractError> {
        args.expect_len(5)?;
        let vehicle = args.addr(0, "vehicle")?;
        let oracle = args.addr(1, "oracle")?;
        let quote = args.u64(2, "quote")?;
        let obligations = args.str(3, "obligations")?.to_string();
        let timeout_height = args.u64(4, "timeout_height")?;
        let provider = ctx.caller;
        if quote == 0 {
            return Err(ContractError::BadArguments("quote must be positive".into()));
        }
        if vehicle == provider {
            return Err(ContractError::BadArguments("vehicle and provider must differ".into()));
        }
        if oracle == vehicle || oracle == provider {
            return Err(ContractError::BadArguments("oracle must be independent of both parties".into()));
        }
        if timeout_height <= ctx.height {
            return Err(ContractError::BadArguments("timeout must lie in the future".into()));
        }
        Ok(MaintenanceEscrowState {
            vehicle,
            provider,
            oracle,
            quote,
            obligations,
            timeout_height,
            signaled_at: None,
            phase: MaintenancePhase::Quoted,
        })
    }

    fn call(&mut self, ctx: &mut CallContext<'_>, method: &str, args: Args<'_>) -> Result<Option<Value>, ContractError> {
        use MaintenancePhase::*;
        match method {
            "fund" => {
                args.expect_len(0)?;
                if ctx.caller != self.vehicle {
                    return Err(ContractError::unauthorized("only the vehicle funds"));
                }
                self.expect_phase(&[Quoted])?;
                if ctx.height > self.timeout_height {
                    return Err(ContractError::Expired);
                }
                ctx.require_value(self.quote)?;
                self.phase = Funded;
                ctx.emit("EscrowFunded", [("amount", Value::U64(ctx.value))])?;
            }
            "signal_complete" => {
                args.expect_len(0)?;
                if ctx.caller != self.provider {
                    return Err(ContractError::unauthorized("only the provider signals completion"));
                }
                self.expect_phase(&[Funded])?;
                self.phase = ProviderSignaled;
                self.signaled_at = Some(ctx.height);
                ctx.emit("ServiceSignaled", [("provider", Value::Addr(self.provider))])?;
            }
            "confirm" => {
                args.expect_len(1)?;
                if ctx.caller != self.vehicle {
                    return Err(ContractError::unauthorized("only the vehicle confirms"));
                }
                self.expect_phase(&[ProviderSignaled])?;
                let att = Attestation::from_value(args.value(0, "attestation")?)?;
                ctx.charge(64)?;
                if !verify_attestation(&att, &self.oracle) {
                    return Err(ContractError::BadAttestation("not signed by the pinned oracle".into()));
                }
                if att.subject != service_subject(&self.vehicle, &self.obligations) {
                    return Err(ContractError::BadAttestation(format!("unexpected subject {:?}", att.subject)));
                }
                if self.signaled_at.is_some_and(|s| att.height < s) {
                    return Err(ContractError::BadAttestation("attestation predates the provider signal".into()));
                }
                if att.value != Value::Bool(true) {
                    return Err(ContractError::BadAttestation("oracle reports service not done".into()));
                }
                ctx.pay(self.provider, self.quote)?;
                self.phase = Confirmed;
                ctx.emit("ServiceConfirmed", [("provider", Value::Addr(self.provider)), ("amount", Value::U64(self.quote))])?;
            }
            "refund_after_timeout" => {
                args.expect_len(0)?;
                self.expect_phase(&[Funded, ProviderSignaled])?;
                if ctx.height <= self.timeout_height {
                    return Err(ContractError::state("timeout not reached"));
                }
                ctx.pay(self.vehicle, self.quote)?;
                self.phase = Refunded;
                ctx.emit("EscrowRefunded", [("vehicle", Value::Addr(self.vehicle)), ("amount", Value::U64(self.quote))])?;
            }
            other => return Err(ContractError::MethodNotFound(other.to_string())),
        }
        Ok(None)
    }

    fn phase(&self) -> String {
        format!("{:?}", self.phase)
    }

    fn is_terminal(&self) -> bool {
        matches!(self.phase, MaintenancePhase::Confirmed | MaintenancePhase::Refunded)
    }
}
