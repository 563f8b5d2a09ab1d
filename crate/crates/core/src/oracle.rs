//! Signed attestations from a designated data source.
//!
//! Attestations live on an off-chain bus and reach contracts as call
//! arguments; the contract checks the signature against the oracle address it
//! pinned at construction. A contract trusts that one key completely: a
//! compromised or dishonest oracle can still sign false facts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::{Encoder, Value};
use crate::contract_engine::ContractError;
use crate::crypto_identity::{verify, Address, KeyPair, PublicKey, Signature};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("key does not belong to registered oracle {0}")]
    Unauthorized(Address),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Attestation {
    pub oracle: Address,
    pub subject: String,
    pub value: Value,
    pub height: u64,
    pub public_key: PublicKey,
    pub signature: Signature,
}

impl Attestation {
    pub fn signing_bytes(subject: &str, value: &Value, height: u64) -> Vec<u8> {
        let mut e = Encoder::with_domain("rbn-attestation-v1");
        e.str(subject).value(value).u64(height);
        e.finish()
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("attestation serializes")
    }

    /// Contract-argument form: `[oracle, subject, value, height, public_key, signature]`.
    pub fn to_value(&self) -> Value {
        Value::List(vec![
            Value::Addr(self.oracle),
            Value::Str(self.subject.clone()),
            self.value.clone(),
            Value::U64(self.height),
            Value::Bytes(self.public_key.0.to_vec()),
            Value::Bytes(self.signature.0.to_vec()),
        ])
    }

    pub fn from_value(v: &Value) -> Result<Attestation, ContractError> {
        let bad = |m: &str| ContractError::BadAttestation(m.to_string());
        let items = v.as_list().ok_or_else(|| bad("attestation must be a list"))?;
        let [oracle, subject, value, height, pk, sig] = items else {
            return Err(bad("attestation must have 6 fields"));
        };
        let pk: [u8; 32] = pk.as_bytes().and_then(|b| b.try_into().ok()).ok_or_else(|| bad("bad key"))?;
        let sig: [u8; 64] = sig.as_bytes().and_then(|b| b.try_into().ok()).ok_or_else(|| bad("bad signature"))?;
        Ok(Attestation {
            oracle: oracle.as_addr().ok_or_else(|| bad("bad oracle"))?,
            subject: subject.as_str().ok_or_else(|| bad("bad subject"))?.to_string(),
            value: value.clone(),
            height: height.as_u64().ok_or_else(|| bad("bad height"))?,
            public_key: PublicKey(pk),
            signature: Signature(sig),
        })
    }
}

/// Signs `(subject, value, height)` with the oracle key.
pub fn publish_attestation(oracle: &KeyPair, subject: &str, value: Value, height: u64) -> Attestation {
    let msg = Attestation::signing_bytes(subject, &value, height);
    Attestation {
        oracle: oracle.address(),
        subject: subject.to_string(),
        value,
        height,
        public_key: oracle.public_key(),
        signature: oracle.sign(&msg),
    }
}

/// True iff signed by the key behind `expected_oracle`.
pub fn verify_attestation(att: &Attestation, expected_oracle: &Address) -> bool {
    att.oracle == *expected_oracle
        && Address::from_public_key(&att.public_key) == *expected_oracle
        && verify(
            &att.signature,
            &Attestation::signing_bytes(&att.subject, &att.value, att.height),
            att.public_key.as_bytes(),
        )
}

/// Append-only attestation store shared by simulation agents.
#[derive(Debug, Clone, Default)]
pub struct OracleBus {
    oracles: BTreeMap<Address, PublicKey>,
    by_subject: BTreeMap<String, Vec<Attestation>>,
}

impl OracleBus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_oracle(&mut self, public_key: PublicKey) -> Address {
        let addr = Address::from_public_key(&public_key);
        self.oracles.insert(addr, public_key);
        addr
    }

    pub fn publish(
        &mut self,
        oracle: Address,
        keys: &KeyPair,
        subject: &str,
        value: Value,
        height: u64,
    ) -> Result<Attestation, OracleError> {
        if self.oracles.get(&oracle) != Some(&keys.public_key()) {
            return Err(OracleError::Unauthorized(oracle));
        }
        let att = publish_attestation(keys, subject, value, height);
        self.by_subject.entry(subject.to_string()).or_default().push(att.clone());
        Ok(att)
    }

    /// Highest-height attestation; among equal heights the later publication.
    pub fn query_latest(&self, subject: &str) -> Option<&Attestation> {
        self.by_subject
            .get(subject)?
            .iter()
            .max_by_key(|a| a.height)
    }

    /// Like [`query_latest`](Self::query_latest), restricted to one publisher.
    pub fn query_latest_from(&self, subject: &str, oracle: &Address) -> Option<&Attestation> {
        self.by_subject
            .get(subject)?
            .iter()
            .filter(|a| a.oracle == *oracle)
            .max_by_key(|a| a.height)
    }

    pub fn all(&self) -> impl Iterator<Item = &Attestation> {
        self.by_subject.values().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto_identity::generate_keypair;

    fn setup() -> (KeyPair, OracleBus, Address) {
        let kp = generate_keypair(&[21u8; 32]).unwrap();
        let mut bus = OracleBus::new();
        let addr = bus.register_oracle(kp.public_key());
        (kp, bus, addr)
    }

    #[test]
    fn publish_then_query() {
        let (kp, mut bus, addr) = setup();
        bus.publish(addr, &kp, "price:oil-change", Value::U64(80), 3).unwrap();
        let att = bus.query_latest("price:oil-change").unwrap();
        assert_eq!(att.value, Value::U64(80));
        assert!(verify_attestation(att, &addr));
    }

    #[test]
    fn wrong_oracle_address() {
        let (kp, _, _) = setup();
        let att = publish_attestation(&kp, "price:oil-change", Value::U64(80), 1);
        let other = generate_keypair(&[22u8; 32]).unwrap().address();
        assert!(!verify_attestation(&att, &other));
    }

    #[test]
    fn latest_height_wins() {
        let (kp, mut bus, addr) = setup();
        bus.publish(addr, &kp, "p", Value::U64(9), 9).unwrap();
        bus.publish(addr, &kp, "p", Value::U64(5), 5).unwrap();
        assert_eq!(bus.query_latest("p").unwrap().value, Value::U64(9));
        bus.publish(addr, &kp, "p", Value::U64(10), 9).unwrap();
        assert_eq!(bus.query_latest("p").unwrap().value, Value::U64(10));
        assert!(bus.query_latest("nothing").is_none());
    }

    #[test]
    fn publish_with_wrong_key() {
        let (_, mut bus, addr) = setup();
        let mallory = generate_keypair(&[23u8; 32]).unwrap();
        assert_eq!(bus.publish(addr, &mallory, "p", Value::U64(1), 1), Err(OracleError::Unauthorized(addr)));
    }

    #[test]
    fn forged_fields_fail() {
        let (kp, _, addr) = setup();
        let mut att = publish_attestation(&kp, "service-ok:x", Value::Bool(true), 4);
        assert!(verify_attestation(&att, &addr));
        att.value = Value::Bool(false);
        assert!(!verify_attestation(&att, &addr));
        let round = Attestation::from_value(&publish_attestation(&kp, "s", Value::U64(1), 2).to_value()).unwrap();
        assert!(verify_attestation(&round, &addr));
    }
}
