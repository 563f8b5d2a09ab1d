use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{verify, Address, KeyPair, PublicKey, Signature};
use crate::codec::{Encoder, Hash32};

pub const DID_METHOD_PREFIX: &str = "did:rbn:";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DidError {
    #[error("unknown did {0}")]
    NotFound(String),
    #[error("signature does not match the document key or its controller")]
    Unauthorized,
    #[error("did {0} is deactivated")]
    Deactivated(String),
    #[error("did {0} is already registered")]
    AlreadyRegistered(String),
}

/// Self-sovereign identifier record. Field order here is the canonical JSON order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DidDocument {
    pub did: String,
    pub controller: Option<Address>,
    pub public_key: PublicKey,
    pub attributes: BTreeMap<String, String>,
    pub service_endpoints: Vec<String>,
    pub active: bool,
    pub version: u64,
}

impl DidDocument {
    pub fn did_for(address: &Address) -> String {
        format!("{DID_METHOD_PREFIX}{}", address.to_hex())
    }

    pub fn address(&self) -> Address {
        Address::from_public_key(&self.public_key)
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }

    pub fn hash(&self) -> Hash32 {
        Hash32::digest(self.to_canonical_json().as_bytes())
    }
}

/// A set of edits applied by one update.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DidChanges {
    #[serde(default)]
    pub set_attributes: BTreeMap<String, String>,
    #[serde(default)]
    pub remove_attributes: Vec<String>,
    /// Replaces the endpoint list when present.
    #[serde(default)]
    pub service_endpoints: Option<Vec<String>>,
}

impl DidChanges {
    pub fn set(mut self, key: &str, value: &str) -> Self {
        self.set_attributes.insert(key.to_string(), value.to_string());
        self
    }

    fn encode_into(&self, e: &mut Encoder) {
        e.u32(self.set_attributes.len() as u32);
        for (k, v) in &self.set_attributes {
            e.str(k).str(v);
        }
        e.u32(self.remove_attributes.len() as u32);
        for k in &self.remove_attributes {
            e.str(k);
        }
        match &self.service_endpoints {
            None => {
                e.u8(0);
            }
            Some(eps) => {
                e.u8(1).u32(eps.len() as u32);
                for ep in eps {
                    e.str(ep);
                }
            }
        }
    }
}

/// Signature by the document key or the controller key. The signer key is
/// carried so the controller, known only by address, can be checked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DidProof {
    pub signer: PublicKey,
    pub signature: Signature,
}

impl DidProof {
    /// Bytes covered by an update proof. The current version is included so a
    /// proof cannot be replayed against a later version.
    pub fn update_message(did: &str, current_version: u64, changes: &DidChanges) -> Vec<u8> {
        let mut e = Encoder::with_domain("rbn-did-update-v1");
        e.str(did).u64(current_version);
        changes.encode_into(&mut e);
        e.finish()
    }

    pub fn deactivate_message(did: &str, current_version: u64) -> Vec<u8> {
        let mut e = Encoder::with_domain("rbn-did-deactivate-v1");
        e.str(did).u64(current_version);
        e.finish()
    }

    pub fn sign_update(signer: &KeyPair, doc: &DidDocument, changes: &DidChanges) -> DidProof {
        let msg = Self::update_message(&doc.did, doc.version, changes);
        DidProof { signer: signer.public_key(), signature: signer.sign(&msg) }
    }

    pub fn sign_deactivate(signer: &KeyPair, doc: &DidDocument) -> DidProof {
        let msg = Self::deactivate_message(&doc.did, doc.version);
        DidProof { signer: signer.public_key(), signature: signer.sign(&msg) }
    }
}

/// Single-writer store of DID documents. Wrap in a `RwLock` to share.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DidRegistry {
    docs: BTreeMap<String, DidDocument>,
}

impl DidRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_did(
        &mut self,
        keypair: &KeyPair,
        attributes: BTreeMap<String, String>,
        controller: Option<Address>,
    ) -> Result<DidDocument, DidError> {
        let did = DidDocument::did_for(&keypair.address());
        if self.docs.contains_key(&did) {
            return Err(DidError::AlreadyRegistered(did));
        }
        let doc = DidDocument {
            did: did.clone(),
            controller,
            public_key: keypair.public_key(),
            attributes,
            service_endpoints: Vec::new(),
            active: true,
            version: 1,
        };
        self.docs.insert(did, doc.clone());
        Ok(doc)
    }

    pub fn resolve_did(&self, did: &str) -> Result<DidDocument, DidError> {
        self.docs.get(did).cloned().ok_or_else(|| DidError::NotFound(did.to_string()))
    }

    fn authorize(doc: &DidDocument, proof: &DidProof, message: &[u8]) -> Result<(), DidError> {
        let is_owner = proof.signer == doc.public_key;
        let is_controller = doc.controller == Some(Address::from_public_key(&proof.signer));
        if (is_owner || is_controller) && verify(&proof.signature, message, proof.signer.as_bytes()) {
            Ok(())
        } else {
            Err(DidError::Unauthorized)
        }
    }

    pub fn update_did(&mut self, did: &str, changes: &DidChanges, proof: &DidProof) -> Result<DidDocument, DidError> {
        let doc = self.docs.get_mut(did).ok_or_else(|| DidError::NotFound(did.to_string()))?;
        if !doc.active {
            return Err(DidError::Deactivated(did.to_string()));
        }
        Self::authorize(doc, proof, &DidProof::update_message(did, doc.version, changes))?;
        for k in &changes.remove_attributes {
            doc.attributes.remove(k);
        }
        for (k, v) in &changes.set_attributes {
            doc.attributes.insert(k.clone(), v.clone());
        }
        if let Some(eps) = &changes.service_endpoints {
            doc.service_endpoints = eps.clone();
        }
        doc.version += 1;
        Ok(doc.clone())
    }

    pub fn deactivate_did(&mut self, did: &str, proof: &DidProof) -> Result<DidDocument, DidError> {
        let doc = self.docs.get_mut(did).ok_or_else(|| DidError::NotFound(did.to_string()))?;
        if !doc.active {
            return Err(DidError::Deactivated(did.to_string()));
        }
        Self::authorize(doc, proof, &DidProof::deactivate_message(did, doc.version))?;
        doc.active = false;
        doc.version += 1;
        Ok(doc.clone())
    }

    pub fn documents(&self) -> impl Iterator<Item = &DidDocument> {
        self.docs.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto_identity::generate_keypair;
    use proptest::prelude::*;

    fn robot_and_operator() -> (KeyPair, KeyPair, DidRegistry, DidDocument) {
        let robot = generate_keypair(&[10u8; 32]).unwrap();
        let operator = generate_keypair(&[11u8; 32]).unwrap();
        let mut reg = DidRegistry::new();
        let doc = reg.register_did(&robot, BTreeMap::new(), Some(operator.address())).unwrap();
        (robot, operator, reg, doc)
    }

    #[test]
    fn register_base_case() {
        let (robot, _, reg, doc) = robot_and_operator();
        assert_eq!(doc.version, 1);
        assert!(doc.active);
        assert!(doc.attributes.is_empty());
        assert_eq!(doc.did, format!("did:rbn:{}", robot.address()));
        assert_eq!(doc.address(), robot.address());
        assert_eq!(reg.resolve_did(&doc.did).unwrap(), doc);
    }

    #[test]
    fn controller_update_bumps_version() {
        let (_, operator, mut reg, doc) = robot_and_operator();
        let changes = DidChanges::default().set("model", "diff-drive-v2");
        let proof = DidProof::sign_update(&operator, &doc, &changes);
        let updated = reg.update_did(&doc.did, &changes, &proof).unwrap();
        assert_eq!(updated.version, 2);
        assert_eq!(updated.attributes["model"], "diff-drive-v2");
    }

    #[test]
    fn unrelated_signer_rejected() {
        let (_, _, mut reg, doc) = robot_and_operator();
        let mallory = generate_keypair(&[99u8; 32]).unwrap();
        let changes = DidChanges::default().set("model", "evil");
        let proof = DidProof::sign_update(&mallory, &doc, &changes);
        assert_eq!(reg.update_did(&doc.did, &changes, &proof), Err(DidError::Unauthorized));
        assert_eq!(reg.resolve_did(&doc.did).unwrap().version, 1);
    }

    #[test]
    fn stale_proof_is_not_replayable() {
        let (robot, _, mut reg, doc) = robot_and_operator();
        let changes = DidChanges::default().set("vin", "1HGCM");
        let proof = DidProof::sign_update(&robot, &doc, &changes);
        reg.update_did(&doc.did, &changes, &proof).unwrap();
        assert_eq!(reg.update_did(&doc.did, &changes, &proof), Err(DidError::Unauthorized));
    }

    #[test]
    fn deactivated_is_final() {
        let (robot, _, mut reg, doc) = robot_and_operator();
        let proof = DidProof::sign_deactivate(&robot, &doc);
        let dead = reg.deactivate_did(&doc.did, &proof).unwrap();
        assert!(!dead.active);
        let changes = DidChanges::default().set("a", "b");
        let proof = DidProof::sign_update(&robot, &dead, &changes);
        assert!(matches!(reg.update_did(&doc.did, &changes, &proof), Err(DidError::Deactivated(_))));
        assert!(matches!(
            reg.deactivate_did(&doc.did, &DidProof::sign_deactivate(&robot, &dead)),
            Err(DidError::Deactivated(_))
        ));
    }

    #[test]
    fn unknown_did() {
        let reg = DidRegistry::new();
        assert!(matches!(reg.resolve_did("did:rbn:0x00"), Err(DidError::NotFound(_))));
    }

    #[test]
    fn canonical_json_field_order() {
        let (_, _, _, doc) = robot_and_operator();
        let json = doc.to_canonical_json();
        let keys = ["\"did\"", "\"controller\"", "\"public_key\"", "\"attributes\"", "\"service_endpoints\"", "\"active\"", "\"version\""];
        let positions: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{json}");
        let back: DidDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.hash(), doc.hash());
    }

    proptest! {
        #[test]
        fn versions_are_gapless(updates in proptest::collection::vec((any::<bool>(), "[a-z]{1,4}", "[a-z]{0,4}"), 0..12)) {
            let (robot, operator, mut reg, doc) = robot_and_operator();
            for (expected, (by_controller, k, v)) in (2u64..).zip(updates) {
                let current = reg.resolve_did(&doc.did).unwrap();
                let changes = DidChanges::default().set(&k, &v);
                let signer = if by_controller { &operator } else { &robot };
                let proof = DidProof::sign_update(signer, &current, &changes);
                let next = reg.update_did(&doc.did, &changes, &proof).unwrap();
                prop_assert_eq!(next.version, expected);
            }
        }
    }
}
