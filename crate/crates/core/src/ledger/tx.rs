use serde::{Deserialize, Serialize};

use crate::codec::{Encoder, Hash32, Value};
use crate::crypto_identity::{verify, Address, KeyPair, PublicKey, Signature};

/// Contract interaction carried by a transaction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Payload {
    Call { method: String, args: Vec<Value> },
    Deploy { kind: String, args: Vec<Value> },
}

impl Payload {
    pub fn call(method: &str, args: Vec<Value>) -> Self {
        Payload::Call { method: method.to_string(), args }
    }

    pub fn deploy(kind: &str, args: Vec<Value>) -> Self {
        Payload::Deploy { kind: kind.to_string(), args }
    }

    /// `0x01 name args` for calls, `0x02 kind args` for deploys.
    pub fn encode_into(&self, e: &mut Encoder) {
        match self {
            Payload::Call { method, args } => {
                e.u8(0x01).str(method).values(args);
            }
            Payload::Deploy { kind, args } => {
                e.u8(0x02).str(kind).values(args);
            }
        }
    }
}

/// A transfer or contract interaction authorized by the sender's key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignedTransaction {
    pub from: Address,
    pub to: Address,
    pub nonce: u64,
    pub amount: u64,
    pub payload: Option<Payload>,
    /// Sender key; `from` must be its address.
    pub public_key: PublicKey,
    pub signature: Signature,
}

impl SignedTransaction {
    /// Canonical bytes covered by the signature:
    /// domain, from, to, nonce, amount, payload flag and payload.
    pub fn signing_bytes(from: &Address, to: &Address, nonce: u64, amount: u64, payload: Option<&Payload>) -> Vec<u8> {
        let mut e = Encoder::with_domain("rbn-tx-v1");
        e.raw(from.as_bytes()).raw(to.as_bytes()).u64(nonce).u64(amount);
        match payload {
            None => {
                e.u8(0);
            }
            Some(p) => {
                e.u8(1);
                p.encode_into(&mut e);
            }
        }
        e.finish()
    }

    pub fn new_signed(keys: &KeyPair, to: Address, nonce: u64, amount: u64, payload: Option<Payload>) -> Self {
        let from = keys.address();
        let msg = Self::signing_bytes(&from, &to, nonce, amount, payload.as_ref());
        SignedTransaction {
            from,
            to,
            nonce,
            amount,
            payload,
            public_key: keys.public_key(),
            signature: keys.sign(&msg),
        }
    }

    pub fn transfer(keys: &KeyPair, to: Address, nonce: u64, amount: u64) -> Self {
        Self::new_signed(keys, to, nonce, amount, None)
    }

    pub fn call(keys: &KeyPair, contract: Address, nonce: u64, amount: u64, method: &str, args: Vec<Value>) -> Self {
        Self::new_signed(keys, contract, nonce, amount, Some(Payload::call(method, args)))
    }

    /// Deploys go to the zero address.
    pub fn deploy(keys: &KeyPair, nonce: u64, amount: u64, kind: &str, args: Vec<Value>) -> Self {
        Self::new_signed(keys, Address::ZERO, nonce, amount, Some(Payload::deploy(kind, args)))
    }

    /// Signature valid and `from` derived from the carried key.
    pub fn verify_signature(&self) -> bool {
        if Address::from_public_key(&self.public_key) != self.from {
            return false;
        }
        let msg = Self::signing_bytes(&self.from, &self.to, self.nonce, self.amount, self.payload.as_ref());
        verify(&self.signature, &msg, self.public_key.as_bytes())
    }

    pub fn encode_into(&self, e: &mut Encoder) {
        e.raw(&Self::signing_bytes(&self.from, &self.to, self.nonce, self.amount, self.payload.as_ref()));
        e.raw(self.public_key.as_bytes()).raw(self.signature.as_bytes());
    }

    pub fn hash(&self) -> Hash32 {
        let mut e = Encoder::new();
        self.encode_into(&mut e);
        Hash32::digest(e.as_slice())
    }
}
