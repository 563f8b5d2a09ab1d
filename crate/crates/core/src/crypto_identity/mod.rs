//! Keys, addresses, signatures and the decentralized-identifier registry.
//!
//! Keys are Ed25519 derived deterministically from a 32-byte seed. An address
//! is the last 20 bytes of `SHA-256(public_key)`, displayed as `0x` + lowercase
//! hex.

mod did;

pub use did::{DidChanges, DidDocument, DidError, DidProof, DidRegistry, DID_METHOD_PREFIX};

use std::fmt;
use std::str::FromStr;

use ed25519_dalek::{Signer, SigningKey, VerifyingKey};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::codec::{decode_fixed, hex_array, Hash32, HexError};

pub const SEED_LEN: usize = 32;
pub const PUBLIC_KEY_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("seed must be {SEED_LEN} bytes, got {0}")]
    SeedLength(usize),
    #[error("malformed public key")]
    KeyFormat,
}

/// An Ed25519 key pair. The public key is a pure function of the secret key.
#[derive(Clone)]
pub struct KeyPair {
    signing: SigningKey,
}

impl KeyPair {
    pub fn secret_key(&self) -> [u8; SEED_LEN] {
        self.signing.to_bytes()
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey(self.signing.verifying_key().to_bytes())
    }

    pub fn address(&self) -> Address {
        Address::from_public_key(&self.public_key())
    }

    pub fn sign(&self, message: &[u8]) -> Signature {
        Signature(self.signing.sign(message).to_bytes())
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("public_key", &self.public_key())
            .finish_non_exhaustive()
    }
}

impl PartialEq for KeyPair {
    fn eq(&self, other: &Self) -> bool {
        self.secret_key() == other.secret_key()
    }
}

impl Eq for KeyPair {}

/// Builds the key pair for a 32-byte seed. Same seed, same keys.
pub fn generate_keypair(seed: &[u8]) -> Result<KeyPair, CryptoError> {
    let seed: [u8; SEED_LEN] = seed.try_into().map_err(|_| CryptoError::SeedLength(seed.len()))?;
    Ok(KeyPair { signing: SigningKey::from_bytes(&seed) })
}

/// Key pair from a seed derived by hashing a label; handy for tests and scenarios.
pub fn keypair_from_label(label: &str) -> KeyPair {
    let seed = Hash32::digest(label.as_bytes());
    generate_keypair(seed.as_bytes()).expect("digest is 32 bytes")
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PublicKey(#[serde(with = "hex_array")] pub [u8; PUBLIC_KEY_LEN]);

impl PublicKey {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, CryptoError> {
        let arr: [u8; PUBLIC_KEY_LEN] = bytes.try_into().map_err(|_| CryptoError::KeyFormat)?;
        VerifyingKey::from_bytes(&arr).map_err(|_| CryptoError::KeyFormat)?;
        Ok(PublicKey(arr))
    }

    pub fn as_bytes(&self) -> &[u8; PUBLIC_KEY_LEN] {
        &self.0
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", hex::encode(self.0))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature(#[serde(with = "hex_array")] pub [u8; SIGNATURE_LEN]);

impl Signature {
    pub fn as_bytes(&self) -> &[u8; SIGNATURE_LEN] {
        &self.0
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({}..)", hex::encode(&self.0[..8]))
    }
}

pub fn sign(message: &[u8], secret_key: &[u8; SEED_LEN]) -> Signature {
    KeyPair { signing: SigningKey::from_bytes(secret_key) }.sign(message)
}

/// Strict Ed25519 verification. Malformed keys or signatures verify as false.
pub fn verify(signature: &Signature, message: &[u8], public_key: &[u8]) -> bool {
    let Ok(arr) = <[u8; PUBLIC_KEY_LEN]>::try_from(public_key) else {
        return false;
    };
    let Ok(vk) = VerifyingKey::from_bytes(&arr) else {
        return false;
    };
    let sig = ed25519_dalek::Signature::from_bytes(&signature.0);
    vk.verify_strict(message, &sig).is_ok()
}

/// 20-byte account identifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub const ZERO: Address = Address([0u8; 20]);

    pub fn from_public_key(pk: &PublicKey) -> Address {
        Address::from_hash(&Hash32::digest(pk.as_bytes()))
    }

    /// Last 20 bytes of a digest.
    pub fn from_hash(h: &Hash32) -> Address {
        Address(h.0[12..].try_into().unwrap())
    }

    pub fn as_bytes(&self) -> &[u8; 20] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.0))
    }
}

/// Last 20 bytes of `SHA-256(public_key)`.
pub fn derive_address(public_key: &[u8]) -> Result<Address, CryptoError> {
    Ok(Address::from_public_key(&PublicKey::from_slice(public_key)?))
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Address {
    type Err = HexError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .strip_prefix("0x")
            .ok_or_else(|| HexError::Invalid("address must start with 0x".into()))?;
        Ok(Address(decode_fixed(body)?))
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}
