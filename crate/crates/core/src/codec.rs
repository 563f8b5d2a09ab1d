//! Canonical byte and JSON encodings shared by every signed or hashed object.
//!
//! Binary layout (all integers big-endian):
//!
//! | item            | bytes                                   |
//! |-----------------|-----------------------------------------|
//! | `u8` / `u64`    | 1 / 8 bytes                             |
//! | byte string     | `u32` length, then the bytes            |
//! | text            | `u32` length, then UTF-8 bytes          |
//! | fixed array     | raw bytes, no prefix                    |
//!
//! [`Value`] is tagged with one byte before its body:
//! `0x01` u64, `0x02` bool (one byte, 0 or 1), `0x03` text, `0x04` address
//! (20 raw bytes), `0x05` byte string, `0x06` list (`u32` count, then items).
//!
//! JSON forms use lowercase hex for every hash, key, signature and address,
//! and parsing rejects anything that does not re-encode to the same text.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::crypto_identity::Address;

/// A SHA-256 digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Hash32(pub [u8; 32]);

impl Hash32 {
    pub const ZERO: Hash32 = Hash32([0u8; 32]);

    pub fn digest(bytes: &[u8]) -> Hash32 {
        Hash32(Sha256::digest(bytes).into())
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn leading_zero_bits(&self) -> u32 {
        let mut bits = 0;
        for b in self.0 {
            if b == 0 {
                bits += 8;
            } else {
                bits += b.leading_zeros();
                break;
            }
        }
        bits
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Hash32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hash32({})", self.to_hex())
    }
}

impl fmt::Display for Hash32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Hash32 {
    type Err = HexError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Hash32(decode_fixed(s)?))
    }
}

impl Serialize for Hash32 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Hash32 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HexError {
    #[error("hex string must be lowercase")]
    NotLowercase,
    #[error("invalid hex: {0}")]
    Invalid(String),
    #[error("expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
}

/// Strict lowercase hex decoding.
pub fn decode_hex(s: &str) -> Result<Vec<u8>, HexError> {
    if s.bytes().any(|b| b.is_ascii_uppercase()) {
        return Err(HexError::NotLowercase);
    }
    hex::decode(s).map_err(|e| HexError::Invalid(e.to_string()))
}

pub fn decode_fixed<const N: usize>(s: &str) -> Result<[u8; N], HexError> {
    let v = decode_hex(s)?;
    v.as_slice()
        .try_into()
        .map_err(|_| HexError::Length { expected: N, got: v.len() })
}

/// Serde adapter for byte vectors as lowercase hex strings.
pub mod hex_bytes {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        decode_hex(&s).map_err(de::Error::custom)
    }
}

/// Serde adapter for fixed arrays as lowercase hex strings.
pub mod hex_array {
    use super::*;

    pub fn serialize<S: Serializer, const N: usize>(v: &[u8; N], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(d: D) -> Result<[u8; N], D::Error> {
        let s = String::deserialize(d)?;
        decode_fixed(&s).map_err(de::Error::custom)
    }
}

/// Append-only canonical binary writer.
#[derive(Default, Debug, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts an encoding with a domain-separation tag.
    pub fn with_domain(tag: &str) -> Self {
        let mut e = Self::new();
        e.str(tag);
        e
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.u8(v as u8)
    }

    pub fn raw(&mut self, v: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(v);
        self
    }

    pub fn bytes(&mut self, v: &[u8]) -> &mut Self {
        self.u32(v.len() as u32);
        self.raw(v)
    }

    pub fn str(&mut self, v: &str) -> &mut Self {
        self.bytes(v.as_bytes())
    }

    pub fn opt_address(&mut self, v: Option<&Address>) -> &mut Self {
        match v {
            Some(a) => self.u8(1).raw(a.as_bytes()),
            None => self.u8(0),
        }
    }

    pub fn value(&mut self, v: &Value) -> &mut Self {
        v.encode_into(self);
        self
    }

    pub fn values(&mut self, vs: &[Value]) -> &mut Self {
        self.u32(vs.len() as u32);
        for v in vs {
            self.value(v);
        }
        self
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.buf
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("unexpected end of input")]
    Eof,
    #[error("unknown value tag 0x{0:02x}")]
    BadTag(u8),
    #[error("invalid utf-8 text")]
    Utf8,
    #[error("invalid boolean byte {0}")]
    BadBool(u8),
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

/// Reader matching [`Encoder`].
pub struct Decoder<'a> {
    input: &'a [u8],
}

impl<'a> Decoder<'a> {
    pub fn new(input: &'a [u8]) -> Self {
        Decoder { input }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.input.len() < n {
            return Err(DecodeError::Eof);
        }
        let (head, tail) = self.input.split_at(n);
        self.input = tail;
        Ok(head)
    }

    pub fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, DecodeError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>, DecodeError> {
        let n = self.u32()? as usize;
        Ok(self.take(n)?.to_vec())
    }

    pub fn str(&mut self) -> Result<String, DecodeError> {
        String::from_utf8(self.bytes()?).map_err(|_| DecodeError::Utf8)
    }

    pub fn value(&mut self) -> Result<Value, DecodeError> {
        match self.u8()? {
            0x01 => Ok(Value::U64(self.u64()?)),
            0x02 => match self.u8()? {
                0 => Ok(Value::Bool(false)),
                1 => Ok(Value::Bool(true)),
                b => Err(DecodeError::BadBool(b)),
            },
            0x03 => Ok(Value::Str(self.str()?)),
            0x04 => Ok(Value::Addr(Address(self.take(20)?.try_into().unwrap()))),
            0x05 => Ok(Value::Bytes(self.bytes()?)),
            0x06 => {
                let n = self.u32()?;
                let mut items = Vec::new();
                for _ in 0..n {
                    items.push(self.value()?);
                }
                Ok(Value::List(items))
            }
            t => Err(DecodeError::BadTag(t)),
        }
    }

    pub fn values(&mut self) -> Result<Vec<Value>, DecodeError> {
        let n = self.u32()?;
        (0..n).map(|_| self.value()).collect()
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        match self.input.len() {
            0 => Ok(()),
            n => Err(DecodeError::Trailing(n)),
        }
    }
}

/// A canonical argument / event-field value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    U64(u64),
    Bool(bool),
    Str(String),
    Addr(Address),
    Bytes(#[serde(with = "hex_bytes")] Vec<u8>),
    List(Vec<Value>),
}

impl Value {
    pub fn encode_into(&self, e: &mut Encoder) {
        match self {
            Value::U64(v) => {
                e.u8(0x01).u64(*v);
            }
            Value::Bool(v) => {
                e.u8(0x02).bool(*v);
            }
            Value::Str(v) => {
                e.u8(0x03).str(v);
            }
            Value::Addr(a) => {
                e.u8(0x04).raw(a.as_bytes());
            }
            Value::Bytes(b) => {
                e.u8(0x05).bytes(b);
            }
            Value::List(items) => {
                e.u8(0x06).u32(items.len() as u32);
                for it in items {
                    it.encode_into(e);
                }
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.encode_into(&mut e);
        e.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Value, DecodeError> {
        let mut d = Decoder::new(bytes);
        let v = d.value()?;
        d.finish()?;
        Ok(v)
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Value::U64(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_addr(&self) -> Option<Address> {
        match self {
            Value::Addr(a) => Some(*a),
            _ => None,
        }
    }

    pub fn as_bytes(&self) -> Option<&[u8]> {
        match self {
            Value::Bytes(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(items) => Some(items),
            _ => None,
        }
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::U64(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl From<Address> for Value {
    fn from(v: Address) -> Self {
        Value::Addr(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::U64(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Str(v) => write!(f, "{v:?}"),
            Value::Addr(a) => write!(f, "{a}"),
            Value::Bytes(b) => write!(f, "0x{}", hex::encode(b)),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str("]")
            }
        }
    }
}
