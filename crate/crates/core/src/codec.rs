//! Canonical binary encoding.
//!
//! Fields are written in declaration order, integers are fixed-width
//! big-endian, and every variable-length field (bytes, strings, sequences,
//! maps) carries a big-endian `u64` length prefix. Maps are `BTreeMap`s so
//! iteration order is canonical. This encoding is the input to every hash
//! and signature in the crate.

use bincode::Options;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::crypto::{sha256, Hash32};

#[derive(Debug, thiserror::Error)]
#[error("canonical decoding failed: {0}")]
pub struct DecodeError(String);

fn options() -> impl Options {
    bincode::DefaultOptions::new().with_big_endian().with_fixint_encoding().reject_trailing_bytes()
}

pub fn encode<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    options().serialize(value).expect("in-memory canonical encoding cannot fail")
}

pub fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, DecodeError> {
    options().deserialize(bytes).map_err(|e| DecodeError(e.to_string()))
}

/// SHA-256 of the canonical encoding.
pub fn digest<T: Serialize + ?Sized>(value: &T) -> Hash32 {
    sha256(&encode(value))
}
