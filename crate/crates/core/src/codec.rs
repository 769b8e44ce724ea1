//! Bit-exact text encodings for real vectors.

use crate::error::{Error, Result};

/// Little-endian IEEE-754 bytes of every value, base-16.
pub(crate) fn encode_f64s(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    hex::encode(bytes)
}

pub(crate) fn decode_f64s(text: &str) -> Result<Vec<f64>> {
    let bytes = hex::decode(text.trim()).map_err(|e| Error::Format(format!("weight dump: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!(
            "weight dump length {} is not a multiple of 8 bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Serde adapter storing a `Vec<f64>` as a hex string.
pub(crate) mod hex_f64s {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode_f64s(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let text = String::deserialize(d)?;
        super::decode_f64s(&text).map_err(serde::de::Error::custom)
    }
}
