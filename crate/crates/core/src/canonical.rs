//! Canonical JSON: sorted object keys, no insignificant whitespace.
//!
//! `serde_json::Value` keeps objects in a `BTreeMap`, so a round trip
//! through it sorts every key. Files get a single trailing LF.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_string(&v).expect("JSON value serializes")
}

pub fn to_canonical_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    to_canonical_string(value).into_bytes()
}

pub fn write_canonical<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_canonical_string(value);
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Serde helper for thresholds: non-finite values travel as `null`.
pub(crate) mod threshold {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
