//! Serde helpers writing exact numbers as decimal strings.

use crate::numth::{parse_rat, rat_string, Int, Rat};
use serde::{de::Error, Deserialize, Deserializer, Serializer};

pub fn ser_rat<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_string(r))
}

pub fn de_rat<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
    let s = String::deserialize(d)?;
    parse_rat(&s).map_err(D::Error::custom)
}

pub fn ser_int<S: Serializer>(n: &Int, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

pub fn de_int<'de, D: Deserializer<'de>>(d: D) -> Result<Int, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(D::Error::custom)
}

/// Floats rendered with a fixed number of decimals so output is stable.
pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.6}"))
}

pub fn de_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(D::Error::custom)
}
