//! Serialization helpers: big integers as decimal strings, relation
//! streams and the sparse matrix dump.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Serde adapter writing a `BigUint` as a decimal string.
pub mod biguint_str {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(D::Error::custom)
    }
}

/// Serde adapter writing a `BigInt` as a decimal string.
pub mod bigint_str {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(D::Error::custom)
    }
}

/// Serde adapter for a list of `BigInt`s as decimal strings.
pub mod bigint_vec_str {
    use num_bigint::BigInt;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_str_radix(10))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| s.trim().parse().map_err(D::Error::custom)).collect()
    }
}

/// Serde adapter for a list of `BigUint`s as decimal strings.
pub mod biguint_vec_str {
    use num_bigint::BigUint;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_str_radix(10))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| s.trim().parse().map_err(D::Error::custom)).collect()
    }
}

/// Write a header object followed by one JSON object per line.
pub fn write_jsonl<H: serde::Serialize, T: serde::Serialize, W: Write>(
    mut w: W,
    header: &H,
    items: &[T],
) -> Result<()> {
    serde_json::to_writer(&mut w, header)?;
    writeln!(w)?;
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Read a stream written by [`write_jsonl`].
pub fn read_jsonl<H, T, R>(r: R) -> Result<(H, Vec<T>)>
where
    H: serde::de::DeserializeOwned,
    T: serde::de::DeserializeOwned,
    R: BufRead,
{
    let mut lines = r.lines().filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()));
    let header = match lines.next() {
        Some(line) => serde_json::from_str(&line?)?,
        None => return Err(Error::Parse("empty relation stream".into())),
    };
    let mut items = Vec::new();
    for line in lines {
        items.push(serde_json::from_str(&line?)?);
    }
    Ok((header, items))
}
