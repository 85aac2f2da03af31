use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::Value;

/// Serialized register value. Fixed-point values carry both the raw word and
/// its decoded decimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Fixed { raw: i32, value: f64 },
    Bit(bool),
    Int(i64),
    Real(f64),
}

impl Scalar {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Scalar::Fixed { value, .. } => value,
            Scalar::Bit(b) => b as u8 as f64,
            Scalar::Int(i) => i as f64,
            Scalar::Real(x) => x,
        }
    }
}

impl From<Value> for Scalar {
    fn from(v: Value) -> Self {
        match v {
            Value::Bit(b) => Scalar::Bit(b),
            Value::Int(i) => Scalar::Int(i),
            Value::Int18(i) => Scalar::Int(i.get() as i64),
            Value::Real(x) => Scalar::Real(x),
            Value::Fixed(x) => Scalar::Fixed { raw: x.raw(), value: x.to_f64() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: Scalar,
}

/// One phase-estimation datum: evolution time, inversion angle (units of pi) and outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEntry {
    pub t: Scalar,
    pub phi_inv: Scalar,
    pub d: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: u64,
    pub seed: u64,
    pub outputs: Vec<NamedValue>,
    pub evidence: Vec<EvidenceEntry>,
    /// Tagged phase-estimation measurements executed.
    pub iterations: u64,
    /// Instructions and terminators executed.
    pub steps: u64,
}

impl ShotRecord {
    /// Last output with the given name.
    pub fn output(&self, name: &str) -> Option<Scalar> {
        self.outputs.iter().rev().find(|o| o.name == name).map(|o| o.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("shot records always serialize")
    }
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[ShotRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_json())?;
    }
    out.flush()
}

/// Reads one record per nonblank line.
pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<Vec<ShotRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        out.push(record);
    }
    Ok(out)
}
