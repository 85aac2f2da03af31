//! Shot-based executor for hybrid programs.
//!
//! One shot runs the entry procedure from its first block with a fresh
//! statevector, interleaving gates, mid-circuit measurements and classical
//! register updates in program order. Classical arithmetic is either plain
//! `f64`/`i64` ([`ClassicalMode::ExactReal`]) or the hardware word model
//! ([`ClassicalMode::FixedPoint`]). Every shot draws from its own ChaCha
//! stream selected by `(seed, shot_index)`, so results do not depend on how
//! shots are scheduled.

mod exec;
mod noise;
mod record;
mod registers;
mod state;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixedpoint::FixedError;

pub use exec::{run_shot, run_shots, step_classical, Executor, Schedule};
pub use noise::{apply_noise, readout, GateClass, NoiseModel, Pauli};
pub use record::{read_jsonl, write_jsonl, EvidenceEntry, NamedValue, Scalar, ShotRecord};
pub use registers::{RegisterFile, Value};
pub use state::{Gate, Matrix2, Matrix4, QuantumState, C64};

/// Default per-shot instruction budget.
pub const DEFAULT_STEP_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("qubit index {qubit} invalid for a {qubits}-qubit register")]
    BadQubitIndex { qubit: usize, qubits: usize },
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("division by zero")]
    DivideByZero,
    #[error("instruction budget of {0} steps exceeded")]
    StepLimitExceeded(u64),
    #[error("literal {value} does not fit variable kind {kind}")]
    LiteralOutOfRange { value: f64, kind: &'static str },
    #[error("missing run-time input `{0}`")]
    MissingInput(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("operand kinds do not match `{0}`")]
    KindMismatch(String),
    #[error("shots must be at least 1")]
    NoShots,
    #[error("shot {index}: {source}")]
    Shot { index: u64, source: Box<SimError> },
}

impl From<FixedError> for SimError {
    fn from(e: FixedError) -> Self {
        match e {
            FixedError::DivideByZero => SimError::DivideByZero,
            FixedError::OutOfRange(v) => SimError::LiteralOutOfRange { value: v, kind: "fixed" },
            FixedError::IntOutOfRange(v) => SimError::LiteralOutOfRange { value: v as f64, kind: "int18" },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalMode {
    ExactReal,
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecConfig {
    pub classical_mode: ClassicalMode,
    pub noise: Option<NoiseModel>,
    pub seed: u64,
    pub shots: u64,
    pub step_limit: u64,
    /// Values for the entry procedure's parameters.
    pub inputs: BTreeMap<String, f64>,
}

impl ExecConfig {
    pub fn new(classical_mode: ClassicalMode, seed: u64, shots: u64) -> Self {
        ExecConfig { classical_mode, noise: None, seed, shots, step_limit: DEFAULT_STEP_LIMIT, inputs: BTreeMap::new() }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_input(mut self, name: &str, value: f64) -> Self {
        self.inputs.insert(name.to_string(), value);
        self
    }
}
