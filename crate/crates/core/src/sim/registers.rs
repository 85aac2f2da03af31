use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{ClassicalMode, SimError};
use crate::fixedpoint::{FixedQ216, Int18, Int18 as I18};
use crate::hir::{ClassicalOp, VarKind};

/// A classical register value. `Int`/`Real` are used in exact mode,
/// `Int18`/`Fixed` in fixed-point mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Bit(bool),
    Int(i64),
    Int18(Int18),
    Real(f64),
    Fixed(FixedQ216),
}

impl Value {
    pub fn zero(kind: VarKind, mode: ClassicalMode) -> Value {
        match (kind, mode) {
            (VarKind::Bit, _) => Value::Bit(false),
            (VarKind::Int18, ClassicalMode::ExactReal) => Value::Int(0),
            (VarKind::Int18, ClassicalMode::FixedPoint) => Value::Int18(Int18::ZERO),
            (VarKind::Fixed, ClassicalMode::ExactReal) => Value::Real(0.0),
            (VarKind::Fixed, ClassicalMode::FixedPoint) => Value::Fixed(FixedQ216::ZERO),
        }
    }

    /// Converts a literal for a slot of `kind`. Fixed-point mode rejects values
    /// outside the word formats; this is the load-time range check.
    pub fn from_literal(value: f64, kind: VarKind, mode: ClassicalMode) -> Result<Value, SimError> {
        Ok(match (kind, mode) {
            (VarKind::Bit, _) => Value::Bit(value != 0.0),
            (VarKind::Int18, ClassicalMode::ExactReal) => Value::Int(value as i64),
            (VarKind::Int18, ClassicalMode::FixedPoint) => Value::Int18(Int18::checked(value as i64)?),
            (VarKind::Fixed, ClassicalMode::ExactReal) => Value::Real(value),
            (VarKind::Fixed, ClassicalMode::FixedPoint) => Value::Fixed(FixedQ216::encode(value)?),
        })
    }

    pub fn kind(&self) -> VarKind {
        match self {
            Value::Bit(_) => VarKind::Bit,
            Value::Int(_) | Value::Int18(_) => VarKind::Int18,
            Value::Real(_) | Value::Fixed(_) => VarKind::Fixed,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Bit(b) => b as u8 as f64,
            Value::Int(i) => i as f64,
            Value::Int18(i) => i.get() as f64,
            Value::Real(x) => x,
            Value::Fixed(x) => x.to_f64(),
        }
    }

    pub fn as_bit(&self) -> Option<bool> {
        match *self {
            Value::Bit(b) => Some(b),
            _ => None,
        }
    }

    /// Reads an angle register (units of pi) as radians.
    pub fn to_radians(&self) -> f64 {
        match *self {
            Value::Fixed(x) => x.to_radians(),
            other => other.as_f64() * PI,
        }
    }
}

fn mismatch(op: ClassicalOp) -> SimError {
    SimError::KindMismatch(op.name().to_string())
}

/// Evaluates one classical operation on already-loaded operand values.
pub(crate) fn eval(op: ClassicalOp, args: &[Value]) -> Result<Value, SimError> {
    use Value::*;
    let binary = |f_int: fn(i64, i64) -> i64,
                  f_i18: fn(I18, I18) -> I18,
                  f_real: fn(f64, f64) -> f64,
                  f_fix: fn(FixedQ216, FixedQ216) -> FixedQ216| {
        Ok(match (args[0], args[1]) {
            (Int(a), Int(b)) => Int(f_int(a, b)),
            (Int18(a), Int18(b)) => Int18(f_i18(a, b)),
            (Real(a), Real(b)) => Real(f_real(a, b)),
            (Fixed(a), Fixed(b)) => Fixed(f_fix(a, b)),
            _ => return Err(mismatch(op)),
        })
    };
    match op {
        ClassicalOp::Mov => Ok(args[0]),
        ClassicalOp::Add => binary(i64::wrapping_add, |a, b| a + b, |a, b| a + b, |a, b| a + b),
        ClassicalOp::Sub => binary(i64::wrapping_sub, |a, b| a - b, |a, b| a - b, |a, b| a - b),
        ClassicalOp::Mul => binary(i64::wrapping_mul, |a, b| a * b, |a, b| a * b, |a, b| a * b),
        ClassicalOp::Div => match (args[0], args[1]) {
            (Real(_), Real(0.0)) => Err(SimError::DivideByZero),
            (Real(a), Real(b)) => Ok(Real(a / b)),
            (Fixed(a), Fixed(b)) => Ok(Fixed(a.wrapping_div(b)?)),
            _ => Err(mismatch(op)),
        },
        ClassicalOp::Recip => match args[0] {
            Real(0.0) => Err(SimError::DivideByZero),
            Real(a) => Ok(Real(1.0 / a)),
            Fixed(a) => Ok(Fixed(a.recip()?)),
            _ => Err(mismatch(op)),
        },
        ClassicalOp::Neg => match args[0] {
            Int(a) => Ok(Int(a.wrapping_neg())),
            Int18(a) => Ok(Int18(-a)),
            Real(a) => Ok(Real(-a)),
            Fixed(a) => Ok(Fixed(-a)),
            Bit(_) => Err(mismatch(op)),
        },
        ClassicalOp::CmpEq => {
            if args[0].kind() != args[1].kind() {
                return Err(mismatch(op));
            }
            Ok(Bit(args[0] == args[1]))
        }
        ClassicalOp::CmpLt => Ok(Bit(match (args[0], args[1]) {
            (Int(a), Int(b)) => a < b,
            (Int18(a), Int18(b)) => a < b,
            (Real(a), Real(b)) => a < b,
            (Fixed(a), Fixed(b)) => a < b,
            _ => return Err(mismatch(op)),
        })),
        ClassicalOp::Select => match args[0] {
            Bit(c) => Ok(if c { args[1] } else { args[2] }),
            _ => Err(mismatch(op)),
        },
    }
}

#[derive(Debug)]
pub(crate) struct Layout {
    pub names: Vec<String>,
    pub kinds: Vec<VarKind>,
    pub index: HashMap<String, usize>,
}

/// Named classical registers of one shot.
#[derive(Debug, Clone)]
pub struct RegisterFile {
    layout: Arc<Layout>,
    mode: ClassicalMode,
    values: Vec<Value>,
}

impl RegisterFile {
    /// Zero-initialized registers for the given declarations.
    pub fn new<'a>(decls: impl IntoIterator<Item = (&'a str, VarKind)>, mode: ClassicalMode) -> Self {
        let (names, kinds): (Vec<String>, Vec<VarKind>) = decls.into_iter().map(|(n, k)| (n.to_string(), k)).unzip();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let values = kinds.iter().map(|&k| Value::zero(k, mode)).collect();
        RegisterFile { layout: Arc::new(Layout { names, kinds, index }), mode, values }
    }

    pub(crate) fn from_layout(layout: Arc<Layout>, mode: ClassicalMode) -> Self {
        let values = layout.kinds.iter().map(|&k| Value::zero(k, mode)).collect();
        RegisterFile { layout, mode, values }
    }

    pub fn mode(&self) -> ClassicalMode {
        self.mode
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.layout.index.get(name).copied()
    }

    pub fn kind(&self, name: &str) -> Option<VarKind> {
        self.slot(name).map(|s| self.layout.kinds[s])
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.slot(name).map(|s| self.values[s])
    }

    pub fn set(&mut self, name: &str, value: Value) -> Result<(), SimError> {
        let slot = self.slot(name).ok_or_else(|| SimError::UnknownVariable(name.to_string()))?;
        if self.layout.kinds[slot] != value.kind() {
            return Err(SimError::KindMismatch(name.to_string()));
        }
        self.values[slot] = value;
        Ok(())
    }

    pub(crate) fn load(&self, slot: usize) -> Value {
        self.values[slot]
    }

    pub(crate) fn store(&mut self, slot: usize, value: Value) {
        self.values[slot] = value;
    }

    pub fn name(&self, slot: usize) -> &str {
        &self.layout.names[slot]
    }
}
