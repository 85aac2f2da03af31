//! Textual hybrid intermediate representation.
//!
//! A program is a list of procedures; each procedure declares its qubit
//! count and typed classical variables, then a sequence of labelled basic
//! blocks. Blocks hold quantum, classical and output instructions and end
//! in exactly one branch or return terminator.
//!
//! ```text
//! proc main() qubits 1 entry
//!   var d: bit
//! entry:
//!   h q0
//!   mz q0 -> d
//!   output d
//!   ret
//! end
//! ```

mod cfg;
mod check;
mod emit;
mod lower;
mod parse;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cfg::{Cfg, CfgEdge, EdgeKind};
pub use lower::{lower_to_native, LowerError};
pub use parse::parse;
pub use validate::{validate, Diagnostic, DiagnosticCode, Location, Profile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HirError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("semantic error in {procedure}: {message}")]
    Semantic { procedure: String, message: String },
}

impl HirError {
    pub(crate) fn semantic(procedure: &str, message: impl Into<String>) -> Self {
        HirError::Semantic { procedure: procedure.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Bit,
    Int18,
    Fixed,
}

impl VarKind {
    pub fn name(self) -> &'static str {
        match self {
            VarKind::Bit => "bit",
            VarKind::Int18 => "int18",
            VarKind::Fixed => "fixed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "bit" => Some(VarKind::Bit),
            "int18" => Some(VarKind::Int18),
            "fixed" => Some(VarKind::Fixed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    pub init: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qubit(pub u32);

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// A variable reference or a numeric literal. Literals take the kind of the
/// slot they feed; angle literals are in units of pi.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Var(String),
    Lit(f64),
}

impl Operand {
    pub fn var(name: &str) -> Self {
        Operand::Var(name.to_string())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Operand::Var(v) => Some(v),
            Operand::Lit(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    X,
    Sx,
    Rz,
    Crz,
    Eswap,
    Cnot,
}

impl GateKind {
    pub const ALL: [GateKind; 7] =
        [GateKind::H, GateKind::X, GateKind::Sx, GateKind::Rz, GateKind::Crz, GateKind::Eswap, GateKind::Cnot];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Sx => "sx",
            GateKind::Rz => "rz",
            GateKind::Crz => "crz",
            GateKind::Eswap => "eswap",
            GateKind::Cnot => "cnot",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        GateKind::ALL.into_iter().find(|g| g.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Sx | GateKind::Rz => 1,
            GateKind::Crz | GateKind::Eswap | GateKind::Cnot => 2,
        }
    }

    pub fn takes_angle(self) -> bool {
        matches!(self, GateKind::Rz | GateKind::Crz | GateKind::Eswap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassicalOp {
    Mov,
    Add,
    Sub,
    Mul,
    Div,
    Recip,
    Neg,
    CmpEq,
    CmpLt,
    Select,
}

impl ClassicalOp {
    pub const ALL: [ClassicalOp; 10] = [
        ClassicalOp::Mov,
        ClassicalOp::Add,
        ClassicalOp::Sub,
        ClassicalOp::Mul,
        ClassicalOp::Div,
        ClassicalOp::Recip,
        ClassicalOp::Neg,
        ClassicalOp::CmpEq,
        ClassicalOp::CmpLt,
        ClassicalOp::Select,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassicalOp::Mov => "mov",
            ClassicalOp::Add => "add",
            ClassicalOp::Sub => "sub",
            ClassicalOp::Mul => "mul",
            ClassicalOp::Div => "div",
            ClassicalOp::Recip => "recip",
            ClassicalOp::Neg => "neg",
            ClassicalOp::CmpEq => "cmp_eq",
            ClassicalOp::CmpLt => "cmp_lt",
            ClassicalOp::Select => "select",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ClassicalOp::ALL.into_iter().find(|op| op.name() == name)
    }

    /// Number of source operands after the destination.
    pub fn source_count(self) -> usize {
        match self {
            ClassicalOp::Mov | ClassicalOp::Recip | ClassicalOp::Neg => 1,
            ClassicalOp::Select => 3,
            _ => 2,
        }
    }
}

/// Marks a measurement as one phase-estimation iteration; the named
/// registers are copied into the shot's evidence alongside the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PeTag {
    pub t: String,
    pub phi_inv: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Gate {
        gate: GateKind,
        angle: Option<Operand>,
        qubits: Vec<Qubit>,
    },
    Measure {
        qubit: Qubit,
        dest: String,
        tag: Option<PeTag>,
    },
    Reset {
        qubit: Qubit,
    },
    /// Hardware multi-qubit reset; always acts on the whole register.
    ActiveReset,
    Classical {
        op: ClassicalOp,
        dest: String,
        args: Vec<Operand>,
    },
    Output {
        var: String,
    },
}

impl Instruction {
    pub fn gate(gate: GateKind, qubits: &[u32]) -> Self {
        Instruction::Gate { gate, angle: None, qubits: qubits.iter().map(|&q| Qubit(q)).collect() }
    }

    pub fn rotation(gate: GateKind, angle: Operand, qubits: &[u32]) -> Self {
        Instruction::Gate { gate, angle: Some(angle), qubits: qubits.iter().map(|&q| Qubit(q)).collect() }
    }

    pub fn classical(op: ClassicalOp, dest: &str, args: Vec<Operand>) -> Self {
        Instruction::Classical { op, dest: dest.to_string(), args }
    }

    pub fn measure(qubit: u32, dest: &str) -> Self {
        Instruction::Measure { qubit: Qubit(qubit), dest: dest.to_string(), tag: None }
    }

    /// Name used for profile admission checks.
    pub fn op_name(&self) -> &'static str {
        match self {
            Instruction::Gate { gate, .. } => gate.name(),
            Instruction::Measure { .. } => "mz",
            Instruction::Reset { .. } => "reset",
            Instruction::ActiveReset => "active_reset",
            Instruction::Classical { op, .. } => op.name(),
            Instruction::Output { .. } => "output",
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(
            self,
            Instruction::Gate { .. }
                | Instruction::Measure { .. }
                | Instruction::Reset { .. }
                | Instruction::ActiveReset
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Terminator {
    Branch(String),
    CondBranch { cond: String, then_label: String, else_label: String },
    Return(Vec<String>),
}

impl Terminator {
    pub fn targets(&self) -> Vec<&str> {
        match self {
            Terminator::Branch(l) => vec![l],
            Terminator::CondBranch { then_label, else_label, .. } => vec![then_label, else_label],
            Terminator::Return(_) => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicBlock {
    pub label: String,
    pub instructions: Vec<Instruction>,
    pub terminator: Terminator,
}

impl BasicBlock {
    pub fn new(label: &str, instructions: Vec<Instruction>, terminator: Terminator) -> Self {
        BasicBlock { label: label.to_string(), instructions, terminator }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Procedure {
    pub name: String,
    /// Run-time inputs, bound by the executor before the first block runs.
    pub params: Vec<(String, VarKind)>,
    pub qubits: u32,
    pub vars: Vec<VarDecl>,
    /// The first block is the procedure's entry point.
    pub blocks: Vec<BasicBlock>,
}

impl Procedure {
    pub fn kind_of(&self, name: &str) -> Option<VarKind> {
        self.params
            .iter()
            .find(|(p, _)| p == name)
            .map(|(_, k)| *k)
            .or_else(|| self.vars.iter().find(|v| v.name == name).map(|v| v.kind))
    }

    pub fn block(&self, label: &str) -> Option<&BasicBlock> {
        self.blocks.iter().find(|b| b.label == label)
    }

    /// Adds a variable declaration, returning false if the name is taken.
    pub fn declare(&mut self, name: &str, kind: VarKind, init: Option<f64>) -> bool {
        if self.kind_of(name).is_some() {
            return false;
        }
        self.vars.push(VarDecl { name: name.to_string(), kind, init });
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridProgram {
    pub procedures: Vec<Procedure>,
    pub entry: String,
}

impl HybridProgram {
    /// Wraps a single procedure as the program entry and checks it.
    pub fn single(procedure: Procedure) -> Result<Self, HirError> {
        let program = HybridProgram { entry: procedure.name.clone(), procedures: vec![procedure] };
        program.check()?;
        Ok(program)
    }

    pub fn entry_procedure(&self) -> &Procedure {
        self.procedures.iter().find(|p| p.name == self.entry).expect("checked program has an entry procedure")
    }

    pub fn entry_procedure_mut(&mut self) -> &mut Procedure {
        let entry = self.entry.clone();
        self.procedures.iter_mut().find(|p| p.name == entry).expect("checked program has an entry procedure")
    }

    /// Structural and typing checks shared by the parser and the builders.
    pub fn check(&self) -> Result<(), HirError> {
        check::check_program(self)
    }

    /// Canonical text form; `parse(&p.emit())` reproduces `p`.
    pub fn emit(&self) -> String {
        emit::emit_program(self)
    }

    pub fn cfg(&self) -> Cfg {
        cfg::build(self.entry_procedure())
    }

    pub fn instruction_count(&self) -> usize {
        self.procedures.iter().flat_map(|p| &p.blocks).map(|b| b.instructions.len()).sum()
    }
}

impl fmt::Display for HybridProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.emit())
    }
}
