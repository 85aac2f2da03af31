use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ClassicalOp, GateKind, HybridProgram, Instruction, Operand, Procedure, VarKind};
use crate::fixedpoint::{FixedQ216, Int18};

/// Constructs a backend admits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    /// Quantum operation names: gate names plus `mz`, `reset`, `active_reset`.
    pub gates: BTreeSet<String>,
    pub classical_ops: BTreeSet<String>,
    pub max_qubits: u32,
    pub static_qubits: bool,
    pub numeric_kinds: BTreeSet<VarKind>,
}

impl Profile {
    /// The control hardware: H, SX, X, virtual RZ and ESWAP plus measurement and reset.
    pub fn native() -> Self {
        Profile {
            name: "native".into(),
            gates: ["h", "sx", "x", "rz", "eswap", "mz", "reset", "active_reset"].map(String::from).into(),
            classical_ops: ClassicalOp::ALL.iter().map(|op| op.name().to_string()).collect(),
            max_qubits: 20,
            static_qubits: true,
            numeric_kinds: [VarKind::Bit, VarKind::Int18, VarKind::Fixed].into(),
        }
    }

    /// Everything the simulator can execute.
    pub fn permissive() -> Self {
        let mut p = Profile::native();
        p.name = "permissive".into();
        p.gates.extend(GateKind::ALL.iter().map(|g| g.name().to_string()));
        p
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "native" => Some(Profile::native()),
            "permissive" => Some(Profile::permissive()),
            _ => None,
        }
    }

    pub fn allows_gate(&self, name: &str) -> bool {
        self.gates.contains(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticCode {
    GateNotAllowed,
    ClassicalOpNotAllowed,
    KindNotAllowed,
    TooManyQubits,
    LiteralOutOfRange,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::GateNotAllowed => "gate-not-allowed",
            DiagnosticCode::ClassicalOpNotAllowed => "classical-op-not-allowed",
            DiagnosticCode::KindNotAllowed => "kind-not-allowed",
            DiagnosticCode::TooManyQubits => "too-many-qubits",
            DiagnosticCode::LiteralOutOfRange => "literal-out-of-range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub procedure: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub location: Location,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.procedure)?;
        if let Some(b) = &self.block {
            write!(f, "/{b}")?;
        }
        if let Some(i) = self.index {
            write!(f, "#{i}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} [{}]", self.location, self.message, self.code.as_str())
    }
}

/// Lists every construct of `program` the profile does not admit. Literal
/// constants are range-checked against the hardware word formats.
pub fn validate(program: &HybridProgram, profile: &Profile) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for p in &program.procedures {
        validate_procedure(p, profile, &mut out);
    }
    out
}

fn validate_procedure(p: &Procedure, profile: &Profile, out: &mut Vec<Diagnostic>) {
    let proc_loc = || Location { procedure: p.name.clone(), block: None, index: None };
    if p.qubits > profile.max_qubits {
        out.push(Diagnostic {
            code: DiagnosticCode::TooManyQubits,
            message: format!("{} qubits declared, profile allows {}", p.qubits, profile.max_qubits),
            location: proc_loc(),
        });
    }
    let kinds = p
        .params
        .iter()
        .map(|(n, k)| (n.as_str(), *k, None))
        .chain(p.vars.iter().map(|v| (v.name.as_str(), v.kind, v.init)));
    for (name, kind, init) in kinds {
        if !profile.numeric_kinds.contains(&kind) {
            out.push(Diagnostic {
                code: DiagnosticCode::KindNotAllowed,
                message: format!("variable `{name}` has kind {}, not supported", kind.name()),
                location: proc_loc(),
            });
        }
        if let Some(value) = init {
            if let Some(msg) = literal_range(kind, value) {
                out.push(Diagnostic {
                    code: DiagnosticCode::LiteralOutOfRange,
                    message: format!("initializer of `{name}`: {msg}"),
                    location: proc_loc(),
                });
            }
        }
    }

    for block in &p.blocks {
        for (index, instr) in block.instructions.iter().enumerate() {
            let loc = || Location { procedure: p.name.clone(), block: Some(block.label.clone()), index: Some(index) };
            let name = instr.op_name();
            let admitted = match instr {
                Instruction::Classical { .. } => profile.classical_ops.contains(name),
                Instruction::Output { .. } => true,
                _ => profile.allows_gate(name),
            };
            if !admitted {
                let (code, message) = if instr.is_quantum() {
                    (
                        DiagnosticCode::GateNotAllowed,
                        format!("{name} is not native to profile `{}`; lowering required", profile.name),
                    )
                } else {
                    (
                        DiagnosticCode::ClassicalOpNotAllowed,
                        format!("classical op {name} not supported by profile `{}`", profile.name),
                    )
                };
                out.push(Diagnostic { code, message, location: loc() });
            }
            for (kind, value) in literals(p, instr) {
                if let Some(msg) = literal_range(kind, value) {
                    out.push(Diagnostic { code: DiagnosticCode::LiteralOutOfRange, message: msg, location: loc() });
                }
            }
        }
    }
}

fn literal_range(kind: VarKind, value: f64) -> Option<String> {
    match kind {
        VarKind::Fixed => FixedQ216::encode(value).err().map(|e| e.to_string()),
        VarKind::Int18 => Int18::checked(value as i64).err().map(|e| e.to_string()),
        VarKind::Bit => None,
    }
}

/// Literal operands paired with the kind they are converted to.
fn literals(p: &Procedure, instr: &Instruction) -> Vec<(VarKind, f64)> {
    let lit = |op: &Operand| match op {
        Operand::Lit(v) => Some(*v),
        Operand::Var(_) => None,
    };
    match instr {
        Instruction::Gate { angle: Some(a), .. } => lit(a).map(|v| (VarKind::Fixed, v)).into_iter().collect(),
        Instruction::Classical { op, dest, args } => {
            let dest_kind = p.kind_of(dest).unwrap_or(VarKind::Fixed);
            let operand_kind = match op {
                ClassicalOp::CmpEq | ClassicalOp::CmpLt => {
                    args.iter().find_map(|a| a.as_var()).and_then(|v| p.kind_of(v)).unwrap_or(VarKind::Fixed)
                }
                ClassicalOp::Div | ClassicalOp::Recip => VarKind::Fixed,
                _ => dest_kind,
            };
            args.iter()
                .enumerate()
                .filter_map(|(i, a)| {
                    let kind = if *op == ClassicalOp::Select && i == 0 { VarKind::Bit } else { operand_kind };
                    lit(a).map(|v| (kind, v))
                })
                .collect()
        }
        _ => Vec::new(),
    }
}
