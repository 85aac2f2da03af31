//! Rewrites gates outside a profile into the native set {h, sx, x, rz, eswap}.
//!
//! CNOT is built from two `eswap(1/2)` entanglers (each a square-root of
//! SWAP up to global phase) with single-qubit corrections; CRZ is the usual
//! two-CNOT conjugation with half-angle target rotations. Variable angles
//! stay variables: the half angles are computed by classical instructions
//! placed just before the rotation, so RZ keeps its run-time argument.

use thiserror::Error;

use super::{
    validate, ClassicalOp, Diagnostic, GateKind, HybridProgram, Instruction, Operand, Procedure, Profile, Qubit,
    VarKind,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LowerError {
    #[error("profile `{0}` lacks the native target gates h, sx, x, rz, eswap")]
    MissingNativeGates(String),
    #[error("no decomposition registered for `{0}`")]
    UnloweredGate(String),
    #[error("lowered program still violates the profile ({} diagnostics)", .0.len())]
    StillInvalid(Vec<Diagnostic>),
}

const NATIVE_TARGET: [&str; 5] = ["h", "sx", "x", "rz", "eswap"];

/// Lowers every non-admitted gate of `program` into `profile`'s native set.
pub fn lower_to_native(program: &HybridProgram, profile: &Profile) -> Result<HybridProgram, LowerError> {
    if !NATIVE_TARGET.iter().all(|g| profile.allows_gate(g)) {
        return Err(LowerError::MissingNativeGates(profile.name.clone()));
    }
    let mut lowered = program.clone();
    for proc_ in &mut lowered.procedures {
        lower_procedure(proc_, profile)?;
    }
    lowered.check().expect("lowering preserves well-formedness");
    let diagnostics = validate(&lowered, profile);
    if !diagnostics.is_empty() {
        return Err(LowerError::StillInvalid(diagnostics));
    }
    Ok(lowered)
}

fn lower_procedure(p: &mut Procedure, profile: &Profile) -> Result<(), LowerError> {
    let mut fresh = 0usize;
    let mut new_vars = Vec::new();
    for block in &mut p.blocks {
        let mut out = Vec::with_capacity(block.instructions.len());
        for instr in block.instructions.drain(..) {
            let name = instr.op_name();
            let needs_lowering = instr.is_quantum() && !profile.allows_gate(name);
            if !needs_lowering {
                out.push(instr);
                continue;
            }
            match instr {
                Instruction::Gate { gate: GateKind::Cnot, qubits, .. } => cnot(&mut out, qubits[0], qubits[1]),
                Instruction::Gate { gate: GateKind::Crz, angle: Some(angle), qubits } => {
                    let (half, neg_half) = match angle {
                        Operand::Lit(theta) => (Operand::Lit(theta / 2.0), Operand::Lit(-theta / 2.0)),
                        Operand::Var(theta) => {
                            let half = format!("__lw{fresh}_half");
                            let neg_half = format!("__lw{fresh}_neg_half");
                            fresh += 1;
                            new_vars.push(half.clone());
                            new_vars.push(neg_half.clone());
                            out.push(Instruction::classical(
                                ClassicalOp::Mul,
                                &half,
                                vec![Operand::Var(theta), Operand::Lit(0.5)],
                            ));
                            out.push(Instruction::classical(ClassicalOp::Neg, &neg_half, vec![Operand::var(&half)]));
                            (Operand::Var(half), Operand::Var(neg_half))
                        }
                    };
                    let (c, t) = (qubits[0], qubits[1]);
                    cnot(&mut out, c, t);
                    out.push(Instruction::Gate { gate: GateKind::Rz, angle: Some(neg_half), qubits: vec![t] });
                    cnot(&mut out, c, t);
                    out.push(Instruction::Gate { gate: GateKind::Rz, angle: Some(half), qubits: vec![t] });
                }
                other => return Err(LowerError::UnloweredGate(other.op_name().to_string())),
            }
        }
        block.instructions = out;
    }
    for name in new_vars {
        let fresh_name = p.declare(&name, VarKind::Fixed, None);
        assert!(fresh_name, "lowering temporary `{name}` collides with a user variable");
    }
    Ok(())
}

fn rz(angle: f64, q: Qubit) -> Instruction {
    Instruction::Gate { gate: GateKind::Rz, angle: Some(Operand::Lit(angle)), qubits: vec![q] }
}

/// CNOT(c, t) = H_t . ESWAP(1/2) . RZ_c(-1) . ESWAP(1/2) . RZ_c(-3/2) RZ_t(-1/2) . H_t up to global phase
/// (angles in units of pi, listed in time order).
fn cnot(out: &mut Vec<Instruction>, c: Qubit, t: Qubit) {
    let eswap = || Instruction::Gate { gate: GateKind::Eswap, angle: Some(Operand::Lit(0.5)), qubits: vec![c, t] };
    out.push(Instruction::Gate { gate: GateKind::H, angle: None, qubits: vec![t] });
    out.push(eswap());
    out.push(rz(-1.0, c));
    out.push(eswap());
    out.push(rz(-1.5, c));
    out.push(rz(-0.5, t));
    out.push(Instruction::Gate { gate: GateKind::H, angle: None, qubits: vec![t] });
}
