use std::fmt::Write;

use super::{HybridProgram, Instruction, Operand, Procedure, Terminator};

pub(super) fn emit_program(program: &HybridProgram) -> String {
    let mut out = String::new();
    for (i, p) in program.procedures.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        emit_procedure(&mut out, p, p.name == program.entry);
    }
    out
}

fn emit_procedure(out: &mut String, p: &Procedure, is_entry: bool) {
    let params: Vec<String> = p.params.iter().map(|(n, k)| format!("{n}: {}", k.name())).collect();
    let _ = write!(out, "proc {}({}) qubits {}", p.name, params.join(", "), p.qubits);
    out.push_str(if is_entry { " entry\n" } else { "\n" });
    for v in &p.vars {
        let _ = write!(out, "  var {}: {}", v.name, v.kind.name());
        if let Some(init) = v.init {
            let _ = write!(out, " = {init}");
        }
        out.push('\n');
    }
    for block in &p.blocks {
        let _ = writeln!(out, "{}:", block.label);
        for instr in &block.instructions {
            let _ = writeln!(out, "  {}", instruction_text(instr));
        }
        let _ = writeln!(out, "  {}", terminator_text(&block.terminator));
    }
    out.push_str("end\n");
}

pub(crate) fn operand_text(op: &Operand) -> String {
    match op {
        Operand::Var(v) => v.clone(),
        Operand::Lit(x) => format!("{x}"),
    }
}

pub(crate) fn instruction_text(instr: &Instruction) -> String {
    match instr {
        Instruction::Gate { gate, angle, qubits } => {
            let qs: Vec<String> = qubits.iter().map(|q| q.to_string()).collect();
            match angle {
                Some(a) => format!("{}({}) {}", gate.name(), operand_text(a), qs.join(", ")),
                None => format!("{} {}", gate.name(), qs.join(", ")),
            }
        }
        Instruction::Measure { qubit, dest, tag } => match tag {
            Some(tag) => format!("mz {qubit} -> {dest} pe({}, {})", tag.t, tag.phi_inv),
            None => format!("mz {qubit} -> {dest}"),
        },
        Instruction::Reset { qubit } => format!("reset {qubit}"),
        Instruction::ActiveReset => "active_reset".to_string(),
        Instruction::Classical { op, dest, args } => {
            let args: Vec<String> = args.iter().map(operand_text).collect();
            format!("{} {}, {}", op.name(), dest, args.join(", "))
        }
        Instruction::Output { var } => format!("output {var}"),
    }
}

fn terminator_text(term: &Terminator) -> String {
    match term {
        Terminator::Branch(l) => format!("br {l}"),
        Terminator::CondBranch { cond, then_label, else_label } => format!("brif {cond}, {then_label}, {else_label}"),
        Terminator::Return(values) if values.is_empty() => "ret".to_string(),
        Terminator::Return(values) => format!("ret {}", values.join(", ")),
    }
}
