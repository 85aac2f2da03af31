use std::collections::HashSet;

use super::{ClassicalOp, HirError, HybridProgram, Instruction, Operand, Procedure, Terminator, VarKind};

pub(super) fn check_program(program: &HybridProgram) -> Result<(), HirError> {
    let mut names = HashSet::new();
    for proc_ in &program.procedures {
        if !names.insert(proc_.name.as_str()) {
            return Err(HirError::semantic(&proc_.name, "duplicate procedure name"));
        }
    }
    if !names.contains(program.entry.as_str()) {
        return Err(HirError::semantic(&program.entry, "entry procedure is not defined"));
    }
    for proc_ in &program.procedures {
        check_procedure(proc_)?;
    }
    Ok(())
}

fn check_procedure(p: &Procedure) -> Result<(), HirError> {
    let err = |msg: String| HirError::semantic(&p.name, msg);

    let mut vars = HashSet::new();
    for name in p.params.iter().map(|(n, _)| n).chain(p.vars.iter().map(|v| &v.name)) {
        if !vars.insert(name.as_str()) {
            return Err(err(format!("variable `{name}` declared twice")));
        }
    }
    for decl in &p.vars {
        if let Some(init) = decl.init {
            literal_fits(decl.kind, init).map_err(|m| err(format!("initializer of `{}`: {m}", decl.name)))?;
        }
    }

    if p.blocks.is_empty() {
        return Err(err("procedure has no blocks".into()));
    }
    let mut labels = HashSet::new();
    for block in &p.blocks {
        if !labels.insert(block.label.as_str()) {
            return Err(err(format!("duplicate block label `{}`", block.label)));
        }
    }

    for block in &p.blocks {
        let at = |msg: String| err(format!("block `{}`: {msg}", block.label));
        for instr in &block.instructions {
            check_instruction(p, instr).map_err(at)?;
        }
        match &block.terminator {
            Terminator::Branch(target) => {
                if !labels.contains(target.as_str()) {
                    return Err(at(format!("branch to unknown label `{target}`")));
                }
            }
            Terminator::CondBranch { cond, then_label, else_label } => {
                expect_kind(p, cond, VarKind::Bit).map_err(at)?;
                for target in [then_label, else_label] {
                    if !labels.contains(target.as_str()) {
                        return Err(at(format!("branch to unknown label `{target}`")));
                    }
                }
            }
            Terminator::Return(values) => {
                for v in values {
                    lookup(p, v).map_err(at)?;
                }
            }
        }
    }
    Ok(())
}

fn lookup(p: &Procedure, name: &str) -> Result<VarKind, String> {
    p.kind_of(name).ok_or_else(|| format!("undeclared variable `{name}`"))
}

fn expect_kind(p: &Procedure, name: &str, kind: VarKind) -> Result<(), String> {
    let found = lookup(p, name)?;
    if found != kind {
        return Err(format!("`{name}` is {} but {} is required", found.name(), kind.name()));
    }
    Ok(())
}

fn literal_fits(kind: VarKind, value: f64) -> Result<(), String> {
    if !value.is_finite() {
        return Err("literal is not finite".into());
    }
    match kind {
        VarKind::Bit if value != 0.0 && value != 1.0 => Err(format!("bit literal must be 0 or 1, got {value}")),
        VarKind::Int18 if value.fract() != 0.0 => Err(format!("integer literal expected, got {value}")),
        _ => Ok(()),
    }
}

fn operand_kind(p: &Procedure, operand: &Operand, expected: VarKind) -> Result<(), String> {
    match operand {
        Operand::Var(name) => expect_kind(p, name, expected),
        Operand::Lit(value) => literal_fits(expected, *value),
    }
}

fn check_instruction(p: &Procedure, instr: &Instruction) -> Result<(), String> {
    let qubit_ok = |q: u32| {
        if q < p.qubits {
            Ok(())
        } else {
            Err(format!("qubit q{q} out of range for {} declared qubits", p.qubits))
        }
    };
    match instr {
        Instruction::Gate { gate, angle, qubits } => {
            if qubits.len() != gate.arity() {
                return Err(format!("{} takes {} qubit(s)", gate.name(), gate.arity()));
            }
            for q in qubits {
                qubit_ok(q.0)?;
            }
            if qubits.len() == 2 && qubits[0] == qubits[1] {
                return Err(format!("{} needs distinct qubits", gate.name()));
            }
            match (gate.takes_angle(), angle) {
                (true, Some(a)) => operand_kind(p, a, VarKind::Fixed)?,
                (true, None) => return Err(format!("{} requires an angle", gate.name())),
                (false, Some(_)) => return Err(format!("{} takes no angle", gate.name())),
                (false, None) => {}
            }
        }
        Instruction::Measure { qubit, dest, tag } => {
            qubit_ok(qubit.0)?;
            expect_kind(p, dest, VarKind::Bit)?;
            if let Some(tag) = tag {
                expect_kind(p, &tag.t, VarKind::Fixed)?;
                expect_kind(p, &tag.phi_inv, VarKind::Fixed)?;
            }
        }
        Instruction::Reset { qubit } => qubit_ok(qubit.0)?,
        Instruction::ActiveReset => {}
        Instruction::Output { var } => {
            lookup(p, var)?;
        }
        Instruction::Classical { op, dest, args } => {
            if args.len() != op.source_count() {
                return Err(format!("{} takes {} source operand(s)", op.name(), op.source_count()));
            }
            let dest_kind = lookup(p, dest)?;
            match op {
                ClassicalOp::Mov => operand_kind(p, &args[0], dest_kind)?,
                ClassicalOp::Add | ClassicalOp::Sub | ClassicalOp::Mul | ClassicalOp::Neg => {
                    if dest_kind == VarKind::Bit {
                        return Err(format!("{} is not defined on bits", op.name()));
                    }
                    for a in args {
                        operand_kind(p, a, dest_kind)?;
                    }
                }
                ClassicalOp::Div | ClassicalOp::Recip => {
                    if dest_kind != VarKind::Fixed {
                        return Err(format!("{} requires a fixed destination", op.name()));
                    }
                    for a in args {
                        operand_kind(p, a, VarKind::Fixed)?;
                    }
                }
                ClassicalOp::CmpEq | ClassicalOp::CmpLt => {
                    if dest_kind != VarKind::Bit {
                        return Err(format!("{} writes a bit", op.name()));
                    }
                    let kind = args
                        .iter()
                        .find_map(|a| a.as_var())
                        .map(|v| lookup(p, v))
                        .transpose()?
                        .ok_or_else(|| format!("{} needs at least one variable operand", op.name()))?;
                    if *op == ClassicalOp::CmpLt && kind == VarKind::Bit {
                        return Err("cmp_lt is not defined on bits".into());
                    }
                    for a in args {
                        operand_kind(p, a, kind)?;
                    }
                }
                ClassicalOp::Select => {
                    operand_kind(p, &args[0], VarKind::Bit)?;
                    operand_kind(p, &args[1], dest_kind)?;
                    operand_kind(p, &args[2], dest_kind)?;
                }
            }
        }
    }
    Ok(())
}
