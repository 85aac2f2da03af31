//! Line-oriented parser for the textual IR.
//!
//! Grammar, one construct per line (`#` starts a comment):
//!
//! ```text
//! program  := procedure+
//! procedure:= "proc" NAME "(" [NAME ":" KIND {"," NAME ":" KIND}] ")" "qubits" INT ["entry"]
//!             {"var" NAME ":" KIND ["=" NUMBER]}
//!             {LABEL ":" {instruction} terminator}
//!             "end"
//! KIND     := "bit" | "int18" | "fixed"
//! instruction :=
//!     GATE QUBIT {"," QUBIT}                 # h x sx cnot
//!   | GATE "(" operand ")" QUBIT {"," QUBIT} # rz crz eswap
//!   | "mz" QUBIT "->" NAME ["pe" "(" NAME "," NAME ")"]
//!   | "reset" QUBIT | "active_reset"
//!   | OP NAME "," operand {"," operand}     # mov add sub mul div recip neg cmp_eq cmp_lt select
//!   | "output" NAME
//! terminator := "br" LABEL | "brif" NAME "," LABEL "," LABEL | "ret" [NAME {"," NAME}]
//! ```
//!
//! A procedure with no blocks at all gets a single `entry` block that returns.

use super::{
    BasicBlock, ClassicalOp, GateKind, HirError, HybridProgram, Instruction, Operand, PeTag, Procedure, Qubit,
    Terminator, VarDecl, VarKind,
};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Punct(char),
    Arrow,
}

struct Line<'a> {
    text: &'a str,
    number: usize,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> HirError {
    HirError::Syntax { line, column, message: message.into() }
}

fn lex(text: &str, number: usize) -> Result<Vec<(Tok, usize)>, HirError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((Tok::Ident(text[start..i].to_string()), col));
        } else if c == '-' && bytes.get(i + 1) == Some(&b'>') {
            toks.push((Tok::Arrow, col));
            i += 2;
        } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let start = i;
            i += 1;
            while i < bytes.len() {
                let b = bytes[i];
                let exp_sign = (b == b'-' || b == b'+') && matches!(bytes[i - 1], b'e' | b'E');
                if b.is_ascii_digit() || b == b'.' || b == b'e' || b == b'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| syntax(number, col, format!("malformed number `{lit}`")))?;
            toks.push((Tok::Num(value), col));
        } else if "(),:=".contains(c) {
            toks.push((Tok::Punct(c), col));
            i += 1;
        } else {
            return Err(syntax(number, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(toks)
}

impl<'a> Line<'a> {
    fn new(text: &'a str, number: usize) -> Result<Self, HirError> {
        Ok(Line { text, number, toks: lex(text, number)?, pos: 0 })
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.text.trim_end().len() + 1)
    }

    fn err(&self, message: impl Into<String>) -> HirError {
        syntax(self.number, self.col(), message)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn ident(&mut self) -> Result<String, HirError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), HirError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`"))),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), HirError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64, HirError> {
        match self.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                if !v.is_finite() {
                    return Err(self.err("literal is not finite"));
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.err("expected number")),
        }
    }

    fn operand(&mut self) -> Result<Operand, HirError> {
        match self.peek() {
            Some(Tok::Num(_)) => Ok(Operand::Lit(self.number()?)),
            Some(Tok::Ident(_)) => Ok(Operand::Var(self.ident()?)),
            _ => Err(self.err("expected variable or literal")),
        }
    }

    fn qubit(&mut self) -> Result<Qubit, HirError> {
        let col = self.col();
        let name = self.ident()?;
        name.strip_prefix('q')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse().ok())
            .map(Qubit)
            .ok_or_else(|| syntax(self.number, col, format!("expected qubit like `q0`, got `{name}`")))
    }

    fn kind(&mut self) -> Result<VarKind, HirError> {
        let col = self.col();
        let name = self.ident()?;
        VarKind::from_name(&name).ok_or_else(|| syntax(self.number, col, format!("unknown kind `{name}`")))
    }

    fn finish(&self) -> Result<(), HirError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing tokens"))
        }
    }
}

struct OpenBlock {
    label: String,
    instructions: Vec<Instruction>,
}

/// Parses program text and runs the structural checks.
pub fn parse(text: &str) -> Result<HybridProgram, HirError> {
    let mut procedures = Vec::new();
    let mut entry: Option<String> = None;
    let mut current: Option<Procedure> = None;
    let mut open: Option<OpenBlock> = None;

    for (idx, raw) in text.lines().enumerate() {
        let mut line = Line::new(raw, idx + 1)?;
        if line.at_end() {
            continue;
        }
        let Some(proc_) = current.as_mut() else {
            let (p, is_entry) = parse_header(&mut line)?;
            if is_entry {
                if entry.is_some() {
                    return Err(HirError::semantic(&p.name, "more than one entry procedure"));
                }
                entry = Some(p.name.clone());
            }
            current = Some(p);
            continue;
        };

        let first = match line.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(line.err("expected a declaration, label or instruction")),
        };

        // label line
        if line.toks.len() == 2 && line.toks[1].0 == Tok::Punct(':') {
            if let Some(block) = &open {
                return Err(line.err(format!("block `{}` has no terminator", block.label)));
            }
            open = Some(OpenBlock { label: first, instructions: Vec::new() });
            continue;
        }

        match first.as_str() {
            "end" => {
                line.pos += 1;
                line.finish()?;
                if let Some(block) = open.take() {
                    return Err(syntax(line.number, 1, format!("block `{}` has no terminator", block.label)));
                }
                let mut p = current.take().expect("inside a procedure");
                if p.blocks.is_empty() {
                    p.blocks.push(BasicBlock::new("entry", Vec::new(), Terminator::Return(Vec::new())));
                }
                procedures.push(p);
            }
            "var" => {
                if !proc_.blocks.is_empty() || open.is_some() {
                    return Err(line.err("declarations must precede the first block"));
                }
                line.pos += 1;
                let name = line.ident()?;
                line.punct(':')?;
                let kind = line.kind()?;
                let init = if line.eat_punct('=') { Some(line.number()?) } else { None };
                line.finish()?;
                proc_.vars.push(VarDecl { name, kind, init });
            }
            "br" | "brif" | "ret" => {
                let Some(block) = open.take() else {
                    return Err(line.err("terminator outside of a block"));
                };
                let terminator = parse_terminator(&mut line)?;
                proc_.blocks.push(BasicBlock { label: block.label, instructions: block.instructions, terminator });
            }
            _ => {
                let Some(block) = open.as_mut() else {
                    return Err(line.err("instruction outside of a block"));
                };
                block.instructions.push(parse_instruction(&mut line)?);
            }
        }
    }

    if let Some(p) = current {
        return Err(syntax(text.lines().count() + 1, 1, format!("procedure `{}` is missing `end`", p.name)));
    }
    let entry = entry.ok_or_else(|| HirError::Semantic {
        procedure: String::new(),
        message: "no procedure is marked `entry`".into(),
    })?;
    let program = HybridProgram { procedures, entry };
    program.check()?;
    Ok(program)
}

fn parse_header(line: &mut Line<'_>) -> Result<(Procedure, bool), HirError> {
    line.keyword("proc")?;
    let name = line.ident()?;
    line.punct('(')?;
    let mut params = Vec::new();
    if !line.eat_punct(')') {
        loop {
            let pname = line.ident()?;
            line.punct(':')?;
            params.push((pname, line.kind()?));
            if line.eat_punct(')') {
                break;
            }
            line.punct(',')?;
        }
    }
    line.keyword("qubits")?;
    let col = line.col();
    let n = line.number()?;
    if n < 0.0 || n.fract() != 0.0 || n > u32::MAX as f64 {
        return Err(syntax(line.number, col, "qubit count must be a nonnegative integer"));
    }
    let is_entry = if line.at_end() {
        false
    } else {
        line.keyword("entry")?;
        true
    };
    line.finish()?;
    Ok((Procedure { name, params, qubits: n as u32, vars: Vec::new(), blocks: Vec::new() }, is_entry))
}

fn parse_terminator(line: &mut Line<'_>) -> Result<Terminator, HirError> {
    let kw = line.ident()?;
    let term = match kw.as_str() {
        "br" => Terminator::Branch(line.ident()?),
        "brif" => {
            let cond = line.ident()?;
            line.punct(',')?;
            let then_label = line.ident()?;
            line.punct(',')?;
            let else_label = line.ident()?;
            Terminator::CondBranch { cond, then_label, else_label }
        }
        _ => {
            let mut values = Vec::new();
            if !line.at_end() {
                values.push(line.ident()?);
                while line.eat_punct(',') {
                    values.push(line.ident()?);
                }
            }
            Terminator::Return(values)
        }
    };
    line.finish()?;
    Ok(term)
}

fn parse_instruction(line: &mut Line<'_>) -> Result<Instruction, HirError> {
    let col = line.col();
    let name = line.ident()?;
    let instr = if let Some(gate) = GateKind::from_name(&name) {
        let angle = if line.eat_punct('(') {
            let a = line.operand()?;
            line.punct(')')?;
            Some(a)
        } else {
            None
        };
        let mut qubits = vec![line.qubit()?];
        while line.eat_punct(',') {
            qubits.push(line.qubit()?);
        }
        Instruction::Gate { gate, angle, qubits }
    } else if let Some(op) = ClassicalOp::from_name(&name) {
        let dest = line.ident()?;
        let mut args = Vec::new();
        while line.eat_punct(',') {
            args.push(line.operand()?);
        }
        Instruction::Classical { op, dest, args }
    } else {
        match name.as_str() {
            "mz" => {
                let qubit = line.qubit()?;
                if line.peek() != Some(&Tok::Arrow) {
                    return Err(line.err("expected `->`"));
                }
                line.pos += 1;
                let dest = line.ident()?;
                let tag = if line.at_end() {
                    None
                } else {
                    line.keyword("pe")?;
                    line.punct('(')?;
                    let t = line.ident()?;
                    line.punct(',')?;
                    let phi_inv = line.ident()?;
                    line.punct(')')?;
                    Some(PeTag { t, phi_inv })
                };
                Instruction::Measure { qubit, dest, tag }
            }
            "reset" => Instruction::Reset { qubit: line.qubit()? },
            "active_reset" => Instruction::ActiveReset,
            "output" => Instruction::Output { var: line.ident()? },
            _ => return Err(syntax(line.number, col, format!("unknown instruction `{name}`"))),
        }
    };
    line.finish()?;
    Ok(instr)
}
