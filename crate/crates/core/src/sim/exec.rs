use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::noise::{apply_noise, readout, GateClass, NoiseModel};
use super::record::{EvidenceEntry, NamedValue, ShotRecord};
use super::registers::{eval, Layout, RegisterFile, Value};
use super::state::{Gate, QuantumState};
use super::{ClassicalMode, ExecConfig, SimError};
use crate::hir::{ClassicalOp, GateKind, HybridProgram, Instruction, Operand, Procedure, Terminator, VarKind};

/// Measurements allowed per qubit by the hardware reset protocol.
const ACTIVE_RESET_ATTEMPTS: usize = 5;
/// Consecutive zero readings that count as a successful reset.
const ACTIVE_RESET_REQUIRED: usize = 2;

#[derive(Debug, Clone)]
enum Src {
    Slot(usize),
    Const(Value),
}

#[derive(Debug, Clone)]
enum Op {
    Gate { gate: GateKind, angle: Option<Src>, qubits: Vec<usize> },
    Measure { qubit: usize, dest: usize, tag: Option<(usize, usize)> },
    Reset(usize),
    ActiveReset,
    Classical { op: ClassicalOp, dest: usize, args: Vec<Src> },
    Output(usize),
}

#[derive(Debug, Clone)]
enum Term {
    Branch(usize),
    CondBranch { cond: usize, then_block: usize, else_block: usize },
    Return(Vec<usize>),
}

#[derive(Debug, Clone)]
struct Block {
    ops: Vec<Op>,
    term: Term,
}

/// Order in which [`Executor::run_shots_with`] evaluates shots. Results are
/// identical either way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Schedule {
    Serial,
    /// Uses rayon when the `parallel` feature is enabled, serial otherwise.
    #[default]
    Parallel,
}

/// A program resolved against one execution configuration: names become
/// register slots, labels become block indices and literals are converted
/// for the classical mode.
#[derive(Debug, Clone)]
pub struct Executor {
    layout: Arc<Layout>,
    blocks: Vec<Block>,
    qubits: usize,
    initial: Vec<(usize, Value)>,
    cfg: ExecConfig,
}

/// Kind a literal operand is converted to, given the instruction context.
fn literal_kind(op: ClassicalOp, index: usize, dest: VarKind, first_var: Option<VarKind>) -> VarKind {
    match op {
        ClassicalOp::Div | ClassicalOp::Recip => VarKind::Fixed,
        ClassicalOp::CmpEq | ClassicalOp::CmpLt => first_var.unwrap_or(VarKind::Fixed),
        ClassicalOp::Select if index == 0 => VarKind::Bit,
        _ => dest,
    }
}

impl Executor {
    pub fn new(program: &HybridProgram, cfg: &ExecConfig) -> Result<Self, SimError> {
        if cfg.shots == 0 {
            return Err(SimError::NoShots);
        }
        if let Some(noise) = &cfg.noise {
            noise.check()?;
        }
        program.check().map_err(|e| SimError::KindMismatch(e.to_string()))?;
        let p = program.entry_procedure();
        let mode = cfg.classical_mode;

        let decls: Vec<(String, VarKind)> =
            p.params.iter().cloned().chain(p.vars.iter().map(|v| (v.name.clone(), v.kind))).collect();
        let (names, kinds): (Vec<String>, Vec<VarKind>) = decls.into_iter().unzip();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let layout = Arc::new(Layout { names, kinds, index });
        let slot = |name: &str| layout.index[name];

        let mut initial = Vec::new();
        for (name, kind) in &p.params {
            let value = cfg.inputs.get(name).ok_or_else(|| SimError::MissingInput(name.clone()))?;
            initial.push((slot(name), Value::from_literal(*value, *kind, mode)?));
        }
        for v in &p.vars {
            if let Some(init) = v.init {
                initial.push((slot(&v.name), Value::from_literal(init, v.kind, mode)?));
            }
        }

        let block_index = |label: &str| p.blocks.iter().position(|b| b.label == label).expect("checked label");
        let mut blocks = Vec::with_capacity(p.blocks.len());
        for b in &p.blocks {
            let ops = b.instructions.iter().map(|i| lower_op(p, i, &slot, mode)).collect::<Result<_, _>>()?;
            let term = match &b.terminator {
                Terminator::Branch(l) => Term::Branch(block_index(l)),
                Terminator::CondBranch { cond, then_label, else_label } => Term::CondBranch {
                    cond: slot(cond),
                    then_block: block_index(then_label),
                    else_block: block_index(else_label),
                },
                Terminator::Return(values) => Term::Return(values.iter().map(|v| slot(v)).collect()),
            };
            blocks.push(Block { ops, term });
        }
        Ok(Executor { layout, blocks, qubits: p.qubits as usize, initial, cfg: cfg.clone() })
    }

    pub fn config(&self) -> &ExecConfig {
        &self.cfg
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits
    }

    /// Runs one shot from |0...0>.
    pub fn run_shot(&self, shot: u64) -> Result<ShotRecord, SimError> {
        self.run_shot_from(shot, QuantumState::new(self.qubits)).map(|(record, _)| record)
    }

    /// Runs one shot from a caller-supplied initial state, returning the final state too.
    pub fn run_shot_from(&self, shot: u64, state: QuantumState) -> Result<(ShotRecord, QuantumState), SimError> {
        if state.num_qubits() != self.qubits {
            return Err(SimError::BadQubitIndex { qubit: state.num_qubits(), qubits: self.qubits });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(shot);
        let mut shot_state = Shot {
            state,
            regs: RegisterFile::from_layout(self.layout.clone(), self.cfg.classical_mode),
            noise: self.cfg.noise,
            rng,
            outputs: Vec::new(),
            evidence: Vec::new(),
        };
        for (slot, value) in &self.initial {
            shot_state.regs.store(*slot, *value);
        }

        let limit = self.cfg.step_limit;
        let mut steps = 0u64;
        let mut block = 0usize;
        loop {
            let b = &self.blocks[block];
            for op in &b.ops {
                steps += 1;
                if steps > limit {
                    return Err(SimError::StepLimitExceeded(limit));
                }
                shot_state.exec(op)?;
            }
            steps += 1;
            if steps > limit {
                return Err(SimError::StepLimitExceeded(limit));
            }
            match &b.term {
                Term::Branch(next) => block = *next,
                Term::CondBranch { cond, then_block, else_block } => {
                    let taken = shot_state.regs.load(*cond).as_bit().expect("condition is a bit");
                    block = if taken { *then_block } else { *else_block };
                }
                Term::Return(values) => {
                    for &slot in values {
                        shot_state.output(slot);
                    }
                    break;
                }
            }
        }

        let record = ShotRecord {
            shot,
            seed: self.cfg.seed,
            iterations: shot_state.evidence.len() as u64,
            outputs: shot_state.outputs,
            evidence: shot_state.evidence,
            steps,
        };
        Ok((record, shot_state.state))
    }

    pub fn run_shots(&self) -> Result<Vec<ShotRecord>, SimError> {
        self.run_shots_with(Schedule::default())
    }

    pub fn run_shots_with(&self, schedule: Schedule) -> Result<Vec<ShotRecord>, SimError> {
        let results = self.map_shots(schedule, |i| self.run_shot(i));
        results
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| SimError::Shot { index: i as u64, source: Box::new(e) }))
            .collect()
    }

    fn map_shots<T: Send>(&self, schedule: Schedule, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
        match schedule {
            #[cfg(feature = "parallel")]
            Schedule::Parallel => {
                use rayon::prelude::*;
                (0..self.cfg.shots).into_par_iter().map(f).collect()
            }
            _ => (0..self.cfg.shots).map(f).collect(),
        }
    }
}

fn lower_op(
    p: &Procedure,
    instr: &Instruction,
    slot: &impl Fn(&str) -> usize,
    mode: ClassicalMode,
) -> Result<Op, SimError> {
    let src = |operand: &Operand, kind: VarKind| -> Result<Src, SimError> {
        Ok(match operand {
            Operand::Var(v) => Src::Slot(slot(v)),
            Operand::Lit(x) => Src::Const(Value::from_literal(*x, kind, mode)?),
        })
    };
    Ok(match instr {
        Instruction::Gate { gate, angle, qubits } => Op::Gate {
            gate: *gate,
            angle: angle.as_ref().map(|a| src(a, VarKind::Fixed)).transpose()?,
            qubits: qubits.iter().map(|q| q.0 as usize).collect(),
        },
        Instruction::Measure { qubit, dest, tag } => Op::Measure {
            qubit: qubit.0 as usize,
            dest: slot(dest),
            tag: tag.as_ref().map(|t| (slot(&t.t), slot(&t.phi_inv))),
        },
        Instruction::Reset { qubit } => Op::Reset(qubit.0 as usize),
        Instruction::ActiveReset => Op::ActiveReset,
        Instruction::Output { var } => Op::Output(slot(var)),
        Instruction::Classical { op, dest, args } => {
            let dest_kind = p.kind_of(dest).expect("checked dest");
            let first_var = args.iter().find_map(|a| a.as_var()).and_then(|v| p.kind_of(v));
            let args = args
                .iter()
                .enumerate()
                .map(|(i, a)| src(a, literal_kind(*op, i, dest_kind, first_var)))
                .collect::<Result<_, _>>()?;
            Op::Classical { op: *op, dest: slot(dest), args }
        }
    })
}

fn engine_gate(kind: GateKind, radians: f64) -> Gate {
    match kind {
        GateKind::H => Gate::H,
        GateKind::X => Gate::X,
        GateKind::Sx => Gate::Sx,
        GateKind::Rz => Gate::Rz(radians),
        GateKind::Crz => Gate::Crz(radians),
        GateKind::Eswap => Gate::Eswap(radians),
        GateKind::Cnot => Gate::Cnot,
    }
}

struct Shot {
    state: QuantumState,
    regs: RegisterFile,
    noise: Option<NoiseModel>,
    rng: ChaCha8Rng,
    outputs: Vec<NamedValue>,
    evidence: Vec<EvidenceEntry>,
}

impl Shot {
    fn value(&self, src: &Src) -> Value {
        match src {
            Src::Slot(s) => self.regs.load(*s),
            Src::Const(v) => *v,
        }
    }

    fn output(&mut self, slot: usize) {
        let value = self.regs.load(slot).into();
        self.outputs.push(NamedValue { name: self.regs.name(slot).to_string(), value });
    }

    fn gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<(), SimError> {
        self.state.apply_gate(gate, qubits)?;
        if let Some(noise) = &self.noise {
            apply_noise(&mut self.state, GateClass::of(&gate), qubits, noise, &mut self.rng);
        }
        Ok(())
    }

    fn measure(&mut self, qubit: usize) -> Result<bool, SimError> {
        let outcome = self.state.measure(qubit, &mut self.rng)?;
        Ok(match &self.noise {
            Some(noise) => readout(outcome, noise, &mut self.rng),
            None => outcome,
        })
    }

    fn exec(&mut self, op: &Op) -> Result<(), SimError> {
        match op {
            Op::Gate { gate, angle, qubits } => {
                let radians = angle.as_ref().map(|a| self.value(a).to_radians()).unwrap_or(0.0);
                self.gate(engine_gate(*gate, radians), qubits)?;
            }
            Op::Measure { qubit, dest, tag } => {
                let bit = self.measure(*qubit)?;
                self.regs.store(*dest, Value::Bit(bit));
                if let Some((t, phi_inv)) = tag {
                    self.evidence.push(EvidenceEntry {
                        t: self.regs.load(*t).into(),
                        phi_inv: self.regs.load(*phi_inv).into(),
                        d: bit as u8,
                    });
                }
            }
            Op::Reset(q) => self.state.reset(*q, &mut self.rng)?,
            Op::ActiveReset => {
                for q in 0..self.state.num_qubits() {
                    let mut successes = 0;
                    for _ in 0..ACTIVE_RESET_ATTEMPTS {
                        if self.measure(q)? {
                            self.gate(Gate::X, &[q])?;
                            successes = 0;
                        } else {
                            successes += 1;
                        }
                        if successes == ACTIVE_RESET_REQUIRED {
                            break;
                        }
                    }
                }
            }
            Op::Classical { op, dest, args } => {
                let values: Vec<Value> = args.iter().map(|a| self.value(a)).collect();
                let result = eval(*op, &values)?;
                self.regs.store(*dest, result);
            }
            Op::Output(slot) => self.output(*slot),
        }
        Ok(())
    }
}

/// Applies one classical instruction to a register file, converting literal
/// operands for the register file's mode.
pub fn step_classical(instr: &Instruction, regs: &mut RegisterFile) -> Result<(), SimError> {
    let Instruction::Classical { op, dest, args } = instr else {
        return Err(SimError::KindMismatch(instr.op_name().to_string()));
    };
    let dest_kind = regs.kind(dest).ok_or_else(|| SimError::UnknownVariable(dest.clone()))?;
    let first_var = args.iter().find_map(|a| a.as_var()).and_then(|v| regs.kind(v));
    let mut values = Vec::with_capacity(args.len());
    for (i, a) in args.iter().enumerate() {
        values.push(match a {
            Operand::Var(v) => regs.get(v).ok_or_else(|| SimError::UnknownVariable(v.clone()))?,
            Operand::Lit(x) => Value::from_literal(*x, literal_kind(*op, i, dest_kind, first_var), regs.mode())?,
        });
    }
    if values.len() != op.source_count() {
        return Err(SimError::KindMismatch(op.name().to_string()));
    }
    let result = eval(*op, &values)?;
    regs.set(dest, result)
}

/// Runs shot `shot_index` of `program`.
pub fn run_shot(program: &HybridProgram, cfg: &ExecConfig, shot_index: u64) -> Result<ShotRecord, SimError> {
    Executor::new(program, cfg)?.run_shot(shot_index)
}

/// Runs `cfg.shots` shots, in parallel when the `parallel` feature is on.
pub fn run_shots(program: &HybridProgram, cfg: &ExecConfig) -> Result<Vec<ShotRecord>, SimError> {
    Executor::new(program, cfg)?.run_shots()
}
