//! Program builders for active qubit reset, iterative and random-walk phase
//! estimation, and teleportation.
//!
//! Phase conventions: angle registers are in units of pi, `Rz(a)` is
//! `diag(e^{-i a/2}, e^{i a/2})` and the phase-estimation oracle is
//! `U(t) = Rz(oracle_coeff * t)` acting on the eigenstate |1>. For
//! `U|1> = e^{-i pi phi t}|1>` the eigenphase is `phi = -oracle_coeff / 2`, so the
//! default coefficient -0.5 gives `phi = 0.25` and a post-processed estimate
//! `2 mu = 0.5`. The inversion rotation is `Rz(+phi_inv * t)` on the ancilla,
//! which makes `Pr(d = 0) = cos^2(pi t (phi - phi_inv) / 2)`.

use std::f64::consts::E;

use thiserror::Error;

use crate::fixedpoint::{FixedQ216, Int18};
use crate::hir::{
    BasicBlock, ClassicalOp, GateKind, HybridProgram, Instruction, Operand, PeTag, Procedure, Qubit, Terminator,
    VarDecl, VarKind,
};
use crate::sim::{QuantumState, C64};

/// Ancilla register of the phase-estimation programs.
pub const ANCILLA: u32 = 0;
/// Eigenstate register of the phase-estimation programs.
pub const EIGENSTATE: u32 = 1;

/// Consecutive zero readings required by active reset.
pub const RESET_REQUIRED_SUCCESSES: i64 = 2;
/// Measurement budget per qubit for active reset (loop counter 0..=4).
pub const RESET_MAX_MEASUREMENTS: i64 = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgorithmError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

/// Random-walk update factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwpeConstants {
    /// `1/sqrt(e)`, the mean shift in units of sigma.
    pub c_shift: f64,
    /// `sqrt((e-1)/e)`, the per-step deviation shrink.
    pub c_shrink: f64,
}

impl Default for RwpeConstants {
    fn default() -> Self {
        RwpeConstants { c_shift: 1.0 / E.sqrt(), c_shrink: ((E - 1.0) / E).sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwpeParams {
    /// Prior mean, units of pi.
    pub mu0: f64,
    /// Prior deviation, units of pi.
    pub sigma0: f64,
    pub n_iter: u32,
    /// Iterations between eigenstate reset-and-prepare.
    pub refresh_period: u32,
    /// `U(t) = Rz(oracle_coeff * t)`, units of pi.
    pub oracle_coeff: f64,
}

impl Default for RwpeParams {
    fn default() -> Self {
        RwpeParams { mu0: 0.7951, sigma0: 0.6065, n_iter: 24, refresh_period: 2, oracle_coeff: -0.5 }
    }
}

impl RwpeParams {
    pub fn check(&self) -> Result<(), AlgorithmError> {
        let bad = |m: String| Err(AlgorithmError::InvalidParams(m));
        if self.n_iter == 0 || self.n_iter as i64 > Int18::MAX.get() as i64 {
            return bad(format!("n_iter {} outside 1..={}", self.n_iter, Int18::MAX.get()));
        }
        if self.refresh_period == 0 || self.refresh_period as i64 > Int18::MAX.get() as i64 {
            return bad(format!("refresh_period {} outside 1..={}", self.refresh_period, Int18::MAX.get()));
        }
        for (name, x) in [("mu0", self.mu0), ("sigma0", self.sigma0), ("oracle_coeff", self.oracle_coeff)] {
            if FixedQ216::encode(x).is_err() {
                return bad(format!("{name} = {x} is not representable in Q2.16"));
            }
        }
        if self.sigma0 <= 0.0 {
            return bad(format!("sigma0 = {} must be positive", self.sigma0));
        }
        Ok(())
    }

    /// Eigenphase probed by the oracle, units of pi.
    pub fn eigenphase(&self) -> f64 {
        -self.oracle_coeff / 2.0
    }
}

/// `cos^2(t (phi - phi_inv) / 2)`, angles in radians.
pub fn analytic_pr0(phi: f64, phi_inv: f64, t: f64) -> f64 {
    (t * (phi - phi_inv) / 2.0).cos().powi(2)
}

fn v(name: &str) -> Operand {
    Operand::var(name)
}

fn lit(x: f64) -> Operand {
    Operand::Lit(x)
}

/// Accumulates blocks for one procedure.
struct Builder {
    proc_: Procedure,
    label: String,
    body: Vec<Instruction>,
}

impl Builder {
    fn new(name: &str, qubits: u32, first_label: &str) -> Self {
        Builder {
            proc_: Procedure { name: name.into(), params: vec![], qubits, vars: vec![], blocks: vec![] },
            label: first_label.into(),
            body: vec![],
        }
    }

    fn param(&mut self, name: &str, kind: VarKind) {
        self.proc_.params.push((name.into(), kind));
    }

    fn var(&mut self, name: &str, kind: VarKind, init: Option<f64>) {
        self.proc_.vars.push(VarDecl { name: name.into(), kind, init });
    }

    fn push(&mut self, i: Instruction) {
        self.body.push(i);
    }

    fn op(&mut self, op: ClassicalOp, dest: &str, args: &[Operand]) {
        self.push(Instruction::classical(op, dest, args.to_vec()));
    }

    fn gate(&mut self, gate: GateKind, qubits: &[u32]) {
        self.push(Instruction::gate(gate, qubits));
    }

    /// Closes the current block with `term` and opens `next`.
    fn close(&mut self, term: Terminator, next: &str) {
        let body = std::mem::take(&mut self.body);
        let label = std::mem::replace(&mut self.label, next.into());
        self.proc_.blocks.push(BasicBlock { label, instructions: body, terminator: term });
    }

    fn finish(mut self, term: Terminator) -> HybridProgram {
        self.close(term, "");
        HybridProgram::single(self.proc_).expect("builder emits well-formed programs")
    }
}

fn br(label: &str) -> Terminator {
    Terminator::Branch(label.into())
}

fn brif(cond: &str, then_label: &str, else_label: &str) -> Terminator {
    Terminator::CondBranch { cond: cond.into(), then_label: then_label.into(), else_label: else_label.into() }
}

fn ret(values: &[&str]) -> Terminator {
    Terminator::Return(values.iter().map(|s| s.to_string()).collect())
}

/// Active reset on every qubit, one qubit after another. Outputs `success` (all qubits reset)
/// and `num_measurements` (total readings taken).
pub fn build_active_reset(num_qubits: u32) -> Result<HybridProgram, AlgorithmError> {
    build_active_reset_prepared(num_qubits, &[])
}

/// Active reset after applying X to each qubit listed in `excite`.
pub fn build_active_reset_prepared(num_qubits: u32, excite: &[u32]) -> Result<HybridProgram, AlgorithmError> {
    if num_qubits == 0 || num_qubits > 20 {
        return Err(AlgorithmError::InvalidParams(format!("num_qubits {num_qubits} outside 1..=20")));
    }
    if let Some(q) = excite.iter().find(|&&q| q >= num_qubits) {
        return Err(AlgorithmError::InvalidParams(format!("qubit {q} outside a {num_qubits}-qubit register")));
    }
    let mut b = Builder::new("active_reset", num_qubits, "entry");
    b.var("success", VarKind::Bit, Some(1.0));
    b.var("num_measurements", VarKind::Int18, Some(0.0));
    b.var("successes", VarKind::Int18, None);
    b.var("attempt", VarKind::Int18, None);
    b.var("d", VarKind::Bit, None);
    b.var("c", VarKind::Bit, None);
    for &q in excite {
        b.gate(GateKind::X, &[q]);
    }
    for q in 0..num_qubits {
        let start = format!("q{q}_start");
        let head = format!("q{q}_loop");
        let measure = format!("q{q}_measure");
        let flip = format!("q{q}_flip");
        let ok = format!("q{q}_zero");
        let fail = format!("q{q}_fail");
        let next = if q + 1 == num_qubits { "done".to_string() } else { format!("q{}_start", q + 1) };

        if q == 0 {
            b.close(br(&start), &start);
        }
        b.op(ClassicalOp::Mov, "successes", &[lit(0.0)]);
        b.op(ClassicalOp::Mov, "attempt", &[lit(0.0)]);
        b.close(br(&head), &head);
        b.op(ClassicalOp::CmpLt, "c", &[v("attempt"), lit(RESET_MAX_MEASUREMENTS as f64)]);
        b.close(brif("c", &measure, &fail), &measure);
        b.push(Instruction::measure(q, "d"));
        b.op(ClassicalOp::Add, "attempt", &[v("attempt"), lit(1.0)]);
        b.op(ClassicalOp::Add, "num_measurements", &[v("num_measurements"), lit(1.0)]);
        b.close(brif("d", &flip, &ok), &flip);
        b.gate(GateKind::X, &[q]);
        b.op(ClassicalOp::Mov, "successes", &[lit(0.0)]);
        b.close(br(&head), &ok);
        b.op(ClassicalOp::Add, "successes", &[v("successes"), lit(1.0)]);
        b.op(ClassicalOp::CmpEq, "c", &[v("successes"), lit(RESET_REQUIRED_SUCCESSES as f64)]);
        b.close(brif("c", &next, &head), &fail);
        b.op(ClassicalOp::Mov, "success", &[lit(0.0)]);
        b.close(br(&next), &next);
    }
    Ok(b.finish(ret(&["success", "num_measurements"])))
}

/// Emits one phase-estimation step on the ancilla. The caller supplies the
/// angle registers already scaled by the evolution time.
fn ipe_gates(b: &mut Builder, inv_angle: &str, oracle_angle: &str, d: &str, tag: PeTag) {
    b.gate(GateKind::H, &[ANCILLA]);
    b.push(Instruction::rotation(GateKind::Rz, v(inv_angle), &[ANCILLA]));
    b.push(Instruction::rotation(GateKind::Crz, v(oracle_angle), &[ANCILLA, EIGENSTATE]));
    b.gate(GateKind::H, &[ANCILLA]);
    b.push(Instruction::Measure { qubit: Qubit(ANCILLA), dest: d.into(), tag: Some(tag) });
}

/// Single iterative phase-estimation step with run-time inputs `t` and
/// `phi_inv` (units of pi). Prepares the eigenstate, measures once and
/// returns `d`.
pub fn build_ipe_step(oracle_coeff: f64) -> Result<HybridProgram, AlgorithmError> {
    if FixedQ216::encode(oracle_coeff).is_err() {
        return Err(AlgorithmError::InvalidParams(format!("oracle_coeff = {oracle_coeff} is not representable")));
    }
    let mut b = Builder::new("ipe_step", 2, "entry");
    b.param("t", VarKind::Fixed);
    b.param("phi_inv", VarKind::Fixed);
    b.var("inv_angle", VarKind::Fixed, None);
    b.var("oracle_angle", VarKind::Fixed, None);
    b.var("d", VarKind::Bit, None);
    b.gate(GateKind::X, &[EIGENSTATE]);
    b.op(ClassicalOp::Mul, "inv_angle", &[v("phi_inv"), v("t")]);
    b.op(ClassicalOp::Mul, "oracle_angle", &[lit(oracle_coeff), v("t")]);
    ipe_gates(&mut b, "inv_angle", "oracle_angle", "d", PeTag { t: "t".into(), phi_inv: "phi_inv".into() });
    Ok(b.finish(ret(&["d"])))
}

/// Random-walk phase estimation. Returns the final `mu` (units of pi);
/// the doubling to the reported estimate happens in post-processing.
pub fn build_rwpe(params: &RwpeParams) -> Result<HybridProgram, AlgorithmError> {
    params.check()?;
    let k = RwpeConstants::default();
    let mut b = Builder::new("rwpe", 2, "entry");
    b.var("mu", VarKind::Fixed, Some(params.mu0));
    b.var("sigma", VarKind::Fixed, Some(params.sigma0));
    b.var("phi_inv", VarKind::Fixed, None);
    b.var("t", VarKind::Fixed, None);
    b.var("half_sigma", VarKind::Fixed, None);
    b.var("inv_angle", VarKind::Fixed, None);
    b.var("oracle_angle", VarKind::Fixed, None);
    b.var("step", VarKind::Fixed, None);
    b.var("iter", VarKind::Int18, Some(0.0));
    b.var("since_refresh", VarKind::Int18, Some(0.0));
    b.var("d", VarKind::Bit, None);
    b.var("more", VarKind::Bit, None);
    b.var("refresh", VarKind::Bit, None);

    b.gate(GateKind::X, &[EIGENSTATE]);
    b.close(br("loop"), "loop");
    b.op(ClassicalOp::CmpLt, "more", &[v("iter"), lit(params.n_iter as f64)]);
    b.close(brif("more", "check_refresh", "done"), "check_refresh");
    b.op(ClassicalOp::CmpEq, "refresh", &[v("since_refresh"), lit(params.refresh_period as f64)]);
    b.close(brif("refresh", "refresh", "step"), "refresh");
    b.push(Instruction::Reset { qubit: Qubit(EIGENSTATE) });
    b.gate(GateKind::X, &[EIGENSTATE]);
    b.op(ClassicalOp::Mov, "since_refresh", &[lit(0.0)]);
    b.close(br("step"), "step");
    b.op(ClassicalOp::Mul, "half_sigma", &[v("sigma"), lit(0.5)]);
    b.op(ClassicalOp::Sub, "phi_inv", &[v("mu"), v("half_sigma")]);
    b.op(ClassicalOp::Recip, "t", &[v("sigma")]);
    b.op(ClassicalOp::Div, "inv_angle", &[v("phi_inv"), v("sigma")]);
    b.op(ClassicalOp::Div, "oracle_angle", &[lit(params.oracle_coeff), v("sigma")]);
    ipe_gates(&mut b, "inv_angle", "oracle_angle", "d", PeTag { t: "t".into(), phi_inv: "phi_inv".into() });
    b.push(Instruction::Reset { qubit: Qubit(ANCILLA) });
    b.op(ClassicalOp::Mul, "step", &[v("sigma"), lit(k.c_shift)]);
    b.close(brif("d", "down", "up"), "up");
    b.op(ClassicalOp::Add, "mu", &[v("mu"), v("step")]);
    b.close(br("shrink"), "down");
    b.op(ClassicalOp::Sub, "mu", &[v("mu"), v("step")]);
    b.close(br("shrink"), "shrink");
    b.op(ClassicalOp::Mul, "sigma", &[v("sigma"), lit(k.c_shrink)]);
    b.op(ClassicalOp::Add, "iter", &[v("iter"), lit(1.0)]);
    b.op(ClassicalOp::Add, "since_refresh", &[v("since_refresh"), lit(1.0)]);
    b.close(br("loop"), "done");
    Ok(b.finish(ret(&["mu"])))
}

/// Teleports q0 onto q2 through two mid-circuit measurements and
/// classically controlled X and Z corrections in separate blocks.
pub fn build_teleport() -> HybridProgram {
    let mut b = Builder::new("teleport", 3, "entry");
    b.var("m0", VarKind::Bit, None);
    b.var("m1", VarKind::Bit, None);
    b.gate(GateKind::H, &[1]);
    b.gate(GateKind::Cnot, &[1, 2]);
    b.gate(GateKind::Cnot, &[0, 1]);
    b.gate(GateKind::H, &[0]);
    b.push(Instruction::measure(0, "m0"));
    b.push(Instruction::measure(1, "m1"));
    b.close(brif("m1", "fix_x", "check_z"), "fix_x");
    b.gate(GateKind::X, &[2]);
    b.close(br("check_z"), "check_z");
    b.close(brif("m0", "fix_z", "done"), "fix_z");
    // Z up to global phase.
    b.push(Instruction::rotation(GateKind::Rz, lit(1.0), &[2]));
    b.close(br("done"), "done");
    b.finish(ret(&["m0", "m1"]))
}

/// `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
pub fn bloch_state(theta: f64, phi: f64) -> [C64; 2] {
    [C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]
}

/// Three-qubit teleport input: `psi` on q0, q1 and q2 in |0>.
pub fn teleport_input(psi: [C64; 2]) -> QuantumState {
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    amps[0] = psi[0];
    amps[1] = psi[1];
    QuantumState::from_amplitudes(amps)
}

/// Fidelity `<psi| rho_q2 |psi>` of the teleported qubit.
pub fn teleport_fidelity(state: &QuantumState, psi: [C64; 2]) -> f64 {
    let rho = state.reduced(2);
    let mut f = C64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            f += psi[i].conj() * rho[i][j] * psi[j];
        }
    }
    f.re
}
