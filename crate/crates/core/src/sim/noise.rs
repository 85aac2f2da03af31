use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{Gate, QuantumState};
use super::SimError;

/// Depolarizing-after-gate plus readout bit-flip noise. Virtual RZ is exempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_gate1: f64,
    pub p_gate2: f64,
    pub p_readout: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { p_gate1: 0.002, p_gate2: 0.02, p_readout: 0.02 }
    }
}

impl NoiseModel {
    pub fn new(p_gate1: f64, p_gate2: f64, p_readout: f64) -> Result<Self, SimError> {
        let model = NoiseModel { p_gate1, p_gate2, p_readout };
        model.check()?;
        Ok(model)
    }

    pub fn readout_only(p_readout: f64) -> Result<Self, SimError> {
        NoiseModel::new(0.0, 0.0, p_readout)
    }

    pub fn check(&self) -> Result<(), SimError> {
        for p in [self.p_gate1, self.p_gate2, self.p_readout] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::BadProbability(p));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateClass {
    /// Zero-duration frame update; never noisy.
    Virtual,
    OneQubit,
    TwoQubit,
}

impl GateClass {
    pub fn of(gate: &Gate) -> Self {
        match gate {
            Gate::Rz(_) => GateClass::Virtual,
            g if g.arity() == 2 => GateClass::TwoQubit,
            _ => GateClass::OneQubit,
        }
    }
}

/// Single-qubit Pauli, indexed I=0, X=1, Y=2, Z=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_index(i: usize) -> Self {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][i]
    }

    fn gate(self) -> Option<Gate> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(Gate::X),
            Pauli::Y => Some(Gate::Y),
            Pauli::Z => Some(Gate::Z),
        }
    }
}

/// With the class probability, applies a uniformly random non-identity Pauli
/// string on `qubits`. Returns the string applied, if any. Draws nothing from
/// `rng` for virtual gates or zero probability.
pub fn apply_noise<R: Rng + ?Sized>(
    state: &mut QuantumState,
    class: GateClass,
    qubits: &[usize],
    model: &NoiseModel,
    rng: &mut R,
) -> Option<Vec<Pauli>> {
    let p = match class {
        GateClass::Virtual => return None,
        GateClass::OneQubit => model.p_gate1,
        GateClass::TwoQubit => model.p_gate2,
    };
    if p <= 0.0 || rng.gen::<f64>() >= p {
        return None;
    }
    let strings = 4usize.pow(qubits.len() as u32);
    let mut code = rng.gen_range(1..strings);
    let mut applied = Vec::with_capacity(qubits.len());
    for &q in qubits {
        let pauli = Pauli::from_index(code % 4);
        code /= 4;
        if let Some(g) = pauli.gate() {
            state.apply_gate(g, &[q]).expect("qubit checked by the gate just applied");
        }
        applied.push(pauli);
    }
    Some(applied)
}

/// Flips a reported bit with the readout error probability.
pub fn readout<R: Rng + ?Sized>(bit: bool, model: &NoiseModel, rng: &mut R) -> bool {
    if model.p_readout > 0.0 && rng.gen::<f64>() < model.p_readout {
        !bit
    } else {
        bit
    }
}
