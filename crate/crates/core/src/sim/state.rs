use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::SimError;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Unitary gates the engine applies. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H,
    X,
    Y,
    Z,
    Sx,
    Rz(f64),
    Crz(f64),
    Eswap(f64),
    Cnot,
}

pub type Matrix2 = [[C64; 2]; 2];
pub type Matrix4 = [[C64; 4]; 4];

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Crz(_) | Gate::Eswap(_) | Gate::Cnot => 2,
            _ => 1,
        }
    }

    pub fn matrix1(&self) -> Option<Matrix2> {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Some(match *self {
            Gate::H => [[h, h], [h, -h]],
            Gate::X => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Y => [[ZERO, -I], [I, ZERO]],
            Gate::Z => [[ONE, ZERO], [ZERO, -ONE]],
            Gate::Sx => {
                let a = C64::new(0.5, 0.5);
                let b = C64::new(0.5, -0.5);
                [[a, b], [b, a]]
            }
            Gate::Rz(theta) => [[C64::from_polar(1.0, -theta / 2.0), ZERO], [ZERO, C64::from_polar(1.0, theta / 2.0)]],
            _ => return None,
        })
    }

    /// 4x4 matrix in the basis |ab> where `a` is the first listed qubit.
    pub fn matrix2(&self) -> Option<Matrix4> {
        let mut m = [[ZERO; 4]; 4];
        match *self {
            Gate::Cnot => {
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][3] = ONE;
                m[3][2] = ONE;
            }
            Gate::Crz(theta) => {
                m[0][0] = ONE;
                m[1][1] = ONE;
                m[2][2] = C64::from_polar(1.0, -theta / 2.0);
                m[3][3] = C64::from_polar(1.0, theta / 2.0);
            }
            Gate::Eswap(theta) => {
                let phase = C64::from_polar(1.0, -theta / 2.0);
                let c = C64::new((theta / 2.0).cos(), 0.0);
                let s = C64::new(0.0, -(theta / 2.0).sin());
                m[0][0] = phase;
                m[1][1] = c;
                m[1][2] = s;
                m[2][1] = s;
                m[2][2] = c;
                m[3][3] = phase;
            }
            _ => return None,
        }
        Some(m)
    }
}

/// Normalized amplitude vector over `n` qubits; qubit `k` is bit `k` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n: usize,
    amps: Vec<C64>,
}

impl QuantumState {
    pub fn new(n: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        QuantumState { n, amps }
    }

    /// Builds a state from raw amplitudes, normalizing them. Panics unless the
    /// length is a power of two and the vector is nonzero.
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(amps.len().is_power_of_two(), "amplitude count must be a power of two");
        let n = amps.len().trailing_zeros() as usize;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 0.0, "zero vector is not a state");
        QuantumState { n, amps: amps.into_iter().map(|a| a / norm).collect() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// |<self|other>|^2
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr()
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimError> {
        if q < self.n {
            Ok(())
        } else {
            Err(SimError::BadQubitIndex { qubit: q, qubits: self.n })
        }
    }

    pub fn apply_gate(&mut self, gate: Gate, qubits: &[usize]) -> Result<(), SimError> {
        if qubits.len() != gate.arity() {
            return Err(SimError::BadQubitIndex { qubit: qubits.len(), qubits: self.n });
        }
        for &q in qubits {
            self.check_qubit(q)?;
        }
        if let Some(m) = gate.matrix1() {
            self.apply_1q(&m, qubits[0]);
        } else {
            if qubits[0] == qubits[1] {
                return Err(SimError::BadQubitIndex { qubit: qubits[1], qubits: self.n });
            }
            let m = gate.matrix2().expect("two-qubit gate");
            self.apply_2q(&m, qubits[0], qubits[1]);
        }
        Ok(())
    }

    pub fn apply_1q(&mut self, m: &Matrix2, q: usize) {
        let bit = 1 << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_2q(&mut self, m: &Matrix4, a: usize, b: usize) {
        let (ba, bb) = (1 << a, 1 << b);
        for i in 0..self.amps.len() {
            if i & (ba | bb) == 0 {
                let idx = [i, i | bb, i | ba, i | ba | bb];
                let v = idx.map(|k| self.amps[k]);
                for (r, &k) in idx.iter().enumerate() {
                    self.amps[k] = (0..4).map(|c| m[r][c] * v[c]).sum();
                }
            }
        }
    }

    /// Born probability of reading 1 on qubit `q`.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1 << q;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Projects qubit `q` onto `outcome` and renormalizes.
    pub fn collapse(&mut self, q: usize, outcome: bool) {
        let bit = 1 << q;
        let mut norm = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit) != 0) != outcome {
                *a = ZERO;
            } else {
                norm += a.norm_sqr();
            }
        }
        let scale = 1.0 / norm.sqrt();
        for a in &mut self.amps {
            *a *= scale;
        }
    }

    /// Projective Z measurement: samples by Born weight and collapses.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, SimError> {
        self.check_qubit(q)?;
        let p1 = self.prob_one(q).clamp(0.0, 1.0);
        let outcome = rng.gen::<f64>() < p1;
        self.collapse(q, outcome);
        Ok(outcome)
    }

    /// Ideal reset: measure, then flip to |0> if the result was 1.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), SimError> {
        if self.measure(q, rng)? {
            self.apply_1q(&Gate::X.matrix1().expect("single-qubit"), q);
        }
        Ok(())
    }

    /// Reduced density matrix of one qubit.
    pub fn reduced(&self, q: usize) -> Matrix2 {
        let bit = 1 << q;
        let mut rho = [[ZERO; 2]; 2];
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                rho[0][0] += a0 * a0.conj();
                rho[0][1] += a0 * a1.conj();
                rho[1][0] += a1 * a0.conj();
                rho[1][1] += a1 * a1.conj();
            }
        }
        rho
    }
}
