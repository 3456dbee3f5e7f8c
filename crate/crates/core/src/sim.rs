//! Dense statevector simulation.
//!
//! Amplitudes are indexed by the basis integer `q = Σ q_t 2^t` (see the qubit
//! convention in [`crate::circuit`]). All supported gates are permutations of
//! the computational basis, so gate application is done with in-place swaps.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::perm::Permutation;

pub const MAX_STATE_QUBITS: usize = 20;
pub const MAX_UNITARY_QUBITS: usize = 6;
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Branches below this probability cannot be collapsed onto.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_qubits(n_qubits: usize) -> Result<usize> {
    if n_qubits > MAX_STATE_QUBITS {
        return Err(Error::Resource(format!("{n_qubits} qubits exceeds the statevector cap {MAX_STATE_QUBITS}")));
    }
    Ok(1usize << n_qubits)
}

impl StateVector {
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = check_qubits(n_qubits)?;
        if index >= dim {
            return Err(Error::SizeMismatch { expected: dim, found: index });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Takes amplitudes as given; the length must be a power of two and the
    /// vector normalized within [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Domain(format!("state length {dim} is not a power of two")));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        let state = StateVector { n_qubits, amps };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!("state is not normalized (norm² = {norm})")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange { qubit, n_qubits: self.n_qubits });
        }
        Ok(())
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        // (mask, value): the gate fires on basis states with q & mask == value.
        let (mask, value, target) = match gate {
            Gate::X { target } => (0, 0, *target),
            Gate::Cnot { control, target } => (1 << control, 1 << control, *target),
            Gate::Mcx { controls, pattern, target } => {
                let mut mask = 0;
                let mut value = 0;
                for (&c, &bit) in controls.iter().zip(pattern) {
                    mask |= 1 << c;
                    if bit {
                        value |= 1 << c;
                    }
                }
                (mask, value, *target)
            }
        };
        let flip = 1usize << target;
        for q in 0..self.amps.len() {
            if q & flip == 0 && q & mask == value {
                self.amps.swap(q, q | flip);
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch { expected: self.n_qubits, found: circuit.n_qubits() });
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Relabels amplitudes: the new amplitude at `j` is the old one at `π(j)`.
    pub fn permutation_action(&self, perm: &Permutation) -> Result<StateVector> {
        if perm.len() != self.dim() {
            return Err(Error::SizeMismatch { expected: self.dim(), found: perm.len() });
        }
        let amps = (0..self.dim()).map(|j| self.amps[perm.apply(j)]).collect();
        Ok(StateVector { n_qubits: self.n_qubits, amps })
    }

    /// `|0⟩ ⊗ |ψ⟩`: a fresh qubit in state 0 becomes the new most significant
    /// qubit, index `n_qubits`.
    pub fn with_ancilla(&self) -> Result<StateVector> {
        let dim = check_qubits(self.n_qubits + 1)?;
        let mut amps = self.amps.clone();
        amps.resize(dim, Complex64::new(0.0, 0.0));
        Ok(StateVector { n_qubits: self.n_qubits + 1, amps })
    }

    pub fn exact_prob_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let bit = 1usize << qubit;
        Ok(self.amps.iter().enumerate().filter(|(q, _)| q & bit != 0).map(|(_, a)| a.norm_sqr()).sum())
    }

    /// Z-basis measurement of one qubit; returns the bit and the renormalized
    /// post-measurement state.
    pub fn measure_z<R: Rng + ?Sized>(&self, qubit: usize, rng: &mut R) -> Result<(bool, StateVector)> {
        let p1 = self.exact_prob_one(qubit)?;
        let outcome = rng.gen::<f64>() < p1;
        let collapsed = self.collapse(qubit, outcome)?;
        Ok((outcome, collapsed))
    }

    /// Projects onto `qubit = outcome` and renormalizes.
    pub fn collapse(&self, qubit: usize, outcome: bool) -> Result<StateVector> {
        let p1 = self.exact_prob_one(qubit)?;
        let p = if outcome { p1 } else { 1.0 - p1 };
        if p < MIN_BRANCH_PROBABILITY {
            return Err(Error::ImpossibleBranch(p));
        }
        let bit = 1usize << qubit;
        let scale = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(q, a)| if (q & bit != 0) == outcome { a * scale } else { Complex64::new(0.0, 0.0) })
            .collect();
        Ok(StateVector { n_qubits: self.n_qubits, amps })
    }

    /// `[[re, im], ...]` in basis order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(self.amps.iter().map(|a| vec![a.re, a.im]).collect::<Vec<_>>())
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amps.iter().map(|a| [a.re, a.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        StateVector::from_amplitudes(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// `amplitude_j = sqrt(data_j / Σ data)`.
pub fn amplitude_encode(data: &[f64], n_qubits: usize) -> Result<StateVector> {
    let dim = check_qubits(n_qubits)?;
    if data.len() != dim {
        return Err(Error::SizeMismatch { expected: dim, found: data.len() });
    }
    if let Some(bad) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidDataset(format!("entry {bad} is not a nonnegative number")));
    }
    let total: f64 = data.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidDataset("data sum to zero".into()));
    }
    let amps = data.iter().map(|v| Complex64::new((v / total).sqrt(), 0.0)).collect();
    Ok(StateVector { n_qubits, amps })
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        UnitaryMatrix { dim, data }
    }

    /// Matrix of [`StateVector::permutation_action`]: row `j` has its 1 in
    /// column `π(j)`.
    pub fn permutation_matrix(perm: &Permutation) -> Self {
        let dim = perm.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for j in 0..dim {
            data[j * dim + perm.apply(j)] = Complex64::new(1.0, 0.0);
        }
        UnitaryMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim != other.dim {
            return Err(Error::SizeMismatch { expected: self.dim, found: other.dim });
        }
        let d = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Ok(UnitaryMatrix { dim: d, data })
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        let d = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j].conj();
            }
        }
        UnitaryMatrix { dim: d, data }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint().mul(self).map(|p| p.max_abs_diff(&UnitaryMatrix::identity(self.dim)) <= tol).unwrap_or(false)
    }
}

/// Column `c` is the circuit applied to basis state `|c⟩`.
pub fn circuit_unitary(circuit: &Circuit) -> Result<UnitaryMatrix> {
    circuit_unitary_capped(circuit, MAX_UNITARY_QUBITS)
}

pub fn circuit_unitary_capped(circuit: &Circuit, cap: usize) -> Result<UnitaryMatrix> {
    let n = circuit.n_qubits();
    if n > cap {
        return Err(Error::Resource(format!("{n} qubits exceeds the unitary cap {cap}")));
    }
    let dim = 1usize << n;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let mut state = StateVector::basis(n, col)?;
        state.apply_circuit(circuit)?;
        for (row, a) in state.amps.iter().enumerate() {
            data[row * dim + col] = *a;
        }
    }
    Ok(UnitaryMatrix { dim, data })
}
