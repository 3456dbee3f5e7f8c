//! Gate-level synthesis of adjacent transpositions on `N = 2^n` symbols.
//!
//! Qubit convention: the basis state `|q_{n-1} ... q_1 q_0⟩` is the integer
//! `q = Σ q_t 2^t`, and internal qubit index `t` addresses bit `q_t`. Diagrams
//! that number qubits `1..=n` from the left map qubit `k` to index `n - k`
//! (see [`diagram_qubit_to_index`]).
//!
//! `s_j` with `j = 2x` even is the pattern-controlled X with controls
//! `q_{n-1} ... q_1` matching the bits of `x` and target `q_0`. With `j = 2x + 1`
//! odd it is `U_x · T_{x+1} · U_x`, where `U_x` is a CNOT from `q_0` onto every
//! bit `q_{i+1}` such that `x` and `x + 1` differ in bit `i`.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{Permutation, Word};

/// Maps a 1-based, left-to-right diagram qubit number to the internal index.
pub fn diagram_qubit_to_index(k: usize, n_qubits: usize) -> Result<usize> {
    if k == 0 || k > n_qubits {
        return Err(Error::QubitOutOfRange { qubit: k, n_qubits });
    }
    Ok(n_qubits - k)
}

/// Elementary gates. Lists of gates act in order: element 0 first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Gate {
    #[serde(rename = "x")]
    X { target: usize },
    #[serde(rename = "cx")]
    Cnot { control: usize, target: usize },
    /// Flips `target` iff every `controls[i]` equals `pattern[i]`.
    #[serde(rename = "mcx")]
    Mcx {
        controls: Vec<usize>,
        #[serde(with = "bit_string")]
        pattern: Vec<bool>,
        target: usize,
    },
}

mod bit_string {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&bits.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let text = String::deserialize(d)?;
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(D::Error::custom(format!("pattern character `{other}` is not a bit"))),
            })
            .collect()
    }
}

impl Gate {
    /// All-ones multi-controlled X (the standard Toffoli family).
    pub fn toffoli(controls: Vec<usize>, target: usize) -> Gate {
        let pattern = vec![true; controls.len()];
        Gate::Mcx { controls, pattern, target }
    }

    pub fn is_all_ones_mcx(&self) -> bool {
        matches!(self, Gate::Mcx { pattern, .. } if pattern.iter().all(|&b| b))
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X { target } => vec![*target],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Mcx { controls, target, .. } => {
                let mut q = controls.clone();
                q.push(*target);
                q
            }
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        if let Some(&qubit) = qubits.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::QubitOutOfRange { qubit, n_qubits });
        }
        for (i, a) in qubits.iter().enumerate() {
            if qubits[i + 1..].contains(a) {
                return Err(Error::InvalidGate(format!("qubit {a} used twice in {self}")));
            }
        }
        if let Gate::Mcx { controls, pattern, .. } = self {
            if controls.is_empty() {
                return Err(Error::InvalidGate("multi-controlled X needs at least one control".into()));
            }
            if controls.len() != pattern.len() {
                return Err(Error::InvalidGate(format!(
                    "{} controls but pattern of length {}",
                    controls.len(),
                    pattern.len()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X { target } => write!(f, "X({target})"),
            Gate::Cnot { control, target } => write!(f, "CX({control}->{target})"),
            Gate::Mcx { controls, pattern, target } => {
                write!(f, "MCX[")?;
                for (i, (c, b)) in controls.iter().zip(pattern).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}={}", u8::from(*b))?;
                }
                write!(f, "->{target}]")
            }
        }
    }
}

/// An ordered gate list on `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CircuitJson", into = "CircuitJson")]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n: usize,
    gates: Vec<Gate>,
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(value: CircuitJson) -> Result<Self> {
        Circuit::from_gates(value.n, value.gates)
    }
}

impl From<Circuit> for CircuitJson {
    fn from(c: Circuit) -> Self {
        CircuitJson { n: c.n_qubits, gates: c.gates }
    }
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new() }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Circuit { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::SizeMismatch { expected: self.n_qubits, found: other.n_qubits });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// SWAP of two qubits as three CNOTs.
    pub fn swap(i: usize, j: usize, n_qubits: usize) -> Result<Circuit> {
        Circuit::from_gates(
            n_qubits,
            vec![
                Gate::Cnot { control: i, target: j },
                Gate::Cnot { control: j, target: i },
                Gate::Cnot { control: i, target: j },
            ],
        )
    }

    /// Replaces every pattern-controlled X by its all-ones form conjugated
    /// with X gates.
    pub fn lowered(&self) -> Circuit {
        let gates = self.gates.iter().flat_map(lower_mcx).collect();
        Circuit { n_qubits: self.n_qubits, gates }
    }

    pub fn is_lowered(&self) -> bool {
        self.gates.iter().all(|g| !matches!(g, Gate::Mcx { .. }) || g.is_all_ones_mcx())
    }
}

/// `σ_b · T_{1...1} · σ_b`, with an X on every control whose pattern bit is 0.
/// Gates other than pattern-controlled X pass through unchanged.
pub fn lower_mcx(gate: &Gate) -> Vec<Gate> {
    let Gate::Mcx { controls, pattern, target } = gate else {
        return vec![gate.clone()];
    };
    let flips: Vec<Gate> =
        controls.iter().zip(pattern).filter(|(_, &bit)| !bit).map(|(&c, _)| Gate::X { target: c }).collect();
    let mut out = Vec::with_capacity(2 * flips.len() + 1);
    out.extend(flips.iter().cloned());
    out.push(Gate::toffoli(controls.clone(), *target));
    out.extend(flips);
    out
}

fn check_register(j: usize, n_qubits: usize) -> Result<()> {
    if n_qubits < 2 {
        return Err(Error::Domain(format!("adjacent transpositions need n >= 2 qubits, got {n_qubits}")));
    }
    if n_qubits >= usize::BITS as usize {
        return Err(Error::Resource(format!("{n_qubits} qubits")));
    }
    let n_symbols = 1usize << n_qubits;
    if j + 2 > n_symbols {
        return Err(Error::LetterOutOfRange { letter: j, n_symbols });
    }
    Ok(())
}

/// Controls `q_{n-1}, ..., q_1` and the pattern bits of `x` in the same order.
fn pattern_gate(x: usize, n_qubits: usize) -> Gate {
    let controls: Vec<usize> = (1..n_qubits).rev().collect();
    let pattern = controls.iter().map(|&c| (x >> (c - 1)) & 1 == 1).collect();
    Gate::Mcx { controls, pattern, target: 0 }
}

/// Circuit for `s_j` on `2^n` symbols (unlowered).
pub fn synth_adjacent(j: usize, n_qubits: usize) -> Result<Circuit> {
    check_register(j, n_qubits)?;
    let x = j >> 1;
    let gates = if j.is_multiple_of(2) {
        vec![pattern_gate(x, n_qubits)]
    } else {
        let diff = x ^ (x + 1);
        let u_x: Vec<Gate> = (0..n_qubits - 1)
            .rev()
            .filter(|i| (diff >> i) & 1 == 1)
            .map(|i| Gate::Cnot { control: 0, target: i + 1 })
            .collect();
        let mut gates = u_x.clone();
        gates.push(pattern_gate(x + 1, n_qubits));
        gates.extend(u_x);
        gates
    };
    Ok(Circuit { n_qubits, gates })
}

/// Concatenation of the `s_j` circuits of every letter, first letter first.
///
/// A word on `N` symbols with `N < 2^n` is accepted as long as `N ≤ 2^n`; its
/// letters act on the low basis states and leave the rest fixed.
pub fn synth_word(word: &Word, n_qubits: usize) -> Result<Circuit> {
    if n_qubits >= usize::BITS as usize {
        return Err(Error::Resource(format!("{n_qubits} qubits")));
    }
    let capacity = 1usize << n_qubits;
    if word.n_symbols() > capacity {
        return Err(Error::Domain(format!("{} symbols do not fit in {n_qubits} qubits", word.n_symbols())));
    }
    let mut circuit = Circuit::new(n_qubits);
    for &j in word.letters() {
        circuit.gates.extend(synth_adjacent(j, n_qubits)?.gates);
    }
    Ok(circuit)
}

/// Smallest `n` with `2^n ≥ n_symbols` (at least 2).
pub fn qubits_for(n_symbols: usize) -> usize {
    let mut n = 2;
    while (1usize << n) < n_symbols {
        n += 1;
    }
    n
}

/// The array induced on the `2^n` basis states by SWAP of qubits `i` and `j`.
pub fn swap_gate_permutation(i: usize, j: usize, n_qubits: usize) -> Result<Permutation> {
    if i == j {
        return Err(Error::Domain("SWAP needs two distinct qubits".into()));
    }
    for q in [i, j] {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
        }
    }
    let entries = (0..1usize << n_qubits)
        .map(|q| {
            let (bi, bj) = ((q >> i) & 1, (q >> j) & 1);
            if bi == bj {
                q
            } else {
                q ^ (1 << i) ^ (1 << j)
            }
        })
        .collect();
    Permutation::new(entries)
}

/// Gate tallies by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub x: usize,
    pub cnot: usize,
    /// Multi-controlled X with the all-ones pattern.
    pub toffoli: usize,
    /// Multi-controlled X with some 0 in its pattern.
    pub pattern_mcx: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.x + self.cnot + self.toffoli + self.pattern_mcx
    }
}

pub fn gate_count_report(circuit: &Circuit) -> GateCounts {
    let mut counts = GateCounts::default();
    for g in &circuit.gates {
        match g {
            Gate::X { .. } => counts.x += 1,
            Gate::Cnot { .. } => counts.cnot += 1,
            Gate::Mcx { .. } if g.is_all_ones_mcx() => counts.toffoli += 1,
            Gate::Mcx { .. } => counts.pattern_mcx += 1,
        }
    }
    counts
}

/// Counts of the lowered circuit for `s_j`.
pub fn adjacent_gate_counts(j: usize, n_qubits: usize) -> Result<GateCounts> {
    Ok(gate_count_report(&synth_adjacent(j, n_qubits)?.lowered()))
}

/// OpenQASM 3 text for a lowered circuit.
pub fn emit_qasm(circuit: &Circuit) -> Result<String> {
    let mut out = String::new();
    out.push_str("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    let _ = writeln!(out, "qubit[{}] q;", circuit.n_qubits);
    for g in &circuit.gates {
        match g {
            Gate::X { target } => {
                let _ = writeln!(out, "x q[{target}];");
            }
            Gate::Cnot { control, target } => {
                let _ = writeln!(out, "cx q[{control}], q[{target}];");
            }
            Gate::Mcx { controls, target, .. } => {
                if !g.is_all_ones_mcx() {
                    return Err(Error::MustLower);
                }
                let _ = write!(out, "ctrl({}) @ x", controls.len());
                for (i, c) in controls.iter().enumerate() {
                    let sep = if i == 0 { " " } else { ", " };
                    let _ = write!(out, "{sep}q[{c}]");
                }
                let _ = writeln!(out, ", q[{target}];");
            }
        }
    }
    Ok(out)
}
