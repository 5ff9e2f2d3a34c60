//! Non-demolition measurement of the Bell basis.
//!
//! The network uses two ancillas initialized to `|0>`. The first collects the
//! parity of the two data qubits through a pair of CNOTs. A Hadamard layer
//! then moves the relative phase into the parity, a second ancilla collects
//! it, and a final Hadamard layer undoes the rotation. Measuring the two
//! ancillas identifies the Bell state and leaves the data qubits in it.
//!
//! Data qubits sit at indices 0 and 1, ancillas at 2 (parity) and 3 (phase).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{GateOp, HadamardConvention, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    /// `(|11> + |00>)/sqrt2`
    PhiPlus,
    /// `(|11> - |00>)/sqrt2`
    PhiMinus,
    /// `(|10> + |01>)/sqrt2`
    PsiPlus,
    /// `(|10> - |01>)/sqrt2`
    PsiMinus,
}

impl BellLabel {
    /// Ordered by ancilla readout `(parity, phase)` = 00, 01, 10, 11.
    pub const ALL: [BellLabel; 4] = [BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus];

    /// Ancilla bits `(parity, phase)` this state produces.
    pub fn bits(self) -> (u8, u8) {
        match self {
            BellLabel::PhiPlus => (0, 0),
            BellLabel::PhiMinus => (0, 1),
            BellLabel::PsiPlus => (1, 0),
            BellLabel::PsiMinus => (1, 1),
        }
    }

    /// Position in [`BellLabel::ALL`].
    pub fn index(self) -> usize {
        let (p, s) = self.bits();
        (p as usize) << 1 | s as usize
    }

    pub fn state(self) -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let (plus, minus) = (Complex64::new(s, 0.0), Complex64::new(-s, 0.0));
        // Index order |00>, |01>, |10>, |11>.
        let amps = match self {
            BellLabel::PhiPlus => vec![plus, z, z, plus],
            BellLabel::PhiMinus => vec![minus, z, z, plus],
            BellLabel::PsiPlus => vec![z, plus, plus, z],
            BellLabel::PsiMinus => vec![z, minus, plus, z],
        };
        StateVector::from_amplitudes(amps).expect("Bell states are normalized")
    }

    pub fn name(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BellLabel::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidLabel(format!("unknown Bell state `{s}`")))
    }
}

/// Maps the ancilla readout to the Bell state it certifies.
pub fn decode_bell(parity_bit: u8, phase_bit: u8) -> Result<BellLabel> {
    match (parity_bit, phase_bit) {
        (0, 0) => Ok(BellLabel::PhiPlus),
        (0, 1) => Ok(BellLabel::PhiMinus),
        (1, 0) => Ok(BellLabel::PsiPlus),
        (1, 1) => Ok(BellLabel::PsiMinus),
        (p, s) => Err(Error::InvalidBit(if p > 1 { p } else { s })),
    }
}

/// The network split into its four stages, acting on data qubits `a`, `b`
/// and ancillas `parity_anc`, `phase_anc` of a larger register.
pub fn bell_network_stages_on(
    convention: HadamardConvention,
    a: usize,
    b: usize,
    parity_anc: usize,
    phase_anc: usize,
) -> [Vec<GateOp>; 4] {
    let h = |q| GateOp::hadamard(convention, q);
    [
        vec![GateOp::cnot(a, parity_anc), GateOp::cnot(b, parity_anc)],
        vec![h(a), h(b)],
        vec![GateOp::cnot(a, phase_anc), GateOp::cnot(b, phase_anc)],
        vec![h(a), h(b)],
    ]
}

pub fn bell_network_stages(convention: HadamardConvention) -> [Vec<GateOp>; 4] {
    bell_network_stages_on(convention, 0, 1, 2, 3)
}

/// The full 8-gate network over data qubits 0, 1 and ancillas 2, 3.
pub fn bell_network_unitary_steps(convention: HadamardConvention) -> Vec<GateOp> {
    bell_network_stages(convention).into_iter().flatten().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellQndOutcome {
    pub parity_bit: u8,
    pub phase_bit: u8,
    pub label: BellLabel,
    pub probability: f64,
    /// The two data qubits after the ancillas have been measured and dropped.
    pub post_state: StateVector,
}

/// Joint four-qubit state right before the ancillas are read out.
pub fn bell_pre_measurement_state(input: &StateVector, convention: HadamardConvention) -> Result<StateVector> {
    check_two_qubit(input)?;
    input.ensure_normalized()?;
    input.with_zero_ancillas(2)?.apply_gates(&bell_network_unitary_steps(convention))
}

/// Readout of the Bell network applied to qubits `a`, `b` of an arbitrary
/// register. Ancillas are appended, measured (parity first) and removed, so
/// the returned state has the same qubits as `register`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterReadout {
    pub parity_bit: u8,
    pub phase_bit: u8,
    pub probability: f64,
    pub post_state: StateVector,
}

pub fn bell_qnd_on_register(
    register: &StateVector,
    a: usize,
    b: usize,
    convention: HadamardConvention,
    draws: [f64; 2],
) -> Result<RegisterReadout> {
    register.ensure_normalized()?;
    let n = register.num_qubits();
    let (parity_anc, phase_anc) = (n, n + 1);
    let mut joint = register.with_zero_ancillas(2)?;
    for stage in bell_network_stages_on(convention, a, b, parity_anc, phase_anc) {
        for gate in &stage {
            joint.apply_gate_in_place(gate)?;
        }
    }
    let parity = joint.measure_qubit(parity_anc, draws[0])?;
    let phase = parity.post_state.measure_qubit(phase_anc, draws[1])?;
    let post_state = phase.post_state.remove_qubit(phase_anc, phase.bit)?.remove_qubit(parity_anc, parity.bit)?;
    Ok(RegisterReadout {
        parity_bit: parity.bit,
        phase_bit: phase.bit,
        probability: parity.probability * phase.probability,
        post_state,
    })
}

/// Runs the network on a two-qubit input and decodes the readout.
pub fn run_bell_qnd(input: &StateVector, convention: HadamardConvention, draws: [f64; 2]) -> Result<BellQndOutcome> {
    check_two_qubit(input)?;
    let r = bell_qnd_on_register(input, 0, 1, convention, draws)?;
    Ok(BellQndOutcome {
        parity_bit: r.parity_bit,
        phase_bit: r.phase_bit,
        label: decode_bell(r.parity_bit, r.phase_bit)?,
        probability: r.probability,
        post_state: r.post_state,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellProjection {
    pub label: BellLabel,
    pub probability: f64,
    pub post_state: StateVector,
}

/// Textbook projective measurement in the Bell basis by direct inner
/// products; shares no code with the gate network.
pub fn bell_projection_oracle(input: &StateVector) -> Result<[BellProjection; 4]> {
    check_two_qubit(input)?;
    input.ensure_normalized()?;
    Ok(BellLabel::ALL.map(|label| {
        let basis = label.state();
        let overlap = basis.inner(input).expect("two-qubit states");
        BellProjection { label, probability: overlap.norm_sqr(), post_state: basis }
    }))
}

fn check_two_qubit(state: &StateVector) -> Result<()> {
    if state.num_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 4, got: state.dim() });
    }
    Ok(())
}
