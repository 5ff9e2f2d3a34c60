//! Dense pure-state simulator.
//!
//! Amplitudes are stored big-endian: qubit 0 is the leftmost symbol of a ket,
//! so `|q0 q1 ... q(n-1)>` lives at index `sum q_i * 2^(n-1-i)`. Printing the
//! amplitude vector in index order therefore reads the same way kets are
//! written by hand.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

/// Tolerance on the squared norm at public boundaries.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Branch probabilities closer than this to 0 or 1 are treated as exact.
const PROBABILITY_SNAP: f64 = 1e-13;

/// Which 2x2 matrix a Hadamard gate denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HadamardConvention {
    /// `|1> -> (|1>+|0>)/sqrt2`, `|0> -> (|1>-|0>)/sqrt2`.
    #[default]
    Paper,
    /// `|0> -> (|0>+|1>)/sqrt2`, `|1> -> (|0>-|1>)/sqrt2`.
    Standard,
}

impl FromStr for HadamardConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Self::Paper),
            "standard" => Ok(Self::Standard),
            other => Err(Error::InvalidParameter(format!("unknown Hadamard convention `{other}`"))),
        }
    }
}

impl fmt::Display for HadamardConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Standard => "standard",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    HadamardStandard,
    HadamardPaper,
    PauliX,
    Cnot,
}

/// A single gate of the supported set. Every gate in the set is self-inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GateOp {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
}

impl GateOp {
    pub fn hadamard(convention: HadamardConvention, target: usize) -> Self {
        let kind = match convention {
            HadamardConvention::Paper => GateKind::HadamardPaper,
            HadamardConvention::Standard => GateKind::HadamardStandard,
        };
        Self { kind, target, control: None }
    }

    pub fn x(target: usize) -> Self {
        Self { kind: GateKind::PauliX, target, control: None }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cnot, target, control: Some(control) }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let check = |qubit: usize| {
            if qubit < num_qubits {
                Ok(())
            } else {
                Err(Error::QubitOutOfRange { qubit, num_qubits })
            }
        };
        check(self.target)?;
        match (self.kind, self.control) {
            (GateKind::Cnot, Some(c)) => {
                check(c)?;
                if c == self.target {
                    return Err(Error::ControlEqualsTarget(c));
                }
                Ok(())
            }
            (GateKind::Cnot, None) => Err(Error::InvalidParameter("CNOT without control".into())),
            (_, Some(_)) => Err(Error::InvalidParameter("single-qubit gate with a control".into())),
            (_, None) => Ok(()),
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GateKind::HadamardStandard => write!(f, "H({})", self.target),
            GateKind::HadamardPaper => write!(f, "Hp({})", self.target),
            GateKind::PauliX => write!(f, "X({})", self.target),
            GateKind::Cnot => write!(f, "CNOT({}->{})", self.control.unwrap_or(usize::MAX), self.target),
        }
    }
}

/// Single-qubit Pauli operators, used by the noise channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    pub bit: u8,
    /// Squared norm of the selected branch before renormalization.
    pub probability: f64,
    pub post_state: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_size(num_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&num_qubits) {
        Ok(())
    } else {
        Err(Error::UnsupportedSize(num_qubits))
    }
}

impl StateVector {
    /// Computational basis state for `bits` (qubit 0 first).
    pub fn basis(num_qubits: usize, bits: &[u8]) -> Result<Self> {
        check_size(num_qubits)?;
        if bits.len() != num_qubits {
            return Err(Error::LengthMismatch { expected: num_qubits, got: bits.len() });
        }
        let mut index = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidBit(b));
            }
            index = (index << 1) | b as usize;
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// Parses a bitstring such as `"101"`.
    pub fn from_bitstring(bits: &str) -> Result<Self> {
        let parsed = parse_bits(bits)?;
        Self::basis(parsed.len(), &parsed)
    }

    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, &vec![0; num_qubits])
    }

    /// Wraps an amplitude vector, rejecting lengths that are not a power of two
    /// and states whose squared norm is off by more than [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::from_amplitudes_with_tolerance(amplitudes, NORM_TOLERANCE)
    }

    pub fn from_amplitudes_with_tolerance(amplitudes: Vec<Complex64>, tolerance: f64) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("amplitude count {len} is not a power of two >= 2")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_size(num_qubits)?;
        let state = Self { num_qubits, amplitudes };
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > tolerance {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    /// Wraps amplitudes without checking normalization. Operations that
    /// require a normalized state still reject the result.
    pub fn from_raw(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("amplitude count {len} is not a power of two >= 2")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_size(num_qubits)?;
        Ok(Self { num_qubits, amplitudes })
    }

    /// Scales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let scaled = amplitudes.into_iter().map(|a| a / norm).collect();
        Self::from_amplitudes(scaled)
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self> {
        check_size(num_qubits)?;
        let amplitudes: Vec<Complex64> = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, bits: &[u8]) -> Complex64 {
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub(crate) fn ensure_normalized(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            Err(Error::NotNormalized { norm_sqr })
        } else {
            Ok(())
        }
    }

    /// Bit mask of `qubit` within a basis index.
    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit < self.num_qubits {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange { qubit, num_qubits: self.num_qubits })
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2`, which is 1 exactly when the two states agree up to
    /// a global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// `self ⊗ other`, with `self` occupying the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        check_size(self.num_qubits + other.num_qubits)?;
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(StateVector { num_qubits: self.num_qubits + other.num_qubits, amplitudes })
    }

    /// Appends `count` qubits in `|0>` after the existing ones.
    pub fn with_zero_ancillas(&self, count: usize) -> Result<StateVector> {
        if count == 0 {
            return Ok(self.clone());
        }
        self.tensor(&StateVector::zero(count)?)
    }

    /// Multiplies every amplitude by `phase`.
    pub fn scaled(&self, phase: Complex64) -> StateVector {
        StateVector { num_qubits: self.num_qubits, amplitudes: self.amplitudes.iter().map(|a| a * phase).collect() }
    }

    pub fn apply_gate(&self, gate: &GateOp) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_gates<'a, I>(&self, gates: I) -> Result<StateVector>
    where
        I: IntoIterator<Item = &'a GateOp>,
    {
        let mut out = self.clone();
        for gate in gates {
            out.apply_gate_in_place(gate)?;
        }
        Ok(out)
    }

    pub fn apply_gate_in_place(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let t = self.mask(gate.target);
        match gate.kind {
            GateKind::HadamardStandard | GateKind::HadamardPaper => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let paper = gate.kind == GateKind::HadamardPaper;
                for i in 0..self.dim() {
                    if i & t != 0 {
                        continue;
                    }
                    let a0 = self.amplitudes[i];
                    let a1 = self.amplitudes[i | t];
                    if paper {
                        self.amplitudes[i] = (a1 - a0) * s;
                        self.amplitudes[i | t] = (a0 + a1) * s;
                    } else {
                        self.amplitudes[i] = (a0 + a1) * s;
                        self.amplitudes[i | t] = (a0 - a1) * s;
                    }
                }
            }
            GateKind::PauliX => {
                for i in 0..self.dim() {
                    if i & t == 0 {
                        self.amplitudes.swap(i, i | t);
                    }
                }
            }
            GateKind::Cnot => {
                let c = self.mask(gate.control.expect("validated"));
                for i in 0..self.dim() {
                    if i & c != 0 && i & t == 0 {
                        self.amplitudes.swap(i, i | t);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_pauli_in_place(&mut self, qubit: usize, pauli: Pauli) -> Result<()> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        let i_unit = Complex64::new(0.0, 1.0);
        for i in 0..self.dim() {
            if i & m != 0 {
                continue;
            }
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | m]);
            let (b0, b1) = match pauli {
                Pauli::I => (a0, a1),
                Pauli::X => (a1, a0),
                Pauli::Y => (-i_unit * a1, i_unit * a0),
                Pauli::Z => (a0, -a1),
            };
            self.amplitudes[i] = b0;
            self.amplitudes[i | m] = b1;
        }
        Ok(())
    }

    /// Probability that `qubit` reads 1.
    pub fn probability_of_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        Ok(self.amplitudes.iter().enumerate().filter(|(i, _)| i & m != 0).map(|(_, a)| a.norm_sqr()).sum())
    }

    /// Joint outcome distribution of `qubits` (first listed qubit is the most
    /// significant bit of the outcome index).
    pub fn marginal_distribution(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            self.check_qubit(q)?;
        }
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let mut dist = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let outcome = masks.iter().fold(0usize, |acc, &m| (acc << 1) | usize::from(i & m != 0));
            dist[outcome] += a.norm_sqr();
        }
        Ok(dist)
    }

    /// Projective Z measurement of `qubit`. The outcome is 0 iff
    /// `draw < Prob(qubit = 0)`, so results are a pure function of the draw.
    pub fn measure_qubit(&self, qubit: usize, draw: f64) -> Result<MeasurementResult> {
        if !(0.0..1.0).contains(&draw) {
            return Err(Error::InvalidParameter(format!("draw {draw} outside [0, 1)")));
        }
        let norm_sqr = self.norm_sqr();
        if norm_sqr <= f64::MIN_POSITIVE {
            return Err(Error::ZeroNorm);
        }
        let p1 = self.probability_of_one(qubit)? / norm_sqr;
        let p0 = 1.0 - p1;
        let bit = if p0 >= 1.0 - PROBABILITY_SNAP {
            0
        } else if p0 <= PROBABILITY_SNAP {
            1
        } else if draw < p0 {
            0
        } else {
            1
        };
        let probability = if bit == 0 { p0 } else { p1 };
        let post_state = self.project(qubit, bit)?;
        Ok(MeasurementResult { bit, probability, post_state })
    }

    /// Renormalized projection of `qubit` onto `bit`.
    pub fn project(&self, qubit: usize, bit: u8) -> Result<StateVector> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        let keep_set = bit == 1;
        let amplitudes: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| if (i & m != 0) == keep_set { a } else { Complex64::new(0.0, 0.0) })
            .collect();
        StateVector::normalized(amplitudes)
    }

    /// Removes `qubit`, which must already sit in the basis state `bit`
    /// (e.g. right after measuring it).
    pub fn remove_qubit(&self, qubit: usize, bit: u8) -> Result<StateVector> {
        self.check_qubit(qubit)?;
        if self.num_qubits == 1 {
            return Err(Error::UnsupportedSize(0));
        }
        let m = self.mask(qubit);
        let keep_set = bit == 1;
        let mut leftover = 0.0;
        let mut amplitudes = Vec::with_capacity(self.dim() / 2);
        for (i, a) in self.amplitudes.iter().enumerate() {
            if (i & m != 0) == keep_set {
                amplitudes.push(*a);
            } else {
                leftover += a.norm_sqr();
            }
        }
        if leftover > NORM_TOLERANCE {
            return Err(Error::QubitNotDefinite(qubit));
        }
        // Dropping the qubit keeps the relative order of the remaining bits.
        Ok(StateVector { num_qubits: self.num_qubits - 1, amplitudes })
    }

    /// Matrix-vector product with a dense `2^n x 2^n` operator. The result is
    /// not renormalized, so projectors and other non-unitary maps are allowed.
    pub fn apply_dense_operator(&self, matrix: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
        if matrix.nrows() != self.dim() || matrix.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok((0..self.dim()).map(|r| (0..self.dim()).map(|c| matrix[(r, c)] * self.amplitudes[c]).sum()).collect())
    }

    pub fn to_dump(&self) -> StateDump {
        StateDump { num_qubits: self.num_qubits, amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect() }
    }
}

/// JSON form of a state: `{"num_qubits": n, "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub num_qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateDump {
    /// Converts to a state, checking normalization against `tolerance`.
    pub fn into_state(self, tolerance: f64) -> Result<StateVector> {
        let expected = 1usize.checked_shl(self.num_qubits as u32).unwrap_or(0);
        if expected != self.amplitudes.len() {
            return Err(Error::DimensionMismatch { expected, got: self.amplitudes.len() });
        }
        let amps = self.amplitudes.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        let state = StateVector::from_amplitudes_with_tolerance(amps, tolerance)?;
        // Re-scale so internal invariants hold at the tight tolerance.
        StateVector::normalized(state.amplitudes)
    }

    pub fn from_json(text: &str, tolerance: f64) -> Result<StateVector> {
        let dump: StateDump =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("state dump: {e}")))?;
        dump.into_state(tolerance)
    }
}

/// Compares two dumps up to global phase.
pub fn dumps_equivalent(a: &StateDump, b: &StateDump, tolerance: f64) -> bool {
    match (a.clone().into_state(tolerance), b.clone().into_state(tolerance)) {
        (Ok(x), Ok(y)) => x.fidelity(&y).map(|f| f >= 1.0 - tolerance).unwrap_or(false),
        _ => false,
    }
}

pub(crate) fn parse_bits(bits: &str) -> Result<Vec<u8>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::InvalidLabel(format!("`{other}` is not a bit"))),
        })
        .collect()
}
