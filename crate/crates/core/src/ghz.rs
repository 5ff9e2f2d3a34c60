//! Non-demolition measurement of the n-partite GHZ basis
//! `(|x> ± |x̄>)/sqrt2`.
//!
//! `n - 1` ancillas collect the parities of neighbouring data qubits. A
//! Hadamard layer turns the relative sign into the weight parity of every
//! ket, one more ancilla collects that global parity from all data qubits,
//! and a second Hadamard layer rotates the data back.
//!
//! With the standard Hadamard a `+` state maps onto even-weight kets for any
//! `n`. The paper-convention Hadamard maps it onto kets whose weight has the
//! parity of `n`, so for odd `n` its global-parity readout is complemented;
//! [`run_ghz_qnd`] accounts for this when decoding.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevec::{parse_bits, GateOp, HadamardConvention, StateVector, MAX_QUBITS};

/// Largest number of data qubits handled by the network and the oracle.
pub const GHZ_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Canonical name of a GHZ basis state: the leading bit is always 1, since
/// `x` and its complement name the same ray.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GhzLabel {
    sign: Sign,
    bits: Vec<u8>,
}

impl GhzLabel {
    pub fn new(sign: Sign, bits: Vec<u8>) -> Result<Self> {
        let label = Self { sign, bits };
        if label.bits.len() < 2 || label.bits.len() > GHZ_MAX_N {
            return Err(Error::InvalidLabel(format!("GHZ labels need 2..={GHZ_MAX_N} bits, got {}", label.bits.len())));
        }
        if let Some(&b) = label.bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b));
        }
        if label.bits[0] != 1 {
            return Err(Error::NonCanonicalLabel(label.to_string()));
        }
        Ok(label)
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    /// `x_i XOR x_(i+1)` for each neighbouring pair.
    pub fn part_parity_bits(&self) -> Vec<u8> {
        self.bits.windows(2).map(|w| w[0] ^ w[1]).collect()
    }

    /// 0 for `+`, 1 for `-`.
    pub fn global_parity_bit(&self) -> u8 {
        match self.sign {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    /// All `2^n` canonical labels, ordered by their readout
    /// `(part parities, global parity)` read as a binary number.
    pub fn all(n: usize) -> Result<Vec<GhzLabel>> {
        check_n(n)?;
        (0..1usize << n)
            .map(|code| {
                let parities: Vec<u8> = (0..n - 1).map(|i| ((code >> (n - 1 - i)) & 1) as u8).collect();
                decode_ghz(&parities, (code & 1) as u8, n)
            })
            .collect()
    }
}

impl fmt::Display for GhzLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        write!(f, "{sign}:")?;
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Parses `"+:10110"` / `"-:101"`.
impl FromStr for GhzLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (sign, bits) =
            s.split_once(':').ok_or_else(|| Error::InvalidLabel(format!("expected `<sign>:<bits>`, got `{s}`")))?;
        let sign = match sign {
            "+" => Sign::Plus,
            "-" => Sign::Minus,
            other => return Err(Error::InvalidLabel(format!("unknown sign `{other}`"))),
        };
        GhzLabel::new(sign, parse_bits(bits)?)
    }
}

fn check_n(n: usize) -> Result<()> {
    if (2..=GHZ_MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedSize(n))
    }
}

fn basis_index(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// `(|x> + sign |x̄>)/sqrt2`.
pub fn ghz_state(label: &GhzLabel) -> Result<StateVector> {
    let n = label.n();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = basis_index(&label.bits);
    let x_bar = !x & ((1 << n) - 1);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[x] = Complex64::new(s, 0.0);
    amps[x_bar] = Complex64::new(s * label.sign.factor(), 0.0);
    StateVector::from_amplitudes(amps)
}

/// Inverts the readout: `x_0 = 1`, `x_(i+1) = x_i XOR p_i`, sign from `g`.
pub fn decode_ghz(part_parity_bits: &[u8], global_parity_bit: u8, n: usize) -> Result<GhzLabel> {
    check_n(n)?;
    if part_parity_bits.len() != n - 1 {
        return Err(Error::LengthMismatch { expected: n - 1, got: part_parity_bits.len() });
    }
    let sign = match global_parity_bit {
        0 => Sign::Plus,
        1 => Sign::Minus,
        b => return Err(Error::InvalidBit(b)),
    };
    let mut bits = Vec::with_capacity(n);
    bits.push(1u8);
    for &p in part_parity_bits {
        if p > 1 {
            return Err(Error::InvalidBit(p));
        }
        let last = *bits.last().expect("non-empty");
        bits.push(last ^ p);
    }
    GhzLabel::new(sign, bits)
}

/// CNOTs writing `x_i XOR x_(i+1)` into ancilla `n + i`.
pub fn part_parity_gates(n: usize) -> Vec<GateOp> {
    (0..n.saturating_sub(1)).flat_map(|i| [GateOp::cnot(i, n + i), GateOp::cnot(i + 1, n + i)]).collect()
}

pub fn hadamard_layer_gates(n: usize, convention: HadamardConvention) -> Vec<GateOp> {
    (0..n).map(|q| GateOp::hadamard(convention, q)).collect()
}

/// CNOTs from every data qubit into `ancilla`.
pub fn global_parity_gates(n: usize, ancilla: usize) -> Vec<GateOp> {
    (0..n).map(|q| GateOp::cnot(q, ancilla)).collect()
}

/// Gate list over `n` data qubits followed by `n` ancillas. Requires the full
/// `2n`-qubit register to fit the simulator; larger `n` runs staged (see
/// [`run_ghz_qnd_staged`]).
pub fn ghz_network_gate_list(n: usize, convention: HadamardConvention) -> Result<Vec<GateOp>> {
    check_n(n)?;
    if 2 * n > MAX_QUBITS {
        return Err(Error::UnsupportedSize(2 * n));
    }
    let mut gates = part_parity_gates(n);
    gates.extend(hadamard_layer_gates(n, convention));
    gates.extend(global_parity_gates(n, 2 * n - 1));
    gates.extend(hadamard_layer_gates(n, convention));
    Ok(gates)
}

/// Applies a Hadamard of the given convention to every qubit.
pub fn hadamard_layer(state: &StateVector, convention: HadamardConvention) -> Result<StateVector> {
    state.apply_gates(&hadamard_layer_gates(state.num_qubits(), convention))
}

/// Value of the global-parity ancilla that signals a `+` state.
fn plus_readout(n: usize, convention: HadamardConvention) -> u8 {
    match convention {
        HadamardConvention::Standard => 0,
        HadamardConvention::Paper => (n % 2) as u8,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhzQndOutcome {
    pub part_parity_bits: Vec<u8>,
    /// Raw reading of the global-parity ancilla.
    pub global_parity_bit: u8,
    pub label: GhzLabel,
    pub probability: f64,
    pub post_state: StateVector,
}

fn check_input(input: &StateVector, draws: &[f64]) -> Result<usize> {
    let n = input.num_qubits();
    check_n(n)?;
    input.ensure_normalized()?;
    if draws.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: draws.len() });
    }
    Ok(n)
}

fn finish(
    n: usize,
    convention: HadamardConvention,
    part_parity_bits: Vec<u8>,
    global_parity_bit: u8,
    probability: f64,
    post_state: StateVector,
) -> Result<GhzQndOutcome> {
    let sign_bit = global_parity_bit ^ plus_readout(n, convention);
    let label = decode_ghz(&part_parity_bits, sign_bit, n)?;
    Ok(GhzQndOutcome { part_parity_bits, global_parity_bit, label, probability, post_state })
}

/// Runs the network and decodes the readout. `draws[i]` decides ancilla `i`
/// (the part-parity ancillas first, the global-parity ancilla last).
pub fn run_ghz_qnd(input: &StateVector, convention: HadamardConvention, draws: &[f64]) -> Result<GhzQndOutcome> {
    if 2 * input.num_qubits() <= MAX_QUBITS {
        run_ghz_qnd_full(input, convention, draws)
    } else {
        run_ghz_qnd_staged(input, convention, draws)
    }
}

/// All `n` ancillas live at once; measured after the whole network.
pub fn run_ghz_qnd_full(input: &StateVector, convention: HadamardConvention, draws: &[f64]) -> Result<GhzQndOutcome> {
    let n = check_input(input, draws)?;
    let gates = ghz_network_gate_list(n, convention)?;
    let mut joint = input.with_zero_ancillas(n)?.apply_gates(&gates)?;
    let mut bits = Vec::with_capacity(n);
    let mut probability = 1.0;
    for (i, &draw) in draws.iter().enumerate() {
        let m = joint.measure_qubit(n + i, draw)?;
        probability *= m.probability;
        bits.push(m.bit);
        joint = m.post_state;
    }
    for i in (0..n).rev() {
        joint = joint.remove_qubit(n + i, bits[i])?;
    }
    let global = bits.pop().expect("n >= 2");
    finish(n, convention, bits, global, probability, joint)
}

/// Two live ancillas: one reused for every neighbour parity (measured and
/// reset right after its CNOTs), one for the global parity. The register
/// never exceeds `n + 2` qubits.
pub fn run_ghz_qnd_staged(input: &StateVector, convention: HadamardConvention, draws: &[f64]) -> Result<GhzQndOutcome> {
    let n = check_input(input, draws)?;
    let (scratch, global_anc) = (n, n + 1);
    let mut joint = input.with_zero_ancillas(2)?;
    let mut parities = Vec::with_capacity(n - 1);
    let mut probability = 1.0;
    for (i, &draw) in draws.iter().take(n - 1).enumerate() {
        joint.apply_gate_in_place(&GateOp::cnot(i, scratch))?;
        joint.apply_gate_in_place(&GateOp::cnot(i + 1, scratch))?;
        let m = joint.measure_qubit(scratch, draw)?;
        probability *= m.probability;
        parities.push(m.bit);
        joint = m.post_state;
        if m.bit == 1 {
            joint.apply_gate_in_place(&GateOp::x(scratch))?;
        }
    }
    let layer = hadamard_layer_gates(n, convention);
    joint = joint.apply_gates(&layer)?;
    joint = joint.apply_gates(&global_parity_gates(n, global_anc))?;
    joint = joint.apply_gates(&layer)?;
    let m = joint.measure_qubit(global_anc, draws[n - 1])?;
    probability *= m.probability;
    let post_state = m.post_state.remove_qubit(global_anc, m.bit)?.remove_qubit(scratch, 0)?;
    finish(n, convention, parities, m.bit, probability, post_state)
}

/// Projective measurement in the GHZ basis by direct inner products against
/// every canonical basis state.
pub fn ghz_projection_oracle(input: &StateVector) -> Result<Vec<(GhzLabel, f64)>> {
    let n = input.num_qubits();
    check_n(n)?;
    input.ensure_normalized()?;
    GhzLabel::all(n)?
        .into_iter()
        .map(|label| {
            let p = ghz_state(&label)?.inner(input)?.norm_sqr();
            Ok((label, p))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{bell_network_unitary_steps, BellLabel};

    fn label(s: &str) -> GhzLabel {
        s.parse().unwrap()
    }

    #[test]
    fn ghz_state_examples() {
        let phi_plus = ghz_state(&label("+:11")).unwrap();
        assert!(phi_plus.fidelity(&BellLabel::PhiPlus.state()).unwrap() > 1.0 - 1e-12);
        assert!((phi_plus.inner(&BellLabel::PhiPlus.state()).unwrap() - 1.0).norm() < 1e-12);

        let psi_minus = ghz_state(&label("-:10")).unwrap();
        assert!((psi_minus.inner(&BellLabel::PsiMinus.state()).unwrap() - 1.0).norm() < 1e-12);

        let ghz3 = ghz_state(&label("+:111")).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ghz3.amplitude(&[1, 1, 1]).re - s).abs() < 1e-15);
        assert!((ghz3.amplitude(&[0, 0, 0]).re - s).abs() < 1e-15);
    }

    #[test]
    fn label_validation() {
        assert!(matches!("+:011".parse::<GhzLabel>(), Err(Error::NonCanonicalLabel(_))));
        assert!("+:1".parse::<GhzLabel>().is_err());
        assert!("*:11".parse::<GhzLabel>().is_err());
        assert!("+:1a".parse::<GhzLabel>().is_err());
        assert!("+:111111111".parse::<GhzLabel>().is_err());
        assert_eq!(label("-:10110").to_string(), "-:10110");
    }

    #[test]
    fn network_reduces_to_bell_network() {
        for convention in [HadamardConvention::Paper, HadamardConvention::Standard] {
            assert_eq!(ghz_network_gate_list(2, convention).unwrap(), bell_network_unitary_steps(convention));
        }
    }

    #[test]
    fn network_size_for_three() {
        let gates = ghz_network_gate_list(3, HadamardConvention::Paper).unwrap();
        assert_eq!(gates.len(), 13);
        assert_eq!(part_parity_gates(3).len(), 4);
        assert!(ghz_network_gate_list(7, HadamardConvention::Paper).is_err());
    }

    #[test]
    fn part_parity_extraction_leaves_data_alone() {
        let input = ghz_state(&label("+:101")).unwrap();
        // Ancillas 3, 4 of a 5-qubit register.
        let out = input.with_zero_ancillas(2).unwrap().apply_gates(&part_parity_gates(3)).unwrap();
        let expected = input.tensor(&StateVector::from_bitstring("11").unwrap()).unwrap();
        assert!((expected.inner(&out).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_ghz(&[0], 0, 2).unwrap(), label("+:11"));
        assert_eq!(decode_ghz(&[1, 1], 1, 3).unwrap(), label("-:101"));
        assert_eq!(decode_ghz(&[0, 0, 0], 0, 4).unwrap(), label("+:1111"));
        assert!(decode_ghz(&[0, 0], 0, 2).is_err());
        assert!(decode_ghz(&[0], 2, 2).is_err());
    }

    #[test]
    fn run_examples() {
        let c = HadamardConvention::Standard;
        let out = run_ghz_qnd(&ghz_state(&label("-:101")).unwrap(), c, &[0.3; 3]).unwrap();
        assert_eq!(out.part_parity_bits, vec![1, 1]);
        assert_eq!(out.global_parity_bit, 1);
        assert_eq!(out.label, label("-:101"));
        assert!((out.probability - 1.0).abs() < 1e-12);

        let out = run_ghz_qnd(&ghz_state(&label("+:111")).unwrap(), c, &[0.3; 3]).unwrap();
        assert_eq!((out.part_parity_bits.as_slice(), out.global_parity_bit), (&[0u8, 0][..], 0));

        for convention in [HadamardConvention::Paper, HadamardConvention::Standard] {
            let out = run_ghz_qnd(&BellLabel::PhiMinus.state(), convention, &[0.5, 0.5]).unwrap();
            assert_eq!((out.part_parity_bits.as_slice(), out.global_parity_bit), (&[0u8][..], 1));
        }
    }

    #[test]
    fn paper_convention_complements_readout_for_odd_n() {
        let input = ghz_state(&label("-:101")).unwrap();
        let out = run_ghz_qnd(&input, HadamardConvention::Paper, &[0.3; 3]).unwrap();
        assert_eq!(out.global_parity_bit, 0);
        assert_eq!(out.label, label("-:101"));
    }

    #[test]
    fn oracle_examples() {
        let zero = StateVector::zero(3).unwrap();
        let dist = ghz_projection_oracle(&zero).unwrap();
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (l, p) in &dist {
            let expected = if l.bits() == [1, 1, 1] { 0.5 } else { 0.0 };
            assert!((p - expected).abs() < 1e-12, "{l}: {p}");
        }
        assert!(ghz_projection_oracle(&StateVector::zero(1).unwrap()).is_err());
    }

    #[test]
    fn staged_and_full_agree_draw_for_draw() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            for _ in 0..20 {
                let psi = StateVector::random(n, &mut rng).unwrap();
                let draws: Vec<f64> = (0..n).map(|_| rng.random()).collect();
                for convention in [HadamardConvention::Paper, HadamardConvention::Standard] {
                    let full = run_ghz_qnd_full(&psi, convention, &draws).unwrap();
                    let staged = run_ghz_qnd_staged(&psi, convention, &draws).unwrap();
                    assert_eq!(full.label, staged.label);
                    assert_eq!(full.global_parity_bit, staged.global_parity_bit);
                    assert!((full.probability - staged.probability).abs() < 1e-10);
                    assert!(full.post_state.fidelity(&staged.post_state).unwrap() > 1.0 - 1e-10);
                }
            }
        }
    }

    #[test]
    fn all_labels_enumerated_in_readout_order() {
        let labels = GhzLabel::all(3).unwrap();
        assert_eq!(labels.len(), 8);
        for (code, l) in labels.iter().enumerate() {
            let p = l.part_parity_bits();
            let readout = (p[0] as usize) << 2 | (p[1] as usize) << 1 | l.global_parity_bit() as usize;
            assert_eq!(readout, code);
        }
    }
}
