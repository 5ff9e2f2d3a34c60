//! Gate application checked against explicitly built dense matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qnd_core::{GateKind, GateOp, HadamardConvention, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn single_qubit_matrix(kind: GateKind) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::HadamardStandard => DMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]),
        // Columns are the images of |0> and |1>.
        GateKind::HadamardPaper => DMatrix::from_row_slice(2, 2, &[c(-s), c(s), c(s), c(s)]),
        GateKind::PauliX => DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        GateKind::Cnot => unreachable!(),
    }
}

fn dense_gate(n: usize, gate: &GateOp) -> DMatrix<Complex64> {
    match gate.kind {
        GateKind::Cnot => {
            let dim = 1 << n;
            let control = gate.control.unwrap();
            let mut m = DMatrix::zeros(dim, dim);
            for col in 0..dim {
                let mut bits: Vec<usize> = (0..n).map(|q| (col >> (n - 1 - q)) & 1).collect();
                if bits[control] == 1 {
                    bits[gate.target] ^= 1;
                }
                let row = bits.iter().fold(0, |acc, b| acc * 2 + b);
                m[(row, col)] = c(1.0);
            }
            m
        }
        kind => {
            let mut m = DMatrix::from_element(1, 1, c(1.0));
            for q in 0..n {
                let factor = if q == gate.target { single_qubit_matrix(kind) } else { DMatrix::identity(2, 2) };
                m = m.kronecker(&factor);
            }
            m
        }
    }
}

fn gate_strategy(n: usize) -> impl Strategy<Value = GateOp> {
    (0..4u8, 0..n, 0..n).prop_filter_map("distinct qubits", move |(k, t, ctrl)| match k {
        0 => Some(GateOp::hadamard(HadamardConvention::Paper, t)),
        1 => Some(GateOp::hadamard(HadamardConvention::Standard, t)),
        2 => Some(GateOp::x(t)),
        _ if ctrl != t => Some(GateOp::cnot(ctrl, t)),
        _ => None,
    })
}

proptest! {
    #[test]
    fn apply_gate_matches_dense_matrix(
        n in 1usize..=4,
        seed in any::<u64>(),
        raw in (0..4u8, 0..4usize, 0..4usize),
    ) {
        let (k, t, ctrl) = (raw.0, raw.1 % n, raw.2 % n);
        let gate = match k {
            0 => GateOp::hadamard(HadamardConvention::Paper, t),
            1 => GateOp::hadamard(HadamardConvention::Standard, t),
            2 => GateOp::x(t),
            _ if ctrl != t => GateOp::cnot(ctrl, t),
            _ => GateOp::x(t),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = StateVector::random(n, &mut rng).unwrap();
        let fast = psi.apply_gate(&gate).unwrap();
        let dense = psi.apply_dense_operator(&dense_gate(n, &gate)).unwrap();
        for (a, b) in fast.amplitudes().iter().zip(&dense) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gate_sequences_match_dense_product(seed in any::<u64>(), gates in prop::collection::vec(gate_strategy(4), 1..20)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = StateVector::random(4, &mut rng).unwrap();
        let fast = psi.apply_gates(&gates).unwrap();
        let product = gates.iter().fold(DMatrix::<Complex64>::identity(16, 16), |acc, g| dense_gate(4, g) * acc);
        let dense = psi.apply_dense_operator(&product).unwrap();
        for (a, b) in fast.amplitudes().iter().zip(&dense) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn dense_gates_are_unitary_and_self_inverse() {
    for gate in [
        GateOp::hadamard(HadamardConvention::Paper, 1),
        GateOp::hadamard(HadamardConvention::Standard, 0),
        GateOp::x(2),
        GateOp::cnot(2, 0),
    ] {
        let m = dense_gate(3, &gate);
        let id = DMatrix::<Complex64>::identity(8, 8);
        assert!((&m * m.adjoint() - &id).iter().all(|z| z.norm() < 1e-12));
        assert!((&m * &m - &id).iter().all(|z| z.norm() < 1e-12));
    }
}
