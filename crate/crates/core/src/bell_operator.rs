//! CHSH operator, its recursive n-particle extension, and a per-branch
//! commutation report for measurement networks.
//!
//! Pauli matrices are written in the computational basis with
//! `σz|0> = +|0>`. Tensor factors follow the register order, so particle 1 is
//! qubit 0.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bell::bell_network_unitary_steps;
use crate::error::{Error, Result};
use crate::ghz::{ghz_network_gate_list, ghz_projection_oracle, GhzLabel};
use crate::statevec::{GateOp, HadamardConvention, StateVector, MAX_QUBITS};

pub type Direction = [f64; 3];

/// Largest particle count for which operators are built.
pub const MAX_PARTICLES: usize = 8;

const UNIT_TOLERANCE: f64 = 1e-12;
const HERMITIAN_TOLERANCE: f64 = 1e-12;
const DEGENERACY_TOLERANCE: f64 = 1e-8;

/// Measurement directions `a` (unprimed) and `a'` (primed) for one particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionPair {
    pub a: Direction,
    pub a_prime: Direction,
}

impl DirectionPair {
    pub fn new(a: Direction, a_prime: Direction) -> Self {
        Self { a, a_prime }
    }

    fn swapped(self) -> Self {
        Self { a: self.a_prime, a_prime: self.a }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct BellOperatorSpec {
    pairs: Vec<DirectionPair>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    directions: Vec<DirectionPair>,
}

impl TryFrom<SpecFile> for BellOperatorSpec {
    type Error = Error;

    fn try_from(file: SpecFile) -> Result<Self> {
        BellOperatorSpec::new(file.directions)
    }
}

impl From<BellOperatorSpec> for SpecFile {
    fn from(spec: BellOperatorSpec) -> Self {
        SpecFile { directions: spec.pairs }
    }
}

const X: Direction = [1.0, 0.0, 0.0];
const Y: Direction = [0.0, 1.0, 0.0];
const Z: Direction = [0.0, 0.0, 1.0];

fn norm(v: &Direction) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl BellOperatorSpec {
    pub fn new(pairs: Vec<DirectionPair>) -> Result<Self> {
        if pairs.len() < 2 || pairs.len() > MAX_PARTICLES {
            return Err(Error::InvalidParameter(format!(
                "need 2..={MAX_PARTICLES} direction pairs, got {}",
                pairs.len()
            )));
        }
        for v in pairs.iter().flat_map(|p| [p.a, p.a_prime]) {
            let n = norm(&v);
            if (n - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::NotUnitVector(n));
            }
        }
        Ok(Self { pairs })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("direction spec: {e}")))
    }

    /// `a = z`, `a' = x`, `b = (z+x)/sqrt2`, `b' = (z-x)/sqrt2`.
    pub fn canonical_chsh() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { pairs: vec![DirectionPair::new(Z, X), DirectionPair::new([s, 0.0, s], [-s, 0.0, s])] }
    }

    /// Every particle measured along `x` (unprimed) and `y` (primed).
    pub fn mermin_xy(n: usize) -> Result<Self> {
        Self::new(vec![DirectionPair::new(X, Y); n])
    }

    /// Default setting for `n` particles: the CHSH setting for `n = 2`; for
    /// larger `n` the x/y setting with particle 1 rotated about `z` by
    /// `-(n-1)π/4`, which makes the top eigenvector a real GHZ state.
    pub fn canonical(n: usize) -> Result<Self> {
        if n == 2 {
            return Ok(Self::canonical_chsh());
        }
        let mut spec = Self::mermin_xy(n)?;
        let theta = -((n - 1) as f64) * std::f64::consts::FRAC_PI_4;
        let (s, c) = theta.sin_cos();
        spec.pairs[0] = DirectionPair::new([c, s, 0.0], [-s, c, 0.0]);
        Ok(spec)
    }

    pub fn num_particles(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[DirectionPair] {
        &self.pairs
    }

    /// Primed and unprimed directions exchanged for every particle.
    pub fn swapped(&self) -> Self {
        Self { pairs: self.pairs.iter().map(|p| p.swapped()).collect() }
    }
}

/// `v·σ` as a 2x2 matrix.
pub fn pauli_dot(v: &Direction) -> DMatrix<Complex64> {
    let c = |re, im| Complex64::new(re, im);
    DMatrix::from_row_slice(2, 2, &[c(v[2], 0.0), c(v[0], -v[1]), c(v[0], v[1]), c(-v[2], 0.0)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable {
    matrix: DMatrix<Complex64>,
    num_qubits: usize,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, one per eigenvalue.
    pub eigenvectors: Vec<StateVector>,
}

impl HermitianObservable {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch { expected: dim.next_power_of_two().max(2), got: matrix.ncols() });
        }
        let obs = Self { num_qubits: dim.trailing_zeros() as usize, matrix };
        let err = obs.hermiticity_error();
        if err > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidParameter(format!("matrix is not Hermitian (deviation {err:e})")));
        }
        Ok(obs)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |B - B†|` over entries.
    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn spectrum(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = order
            .iter()
            .map(|&i| {
                let col = eig.eigenvectors.column(i).iter().copied().collect();
                StateVector::normalized(col).expect("eigenvectors are nonzero")
            })
            .collect();
        Spectrum { eigenvalues, eigenvectors }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectrum().eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn chsh_matrix(first: DirectionPair, second: DirectionPair) -> DMatrix<Complex64> {
    let (a, a_p) = (pauli_dot(&first.a), pauli_dot(&first.a_prime));
    let (b, b_p) = (pauli_dot(&second.a), pauli_dot(&second.a_prime));
    a.kronecker(&b) + a.kronecker(&b_p) + a_p.kronecker(&b) - a_p.kronecker(&b_p)
}

/// Two-particle CHSH operator `a⊗b + a⊗b' + a'⊗b - a'⊗b'`.
pub fn chsh_operator(spec: &BellOperatorSpec) -> Result<HermitianObservable> {
    if spec.num_particles() != 2 {
        return Err(Error::InvalidParameter(format!("CHSH operator needs 2 particles, got {}", spec.num_particles())));
    }
    HermitianObservable::from_matrix(chsh_matrix(spec.pairs[0], spec.pairs[1]))
}

/// `B_n = B_(n-1) ⊗ (a_n + a'_n)/2 + B'_(n-1) ⊗ (a_n - a'_n)/2`, where `B'`
/// is `B` with every primed and unprimed direction exchanged.
pub fn bell_operator_n(spec: &BellOperatorSpec) -> Result<HermitianObservable> {
    if spec.num_particles() < 3 {
        return Err(Error::InvalidParameter("use chsh_operator for two particles".into()));
    }
    let p = &spec.pairs;
    let mut current = chsh_matrix(p[0], p[1]);
    let mut primed = chsh_matrix(p[0].swapped(), p[1].swapped());
    let half = Complex64::new(0.5, 0.0);
    for pair in &p[2..] {
        let (a, a_p) = (pauli_dot(&pair.a), pauli_dot(&pair.a_prime));
        let sum = (&a + &a_p) * half;
        let diff = (&a - &a_p) * half;
        let next = current.kronecker(&sum) + primed.kronecker(&diff);
        // The primed partner swaps roles, so the difference term flips sign.
        let next_primed = primed.kronecker(&sum) - current.kronecker(&diff);
        current = next;
        primed = next_primed;
    }
    HermitianObservable::from_matrix(current)
}

/// Dispatches on the particle count.
pub fn bell_operator(spec: &BellOperatorSpec) -> Result<HermitianObservable> {
    if spec.num_particles() == 2 {
        chsh_operator(spec)
    } else {
        bell_operator_n(spec)
    }
}

/// A gate list over `num_data` data qubits followed by `num_ancillas`
/// ancillas, all ancillas starting in `|0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub num_data: usize,
    pub num_ancillas: usize,
    pub gates: Vec<GateOp>,
}

impl Network {
    pub fn bell(convention: HadamardConvention) -> Self {
        Self { num_data: 2, num_ancillas: 2, gates: bell_network_unitary_steps(convention) }
    }

    pub fn ghz(n: usize, convention: HadamardConvention) -> Result<Self> {
        Ok(Self { num_data: n, num_ancillas: n, gates: ghz_network_gate_list(n, convention)? })
    }

    pub fn identity(num_data: usize) -> Self {
        Self { num_data, num_ancillas: 0, gates: Vec::new() }
    }

    /// Kraus operator `<m| U |0>` on the data register for every ancilla
    /// readout `m`, ordered by `m` read as a binary number.
    pub fn kraus_operators(&self) -> Result<Vec<(Vec<u8>, DMatrix<Complex64>)>> {
        let total = self.num_data + self.num_ancillas;
        if self.num_data == 0 || total > MAX_QUBITS {
            return Err(Error::UnsupportedSize(total));
        }
        let d = 1usize << self.num_data;
        let outcomes = 1usize << self.num_ancillas;
        let mut kraus = vec![DMatrix::<Complex64>::zeros(d, d); outcomes];
        for col in 0..d {
            let bits: Vec<u8> = (0..self.num_data).map(|q| ((col >> (self.num_data - 1 - q)) & 1) as u8).collect();
            let input = StateVector::basis(self.num_data, &bits)?.with_zero_ancillas(self.num_ancillas)?;
            let out = input.apply_gates(&self.gates)?;
            for (index, amp) in out.amplitudes().iter().enumerate() {
                let (row, m) = (index >> self.num_ancillas, index & (outcomes - 1));
                kraus[m][(row, col)] = *amp;
            }
        }
        Ok(kraus
            .into_iter()
            .enumerate()
            .map(|(m, k)| {
                let bits = (0..self.num_ancillas).map(|i| ((m >> (self.num_ancillas - 1 - i)) & 1) as u8).collect();
                (bits, k)
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchReport {
    pub ancilla_bits: Vec<u8>,
    /// `max |[K_m, B]|` over entries.
    pub commutator_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenstateReport {
    pub eigenvalue: f64,
    pub eigenvector: StateVector,
    /// Most likely readout for this eigenvector.
    pub branch: Vec<u8>,
    pub branch_probability: f64,
    /// Fidelity of the renormalized branch output with the eigenvector.
    pub fidelity: f64,
}

impl EigenstateReport {
    pub fn self_mapped(&self, tolerance: f64) -> bool {
        self.branch_probability >= 1.0 - tolerance && self.fidelity >= 1.0 - tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub branches: Vec<BranchReport>,
    pub eigenstates: Vec<EigenstateReport>,
}

impl CompatibilityReport {
    pub fn max_commutator_norm(&self) -> f64 {
        self.branches.iter().fold(0.0, |m, b| m.max(b.commutator_norm))
    }

    pub fn all_self_mapped(&self, tolerance: f64) -> bool {
        self.eigenstates.iter().all(|e| e.self_mapped(tolerance))
    }
}

/// Checks whether every measurement branch of `network` commutes with
/// `observable` and whether the observable's eigenstates survive their
/// branch up to phase.
///
/// Inside a degenerate eigenspace the eigenbasis is fixed by diagonalizing
/// `Σ_m (m+1) K_m†K_m` restricted to it, so that when the branches commute
/// with the observable the reported eigenvectors are shared with them.
pub fn qnd_compatibility_check(observable: &HermitianObservable, network: &Network) -> Result<CompatibilityReport> {
    if observable.num_qubits() != network.num_data {
        return Err(Error::DimensionMismatch { expected: 1 << network.num_data, got: observable.dim() });
    }
    let kraus = network.kraus_operators()?;
    let b = observable.matrix();
    let branches = kraus
        .iter()
        .map(|(bits, k)| BranchReport { ancilla_bits: bits.clone(), commutator_norm: max_abs(&(k * b - b * k)) })
        .collect();

    let d = observable.dim();
    let mut weighting = DMatrix::<Complex64>::zeros(d, d);
    for (m, (_, k)) in kraus.iter().enumerate() {
        weighting += k.adjoint() * k * Complex64::new((m + 1) as f64, 0.0);
    }

    let spectrum = observable.spectrum();
    let mut eigenstates = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (spectrum.eigenvalues[start] - spectrum.eigenvalues[end]).abs() < DEGENERACY_TOLERANCE {
            end += 1;
        }
        let basis = DMatrix::from_fn(d, end - start, |r, c| spectrum.eigenvectors[start + c].amplitudes()[r]);
        let restricted = basis.adjoint() * &weighting * &basis;
        let local = SymmetricEigen::new(restricted);
        for c in 0..end - start {
            let v = &basis * local.eigenvectors.column(c);
            let vector = StateVector::normalized(v.iter().copied().collect())?;
            eigenstates.push(branch_image(spectrum.eigenvalues[start], vector, &kraus)?);
        }
        start = end;
    }
    Ok(CompatibilityReport { branches, eigenstates })
}

fn branch_image(
    eigenvalue: f64,
    vector: StateVector,
    kraus: &[(Vec<u8>, DMatrix<Complex64>)],
) -> Result<EigenstateReport> {
    let mut best: Option<(usize, f64, Vec<Complex64>)> = None;
    for (m, (_, k)) in kraus.iter().enumerate() {
        let image = vector.apply_dense_operator(k)?;
        let p: f64 = image.iter().map(|a| a.norm_sqr()).sum();
        if best.as_ref().is_none_or(|(_, bp, _)| p > *bp) {
            best = Some((m, p, image));
        }
    }
    let (m, branch_probability, image) = best.expect("at least one branch");
    let fidelity = if branch_probability > 0.0 {
        let image = StateVector::normalized(image)?;
        vector.fidelity(&image)?
    } else {
        0.0
    };
    Ok(EigenstateReport { eigenvalue, eigenvector: vector, branch: kraus[m].0.clone(), branch_probability, fidelity })
}

/// Overlap of `vector` with every canonical GHZ basis state.
pub fn ghz_overlaps(vector: &StateVector) -> Result<Vec<(GhzLabel, f64)>> {
    ghz_projection_oracle(vector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::BellLabel;

    fn sorted_eigs(obs: &HermitianObservable) -> Vec<f64> {
        let mut e = obs.spectrum().eigenvalues;
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn canonical_chsh_spectrum() {
        let b = chsh_operator(&BellOperatorSpec::canonical_chsh()).unwrap();
        let e = sorted_eigs(&b);
        let t = 2.0 * std::f64::consts::SQRT_2;
        let expected = [-t, 0.0, 0.0, t];
        for (got, want) in e.iter().zip(expected) {
            assert!((got - want).abs() < 1e-10, "{e:?}");
        }
        assert!(b.hermiticity_error() < 1e-12);
    }

    #[test]
    fn parallel_directions_collapse_to_zz() {
        let spec = BellOperatorSpec::new(vec![DirectionPair::new(Z, Z); 2]).unwrap();
        let b = chsh_operator(&spec).unwrap();
        let zz = pauli_dot(&Z).kronecker(&pauli_dot(&Z)) * Complex64::new(2.0, 0.0);
        assert!(max_abs(&(b.matrix() - zz)) < 1e-15);
        let e = sorted_eigs(&b);
        assert!((e[0] + 2.0).abs() < 1e-12 && (e[3] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mermin_three_particles() {
        let b = bell_operator_n(&BellOperatorSpec::mermin_xy(3).unwrap()).unwrap();
        assert!(b.hermiticity_error() < 1e-12);
        assert!((b.spectral_radius() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn equal_directions_drop_second_term() {
        let d = DirectionPair::new([0.6, 0.0, 0.8], [0.6, 0.0, 0.8]);
        let spec = BellOperatorSpec::new(vec![d; 3]).unwrap();
        let b3 = bell_operator_n(&spec).unwrap();
        let b2 = chsh_operator(&BellOperatorSpec::new(vec![d; 2]).unwrap()).unwrap();
        let expected = b2.matrix().kronecker(&pauli_dot(&d.a));
        assert!(max_abs(&(b3.matrix() - expected)) < 1e-14);
    }

    #[test]
    fn canonical_top_eigenvector_is_ghz() {
        for n in 3..=6 {
            let b = bell_operator_n(&BellOperatorSpec::canonical(n).unwrap()).unwrap();
            let spectrum = b.spectrum();
            assert!(spectrum.eigenvalues[0] - spectrum.eigenvalues[1] > 1e-6);
            let overlaps = ghz_overlaps(&spectrum.eigenvectors[0]).unwrap();
            let best = overlaps.iter().map(|(_, p)| *p).fold(0.0, f64::max);
            assert!(best > 1.0 - 1e-10, "n={n}: {best}");
        }
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(
            BellOperatorSpec::new(vec![DirectionPair::new([1.0, 1.0, 0.0], X); 2]),
            Err(Error::NotUnitVector(_))
        ));
        assert!(BellOperatorSpec::new(vec![DirectionPair::new(X, Y)]).is_err());
        assert!(bell_operator_n(&BellOperatorSpec::canonical_chsh()).is_err());
        assert!(chsh_operator(&BellOperatorSpec::mermin_xy(3).unwrap()).is_err());
        let json = r#"{"directions":[{"a":[0,0,1],"a_prime":[1,0,0]},{"a":[1,0,0],"a_prime":[0,1,0]}]}"#;
        let spec = BellOperatorSpec::from_json(json).unwrap();
        assert_eq!(spec.num_particles(), 2);
        assert!(BellOperatorSpec::from_json(r#"{"directions":[{"a":[0,0,2],"a_prime":[1,0,0]}]}"#).is_err());
    }

    #[test]
    fn bell_network_branches_commute_with_chsh() {
        let b = chsh_operator(&BellOperatorSpec::canonical_chsh()).unwrap();
        let report = qnd_compatibility_check(&b, &Network::bell(HadamardConvention::Paper)).unwrap();
        assert_eq!(report.branches.len(), 4);
        assert!(report.max_commutator_norm() < 1e-12);
        assert!(report.all_self_mapped(1e-10));
        for e in &report.eigenstates {
            let label = crate::bell::decode_bell(e.branch[0], e.branch[1]).unwrap();
            assert!(e.eigenvector.fidelity(&label.state()).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn local_z_is_not_a_qnd_variable_of_the_network() {
        let zi = pauli_dot(&Z).kronecker(&DMatrix::identity(2, 2));
        let obs = HermitianObservable::from_matrix(zi).unwrap();
        let report = qnd_compatibility_check(&obs, &Network::bell(HadamardConvention::Paper)).unwrap();
        assert!(report.max_commutator_norm() > 0.1);
        assert!(!report.all_self_mapped(1e-10));
    }

    #[test]
    fn identity_network_commutes_with_everything() {
        let b = chsh_operator(&BellOperatorSpec::canonical_chsh()).unwrap();
        let report = qnd_compatibility_check(&b, &Network::identity(2)).unwrap();
        assert_eq!(report.max_commutator_norm(), 0.0);
        assert!(report.all_self_mapped(1e-10));

        let with_idle_ancillas = Network { num_data: 2, num_ancillas: 2, gates: vec![] };
        let report = qnd_compatibility_check(&b, &with_idle_ancillas).unwrap();
        assert_eq!(report.max_commutator_norm(), 0.0);
    }

    #[test]
    fn kraus_branches_are_bell_projectors() {
        let kraus = Network::bell(HadamardConvention::Paper).kraus_operators().unwrap();
        for ((bits, k), label) in kraus.iter().zip(BellLabel::ALL) {
            assert_eq!((bits[0], bits[1]), label.bits());
            let v = label.state();
            let out = v.apply_dense_operator(k).unwrap();
            let overlap: Complex64 = v.amplitudes().iter().zip(&out).map(|(a, b)| a.conj() * b).sum();
            assert!((overlap - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let b = chsh_operator(&BellOperatorSpec::canonical_chsh()).unwrap();
        assert!(qnd_compatibility_check(&b, &Network::ghz(3, HadamardConvention::Paper).unwrap()).is_err());
    }
}
