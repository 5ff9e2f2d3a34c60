use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::noise::NoiseSpec;
use crate::bell::{bell_network_stages_on, BellLabel};
use crate::error::{Error, Result};
use crate::statevec::{HadamardConvention, StateVector};

/// How a fresh single qubit is prepared by an attacker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preparation {
    FixedZero,
    HaarRandom,
}

/// Who fills the card slot. The machine qubit, ancillas and records are
/// never reachable by any model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttackerModel {
    /// The genuine card qubit is presented.
    Legitimate,
    /// An unentangled qubit of the attacker's choosing.
    FreshQubit(Preparation),
    /// One half of a `Φ+` pair whose other half the attacker keeps.
    EntangledDecoy,
    /// One half of a pair prepared in a uniformly guessed Bell state.
    RandomBellGuess,
}

impl AttackerModel {
    pub const ALL: [AttackerModel; 5] = [
        AttackerModel::Legitimate,
        AttackerModel::FreshQubit(Preparation::FixedZero),
        AttackerModel::FreshQubit(Preparation::HaarRandom),
        AttackerModel::EntangledDecoy,
        AttackerModel::RandomBellGuess,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackerModel::Legitimate => "legitimate",
            AttackerModel::FreshQubit(Preparation::FixedZero) => "fresh-zero",
            AttackerModel::FreshQubit(Preparation::HaarRandom) => "fresh-haar",
            AttackerModel::EntangledDecoy => "decoy",
            AttackerModel::RandomBellGuess => "guess",
        }
    }
}

impl fmt::Display for AttackerModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackerModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackerModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown attacker model `{s}`")))
    }
}

/// Register handed to the machine: the stored pair plus whatever the
/// attacker brings, with the positions of the slot and machine qubits.
#[derive(Debug, Clone)]
pub(crate) struct Presented {
    pub register: StateVector,
    pub slot: usize,
    pub machine: usize,
}

/// Seed of the representative Haar draw used by the exact analysis.
const REPRESENTATIVE_HAAR_SEED: u64 = 0x005e_ed0f_4aa7;

fn decoy_register(decoy: BellLabel, pair: &StateVector) -> Result<Presented> {
    Ok(Presented { register: decoy.state().tensor(pair)?, slot: 1, machine: 3 })
}

/// Builds the presented register for one pair (card qubit 0, machine qubit 1).
pub(crate) fn present<R: Rng + ?Sized>(model: AttackerModel, pair: &StateVector, rng: &mut R) -> Result<Presented> {
    match model {
        AttackerModel::Legitimate => Ok(Presented { register: pair.clone(), slot: 0, machine: 1 }),
        AttackerModel::FreshQubit(prep) => {
            let fresh = match prep {
                Preparation::FixedZero => StateVector::zero(1)?,
                Preparation::HaarRandom => StateVector::random(1, rng)?,
            };
            Ok(Presented { register: fresh.tensor(pair)?, slot: 0, machine: 2 })
        }
        AttackerModel::EntangledDecoy => decoy_register(BellLabel::PhiPlus, pair),
        AttackerModel::RandomBellGuess => decoy_register(BellLabel::ALL[rng.random_range(0..4)], pair),
    }
}

/// Every register the attacker might present, with its probability weight.
fn presented_mixture(model: AttackerModel, pair: &StateVector) -> Result<Vec<(f64, Presented)>> {
    match model {
        AttackerModel::RandomBellGuess => {
            BellLabel::ALL.into_iter().map(|guess| Ok((0.25, decoy_register(guess, pair)?))).collect()
        }
        AttackerModel::FreshQubit(Preparation::HaarRandom) => {
            let mut rng = ChaCha8Rng::seed_from_u64(REPRESENTATIVE_HAAR_SEED);
            Ok(vec![(1.0, present(model, pair, &mut rng)?)])
        }
        _ => {
            let mut unused = ChaCha8Rng::seed_from_u64(0);
            Ok(vec![(1.0, present(model, pair, &mut unused)?)])
        }
    }
}

/// Readout distribution of the Bell network on `(slot, machine)` by summing
/// squared amplitudes over the ancilla branches.
pub(crate) fn readout_distribution(presented: &Presented, convention: HadamardConvention) -> Result<[f64; 4]> {
    let n = presented.register.num_qubits();
    let mut joint = presented.register.with_zero_ancillas(2)?;
    for stage in bell_network_stages_on(convention, presented.slot, presented.machine, n, n + 1) {
        joint = joint.apply_gates(&stage)?;
    }
    let dist = joint.marginal_distribution(&[n, n + 1])?;
    Ok([dist[0], dist[1], dist[2], dist[3]])
}

/// Exact probabilities of the four readouts, ordered `(Φ+, Φ-, Ψ+, Ψ-)`,
/// when the stored pair starts in `true_label`, every Pauli error pattern of
/// `noise` on the stored pair is enumerated with its weight, and the attacker
/// presents `model`'s qubit.
pub fn round_distribution(
    model: AttackerModel,
    true_label: BellLabel,
    noise: &NoiseSpec,
    convention: HadamardConvention,
) -> Result<[f64; 4]> {
    NoiseSpec::new(noise.model, noise.p)?;
    let weights = noise.pauli_weights();
    let mut total = [0.0; 4];
    for &(card_err, w_card) in &weights {
        for &(machine_err, w_machine) in &weights {
            let w = w_card * w_machine;
            if w == 0.0 {
                continue;
            }
            let mut pair = true_label.state();
            pair.apply_pauli_in_place(0, card_err)?;
            pair.apply_pauli_in_place(1, machine_err)?;
            for (w_prep, presented) in presented_mixture(model, &pair)? {
                let dist = readout_distribution(&presented, convention)?;
                for (t, d) in total.iter_mut().zip(dist) {
                    *t += w * w_prep * d;
                }
            }
        }
    }
    Ok(total.map(|t| t.clamp(0.0, 1.0)))
}

/// Noiseless [`round_distribution`] with the paper Hadamard.
pub fn attacker_round_distribution(model: AttackerModel, true_pair_label: BellLabel) -> [f64; 4] {
    round_distribution(model, true_pair_label, &NoiseSpec::none(), HadamardConvention::Paper)
        .expect("noiseless analysis of a valid label cannot fail")
}
