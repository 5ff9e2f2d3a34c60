use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{Pauli, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    #[default]
    None,
    /// With probability `p` the qubit is hit by a uniformly random element of
    /// `{I, X, Y, Z}`, i.e. replaced by the maximally mixed state.
    Depolarizing,
    /// With probability `p` the qubit is hit by `Z`.
    Dephasing,
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "depolarizing" => Ok(Self::Depolarizing),
            "dephasing" => Ok(Self::Dephasing),
            other => Err(Error::InvalidParameter(format!("unknown noise model `{other}`"))),
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Depolarizing => "depolarizing",
            Self::Dephasing => "dephasing",
        })
    }
}

/// Per-qubit, per-session noise.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub model: NoiseModel,
    pub p: f64,
}

impl NoiseSpec {
    pub fn new(model: NoiseModel, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("noise probability {p} outside [0, 1]")));
        }
        Ok(Self { model, p })
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Marginal probability of each Pauli acting on one qubit.
    pub fn pauli_weights(&self) -> [(Pauli, f64); 4] {
        let p = self.p;
        match self.model {
            NoiseModel::None => [(Pauli::I, 1.0), (Pauli::X, 0.0), (Pauli::Y, 0.0), (Pauli::Z, 0.0)],
            NoiseModel::Depolarizing => {
                let e = p / 4.0;
                [(Pauli::I, 1.0 - 3.0 * e), (Pauli::X, e), (Pauli::Y, e), (Pauli::Z, e)]
            }
            NoiseModel::Dephasing => [(Pauli::I, 1.0 - p), (Pauli::X, 0.0), (Pauli::Y, 0.0), (Pauli::Z, p)],
        }
    }

    /// Samples the Pauli for one qubit. Exactly one uniform draw is consumed
    /// unless an error fires, so `p = 0` leaves the generator in the same
    /// position as the noiseless model.
    pub fn sample_pauli<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        let fires = rng.random::<f64>() < self.p;
        match self.model {
            NoiseModel::None => Pauli::I,
            _ if !fires => Pauli::I,
            NoiseModel::Dephasing => Pauli::Z,
            NoiseModel::Depolarizing => Pauli::ALL[rng.random_range(0..4)],
        }
    }
}

/// One noise trajectory: every qubit independently receives a sampled Pauli.
pub fn apply_noise<R: Rng + ?Sized>(state: &StateVector, spec: &NoiseSpec, rng: &mut R) -> Result<StateVector> {
    NoiseSpec::new(spec.model, spec.p)?;
    state.ensure_normalized()?;
    let mut out = state.clone();
    for q in 0..state.num_qubits() {
        let pauli = spec.sample_pauli(rng);
        out.apply_pauli_in_place(q, pauli)?;
    }
    Ok(out)
}
