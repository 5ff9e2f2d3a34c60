//! Authentication by repeated Bell-basis checks.
//!
//! An account holds `n` entangled pairs. The card keeps one qubit of each
//! pair, the machine keeps the other together with two classical bits per
//! pair recording which Bell state the pair was left in. A session runs the
//! non-demolition network on every (card slot, machine) pair and compares the
//! readout with the records. Accepted sessions overwrite the records with
//! the fresh readout, so the account can be reused indefinitely.
//!
//! Everything is seeded: the same seed always gives the same session.

mod attacker;
mod noise;
mod sweep;

pub use attacker::{attacker_round_distribution, round_distribution, AttackerModel, Preparation};
pub use noise::{apply_noise, NoiseModel, NoiseSpec};
pub use sweep::{analytic_accept_rate, match_probability, security_sweep, trial_seed, SweepConfig, SweepRow};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bell::{bell_qnd_on_register, decode_bell, BellLabel};
use crate::error::{Error, Result};
use crate::statevec::{HadamardConvention, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccountStatus {
    Active,
    /// Set by a rejected session; permanent for this account.
    Flagged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthAccount {
    /// Two-qubit joint states, card qubit first.
    pairs: Vec<StateVector>,
    /// `(parity, phase)` record per pair.
    records: Vec<(u8, u8)>,
    status: AccountStatus,
}

impl AuthAccount {
    pub fn pairs(&self) -> &[StateVector] {
        &self.pairs
    }

    pub fn records(&self) -> &[(u8, u8)] {
        &self.records
    }

    pub fn status(&self) -> AccountStatus {
        self.status
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Bell states named by the current records.
    pub fn recorded_labels(&self) -> Vec<BellLabel> {
        self.records.iter().map(|&(p, s)| decode_bell(p, s).expect("records hold bits")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialLabels {
    Given(Vec<BellLabel>),
    /// Uniformly random labels drawn from the enrollment seed.
    Random,
}

pub fn enroll(n: usize, labels: InitialLabels, seed: u64) -> Result<AuthAccount> {
    if n == 0 {
        return Err(Error::InvalidParameter("an account needs at least one pair".into()));
    }
    let labels = match labels {
        InitialLabels::Given(labels) => {
            if labels.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: labels.len() });
            }
            labels
        }
        InitialLabels::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| BellLabel::ALL[rng.random_range(0..4)]).collect()
        }
    };
    Ok(AuthAccount {
        pairs: labels.iter().map(|l| l.state()).collect(),
        records: labels.iter().map(|l| l.bits()).collect(),
        status: AccountStatus::Active,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    pub attacker: AttackerModel,
    pub noise: NoiseSpec,
    /// Minimum fraction of matching pairs for acceptance.
    pub threshold: f64,
    /// Outcome of the classical password check that gates quantum access.
    pub password_ok: bool,
    pub convention: HadamardConvention,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            attacker: AttackerModel::Legitimate,
            noise: NoiseSpec::none(),
            threshold: 1.0,
            password_ok: true,
            convention: HadamardConvention::Paper,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub per_pair_match: Vec<bool>,
    pub match_fraction: f64,
    pub accepted: bool,
    /// Readout of this session; written to the account only if accepted.
    pub updated_records: Vec<(u8, u8)>,
}

/// One verification session. Per pair: sample noise on the stored pair, let
/// the attacker model fill the card slot, run the network with fresh
/// ancillas, compare with the record. The pair is left collapsed onto the
/// Bell state that was read out, whatever the verdict.
pub fn verify_session(account: &mut AuthAccount, config: &SessionConfig, seed: u64) -> Result<SessionResult> {
    if account.status == AccountStatus::Flagged {
        return Err(Error::AccountFlagged);
    }
    if !config.password_ok {
        return Err(Error::AccessDenied);
    }
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(Error::InvalidParameter(format!("threshold {} outside [0, 1]", config.threshold)));
    }
    NoiseSpec::new(config.noise.model, config.noise.p)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_pair_match = Vec::with_capacity(account.num_pairs());
    let mut readout = Vec::with_capacity(account.num_pairs());
    let mut collapsed = Vec::with_capacity(account.num_pairs());
    for (pair, &record) in account.pairs.iter().zip(&account.records) {
        let noisy = apply_noise(pair, &config.noise, &mut rng)?;
        let presented = attacker::present(config.attacker, &noisy, &mut rng)?;
        let draws = [rng.random::<f64>(), rng.random::<f64>()];
        let r = bell_qnd_on_register(&presented.register, presented.slot, presented.machine, config.convention, draws)?;
        let bits = (r.parity_bit, r.phase_bit);
        per_pair_match.push(bits == record);
        readout.push(bits);
        collapsed.push(if presented.register.num_qubits() == 2 {
            r.post_state
        } else {
            // The branch projector is rank one on (slot, machine), so that
            // pair is left exactly in the decoded Bell state.
            decode_bell(bits.0, bits.1)?.state()
        });
    }

    let n = account.num_pairs();
    let matches = per_pair_match.iter().filter(|&&m| m).count();
    let match_fraction = matches as f64 / n as f64;
    let accepted = match_fraction >= config.threshold;

    account.pairs = collapsed;
    if accepted {
        account.records = readout.clone();
    } else {
        account.status = AccountStatus::Flagged;
    }
    Ok(SessionResult { per_pair_match, match_fraction, accepted, updated_records: readout })
}
