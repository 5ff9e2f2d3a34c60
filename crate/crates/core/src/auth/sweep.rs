use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::attacker::{round_distribution, AttackerModel};
use super::noise::NoiseSpec;
use super::{enroll, verify_session, InitialLabels, SessionConfig};
use crate::bell::BellLabel;
use crate::error::{Error, Result};
use crate::statevec::HadamardConvention;
use crate::stats::{binomial_upper_tail, wilson_interval, Z_THREE_SIGMA};

/// Seed of trial `index` under root seed `root`.
pub fn trial_seed(root: u64, index: u64) -> u64 {
    root.wrapping_add(index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub pairs: Vec<usize>,
    pub attacker: AttackerModel,
    pub noise: NoiseSpec,
    pub threshold: f64,
    pub trials: u64,
    pub seed: u64,
    pub convention: HadamardConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub attacker: String,
    pub noise: String,
    pub p: f64,
    pub trials: u64,
    pub accept_rate: f64,
    pub analytic_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Probability that one pair's readout matches its record, averaged over the
/// uniformly random enrollment label.
pub fn match_probability(attacker: AttackerModel, noise: &NoiseSpec, convention: HadamardConvention) -> Result<f64> {
    let mut total = 0.0;
    for label in BellLabel::ALL {
        total += round_distribution(attacker, label, noise, convention)?[label.index()];
    }
    Ok((total / 4.0).clamp(0.0, 1.0))
}

/// Exact acceptance probability of an `n`-pair session. Pairs are
/// independent, so the match count is binomial.
pub fn analytic_accept_rate(
    n: usize,
    attacker: AttackerModel,
    noise: &NoiseSpec,
    threshold: f64,
    convention: HadamardConvention,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let q = match_probability(attacker, noise, convention)?;
    // Same comparison as the session verdict.
    let k_min = (0..=n).find(|&k| k as f64 / n as f64 >= threshold).unwrap_or(n + 1);
    if k_min == n {
        // Avoid the DP round-off on the common all-pairs case.
        return Ok(q.powi(n as i32));
    }
    Ok(binomial_upper_tail(n, q, k_min))
}

fn run_trial(n: usize, session: &SessionConfig, root: u64, index: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(root, index));
    let enroll_seed = rng.next_u64();
    let session_seed = rng.next_u64();
    let mut account = enroll(n, InitialLabels::Random, enroll_seed)?;
    Ok(verify_session(&mut account, session, session_seed)?.accepted)
}

/// Monte-Carlo acceptance rate next to the exact value for every `n`.
///
/// Trial `t` draws an enrollment seed and a session seed, in that order,
/// from a generator seeded with [`trial_seed`]`(seed, t)`, so rows do not
/// depend on how trials are spread over threads.
pub fn security_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let session = SessionConfig {
        attacker: config.attacker,
        noise: config.noise,
        threshold: config.threshold,
        password_ok: true,
        convention: config.convention,
    };
    config
        .pairs
        .iter()
        .map(|&n| {
            let analytic_rate =
                analytic_accept_rate(n, config.attacker, &config.noise, config.threshold, config.convention)?;
            let accepted = (0..config.trials)
                .into_par_iter()
                .map(|t| run_trial(n, &session, config.seed, t).map(u64::from))
                .try_reduce(|| 0, |a, b| Ok(a + b))?;
            let (wilson_low, wilson_high) = wilson_interval(accepted, config.trials, Z_THREE_SIGMA);
            Ok(SweepRow {
                n,
                attacker: config.attacker.to_string(),
                noise: config.noise.model.to_string(),
                p: config.noise.p,
                trials: config.trials,
                accept_rate: accepted as f64 / config.trials as f64,
                analytic_rate,
                wilson_low,
                wilson_high,
            })
        })
        .collect()
}
