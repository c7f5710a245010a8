//! Brute-force channel code: every codebook partition gets `K` slots, one per
//! group, and the decoder looks for a block the channel fills with ones.

use crate::error::{check_dim, Result};
use crate::model::{or_channel, AccessMatrix, Feedback, PartitionVector, StatusVector};
use crate::source_coding::{generate_codebook, sample_status, SourceCodebook};
use crate::stats::{count_failures, trial_rng, ErrorEstimate};
use crate::{Decoded, DecodingFailure};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceCode {
    codebook: SourceCodebook,
    matrix: AccessMatrix,
}

impl BruteForceCode {
    pub fn codebook(&self) -> &SourceCodebook {
        &self.codebook
    }

    pub fn matrix(&self) -> &AccessMatrix {
        &self.matrix
    }

    /// `T = K * L`.
    pub fn n_slots(&self) -> usize {
        self.matrix.n_slots()
    }
}

/// Block `l` occupies slots `K*(l-1) .. K*l`; user `i` writes only in the slot
/// of its group `z_{l;i}`.
pub fn build_matrix(cb: &SourceCodebook) -> BruteForceCode {
    let k = cb.n_groups();
    let matrix = AccessMatrix::from_fn(cb.n_users(), k * cb.len(), |user, t| {
        let (block, column) = (t / k, t % k);
        cb.entries()[block].label(user) == column + 1
    })
    .expect("codebook has at least one user");
    BruteForceCode {
        codebook: cb.clone(),
        matrix,
    }
}

/// Returns the partition of the first block whose feedback is all ones.
pub fn decode(code: &BruteForceCode, y: &Feedback) -> Result<Decoded> {
    check_dim("feedback length", code.n_slots(), y.len())?;
    let k = code.codebook.n_groups();
    let hit = (0..code.codebook.len()).find(|&block| (0..k).all(|c| y.get(block * k + c)));
    Ok(hit
        .map(|block| code.codebook.entries()[block].clone())
        .ok_or(DecodingFailure))
}

/// Outcome of one brute-force transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub decoded: Decoded,
}

impl TrialOutcome {
    pub fn is_correct(&self) -> bool {
        self.decoded.is_ok()
    }
}

/// Builds the code, transmits `s` through the OR channel and decodes.
pub fn run_trial(cb: &SourceCodebook, s: &StatusVector) -> Result<TrialOutcome> {
    let code = build_matrix(cb);
    run_trial_with(&code, s)
}

pub fn run_trial_with(code: &BruteForceCode, s: &StatusVector) -> Result<TrialOutcome> {
    check_dim("active user count", code.codebook.n_groups(), s.k())?;
    let y = or_channel(&code.matrix, s)?;
    Ok(TrialOutcome {
        decoded: decode(code, &y)?,
    })
}

/// Decoded partition when it exists, for callers that only care about success.
pub fn decoded_partition(outcome: &TrialOutcome) -> Option<&PartitionVector> {
    outcome.decoded.as_ref().ok()
}

/// Monte Carlo error of the brute-force scheme with a fresh codebook and a
/// uniform active set per trial.
pub fn empirical_error(
    n: usize,
    k: usize,
    l: usize,
    trials: u64,
    master_seed: u64,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return crate::error::invalid("trials must be at least 1");
    }
    // validates n, k, l up front
    generate_codebook(n, k, l, &mut trial_rng(master_seed, 0))?;
    let failures = count_failures(trials, master_seed, |rng, _| {
        let cb = generate_codebook(n, k, l, rng).expect("validated parameters");
        let s = sample_status(n, k, rng);
        !run_trial(&cb, &s)
            .expect("matching dimensions")
            .is_correct()
    });
    Ok(ErrorEstimate::from_counts(failures, trials))
}
