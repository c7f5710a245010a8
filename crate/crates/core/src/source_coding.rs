//! Centralized source coding of the active set into a partition: the
//! partition information `W_N^I`, balanced random codebooks and the
//! codebook-size error bound.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, log2_big};
use crate::error::{check_dim, invalid, Result};
use crate::model::{GroupSizes, PartitionVector, StatusVector};
use crate::stats::{count_failures, ErrorEstimate};

/// Balanced split of `n` users into `k` groups: the `n mod k` larger groups
/// come first. This split maximizes `Π n_k` under `Σ n_k = n`.
pub fn optimal_group_sizes(n: usize, k: usize) -> Result<GroupSizes> {
    if k == 0 || k > n {
        return invalid(format!("need 1 <= K <= N, got K={k}, N={n}"));
    }
    let (base, extra) = (n / k, n % k);
    GroupSizes::new((0..k).map(|i| base + usize::from(i < extra)).collect())
}

/// `W_N^I = log2 C(N,K) - Σ log2 n*_k`, in bits.
pub fn partition_information_bits(n: usize, k: usize) -> Result<f64> {
    let sizes = optimal_group_sizes(n, k)?;
    Ok(log2_big(&binomial(n, k)) - log2_big(&sizes.product()))
}

/// Uniform draw from the partitions with the given group sizes: shuffle the
/// users, then hand out consecutive blocks.
pub fn sample_uniform_partition<R: Rng + ?Sized>(
    sizes: &GroupSizes,
    rng: &mut R,
) -> PartitionVector {
    let n = sizes.n_users();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut labels = vec![0; n];
    let mut cursor = order.iter();
    for (group, &size) in sizes.as_slice().iter().enumerate() {
        for &user in cursor.by_ref().take(size) {
            labels[user] = group + 1;
        }
    }
    PartitionVector::new(labels, sizes.k()).expect("block assignment fills every group")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCodebook {
    n_users: usize,
    n_groups: usize,
    entries: Vec<PartitionVector>,
}

/// Source encoding found no codebook partition separating the actives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoValidCodeword;

impl SourceCodebook {
    /// Wraps explicit entries. All entries must share `N` and `K`.
    pub fn new(entries: Vec<PartitionVector>) -> Result<Self> {
        let Some(first) = entries.first() else {
            return invalid("codebook must contain at least one partition");
        };
        let (n_users, n_groups) = (first.n_users(), first.n_groups());
        for e in &entries {
            check_dim("codebook entry length", n_users, e.n_users())?;
            check_dim("codebook entry group count", n_groups, e.n_groups())?;
        }
        Ok(Self {
            n_users,
            n_groups,
            entries,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PartitionVector] {
        &self.entries
    }

    /// 1-based index of the partition, as used by the encoder.
    pub fn entry(&self, index: usize) -> &PartitionVector {
        &self.entries[index - 1]
    }
}

/// `L` independent balanced partitions.
pub fn generate_codebook<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    l: usize,
    rng: &mut R,
) -> Result<SourceCodebook> {
    if l == 0 {
        return invalid("codebook size L must be at least 1");
    }
    let sizes = optimal_group_sizes(n, k)?;
    SourceCodebook::new(
        (0..l)
            .map(|_| sample_uniform_partition(&sizes, rng))
            .collect(),
    )
}

/// Smallest 1-based index whose partition separates `s`.
pub fn source_encode(
    cb: &SourceCodebook,
    s: &StatusVector,
) -> Result<std::result::Result<usize, NoValidCodeword>> {
    check_dim("status vector length", cb.n_users, s.n_users())?;
    check_dim("active user count", cb.n_groups, s.k())?;
    Ok(cb
        .entries
        .iter()
        .position(|z| z.separates(s))
        .map(|i| i + 1)
        .ok_or(NoValidCodeword))
}

/// Upper bound `exp(-2^(log2 L - W))` on the source-coding error.
pub fn codebook_error_bound(l: f64, w_bits: f64) -> f64 {
    (-(l.log2() - w_bits).exp2()).exp()
}

/// Uniformly random status vector with `k` actives.
pub fn sample_status<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> StatusVector {
    let ids = rand::seq::index::sample(rng, n, k);
    StatusVector::new(n, ids.into_iter().map(|i| i + 1)).expect("k distinct ids in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookMode {
    /// Fresh codebook every trial (average over random codes).
    Redraw,
    /// One codebook drawn from the master seed, reused for all trials.
    Fixed,
}

/// Monte Carlo source-coding error: uniform `s` per trial, failure when the
/// codebook has no separating partition.
pub fn empirical_source_error(
    n: usize,
    k: usize,
    l: usize,
    trials: u64,
    master_seed: u64,
    mode: CodebookMode,
) -> Result<ErrorEstimate> {
    if trials == 0 {
        return invalid("trials must be at least 1");
    }
    optimal_group_sizes(n, k)?;
    if l == 0 {
        return invalid("codebook size L must be at least 1");
    }
    let fixed = match mode {
        CodebookMode::Fixed => Some(generate_codebook(
            n,
            k,
            l,
            &mut crate::stats::trial_rng(master_seed, u64::MAX),
        )?),
        CodebookMode::Redraw => None,
    };
    let failures = count_failures(trials, master_seed, |rng, _| {
        let drawn;
        let cb = match &fixed {
            Some(cb) => cb,
            None => {
                drawn = generate_codebook(n, k, l, rng).expect("validated parameters");
                &drawn
            }
        };
        let s = sample_status(n, k, rng);
        source_encode(cb, &s).expect("matching dimensions").is_err()
    });
    Ok(ErrorEstimate::from_counts(failures, trials))
}
