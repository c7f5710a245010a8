//! Domain types for the Boolean OR multi-access channel and the partition
//! distortion criterion.
//!
//! User ids are 1-based everywhere in the public interface. Slot indices are
//! ordinary 0-based positions into a feedback sequence.

use std::fmt;

use itertools::Itertools;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{factorial, multinomial, product};
use crate::error::{check_dim, invalid, Result};

/// The set of active users: `K` distinct ids out of `1..=N`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StatusVector {
    n_users: usize,
    active: Vec<usize>,
}

impl StatusVector {
    pub fn new(n_users: usize, active: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut active: Vec<usize> = active.into_iter().collect();
        active.sort_unstable();
        if active.is_empty() {
            return invalid("status vector needs at least one active user");
        }
        if active.len() > n_users {
            return invalid(format!(
                "{} active users out of only {n_users}",
                active.len()
            ));
        }
        if let Some(&bad) = active.iter().find(|&&id| id == 0 || id > n_users) {
            return invalid(format!("user id {bad} outside 1..={n_users}"));
        }
        if active.windows(2).any(|w| w[0] == w[1]) {
            return invalid("duplicate active user id");
        }
        Ok(Self { n_users, active })
    }

    /// The first `k` users, `{1, ..., K}`.
    pub fn first(n_users: usize, k: usize) -> Result<Self> {
        Self::new(n_users, 1..=k)
    }

    /// Every status vector with `k` actives out of `n`, in lexicographic order.
    pub fn all(n_users: usize, k: usize) -> impl Iterator<Item = StatusVector> {
        (1..=n_users)
            .combinations(k)
            .map(move |active| StatusVector { n_users, active })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn k(&self) -> usize {
        self.active.len()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, user: usize) -> bool {
        self.active.binary_search(&user).is_ok()
    }
}

/// Sizes `n_1, ..., n_K` of the groups of an ordered partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSizes(Vec<usize>);

impl GroupSizes {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return invalid("group sizes must name at least one group");
        }
        if sizes.contains(&0) {
            return invalid("every group must be nonempty");
        }
        Ok(Self(sizes))
    }

    pub fn n_users(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn product(&self) -> BigUint {
        product(&self.0)
    }
}

/// An ordered `K`-partition of the users, stored as a label per user.
/// Labels are in `1..=K` and every label is used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionVector {
    labels: Vec<usize>,
    n_groups: usize,
}

impl PartitionVector {
    pub fn new(labels: Vec<usize>, n_groups: usize) -> Result<Self> {
        if n_groups == 0 {
            return invalid("partition needs at least one group");
        }
        let mut seen = vec![false; n_groups];
        for &l in &labels {
            if l == 0 || l > n_groups {
                return invalid(format!("label {l} outside 1..={n_groups}"));
            }
            seen[l - 1] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return invalid(format!("group {} is empty", missing + 1));
        }
        Ok(Self { labels, n_groups })
    }

    /// Infers `K` as the largest label.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().copied().max().unwrap_or(0);
        Self::new(labels, k)
    }

    pub fn n_users(&self) -> usize {
        self.labels.len()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Label of a 1-based user id.
    pub fn label(&self, user: usize) -> usize {
        self.labels[user - 1]
    }

    pub fn group_sizes(&self) -> GroupSizes {
        let mut sizes = vec![0; self.n_groups];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        GroupSizes(sizes)
    }

    /// True when every active user of `s` gets its own group.
    pub fn separates(&self, s: &StatusVector) -> bool {
        let mut used = vec![false; self.n_groups];
        for &user in s.active() {
            let slot = &mut used[self.labels[user - 1] - 1];
            if *slot {
                return false;
            }
            *slot = true;
        }
        true
    }

    /// Applies a permutation of group ids: label `l` becomes `perm[l - 1]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        check_dim("label permutation", self.n_groups, perm.len())?;
        Self::new(
            self.labels.iter().map(|&l| perm[l - 1]).collect(),
            self.n_groups,
        )
    }

    /// Every element of `Z_{K;N}`, in lexicographic order of labels.
    pub fn all(n_users: usize, k: usize) -> impl Iterator<Item = PartitionVector> {
        (0..n_users)
            .map(|_| 1..=k)
            .multi_cartesian_product()
            .filter_map(move |labels| Self::new(labels, k).ok())
    }
}

impl fmt::Display for PartitionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.labels.iter().join(","))
    }
}

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// The `N x T` binary accessing matrix, one packed row per user so that a
/// user's codeword is contiguous.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AccessMatrix {
    n_users: usize,
    n_slots: usize,
    words: usize,
    bits: Vec<u64>,
}

impl AccessMatrix {
    pub fn zeros(n_users: usize, n_slots: usize) -> Result<Self> {
        if n_users == 0 {
            return invalid("access matrix needs at least one user");
        }
        let words = words_for(n_slots);
        Ok(Self {
            n_users,
            n_slots,
            words,
            bits: vec![0; n_users * words],
        })
    }

    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let n_slots = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), n_slots)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            check_dim("access matrix row length", n_slots, row.len())?;
            for (t, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(i + 1, t, true),
                    other => return invalid(format!("matrix entry {other} is not binary")),
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix from a per-entry predicate over (user, slot).
    pub fn from_fn(
        n_users: usize,
        n_slots: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut m = Self::zeros(n_users, n_slots)?;
        for user in 1..=n_users {
            for t in 0..n_slots {
                if f(user, t) {
                    m.set(user, t, true);
                }
            }
        }
        Ok(m)
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn get(&self, user: usize, slot: usize) -> bool {
        let row = self.row(user);
        row[slot / 64] >> (slot % 64) & 1 == 1
    }

    pub fn set(&mut self, user: usize, slot: usize, value: bool) {
        assert!(slot < self.n_slots, "slot {slot} out of range");
        let w = (user - 1) * self.words + slot / 64;
        let mask = 1u64 << (slot % 64);
        if value {
            self.bits[w] |= mask;
        } else {
            self.bits[w] &= !mask;
        }
    }

    /// Packed codeword of a 1-based user, least significant bit = slot 0.
    pub fn row(&self, user: usize) -> &[u64] {
        assert!(
            (1..=self.n_users).contains(&user),
            "user {user} outside 1..={}",
            self.n_users
        );
        let start = (user - 1) * self.words;
        &self.bits[start..start + self.words]
    }

    pub fn row_bits(&self, user: usize) -> Vec<u8> {
        (0..self.n_slots).map(|t| self.get(user, t) as u8).collect()
    }

    /// Users writing a 1 in the given slot.
    pub fn writers(&self, slot: usize) -> Vec<usize> {
        (1..=self.n_users).filter(|&i| self.get(i, slot)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Horizontal concatenation of matrices with equal row counts.
    pub fn hconcat(blocks: &[AccessMatrix]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return invalid("cannot concatenate zero blocks");
        };
        let n_slots = blocks.iter().map(|b| b.n_slots).sum();
        let mut m = Self::zeros(first.n_users, n_slots)?;
        let mut offset = 0;
        for b in blocks {
            check_dim("block row count", first.n_users, b.n_users)?;
            for user in 1..=b.n_users {
                for t in 0..b.n_slots {
                    if b.get(user, t) {
                        m.set(user, offset + t, true);
                    }
                }
            }
            offset += b.n_slots;
        }
        Ok(m)
    }
}

/// Channel output `y_1, ..., y_T`, packed like an access-matrix row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feedback {
    len: usize,
    words: Vec<u64>,
}

impl Feedback {
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut words = vec![0u64; words_for(bits.len())];
        for (t, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => words[t / 64] |= 1 << (t % 64),
                other => return invalid(format!("feedback entry {other} is not binary")),
            }
        }
        Ok(Self {
            len: bits.len(),
            words,
        })
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, slot: usize) -> bool {
        self.words[slot / 64] >> (slot % 64) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|t| self.get(t) as u8).collect()
    }
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.bits().iter().join(","))
    }
}

/// Boolean OR channel: slot `t` reads 1 iff some active user writes 1 in it.
pub fn or_channel(x: &AccessMatrix, s: &StatusVector) -> Result<Feedback> {
    check_dim("status vector length", x.n_users(), s.n_users())?;
    let mut words = vec![0u64; x.words];
    for &user in s.active() {
        for (acc, w) in words.iter_mut().zip(x.row(user)) {
            *acc |= w;
        }
    }
    Ok(Feedback::from_words(x.n_slots, words))
}

/// Partition distortion: 0 when all active users land in distinct groups,
/// 1 otherwise.
pub fn distortion(s: &StatusVector, z: &PartitionVector) -> Result<u8> {
    check_dim("partition length", s.n_users(), z.n_users())?;
    Ok(u8::from(!z.separates(s)))
}

/// `|S_{K;N}(z)|`: number of status vectors separated by `z`, equal to the
/// product of its group sizes.
pub fn compatible_status_count(z: &PartitionVector) -> BigUint {
    z.group_sizes().product()
}

/// Number of partitions with the given group sizes that separate a fixed
/// status vector with `k` actives: `K! * multinomial(N - K; n_1 - 1, ...)`.
pub fn compatible_partition_count(n: usize, k: usize, sizes: &GroupSizes) -> Result<BigUint> {
    check_dim("group count", k, sizes.k())?;
    check_dim("sum of group sizes", n, sizes.n_users())?;
    let reduced: Vec<usize> = sizes.as_slice().iter().map(|&s| s - 1).collect();
    Ok(factorial(k) * multinomial(&reduced))
}
