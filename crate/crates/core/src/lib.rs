//! Partition reservation over the noiseless Boolean multi-access channel.
//!
//! `K` of `N` users are active and unknown. After `T` slots of the OR channel
//! every user must agree on an ordered `K`-partition that puts each active
//! user in its own group. This crate contains the source-coding quantities,
//! the brute-force scheme, random coding with hypergraph decoding, the
//! closed-form rate analysis and a command-line front end.

pub mod analysis;
pub mod brute_force;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod hypergraph;
pub mod model;
pub mod random_coding;
pub mod source_coding;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    compatible_partition_count, compatible_status_count, distortion, or_channel, AccessMatrix,
    Feedback, GroupSizes, PartitionVector, StatusVector,
};
pub use stats::ErrorEstimate;

/// No partition could be validated from the channel output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodingFailure;

/// Result of a decoder: a partition or an announced failure.
pub type Decoded = std::result::Result<PartitionVector, DecodingFailure>;
