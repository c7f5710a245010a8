//! Random Bernoulli access matrices with MAP and bipartite decoding, plus the
//! Monte Carlo harness that estimates their error rates.

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::c_rate;
use crate::brute_force;
use crate::error::{invalid, Error, Result};
use crate::hypergraph::{odd_cycle_census, reduce, strong_color, Hypergraph};
use crate::model::{or_channel, AccessMatrix, Feedback, PartitionVector, StatusVector};
use crate::source_coding::{generate_codebook, sample_status};
use crate::stats::{count_failures, trial_rng, ErrorEstimate};
use crate::{Decoded, DecodingFailure};

/// Largest `K^N` the MAP decoder will enumerate.
pub const MAP_MAX_LABELINGS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Map,
    BipartiteK2,
    BruteForce,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Map => "map",
            DecoderKind::BipartiteK2 => "bipartite-k2",
            DecoderKind::BruteForce => "brute-force",
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "map" => Ok(DecoderKind::Map),
            "bipartite-k2" => Ok(DecoderKind::BipartiteK2),
            "brute-force" => Ok(DecoderKind::BruteForce),
            other => invalid(format!(
                "unknown decoder {other:?}; expected map, bipartite-k2 or brute-force"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub n_users: usize,
    pub n_active: usize,
    pub n_slots: usize,
    pub bernoulli_p: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub decoder: DecoderKind,
    /// Draw the active set uniformly per trial instead of fixing `{1..K}`.
    pub random_actives: bool,
    /// Reuse one matrix (or codebook) for all trials.
    pub fixed_codebook: bool,
}

impl TrialConfig {
    pub fn new(
        n_users: usize,
        n_active: usize,
        n_slots: usize,
        bernoulli_p: f64,
        trials: u64,
        master_seed: u64,
        decoder: DecoderKind,
    ) -> Self {
        Self {
            n_users,
            n_active,
            n_slots,
            bernoulli_p,
            trials,
            master_seed,
            decoder,
            random_actives: false,
            fixed_codebook: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.bernoulli_p) {
            return invalid(format!("p = {} outside [0, 1]", self.bernoulli_p));
        }
        if self.n_slots == 0 {
            return invalid("T must be at least 1");
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.n_active == 0 || self.n_active > self.n_users {
            return invalid(format!(
                "need 1 <= K <= N, got K={}, N={}",
                self.n_active, self.n_users
            ));
        }
        match self.decoder {
            DecoderKind::BipartiteK2 if self.n_active != 2 => {
                invalid("the bipartite decoder needs K = 2")
            }
            DecoderKind::Map => check_map_size(self.n_users, self.n_active),
            DecoderKind::BruteForce if self.n_slots < self.n_active => invalid(format!(
                "brute force needs T >= K to fit one partition, got T={}",
                self.n_slots
            )),
            _ => Ok(()),
        }
    }
}

/// I.i.d. Bernoulli(p) entries.
pub fn bernoulli_matrix<R: Rng + ?Sized>(
    n: usize,
    t: usize,
    p: f64,
    rng: &mut R,
) -> Result<AccessMatrix> {
    let coin = Bernoulli::new(p).map_err(|e| Error::InvalidInput(e.to_string()))?;
    AccessMatrix::from_fn(n, t, |_, _| coin.sample(rng))
}

fn check_map_size(n: usize, k: usize) -> Result<()> {
    let labelings = (k as f64).powi(n as i32);
    if labelings > MAP_MAX_LABELINGS as f64 {
        return Err(Error::TooLarge(format!(
            "MAP enumerates K^N = {k}^{n} labelings, limit is {MAP_MAX_LABELINGS}"
        )));
    }
    Ok(())
}

/// Number of candidate active sets that `z` separates.
pub fn map_score(z: &PartitionVector, candidates: &Hypergraph) -> usize {
    candidates
        .status_vectors()
        .iter()
        .filter(|s| z.separates(s))
        .count()
}

/// MAP decoding: the partition separating the most candidate active sets,
/// first in lexicographic label order among ties. Returns the partition and
/// its score.
pub fn map_decode_scored(
    n: usize,
    k: usize,
    x: &AccessMatrix,
    y: &Feedback,
) -> Result<(PartitionVector, usize)> {
    check_map_size(n, k)?;
    let candidates = reduce(n, k, x, y)?;
    let edges: Vec<&[usize]> = candidates.edges().collect();
    let mut best: Option<(Vec<usize>, usize)> = None;
    let mut labels = vec![1usize; n];
    let mut used = vec![0usize; k + 1];
    used[1] = n;
    loop {
        if used[1..].iter().all(|&c| c > 0) {
            let score = edges
                .iter()
                .filter(|e| {
                    let mut seen = 0u64;
                    e.iter().all(|&v| {
                        let bit = 1u64 << labels[v - 1];
                        let fresh = seen & bit == 0;
                        seen |= bit;
                        fresh
                    })
                })
                .count();
            if best.as_ref().is_none_or(|(_, b)| score > *b) {
                best = Some((labels.clone(), score));
                if score == edges.len() {
                    break;
                }
            }
        }
        // odometer step in lexicographic order, last position fastest
        let Some(pos) = (0..n).rev().find(|&i| labels[i] < k) else {
            break;
        };
        used[labels[pos]] -= 1;
        labels[pos] += 1;
        used[labels[pos]] += 1;
        for l in &mut labels[pos + 1..] {
            used[*l] -= 1;
            *l = 1;
            used[1] += 1;
        }
    }
    let (labels, score) = best.expect("K <= N admits a partition");
    Ok((PartitionVector::new(labels, k)?, score))
}

pub fn map_decode(n: usize, k: usize, x: &AccessMatrix, y: &Feedback) -> Result<PartitionVector> {
    map_decode_scored(n, k, x, y).map(|(z, _)| z)
}

/// `K = 2` decoder: 2-color the reduced graph or announce failure.
pub fn bipartite_decode_k2(n: usize, x: &AccessMatrix, y: &Feedback) -> Result<Decoded> {
    let h = reduce(n, 2, x, y)?;
    Ok(strong_color(&h)
        .map(|c| c.into_partition())
        .map_err(|_| DecodingFailure))
}

/// Slots needed for rate margin `xi`: `ceil(log2 N / (C(p) - xi))`.
pub fn slots_for_rate(n: usize, p: f64, xi: f64) -> Result<usize> {
    let margin = c_rate(p) - xi;
    if margin <= 0.0 {
        return invalid(format!(
            "rate margin C(p) - xi = {margin:.6} is not positive (C({p}) = {:.6})",
            c_rate(p)
        ));
    }
    Ok(((n as f64).log2() / margin).ceil() as usize)
}

enum Shared {
    None,
    Matrix(AccessMatrix),
    Code(brute_force::BruteForceCode),
}

fn shared_codebook(cfg: &TrialConfig) -> Result<Shared> {
    if !cfg.fixed_codebook {
        return Ok(Shared::None);
    }
    let mut rng = trial_rng(cfg.master_seed, u64::MAX);
    Ok(match cfg.decoder {
        DecoderKind::BruteForce => {
            let cb = generate_codebook(
                cfg.n_users,
                cfg.n_active,
                cfg.n_slots / cfg.n_active,
                &mut rng,
            )?;
            Shared::Code(brute_force::build_matrix(&cb))
        }
        _ => Shared::Matrix(bernoulli_matrix(
            cfg.n_users,
            cfg.n_slots,
            cfg.bernoulli_p,
            &mut rng,
        )?),
    })
}

fn actives(cfg: &TrialConfig, rng: &mut ChaCha8Rng) -> StatusVector {
    if cfg.random_actives {
        sample_status(cfg.n_users, cfg.n_active, rng)
    } else {
        StatusVector::first(cfg.n_users, cfg.n_active).expect("validated K <= N")
    }
}

/// Runs one trial and reports whether the decoder failed to separate the
/// active users.
fn trial_fails(cfg: &TrialConfig, shared: &Shared, rng: &mut ChaCha8Rng) -> bool {
    let (n, k) = (cfg.n_users, cfg.n_active);
    if cfg.decoder == DecoderKind::BruteForce {
        let drawn;
        let code = match shared {
            Shared::Code(code) => code,
            _ => {
                let cb = generate_codebook(n, k, cfg.n_slots / k, rng).expect("validated config");
                drawn = brute_force::build_matrix(&cb);
                &drawn
            }
        };
        let s0 = actives(cfg, rng);
        let outcome = brute_force::run_trial_with(code, &s0).expect("validated config");
        return !outcome.is_correct();
    }
    let drawn;
    let x = match shared {
        Shared::Matrix(x) => x,
        _ => {
            drawn = bernoulli_matrix(n, cfg.n_slots, cfg.bernoulli_p, rng).expect("validated p");
            &drawn
        }
    };
    let s0 = actives(cfg, rng);
    let y = or_channel(x, &s0).expect("matching dimensions");
    let decoded = match cfg.decoder {
        DecoderKind::Map => Ok(map_decode(n, k, x, &y).expect("validated size")),
        DecoderKind::BipartiteK2 => bipartite_decode_k2(n, x, &y).expect("validated config"),
        DecoderKind::BruteForce => unreachable!(),
    };
    !decoded.is_ok_and(|z| z.separates(&s0))
}

/// Monte Carlo error estimate with a 95% Wilson interval. Trials use the
/// per-trial streams of [`trial_rng`], so the result is independent of the
/// thread count.
pub fn monte_carlo_error(cfg: &TrialConfig) -> Result<ErrorEstimate> {
    cfg.validate()?;
    let shared = shared_codebook(cfg)?;
    let failures = count_failures(cfg.trials, cfg.master_seed, |rng, _| {
        trial_fails(cfg, &shared, rng)
    });
    Ok(ErrorEstimate::from_counts(failures, cfg.trials))
}

/// Frequencies of odd-cycle events in the reduced graph for `K = 2`, on the
/// same trial streams as [`monte_carlo_error`] with the fixed active pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddCycleFrequencies {
    pub through_active_edge: ErrorEstimate,
    pub through_one_active: ErrorEstimate,
    pub avoiding_actives: ErrorEstimate,
    pub any: ErrorEstimate,
}

pub fn odd_cycle_frequencies(cfg: &TrialConfig) -> Result<OddCycleFrequencies> {
    let mut cfg = *cfg;
    cfg.decoder = DecoderKind::BipartiteK2;
    cfg.random_actives = false;
    cfg.validate()?;
    let shared = shared_codebook(&cfg)?;
    let census = |mask: u8| {
        count_failures(cfg.trials, cfg.master_seed, |rng, _| {
            let drawn;
            let x = match &shared {
                Shared::Matrix(x) => x,
                _ => {
                    drawn = bernoulli_matrix(cfg.n_users, cfg.n_slots, cfg.bernoulli_p, rng)
                        .expect("validated p");
                    &drawn
                }
            };
            let s0 = actives(&cfg, rng);
            let y = or_channel(x, &s0).expect("matching dimensions");
            let h = reduce(cfg.n_users, 2, x, &y).expect("validated config");
            let c = odd_cycle_census(&h, 1, 2).expect("active edge survives");
            let flags = u8::from(c.through_active_edge)
                | u8::from(c.through_one_active) << 1
                | u8::from(c.avoiding_actives) << 2;
            flags & mask != 0
        })
    };
    let est = |f| ErrorEstimate::from_counts(f, cfg.trials);
    Ok(OddCycleFrequencies {
        through_active_edge: est(census(0b001)),
        through_one_active: est(census(0b010)),
        avoiding_actives: est(census(0b100)),
        any: est(census(0b111)),
    })
}
