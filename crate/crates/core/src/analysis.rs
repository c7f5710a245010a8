//! Closed-form quantities behind the `K = 2` random-coding rate: the extended
//! Fibonacci numbers `F(k, p)`, the probability `J_M(p)` that a Bernoulli
//! string has no two consecutive zeros, per-slot odd-cycle survival
//! probabilities, the achievable rate `C(p)` and its group-testing
//! counterpart `C_g(p)`.
//!
//! `F(k, p)` solves `F(k) = p F(k-1) + p(1-p) F(k-2)` with `F(1) = 1`,
//! `F(2) = p`, and `J_M(p) = F(M + 2, p) / p`. The recurrence is the
//! production path; the closed form in the roots `φ, ψ` of
//! `x² = p x + p(1-p)` cancels badly for small `p` and is only a cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Larger root `(p + sqrt(4p - 3p²)) / 2`.
pub fn phi(p: f64) -> f64 {
    (p + discriminant_root(p)) / 2.0
}

/// Smaller root `(p - sqrt(4p - 3p²)) / 2`.
pub fn psi(p: f64) -> f64 {
    (p - discriminant_root(p)) / 2.0
}

fn discriminant_root(p: f64) -> f64 {
    (4.0 * p - 3.0 * p * p).max(0.0).sqrt()
}

/// `F(k, p)` by the recurrence. `k = 0` gives 0, consistent with the
/// recurrence run backwards.
pub fn fib_extended(k: usize, p: f64) -> f64 {
    match k {
        0 => 0.0,
        1 => 1.0,
        _ => {
            let q = p * (1.0 - p);
            let (mut prev, mut cur) = (1.0, p);
            for _ in 2..k {
                (prev, cur) = (cur, p * cur + q * prev);
            }
            cur
        }
    }
}

/// `F(k, p) = (φ^k - ψ^k) / (φ - ψ)`; undefined at `p = 0`.
pub fn fib_closed_form(k: usize, p: f64) -> f64 {
    let (a, b) = (phi(p), psi(p));
    (a.powi(k as i32) - b.powi(k as i32)) / (a - b)
}

/// `F(k, p) = Σ_j C(k-1-j, j) p^(k-1-j) (1-p)^j`.
pub fn fib_combinatorial(k: usize, p: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    (0..=(k - 1) / 2)
        .map(|j| binomial_f64(k - 1 - j, j) * p.powi((k - 1 - j) as i32) * (1.0 - p).powi(j as i32))
        .sum()
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `J_M(p)`: probability that `M` i.i.d. Bernoulli(p) bits contain no `00`.
pub fn no_consec_zeros_prob(m: usize, p: f64) -> f64 {
    j_extended(m as isize, p)
}

/// `J_M` extended to `M = -1` through `F(1, p) / p = 1 / p`. This is the
/// value that makes the cyclic-string correction `p²(1-p)² J_{M-4}` exact at
/// `M = 3`, where the two neighbours of the wrapped pair coincide.
fn j_extended(m: isize, p: f64) -> f64 {
    match m {
        -1 => 1.0 / p,
        0 | 1 => 1.0,
        _ if p == 0.0 => 0.0,
        _ => fib_extended(m as usize + 2, p) / p,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CycleType {
    /// Through the active edge `(1, 2)`.
    One,
    /// Through active user 1 only.
    TwoA,
    /// Through active user 2 only.
    TwoB,
    /// Avoiding both active users.
    Three,
}

impl CycleType {
    pub const ALL: [CycleType; 4] = [
        CycleType::One,
        CycleType::TwoA,
        CycleType::TwoB,
        CycleType::Three,
    ];
}

/// Probability that a fixed odd cycle of length `cycle_len` survives one
/// slot in which the active users write `(x_1, x_2) = slot_class`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalQuery {
    pub cycle_type: CycleType,
    pub slot_class: (bool, bool),
    pub cycle_len: usize,
    pub p: f64,
}

pub fn survival_prob(q: &SurvivalQuery) -> Result<f64> {
    let m = q.cycle_len;
    if m < 3 || m.is_multiple_of(2) {
        return invalid(format!("cycle length must be odd and at least 3, got {m}"));
    }
    if !(0.0..=1.0).contains(&q.p) {
        return invalid(format!("p = {} outside [0, 1]", q.p));
    }
    let p = q.p;
    let m = m as isize;
    let j = |len: isize| j_extended(len, p);
    let value = match (q.cycle_type, q.slot_class) {
        (CycleType::One, (false, false)) => (1.0 - p).powi((m - 2) as i32),
        (CycleType::One, (true, true)) => j(m - 2),
        (CycleType::One, _) => p * j(m - 3),
        (CycleType::TwoA | CycleType::TwoB, (false, false)) => (1.0 - p).powi((m - 1) as i32),
        (CycleType::TwoA, (true, _)) | (CycleType::TwoB, (_, true)) => j(m - 1),
        (CycleType::TwoA | CycleType::TwoB, _) => p * p * j(m - 3),
        (CycleType::Three, (false, false)) => (1.0 - p).powi(m as i32),
        (CycleType::Three, _) => {
            if p == 0.0 {
                0.0
            } else {
                j(m) - p * p * (1.0 - p) * (1.0 - p) * j(m - 4)
            }
        }
    };
    Ok(value)
}

/// Binary entropy in bits, 0 at the endpoints.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `C(p) = -(1 - (1-p)²) log2 φ(p) - (1-p)² log2 (1-p)`.
pub fn c_rate(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let q2 = (1.0 - p) * (1.0 - p);
    -(1.0 - q2) * phi(p).log2() - q2 * (1.0 - p).log2()
}

/// `C_g(p) = min{(1-p) H(p), H((1-p)²) / 2}`.
pub fn c_group(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    ((1.0 - p) * binary_entropy(p)).min(0.5 * binary_entropy((1.0 - p) * (1.0 - p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateMax {
    pub p_star: f64,
    pub value: f64,
    /// False when the grid pre-scan found more than one local peak and the
    /// grid argmax was returned without refinement.
    pub unimodal: bool,
}

const PRESCAN_POINTS: usize = 1000;

/// Maximizes `f` over `(0, 1)`: a grid pre-scan checks unimodality, then a
/// golden-section search refines within `tol` around the grid argmax.
pub fn maximize_rate(f: impl Fn(f64) -> f64, tol: f64) -> RateMax {
    let grid: Vec<RatePoint> = (1..PRESCAN_POINTS)
        .map(|i| {
            let p = i as f64 / PRESCAN_POINTS as f64;
            RatePoint { p, value: f(p) }
        })
        .collect();
    let best = (0..grid.len())
        .max_by(|&a, &b| grid[a].value.total_cmp(&grid[b].value))
        .expect("nonempty grid");
    let unimodal = grid[..=best].windows(2).all(|w| w[1].value >= w[0].value)
        && grid[best..].windows(2).all(|w| w[1].value <= w[0].value);
    if !unimodal {
        return RateMax {
            p_star: grid[best].p,
            value: grid[best].value,
            unimodal,
        };
    }
    let lo = if best == 0 { 0.0 } else { grid[best - 1].p };
    let hi = grid.get(best + 1).map_or(1.0, |r| r.p);
    let (p_star, value) = golden_section_max(&f, lo, hi, tol);
    // the bracket endpoints can beat the interior for flat or edge maxima
    let candidate = RatePoint { p: p_star, value };
    let winner = if grid[best].value > candidate.value {
        grid[best]
    } else {
        candidate
    };
    RateMax {
        p_star: winner.p,
        value: winner.value,
        unimodal,
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

/// Per-cycle error bound `2^(-(M-2) C(p) T)`.
pub fn cycle_error_bound(m: usize, p: f64, t: usize) -> Result<f64> {
    if m < 3 || m.is_multiple_of(2) {
        return invalid(format!("cycle length must be odd and at least 3, got {m}"));
    }
    Ok((-((m - 2) as f64) * c_rate(p) * t as f64).exp2())
}

/// Union bound on an odd cycle through the active pair: at most `N^(M-2)`
/// cycles of each odd length `M <= N`, each bounded by [`cycle_error_bound`].
/// Clamped to 1.
pub fn cycle_union_bound(n: usize, p: f64, t: usize) -> f64 {
    let ratio = ((n as f64).log2() - c_rate(p) * t as f64).exp2();
    let mut total = 0.0;
    let mut term = ratio;
    for _ in (3..=n).step_by(2) {
        total += term;
        if total >= 1.0 {
            return 1.0;
        }
        term *= ratio * ratio;
    }
    total
}

/// Limit of `W_N^I / N` when `K = ηN`: `-(1-η) log2 (1-η)`.
pub fn asymptotic_partition_rate(eta: f64) -> f64 {
    if eta <= 0.0 || eta >= 1.0 {
        return 0.0;
    }
    -(1.0 - eta) * (1.0 - eta).log2()
}

/// Group-testing counterpart `H(η)`.
pub fn asymptotic_gt_rate(eta: f64) -> f64 {
    binary_entropy(eta)
}

/// `(p, C(p), C_g(p))` for each grid point.
pub fn rate_curve(grid: &[f64]) -> Vec<(f64, f64, f64)> {
    grid.iter().map(|&p| (p, c_rate(p), c_group(p))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::trial_rng;
    use num_rational::BigRational;
    use rand::Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn roots() {
        assert_eq!((phi(1.0), psi(1.0)), (1.0, 0.0));
        assert_eq!((phi(0.0), psi(0.0)), (0.0, 0.0));
        assert!(close(phi(0.5), 0.809_017, 1e-6));
        assert!(close(psi(0.5), -0.309_017, 1e-6));
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let (a, b) = (phi(p), psi(p));
            assert!(close(a * b, -p * (1.0 - p), 1e-12));
            assert!(close(a + b, p, 1e-12));
            assert!((0.0..=1.0).contains(&a) && (-1.0..=0.0).contains(&b));
            assert!(a.abs() >= b.abs());
        }
    }

    #[test]
    fn fibonacci_examples() {
        for k in 1..30 {
            assert_eq!(fib_extended(k, 1.0), 1.0);
        }
        assert!(close(fib_extended(3, 0.5), 0.5, 1e-15));
        assert!(close(fib_closed_form(3, 0.5), 0.5, 1e-12));
        assert!(close(fib_extended(4, 0.5), 0.375, 1e-15));
        assert_eq!(fib_extended(1, 0.0), 1.0);
        assert_eq!(fib_extended(5, 0.0), 0.0);
        assert_eq!(fib_combinatorial(5, 0.0), 0.0);
    }

    #[test]
    fn fibonacci_three_ways() {
        for i in 1..=9 {
            let p = i as f64 / 10.0;
            for k in 1..=60 {
                let r = fib_extended(k, p);
                assert!(close(r, fib_closed_form(k, p), 1e-10), "k={k} p={p}");
                assert!(close(r, fib_combinatorial(k, p), 1e-10), "k={k} p={p}");
            }
        }
    }

    #[test]
    fn combinatorial_sum_exact_at_half() {
        // at p = 1/2 every term is C(k-1-j, j) / 2^(k-1), so F(k, 1/2) = fib(k) / 2^(k-1)
        let half = BigRational::new(1.into(), 2.into());
        let mut prev = BigRational::from_integer(1.into());
        let mut cur = half.clone();
        let q = &half * &half;
        for k in 3..=25usize {
            (prev, cur) = (cur.clone(), &half * &cur + &q * &prev);
            let mut sum = BigRational::from_integer(0.into());
            for j in 0..=(k - 1) / 2 {
                let c = crate::combinatorics::binomial(k - 1 - j, j);
                sum += BigRational::new(c.into(), num_bigint::BigInt::from(1u64 << (k - 1)));
            }
            assert_eq!(cur, sum, "k={k}");
            let as_f64 = fib_extended(k, 0.5);
            let exact: f64 = num_traits::ToPrimitive::to_f64(&sum).unwrap();
            assert!(close(as_f64, exact, 1e-15));
        }
    }

    fn enumerate_j(m: usize, p: f64) -> f64 {
        (0u32..1 << m)
            .filter(|bits| (0..m.saturating_sub(1)).all(|i| bits >> i & 0b11 != 0))
            .map(|bits| {
                let ones = bits.count_ones() as i32;
                p.powi(ones) * (1.0 - p).powi(m as i32 - ones)
            })
            .sum()
    }

    #[test]
    fn no_consecutive_zeros() {
        for p in [0.1, 0.5, 0.9] {
            assert_eq!(no_consec_zeros_prob(1, p), 1.0);
            assert_eq!(no_consec_zeros_prob(0, p), 1.0);
        }
        assert!(close(no_consec_zeros_prob(2, 0.5), 0.75, 1e-15));
        assert!(close(no_consec_zeros_prob(5, 0.5), 13.0 / 32.0, 1e-15));
        for p in [0.25, 0.5, 0.75] {
            let mut last = 1.0;
            for m in 0..=16 {
                let j = no_consec_zeros_prob(m, p);
                assert!(close(j, enumerate_j(m, p), 1e-12), "M={m} p={p}");
                assert!(j <= last + 1e-15);
                last = j;
            }
        }
    }

    fn q(cycle_type: CycleType, u: bool, v: bool, cycle_len: usize, p: f64) -> SurvivalQuery {
        SurvivalQuery {
            cycle_type,
            slot_class: (u, v),
            cycle_len,
            p,
        }
    }

    #[test]
    fn survival_examples() {
        assert!(close(
            survival_prob(&q(CycleType::One, false, false, 3, 0.5)).unwrap(),
            0.5,
            1e-15
        ));
        assert!(close(
            survival_prob(&q(CycleType::One, true, false, 5, 0.5)).unwrap(),
            0.375,
            1e-15
        ));
        assert!(close(
            survival_prob(&q(CycleType::Three, true, true, 5, 0.5)).unwrap(),
            0.343_75,
            1e-15
        ));
        assert!(survival_prob(&q(CycleType::One, true, true, 4, 0.5)).is_err());
        assert!(survival_prob(&q(CycleType::One, true, true, 1, 0.5)).is_err());
        for m in [3, 5, 7, 9] {
            let a = survival_prob(&q(CycleType::One, true, true, m, 0.3)).unwrap();
            assert_eq!(a, no_consec_zeros_prob(m - 2, 0.3));
        }
    }

    #[test]
    fn triangle_survival_by_hand() {
        // a triangle avoiding both actives under y = 1 survives iff at most
        // one of its vertices is silent
        let p: f64 = 0.3;
        let direct = p.powi(3) + 3.0 * p * p * (1.0 - p);
        let formula = survival_prob(&q(CycleType::Three, true, false, 3, p)).unwrap();
        assert!(close(formula, direct, 1e-15));
    }

    /// One slot, one fixed cycle: draw the non-active vertices' bits and
    /// apply the deletion rules directly.
    fn simulate_survival(query: &SurvivalQuery, samples: usize, seed: u64) -> f64 {
        let m = query.cycle_len;
        let (x1, x2) = query.slot_class;
        let y = x1 || x2;
        let mut rng = trial_rng(seed, 0);
        let mut alive = 0;
        for _ in 0..samples {
            let mut cycle: Vec<bool> = Vec::with_capacity(m);
            match query.cycle_type {
                CycleType::One => {
                    cycle.push(x1);
                    cycle.push(x2);
                    cycle.extend((0..m - 2).map(|_| rng.random_bool(query.p)));
                }
                CycleType::TwoA | CycleType::TwoB => {
                    cycle.push(if query.cycle_type == CycleType::TwoA {
                        x1
                    } else {
                        x2
                    });
                    cycle.extend((0..m - 1).map(|_| rng.random_bool(query.p)));
                }
                CycleType::Three => cycle.extend((0..m).map(|_| rng.random_bool(query.p))),
            }
            let survives = if y {
                (0..m).all(|i| cycle[i] || cycle[(i + 1) % m])
            } else {
                cycle.iter().all(|&b| !b)
            };
            alive += usize::from(survives);
        }
        alive as f64 / samples as f64
    }

    #[test]
    fn survival_matches_simulation() {
        let samples = 100_000;
        for (i, ty) in CycleType::ALL.into_iter().enumerate() {
            for (u, v) in [(false, false), (false, true), (true, false), (true, true)] {
                for m in [3, 5] {
                    let query = q(ty, u, v, m, 0.4);
                    let exact = survival_prob(&query).unwrap();
                    let sim = simulate_survival(&query, samples, 100 + i as u64 * 10 + m as u64);
                    let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
                    assert!(
                        (sim - exact).abs() <= 4.0 * sigma + 1e-12,
                        "{query:?}: {sim} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn rate_examples() {
        assert!(close(c_rate(0.5), 0.479_319, 1e-6));
        assert!(close(c_group(0.5), 0.405_639, 1e-6));
        assert!(close(binary_entropy(0.25), 0.811_278, 1e-6));
        assert_eq!(c_rate(0.0), 0.0);
        assert_eq!(c_rate(1.0), 0.0);
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!(c_rate(p) > c_group(p), "p={p}");
        }
    }

    #[test]
    fn maxima() {
        let c = maximize_rate(c_rate, 1e-9);
        assert!(c.unimodal);
        assert!(close(c.value, 0.5896, 5e-4), "{c:?}");
        assert!(close(c.p_star, 0.2956, 1e-3), "{c:?}");
        let g = maximize_rate(c_group, 1e-9);
        assert!(close(g.value, 0.5, 5e-4), "{g:?}");
        assert!(close(g.p_star, 1.0 - 0.5f64.sqrt(), 1e-4), "{g:?}");
        let flat = maximize_rate(|_| 0.25, 1e-9);
        assert_eq!(flat.value, 0.25);
    }

    #[test]
    fn two_peaks_fall_back_to_grid() {
        let f =
            |p: f64| (-(p - 0.2).powi(2) * 200.0).exp() + 0.9 * (-(p - 0.8).powi(2) * 200.0).exp();
        let r = maximize_rate(f, 1e-9);
        assert!(!r.unimodal);
        assert!(close(r.p_star, 0.2, 1e-3));
    }

    #[test]
    fn cycle_bound() {
        assert_eq!(cycle_error_bound(3, 0.5, 0).unwrap(), 1.0);
        assert!(close(
            cycle_error_bound(3, 0.5, 10).unwrap(),
            0.036_08,
            1e-4
        ));
        let b3 = cycle_error_bound(3, 0.4, 5).unwrap();
        let b5 = cycle_error_bound(5, 0.4, 5).unwrap();
        let b7 = cycle_error_bound(7, 0.4, 5).unwrap();
        assert!(close(b5 / b3, b7 / b5, 1e-12) && b5 < b3);
        assert!(cycle_error_bound(4, 0.4, 5).is_err());

        let (n, p, t) = (1024, 0.3, 40);
        // later terms are below 1e-300
        let direct: f64 = (3..=45)
            .step_by(2)
            .map(|m| (n as f64).powi(m as i32 - 2) * cycle_error_bound(m, p, t).unwrap())
            .sum();
        assert!(close(cycle_union_bound(n, p, t), direct, 1e-12));
        assert_eq!(cycle_union_bound(1024, 0.3, 10), 1.0);
        assert_eq!(cycle_union_bound(2, 0.3, 10), 0.0);
    }

    #[test]
    fn asymptotic_rates() {
        assert!(close(asymptotic_partition_rate(0.5), 0.5, 1e-15));
        assert!(close(asymptotic_gt_rate(0.5), 1.0, 1e-15));
        for i in 1..100 {
            let eta = i as f64 / 100.0;
            let diff = asymptotic_gt_rate(eta) - asymptotic_partition_rate(eta);
            assert!(close(diff, -eta * eta.log2(), 1e-12));
        }
        assert!(asymptotic_partition_rate(1e-9) < 1e-8);
        assert!(asymptotic_gt_rate(1e-9) < 1e-7);
    }
}
