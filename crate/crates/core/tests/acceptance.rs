//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use partition_mac::analysis::{
    c_group, c_rate, fib_closed_form, fib_combinatorial, fib_extended, maximize_rate,
    no_consec_zeros_prob, survival_prob, CycleType, SurvivalQuery,
};
use partition_mac::brute_force;
use partition_mac::hypergraph::{
    candidate_set, min_deletion_colorable, reduce, strong_color, MIN_DELETION_MAX_EDGES,
};
use partition_mac::random_coding::{
    bernoulli_matrix, bipartite_decode_k2, map_decode_scored, monte_carlo_error, slots_for_rate,
    DecoderKind, TrialConfig,
};
use partition_mac::source_coding::{
    codebook_error_bound, empirical_source_error, partition_information_bits, sample_status,
    CodebookMode,
};
use partition_mac::stats::trial_rng;
use partition_mac::{or_channel, AccessMatrix, StatusVector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_secs {
        Ok(())
    } else {
        Err(format!(
            "took {:.2}s, limit {limit_secs}s",
            elapsed.as_secs_f64()
        ))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rate_maxima() -> Outcome {
    let start = Instant::now();
    let c = maximize_rate(c_rate, 1e-9);
    let g = maximize_rate(c_group, 1e-9);
    let elapsed = start.elapsed();
    ensure((c.value - 0.5896).abs() <= 0.001, || {
        format!("max C = {:.6}", c.value)
    })?;
    ensure((g.value - 0.5).abs() <= 0.001, || {
        format!("max C_g = {:.6}", g.value)
    })?;
    within(elapsed, 1.0)?;
    Ok(format!(
        "max C = {:.6} at p = {:.4}, max C_g = {:.6} at p = {:.4}, {:.3}s",
        c.value,
        c.p_star,
        g.value,
        g.p_star,
        elapsed.as_secs_f64()
    ))
}

fn dominance() -> Outcome {
    let start = Instant::now();
    let mut min_gap = f64::INFINITY;
    for i in 1..=999 {
        let p = i as f64 / 1000.0;
        let gap = c_rate(p) - c_group(p);
        ensure(gap > 0.0, || format!("C({p}) - C_g({p}) = {gap:e}"))?;
        min_gap = min_gap.min(gap);
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!(
        "C > C_g on all 999 points, smallest gap {min_gap:.2e}"
    ))
}

fn enumerate_no_consec_zeros(m: usize, p: f64) -> f64 {
    (0u32..1 << m)
        .filter(|bits| (0..m.saturating_sub(1)).all(|i| (bits >> i) & 0b11 != 0))
        .map(|bits| {
            let ones = bits.count_ones() as i32;
            p.powi(ones) * (1.0 - p).powi(m as i32 - ones)
        })
        .sum()
}

fn fibonacci() -> Outcome {
    let start = Instant::now();
    let mut worst_f = 0f64;
    let mut worst_j = 0f64;
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        for k in 1..=60 {
            let rec = fib_extended(k, p);
            worst_f = worst_f
                .max((rec - fib_closed_form(k, p)).abs())
                .max((rec - fib_combinatorial(k, p)).abs());
        }
        for m in 0..=16 {
            worst_j =
                worst_j.max((no_consec_zeros_prob(m, p) - enumerate_no_consec_zeros(m, p)).abs());
        }
    }
    ensure(worst_f <= 1e-10, || format!("F disagreement {worst_f:e}"))?;
    ensure(worst_j <= 1e-12, || format!("J_M disagreement {worst_j:e}"))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "max |ΔF| = {worst_f:.1e}, max |ΔJ| = {worst_j:.1e}"
    ))
}

/// One slot: the actives write `(u, v)`, every other cycle vertex writes with
/// probability `p`. The cycle survives when `y = 0` and none of its vertices
/// writes, or `y = 1` and every cycle edge touches a writer.
fn survives_one_slot<R: Rng>(
    cycle_type: CycleType,
    (u, v): (bool, bool),
    m: usize,
    p: f64,
    rng: &mut R,
) -> bool {
    let fixed: Vec<bool> = match cycle_type {
        CycleType::One => vec![u, v],
        CycleType::TwoA => vec![u],
        CycleType::TwoB => vec![v],
        CycleType::Three => vec![],
    };
    let bits: Vec<bool> = fixed
        .iter()
        .copied()
        .chain((fixed.len()..m).map(|_| rng.random_bool(p)))
        .collect();
    if u || v {
        (0..m).all(|i| bits[i] || bits[(i + 1) % m])
    } else {
        bits.iter().all(|b| !b)
    }
}

fn survival() -> Outcome {
    let start = Instant::now();
    let samples = 1_000_000u64;
    let p = 0.3;
    let classes = [(false, false), (false, true), (true, false), (true, true)];
    let mut cases = Vec::new();
    for cycle_type in CycleType::ALL {
        for class in classes {
            for m in [3, 5, 7] {
                cases.push((cycle_type, class, m));
            }
        }
    }
    let mut worst = 0f64;
    for (case, &(cycle_type, class, m)) in cases.iter().enumerate() {
        let exact = survival_prob(&SurvivalQuery {
            cycle_type,
            slot_class: class,
            cycle_len: m,
            p,
        })
        .map_err(|e| e.to_string())?;
        let hits: u64 = (0..samples / 10_000)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = trial_rng(0xACCE_5500 + case as u64, chunk);
                (0..10_000)
                    .filter(|_| survives_one_slot(cycle_type, class, m, p, &mut rng))
                    .count() as u64
            })
            .sum();
        let est = hits as f64 / samples as f64;
        let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
        // a certain or impossible event must be reproduced exactly
        let z = match (est - exact).abs() {
            d if sigma == 0.0 => {
                if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            d => d / sigma,
        };
        worst = worst.max(z);
        ensure(z <= 3.0, || {
            format!(
                "{cycle_type:?} {class:?} M={m}: exact {exact:.6}, simulated {est:.6} ({z:.2}σ)"
            )
        })?;
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!(
        "{} cases at p = {p}, largest deviation {worst:.2}σ",
        cases.len()
    ))
}

fn hypergraph_semantics() -> Outcome {
    let start = Instant::now();
    let mismatches: Vec<u64> = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = trial_rng(0x5E3A, i);
            let k = rng.random_range(2..=3);
            let n = rng.random_range(k..=12);
            let t = rng.random_range(0..=8);
            let p = rng.random_range(0.1..0.9);
            let x = bernoulli_matrix(n, t, p, &mut rng).unwrap();
            let s = sample_status(n, k, &mut rng);
            let y = or_channel(&x, &s).unwrap();
            let fast: Vec<Vec<usize>> = reduce(n, k, &x, &y)
                .unwrap()
                .edges()
                .map(<[usize]>::to_vec)
                .collect();
            let brute: Vec<Vec<usize>> = candidate_set(n, k, &x, &y)
                .unwrap()
                .iter()
                .map(|s| s.active().to_vec())
                .collect();
            fast != brute
        })
        .collect();
    ensure(mismatches.is_empty(), || {
        format!("mismatching instances {mismatches:?}")
    })?;
    within(start.elapsed(), 30.0)?;
    Ok("1000 instances, 0 mismatches".into())
}

fn four_user_example() -> Outcome {
    let x = AccessMatrix::from_rows(&[[1, 0, 1], [1, 0, 0], [0, 1, 1], [0, 0, 0]]).unwrap();
    let s = StatusVector::new(4, [1, 2]).unwrap();
    let y = or_channel(&x, &s).unwrap();
    ensure(y.bits() == [1, 0, 1], || format!("y = {y}"))?;
    let h = reduce(4, 2, &x, &y).unwrap();
    let edges: Vec<Vec<usize>> = h.edges().map(<[usize]>::to_vec).collect();
    ensure(edges == [vec![1, 2], vec![1, 4]], || {
        format!("edges {edges:?}")
    })?;
    let z = strong_color(&h)
        .map_err(|_| "not colorable".to_string())?
        .into_partition();
    ensure(z.label(1) != z.label(2), || format!("z = {z}"))?;

    let out = Command::new(env!("CARGO_BIN_EXE_partition-mac"))
        .arg("demo")
        .output()
        .map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || {
        format!("demo exited with {}", out.status)
    })?;
    for needle in [
        "feedback y = [1,0,1]",
        "remaining edges: {(1,2),(1,4)}",
        "users 1 and 2 separated: yes",
    ] {
        ensure(text.contains(needle), || {
            format!("demo output lacks {needle:?}")
        })?;
    }
    Ok(format!("y = [1,0,1], edges {{(1,2),(1,4)}}, z = {z}"))
}

fn codebook_bounds() -> Outcome {
    let start = Instant::now();
    let trials = 10_000;
    let mut cells = 0;
    let mut tightest = f64::INFINITY;
    for (n, k) in [(6, 3), (8, 2), (10, 2)] {
        let w = partition_information_bits(n, k).map_err(|e| e.to_string())?;
        for j in 0..=4 {
            let l = (w.exp2() * f64::from(1 << j)).ceil() as usize;
            let bound = codebook_error_bound(l as f64, w);
            let seed = 7000 + 10 * n as u64 + j;
            let source = empirical_source_error(n, k, l, trials, seed, CodebookMode::Redraw)
                .map_err(|e| e.to_string())?;
            let brute = brute_force::empirical_error(n, k, l, trials, seed + 1)
                .map_err(|e| e.to_string())?;
            for (name, est) in [("source", source), ("brute-force", brute)] {
                let limit = bound + 3.0 * est.sigma_at(bound);
                ensure(est.point <= limit, || {
                    format!(
                        "{name} N={n} K={k} L={l}: {:.4} > bound {bound:.4} + 3σ",
                        est.point
                    )
                })?;
                tightest = tightest.min(limit - est.point);
                cells += 1;
            }
        }
    }
    within(start.elapsed(), 120.0)?;
    Ok(format!(
        "{cells} cells below bound + 3σ, smallest slack {tightest:.2e}"
    ))
}

fn bipartite_trend() -> Outcome {
    let start = Instant::now();
    let mut rows = Vec::new();
    for (i, n) in [64usize, 256, 1024].into_iter().enumerate() {
        let t = slots_for_rate(n, 0.3, 0.09).map_err(|e| e.to_string())?;
        let cfg = TrialConfig::new(
            n,
            2,
            t,
            0.3,
            10_000,
            8080 + i as u64,
            DecoderKind::BipartiteK2,
        );
        let est = monte_carlo_error(&cfg).map_err(|e| e.to_string())?;
        rows.push((n, t, est));
    }
    let summary = rows
        .iter()
        .map(|(n, t, e)| {
            format!(
                "N={n} T={t}: {:.4} [{:.4}, {:.4}]",
                e.point, e.ci_low, e.ci_high
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    for pair in rows.windows(2) {
        let (prev, next) = (&pair[0].2, &pair[1].2);
        ensure(next.point <= prev.ci_high, || {
            format!("error increases: {summary}")
        })?;
    }
    within(start.elapsed(), 600.0)?;
    Ok(summary)
}

fn map_dominance() -> Outcome {
    let start = Instant::now();
    let mut instances = Vec::new();
    let mut stream = 0u64;
    while instances.len() < 500 {
        let mut rng = trial_rng(0x9A9, stream);
        stream += 1;
        let n = rng.random_range(4..=10);
        let t = rng.random_range(3..=8);
        let x = bernoulli_matrix(n, t, 0.3, &mut rng).unwrap();
        let s = sample_status(n, 2, &mut rng);
        let y = or_channel(&x, &s).unwrap();
        if reduce(n, 2, &x, &y).unwrap().edge_count() > MIN_DELETION_MAX_EDGES {
            continue;
        }
        instances.push((n, x, s, y));
    }
    let results: Vec<Result<(bool, bool), String>> = instances
        .par_iter()
        .map(|(n, x, s, y)| {
            let (z, score) = map_decode_scored(*n, 2, x, y).map_err(|e| e.to_string())?;
            let h = reduce(*n, 2, x, y).unwrap();
            let (kept, _) = min_deletion_colorable(&h).map_err(|e| e.to_string())?;
            if score != kept.edge_count() {
                return Err(format!(
                    "N={n}: MAP score {score}, oracle {}",
                    kept.edge_count()
                ));
            }
            let bip = bipartite_decode_k2(*n, x, y).unwrap();
            Ok((!z.separates(s), !bip.is_ok_and(|z| z.separates(s))))
        })
        .collect();
    let (mut map_err, mut bip_err) = (0, 0);
    for r in results {
        let (m, b) = r?;
        map_err += usize::from(m);
        bip_err += usize::from(b);
    }
    ensure(map_err <= bip_err, || {
        format!("MAP errors {map_err} > bipartite errors {bip_err}")
    })?;
    within(start.elapsed(), 120.0)?;
    Ok(format!("500 instances ({stream} drawn): MAP errors {map_err}, bipartite errors {bip_err}, scores match oracle"))
}

fn strip_timing(json: &[u8]) -> String {
    let mut v: serde_json::Value = serde_json::from_slice(json).expect("report is JSON");
    for r in v.as_array_mut().expect("array of reports") {
        r.as_object_mut()
            .expect("report object")
            .remove("wall_clock_seconds");
    }
    serde_json::to_string(&v).unwrap()
}

fn determinism() -> Outcome {
    let runs: &[&[&str]] = &[
        &[
            "--scheme",
            "bipartite-k2,map",
            "--n",
            "10",
            "--k",
            "2",
            "--p",
            "0.3",
            "--slots",
            "6",
        ],
        &[
            "--scheme",
            "brute-force",
            "--n",
            "6,8",
            "--k",
            "3",
            "--l",
            "8",
        ],
        &[
            "--scheme",
            "bipartite-k2",
            "--n",
            "128",
            "--k",
            "2",
            "--p",
            "0.3",
            "--xi",
            "0.09",
            "--random-actives",
        ],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "4"] {
            let out = Command::new(env!("CARGO_BIN_EXE_partition-mac"))
                .args([
                    "--threads",
                    threads,
                    "simulate",
                    "--trials",
                    "3000",
                    "--seed",
                    "99",
                ])
                .args(*args)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || {
                String::from_utf8_lossy(&out.stderr).into_owned()
            })?;
            outputs.push(strip_timing(&out.stdout));
        }
        ensure(outputs.iter().all(|o| *o == outputs[0]), || {
            format!("reports differ for {args:?}")
        })?;
    }
    Ok(format!(
        "{} configurations identical across --threads 1, 4, 4",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("rate maxima", rate_maxima),
        ("C above C_g on the grid", dominance),
        ("Fibonacci agreement", fibonacci),
        ("survival probabilities", survival),
        ("reduce equals candidate set", hypergraph_semantics),
        ("four-user demo", four_user_example),
        ("source and brute-force bound", codebook_bounds),
        ("bipartite error trend", bipartite_trend),
        ("MAP dominance", map_dominance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
