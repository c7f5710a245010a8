use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat};
use super::CliError;
use crate::analysis::{
    c_group, c_rate, cycle_union_bound, fib_closed_form, fib_combinatorial, fib_extended,
    maximize_rate, no_consec_zeros_prob, phi, psi,
};
use crate::hypergraph::{apply_slot, candidate_set, complete, strong_color, Hypergraph};
use crate::model::{or_channel, AccessMatrix, StatusVector};
use crate::random_coding::{monte_carlo_error, slots_for_rate, DecoderKind, TrialConfig};
use crate::source_coding::{codebook_error_bound, partition_information_bits};
use crate::stats::ErrorEstimate;

const RATE_TOL: f64 = 1e-9;

fn csv_bytes(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// `p, c, c_g` rows plus a trailer `max, C*, C_g*, argmax C, argmax C_g`.
pub fn rates_table(grid: &[f64]) -> Result<Vec<u8>, CliError> {
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(CliError::Config(format!(
            "rate grid point {p} is outside (0, 1)"
        )));
    }
    let best_c = maximize_rate(c_rate, RATE_TOL);
    let best_g = maximize_rate(c_group, RATE_TOL);
    let rows = grid
        .iter()
        .map(|&p| {
            vec![
                p.to_string(),
                c_rate(p).to_string(),
                c_group(p).to_string(),
                String::new(),
                String::new(),
            ]
        })
        .chain(std::iter::once(vec![
            "max".to_string(),
            best_c.value.to_string(),
            best_g.value.to_string(),
            best_c.p_star.to_string(),
            best_g.p_star.to_string(),
        ]));
    csv_bytes(&["p", "c", "c_g", "argmax_c", "argmax_c_g"], rows)
}

/// `k, p, F, J_k, φ, ψ` and the largest deviation of the closed form and the
/// binomial sum from the recurrence.
pub fn fib_table(k_max: usize, grid: &[f64]) -> Result<Vec<u8>, CliError> {
    if k_max == 0 {
        return Err(CliError::Config("k_max must be at least 1".into()));
    }
    if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(CliError::Config(format!(
            "fib grid point {p} is outside (0, 1]"
        )));
    }
    let mut rows = Vec::new();
    for k in 1..=k_max {
        for &p in grid {
            let f = fib_extended(k, p);
            let diff = (f - fib_closed_form(k, p))
                .abs()
                .max((f - fib_combinatorial(k, p)).abs());
            rows.push(vec![
                k.to_string(),
                p.to_string(),
                f.to_string(),
                no_consec_zeros_prob(k, p).to_string(),
                phi(p).to_string(),
                psi(p).to_string(),
                diff.to_string(),
            ]);
        }
    }
    csv_bytes(&["k", "p", "f", "j", "phi", "psi", "max_abs_diff"], rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    pub name: &'static str,
    pub value: f64,
}

/// One simulated cell. Fields other than `wall_clock_seconds` depend only on
/// the configuration and seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub scheme: &'static str,
    pub n_users: usize,
    pub n_active: usize,
    pub n_slots: usize,
    pub codebook_size: Option<usize>,
    pub p: Option<f64>,
    pub xi: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub random_actives: bool,
    pub fixed_codebook: bool,
    pub estimate: ErrorEstimate,
    pub reference: Option<Reference>,
    pub wall_clock_seconds: f64,
}

fn required<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("{what} is required")))
}

fn cell(
    cfg: &ExperimentConfig,
    scheme: DecoderKind,
    n: usize,
) -> Result<SimulationReport, CliError> {
    let k = required(cfg.k, "--k (active users)")?;
    let trials = required(cfg.trials, "--trials")?;
    let seed = required(cfg.seed, "--seed (simulations must be reproducible)")?;
    let started = Instant::now();
    let (trial, codebook_size, reference) = if scheme == DecoderKind::BruteForce {
        let l = match (cfg.l, cfg.slots) {
            (Some(l), _) => l,
            (None, Some(t)) => t / k.max(1),
            (None, None) => {
                return Err(CliError::Config("brute-force needs --l or --slots".into()))
            }
        };
        if l == 0 {
            return Err(CliError::Config(
                "brute-force codebook size L must be at least 1".into(),
            ));
        }
        let w = partition_information_bits(n, k)?;
        let reference = Reference {
            name: "codebook_error_bound",
            value: codebook_error_bound(l as f64, w),
        };
        (
            TrialConfig::new(n, k, k * l, 0.0, trials, seed, scheme),
            Some(l),
            Some(reference),
        )
    } else {
        let p = required(cfg.p, "--p")?;
        if !(p > 0.0 && p < 1.0) {
            return Err(CliError::Config(format!("--p {p} must lie in (0, 1)")));
        }
        let t = match (cfg.slots, cfg.xi) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either --slots or --xi, not both".into(),
                ))
            }
            (Some(t), None) => t,
            (None, Some(xi)) => slots_for_rate(n, p, xi)?,
            (None, None) => return Err(CliError::Config("give --slots or --xi".into())),
        };
        let reference = (k == 2).then(|| Reference {
            name: "cycle_union_bound",
            value: cycle_union_bound(n, p, t),
        });
        (
            TrialConfig::new(n, k, t, p, trials, seed, scheme),
            None,
            reference,
        )
    };
    let trial = TrialConfig {
        random_actives: cfg.random_actives,
        fixed_codebook: cfg.fixed_codebook,
        ..trial
    };
    let estimate = monte_carlo_error(&trial)?;
    Ok(SimulationReport {
        scheme: scheme.name(),
        n_users: n,
        n_active: k,
        n_slots: trial.n_slots,
        codebook_size,
        p: (scheme != DecoderKind::BruteForce).then_some(trial.bernoulli_p),
        xi: cfg
            .xi
            .filter(|_| scheme != DecoderKind::BruteForce && cfg.slots.is_none()),
        trials,
        seed,
        random_actives: cfg.random_actives,
        fixed_codebook: cfg.fixed_codebook,
        estimate,
        reference,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Validates the whole configuration, then runs every `(N, scheme)` cell.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<SimulationReport>, CliError> {
    required(cfg.seed, "--seed (simulations must be reproducible)")?;
    if cfg.schemes.is_empty() {
        return Err(CliError::Config(
            "--scheme is required (map, bipartite-k2, brute-force)".into(),
        ));
    }
    if cfg.n.is_empty() {
        return Err(CliError::Config("--n is required".into()));
    }
    if cfg.trials == Some(0) {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let mut reports = Vec::new();
    for &n in &cfg.n {
        for &scheme in &cfg.schemes {
            reports.push(cell(cfg, scheme, n)?);
        }
    }
    Ok(reports)
}

fn opt(v: Option<impl ToString>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub(super) fn render_reports(
    reports: &[SimulationReport],
    format: OutputFormat,
) -> Result<Vec<u8>, CliError> {
    match format {
        OutputFormat::Json => {
            let mut body =
                serde_json::to_vec_pretty(reports).map_err(|e| CliError::Io(e.to_string()))?;
            body.push(b'\n');
            Ok(body)
        }
        OutputFormat::Csv => csv_bytes(
            &[
                "scheme",
                "n",
                "k",
                "t",
                "l",
                "p",
                "xi",
                "trials",
                "seed",
                "failures",
                "error",
                "ci_low",
                "ci_high",
                "reference",
                "reference_value",
                "wall_clock_seconds",
            ],
            reports.iter().map(|r| {
                vec![
                    r.scheme.to_string(),
                    r.n_users.to_string(),
                    r.n_active.to_string(),
                    r.n_slots.to_string(),
                    opt(r.codebook_size),
                    opt(r.p),
                    opt(r.xi),
                    r.trials.to_string(),
                    r.seed.to_string(),
                    r.estimate.failures.to_string(),
                    r.estimate.point.to_string(),
                    r.estimate.ci_low.to_string(),
                    r.estimate.ci_high.to_string(),
                    opt(r.reference.as_ref().map(|r| r.name)),
                    opt(r.reference.as_ref().map(|r| r.value)),
                    r.wall_clock_seconds.to_string(),
                ]
            }),
        ),
    }
}

fn edge_list(h: &Hypergraph) -> String {
    let edges: Vec<String> = h
        .edges()
        .map(|e| format!("({})", itertools::join(e, ",")))
        .collect();
    format!("{{{}}}", edges.join(","))
}

/// Four users, users 1 and 2 active, three slots.
pub fn demo_trace() -> Result<String, CliError> {
    let x = AccessMatrix::from_rows(&[[1, 0, 1], [1, 0, 0], [0, 1, 1], [0, 0, 0]])?;
    let s = StatusVector::new(4, [1, 2])?;
    let y = or_channel(&x, &s)?;
    let mut out = String::new();
    let _ = writeln!(out, "access matrix X (row i = codeword of user i):");
    for user in 1..=x.n_users() {
        let _ = writeln!(
            out,
            "  user {user}: {}",
            itertools::join(x.row_bits(user), " ")
        );
    }
    let _ = writeln!(
        out,
        "active users: {{{}}}",
        itertools::join(s.active(), ",")
    );
    let _ = writeln!(out, "feedback y = {y}");
    let mut h = complete(4, 2)?;
    let _ = writeln!(out, "start: complete graph, edges {}", edge_list(&h));
    for t in 0..x.n_slots() {
        let writers = x.writers(t);
        let next = apply_slot(&h, &writers, y.get(t))?;
        let deleted: Vec<String> = h
            .edges()
            .filter(|e| !next.contains_edge(e))
            .map(|e| format!("({})", itertools::join(e, ",")))
            .collect();
        let _ = writeln!(
            out,
            "slot {}: y={} writers {{{}}} deletes {{{}}}",
            t + 1,
            u8::from(y.get(t)),
            itertools::join(&writers, ","),
            deleted.join(",")
        );
        h = next;
    }
    let _ = writeln!(out, "remaining edges: {}", edge_list(&h));
    let brute: Vec<Vec<usize>> = candidate_set(4, 2, &x, &y)?
        .iter()
        .map(|s| s.active().to_vec())
        .collect();
    let agrees = brute == h.edges().map(<[usize]>::to_vec).collect::<Vec<_>>();
    let _ = writeln!(
        out,
        "exhaustive candidate check: {}",
        if agrees { "agrees" } else { "DISAGREES" }
    );
    let z = strong_color(&h)
        .map_err(|_| CliError::Config("demo graph is not 2-colorable".into()))?
        .into_partition();
    let _ = writeln!(out, "partition z = {z}");
    let _ = writeln!(
        out,
        "users 1 and 2 separated: {}",
        if z.separates(&s) { "yes" } else { "no" }
    );
    Ok(out)
}
