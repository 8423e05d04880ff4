//! Seeded verification suites. Every check records `bound − value` per trial
//! and counts a violation when that slack drops below `−tolerance`.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::encoding::{
    best_pairing_value, cube_decomposition, cube_stats, pairing_value, random_cube, search_pairing,
    PAIRING_TOL,
};
use crate::error::{Error, Result};
use crate::metrics::{
    fvg_check, measured_l1, optimal_measurement, pure_trace_distance, trace_distance,
};
use crate::protosim::rac::{
    classical_copy_protocol, index_distribution, index_query_protocol, optimal_rac,
    rac_lower_bound_check, IndexTask, RAC_TOL,
};
use crate::protosim::reduction::{
    message_info_budget, reduction_pipeline, PipelineReport, REDUCTION_TOL, ZERO_INFO_TOL,
};
use crate::protosim::sk::{random_first_message_protocol, toy_instances, y_labels};
use crate::protosim::{run_protocol, Assignment, InputState, Shots};
use crate::qinfo::{
    binary_entropy_gap, block_state, ceil_log2, cq_monotonicity, measured_mutual_info,
    shannon_entropy, von_neumann_entropy, CQEnsemble, ProjectiveMeasurement, Tripartite,
};
use crate::qstate::random::{random_density_with, random_unit_vector, random_unitary_with};
use crate::qstate::{
    derive_seed, phase_distance, random_pure, random_unitary, DensityMatrix, SeededRng,
};
use crate::report::{Check, Report, Tally};
use crate::transition::{exact_local_transition, transition_trial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Metrics,
    Info,
    Encoding,
    Transition,
    Rac,
    Reduction,
    All,
}

impl Suite {
    /// Every suite that `All` runs, in order.
    pub const EACH: [Suite; 6] = [
        Suite::Metrics,
        Suite::Info,
        Suite::Encoding,
        Suite::Transition,
        Suite::Rac,
        Suite::Reduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Metrics => "metrics",
            Suite::Info => "info",
            Suite::Encoding => "encoding",
            Suite::Transition => "transition",
            Suite::Rac => "rac",
            Suite::Reduction => "reduction",
            Suite::All => "all",
        }
    }
}

/// Largest state dimension a suite samples.
pub const MAX_SUITE_DIM: usize = 16;

/// Pointer size of the reduction toy instances.
pub const REDUCTION_N: usize = 2;

/// Encoding states never exceed this dimension.
pub const MAX_ENCODING_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Overrides each suite's default trial count.
    pub trials: Option<usize>,
    /// Inclusive range of sampled dimensions.
    pub dims: (usize, usize),
    /// Largest cube size in the encoding suite.
    pub m: usize,
    /// Input size for the rac suite (2 to 5) and the reduction suite (2).
    /// Under `All` only the rac suite reads it.
    pub n: Option<usize>,
    /// Overrides every check's tolerance.
    pub tol: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            seed: 0,
            trials: None,
            dims: (2, 8),
            m: 5,
            n: None,
            tol: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == Some(0) {
            return Err(Error::Precondition("trials must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Precondition(format!(
                    "tolerance {t} must be positive"
                )));
            }
        }
        let (lo, hi) = self.dims;
        if lo < 2 || lo > hi || hi > MAX_SUITE_DIM {
            return Err(Error::Precondition(format!(
                "dims {lo}-{hi} outside 2-{MAX_SUITE_DIM}"
            )));
        }
        if !(1..=crate::encoding::MAX_BITS).contains(&self.m) {
            return Err(Error::Precondition(format!(
                "m = {} outside 1-{}",
                self.m,
                crate::encoding::MAX_BITS
            )));
        }
        if let Some(n) = self.n {
            if !(2..=5).contains(&n) {
                return Err(Error::Precondition(format!("n = {n} outside 2-5")));
            }
        }
        Ok(())
    }

    fn trials_or(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn tally(&self, name: &str, default_tol: f64) -> Tally {
        Tally::new(name, self.tol_or(default_tol))
    }
}

pub type SuiteReport = Report<SuiteConfig>;

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let suites = if cfg.suite == Suite::All {
        Suite::EACH.to_vec()
    } else {
        vec![cfg.suite]
    };
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(match s {
            Suite::Metrics => metrics_suite(cfg)?,
            Suite::Info => info_suite(cfg)?,
            Suite::Encoding => encoding_suite(cfg)?,
            Suite::Transition => transition_suite(cfg)?,
            Suite::Rac => rac_suite(cfg)?,
            Suite::Reduction => reduction_suite(cfg)?,
            Suite::All => unreachable!(),
        });
    }
    Ok(Report::new(cfg.suite.name(), cfg.clone(), checks))
}

/// Seed of trial `i` in stream `family`.
fn trial_seed(cfg: &SuiteConfig, family: u64, i: usize) -> u64 {
    derive_seed(derive_seed(cfg.seed, family), i as u64)
}

fn run_trials<T: Send>(
    cfg: &SuiteConfig,
    family: u64,
    trials: usize,
    f: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<(u64, T)>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(cfg, family, i);
            f(s).map(|v| (s, v))
        })
        .collect()
}

fn metrics_trial(dims: (usize, usize), seed: u64) -> Result<[f64; 4]> {
    let mut rng = SeededRng::new(seed);
    let d = rng.range_inclusive(dims.0, dims.1);
    let r1 = random_density_with(d, rng.range_inclusive(1, d), &mut rng)?;
    let r2 = random_density_with(d, rng.range_inclusive(1, d), &mut rng)?;
    let (lower, upper) = fvg_check(&r1, &r2)?;
    let td = trace_distance(&r1, &r2)?;
    let (meas, achieved) = optimal_measurement(&r1, &r2, 1e-12)?;
    let optimal = -(measured_l1(&meas, &r1, &r2) - td)
        .abs()
        .max((achieved - td).abs());
    let a = random_unit_vector(d, &mut rng);
    let b = random_unit_vector(d, &mut rng);
    let pure = pure_trace_distance(&a, &b)?;
    let mixed = trace_distance(&DensityMatrix::pure(&a)?, &DensityMatrix::pure(&b)?)?;
    Ok([lower, upper, optimal, -(pure - mixed).abs()])
}

fn metrics_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let rows = run_trials(cfg, 1, cfg.trials_or(1000), |s| metrics_trial(cfg.dims, s))?;
    let mut tallies = [
        cfg.tally("metrics.fvg_lower", 1e-9),
        cfg.tally("metrics.fvg_upper", 1e-9),
        cfg.tally("metrics.optimal_measurement", 1e-9),
        cfg.tally("metrics.pure_trace_distance", 1e-9),
    ];
    for (s, r) in &rows {
        for (t, v) in tallies.iter_mut().zip(r) {
            t.record(*v, *s);
        }
    }
    let details = [
        "1 - sqrt(F) <= ||r1 - r2||_t / 2",
        "||r1 - r2||_t / 2 <= sqrt(1 - F)",
        "optimal two-outcome measurement reaches ||r1 - r2||_t",
        "2 sqrt(1 - |<a|b>|^2) equals the trace distance of the projectors",
    ];
    Ok(tallies
        .into_iter()
        .zip(details)
        .map(|(t, d)| t.finish(json!({ "summary": d, "dims": [cfg.dims.0, cfg.dims.1] })))
        .collect())
}

fn random_priors(k: usize, rng: &mut SeededRng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| 0.05 + rng.uniform()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|p| p / total).collect()
}

fn random_ensemble(dim: usize, rng: &mut SeededRng) -> Result<CQEnsemble> {
    let k = rng.range_inclusive(2, 4);
    let priors = random_priors(k, rng);
    let states = (0..k)
        .map(|_| {
            let rank = rng.range_inclusive(1, dim);
            random_density_with(dim, rank, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    CQEnsemble::with_priors(priors, states)
}

fn random_measurement(dim: usize, rng: &mut SeededRng) -> Result<ProjectiveMeasurement> {
    let outcomes = rng.range_inclusive(2, dim);
    let mut groups = vec![1usize; outcomes];
    for _ in outcomes..dim {
        let g = rng.below(outcomes);
        groups[g] += 1;
    }
    ProjectiveMeasurement::from_basis(&random_unitary_with(dim, rng), &groups)
}

fn info_trial(dims: (usize, usize), seed: u64) -> Result<[f64; 4]> {
    let mut rng = SeededRng::new(seed);
    let d = rng.range_inclusive(dims.0, dims.1.min(MAX_ENCODING_DIM));
    let e = random_ensemble(d, &mut rng)?;
    let meas = random_measurement(d, &mut rng)?;
    let holevo = e.holevo_information() - measured_mutual_info(&e, &meas)?;

    let block = von_neumann_entropy(&block_state(e.priors(), e.states())?);
    let parts = shannon_entropy(e.priors())?
        + e.priors()
            .iter()
            .zip(e.states())
            .map(|(p, s)| p * von_neumann_entropy(s))
            .sum::<f64>();

    let tri_dims = [
        rng.range_inclusive(2, 3),
        rng.range_inclusive(2, 3),
        rng.range_inclusive(2, 3),
    ];
    let size: usize = tri_dims.iter().product();
    let tri = Tripartite::new(tri_dims, random_priors(size, &mut rng))?;
    let (lhs, rhs) = tri.chain_identity();

    let (dy, dz) = (rng.range_inclusive(2, 3), rng.range_inclusive(2, 3));
    let joint = random_ensemble(dy * dz, &mut rng)?;
    let (full, partial) = cq_monotonicity(&joint, dy, dz)?;
    Ok([
        holevo,
        -(block - parts).abs(),
        -(lhs - rhs).abs(),
        full - partial,
    ])
}

fn info_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let rows = run_trials(cfg, 2, cfg.trials_or(500), |s| info_trial(cfg.dims, s))?;
    let mut tallies = [
        cfg.tally("info.holevo_dominance", 1e-9),
        cfg.tally("info.block_entropy", 1e-9),
        cfg.tally("info.chain_identity", 1e-10),
        cfg.tally("info.cq_monotonicity", 1e-10),
    ];
    for (s, r) in &rows {
        for (t, v) in tallies.iter_mut().zip(r) {
            t.record(*v, *s);
        }
    }
    let details = [
        "measured I(X:Y) <= Holevo information",
        "S(sum p_i |i><i| (x) s_i) = H(p) + sum p_i S(s_i)",
        "I(X:YZ) = I(X:Y) + I(XY:Z) - I(Y:Z)",
        "I(X:YZ) >= I(X:Y) for classical X",
    ];
    let mut checks: Vec<Check> = tallies
        .into_iter()
        .zip(details)
        .map(|(t, d)| t.finish(json!({ "summary": d })))
        .collect();

    let mut gap = cfg.tally("info.binary_entropy_gap", 1e-12);
    for k in 0..=100 {
        let delta = -0.5 + k as f64 * 0.01;
        gap.record(binary_entropy_gap(delta)? - delta * delta, k);
    }
    checks.push(
        gap.finish(json!({ "summary": "1 - H(1/2 + d) >= d^2 on d = -0.5, -0.49, ..., 0.5" })),
    );
    Ok(checks)
}

struct EncodingRow {
    m: usize,
    mean: f64,
    average: f64,
    avgdist: Option<f64>,
    halved: f64,
    pairing: f64,
    decomposition: f64,
}

fn encoding_trial(cfg: &SuiteConfig, seed: u64) -> Result<EncodingRow> {
    let mut rng = SeededRng::new(seed);
    let m = rng.range_inclusive(1, cfg.m);
    let hi = cfg.dims.1.min(MAX_ENCODING_DIM);
    let d = rng.range_inclusive(cfg.dims.0.min(hi), hi);
    let cube = random_cube(m, d, rng.next_u64())?;
    let stats = cube_stats(&cube, rng.next_u64())?;
    let (lhs, rhs) = cube_decomposition(&cube)?;
    Ok(EncodingRow {
        m,
        mean: stats.mean_slack(),
        average: stats.average_encoding_slack(),
        avgdist: stats.avgdist_slack(),
        halved: stats.halved_avgdist_slack(),
        pairing: stats.pairing_slack(),
        decomposition: rhs - lhs,
    })
}

fn encoding_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let trials = cfg.trials_or(200);
    let rows = run_trials(cfg, 3, trials, |s| encoding_trial(cfg, s))?;
    let mut mean = cfg.tally("encoding.mean_vs_pairwise", 1e-8);
    let mut average = cfg.tally("encoding.average_encoding", 1e-8);
    let mut avgdist = cfg.tally("encoding.avgdist", 1e-8);
    let mut halved = cfg.tally("encoding.avgdist_half_delta", 1e-8);
    let mut pairing = cfg.tally("encoding.pairing", PAIRING_TOL);
    let mut decomposition = cfg.tally("encoding.info_decomposition", 1e-9);
    let mut not_applicable = 0usize;
    let mut failing_by_m = vec![0usize; cfg.m + 1];
    for (s, r) in &rows {
        mean.record(r.mean, *s);
        average.record(r.average, *s);
        match r.avgdist {
            Some(v) => {
                if v < -cfg.tol_or(1e-8) {
                    failing_by_m[r.m] += 1;
                }
                avgdist.record(v, *s);
            }
            None => not_applicable += 1,
        }
        halved.record(r.halved, *s);
        pairing.record(r.pairing, *s);
        decomposition.record(r.decomposition, *s);
    }

    let exhaustive_trials = trials.min(100);
    let exhaustive = run_trials(cfg, 4, exhaustive_trials, |s| {
        let mut rng = SeededRng::new(s);
        let hi = cfg.dims.1.min(MAX_ENCODING_DIM);
        let d = rng.range_inclusive(cfg.dims.0.min(hi), hi);
        let cube = random_cube(3, d, rng.next_u64())?;
        let table = cube.distance_table();
        let delta = table.iter().flatten().sum::<f64>() / 64.0;
        let found = match search_pairing(
            &table,
            rng.next_u64(),
            crate::encoding::DEFAULT_PAIRING_TRIES,
        ) {
            Ok(p) => pairing_value(&table, &p),
            Err(Error::PairingSearch { best, .. }) => best,
            Err(e) => return Err(e),
        };
        let best = best_pairing_value(&table);
        Ok((best - delta, found - delta, best - found))
    })?;
    let mut exhaustive_tally = cfg.tally("encoding.pairing_exhaustive_m3", PAIRING_TOL);
    let mut optimal_found = 0usize;
    for (s, (best, found, gap)) in &exhaustive {
        exhaustive_tally.record(best.min(*found), *s);
        optimal_found += usize::from(gap.abs() < 1e-12);
    }

    Ok(vec![
        mean.finish(json!({ "summary": "mean distance to the average state <= mean pairwise distance" })),
        average.finish(json!({ "summary": "mean pairwise distance <= 2 sqrt(I)" })),
        avgdist.finish(json!({
            "summary": "I >= 1 - H((1 + D)/2) for mean pairwise distance D <= 1",
            "not_applicable": not_applicable,
            "violations_by_m": failing_by_m,
        })),
        halved.finish(json!({ "summary": "I >= 1 - H((1 + D/2)/2)" })),
        pairing.finish(json!({ "summary": "random pairing search reaches the mean pairwise distance" })),
        exhaustive_tally.finish(json!({
            "summary": "m = 3: search and exhaustive enumeration of all 105 pairings both reach the mean",
            "search_found_optimum": optimal_found,
        })),
        decomposition.finish(json!({ "summary": "prefix-bit information sum <= I(Q:X)" })),
    ])
}

fn transition_trial_row(cfg: &SuiteConfig, seed: u64) -> Result<[f64; 4]> {
    let mut rng = SeededRng::new(seed);
    let hi = cfg.dims.1.min(MAX_ENCODING_DIM);
    let dh = rng.range_inclusive(cfg.dims.0.min(hi), hi);
    let dk = rng.range_inclusive(cfg.dims.0.min(hi), hi);
    let t = transition_trial((dh, dk), rng.next_u64())?;
    let phi1 = random_pure(dh, dk, rng.next_u64())?;
    let phi2 = phi1.apply_k(&random_unitary(dk, rng.next_u64()));
    let u = exact_local_transition(&phi1, &phi2, 1e-10)?;
    let exact = phase_distance(phi2.apply_k(&u).vec(), phi1.vec());
    Ok([-t.fidelity_mismatch, t.slack, t.chain_slack, -exact])
}

fn transition_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let rows = run_trials(cfg, 5, cfg.trials_or(1000), |s| {
        transition_trial_row(cfg, s)
    })?;
    let mut tallies = [
        cfg.tally("transition.overlap_fidelity", 1e-8),
        cfg.tally("transition.bound", 1e-8),
        cfg.tally("transition.fidelity_chain", 1e-8),
        cfg.tally("transition.exact", 1e-8),
    ];
    for (s, r) in &rows {
        for (t, v) in tallies.iter_mut().zip(r) {
            t.record(*v, *s);
        }
    }
    let details = [
        "squared overlap after alignment equals F",
        "|| phi1 - (I (x) U) phi2 || <= 2 ||r1 - r2||_t^(1/2)",
        "1 - F <= ||r1 - r2||_t",
        "equal reduced states: aligned state equals target up to phase",
    ];
    Ok(tallies
        .into_iter()
        .zip(details)
        .map(|(t, d)| t.finish(json!({ "summary": d })))
        .collect())
}

fn rac_checks(cfg: &SuiteConfig, n: usize) -> Result<Vec<Check>> {
    let c = rac_lower_bound_check(&optimal_rac(n)?, n)?;
    let mut bound = cfg.tally(&format!("rac.lower_bound_n{n}"), RAC_TOL);
    bound.record(c.slack(), n as u64);
    let mut chain = cfg.tally(&format!("rac.info_chain_n{n}"), RAC_TOL);
    chain.record(
        c.info_slack()
            .min(c.capacity_slack())
            .min(c.decomposition.1 - c.decomposition.0),
        n as u64,
    );

    let copy = rac_lower_bound_check(&classical_copy_protocol(n)?, n)?;
    let mut tight = cfg.tally(&format!("rac.classical_copy_n{n}"), RAC_TOL);
    tight.record(-copy.slack().abs(), n as u64);

    let query = index_query_protocol(n)?;
    let r = run_protocol(
        &query,
        &index_distribution(n)?,
        &IndexTask::new(n),
        Shots::Exact,
    )?;
    let shape_ok = r.rounds == 2 && r.message_qubits == ceil_log2(n) + 1;
    let mut two = cfg.tally(&format!("rac.index_query_n{n}"), RAC_TOL);
    two.record(if shape_ok { -r.error } else { -1.0 }, n as u64);

    Ok(vec![
        bound.finish(json!({
            "summary": format!("n={n} m={}: eps={:.6}, (1-H(eps))n={:.6} <= m", c.m, c.eps, c.lhs),
            "eps": c.eps,
            "success": 1.0 - c.eps,
            "lhs": c.lhs,
            "m": c.m,
        })),
        chain.finish(json!({
            "summary": format!("(1-H(eps))n={:.6} <= I(Q:X)={:.6} <= m", c.lhs, c.info),
            "info": c.info,
            "decomposition": [c.decomposition.0, c.decomposition.1],
        })),
        tight.finish(json!({
            "summary": format!("copy protocol: eps={:.3e}, (1-H(eps))n={:.6} = m={}", copy.eps, copy.lhs, copy.m),
            "eps": copy.eps,
            "lhs": copy.lhs,
        })),
        two.finish(json!({
            "summary": format!("two messages, {} qubits, error {:.3e}", r.message_qubits, r.error),
            "rounds": r.rounds,
            "message_qubits": r.message_qubits,
            "error": r.error,
        })),
    ])
}

fn rac_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let ns = match cfg.n {
        Some(n) if (2..=5).contains(&n) => vec![n],
        Some(n) => {
            return Err(Error::Precondition(format!(
                "rac suite needs 2 <= n <= 5, got {n}"
            )))
        }
        None => vec![2, 3],
    };
    let mut checks = Vec::new();
    for n in ns {
        checks.extend(rac_checks(cfg, n)?);
    }
    Ok(checks)
}

fn reduction_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let n = match cfg.suite {
        Suite::Reduction => cfg.n.unwrap_or(REDUCTION_N),
        _ => REDUCTION_N,
    };
    if n != REDUCTION_N {
        return Err(Error::Precondition(format!(
            "reduction suite runs at n = {REDUCTION_N} only (larger n exceeds the qubit cap), got {n}"
        )));
    }
    let instances = toy_instances(n, cfg.seed)?;
    let reports: Vec<PipelineReport> = instances
        .par_iter()
        .map(|inst| reduction_pipeline(&inst.spec, n))
        .collect::<Result<_>>()?;

    let mut zero = cfg.tally("reduction.zero_information", ZERO_INFO_TOL);
    let mut align = cfg.tally("reduction.alignment_bound", REDUCTION_TOL);
    let mut info = cfg.tally("reduction.information_bound", REDUCTION_TOL);
    let mut tv = cfg.tally("reduction.simulation_tv", REDUCTION_TOL);
    let mut rounds = cfg.tally("reduction.round_reduction", 0.0);
    let mut qubits = cfg.tally("reduction.message_budget", 0.0);
    let mut pipeline = cfg.tally("reduction.pipeline_error", REDUCTION_TOL);
    let mut budget = cfg.tally("reduction.information_budget", ZERO_INFO_TOL);
    let mut per_instance = Vec::new();
    for (idx, (inst, r)) in instances.iter().zip(&reports).enumerate() {
        let id = idx as u64;
        for s in &r.slices {
            zero.record(-s.mu_j_modified, id);
            align.record(s.alignment_bound - s.delta_j, id);
            info.record(s.info_bound - s.delta_j, id);
            tv.record(-s.tv, id);
            rounds.record(
                -(s.rounds_modified as f64 - 1.0 - s.rounds_dropped as f64).abs(),
                id,
            );
            qubits.record(s.qubit_budget as f64 - s.qubits_dropped as f64, id);
        }
        pipeline.record(r.eps_prime_bound - r.eps_prime, id);
        budget.record(r.first_message_qubits as f64 - r.mu_sum(), id);
        per_instance.push(json!({
            "name": inst.name,
            "eps": r.eps,
            "eps_prime": r.eps_prime,
            "eps_prime_bound": r.eps_prime_bound,
            "vacuous": r.vacuous,
            "mu": r.mu,
            "slices": r.slices.iter().map(|s| json!({
                "j": s.j,
                "eps_j": s.eps_j,
                "delta_j": s.delta_j,
                "delta_j_dropped": s.delta_j_dropped,
                "mu_j": s.mu_j,
                "t_z": s.alignments.iter().map(|a| a.t_z).collect::<Vec<_>>(),
                "rounds": [s.rounds_modified, s.rounds_dropped],
                "message_qubits": s.qubits_dropped,
            })).collect::<Vec<_>>(),
        }));
    }
    let vacuous = reports.iter().filter(|r| r.vacuous).count();

    let ys = y_labels(3);
    let uniform = InputState::uniform(&ys, &Assignment::new(), Vec::new())?;
    let random = run_trials(cfg, 6, cfg.trials_or(50).min(200), |s| {
        let spec = random_first_message_protocol(3, s)?;
        let (mu, ell1) = message_info_budget(&spec, &uniform, &ys)?;
        Ok(ell1 as f64 - mu.iter().sum::<f64>())
    })?;
    let mut random_budget = cfg.tally("reduction.information_budget_random", ZERO_INFO_TOL);
    for (s, v) in &random {
        random_budget.record(*v, *s);
    }

    let names: Vec<&str> = instances.iter().map(|i| i.name.as_str()).collect();
    Ok(vec![
        zero.finish(json!({ "summary": "modified opening message carries no information about y_j", "instances": names })),
        align.finish(json!({ "summary": "delta_j <= eps_j + 2 E_z sqrt(t_z)" })),
        info.finish(json!({ "summary": "delta_j <= eps_j + 4 mu_j^(1/4)" })),
        tv.finish(json!({ "summary": "protocol without the opening message has the same outcome distribution" })),
        rounds.finish(json!({ "summary": "one message fewer" })),
        qubits.finish(json!({ "summary": "message qubits <= l + ceil(log n)" })),
        pipeline.finish(json!({
            "summary": format!("mean delta_j <= eps + 4 (l/n)^(1/4); bound vacuous on {vacuous} of {} instances", reports.len()),
            "instances": per_instance,
        })),
        budget.finish(json!({ "summary": "sum_i I(M:y_i) <= opening message length" })),
        random_budget.finish(json!({ "summary": "random one-qubit opening messages on three input bits" })),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(suite: Suite) -> SuiteConfig {
        SuiteConfig {
            suite,
            seed: 3,
            trials: Some(5),
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SuiteConfig::default().validate().is_ok());
        for bad in [
            SuiteConfig {
                trials: Some(0),
                ..Default::default()
            },
            SuiteConfig {
                tol: Some(-1.0),
                ..Default::default()
            },
            SuiteConfig {
                dims: (1, 4),
                ..Default::default()
            },
            SuiteConfig {
                dims: (5, 4),
                ..Default::default()
            },
            SuiteConfig {
                m: 0,
                ..Default::default()
            },
        ] {
            assert!(run_suite(&bad).is_err());
        }
    }

    #[test]
    fn small_suites_pass() {
        for s in [Suite::Metrics, Suite::Info, Suite::Transition, Suite::Rac] {
            let r = run_suite(&small(s)).unwrap();
            assert_eq!(r.violations(), 0, "{}", r.to_text());
            assert!(r.checks.iter().all(|c| c.name.starts_with(s.name())));
        }
    }

    #[test]
    fn report_is_deterministic() {
        let a = run_suite(&small(Suite::Encoding))
            .unwrap()
            .to_canonical_json()
            .unwrap();
        let b = run_suite(&small(Suite::Encoding))
            .unwrap()
            .to_canonical_json()
            .unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(r#"{"schema":1,"suite":"encoding","config":{"#));
    }

    #[test]
    fn tolerance_override_applies() {
        let cfg = SuiteConfig {
            tol: Some(1e-6),
            ..small(Suite::Metrics)
        };
        let r = run_suite(&cfg).unwrap();
        assert!(r.checks.iter().all(|c| c.tolerance == 1e-6));
    }

    #[test]
    fn rac_suite_reports_eps() {
        let cfg = SuiteConfig {
            n: Some(2),
            ..small(Suite::Rac)
        };
        let r = run_suite(&cfg).unwrap();
        let eps = r.checks[0].details["eps"].as_f64().unwrap();
        assert!((eps - 0.146447).abs() < 1e-5);
        assert!(run_suite(&SuiteConfig {
            n: Some(9),
            ..small(Suite::Rac)
        })
        .is_err());
        assert!(run_suite(&SuiteConfig {
            n: Some(3),
            ..small(Suite::All)
        })
        .is_ok());
        assert!(run_suite(&SuiteConfig {
            n: Some(3),
            ..small(Suite::Reduction)
        })
        .is_err());
    }
}
