//! Exit criteria. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};

use num_complex::Complex64;
use qcomm::matcore::ComplexMatrix;
use qcomm::metrics::{fidelity, trace_distance};
use qcomm::protosim::rac::{
    classical_copy_protocol, optimal_rac, optimize_rac_directions, rac_lower_bound_check,
    rac_success,
};
use qcomm::protosim::MAX_QUANTUM_QUBITS;
use qcomm::qinfo::{binary_entropy_gap, CQEnsemble};
use qcomm::qstate::{DensityMatrix, SeededRng};
use qcomm::suites::{run_suite, Suite, SuiteConfig, SuiteReport};

const SEED: u64 = 20240611;

const METRICS_TRIALS: usize = 1000;
const METRICS_TOL: f64 = 1e-9;
const INFO_TRIALS: usize = 500;
const INFO_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-12;
const TRANSITION_TRIALS: usize = 1000;
const TRANSITION_TOL: f64 = 1e-8;
const ENCODING_TRIALS: usize = 200;
const ENCODING_MAX_M: usize = 5;
const ENCODING_TOL: f64 = 1e-8;
const PAIRING_TOL: f64 = 1e-10;
const DECOMPOSITION_TOL: f64 = 1e-9;
const RAC_TARGET: f64 = 0.85355;
const RAC_WINDOW: f64 = 1e-3;
const RAC_EQUALITY_TOL: f64 = 1e-9;
const MIN_TOY_INSTANCES: usize = 3;
const ZERO_INFO_TOL: f64 = 1e-9;
const REDUCTION_TOL: f64 = 1e-8;
const BUDGET_TOL: f64 = 1e-9;

type Outcome = Vec<String>;
type Criterion = (&'static str, fn(&mut Outcome));

fn config(suite: Suite, trials: Option<usize>) -> SuiteConfig {
    SuiteConfig {
        suite,
        seed: SEED,
        trials,
        dims: (2, 8),
        m: ENCODING_MAX_M,
        ..SuiteConfig::default()
    }
}

fn run(cfg: &SuiteConfig, failures: &mut Outcome) -> Option<SuiteReport> {
    match run_suite(cfg) {
        Ok(r) => Some(r),
        Err(e) => {
            failures.push(format!("suite {} errored: {e}", cfg.suite.name()));
            None
        }
    }
}

/// Requires `min_slack >= -tol` over at least `min_trials` trials.
fn require(r: &SuiteReport, name: &str, tol: f64, min_trials: usize, failures: &mut Outcome) {
    let Some(c) = r.checks.iter().find(|c| c.name == name) else {
        failures.push(format!("{name} missing"));
        return;
    };
    if c.trials < min_trials {
        failures.push(format!("{name}: {} trials < {min_trials}", c.trials));
    }
    if c.min_slack.is_nan() || c.min_slack < -tol {
        failures.push(format!(
            "{name}: min slack {:.3e} below -{tol:e}",
            c.min_slack
        ));
    }
}

fn bloch_density(r: [f64; 3]) -> DensityMatrix {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let m = ComplexMatrix::from_rows(&[
        vec![c((1.0 + r[2]) / 2.0, 0.0), c(r[0] / 2.0, -r[1] / 2.0)],
        vec![c(r[0] / 2.0, r[1] / 2.0), c((1.0 - r[2]) / 2.0, 0.0)],
    ])
    .unwrap();
    DensityMatrix::new(m, 1e-12).unwrap()
}

fn random_bloch(rng: &mut SeededRng) -> [f64; 3] {
    loop {
        let v = [0; 3].map(|_| 2.0 * rng.uniform() - 1.0);
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v;
        }
    }
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn criterion_metrics(f: &mut Outcome) {
    if let Some(r) = run(&config(Suite::Metrics, Some(METRICS_TRIALS)), f) {
        for name in [
            "metrics.fvg_lower",
            "metrics.fvg_upper",
            "metrics.optimal_measurement",
            "metrics.pure_trace_distance",
        ] {
            require(&r, name, METRICS_TOL, METRICS_TRIALS, f);
        }
    }
    // Qubit closed forms: ||r1 - r2||_t = |a - b| and
    // F = (1 + a.b + sqrt((1 - |a|^2)(1 - |b|^2))) / 2.
    let mut rng = SeededRng::new(SEED);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (a, b) = (random_bloch(&mut rng), random_bloch(&mut rng));
        let (ra, rb) = (bloch_density(a), bloch_density(b));
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum();
        let nb: f64 = b.iter().map(|x| x * x).sum();
        let dist = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let fid = (1.0 + dot + ((1.0 - na) * (1.0 - nb)).max(0.0).sqrt()) / 2.0;
        worst = worst
            .max((trace_distance(&ra, &rb).unwrap() - dist).abs())
            .max((fidelity(&ra, &rb).unwrap() - fid).abs());
    }
    if worst > METRICS_TOL {
        f.push(format!("qubit closed-form oracle off by {worst:.3e}"));
    }
}

fn criterion_info(f: &mut Outcome) {
    if let Some(r) = run(&config(Suite::Info, Some(INFO_TRIALS)), f) {
        require(&r, "info.holevo_dominance", INFO_TOL, INFO_TRIALS, f);
        require(&r, "info.block_entropy", INFO_TOL, INFO_TRIALS, f);
        require(&r, "info.chain_identity", IDENTITY_TOL, INFO_TRIALS, f);
        require(&r, "info.cq_monotonicity", IDENTITY_TOL, INFO_TRIALS, f);
        require(&r, "info.binary_entropy_gap", GAP_TOL, 101, f);
    }
    for k in 0..=1000 {
        let d = -0.5 + k as f64 / 1000.0;
        let gap = binary_entropy_gap(d).unwrap();
        if (gap - (1.0 - h2(0.5 + d))).abs() > GAP_TOL || gap < d * d - GAP_TOL {
            f.push(format!("entropy gap oracle fails at delta = {d}"));
            break;
        }
    }
    // {|0>, |+>} uniformly: chi = H(cos^2(pi/8)).
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    let plus = DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap();
    let chi = CQEnsemble::uniform(vec![zero, plus])
        .unwrap()
        .holevo_information();
    let expected = h2((PI / 8.0).cos().powi(2));
    if (chi - expected).abs() > INFO_TOL {
        f.push(format!("Holevo oracle: {chi} vs {expected}"));
    }
}

fn criterion_transition(f: &mut Outcome) {
    if let Some(r) = run(&config(Suite::Transition, Some(TRANSITION_TRIALS)), f) {
        for name in [
            "transition.overlap_fidelity",
            "transition.bound",
            "transition.fidelity_chain",
            "transition.exact",
        ] {
            require(&r, name, TRANSITION_TOL, TRANSITION_TRIALS, f);
        }
    }
}

fn criterion_encoding(f: &mut Outcome) {
    let Some(r) = run(&config(Suite::Encoding, Some(ENCODING_TRIALS)), f) else {
        return;
    };
    require(
        &r,
        "encoding.mean_vs_pairwise",
        ENCODING_TOL,
        ENCODING_TRIALS,
        f,
    );
    require(
        &r,
        "encoding.average_encoding",
        ENCODING_TOL,
        ENCODING_TRIALS,
        f,
    );
    require(&r, "encoding.avgdist", ENCODING_TOL, 1, f);
    require(&r, "encoding.pairing", PAIRING_TOL, ENCODING_TRIALS, f);
    require(&r, "encoding.pairing_exhaustive_m3", PAIRING_TOL, 1, f);
    require(
        &r,
        "encoding.info_decomposition",
        DECOMPOSITION_TOL,
        ENCODING_TRIALS,
        f,
    );
}

fn criterion_rac(f: &mut Outcome) {
    // Two orthogonal Bloch directions: success 1/2 + 1/(2 sqrt 2) = cos^2(pi/8).
    let closed_n2 = 0.5 + 1.0 / (2.0 * 2f64.sqrt());
    // Three orthogonal directions: 1/2 + 1/(2 sqrt 3).
    let closed_n3 = 0.5 + 1.0 / (2.0 * 3f64.sqrt());
    if (closed_n2 - RAC_TARGET).abs() > RAC_WINDOW {
        f.push("closed form outside the target window".into());
    }
    let dirs = optimize_rac_directions(2).unwrap();
    let found = rac_success(&dirs);
    if (found - RAC_TARGET).abs() > RAC_WINDOW {
        f.push(format!(
            "optimized n=2 success {found:.6} outside {RAC_TARGET} +- {RAC_WINDOW:e}"
        ));
    }
    for (n, closed) in [(2, closed_n2), (3, closed_n3)] {
        let c = match optimal_rac(n).and_then(|p| rac_lower_bound_check(&p, n)) {
            Ok(c) => c,
            Err(e) => {
                f.push(format!("n={n}: {e}"));
                continue;
            }
        };
        if (1.0 - c.eps - closed).abs() > RAC_WINDOW {
            f.push(format!(
                "n={n}: simulated success {:.6}, closed form {closed:.6}",
                1.0 - c.eps
            ));
        }
        if c.m != 1 || c.slack().is_nan() || c.slack() < 0.0 {
            f.push(format!("n={n}: m={} slack={:.3e}", c.m, c.slack()));
        }
        match classical_copy_protocol(n).and_then(|p| rac_lower_bound_check(&p, n)) {
            Ok(copy) => {
                if copy.m != n || (copy.lhs - copy.m as f64).abs() > RAC_EQUALITY_TOL {
                    f.push(format!("copy n={n}: lhs {} vs m {}", copy.lhs, copy.m));
                }
            }
            Err(e) => f.push(format!("copy n={n}: {e}")),
        }
    }
}

fn criterion_reduction(f: &mut Outcome) {
    let Some(r) = run(&config(Suite::Reduction, None), f) else {
        return;
    };
    let instances = r
        .checks
        .iter()
        .find(|c| c.name == "reduction.pipeline_error")
        .and_then(|c| c.details["instances"].as_array().map(Vec::len))
        .unwrap_or(0);
    if instances < MIN_TOY_INSTANCES {
        f.push(format!("{instances} toy instances < {MIN_TOY_INSTANCES}"));
    }
    if MAX_QUANTUM_QUBITS > 8 {
        f.push("qubit cap exceeds dimension 256".into());
    }
    let slices = 2 * MIN_TOY_INSTANCES;
    require(&r, "reduction.zero_information", ZERO_INFO_TOL, slices, f);
    require(&r, "reduction.alignment_bound", REDUCTION_TOL, slices, f);
    require(&r, "reduction.information_bound", REDUCTION_TOL, slices, f);
    require(&r, "reduction.simulation_tv", REDUCTION_TOL, slices, f);
    require(&r, "reduction.round_reduction", 0.0, slices, f);
    require(&r, "reduction.message_budget", 0.0, slices, f);
    require(
        &r,
        "reduction.information_budget",
        BUDGET_TOL,
        MIN_TOY_INSTANCES,
        f,
    );
    require(&r, "reduction.information_budget_random", BUDGET_TOL, 1, f);
}

fn criterion_determinism(f: &mut Outcome) {
    let cfg = config(Suite::All, None);
    let a = run_suite(&cfg).and_then(|r| r.to_canonical_json());
    let b = run_suite(&cfg).and_then(|r| r.to_canonical_json());
    match (a, b) {
        (Ok(a), Ok(b)) if a == b => {}
        (Ok(_), Ok(_)) => f.push("library reports differ".into()),
        (Err(e), _) | (_, Err(e)) => f.push(format!("suite errored: {e}")),
    }
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let path = dir.path().join(format!("r{k}.json"));
        let out = Command::new(env!("CARGO_BIN_EXE_qcomm"))
            .args(["--suite", "all", "--seed", "1", "--format", "json", "--out"])
            .arg(&path)
            .output()
            .unwrap();
        outputs.push((out.stdout, std::fs::read(&path).unwrap_or_default()));
    }
    if outputs[0] != outputs[1] || outputs[0].0.is_empty() {
        f.push("CLI reports differ between runs".into());
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("metrics", criterion_metrics),
        ("info", criterion_info),
        ("transition", criterion_transition),
        ("encoding", criterion_encoding),
        ("rac", criterion_rac),
        ("reduction", criterion_reduction),
        ("determinism", criterion_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let mut failures = Vec::new();
        check(&mut failures);
        if failures.is_empty() {
            println!("criterion {} ({name}): PASS", i + 1);
        } else {
            failed += 1;
            println!(
                "criterion {} ({name}): FAIL: {}",
                i + 1,
                failures.join("; ")
            );
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
