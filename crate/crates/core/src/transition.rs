//! Local unitaries on the purifying system that carry one purification
//! onto (or as close as possible to) another.
//!
//! With `φ ↔ A` the `dim_h × dim_k` reshaping, `<φ₁|(I⊗U)|φ₂> = Tr(C Uᵀ)` for
//! `C = A₁†A₂`. Writing `C = W Σ V†`, the choice `U = conj(W) Vᵀ` makes the
//! overlap equal to `Σσ = ‖C‖_t`, which is maximal, and real.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{c64, svd, ComplexMatrix, Keep};
use crate::metrics::{fidelity, trace_distance};
use crate::qstate::{
    canonical_purification, derive_seed, random_density, random_unitary, BipartitePureState,
    SeededRng,
};

/// Overlap deficit below which the identity is returned instead of the
/// computed rotation.
const IDENTITY_PREFERENCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TransitionResult {
    pub unitary_k: ComplexMatrix,
    pub achieved_overlap_sq: f64,
    pub pure_distance: f64,
    /// `2 ‖ρ₁ − ρ₂‖_t^{1/2}` for the two `H`-side reduced states.
    pub bound: f64,
}

fn same_shape(a: &BipartitePureState, b: &BipartitePureState) -> Result<()> {
    if a.dim_h() != b.dim_h() || a.dim_k() != b.dim_k() {
        return Err(Error::DimensionMismatch {
            expected: a.dim_h() * a.dim_k(),
            actual: b.dim_h() * b.dim_k(),
        });
    }
    Ok(())
}

/// `U` on `K` maximizing `|<φ₁|(I⊗U)|φ₂>|`, phased so the overlap is real and
/// non-negative.
pub fn optimal_k_unitary(
    phi1: &BipartitePureState,
    phi2: &BipartitePureState,
) -> Result<ComplexMatrix> {
    same_shape(phi1, phi2)?;
    let c = &phi1.as_matrix().adjoint() * &phi2.as_matrix();
    let d = svd(&c)?;
    let best: f64 = d.s.iter().sum();
    let tr = c.trace();
    let dk = phi1.dim_k();
    if tr.norm() >= best - IDENTITY_PREFERENCE {
        let phase = if tr.norm() > 0.0 {
            tr.conj() / tr.norm()
        } else {
            c64(1.0, 0.0)
        };
        return Ok(ComplexMatrix::identity(dk).scale(phase));
    }
    Ok(&d.u.conj() * &d.v.transpose())
}

pub fn uhlmann_align(
    phi1: &BipartitePureState,
    phi2: &BipartitePureState,
    tol: f64,
) -> Result<TransitionResult> {
    let u = optimal_k_unitary(phi1, phi2)?;
    let residual = u.unitarity_residual();
    if residual > tol.max(1e-10) {
        return Err(Error::NotUnitary { residual });
    }
    let moved = phi2.apply_k(&u);
    let ov = phi1.overlap(&moved);
    let ov_sq = ov.norm_sqr().min(1.0);
    let td = trace_distance(&phi1.reduced(Keep::H), &phi2.reduced(Keep::H))?;
    Ok(TransitionResult {
        unitary_k: u,
        achieved_overlap_sq: ov_sq,
        pure_distance: 2.0 * (1.0 - ov_sq).max(0.0).sqrt(),
        bound: 2.0 * td.sqrt(),
    })
}

/// `U` with `(I⊗U)|φ₂> = |φ₁>` when both states have the same `H`-side
/// reduced matrix. The global phase is absorbed into `U`.
pub fn exact_local_transition(
    phi1: &BipartitePureState,
    phi2: &BipartitePureState,
    tol: f64,
) -> Result<ComplexMatrix> {
    same_shape(phi1, phi2)?;
    let r1 = phi1.reduced(Keep::H);
    let r2 = phi2.reduced(Keep::H);
    let gap = r1.matrix().distance(r2.matrix());
    if gap > tol {
        return Err(Error::Precondition(format!(
            "reduced states differ by {gap:.3e}; use uhlmann_align"
        )));
    }
    optimal_k_unitary(phi1, phi2)
}

/// Summary of a randomized sweep of the local transition bound.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionReport {
    pub trials: usize,
    /// Minimum of `bound − pure_distance`.
    pub min_slack: f64,
    pub violations: usize,
    pub worst_instance_seed: u64,
    /// Minimum of `‖ρ₁−ρ₂‖_t − (1 − F)`.
    pub chain_min_slack: f64,
    pub chain_violations: usize,
    /// Largest `|overlap² − F|`.
    pub max_fidelity_mismatch: f64,
}

/// Tolerance on each sweep inequality.
pub const TRANSITION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct TransitionTrial {
    pub seed: u64,
    pub slack: f64,
    pub chain_slack: f64,
    pub fidelity_mismatch: f64,
}

/// One sampled instance: two random densities on `H` of random ranks,
/// purified canonically into `K`, with a random rotation of the second
/// purification's `K` side.
pub fn transition_trial(dims: (usize, usize), seed: u64) -> Result<TransitionTrial> {
    let (dh, dk) = dims;
    let mut rng = SeededRng::new(seed);
    let max_rank = dh.min(dk);
    let r1 = rng.range_inclusive(1, max_rank);
    let r2 = rng.range_inclusive(1, max_rank);
    let rho1 = random_density(dh, r1, rng.next_u64())?;
    let rho2 = random_density(dh, r2, rng.next_u64())?;
    let phi1 = canonical_purification(&rho1, dk, 1e-10)?;
    let phi2 =
        canonical_purification(&rho2, dk, 1e-10)?.apply_k(&random_unitary(dk, rng.next_u64()));
    let t = uhlmann_align(&phi1, &phi2, 1e-10)?;
    let f = fidelity(&rho1, &rho2)?;
    let td = trace_distance(&rho1, &rho2)?;
    Ok(TransitionTrial {
        seed,
        slack: t.bound - t.pure_distance,
        chain_slack: td - (1.0 - f),
        fidelity_mismatch: (t.achieved_overlap_sq - f).abs(),
    })
}

pub fn verify_transition_bound(
    trials: usize,
    dims: (usize, usize),
    seed: u64,
) -> Result<TransitionReport> {
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let results: Vec<TransitionTrial> = (0..trials as u64)
        .into_par_iter()
        .map(|i| transition_trial(dims, derive_seed(seed, i)))
        .collect::<Result<_>>()?;
    let mut report = TransitionReport {
        trials,
        min_slack: f64::INFINITY,
        violations: 0,
        worst_instance_seed: results[0].seed,
        chain_min_slack: f64::INFINITY,
        chain_violations: 0,
        max_fidelity_mismatch: 0.0,
    };
    for r in &results {
        if r.slack < report.min_slack {
            report.min_slack = r.slack;
            report.worst_instance_seed = r.seed;
        }
        report.violations += usize::from(r.slack < -TRANSITION_TOL);
        report.chain_min_slack = report.chain_min_slack.min(r.chain_slack);
        report.chain_violations += usize::from(r.chain_slack < -TRANSITION_TOL);
        report.max_fidelity_mismatch = report.max_fidelity_mismatch.max(r.fidelity_mismatch);
    }
    Ok(report)
}
