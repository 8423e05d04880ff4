//! Distances and fidelity between mixed states.
//!
//! Fidelity is the squared-overlap form `F = ‖√ρ₁ √ρ₂‖_t²`, so
//! `F(|a><a|, |b><b|) = |<a|b>|²`.

use crate::error::{Error, Result};
use crate::matcore::{
    hermitian_eig, inner, psd_sqrt, singular_value_sum, vec_norm, Complex64, ComplexMatrix,
    VALIDATION_TOL,
};
use crate::qstate::DensityMatrix;

/// Projective two-outcome measurement `{P₊, P₋}`.
#[derive(Debug, Clone)]
pub struct TwoOutcomeMeasurement {
    pub projector_pos: ComplexMatrix,
    pub projector_neg: ComplexMatrix,
}

impl TwoOutcomeMeasurement {
    /// Builds `{P, I − P}` after checking that `p` is an orthogonal projector.
    pub fn from_projector(p: ComplexMatrix, tol: f64) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::Size("projector must be square".into()));
        }
        let residual = p.hermiticity_residual();
        if residual > tol {
            return Err(Error::NotHermitian { residual });
        }
        let idem = (&(&p * &p) - &p).frobenius_norm();
        if idem > tol {
            return Err(Error::Precondition(format!(
                "projector not idempotent ({idem:.3e})"
            )));
        }
        let neg = &ComplexMatrix::identity(p.rows()) - &p;
        Ok(Self {
            projector_pos: p,
            projector_neg: neg,
        })
    }

    /// Outcome probabilities `(Tr P₊ρ, Tr P₋ρ)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> (f64, f64) {
        let p = trace_product(&self.projector_pos, rho.matrix());
        let n = trace_product(&self.projector_neg, rho.matrix());
        (p, n)
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let d = self.projector_pos.rows();
        let p = &self.projector_pos;
        let n = &self.projector_neg;
        p.hermiticity_residual() <= tol
            && n.hermiticity_residual() <= tol
            && (&(p * p) - p).frobenius_norm() <= tol
            && (&(n * n) - n).frobenius_norm() <= tol
            && (p * n).frobenius_norm() <= tol
            && (&(p + n) - &ComplexMatrix::identity(d)).frobenius_norm() <= tol
    }
}

/// `Re Tr(A B)` without forming the product.
pub(crate) fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.cols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

fn same_dim(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<()> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            expected: r1.dim(),
            actual: r2.dim(),
        });
    }
    Ok(())
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    singular_value_sum(a).expect("SVD of a finite matrix converges")
}

pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    same_dim(r1, r2)?;
    let diff = r1.matrix() - r2.matrix();
    // the difference is Hermitian: its trace norm is the absolute eigenvalue sum
    let eig = hermitian_eig(&diff.hermitian_part(), VALIDATION_TOL)?;
    Ok(eig.values.iter().map(|l| l.abs()).sum())
}

/// `2 √(1 − |<φ₁|φ₂>|²)` for unit vectors.
pub fn pure_trace_distance(phi1: &[Complex64], phi2: &[Complex64]) -> Result<f64> {
    if phi1.len() != phi2.len() {
        return Err(Error::DimensionMismatch {
            expected: phi1.len(),
            actual: phi2.len(),
        });
    }
    for v in [phi1, phi2] {
        let n = vec_norm(v);
        if (n - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NotNormalized { norm: n });
        }
    }
    let ov = inner(phi1, phi2).norm_sqr();
    Ok(2.0 * (1.0 - ov).max(0.0).sqrt())
}

pub fn fidelity(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    same_dim(r1, r2)?;
    let s1 = psd_sqrt(r1.matrix(), VALIDATION_TOL)?;
    let s2 = psd_sqrt(r2.matrix(), VALIDATION_TOL)?;
    let t = trace_norm(&(&s1 * &s2));
    Ok((t * t).clamp(0.0, 1.0))
}

/// Projectors onto the non-negative and negative eigenspaces of `r1 − r2`,
/// and the ℓ₁ distance between the two outcome distributions they induce.
/// Eigenvalues in `[−tol, ∞)` go to the positive side.
pub fn optimal_measurement(
    r1: &DensityMatrix,
    r2: &DensityMatrix,
    tol: f64,
) -> Result<(TwoOutcomeMeasurement, f64)> {
    same_dim(r1, r2)?;
    let d = r1.dim();
    let diff = (r1.matrix() - r2.matrix()).hermitian_part();
    let eig = hermitian_eig(&diff, VALIDATION_TOL)?;
    let mut pos = ComplexMatrix::zeros(d, d);
    let mut neg = ComplexMatrix::zeros(d, d);
    for (i, &l) in eig.values.iter().enumerate() {
        let p = ComplexMatrix::projector(&eig.vector(i));
        if l >= -tol {
            pos = &pos + &p;
        } else {
            neg = &neg + &p;
        }
    }
    let achieved = trace_product(&pos, &diff).abs() + trace_product(&neg, &diff).abs();
    Ok((
        TwoOutcomeMeasurement {
            projector_pos: pos,
            projector_neg: neg,
        },
        achieved,
    ))
}

/// ℓ₁ distance between the outcome distributions of `m` on two states.
pub fn measured_l1(m: &TwoOutcomeMeasurement, r1: &DensityMatrix, r2: &DensityMatrix) -> f64 {
    let (a1, b1) = m.probabilities(r1);
    let (a2, b2) = m.probabilities(r2);
    (a1 - a2).abs() + (b1 - b2).abs()
}

/// Best probability of telling `r1` from `r2` under a uniform prior.
pub fn bayes_success(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    Ok(0.5 + trace_distance(r1, r2)? / 4.0)
}

/// Slacks of `1 − √F ≤ ½‖ρ₁−ρ₂‖_t ≤ √(1−F)`, lower then upper.
pub fn fvg_check(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<(f64, f64)> {
    let half = trace_distance(r1, r2)? / 2.0;
    let f = fidelity(r1, r2)?;
    Ok((half - (1.0 - f.sqrt()), (1.0 - f).sqrt() - half))
}
