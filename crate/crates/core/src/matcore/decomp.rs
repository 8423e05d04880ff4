//! Jacobi-based decompositions.
//!
//! Both the Hermitian eigensolver and the SVD are driven by the same 2×2
//! unitary rotation that annihilates the off-diagonal entry of a Hermitian
//! 2×2 block. The eigensolver applies it two-sided (cyclic Jacobi); the SVD
//! applies it one-sided to pairs of columns (Hestenes), using the 2×2 Gram
//! block of the column pair.

use super::{complete_orthonormal, inner, vec_norm, Complex64, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues ascending, eigenvectors as the matching columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn vector(&self, i: usize) -> Vec<Complex64> {
        self.vectors.col(i)
    }

    /// `V diag(f(λ)) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

/// Thin SVD `a = U diag(s) V†` with `s` descending.
///
/// For square input `U` and `V` are full unitaries; columns of `U` paired
/// with (numerically) zero singular values are an orthonormal completion.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Rotation `G = [[g00, g01], [g10, g11]]` such that `G† M G` is diagonal for
/// the Hermitian block `M = [[a, b], [conj(b), d]]`.
#[derive(Clone, Copy)]
struct Rotation {
    g00: Complex64,
    g01: Complex64,
    g10: Complex64,
    g11: Complex64,
}

impl Rotation {
    fn annihilating(a: f64, d: f64, b: Complex64) -> Self {
        let mag = b.norm();
        let phase = b.conj() / mag; // e^{-iφ}
                                    // subnormal |b| leaves the quotient off the unit circle
        let phase = phase / phase.norm();
        let tau = (d - a) / (2.0 * mag);
        let t = if tau.abs() > 1e150 {
            -0.5 / tau
        } else {
            let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
            -sign / (tau.abs() + (1.0 + tau * tau).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = t * c;
        Rotation {
            g00: Complex64::new(c, 0.0),
            g01: Complex64::new(-s, 0.0),
            g10: phase * s,
            g11: phase * c,
        }
    }

    /// `m ← m G` on columns p, q.
    fn apply_right(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.rows() {
            let x = m[(k, p)];
            let y = m[(k, q)];
            m[(k, p)] = x * self.g00 + y * self.g10;
            m[(k, q)] = x * self.g01 + y * self.g11;
        }
    }

    /// `m ← G† m` on rows p, q.
    fn apply_left_adjoint(&self, m: &mut ComplexMatrix, p: usize, q: usize) {
        for k in 0..m.cols() {
            let x = m[(p, k)];
            let y = m[(q, k)];
            m[(p, k)] = self.g00.conj() * x + self.g10.conj() * y;
            m[(q, k)] = self.g01.conj() * x + self.g11.conj() * y;
        }
    }
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &ComplexMatrix, tol: f64) -> Result<EigDecomposition> {
    if !a.is_square() {
        return Err(Error::Size(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let norm = a.frobenius_norm();
    let residual = a.hermiticity_residual();
    if residual > tol * norm {
        return Err(Error::NotHermitian { residual });
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let mut converged = false;
    let mut off = off_diagonal_norm(&m);
    for _ in 0..MAX_SWEEPS {
        if off <= 1e-15 * norm {
            converged = true;
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let b = m[(p, q)];
                if b.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                let rot = Rotation::annihilating(m[(p, p)].re, m[(q, q)].re, b);
                rot.apply_right(&mut m, p, q);
                rot.apply_left_adjoint(&mut m, p, q);
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)].im = 0.0;
                m[(q, q)].im = 0.0;
                rot.apply_right(&mut v, p, q);
                rotated = true;
            }
        }
        off = off_diagonal_norm(&m);
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged && off > 1e-12 * norm {
        return Err(Error::Convergence {
            sweeps: MAX_SWEEPS,
            off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_col(dst, &v.col(src));
    }
    Ok(EigDecomposition { values, vectors })
}

/// One-sided Jacobi SVD of a tall-or-square matrix.
fn svd_tall(a: &ComplexMatrix) -> Result<Svd> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(cols);
    // squared column norm below which a column is treated as exactly zero
    let negligible = (a.frobenius_norm() * 1e-30).powi(2);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..rows {
                    let x = w[(k, p)];
                    let y = w[(k, q)];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if alpha <= negligible
                    || beta <= negligible
                    || gamma.norm() <= 1e-15 * (alpha * beta).sqrt()
                {
                    continue;
                }
                let rot = Rotation::annihilating(alpha, beta, gamma);
                rot.apply_right(&mut w, p, q);
                rot.apply_right(&mut v, p, q);
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            sweeps: MAX_SWEEPS,
            off: f64::NAN,
        });
    }

    let norms: Vec<f64> = (0..cols).map(|j| vec_norm(&w.col(j))).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let cutoff = smax * (rows.max(cols) as f64) * f64::EPSILON;

    // a column that mostly vanishes under projection is a noise direction;
    // leave its slot to the deterministic completion
    let mut ucols: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for &j in &order {
        if norms[j] <= cutoff || norms[j] == 0.0 {
            break;
        }
        let mut c: Vec<Complex64> = w.col(j).iter().map(|z| z / norms[j]).collect();
        for _ in 0..2 {
            for b in &ucols {
                let p = inner(b, &c);
                c.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = vec_norm(&c);
        if n < 0.5 {
            break;
        }
        c.iter_mut().for_each(|x| *x /= n);
        ucols.push(c);
    }
    let full = complete_orthonormal(ucols, rows);
    let mut u = ComplexMatrix::zeros(rows, cols);
    for (j, c) in full.iter().take(cols).enumerate() {
        u.set_col(j, c);
    }
    debug_assert_eq!(full.len(), rows);

    let mut vs = ComplexMatrix::zeros(cols, cols);
    for (dst, &src) in order.iter().enumerate() {
        vs.set_col(dst, &v.col(src));
    }
    Ok(Svd { u, s, v: vs })
}

/// Singular value decomposition, thin: `U` is `rows × k`, `V` is `cols × k`
/// with `k = min(rows, cols)`.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.adjoint())?;
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        })
    }
}

/// Eigenvalues at or below this fraction of the spectral radius are rounding
/// noise of the eigensolver and are set to zero before taking roots.
pub(crate) const SPECTRAL_NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Square root of a Hermitian PSD matrix.
pub fn psd_sqrt(a: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(a, tol)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    let radius = eig.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = SPECTRAL_NOISE_FLOOR * radius;
    let r = eig.reconstruct_with(|lam| if lam <= floor { 0.0 } else { lam.sqrt() });
    Ok(r.hermitian_part())
}

/// Sum of singular values.
pub(crate) fn singular_value_sum(a: &ComplexMatrix) -> Result<f64> {
    Ok(svd(a)?.s.iter().sum())
}

/// Checks `‖V†V − I‖` for a column set; used by tests and debug assertions.
#[allow(dead_code)]
pub(crate) fn columns_orthonormal(m: &ComplexMatrix, tol: f64) -> bool {
    for i in 0..m.cols() {
        for j in 0..m.cols() {
            let g = inner(&m.col(i), &m.col(j));
            let expected = if i == j { 1.0 } else { 0.0 };
            if (g - Complex64::new(expected, 0.0)).norm() > tol {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::super::{c64, ONE};
    use super::*;

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        // small LCG, independent of the crate's generators
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let data = (0..rows * cols).map(|_| c64(next(), next())).collect();
        ComplexMatrix::new(rows, cols, data).unwrap()
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let g = pseudo_random(n, n, seed);
        (&g + &g.adjoint()).scale_real(0.5)
    }

    #[test]
    fn diagonal_input() {
        let e = hermitian_eig(&ComplexMatrix::diag(&[2.0, 1.0]), 1e-10).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0]);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = hermitian_eig(&x, 1e-10).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // eigenvector for -1 is (1, -1)/√2 up to phase
        let v0 = e.vector(0);
        let overlap = (v0[0] * s - v0[1] * s).norm();
        assert!((overlap - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_residual() {
        for seed in 0..20 {
            let a = random_hermitian(6, seed);
            let e = hermitian_eig(&a, 1e-10).unwrap();
            let av = &a * &e.vectors;
            let vl = &e.vectors * &ComplexMatrix::diag(&e.values);
            assert!(av.distance(&vl) <= 1e-10 * a.frobenius_norm());
            assert!(e.vectors.unitarity_residual() <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            hermitian_eig(&a, 1e-10),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn svd_identity_and_rank_one() {
        let s = svd(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(s.s, vec![1.0, 1.0, 1.0]);

        let u = [c64(0.6, 0.0), c64(0.0, 0.8)];
        let v = [c64(0.0, 1.0), ZERO, ZERO];
        let r = ComplexMatrix::outer(&u, &v);
        let d = svd(&r).unwrap();
        assert!((d.s[0] - 1.0).abs() < 1e-15);
        assert!(d.s[1].abs() < 1e-15);
    }

    #[test]
    fn svd_reconstructs_tall_and_wide() {
        for (r, c) in [(4, 3), (3, 4), (5, 5), (1, 3)] {
            let a = pseudo_random(r, c, (r * 10 + c) as u64);
            let d = svd(&a).unwrap();
            let k = r.min(c);
            assert_eq!(d.s.len(), k);
            let mut sig = ComplexMatrix::zeros(k, k);
            for i in 0..k {
                sig[(i, i)] = c64(d.s[i], 0.0);
            }
            let back = &(&d.u * &sig) * &d.v.adjoint();
            assert!(back.distance(&a) < 1e-12 * a.frobenius_norm());
            assert!(columns_orthonormal(&d.u, 1e-12));
            assert!(columns_orthonormal(&d.v, 1e-12));
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_trace_norm_matches_sqrt_of_gram() {
        // oracle: Tr sqrt(a†a) via the eigensolver
        let a = pseudo_random(4, 3, 99);
        let via_svd: f64 = svd(&a).unwrap().s.iter().sum();
        let gram = &a.adjoint() * &a;
        let via_eig: f64 = hermitian_eig(&gram, 1e-10)
            .unwrap()
            .values
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .sum();
        assert!((via_svd - via_eig).abs() < 1e-10);
    }

    #[test]
    fn svd_square_rank_deficient_has_unitary_factors() {
        let u = [c64(0.6, 0.0), c64(0.0, 0.8), ZERO];
        let r = ComplexMatrix::outer(&u, &u);
        let d = svd(&r).unwrap();
        assert!(d.u.unitarity_residual() < 1e-12);
        assert!(d.v.unitarity_residual() < 1e-12);
    }

    #[test]
    fn sqrt_examples() {
        let r = psd_sqrt(&ComplexMatrix::diag(&[4.0, 9.0]), 1e-10).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::diag(&[2.0, 3.0]), 1e-14));
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        let r = psd_sqrt(&half, 1e-10).unwrap();
        assert!(r.approx_eq(&ComplexMatrix::identity(2).scale_real(0.5f64.sqrt()), 1e-14));
        assert!(matches!(
            psd_sqrt(&ComplexMatrix::diag(&[1.0, -0.1]), 1e-10),
            Err(Error::NotPsd { .. })
        ));
        // tiny negative eigenvalue is clamped
        let r = psd_sqrt(&ComplexMatrix::diag(&[1.0, -1e-12]), 1e-10).unwrap();
        assert_eq!(r[(1, 1)], ZERO);
        assert_eq!(r[(0, 0)], ONE);
    }

    #[test]
    fn sqrt_squares_back() {
        let g = pseudo_random(5, 5, 3);
        let rho = &g * &g.adjoint();
        let r = psd_sqrt(&rho, 1e-10).unwrap();
        assert!((&r * &r).distance(&rho) < 1e-10);
    }
}
