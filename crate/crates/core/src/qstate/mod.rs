//! Validated quantum states.
//!
//! A bipartite vector over `H ⊗ K` is stored with index `h * dim_k + k`,
//! which is the row-major reshaping of a `dim_h × dim_k` matrix `A`. Under
//! that reshaping `Tr_K |φ><φ| = A A†` and `(I ⊗ U)|φ>` is `A Uᵀ`.

pub mod random;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    self, c64, hermitian_eig, inner, svd, vec_norm, Complex64, ComplexMatrix, Keep, VALIDATION_TOL,
};

pub use random::{derive_seed, random_density, random_pure, random_unitary, SeededRng};

/// Hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        make_density(m, VALIDATION_TOL)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.mat
    }
}

/// Validates `mat` as a density matrix. Each violated property has its own
/// error variant.
pub fn make_density(mat: ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    if !mat.is_square() {
        return Err(Error::Size(format!(
            "density matrix must be square, got {}x{}",
            mat.rows(),
            mat.cols()
        )));
    }
    let residual = mat.hermiticity_residual();
    if residual > tol {
        return Err(Error::NotHermitian { residual });
    }
    let mat = mat.hermitian_part();
    let trace = mat.trace().re;
    if (trace - 1.0).abs() > tol {
        return Err(Error::TraceNotOne { trace });
    }
    let eig = hermitian_eig(&mat, tol.max(VALIDATION_TOL))?;
    let min = eig.values[0];
    if min < -tol {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(DensityMatrix { mat })
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix, tol: f64) -> Result<Self> {
        make_density(mat, tol)
    }

    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let n = vec_norm(v);
        if (n - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self {
            mat: ComplexMatrix::projector(v),
        })
    }

    /// Projector onto the computational basis state `|i>`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(i, i)] = matcore::ONE;
        Self { mat: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eig().values
    }

    pub fn eig(&self) -> matcore::EigDecomposition {
        hermitian_eig(&self.mat, 1e-8).expect("validated density matrix is Hermitian")
    }

    /// `U ρ U†`
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = &(u * &self.mat) * &u.adjoint();
        make_density(m, 1e-8)
    }

    /// Reduced state of a density on `H ⊗ K`.
    pub fn partial_trace(&self, dim_h: usize, dim_k: usize, keep: Keep) -> Result<Self> {
        let m = matcore::partial_trace(&self.mat, dim_h, dim_k, keep)?;
        make_density(m, 1e-8)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            mat: matcore::tensor(&self.mat, &other.mat)?,
        })
    }

    /// `<v|ρ|v>`
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        inner(v, &self.mat.mul_vec(v)).re
    }
}

/// Convex combination `Σ wᵢ ρᵢ`.
pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<DensityMatrix> {
    if weights.len() != states.len() || states.is_empty() {
        return Err(Error::InvalidDistribution(format!(
            "{} weights for {} states",
            weights.len(),
            states.len()
        )));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) || (sum - 1.0).abs() > VALIDATION_TOL {
        return Err(Error::WeightSum { sum });
    }
    let dim = states[0].dim();
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (w, s) in weights.iter().zip(states) {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: s.dim(),
            });
        }
        acc = &acc + &s.mat.scale_real(*w);
    }
    make_density(acc, 1e-8)
}

/// Unit vector over `H ⊗ K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PureStateJson", into = "PureStateJson")]
pub struct BipartitePureState {
    dim_h: usize,
    dim_k: usize,
    vec: Vec<Complex64>,
}

/// Wire format: `{"dim_h": n, "dim_k": m, "vec": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct PureStateJson {
    dim_h: usize,
    dim_k: usize,
    vec: Vec<[f64; 2]>,
}

impl TryFrom<PureStateJson> for BipartitePureState {
    type Error = Error;

    fn try_from(j: PureStateJson) -> Result<Self> {
        let v = j.vec.iter().map(|[re, im]| c64(*re, *im)).collect();
        BipartitePureState::new(j.dim_h, j.dim_k, v, VALIDATION_TOL)
    }
}

impl From<BipartitePureState> for PureStateJson {
    fn from(s: BipartitePureState) -> Self {
        PureStateJson {
            dim_h: s.dim_h,
            dim_k: s.dim_k,
            vec: s.vec.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl BipartitePureState {
    pub fn new(dim_h: usize, dim_k: usize, vec: Vec<Complex64>, tol: f64) -> Result<Self> {
        if dim_h == 0 || dim_k == 0 || vec.len() != dim_h * dim_k {
            return Err(Error::DimensionMismatch {
                expected: dim_h * dim_k,
                actual: vec.len(),
            });
        }
        if vec.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = vec_norm(&vec);
        if (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { dim_h, dim_k, vec })
    }

    /// State whose reshaping is `a` (`dim_h × dim_k`).
    pub fn from_matrix(a: &ComplexMatrix, tol: f64) -> Result<Self> {
        Self::new(a.rows(), a.cols(), a.data().to_vec(), tol)
    }

    pub fn product(h: &[Complex64], k: &[Complex64]) -> Result<Self> {
        Self::new(h.len(), k.len(), matcore::tensor_vec(h, k), VALIDATION_TOL)
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn vec(&self) -> &[Complex64] {
        &self.vec
    }

    /// Row-major `dim_h × dim_k` reshaping.
    pub fn as_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::new(self.dim_h, self.dim_k, self.vec.clone())
            .expect("state dimensions are within the matrix cap")
    }

    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.vec)
    }

    /// Reduced state on `H` (`keep = H`) or `K`.
    pub fn reduced(&self, keep: Keep) -> DensityMatrix {
        let a = self.as_matrix();
        let m = match keep {
            Keep::H => &a * &a.adjoint(),
            Keep::K => (&a.adjoint() * &a).transpose(),
        };
        DensityMatrix {
            mat: m.hermitian_part(),
        }
    }

    /// `(I ⊗ U)|φ>`
    pub fn apply_k(&self, u: &ComplexMatrix) -> Self {
        assert_eq!(u.rows(), self.dim_k, "K-side operator dimension mismatch");
        let a = &self.as_matrix() * &u.transpose();
        Self {
            dim_h: self.dim_h,
            dim_k: self.dim_k,
            vec: a.into_data(),
        }
    }

    /// `(U ⊗ I)|φ>`
    pub fn apply_h(&self, u: &ComplexMatrix) -> Self {
        assert_eq!(u.rows(), self.dim_h, "H-side operator dimension mismatch");
        let a = u * &self.as_matrix();
        Self {
            dim_h: self.dim_h,
            dim_k: self.dim_k,
            vec: a.into_data(),
        }
    }

    pub fn overlap(&self, other: &Self) -> Complex64 {
        inner(&self.vec, &other.vec)
    }
}

/// `min_θ ‖a − e^{iθ} b‖₂`
pub fn phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ov = inner(a, b);
    let phase = if ov.norm() > 0.0 {
        ov.conj() / ov.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Schmidt coefficients (descending) with the matching orthonormal columns
/// on each side: `|φ> = Σᵢ cᵢ |leftᵢ> ⊗ |rightᵢ>`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coeffs: Vec<f64>,
    pub left_basis: ComplexMatrix,
    pub right_basis: ComplexMatrix,
}

impl SchmidtDecomposition {
    pub fn reassemble(&self) -> Vec<Complex64> {
        let dh = self.left_basis.rows();
        let dk = self.right_basis.rows();
        let mut v = vec![matcore::ZERO; dh * dk];
        for (i, c) in self.coeffs.iter().enumerate() {
            for h in 0..dh {
                let l = self.left_basis[(h, i)] * *c;
                for k in 0..dk {
                    v[h * dk + k] += l * self.right_basis[(k, i)];
                }
            }
        }
        v
    }
}

pub fn schmidt(psi: &BipartitePureState) -> Result<SchmidtDecomposition> {
    let d = svd(&psi.as_matrix())?;
    Ok(SchmidtDecomposition {
        coeffs: d.s,
        left_basis: d.u,
        right_basis: d.v.conj(),
    })
}

/// `Σᵢ √λᵢ |eᵢ> ⊗ |i>` over the eigenpairs of `rho`, eigenvalues descending,
/// with `|i>` the computational basis of `K`.
pub fn canonical_purification(
    rho: &DensityMatrix,
    dim_k: usize,
    tol: f64,
) -> Result<BipartitePureState> {
    let eig = rho.eig();
    let n = rho.dim();
    let rank = eig.values.iter().filter(|&&l| l > tol).count();
    if rank > dim_k {
        return Err(Error::RankTooLarge { rank, dim_k });
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|i| (eig.values[i], phase_normalized(eig.vector(i))))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    // within a run of (numerically) equal eigenvalues, order by the leading
    // component so the result does not depend on rounding in the solver
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && (pairs[end - 1].0 - pairs[end].0).abs() <= tol {
            end += 1;
        }
        pairs[start..end].sort_by(|a, b| leading_key(&b.1).total_cmp(&leading_key(&a.1)));
        start = end;
    }

    let radius = pairs.first().map_or(0.0, |p| p.0.abs());
    let floor = matcore::SPECTRAL_NOISE_FLOOR * radius;
    let mut v = vec![matcore::ZERO; n * dim_k];
    for (i, (lam, e)) in pairs.iter().enumerate().take(dim_k) {
        if *lam <= floor {
            continue;
        }
        let w = lam.sqrt();
        for h in 0..n {
            v[h * dim_k + i] = e[h] * w;
        }
    }
    let norm = vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= norm);
    BipartitePureState::new(n, dim_k, v, 1e-8)
}

fn first_significant(v: &[Complex64]) -> Option<usize> {
    v.iter().position(|z| z.norm() > 1e-12)
}

/// Rotates the global phase so the first significant component is real
/// and positive.
fn phase_normalized(mut v: Vec<Complex64>) -> Vec<Complex64> {
    if let Some(i) = first_significant(&v) {
        let ph = v[i].conj() / v[i].norm();
        v.iter_mut().for_each(|z| *z *= ph);
    }
    v
}

fn leading_key(v: &[Complex64]) -> f64 {
    match first_significant(v) {
        Some(i) => v[i].re - i as f64,
        None => f64::NEG_INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{partial_trace, ONE, ZERO};

    fn ket(bits: &[f64]) -> Vec<Complex64> {
        bits.iter().map(|&x| c64(x, 0.0)).collect()
    }

    #[test]
    fn make_density_examples() {
        assert!(make_density(ComplexMatrix::identity(2).scale_real(0.5), 1e-10).is_ok());
        let plus = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        assert!(make_density(plus, 1e-10).is_ok());
        let bad = ComplexMatrix::from_real_rows(&[&[1.1, 0.0], &[0.0, -0.1]]).unwrap();
        assert!(matches!(
            make_density(bad, 1e-10),
            Err(Error::NotPsd { .. })
        ));
        let non_h = ComplexMatrix::from_real_rows(&[&[0.5, 0.3], &[0.0, 0.5]]).unwrap();
        assert!(matches!(
            make_density(non_h, 1e-10),
            Err(Error::NotHermitian { .. })
        ));
        let tr = ComplexMatrix::diag(&[0.5, 0.4]);
        assert!(matches!(
            make_density(tr, 1e-10),
            Err(Error::TraceNotOne { .. })
        ));
    }

    #[test]
    fn mixture_examples() {
        let rho = random_density(3, 2, 5).unwrap();
        let m = mixture(&[1.0], std::slice::from_ref(&rho)).unwrap();
        assert!(m.matrix().approx_eq(rho.matrix(), 1e-15));

        let m = mixture(
            &[0.5, 0.5],
            &[DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)],
        )
        .unwrap();
        assert!(m
            .matrix()
            .approx_eq(DensityMatrix::maximally_mixed(2).matrix(), 1e-15));

        assert!(matches!(
            mixture(
                &[0.5, 0.6],
                &[DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)]
            ),
            Err(Error::WeightSum { .. })
        ));
        assert!(mixture(
            &[0.5, 0.5],
            &[DensityMatrix::basis(2, 0), DensityMatrix::basis(3, 1)]
        )
        .is_err());
    }

    #[test]
    fn mixture_of_random_pure_qubits_is_valid() {
        let states: Vec<DensityMatrix> = (0..4)
            .map(|s| random_pure(2, 1, s).unwrap())
            .map(|p| DensityMatrix::pure(p.vec()).unwrap())
            .collect();
        let m = mixture(&[0.25; 4], &states).unwrap();
        assert!((m.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(m.eigenvalues()[0] > -1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let prod = BipartitePureState::product(&ket(&[1.0, 0.0]), &ket(&[0.0, 1.0])).unwrap();
        let s = schmidt(&prod).unwrap();
        assert!((s.coeffs[0] - 1.0).abs() < 1e-15 && s.coeffs[1].abs() < 1e-15);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = BipartitePureState::new(2, 2, ket(&[r, 0.0, 0.0, r]), 1e-12).unwrap();
        let s = schmidt(&bell).unwrap();
        assert!(s.coeffs.iter().all(|c| (c - r).abs() < 1e-15));
    }

    #[test]
    fn schmidt_reassembles_random_state() {
        let psi = random_pure(3, 4, 17).unwrap();
        let s = schmidt(&psi).unwrap();
        assert_eq!(s.coeffs.len(), 3);
        assert!((s.coeffs.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(phase_distance(&s.reassemble(), psi.vec()) <= 1e-9);
    }

    #[test]
    fn purification_examples() {
        let p = canonical_purification(&DensityMatrix::basis(2, 0), 1, 1e-10).unwrap();
        assert_eq!(p.vec(), &[ONE, ZERO]);

        let p = canonical_purification(&DensityMatrix::maximally_mixed(2), 2, 1e-10).unwrap();
        let r = p.reduced(Keep::H);
        assert!(r
            .matrix()
            .approx_eq(DensityMatrix::maximally_mixed(2).matrix(), 1e-14));
        // K-support is the computational basis: Tr_H is diagonal
        let rk = p.reduced(Keep::K);
        assert!(rk.matrix()[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn purification_of_random_rank_three() {
        let rho = random_density(4, 3, 23).unwrap();
        let p = canonical_purification(&rho, 4, 1e-10).unwrap();
        let back = partial_trace(&p.density(), 4, 4, Keep::H).unwrap();
        assert!(back.distance(rho.matrix()) <= 1e-10);
        // K-side weights descend
        let rk = p.reduced(Keep::K);
        let diag: Vec<f64> = (0..4).map(|i| rk.matrix()[(i, i)].re).collect();
        assert!(diag.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        assert!(diag[3] < 1e-10);
    }

    #[test]
    fn purification_rank_error() {
        let rho = random_density(4, 3, 2).unwrap();
        assert!(matches!(
            canonical_purification(&rho, 2, 1e-10),
            Err(Error::RankTooLarge { rank: 3, dim_k: 2 })
        ));
    }

    #[test]
    fn apply_k_matches_kronecker() {
        let psi = random_pure(2, 3, 4).unwrap();
        let u = random_unitary(3, 8);
        let full = crate::matcore::tensor(&ComplexMatrix::identity(2), &u).unwrap();
        let expected = full.mul_vec(psi.vec());
        let got = psi.apply_k(&u);
        let diff: f64 = expected
            .iter()
            .zip(got.vec())
            .map(|(a, b)| (a - b).norm())
            .sum();
        assert!(diff < 1e-13);
    }

    #[test]
    fn reduced_matches_partial_trace() {
        let psi = random_pure(3, 2, 6).unwrap();
        for keep in [Keep::H, Keep::K] {
            let direct = psi.reduced(keep);
            let via = partial_trace(&psi.density(), 3, 2, keep).unwrap();
            assert!(direct.matrix().distance(&via) < 1e-14);
        }
    }

    #[test]
    fn state_json() {
        let s = r#"{"dim_h":1,"dim_k":2,"vec":[[0.6,0.0],[0.0,0.8]]}"#;
        let p: BipartitePureState = serde_json::from_str(s).unwrap();
        assert_eq!(p.dim_k(), 2);
        assert_eq!(serde_json::to_string(&p).unwrap(), s);
        assert!(serde_json::from_str::<BipartitePureState>(
            r#"{"dim_h":1,"dim_k":2,"vec":[[1,0],[1,0]]}"#
        )
        .is_err());
    }
}
