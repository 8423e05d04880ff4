//! Entropies and mutual information, in bits.

use crate::error::{Error, Result};
use crate::matcore::{hermitian_eig, ComplexMatrix, Keep};
use crate::metrics::{trace_product, TwoOutcomeMeasurement};
use crate::qstate::{mixture, DensityMatrix};

/// Eigenvalues (or probabilities) at or below this contribute nothing to an
/// entropy sum.
pub const ENTROPY_CUTOFF: f64 = 1e-12;

/// Allowed deviation of a probability vector's sum from 1.
pub const DISTRIBUTION_TOL: f64 = 1e-9;

fn h_term(p: f64) -> f64 {
    if p <= ENTROPY_CUTOFF {
        0.0
    } else {
        -p * p.log2()
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < -DISTRIBUTION_TOL) {
        return Err(Error::InvalidDistribution(format!("entry {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidDistribution(format!("sums to {sum}")));
    }
    Ok(())
}

pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    check_distribution(p)?;
    Ok(p.iter().map(|&x| h_term(x)).sum())
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range {
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(h_term(p) + h_term(1.0 - p))
}

/// `1 − H(1/2 + δ)`, which is at least `δ²`.
pub fn binary_entropy_gap(delta: f64) -> Result<f64> {
    if !(-0.5..=0.5).contains(&delta) {
        return Err(Error::Range {
            value: delta,
            lo: -0.5,
            hi: 0.5,
        });
    }
    Ok(1.0 - binary_entropy(0.5 + delta)?)
}

/// `1 − H(1/2 + δ)`: the least information a uniform bit shares with a
/// guess that agrees with it with probability `1/2 + δ`.
pub fn fano_bound(delta: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&delta) {
        return Err(Error::Range {
            value: delta,
            lo: 0.0,
            hi: 0.5,
        });
    }
    Ok(1.0 - binary_entropy(0.5 + delta)?)
}

/// Entropy of the spectrum of a Hermitian PSD matrix (trace need not be 1).
pub fn matrix_entropy(m: &ComplexMatrix) -> f64 {
    let eig = hermitian_eig(m, 1e-8).expect("entropy of a Hermitian matrix");
    eig.values.iter().map(|&l| h_term(l.clamp(0.0, 1.0))).sum()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    matrix_entropy(rho.matrix())
}

/// `I(X:Y)` of a joint distribution given as `joint[x][y]`.
pub fn classical_mutual_info(joint: &[Vec<f64>]) -> Result<f64> {
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    check_distribution(&flat)?;
    let cols = joint.first().map_or(0, Vec::len);
    if joint.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidDistribution("ragged joint table".into()));
    }
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..cols)
        .map(|y| joint.iter().map(|r| r[y]).sum())
        .collect();
    let hxy: f64 = flat.iter().map(|&p| h_term(p)).sum();
    let hx: f64 = px.iter().map(|&p| h_term(p)).sum();
    let hy: f64 = py.iter().map(|&p| h_term(p)).sum();
    Ok(hx + hy - hxy)
}

/// `Σᵢ pᵢ |i><i| ⊗ σᵢ`
pub fn block_state(p: &[f64], states: &[DensityMatrix]) -> Result<DensityMatrix> {
    check_distribution(p)?;
    if p.len() != states.len() {
        return Err(Error::InvalidEnsemble(format!(
            "{} weights for {} states",
            p.len(),
            states.len()
        )));
    }
    let lifted: Vec<DensityMatrix> = states
        .iter()
        .enumerate()
        .map(|(i, s)| DensityMatrix::basis(p.len(), i).tensor(s))
        .collect::<Result<_>>()?;
    mixture(p, &lifted)
}

/// A prior over labels with one encoding state per label.
#[derive(Debug, Clone)]
pub struct CQEnsemble {
    labels: Vec<String>,
    priors: Vec<f64>,
    states: Vec<DensityMatrix>,
}

/// `index` as an MSB-first bit string of the given width.
pub fn bit_label(index: usize, width: usize) -> String {
    (0..width)
        .map(|b| {
            if (index >> (width - 1 - b)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

impl CQEnsemble {
    pub fn new(labels: Vec<String>, priors: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if labels.len() != priors.len() || labels.len() != states.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} labels, {} priors, {} states",
                labels.len(),
                priors.len(),
                states.len()
            )));
        }
        check_distribution(&priors)?;
        let mut seen = labels.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != labels.len() {
            return Err(Error::InvalidEnsemble("duplicate labels".into()));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: s.dim(),
            });
        }
        Ok(Self {
            labels,
            priors,
            states,
        })
    }

    /// Uniform prior; label `i` is the bit string of `i` padded to
    /// `⌈log₂ len⌉` bits.
    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidEnsemble("no states".into()));
        }
        let width = ceil_log2(n);
        let labels = (0..n).map(|i| bit_label(i, width)).collect();
        Self::new(labels, vec![1.0 / n as f64; n], states)
    }

    pub fn with_priors(priors: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        let width = ceil_log2(states.len());
        let labels = (0..states.len()).map(|i| bit_label(i, width)).collect();
        Self::new(labels, priors, states)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// `σ̄ = Σ p_x σ_x`
    pub fn average_state(&self) -> DensityMatrix {
        mixture(&self.priors, &self.states).expect("validated ensemble")
    }

    /// `Σ p_x S(σ_x)`
    pub fn conditional_entropy(&self) -> f64 {
        self.priors
            .iter()
            .zip(&self.states)
            .map(|(p, s)| p * von_neumann_entropy(s))
            .sum()
    }

    /// `χ = S(σ̄) − Σ p_x S(σ_x)`
    pub fn holevo_information(&self) -> f64 {
        von_neumann_entropy(&self.average_state()) - self.conditional_entropy()
    }

    /// Same labels and priors, each state reduced to one tensor factor.
    pub fn reduce(&self, dim_h: usize, dim_k: usize, keep: Keep) -> Result<Self> {
        let states = self
            .states
            .iter()
            .map(|s| s.partial_trace(dim_h, dim_k, keep))
            .collect::<Result<_>>()?;
        Ok(Self {
            labels: self.labels.clone(),
            priors: self.priors.clone(),
            states,
        })
    }
}

pub fn holevo_information(e: &CQEnsemble) -> f64 {
    e.holevo_information()
}

pub(crate) fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Complete family of orthogonal projectors.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    projectors: Vec<ComplexMatrix>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let d = projectors
            .first()
            .map(ComplexMatrix::rows)
            .ok_or_else(|| Error::Precondition("measurement needs at least one outcome".into()))?;
        let mut sum = ComplexMatrix::zeros(d, d);
        for p in &projectors {
            if p.rows() != d || !p.is_square() {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: p.rows(),
                });
            }
            let residual = p.hermiticity_residual();
            if residual > tol {
                return Err(Error::NotHermitian { residual });
            }
            let idem = (&(p * p) - p).frobenius_norm();
            if idem > tol {
                return Err(Error::Precondition(format!(
                    "projector not idempotent ({idem:.3e})"
                )));
            }
            sum = &sum + p;
        }
        let completeness = (&sum - &ComplexMatrix::identity(d)).frobenius_norm();
        if completeness > tol {
            return Err(Error::Precondition(format!(
                "projectors do not sum to identity ({completeness:.3e})"
            )));
        }
        Ok(Self { projectors })
    }

    /// One outcome per column group of the unitary `basis`; `groups` lists
    /// the number of columns in each outcome.
    pub fn from_basis(basis: &ComplexMatrix, groups: &[usize]) -> Result<Self> {
        let d = basis.rows();
        if groups.iter().sum::<usize>() != d || groups.contains(&0) {
            return Err(Error::Precondition(format!(
                "groups {groups:?} do not partition {d}"
            )));
        }
        let mut col = 0;
        let mut projectors = Vec::with_capacity(groups.len());
        for &g in groups {
            let mut p = ComplexMatrix::zeros(d, d);
            for c in col..col + g {
                p = &p + &ComplexMatrix::projector(&basis.col(c));
            }
            projectors.push(p);
            col += g;
        }
        Self::new(projectors, 1e-8)
    }

    pub fn computational(dim: usize) -> Self {
        Self::from_basis(&ComplexMatrix::identity(dim), &vec![1; dim]).expect("identity basis")
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            projectors: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }

    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.projectors
            .iter()
            .map(|p| trace_product(p, rho.matrix()).max(0.0))
            .collect()
    }
}

impl From<TwoOutcomeMeasurement> for ProjectiveMeasurement {
    fn from(m: TwoOutcomeMeasurement) -> Self {
        Self {
            projectors: vec![m.projector_pos, m.projector_neg],
        }
    }
}

/// Classical `I(X:Y)` between the label and the outcome of `meas`.
pub fn measured_mutual_info(e: &CQEnsemble, meas: &ProjectiveMeasurement) -> Result<f64> {
    if meas.dim() != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            actual: meas.dim(),
        });
    }
    let mut joint: Vec<Vec<f64>> = e
        .priors()
        .iter()
        .zip(e.states())
        .map(|(p, s)| meas.probabilities(s).into_iter().map(|q| p * q).collect())
        .collect();
    // rounding can leave the table a few ulps off a distribution
    let total: f64 = joint.iter().flatten().sum();
    joint.iter_mut().flatten().for_each(|x| *x /= total);
    classical_mutual_info(&joint)
}

/// `S(A) + S(B) − S(AB)`
pub fn bipartite_mutual_info(rho_ab: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<f64> {
    if dim_a * dim_b != rho_ab.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_ab.dim(),
            actual: dim_a * dim_b,
        });
    }
    let a = rho_ab.partial_trace(dim_a, dim_b, Keep::H)?;
    let b = rho_ab.partial_trace(dim_a, dim_b, Keep::K)?;
    Ok(von_neumann_entropy(&a) + von_neumann_entropy(&b) - von_neumann_entropy(rho_ab))
}

/// Joint distribution of three classical variables, `p[(x*dy + y)*dz + z]`.
#[derive(Debug, Clone)]
pub struct Tripartite {
    pub dims: [usize; 3],
    pub p: Vec<f64>,
}

impl Tripartite {
    pub fn new(dims: [usize; 3], p: Vec<f64>) -> Result<Self> {
        if p.len() != dims.iter().product::<usize>() {
            return Err(Error::DimensionMismatch {
                expected: dims.iter().product(),
                actual: p.len(),
            });
        }
        check_distribution(&p)?;
        Ok(Self { dims, p })
    }

    /// Entropy of the marginal on the variables flagged in `keep`.
    pub fn entropy(&self, keep: [bool; 3]) -> f64 {
        let [dx, dy, dz] = self.dims;
        let size = |i: usize, d: usize| if keep[i] { d } else { 1 };
        let (mx, my, mz) = (size(0, dx), size(1, dy), size(2, dz));
        let mut marg = vec![0.0; mx * my * mz];
        for x in 0..dx {
            for y in 0..dy {
                for z in 0..dz {
                    let (a, b, c) = (
                        if keep[0] { x } else { 0 },
                        if keep[1] { y } else { 0 },
                        if keep[2] { z } else { 0 },
                    );
                    marg[(a * my + b) * mz + c] += self.p[(x * dy + y) * dz + z];
                }
            }
        }
        marg.iter().map(|&q| h_term(q)).sum()
    }

    /// `I(A:B)` for disjoint variable sets `a` and `b`.
    pub fn mutual_info(&self, a: [bool; 3], b: [bool; 3]) -> f64 {
        let ab = [a[0] || b[0], a[1] || b[1], a[2] || b[2]];
        self.entropy(a) + self.entropy(b) - self.entropy(ab)
    }

    /// Both sides of `I(X:YZ) = I(X:Y) + I(XY:Z) − I(Y:Z)`.
    pub fn chain_identity(&self) -> (f64, f64) {
        const X: [bool; 3] = [true, false, false];
        const Y: [bool; 3] = [false, true, false];
        const Z: [bool; 3] = [false, false, true];
        const YZ: [bool; 3] = [false, true, true];
        const XY: [bool; 3] = [true, true, false];
        let lhs = self.mutual_info(X, YZ);
        let rhs = self.mutual_info(X, Y) + self.mutual_info(XY, Z) - self.mutual_info(Y, Z);
        (lhs, rhs)
    }
}

/// `(I(X:YZ), I(X:Y))` for a classical label `X` encoded into states on
/// `Y ⊗ Z`.
pub fn cq_monotonicity(e: &CQEnsemble, dim_y: usize, dim_z: usize) -> Result<(f64, f64)> {
    let full = e.holevo_information();
    let partial = e.reduce(dim_y, dim_z, Keep::H)?.holevo_information();
    Ok((full, partial))
}
