use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{vec_norm, ComplexMatrix, VALIDATION_TOL, ZERO};
use crate::qstate::{BipartitePureState, DensityMatrix};

use super::MAX_QUANTUM_QUBITS;

/// Pure state over labelled qubits; the first label is the most significant
/// index bit.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    labels: Vec<String>,
    amps: Vec<Complex64>,
}

impl QState {
    pub fn new(labels: Vec<String>, amps: Vec<Complex64>) -> Result<Self> {
        if labels.len() > MAX_QUANTUM_QUBITS {
            return Err(Error::Size(format!(
                "{} qubits in superposition, at most {MAX_QUANTUM_QUBITS}",
                labels.len()
            )));
        }
        if amps.len() != 1usize << labels.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << labels.len(),
                actual: amps.len(),
            });
        }
        let norm = vec_norm(&amps);
        if (norm - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { labels, amps })
    }

    /// Product state with one single-qubit vector per label.
    pub fn product(labels: Vec<String>, qubits: &[[Complex64; 2]]) -> Result<Self> {
        if labels.len() != qubits.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: qubits.len(),
            });
        }
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for q in qubits {
            amps = amps.iter().flat_map(|a| [a * q[0], a * q[1]]).collect();
        }
        Self::new(labels, amps)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn positions(&self, labels: &[String]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.position(l)
                    .ok_or_else(|| Error::Protocol(format!("qubit {l:?} is not in the state")))
            })
            .collect()
    }

    fn bit_mask(&self, pos: usize) -> usize {
        1 << (self.labels.len() - 1 - pos)
    }

    /// Applies `u` to the named qubits, first name most significant.
    pub fn apply(&mut self, u: &ComplexMatrix, targets: &[String]) -> Result<()> {
        let pos = self.positions(targets)?;
        let k = pos.len();
        let dim = 1usize << k;
        if u.rows() != dim || u.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: u.rows(),
            });
        }
        if k == 0 {
            let phase = u[(0, 0)];
            self.amps.iter_mut().for_each(|a| *a *= phase);
            return Ok(());
        }
        let masks: Vec<usize> = pos.iter().map(|&p| self.bit_mask(p)).collect();
        let all: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..dim)
            .map(|l| {
                (0..k)
                    .filter(|&b| l & (1 << (k - 1 - b)) != 0)
                    .map(|b| masks[b])
                    .sum()
            })
            .collect();
        let mut local = vec![ZERO; dim];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (l, slot) in local.iter_mut().enumerate() {
                *slot = self.amps[base | offsets[l]];
            }
            for (r, &off) in offsets.iter().enumerate() {
                self.amps[base | off] = (0..dim).map(|c| u[(r, c)] * local[c]).sum();
            }
        }
        Ok(())
    }

    /// Joint distribution of the named qubits' computational-basis values.
    pub fn probabilities(&self, labels: &[String]) -> Result<Vec<f64>> {
        let pos = self.positions(labels)?;
        let k = pos.len();
        let mut p = vec![0.0; 1 << k];
        for (idx, a) in self.amps.iter().enumerate() {
            let v = pos.iter().fold(0usize, |acc, &q| {
                (acc << 1) | usize::from(idx & self.bit_mask(q) != 0)
            });
            p[v] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Bipartite view with `h` as the first factor and all other qubits, in
    /// state order, as the second.
    pub fn split(&self, h: &[String]) -> Result<(BipartitePureState, Vec<String>)> {
        let hp = self.positions(h)?;
        let rest: Vec<usize> = (0..self.labels.len()).filter(|p| !hp.contains(p)).collect();
        let dk = 1usize << rest.len();
        let mut v = vec![ZERO; self.amps.len()];
        for (idx, a) in self.amps.iter().enumerate() {
            let hi = hp.iter().fold(0usize, |acc, &q| {
                (acc << 1) | usize::from(idx & self.bit_mask(q) != 0)
            });
            let ki = rest.iter().fold(0usize, |acc, &q| {
                (acc << 1) | usize::from(idx & self.bit_mask(q) != 0)
            });
            v[hi * dk + ki] = *a;
        }
        let names = rest.iter().map(|&p| self.labels[p].clone()).collect();
        Ok((BipartitePureState::new(1 << hp.len(), dk, v, 1e-9)?, names))
    }

    /// Reduced density matrix of the named qubits, in the given order.
    pub fn reduced(&self, keep: &[String]) -> Result<DensityMatrix> {
        let (psi, _) = self.split(keep)?;
        Ok(psi.reduced(crate::matcore::Keep::H))
    }
}
