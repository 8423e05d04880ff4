//! Average distinguishability of encodings `x ↦ σ_x` of `m`-bit strings
//! under a uniform prior, and its relation to the information they carry.
//!
//! With `Δ = 4^{-m} Σ_{x₁,x₂} ‖σ_{x₁} − σ_{x₂}‖_t` and
//! `Δ′ = 2^{-m} Σ_x ‖σ_x − σ̄‖_t`, the chain `Δ′ ≤ Δ ≤ 2√I(X:Q)` holds, and
//! for `m = 1` also `I(X:Q) ≥ 1 − H((1+Δ)/2)`. For `m ≥ 2` only the weaker
//! `I(X:Q) ≥ 1 − H((2+Δ)/4)` is guaranteed; see [`EncodingStats`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::trace_distance;
use crate::qinfo::{binary_entropy, bit_label, CQEnsemble};
use crate::qstate::{mixture, random_density, DensityMatrix, SeededRng};

/// Largest supported number of encoded bits.
pub const MAX_BITS: usize = 6;

/// Slack allowed when a pairing is compared against `Δ`.
pub const PAIRING_TOL: f64 = 1e-10;

/// Random pairings tried by [`encoding_stats`].
pub const DEFAULT_PAIRING_TRIES: usize = 1000;

/// States of a uniform ensemble over `{0,1}^m`, indexed by the integer value
/// of the label (first bit most significant).
#[derive(Debug, Clone)]
pub struct CubeEncoding {
    m: usize,
    states: Vec<DensityMatrix>,
}

impl CubeEncoding {
    pub fn new(states: Vec<DensityMatrix>) -> Result<Self> {
        let n = states.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidEnsemble(format!(
                "{n} states is not 2^m with m ≥ 1"
            )));
        }
        let m = n.trailing_zeros() as usize;
        if m > MAX_BITS {
            return Err(Error::Range {
                value: m as f64,
                lo: 1.0,
                hi: MAX_BITS as f64,
            });
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: s.dim(),
            });
        }
        Ok(Self { m, states })
    }

    /// Checks that `e` has a uniform prior over exactly `{0,1}^m`.
    pub fn from_ensemble(e: &CQEnsemble) -> Result<Self> {
        let n = e.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidEnsemble(format!(
                "{n} labels is not 2^m with m ≥ 1"
            )));
        }
        let m = n.trailing_zeros() as usize;
        let uniform = 1.0 / n as f64;
        if e.priors().iter().any(|p| (p - uniform).abs() > 1e-12) {
            return Err(Error::InvalidEnsemble("prior is not uniform".into()));
        }
        let mut slots: Vec<Option<DensityMatrix>> = vec![None; n];
        for (label, state) in e.labels().iter().zip(e.states()) {
            let x = (label.len() == m)
                .then(|| usize::from_str_radix(label, 2).ok())
                .flatten()
                .ok_or_else(|| {
                    Error::InvalidEnsemble(format!("label {label:?} is not an {m}-bit string"))
                })?;
            slots[x] = Some(state.clone());
        }
        // labels are distinct, so every slot is filled
        Self::new(
            slots
                .into_iter()
                .map(|s| s.expect("distinct labels"))
                .collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn to_ensemble(&self) -> CQEnsemble {
        CQEnsemble::uniform(self.states.clone()).expect("cube encoding is a valid ensemble")
    }

    pub fn mean(&self) -> DensityMatrix {
        let w = vec![1.0 / self.states.len() as f64; self.states.len()];
        mixture(&w, &self.states).expect("equal dimensions")
    }

    /// `‖σ_a − σ_b‖_t` for all label pairs.
    pub fn distance_table(&self) -> Vec<Vec<f64>> {
        let n = self.states.len();
        let mut d = vec![vec![0.0; n]; n];
        for (a, sa) in self.states.iter().enumerate() {
            for (b, sb) in self.states.iter().enumerate().skip(a + 1) {
                let t = trace_distance(sa, sb).expect("equal dimensions");
                d[a][b] = t;
                d[b][a] = t;
            }
        }
        d
    }

    /// `σ_y`: the uniform mixture of `σ_{yz}` over suffixes `z`.
    pub fn prefix_state(&self, prefix: &str) -> Result<DensityMatrix> {
        let i = prefix.len();
        if i > self.m || prefix.chars().any(|c| c != '0' && c != '1') {
            return Err(Error::InvalidEnsemble(format!(
                "prefix {prefix:?} is not a bit string of length ≤ {}",
                self.m
            )));
        }
        let y = if i == 0 {
            0
        } else {
            usize::from_str_radix(prefix, 2).expect("bit string")
        };
        let span = 1usize << (self.m - i);
        let block = &self.states[y * span..(y + 1) * span];
        mixture(&vec![1.0 / span as f64; span], block)
    }
}

/// `f(δ) = 1 − H((1+δ)/2)`, defined for `δ ∈ [0, 1]`.
pub fn avgdist_bound(delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Range {
            value: delta,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(1.0 - binary_entropy((1.0 + delta) / 2.0)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodingStats {
    pub delta_pairwise: f64,
    pub delta_to_mean: f64,
    pub info: f64,
    pub pairing: Vec<(usize, usize)>,
    /// Average distance `(2/2^m) Σᵢ ‖σ_{aᵢ} − σ_{bᵢ}‖_t` over `pairing`.
    pub pairing_average: f64,
}

impl EncodingStats {
    /// `Δ − Δ′`
    pub fn mean_slack(&self) -> f64 {
        self.delta_pairwise - self.delta_to_mean
    }

    /// `2√I − Δ`
    pub fn average_encoding_slack(&self) -> f64 {
        2.0 * self.info.max(0.0).sqrt() - self.delta_pairwise
    }

    /// `I − f(Δ)`, or `None` when `Δ > 1` and the bound does not apply.
    pub fn avgdist_slack(&self) -> Option<f64> {
        (self.delta_pairwise <= 1.0)
            .then(|| self.info - avgdist_bound(self.delta_pairwise.max(0.0)).expect("Δ in range"))
    }

    /// `I − f(Δ/2)`. The pair base case yields `f(‖σ₀−σ₁‖_t / 2)`, so this
    /// form holds for every `m` while [`Self::avgdist_slack`] can fail for
    /// `m ≥ 2`.
    pub fn halved_avgdist_slack(&self) -> f64 {
        let half = (self.delta_pairwise / 2.0).clamp(0.0, 1.0);
        self.info - avgdist_bound(half).expect("Δ/2 in range")
    }

    /// Pairing average minus `Δ`.
    pub fn pairing_slack(&self) -> f64 {
        self.pairing_average - self.delta_pairwise
    }
}

fn mean_of_table(d: &[Vec<f64>]) -> f64 {
    let n = d.len() as f64;
    d.iter().flatten().sum::<f64>() / (n * n)
}

pub fn encoding_stats(e: &CQEnsemble) -> Result<EncodingStats> {
    cube_stats(&CubeEncoding::from_ensemble(e)?, 0)
}

/// Statistics of a cube encoding; `seed` drives the pairing search.
pub fn cube_stats(c: &CubeEncoding, seed: u64) -> Result<EncodingStats> {
    let table = c.distance_table();
    let delta = mean_of_table(&table);
    let mean = c.mean();
    let delta_to_mean = c
        .states
        .iter()
        .map(|s| trace_distance(s, &mean))
        .sum::<Result<f64>>()?
        / c.states.len() as f64;
    let info = c.to_ensemble().holevo_information();
    let pairing = match search_pairing(&table, seed, DEFAULT_PAIRING_TRIES) {
        Ok(p) => p,
        Err(Error::PairingSearch { pairing, .. }) => pairing,
        Err(e) => return Err(e),
    };
    Ok(EncodingStats {
        delta_pairwise: delta,
        delta_to_mean,
        info,
        pairing_average: pairing_value(&table, &pairing),
        pairing,
    })
}

/// `(2/N) Σ d[a][b]` over the pairs.
pub fn pairing_value(table: &[Vec<f64>], pairing: &[(usize, usize)]) -> f64 {
    2.0 / table.len() as f64 * pairing.iter().map(|&(a, b)| table[a][b]).sum::<f64>()
}

/// Random perfect pairing of the labels whose average pair distance is at
/// least `Δ`; keeps the best of up to `max_tries` samples.
pub fn find_pairing(e: &CQEnsemble, seed: u64, max_tries: usize) -> Result<Vec<(usize, usize)>> {
    let c = CubeEncoding::from_ensemble(e)?;
    search_pairing(&c.distance_table(), seed, max_tries)
}

/// Pairing search on a precomputed distance table.
pub fn search_pairing(
    table: &[Vec<f64>],
    seed: u64,
    max_tries: usize,
) -> Result<Vec<(usize, usize)>> {
    let n = table.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::InvalidEnsemble(format!("cannot pair {n} labels")));
    }
    let target = mean_of_table(table);
    let mut rng = SeededRng::new(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    for _ in 0..max_tries.max(1) {
        rng.shuffle(&mut perm);
        let mut pairing: Vec<(usize, usize)> = perm
            .chunks(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        pairing.sort_unstable();
        let v = pairing_value(table, &pairing);
        if v >= target - PAIRING_TOL {
            return Ok(pairing);
        }
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, pairing));
        }
    }
    let (best, pairing) = best.expect("at least one try");
    Err(Error::PairingSearch {
        best,
        target,
        pairing,
    })
}

/// Every perfect pairing of `0..n` (`(n−1)!!` of them), each sorted.
pub fn all_pairings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(rest: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some((&first, tail)) = rest.split_first() else {
            out.push(acc.clone());
            return;
        };
        for k in 0..tail.len() {
            acc.push((first, tail[k]));
            let remaining: Vec<usize> = tail
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, &v)| v)
                .collect();
            rec(&remaining, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if n.is_multiple_of(2) {
        rec(&(0..n).collect::<Vec<_>>(), &mut Vec::new(), &mut out);
    }
    out
}

/// Largest pairing average over all perfect pairings.
pub fn best_pairing_value(table: &[Vec<f64>]) -> f64 {
    all_pairings(table.len())
        .iter()
        .map(|p| pairing_value(table, p))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn prefix_ensemble(e: &CQEnsemble, prefix: &str) -> Result<DensityMatrix> {
    CubeEncoding::from_ensemble(e)?.prefix_state(prefix)
}

/// `I(Q_y : X_{i+1})` for the prefix `y` of length `i < m`: the Holevo
/// information of the two-label ensemble `{σ_{y0}, σ_{y1}}`.
pub fn prefix_bit_info(c: &CubeEncoding, prefix: &str) -> Result<f64> {
    let zero = c.prefix_state(&format!("{prefix}0"))?;
    let one = c.prefix_state(&format!("{prefix}1"))?;
    Ok(CQEnsemble::uniform(vec![zero, one])?.holevo_information())
}

/// `(lhs, rhs)` with `lhs = 2^{-m} Σ_x Σ_{i<m} I(Q_{x₁…xᵢ} : X_{i+1})` and
/// `rhs = I(Q:X)`.
pub fn info_decomposition_check(e: &CQEnsemble) -> Result<(f64, f64)> {
    cube_decomposition(&CubeEncoding::from_ensemble(e)?)
}

pub fn cube_decomposition(c: &CubeEncoding) -> Result<(f64, f64)> {
    let mut lhs = 0.0;
    for i in 0..c.m {
        // every prefix of length i is shared by 2^{m−i} strings x
        let w = 1.0 / (1u64 << i) as f64;
        for y in 0..1usize << i {
            lhs += w * prefix_bit_info(c, &bit_label(y, i))?;
        }
    }
    Ok((lhs, c.to_ensemble().holevo_information()))
}

/// Random encoding of `m` bits into `dim`-dimensional states with ranks
/// drawn uniformly from `1..=dim`.
pub fn random_cube(m: usize, dim: usize, seed: u64) -> Result<CubeEncoding> {
    let mut rng = SeededRng::new(seed);
    let states = (0..1usize << m)
        .map(|_| {
            let rank = rng.range_inclusive(1, dim);
            random_density(dim, rank, rng.next_u64())
        })
        .collect::<Result<_>>()?;
    CubeEncoding::new(states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_cube(m: usize) -> CubeEncoding {
        CubeEncoding::new(
            (0..1 << m)
                .map(|x| DensityMatrix::basis(1 << m, x))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_encodings() {
        let r = random_density(3, 2, 1).unwrap();
        let c = CubeEncoding::new(vec![r; 4]).unwrap();
        let s = cube_stats(&c, 0).unwrap();
        assert!(s.delta_pairwise.abs() < 1e-12 && s.delta_to_mean.abs() < 1e-12);
        assert!(s.info.abs() < 1e-9);
        assert_eq!(s.pairing.len(), 2);
        let (l, r) = cube_decomposition(&c).unwrap();
        assert!(l.abs() < 1e-9 && r.abs() < 1e-9);
    }

    #[test]
    fn one_bit_basis_encoding() {
        let s = cube_stats(&basis_cube(1), 0).unwrap();
        assert!((s.delta_pairwise - 1.0).abs() < 1e-12);
        assert!((s.info - 1.0).abs() < 1e-12);
        assert!(s.average_encoding_slack() >= 1.0 - 1e-9);
        assert_eq!(s.pairing, vec![(0, 1)]);
    }

    #[test]
    fn two_bit_basis_decomposition() {
        let (l, r) = cube_decomposition(&basis_cube(2)).unwrap();
        assert!((l - 2.0).abs() < 1e-9 && (r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn prefix_states() {
        let c = random_cube(2, 3, 4).unwrap();
        assert!(c
            .prefix_state("")
            .unwrap()
            .matrix()
            .approx_eq(c.mean().matrix(), 1e-14));
        assert_eq!(
            c.prefix_state("10").unwrap().matrix(),
            c.states()[2].matrix()
        );
        let p0 = c.prefix_state("0").unwrap();
        let direct = (c.states()[0].matrix() + c.states()[1].matrix()).scale_real(0.5);
        assert!(p0.matrix().approx_eq(&direct, 1e-15));
        assert!(c.prefix_state("011").is_err());
        assert!(c.prefix_state("2").is_err());
    }

    #[test]
    fn ensemble_validation() {
        let s: Vec<DensityMatrix> = (0..3).map(|i| DensityMatrix::basis(3, i)).collect();
        let e = CQEnsemble::uniform(s).unwrap();
        assert!(encoding_stats(&e).is_err());
        let e = CQEnsemble::with_priors(
            vec![0.7, 0.3],
            vec![DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)],
        )
        .unwrap();
        assert!(encoding_stats(&e).is_err());
        assert!(random_cube(7, 2, 0).is_err());
    }

    #[test]
    fn pairing_count_and_search() {
        assert_eq!(all_pairings(8).len(), 105);
        assert_eq!(all_pairings(2), vec![vec![(0, 1)]]);
        let c = random_cube(3, 2, 9).unwrap();
        let table = c.distance_table();
        let p = search_pairing(&table, 3, 100).unwrap();
        let v = pairing_value(&table, &p);
        assert!(v >= mean_of_table(&table) - PAIRING_TOL);
        assert!(v <= best_pairing_value(&table) + 1e-12);
        let mut covered: Vec<usize> = p.iter().flat_map(|&(a, b)| [a, b]).collect();
        covered.sort_unstable();
        assert_eq!(covered, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn pairing_search_reports_best_when_target_unreachable() {
        // an impossible target: a table whose mean exceeds any pairing value
        let table = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(search_pairing(&table, 0, 5).is_ok());
        let bad = vec![vec![5.0, 0.0], vec![0.0, 5.0]];
        match search_pairing(&bad, 0, 5) {
            Err(Error::PairingSearch { pairing, .. }) => assert_eq!(pairing, vec![(0, 1)]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bounds_hold_on_random_cubes() {
        for seed in 0..10 {
            let c = random_cube(1 + seed as usize % 3, 2 + seed as usize % 3, seed).unwrap();
            let s = cube_stats(&c, seed).unwrap();
            assert!(s.mean_slack() >= -1e-8);
            assert!(s.average_encoding_slack() >= -1e-8);
            assert!(s.halved_avgdist_slack() >= -1e-8);
            assert!(s.pairing_slack() >= -PAIRING_TOL);
        }
    }
}

#[cfg(test)]
mod avgdist_counterexample {
    use super::*;

    // four classical states on one bit: two pure, two maximally mixed
    #[test]
    fn full_delta_bound_fails_beyond_one_bit() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let c = CubeEncoding::new(vec![
            DensityMatrix::basis(2, 0),
            DensityMatrix::basis(2, 1),
            mixed.clone(),
            mixed,
        ])
        .unwrap();
        let s = cube_stats(&c, 0).unwrap();
        // pairwise sums: 2·2 (pure pair) + 8·1 (pure vs mixed) = 12 over 16
        assert!((s.delta_pairwise - 0.75).abs() < 1e-12);
        assert!((s.info - 0.5).abs() < 1e-12);
        assert!(s.avgdist_slack().unwrap() > 0.0);

        let c = random_cube(2, 3, 4).unwrap();
        let s = cube_stats(&c, 0).unwrap();
        assert!(s.delta_pairwise <= 1.0);
        assert!(s.avgdist_slack().unwrap() < -0.1);
        assert!(s.halved_avgdist_slack() >= 0.0);
    }
}
