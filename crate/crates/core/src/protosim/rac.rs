//! Protocols for the index function: Alice holds `x ∈ {0,1}ⁿ`, Bob holds
//! `i < n`, and Bob must output `x_i`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::encoding::{cube_decomposition, CubeEncoding};
use crate::error::{Error, Result};
use crate::matcore::{c64, unitary_with_first_column, ComplexMatrix};
use crate::qinfo::{binary_entropy, ceil_log2, CQEnsemble};

use super::{
    bit_labels, controlled_blocks, message_states, run_protocol, xor_oracle, Assignment, Branch,
    FinalMeasurement, InputState, Move, Player, ProtocolSpec, Register, Shots, Task,
};

/// Slack allowed in the lower bound checks.
pub const RAC_TOL: f64 = 1e-9;

/// Number of qubits holding Bob's index.
pub fn index_bits(n: usize) -> usize {
    ceil_log2(n).max(1)
}

fn read_bits(a: &Assignment, labels: &[String]) -> Result<usize> {
    labels.iter().try_fold(0usize, |acc, l| {
        a.get(l)
            .map(|&b| (acc << 1) | usize::from(b))
            .ok_or_else(|| Error::Protocol(format!("no value for {l:?}")))
    })
}

/// `x_i` with `x` under prefix `x` and `i` under prefix `i`.
#[derive(Debug, Clone)]
pub struct IndexTask {
    x: Vec<String>,
    i: Vec<String>,
}

impl IndexTask {
    pub fn new(n: usize) -> Self {
        Self {
            x: bit_labels("x", n),
            i: bit_labels("i", index_bits(n)),
        }
    }
}

impl Task for IndexTask {
    fn expected(&self, a: &Assignment) -> Result<bool> {
        let i = read_bits(a, &self.i)?;
        let label = self
            .x
            .get(i)
            .ok_or_else(|| Error::Protocol(format!("index {i} out of range")))?;
        Ok(a[label])
    }

    fn key(&self, a: &Assignment) -> String {
        format!("i={}", read_bits(a, &self.i).unwrap_or(usize::MAX))
    }
}

/// Uniform `x` and uniform `i < n`.
pub fn index_distribution(n: usize) -> Result<InputState> {
    let xs = bit_labels("x", n);
    let is = bit_labels("i", index_bits(n));
    let mut branches = Vec::new();
    let p = 1.0 / ((1usize << n) * n) as f64;
    for x in 0..1usize << n {
        for i in 0..n {
            let mut a = Assignment::new();
            for (b, l) in xs.iter().enumerate() {
                a.insert(l.clone(), x >> (n - 1 - b) & 1 == 1);
            }
            for (b, l) in is.iter().enumerate() {
                a.insert(l.clone(), i >> (is.len() - 1 - b) & 1 == 1);
            }
            branches.push(Branch {
                prob: p,
                classical: a,
            });
        }
    }
    InputState::new(branches, Vec::new())
}

fn index_registers(n: usize) -> Vec<Register> {
    bit_labels("x", n)
        .into_iter()
        .map(|l| Register::input(l, Player::Alice))
        .chain(
            bit_labels("i", index_bits(n))
                .into_iter()
                .map(|l| Register::input(l, Player::Bob)),
        )
        .collect()
}

/// Qubit pointing along the unit Bloch vector `d`.
pub fn bloch_state(d: [f64; 3]) -> [Complex64; 2] {
    let theta = d[2].clamp(-1.0, 1.0).acos();
    let phi = d[1].atan2(d[0]);
    [
        c64((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

fn normalized(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-12).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

/// `Σ_i s_i d_i` with `s_i = +1` when bit `i` of `x` is 0.
fn signed_sum(dirs: &[[f64; 3]], x: usize) -> [f64; 3] {
    let n = dirs.len();
    let mut v = [0.0; 3];
    for (i, d) in dirs.iter().enumerate() {
        let s = if x >> (n - 1 - i) & 1 == 0 { 1.0 } else { -1.0 };
        for k in 0..3 {
            v[k] += s * d[k];
        }
    }
    v
}

fn direction_objective(dirs: &[[f64; 3]]) -> f64 {
    (0..1usize << dirs.len())
        .map(|x| {
            let v = signed_sum(dirs, x);
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
        })
        .sum()
}

/// Average success of the one-qubit code that sends the direction of
/// `Σ_i s_i d_i` and measures along `d_i`.
pub fn rac_success(dirs: &[[f64; 3]]) -> f64 {
    let n = dirs.len();
    0.5 + direction_objective(dirs) / ((1usize << (n + 1)) * n) as f64
}

fn angles_to_dirs(n: usize, p: &[f64]) -> Vec<[f64; 3]> {
    let mut dirs = vec![[0.0, 0.0, 1.0]];
    let mut k = 0;
    for i in 1..n {
        let theta = p[k];
        let phi = if i == 1 { 0.0 } else { p[k + 1] };
        k += if i == 1 { 1 } else { 2 };
        dirs.push([
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ]);
    }
    dirs
}

/// Measurement directions for a one-qubit code on `n` bits: a grid over
/// spherical angles followed by coordinate pattern search.
pub fn optimize_rac_directions(n: usize) -> Result<Vec<[f64; 3]>> {
    if !(2..=5).contains(&n) {
        return Err(Error::Range {
            value: n as f64,
            lo: 2.0,
            hi: 5.0,
        });
    }
    let params = 2 * (n - 1) - 1;
    let per_axis = ((20_000f64).powf(1.0 / params as f64).floor() as usize).max(4);
    let range = |k: usize| if k == 0 || k % 2 == 1 { PI } else { 2.0 * PI };
    let mut best = vec![0.0; params];
    let mut best_val = f64::NEG_INFINITY;
    let mut idx = vec![0usize; params];
    loop {
        let p: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(k, &g)| range(k) * g as f64 / per_axis as f64)
            .collect();
        let v = direction_objective(&angles_to_dirs(n, &p));
        if v > best_val + 1e-12 {
            best_val = v;
            best = p;
        }
        let mut k = 0;
        while k < params {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == params {
            break;
        }
    }
    let mut step = PI / per_axis as f64;
    while step > 1e-10 {
        let mut improved = false;
        for k in 0..params {
            for sign in [1.0, -1.0] {
                let mut p = best.clone();
                p[k] += sign * step;
                let v = direction_objective(&angles_to_dirs(n, &p));
                if v > best_val + 1e-15 {
                    best_val = v;
                    best = p;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(angles_to_dirs(n, &best))
}

/// One-message protocol: Alice sends one qubit along `Σ_i s_i d_i`, Bob
/// measures it along `d_i`.
pub fn rac_protocol(dirs: &[[f64; 3]]) -> Result<ProtocolSpec> {
    let n = dirs.len();
    if n < 2 {
        return Err(Error::Precondition("at least two bits".into()));
    }
    let b = index_bits(n);
    let encoders: Vec<ComplexMatrix> = (0..1usize << n)
        .map(|x| {
            let d = normalized(signed_sum(dirs, x)).unwrap_or([0.0, 0.0, 1.0]);
            unitary_with_first_column(&bloch_state(d))
        })
        .collect();
    let decoders: Vec<ComplexMatrix> = dirs
        .iter()
        .map(|d| unitary_with_first_column(&bloch_state(*d)).adjoint())
        .collect();
    let mut registers = index_registers(n);
    registers.push(Register::message("q", Player::Alice));
    let mut alice_targets = bit_labels("x", n);
    alice_targets.push("q".into());
    let mut bob_targets = bit_labels("i", b);
    bob_targets.push("q".into());
    Ok(ProtocolSpec {
        registers,
        matrices: BTreeMap::new(),
        moves: vec![
            Move::matrix(
                Player::Alice,
                controlled_blocks(n, &encoders)?,
                alice_targets,
                vec!["q".into()],
            ),
            Move::matrix(
                Player::Bob,
                controlled_blocks(b, &decoders)?,
                bob_targets,
                vec![],
            ),
        ],
        measurement: FinalMeasurement {
            player: Player::Bob,
            qubit: "q".into(),
        },
    })
}

/// Best one-qubit code found by [`optimize_rac_directions`].
pub fn optimal_rac(n: usize) -> Result<ProtocolSpec> {
    rac_protocol(&optimize_rac_directions(n)?)
}

/// Alice copies all of `x` into `n` message qubits.
pub fn classical_copy_protocol(n: usize) -> Result<ProtocolSpec> {
    let b = index_bits(n);
    let ms = bit_labels("m", n);
    let mut registers = index_registers(n);
    registers.extend(
        ms.iter()
            .map(|l| Register::message(l.clone(), Player::Alice)),
    );
    registers.push(Register::work("out", Player::Bob));
    let mut alice = bit_labels("x", n);
    alice.extend(ms.iter().cloned());
    let mut bob = bit_labels("i", b);
    bob.extend(ms.iter().cloned());
    bob.push("out".into());
    let pick = move |v: usize| {
        let i = v >> n;
        let m = v & ((1 << n) - 1);
        if i < n {
            m >> (n - 1 - i) & 1
        } else {
            0
        }
    };
    Ok(ProtocolSpec {
        registers,
        matrices: BTreeMap::new(),
        moves: vec![
            Move::matrix(Player::Alice, xor_oracle(n, n, |x| x), alice, ms.clone()),
            Move::matrix(Player::Bob, xor_oracle(b + n, 1, pick), bob, vec![]),
        ],
        measurement: FinalMeasurement {
            player: Player::Bob,
            qubit: "out".into(),
        },
    })
}

/// Bob sends `i`, Alice answers with `x_i`.
pub fn index_query_protocol(n: usize) -> Result<ProtocolSpec> {
    let b = index_bits(n);
    let is = bit_labels("i", b);
    let qs = bit_labels("q", b);
    let mut registers = index_registers(n);
    registers.extend(qs.iter().map(|l| Register::message(l.clone(), Player::Bob)));
    registers.push(Register::message("ans", Player::Alice));
    let mut bob = is.clone();
    bob.extend(qs.iter().cloned());
    let mut alice = bit_labels("x", n);
    alice.extend(qs.iter().cloned());
    alice.push("ans".into());
    let lookup = move |v: usize| {
        let x = v >> b;
        let i = v & ((1 << b) - 1);
        if i < n {
            x >> (n - 1 - i) & 1
        } else {
            0
        }
    };
    Ok(ProtocolSpec {
        registers,
        matrices: BTreeMap::new(),
        moves: vec![
            Move::matrix(Player::Bob, xor_oracle(b, b, |i| i), bob, qs.clone()),
            Move::matrix(
                Player::Alice,
                xor_oracle(n + b, 1, lookup),
                alice,
                vec!["ans".into()],
            ),
        ],
        measurement: FinalMeasurement {
            player: Player::Bob,
            qubit: "ans".into(),
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RacCheck {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    /// `(1 − H(ε)) n`.
    pub lhs: f64,
    /// Holevo information of the message about `x`.
    pub info: f64,
    /// Per-bit information sum and total information from the bit-prefix
    /// decomposition.
    pub decomposition: (f64, f64),
}

impl RacCheck {
    /// `m − (1 − H(ε)) n`.
    pub fn slack(&self) -> f64 {
        self.m as f64 - self.lhs
    }

    /// `I(Q:X) − (1 − H(ε)) n`.
    pub fn info_slack(&self) -> f64 {
        self.info - self.lhs
    }

    /// `m − I(Q:X)`.
    pub fn capacity_slack(&self) -> f64 {
        self.m as f64 - self.info
    }

    pub fn holds(&self) -> bool {
        self.slack() >= -RAC_TOL
            && self.info_slack() >= -RAC_TOL
            && self.capacity_slack() >= -RAC_TOL
            && self.decomposition.0 <= self.decomposition.1 + RAC_TOL
    }
}

/// Error and information accounting for a one-message Alice-to-Bob protocol
/// for the index function on `n` bits.
pub fn rac_lower_bound_check(spec: &ProtocolSpec, n: usize) -> Result<RacCheck> {
    spec.validate()?;
    let msgs = spec.messages();
    if msgs.len() != 1 || msgs[0].from != Player::Alice {
        return Err(Error::Protocol(
            "expected exactly one message, from Alice".into(),
        ));
    }
    let m = msgs[0].qubits.len();
    let report = run_protocol(
        spec,
        &index_distribution(n)?,
        &IndexTask::new(n),
        Shots::Exact,
    )?;
    let eps = report.error.clamp(0.0, 1.0);
    let lhs = (1.0 - binary_entropy(eps)?) * n as f64;

    let xs = bit_labels("x", n);
    let mut fixed = Assignment::new();
    for l in bit_labels("i", index_bits(n)) {
        fixed.insert(l, false);
    }
    let by_x = InputState::uniform(&xs, &fixed, Vec::new())?;
    let states = message_states(spec, &by_x, 0)?;
    let ensemble = CQEnsemble::uniform(states)?;
    let info = ensemble.holevo_information();
    let decomposition = cube_decomposition(&CubeEncoding::from_ensemble(&ensemble)?)?;
    Ok(RacCheck {
        n,
        m,
        eps,
        lhs,
        info,
        decomposition,
    })
}
