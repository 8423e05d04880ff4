//! Two-level pointer problem with inner index functions on two bits.
//!
//! Alice holds `x_0 … x_{n−1}` (two bits each) and the pointer `a < n`; Bob
//! holds `y_0 … y_{n−1}` (one bit each). The answer is bit `y_a` of `x_a`.
//! The toy protocols start with Bob, who does not know `a`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::ComplexMatrix;
use crate::qstate::{derive_seed, random_unitary, SeededRng};

use super::rac::index_bits;
use super::{
    bit_labels, controlled_blocks, xor_oracle, Assignment, Branch, FinalMeasurement, InputState,
    Move, Player, ProtocolSpec, Register, Task,
};

/// Bits in each `x_i`.
pub const INNER_BITS: usize = 2;

pub fn x_labels(n: usize) -> Vec<String> {
    (0..n)
        .flat_map(|i| bit_labels(&format!("x{i}"), INNER_BITS))
        .collect()
}

pub fn a_labels(n: usize) -> Vec<String> {
    bit_labels("a", index_bits(n))
}

pub fn y_label(i: usize) -> String {
    format!("y{i}")
}

pub fn y_labels(n: usize) -> Vec<String> {
    (0..n).map(y_label).collect()
}

fn value(a: &Assignment, labels: &[String]) -> Result<usize> {
    labels.iter().try_fold(0usize, |acc, l| {
        a.get(l)
            .map(|&b| (acc << 1) | usize::from(b))
            .ok_or_else(|| Error::Protocol(format!("no value for {l:?}")))
    })
}

/// Bit `y_a` of `x_a`, keyed by `(a, x_a, y_a)`.
#[derive(Debug, Clone)]
pub struct SkTask {
    n: usize,
}

impl SkTask {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    fn pointer(&self, a: &Assignment) -> Result<usize> {
        let p = value(a, &a_labels(self.n))?;
        if p >= self.n {
            return Err(Error::Protocol(format!("pointer {p} out of range")));
        }
        Ok(p)
    }
}

impl Task for SkTask {
    fn expected(&self, a: &Assignment) -> Result<bool> {
        let p = self.pointer(a)?;
        let y = usize::from(a.get(&y_label(p)).copied().unwrap_or(false));
        Ok(a.get(&format!("x{p}_{y}")).copied().unwrap_or(false))
    }

    fn key(&self, a: &Assignment) -> String {
        let Ok(p) = self.pointer(a) else {
            return "invalid".into();
        };
        let bit = |l: String| {
            if a.get(&l).copied().unwrap_or(false) {
                '1'
            } else {
                '0'
            }
        };
        let x: String = bit_labels(&format!("x{p}"), INNER_BITS)
            .into_iter()
            .map(bit)
            .collect();
        format!("a={p} x={x} y={}", bit(y_label(p)))
    }
}

fn check_size(k: usize, n: usize) -> Result<()> {
    if k != 2 {
        return Err(Error::Range {
            value: k as f64,
            lo: 2.0,
            hi: 2.0,
        });
    }
    if !(2..=4).contains(&n) {
        return Err(Error::Size(format!(
            "{n} inner instances, supported 2 to 4"
        )));
    }
    Ok(())
}

fn with_pointer(n: usize, j: usize) -> Assignment {
    let labels = a_labels(n);
    labels
        .iter()
        .enumerate()
        .map(|(b, l)| (l.clone(), j >> (labels.len() - 1 - b) & 1 == 1))
        .collect()
}

/// Uniform `x`, pointer fixed to `j`, uniform classical `y_j`, and every
/// other `y_i` in uniform superposition.
pub fn build_sk_distribution(k: usize, n: usize, j: usize) -> Result<InputState> {
    check_size(k, n)?;
    if j >= n {
        return Err(Error::Range {
            value: j as f64,
            lo: 0.0,
            hi: (n - 1) as f64,
        });
    }
    let mut random = x_labels(n);
    random.push(y_label(j));
    let superposed = (0..n).filter(|&i| i != j).map(y_label).collect();
    InputState::uniform(&random, &with_pointer(n, j), superposed)
}

/// Uniform `x`, `y` and pointer, all classical.
pub fn sk_full_distribution(n: usize) -> Result<InputState> {
    check_size(2, n)?;
    let mut random = x_labels(n);
    random.extend(y_labels(n));
    let mut branches = Vec::new();
    for j in 0..n {
        for b in InputState::uniform(&random, &with_pointer(n, j), Vec::new())?.branches {
            branches.push(Branch {
                prob: b.prob / n as f64,
                classical: b.classical,
            });
        }
    }
    InputState::new(branches, Vec::new())
}

#[derive(Debug, Clone, Serialize)]
pub struct SkInstance {
    pub name: String,
    pub n: usize,
    pub spec: ProtocolSpec,
}

fn registers(n: usize, work: bool) -> Vec<Register> {
    let mut r: Vec<Register> = x_labels(n)
        .into_iter()
        .chain(a_labels(n))
        .map(|l| Register::input(l, Player::Alice))
        .chain(
            y_labels(n)
                .into_iter()
                .map(|l| Register::input(l, Player::Bob)),
        )
        .collect();
    if work {
        r.push(Register::work("w", Player::Bob));
    }
    r.push(Register::message("m", Player::Bob));
    r.push(Register::message("o", Player::Alice));
    r
}

fn alice_targets(n: usize) -> Vec<String> {
    let mut t = x_labels(n);
    t.extend(a_labels(n));
    t.push("m".into());
    t.push("o".into());
    t
}

/// Bob sends `m`, Alice answers in `o`, Bob measures `o`.
fn two_message(
    n: usize,
    work: bool,
    bob: ComplexMatrix,
    bob_targets: Vec<String>,
    alice: ComplexMatrix,
) -> ProtocolSpec {
    ProtocolSpec {
        registers: registers(n, work),
        matrices: BTreeMap::new(),
        moves: vec![
            Move::matrix(Player::Bob, bob, bob_targets, vec!["m".into()]),
            Move::matrix(Player::Alice, alice, alice_targets(n), vec!["o".into()]),
        ],
        measurement: FinalMeasurement {
            player: Player::Bob,
            qubit: "o".into(),
        },
    }
}

/// Alice's answer `o ^= x_a[m]`, ignoring `m` when `guess_only` holds for
/// the pointer value, in which case she answers `x_a[0]`.
fn alice_lookup(n: usize, guess_only: impl Fn(usize) -> bool) -> ComplexMatrix {
    let xb = n * INNER_BITS;
    let ab = index_bits(n);
    xor_oracle(xb + ab + 1, 1, move |v| {
        let m = v & 1;
        let a = (v >> 1) & ((1 << ab) - 1);
        let x = v >> (1 + ab);
        if a >= n {
            return 0;
        }
        let y = if guess_only(a) { 0 } else { m };
        let bit = a * INNER_BITS + y;
        (x >> (xb - 1 - bit)) & 1
    })
}

fn ry(theta: f64) -> ComplexMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).expect("2x2")
}

/// Bob copies `y_0` into `m`; Alice uses it when `a = 0` and guesses
/// otherwise.
pub fn copy_instance(n: usize) -> Result<SkInstance> {
    check_size(2, n)?;
    Ok(SkInstance {
        name: "copy".into(),
        n,
        spec: two_message(
            n,
            false,
            xor_oracle(1, 1, |v| v),
            vec![y_label(0), "m".into()],
            alice_lookup(n, |a| a != 0),
        ),
    })
}

/// Bob rotates `m` by an angle depending on every `y_i`; Alice reads `m` as
/// `y_a`.
pub fn rotation_instance(n: usize) -> Result<SkInstance> {
    check_size(2, n)?;
    let blocks: Vec<ComplexMatrix> = (0..1usize << n)
        .map(|y| {
            let angle: f64 = (0..n)
                .filter(|&i| y >> (n - 1 - i) & 1 == 1)
                .map(|i| 0.9 * std::f64::consts::PI / (i + 1) as f64)
                .sum();
            ry(angle)
        })
        .collect();
    let mut targets = y_labels(n);
    targets.push("m".into());
    Ok(SkInstance {
        name: "rotation".into(),
        n,
        spec: two_message(
            n,
            false,
            controlled_blocks(n, &blocks)?,
            targets,
            alice_lookup(n, |_| false),
        ),
    })
}

/// Bob and Alice apply seeded random unitaries controlled on their inputs;
/// with `work` Bob also entangles `m` with a private qubit.
pub fn random_instance(n: usize, work: bool, seed: u64) -> Result<SkInstance> {
    check_size(2, n)?;
    let mut rng = SeededRng::new(seed);
    let bob_dim = if work { 4 } else { 2 };
    let bob_blocks: Vec<ComplexMatrix> = (0..1usize << n)
        .map(|_| random_unitary(bob_dim, rng.next_u64()))
        .collect();
    let controls = n * INNER_BITS + index_bits(n);
    let lookup = alice_lookup(n, |_| false);
    let mix = random_unitary(4, rng.next_u64());
    let alice_blocks: Vec<ComplexMatrix> = (0..1usize << controls)
        .map(|c| {
            let exact = lookup.block(c * 4, c * 4, 4, 4);
            // every third block is preceded by a fixed random rotation
            if c % 3 == 0 {
                &exact * &mix
            } else {
                exact
            }
        })
        .collect();
    let mut bob_targets = y_labels(n);
    if work {
        bob_targets.push("w".into());
    }
    bob_targets.push("m".into());
    Ok(SkInstance {
        name: if work {
            format!("random_work_{seed}")
        } else {
            format!("random_{seed}")
        },
        n,
        spec: two_message(
            n,
            work,
            controlled_blocks(n, &bob_blocks)?,
            bob_targets,
            controlled_blocks(controls, &alice_blocks)?,
        ),
    })
}

/// The fixed set of small instances used by the reduction checks.
pub fn toy_instances(n: usize, seed: u64) -> Result<Vec<SkInstance>> {
    Ok(vec![
        copy_instance(n)?,
        rotation_instance(n)?,
        random_instance(n, false, derive_seed(seed, 0))?,
        random_instance(n, true, derive_seed(seed, 1))?,
    ])
}

/// Bob sends one qubit `m` built from `y_0 … y_{n−1}` and a private qubit by
/// a seeded random controlled unitary; Alice then measures `m`.
pub fn random_first_message_protocol(n: usize, seed: u64) -> Result<ProtocolSpec> {
    if !(1..=6).contains(&n) {
        return Err(Error::Size(format!("{n} input bits, supported 1 to 6")));
    }
    let mut rng = SeededRng::new(seed);
    let blocks: Vec<ComplexMatrix> = (0..1usize << n)
        .map(|_| random_unitary(4, rng.next_u64()))
        .collect();
    let mut registers: Vec<Register> = y_labels(n)
        .into_iter()
        .map(|l| Register::input(l, Player::Bob))
        .collect();
    registers.push(Register::work("w", Player::Bob));
    registers.push(Register::message("m", Player::Bob));
    let mut targets = y_labels(n);
    targets.push("w".into());
    targets.push("m".into());
    Ok(ProtocolSpec {
        registers,
        matrices: BTreeMap::new(),
        moves: vec![Move::matrix(
            Player::Bob,
            controlled_blocks(n, &blocks)?,
            targets,
            vec!["m".into()],
        )],
        measurement: FinalMeasurement {
            player: Player::Alice,
            qubit: "m".into(),
        },
    })
}
