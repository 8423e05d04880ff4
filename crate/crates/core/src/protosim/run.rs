use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c64, ComplexMatrix, ONE, ZERO};
use crate::qinfo::CQEnsemble;
use crate::qstate::{mixture, DensityMatrix, SeededRng};

use super::state::QState;
use super::{Move, Player, ProtocolSpec};

/// Values of classical input qubits.
pub type Assignment = BTreeMap<String, bool>;

/// Probability sums must be within this of one.
const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub prob: f64,
    pub classical: Assignment,
}

/// Mixture of classical assignments; qubits named in `superposed` start in
/// `|+>`, all other unassigned qubits in `|0>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputState {
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub superposed: Vec<String>,
}

impl InputState {
    pub fn new(branches: Vec<Branch>, superposed: Vec<String>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidDistribution("no branches".into()));
        }
        let sum: f64 = branches.iter().map(|b| b.prob).sum();
        if branches.iter().any(|b| b.prob.is_nan() || b.prob < 0.0) || (sum - 1.0).abs() > PROB_TOL
        {
            return Err(Error::WeightSum { sum });
        }
        Ok(Self {
            branches,
            superposed,
        })
    }

    /// Every value of `labels` equally likely, with `fixed` added to each.
    pub fn uniform(labels: &[String], fixed: &Assignment, superposed: Vec<String>) -> Result<Self> {
        if labels.len() > 20 {
            return Err(Error::Size(format!(
                "{} uniformly random bits",
                labels.len()
            )));
        }
        let count = 1usize << labels.len();
        let branches = (0..count)
            .map(|v| {
                let mut classical = fixed.clone();
                for (b, l) in labels.iter().enumerate() {
                    classical.insert(l.clone(), v & (1 << (labels.len() - 1 - b)) != 0);
                }
                Branch {
                    prob: 1.0 / count as f64,
                    classical,
                }
            })
            .collect();
        Self::new(branches, superposed)
    }

    pub fn single(classical: Assignment) -> Self {
        Self {
            branches: vec![Branch {
                prob: 1.0,
                classical,
            }],
            superposed: Vec::new(),
        }
    }
}

/// Target function of a run.
pub trait Task: Sync {
    fn expected(&self, input: &Assignment) -> Result<bool>;
    /// Slice an input belongs to in the reported distribution.
    fn key(&self, input: &Assignment) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageInfo {
    pub move_index: usize,
    pub from: Player,
    pub qubits: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub error: f64,
    /// Error conditioned on each key.
    pub error_by_key: BTreeMap<String, f64>,
    /// Outcome probabilities `[P(0), P(1)]` conditioned on each key.
    pub outcome_distribution: BTreeMap<String, [f64; 2]>,
    pub key_weights: BTreeMap<String, f64>,
    pub messages: Vec<MessageInfo>,
    pub message_qubits: usize,
    pub first_message_qubits: usize,
    pub rounds: usize,
}

fn initial_state(spec: &ProtocolSpec, branch: &Branch, superposed: &[String]) -> Result<QState> {
    for label in branch.classical.keys() {
        match spec.register(label) {
            Some(r) if r.role.is_input() => {}
            Some(_) => {
                return Err(Error::Protocol(format!(
                    "classical value for non-input {label:?}"
                )))
            }
            None => {
                return Err(Error::Protocol(format!(
                    "classical value for unknown {label:?}"
                )))
            }
        }
    }
    for label in superposed {
        if spec.register(label).is_none() || branch.classical.contains_key(label) {
            return Err(Error::Protocol(format!("cannot superpose {label:?}")));
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (labels, qubits): (Vec<String>, Vec<[_; 2]>) = spec
        .registers
        .iter()
        .filter(|reg| !branch.classical.contains_key(&reg.label))
        .map(|reg| {
            let q = if superposed.contains(&reg.label) {
                [c64(r, 0.0), c64(r, 0.0)]
            } else {
                [ONE, ZERO]
            };
            (reg.label.clone(), q)
        })
        .unzip();
    QState::product(labels, &qubits)
}

fn apply_move(
    spec: &ProtocolSpec,
    state: &mut QState,
    classical: &Assignment,
    mv: &Move,
) -> Result<()> {
    let u = spec.unitary_of(mv)?;
    let k = mv.targets.len();
    let fixed: Vec<(usize, bool)> = mv
        .targets
        .iter()
        .enumerate()
        .filter_map(|(pos, t)| classical.get(t).map(|&v| (k - 1 - pos, v)))
        .collect();
    if fixed.is_empty() {
        return state.apply(&u, &mv.targets);
    }
    let quantum: Vec<String> = mv
        .targets
        .iter()
        .filter(|t| !classical.contains_key(*t))
        .cloned()
        .collect();
    let idx: Vec<usize> = (0..1usize << k)
        .filter(|i| fixed.iter().all(|&(bit, v)| (i >> bit & 1 == 1) == v))
        .collect();
    let mut block = ComplexMatrix::zeros(idx.len(), idx.len());
    for (a, &r) in idx.iter().enumerate() {
        for (b, &c) in idx.iter().enumerate() {
            block[(a, b)] = u[(r, c)];
        }
    }
    state.apply(&block, &quantum)
}

/// State of one branch after the first `moves` moves.
pub fn evolve(
    spec: &ProtocolSpec,
    branch: &Branch,
    superposed: &[String],
    moves: usize,
) -> Result<QState> {
    let mut state = initial_state(spec, branch, superposed)?;
    for mv in spec.moves.iter().take(moves) {
        apply_move(spec, &mut state, &branch.classical, mv)?;
    }
    Ok(state)
}

/// Density of `labels` in one branch after the first `moves` moves.
pub fn reduced_message_density(
    spec: &ProtocolSpec,
    branch: &Branch,
    superposed: &[String],
    moves: usize,
    labels: &[String],
) -> Result<DensityMatrix> {
    evolve(spec, branch, superposed, moves)?.reduced(labels)
}

/// Per-branch density of the qubits sent in message `index` (zero based),
/// right after they are sent.
pub fn message_states(
    spec: &ProtocolSpec,
    input: &InputState,
    index: usize,
) -> Result<Vec<DensityMatrix>> {
    let msg = spec
        .messages()
        .into_iter()
        .nth(index)
        .ok_or_else(|| Error::Protocol(format!("protocol has no message {index}")))?;
    input
        .branches
        .par_iter()
        .map(|b| {
            reduced_message_density(spec, b, &input.superposed, msg.move_index + 1, &msg.qubits)
        })
        .collect()
}

/// `I(M : label)` for the first message `M`, with `label` classical in every
/// branch.
pub fn message_label_info(spec: &ProtocolSpec, input: &InputState, label: &str) -> Result<f64> {
    let states = message_states(spec, input, 0)?;
    let mut groups: BTreeMap<bool, (Vec<f64>, Vec<DensityMatrix>)> = BTreeMap::new();
    for (b, rho) in input.branches.iter().zip(states) {
        let v = *b.classical.get(label).ok_or_else(|| {
            Error::Protocol(format!("{label:?} is not classical in every branch"))
        })?;
        let g = groups.entry(v).or_default();
        g.0.push(b.prob);
        g.1.push(rho);
    }
    let mut priors = Vec::new();
    let mut conditional = Vec::new();
    for (w, s) in groups.into_values() {
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let normalized: Vec<f64> = w.iter().map(|x| x / total).collect();
        priors.push(total);
        conditional.push(mixture(&normalized, &s)?);
    }
    let sum: f64 = priors.iter().sum();
    let priors = priors.iter().map(|p| p / sum).collect();
    Ok(CQEnsemble::with_priors(priors, conditional)?.holevo_information())
}

struct Cell {
    key: String,
    expected: bool,
    weight: f64,
    wrong: f64,
    p: [f64; 2],
}

fn branch_cells(
    spec: &ProtocolSpec,
    branch: &Branch,
    superposed: &[String],
    task: &dyn Task,
) -> Result<Vec<Cell>> {
    let state = evolve(spec, branch, superposed, spec.moves.len())?;
    let inputs: Vec<String> = state
        .labels()
        .iter()
        .filter(|l| spec.register(l).is_some_and(|r| r.role.is_input()))
        .cloned()
        .collect();
    let mut observed = inputs.clone();
    observed.push(spec.measurement.qubit.clone());
    let probs = state.probabilities(&observed)?;
    let k = inputs.len();
    let mut cells = Vec::with_capacity(1 << k);
    for c in 0..1usize << k {
        let mut a = branch.classical.clone();
        for (b, l) in inputs.iter().enumerate() {
            a.insert(l.clone(), c & (1 << (k - 1 - b)) != 0);
        }
        let p = [probs[2 * c] * branch.prob, probs[2 * c + 1] * branch.prob];
        let expected = task.expected(&a)?;
        cells.push(Cell {
            key: task.key(&a),
            expected,
            weight: p[0] + p[1],
            wrong: if expected { p[0] } else { p[1] },
            p,
        });
    }
    Ok(cells)
}

/// Runs every branch and scores the final measurement against `task`.
pub fn run_protocol(
    spec: &ProtocolSpec,
    input: &InputState,
    task: &dyn Task,
    shots: Shots,
) -> Result<RunReport> {
    spec.validate()?;
    let per_branch: Vec<Vec<Cell>> = input
        .branches
        .par_iter()
        .map(|b| branch_cells(spec, b, &input.superposed, task))
        .collect::<Result<_>>()?;
    let mut cells: Vec<Cell> = per_branch.into_iter().flatten().collect();

    if let Shots::Sampled { shots, seed } = shots {
        if shots == 0 {
            return Err(Error::Precondition("shots must be at least 1".into()));
        }
        let mut rng = SeededRng::new(seed);
        let mut counts = vec![[0u64; 2]; cells.len()];
        let total: f64 = cells.iter().map(|c| c.weight).sum();
        for _ in 0..shots {
            let mut r = rng.uniform() * total;
            let mut hit = (cells.len() - 1, 1);
            'search: for (i, c) in cells.iter().enumerate() {
                for o in 0..2 {
                    if r < c.p[o] {
                        hit = (i, o);
                        break 'search;
                    }
                    r -= c.p[o];
                }
            }
            counts[hit.0][hit.1] += 1;
        }
        for (c, n) in cells.iter_mut().zip(&counts) {
            let p0 = n[0] as f64 / shots as f64;
            let p1 = n[1] as f64 / shots as f64;
            c.wrong = if c.expected { p0 } else { p1 };
            c.p = [p0, p1];
            c.weight = p0 + p1;
        }
    }

    let mut error = 0.0;
    let mut weights: BTreeMap<String, f64> = BTreeMap::new();
    let mut wrong: BTreeMap<String, f64> = BTreeMap::new();
    let mut dist: BTreeMap<String, [f64; 2]> = BTreeMap::new();
    for c in &cells {
        error += c.wrong;
        *weights.entry(c.key.clone()).or_default() += c.weight;
        *wrong.entry(c.key.clone()).or_default() += c.wrong;
        let d = dist.entry(c.key.clone()).or_default();
        d[0] += c.p[0];
        d[1] += c.p[1];
    }
    let error_by_key = wrong
        .iter()
        .map(|(k, w)| {
            (
                k.clone(),
                if weights[k] > 0.0 {
                    w / weights[k]
                } else {
                    0.0
                },
            )
        })
        .collect();
    for (k, d) in dist.iter_mut() {
        let w = weights[k];
        if w > 0.0 {
            d[0] /= w;
            d[1] /= w;
        }
    }
    let messages = spec.messages();
    Ok(RunReport {
        error,
        error_by_key,
        outcome_distribution: dist,
        key_weights: weights,
        first_message_qubits: messages.first().map_or(0, |m| m.qubits.len()),
        message_qubits: spec.message_qubits(),
        rounds: messages.len(),
        messages,
    })
}

/// Largest total variation distance between the two reports' conditional
/// outcome distributions over their shared keys.
pub fn tv_distance(a: &RunReport, b: &RunReport) -> Result<f64> {
    if a.outcome_distribution.len() != b.outcome_distribution.len() {
        return Err(Error::Protocol("reports have different keys".into()));
    }
    let mut worst = 0.0f64;
    for (k, p) in &a.outcome_distribution {
        let q = b
            .outcome_distribution
            .get(k)
            .ok_or_else(|| Error::Protocol(format!("key {k:?} missing")))?;
        worst = worst.max(0.5 * ((p[0] - q[0]).abs() + (p[1] - q[1]).abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protosim::{FinalMeasurement, Register, UnitarySpec};

    struct Parity;

    impl Task for Parity {
        fn expected(&self, a: &Assignment) -> Result<bool> {
            Ok(a.values().filter(|&&v| v).count() % 2 == 1)
        }
        fn key(&self, a: &Assignment) -> String {
            a.values().map(|&v| if v { '1' } else { '0' }).collect()
        }
    }

    struct Zero;

    impl Task for Zero {
        fn expected(&self, _: &Assignment) -> Result<bool> {
            Ok(false)
        }
        fn key(&self, _: &Assignment) -> String {
            String::new()
        }
    }

    fn parity_protocol() -> ProtocolSpec {
        ProtocolSpec {
            registers: vec![
                Register::input("x", Player::Alice),
                Register::input("y", Player::Bob),
                Register::message("m", Player::Alice),
            ],
            matrices: BTreeMap::new(),
            moves: vec![
                Move::new(
                    Player::Alice,
                    UnitarySpec::Gate("CNOT".into()),
                    &["x", "m"],
                    &["m"],
                ),
                Move::gate(Player::Bob, "CNOT", &["y", "m"]),
            ],
            measurement: FinalMeasurement {
                player: Player::Bob,
                qubit: "m".into(),
            },
        }
    }

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn empty_protocol_measures_zero() {
        let spec = ProtocolSpec {
            registers: vec![Register::work("w", Player::Bob)],
            matrices: BTreeMap::new(),
            moves: vec![],
            measurement: FinalMeasurement {
                player: Player::Bob,
                qubit: "w".into(),
            },
        };
        let r = run_protocol(
            &spec,
            &InputState::single(Assignment::new()),
            &Zero,
            Shots::Exact,
        )
        .unwrap();
        assert_eq!(r.error, 0.0);
        assert_eq!(r.outcome_distribution[""], [1.0, 0.0]);
        assert_eq!(r.rounds, 0);
    }

    #[test]
    fn parity_is_exact_classical_and_superposed() {
        let spec = parity_protocol();
        let classical =
            InputState::uniform(&labels(&["x", "y"]), &Assignment::new(), vec![]).unwrap();
        let r = run_protocol(&spec, &classical, &Parity, Shots::Exact).unwrap();
        assert!(r.error.abs() < 1e-15);
        assert_eq!(r.outcome_distribution.len(), 4);
        assert_eq!(r.rounds, 1);
        assert_eq!(r.first_message_qubits, 1);
        let sup = InputState::uniform(&labels(&["x"]), &Assignment::new(), labels(&["y"])).unwrap();
        let s = run_protocol(&spec, &sup, &Parity, Shots::Exact).unwrap();
        assert!(s.error.abs() < 1e-15);
        assert!(tv_distance(&r, &s).unwrap() < 1e-12);
        for (k, w) in &s.key_weights {
            assert!((w - 0.25).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn message_information() {
        let spec = parity_protocol();
        let input = InputState::uniform(&labels(&["x", "y"]), &Assignment::new(), vec![]).unwrap();
        assert!((message_label_info(&spec, &input, "x").unwrap() - 1.0).abs() < 1e-10);
        assert!(message_label_info(&spec, &input, "y").unwrap().abs() < 1e-10);
        let states = message_states(&spec, &input, 0).unwrap();
        assert_eq!(states.len(), 4);
        assert!(message_states(&spec, &input, 1).is_err());
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let mut spec = parity_protocol();
        spec.moves[1] = Move::gate(Player::Bob, "H", &["m"]);
        let input = InputState::uniform(&labels(&["x", "y"]), &Assignment::new(), vec![]).unwrap();
        let exact = run_protocol(&spec, &input, &Parity, Shots::Exact).unwrap();
        assert!((exact.error - 0.5).abs() < 1e-12);
        let a = run_protocol(
            &spec,
            &input,
            &Parity,
            Shots::Sampled {
                shots: 4000,
                seed: 3,
            },
        )
        .unwrap();
        let b = run_protocol(
            &spec,
            &input,
            &Parity,
            Shots::Sampled {
                shots: 4000,
                seed: 3,
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert!((a.error - 0.5).abs() < 0.05);
    }

    #[test]
    fn bad_inputs_rejected() {
        let spec = parity_protocol();
        let mut a = Assignment::new();
        a.insert("m".into(), true);
        assert!(run_protocol(&spec, &InputState::single(a), &Parity, Shots::Exact).is_err());
        assert!(InputState::new(
            vec![Branch {
                prob: 0.5,
                classical: Assignment::new()
            }],
            vec![]
        )
        .is_err());
    }
}
