//! Two-party protocol simulator.
//!
//! Every register is one qubit. A protocol is a sequence of moves; each move
//! is a unitary applied by one player to qubits that player currently holds,
//! optionally followed by handing some of those qubits to the other player.
//! At the end one player measures a single qubit in the computational basis.
//! Input qubits must never be rewritten: every unitary has to be block
//! diagonal in the basis values of the input qubits it touches.

mod gates;
pub mod rac;
pub mod reduction;
mod run;
pub mod sk;
mod state;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, VALIDATION_TOL};

pub use gates::{named_gate, xor_oracle};
pub use run::{
    evolve, message_label_info, message_states, reduced_message_density, run_protocol, tv_distance,
    Assignment, Branch, InputState, MessageInfo, RunReport, Shots, Task,
};
pub use state::QState;

/// Most qubits a single simulated branch may carry in superposition.
pub const MAX_QUANTUM_QUBITS: usize = 8;

/// Entries coupling different input values must be below this.
pub const INPUT_WRITE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Alice,
    Bob,
}

impl Player {
    pub fn other(self) -> Self {
        match self {
            Player::Alice => Player::Bob,
            Player::Bob => Player::Alice,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Alice => "alice",
            Player::Bob => "bob",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    AliceInput,
    BobInput,
    AliceWork,
    BobWork,
    Message,
}

impl Role {
    pub fn is_input(self) -> bool {
        matches!(self, Role::AliceInput | Role::BobInput)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Register {
    pub label: String,
    pub role: Role,
    /// Holder before the first move.
    pub owner: Player,
}

impl Register {
    pub fn new(label: impl Into<String>, role: Role, owner: Player) -> Self {
        Self {
            label: label.into(),
            role,
            owner,
        }
    }

    pub fn input(label: impl Into<String>, owner: Player) -> Self {
        let role = match owner {
            Player::Alice => Role::AliceInput,
            Player::Bob => Role::BobInput,
        };
        Self::new(label, role, owner)
    }

    pub fn work(label: impl Into<String>, owner: Player) -> Self {
        let role = match owner {
            Player::Alice => Role::AliceWork,
            Player::Bob => Role::BobWork,
        };
        Self::new(label, role, owner)
    }

    pub fn message(label: impl Into<String>, owner: Player) -> Self {
        Self::new(label, Role::Message, owner)
    }
}

/// How a move names its unitary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitarySpec {
    /// One of [`named_gate`]'s names.
    Gate(String),
    Matrix(ComplexMatrix),
    /// Key into [`ProtocolSpec::matrices`].
    Ref(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub player: Player,
    pub unitary: UnitarySpec,
    /// First target is the most significant index bit of the unitary.
    pub targets: Vec<String>,
    #[serde(default)]
    pub send: Vec<String>,
}

impl Move {
    pub fn new(player: Player, unitary: UnitarySpec, targets: &[&str], send: &[&str]) -> Self {
        Self {
            player,
            unitary,
            targets: targets.iter().map(|s| s.to_string()).collect(),
            send: send.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn matrix(
        player: Player,
        m: ComplexMatrix,
        targets: Vec<String>,
        send: Vec<String>,
    ) -> Self {
        Self {
            player,
            unitary: UnitarySpec::Matrix(m),
            targets,
            send,
        }
    }

    pub fn gate(player: Player, name: &str, targets: &[&str]) -> Self {
        Self::new(player, UnitarySpec::Gate(name.into()), targets, &[])
    }

    /// Hands qubits over without acting on anything.
    pub fn send_only(player: Player, send: Vec<String>) -> Self {
        Self {
            player,
            unitary: UnitarySpec::Matrix(ComplexMatrix::identity(1)),
            targets: Vec::new(),
            send,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalMeasurement {
    pub player: Player,
    pub qubit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub registers: Vec<Register>,
    #[serde(default)]
    pub matrices: BTreeMap<String, ComplexMatrix>,
    pub moves: Vec<Move>,
    pub measurement: FinalMeasurement,
}

impl ProtocolSpec {
    pub fn register(&self, label: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.label == label)
    }

    pub fn labels(&self) -> Vec<String> {
        self.registers.iter().map(|r| r.label.clone()).collect()
    }

    /// Resolves a move's unitary to a matrix.
    pub fn unitary_of(&self, mv: &Move) -> Result<ComplexMatrix> {
        match &mv.unitary {
            UnitarySpec::Gate(name) => named_gate(name),
            UnitarySpec::Matrix(m) => Ok(m.clone()),
            UnitarySpec::Ref(key) => self
                .matrices
                .get(key)
                .cloned()
                .ok_or_else(|| Error::Protocol(format!("unknown matrix reference {key:?}"))),
        }
    }

    /// Moves that hand over at least one qubit.
    pub fn messages(&self) -> Vec<MessageInfo> {
        self.moves
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.send.is_empty())
            .map(|(i, m)| MessageInfo {
                move_index: i,
                from: m.player,
                qubits: m.send.clone(),
            })
            .collect()
    }

    pub fn rounds(&self) -> usize {
        self.moves.iter().filter(|m| !m.send.is_empty()).count()
    }

    pub fn message_qubits(&self) -> usize {
        self.moves.iter().map(|m| m.send.len()).sum()
    }

    pub fn first_message(&self) -> Option<MessageInfo> {
        self.messages().into_iter().next()
    }

    /// Checks labels, shapes, unitarity, ownership at every step, and that no
    /// unitary rewrites an input qubit.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for r in &self.registers {
            if !seen.insert(r.label.as_str()) {
                return Err(Error::Protocol(format!("duplicate register {:?}", r.label)));
            }
            let expected_owner = match r.role {
                Role::AliceInput | Role::AliceWork => Some(Player::Alice),
                Role::BobInput | Role::BobWork => Some(Player::Bob),
                Role::Message => None,
            };
            if expected_owner.is_some_and(|p| p != r.owner) {
                return Err(Error::Protocol(format!(
                    "register {:?} starts with the wrong player",
                    r.label
                )));
            }
        }
        let mut owner: BTreeMap<&str, Player> = self
            .registers
            .iter()
            .map(|r| (r.label.as_str(), r.owner))
            .collect();

        for (i, mv) in self.moves.iter().enumerate() {
            let mut distinct = BTreeSet::new();
            for t in mv.targets.iter().chain(&mv.send) {
                if !owner.contains_key(t.as_str()) {
                    return Err(Error::Protocol(format!("move {i}: unknown register {t:?}")));
                }
            }
            for t in &mv.targets {
                if !distinct.insert(t.as_str()) {
                    return Err(Error::Protocol(format!(
                        "move {i}: register {t:?} targeted twice"
                    )));
                }
                if owner[t.as_str()] != mv.player {
                    return Err(Error::Protocol(format!(
                        "move {i}: {} acts on {t:?}, held by {}",
                        mv.player,
                        owner[t.as_str()]
                    )));
                }
            }
            let u = self.unitary_of(mv)?;
            let dim = 1usize << mv.targets.len();
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::Protocol(format!(
                    "move {i}: {}x{} unitary on {} qubits",
                    u.rows(),
                    u.cols(),
                    mv.targets.len()
                )));
            }
            let residual = u.unitarity_residual();
            if residual > VALIDATION_TOL * dim as f64 {
                return Err(Error::NotUnitary { residual });
            }
            self.check_inputs_preserved(i, mv, &u)?;
            for s in &mv.send {
                if owner[s.as_str()] != mv.player {
                    return Err(Error::Protocol(format!(
                        "move {i}: {} sends {s:?} it does not hold",
                        mv.player
                    )));
                }
                if self.register(s).is_some_and(|r| r.role.is_input()) {
                    return Err(Error::Protocol(format!(
                        "move {i}: input register {s:?} cannot be sent"
                    )));
                }
            }
            for s in &mv.send {
                owner.insert(s.as_str(), mv.player.other());
            }
        }

        let q = &self.measurement.qubit;
        match owner.get(q.as_str()) {
            None => {
                return Err(Error::Protocol(format!(
                    "measured register {q:?} does not exist"
                )))
            }
            Some(&p) if p != self.measurement.player => {
                return Err(Error::Protocol(format!(
                    "{} measures {q:?}, held by {p}",
                    self.measurement.player
                )))
            }
            _ => {}
        }
        if self.register(q).is_some_and(|r| r.role.is_input()) {
            return Err(Error::Protocol(format!(
                "measured register {q:?} is an input"
            )));
        }
        Ok(())
    }

    fn check_inputs_preserved(&self, index: usize, mv: &Move, u: &ComplexMatrix) -> Result<()> {
        let k = mv.targets.len();
        let mask: usize = mv
            .targets
            .iter()
            .enumerate()
            .filter(|(_, t)| self.register(t).is_some_and(|r| r.role.is_input()))
            .map(|(pos, _)| 1usize << (k - 1 - pos))
            .sum();
        if mask == 0 {
            return Ok(());
        }
        let dim = 1usize << k;
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                if (r ^ c) & mask != 0 {
                    worst = worst.max(u[(r, c)].norm());
                }
            }
        }
        if worst > INPUT_WRITE_TOL {
            return Err(Error::ModelViolation(format!(
                "move {index}: unitary couples different input values (entry {worst:.3e})"
            )));
        }
        Ok(())
    }
}

/// Block-diagonal unitary `Σ_c |c><c| ⊗ blocks[c]` with `control_qubits`
/// control bits in front. Missing blocks act as the identity.
pub fn controlled_blocks(control_qubits: usize, blocks: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let count = 1usize << control_qubits;
    let inner = blocks
        .first()
        .map(ComplexMatrix::rows)
        .ok_or_else(|| Error::Protocol("no blocks".into()))?;
    if blocks.len() > count {
        return Err(Error::Protocol(format!(
            "{} blocks for {count} control values",
            blocks.len()
        )));
    }
    let id = ComplexMatrix::identity(inner);
    let mut m = ComplexMatrix::zeros(count * inner, count * inner);
    for c in 0..count {
        let b = blocks.get(c).unwrap_or(&id);
        if b.rows() != inner || !b.is_square() {
            return Err(Error::Protocol("blocks differ in size".into()));
        }
        for i in 0..inner {
            for j in 0..inner {
                m[(c * inner + i, c * inner + j)] = b[(i, j)];
            }
        }
    }
    Ok(m)
}

/// Bit labels `prefix_0 … prefix_{count−1}` (most significant first).
pub fn bit_labels(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|b| format!("{prefix}_{b}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ProtocolSpec {
        ProtocolSpec {
            registers: vec![
                Register::input("x", Player::Alice),
                Register::message("m", Player::Alice),
                Register::work("out", Player::Bob),
            ],
            matrices: BTreeMap::new(),
            moves: vec![
                Move::new(
                    Player::Alice,
                    UnitarySpec::Gate("CNOT".into()),
                    &["x", "m"],
                    &["m"],
                ),
                Move::gate(Player::Bob, "CNOT", &["m", "out"]),
            ],
            measurement: FinalMeasurement {
                player: Player::Bob,
                qubit: "out".into(),
            },
        }
    }

    #[test]
    fn valid_spec_and_counts() {
        let p = tiny();
        p.validate().unwrap();
        assert_eq!(p.rounds(), 1);
        assert_eq!(p.message_qubits(), 1);
        assert_eq!(p.first_message().unwrap().from, Player::Alice);
    }

    #[test]
    fn ownership_violation() {
        let mut p = tiny();
        p.moves[1].player = Player::Alice;
        assert!(matches!(p.validate(), Err(Error::Protocol(_))));
        let mut p = tiny();
        p.moves[0].send = vec!["out".into()];
        assert!(matches!(p.validate(), Err(Error::Protocol(_))));
    }

    #[test]
    fn input_write_detected() {
        let mut p = tiny();
        p.moves[0] = Move::new(
            Player::Alice,
            UnitarySpec::Gate("CNOT".into()),
            &["m", "x"],
            &["m"],
        );
        assert!(matches!(p.validate(), Err(Error::ModelViolation(_))));
        let mut p = tiny();
        p.moves[0] = Move::new(Player::Alice, UnitarySpec::Gate("H".into()), &["x"], &[]);
        assert!(matches!(p.validate(), Err(Error::ModelViolation(_))));
    }

    #[test]
    fn measurement_must_be_held() {
        let mut p = tiny();
        p.measurement.player = Player::Alice;
        assert!(p.validate().is_err());
    }

    #[test]
    fn bad_shapes() {
        let mut p = tiny();
        p.moves[1].unitary = UnitarySpec::Gate("H".into());
        assert!(p.validate().is_err());
        let mut p = tiny();
        p.moves[1].unitary = UnitarySpec::Ref("nope".into());
        assert!(p.validate().is_err());
        let mut p = tiny();
        p.moves[1].unitary = UnitarySpec::Matrix(ComplexMatrix::identity(4).scale_real(2.0));
        assert!(matches!(p.validate(), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn spec_json_round_trip() {
        let mut p = tiny();
        p.matrices
            .insert("swap".into(), named_gate("SWAP").unwrap());
        p.moves.push(Move::new(
            Player::Bob,
            UnitarySpec::Ref("swap".into()),
            &["m", "out"],
            &[],
        ));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains(r#""unitary":{"gate":"CNOT"}"#));
        assert!(s.contains(r#""role":"alice_input""#));
        let back: ProtocolSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn controlled_block_layout() {
        let x = named_gate("X").unwrap();
        let m = controlled_blocks(1, &[ComplexMatrix::identity(2), x]).unwrap();
        assert_eq!(m, named_gate("CNOT").unwrap());
    }
}
