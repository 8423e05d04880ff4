//! Removing Bob's opening message from a two-level pointer protocol.
//!
//! `P` starts with Bob, who does not know the pointer. For a fixed pointer
//! value `j`, [`modify_first_message`] builds `P′`, whose opening message
//! carries no information about `y_j`: Bob prepares it with a fresh register
//! `r_j` in `|+>` in place of `y_j`, and afterwards corrects his own side
//! with a unitary that depends on the true `y_j`. Since the message of `P′`
//! has a fixed density matrix, [`drop_first_message`] lets Alice prepare it
//! herself together with a purification, which she sends along with her
//! first answer and the pointer.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{c64, tensor, unitary_with_first_column, Keep, ONE, ZERO};
use crate::metrics::trace_distance;
use crate::qinfo::ceil_log2;
use crate::qstate::{canonical_purification, BipartitePureState, DensityMatrix};
use crate::transition::{exact_local_transition, uhlmann_align};

use super::rac::index_bits;
use super::sk::{build_sk_distribution, sk_full_distribution, y_label, y_labels, SkTask};
use super::{
    bit_labels, controlled_blocks, message_label_info, run_protocol, tv_distance, xor_oracle,
    InputState, Move, Player, ProtocolSpec, QState, Register, Role, Shots,
};

/// Tolerance on every reduction inequality.
pub const REDUCTION_TOL: f64 = 1e-8;

/// Information a modified opening message may still carry about `y_j`.
pub const ZERO_INFO_TOL: f64 = 1e-9;

/// Rank cutoff when purifying the opening message.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct Alignment {
    pub z: bool,
    /// `‖ρ_M(z) − ρ′_M‖_t`.
    pub t_z: f64,
    /// `‖φ(z) − (I⊗T_z)φ′‖`, up to phase.
    pub pure_distance: f64,
}

/// `P′` together with what [`drop_first_message`] needs.
#[derive(Debug, Clone)]
pub struct ModifiedProtocol {
    pub spec: ProtocolSpec,
    pub j: usize,
    pub alignments: Vec<Alignment>,
    message: Vec<String>,
    bob_side: Vec<String>,
    message_density: DensityMatrix,
    /// `(I⊗T_z)φ′` for `z = 0, 1`.
    corrected: Vec<BipartitePureState>,
}

impl ModifiedProtocol {
    pub fn message_density(&self) -> &DensityMatrix {
        &self.message_density
    }
}

fn reduction_error(msg: impl Into<String>) -> Error {
    Error::Reduction(msg.into())
}

fn r_label(j: usize) -> String {
    format!("r{j}")
}

fn plus() -> [num_complex::Complex64; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [c64(r, 0.0), c64(r, 0.0)]
}

/// Opening state of the first move's qubits, with `r_j` set to `|z>` or to
/// `|+>` when `z` is `None`.
fn opening_state(
    spec: &ProtocolSpec,
    n: usize,
    j: usize,
    targets: &[String],
    z: Option<bool>,
) -> Result<QState> {
    let rj = r_label(j);
    let others: Vec<String> = (0..n).filter(|&i| i != j).map(y_label).collect();
    let qubits = targets
        .iter()
        .map(|t| {
            if *t == rj {
                Ok(match z {
                    Some(false) => [ONE, ZERO],
                    Some(true) => [ZERO, ONE],
                    None => plus(),
                })
            } else if others.contains(t) {
                Ok(plus())
            } else if spec.register(t).is_some_and(|r| r.role.is_input()) {
                Err(reduction_error(format!("opening move reads input {t:?}")))
            } else {
                Ok([ONE, ZERO])
            }
        })
        .collect::<Result<Vec<_>>>()?;
    QState::product(targets.to_vec(), &qubits)
}

/// Builds `P′` for pointer value `j`.
pub fn modify_first_message(spec: &ProtocolSpec, n: usize, j: usize) -> Result<ModifiedProtocol> {
    spec.validate()?;
    let yj = y_label(j);
    let rj = r_label(j);
    let first = spec
        .moves
        .first()
        .ok_or_else(|| reduction_error("protocol has no moves"))?;
    if first.player != Player::Bob || first.send.is_empty() {
        return Err(reduction_error(
            "the opening move must be a message from Bob",
        ));
    }
    if spec.register(&rj).is_some() {
        return Err(reduction_error(format!("register {rj:?} already exists")));
    }
    let u = spec.unitary_of(first)?;
    let targets: Vec<String> = first
        .targets
        .iter()
        .map(|t| if *t == yj { rj.clone() } else { t.clone() })
        .collect();

    let shared = |z: Option<bool>| -> Result<(BipartitePureState, Vec<String>)> {
        let mut s = opening_state(spec, n, j, &targets, z)?;
        s.apply(&u, &targets)?;
        s.split(&first.send)
    };
    let (phi_plus, bob_side) = shared(None)?;
    let rho_plus = phi_plus.reduced(Keep::H);
    let mut alignments = Vec::new();
    let mut corrections = Vec::new();
    let mut corrected = Vec::new();
    for z in [false, true] {
        let (phi_z, _) = shared(Some(z))?;
        let t = uhlmann_align(&phi_z, &phi_plus, 1e-10)?;
        alignments.push(Alignment {
            z,
            t_z: trace_distance(&phi_z.reduced(Keep::H), &rho_plus)?,
            pure_distance: t.pure_distance,
        });
        corrected.push(phi_plus.apply_k(&t.unitary_k));
        corrections.push(t.unitary_k);
    }

    let others: Vec<String> = (0..n).filter(|&i| i != j).map(y_label).collect();
    let mut registers: Vec<Register> = spec
        .registers
        .iter()
        .map(|r| {
            if others.contains(&r.label) {
                Register::work(r.label.clone(), Player::Bob)
            } else {
                r.clone()
            }
        })
        .collect();
    registers.push(Register::work(rj.clone(), Player::Bob));

    let mut moves = vec![
        Move::gate(Player::Bob, "H", &[rj.as_str()]),
        Move::matrix(Player::Bob, u, targets.clone(), first.send.clone()),
    ];
    let mut fix_targets = vec![yj];
    fix_targets.extend(bob_side.iter().cloned());
    moves.push(Move::matrix(
        Player::Bob,
        controlled_blocks(1, &corrections)?,
        fix_targets,
        Vec::new(),
    ));
    moves.extend(spec.moves.iter().skip(1).cloned());

    let modified = ProtocolSpec {
        registers,
        matrices: spec.matrices.clone(),
        moves,
        measurement: spec.measurement.clone(),
    };
    modified.validate()?;
    Ok(ModifiedProtocol {
        spec: modified,
        j,
        alignments,
        message: first.send.clone(),
        bob_side,
        message_density: rho_plus,
        corrected,
    })
}

/// `P″` and the sizes of the qubits Alice adds to her first message.
#[derive(Debug, Clone)]
pub struct DroppedProtocol {
    pub spec: ProtocolSpec,
    pub purification_qubits: usize,
    pub pointer_qubits: usize,
}

fn kron_order(
    xi: &BipartitePureState,
    beta: &[num_complex::Complex64],
) -> Vec<num_complex::Complex64> {
    // xi is indexed (message, purification); the result is (message, bob side, purification)
    let dp = xi.dim_k();
    let dk = beta.len();
    let mut v = vec![ZERO; xi.dim_h() * dk * dp];
    for h in 0..xi.dim_h() {
        for (k, b) in beta.iter().enumerate() {
            for p in 0..dp {
                v[(h * dk + k) * dp + p] = xi.vec()[h * dp + p] * b;
            }
        }
    }
    v
}

/// Builds `P″` from `P′`: Alice holds the message qubits from the start and
/// prepares their purification; Bob maps it onto his corrected state.
pub fn drop_first_message(mp: &ModifiedProtocol, n: usize) -> Result<DroppedProtocol> {
    let prime = &mp.spec;
    let j = mp.j;
    if prime.moves.len() < 4 || prime.moves[3].player != Player::Alice {
        return Err(reduction_error(
            "Alice must move right after the opening message",
        ));
    }
    let rank = mp
        .message_density
        .eigenvalues()
        .iter()
        .filter(|&&l| l > RANK_TOL)
        .count()
        .max(1);
    let p = ceil_log2(rank);
    let dp = 1usize << p;
    let xi = canonical_purification(&mp.message_density, dp, RANK_TOL)?;
    let pur = bit_labels("pur", p);
    let ptr = bit_labels("ptr", index_bits(n));

    let beta_state = opening_state(prime, n, j, &mp.bob_side, Some(false))?;
    let beta = beta_state.amps().to_vec();
    let source =
        BipartitePureState::new(xi.dim_h(), beta.len() * dp, kron_order(&xi, &beta), 1e-9)?;
    let mut e0 = vec![ZERO; dp];
    e0[0] = ONE;
    let mut maps = Vec::new();
    for chi in &mp.corrected {
        let target_vec: Vec<_> = chi
            .vec()
            .iter()
            .flat_map(|a| e0.iter().map(move |b| a * b))
            .collect();
        let target = BipartitePureState::new(chi.dim_h(), chi.dim_k() * dp, target_vec, 1e-9)?;
        let v = exact_local_transition(&target, &source, REDUCTION_TOL)
            .map_err(|e| reduction_error(format!("message state depends on y_j: {e}")))?;
        maps.push(v);
    }

    let mut registers: Vec<Register> = prime
        .registers
        .iter()
        .map(|r| {
            if mp.message.contains(&r.label) {
                Register::message(r.label.clone(), Player::Alice)
            } else {
                r.clone()
            }
        })
        .collect();
    registers.extend(
        pur.iter()
            .map(|l| Register::message(l.clone(), Player::Alice)),
    );
    registers.extend(
        ptr.iter()
            .map(|l| Register::message(l.clone(), Player::Alice)),
    );

    let mut prep_targets = mp.message.clone();
    prep_targets.extend(pur.iter().cloned());
    prep_targets.extend(ptr.iter().cloned());
    let prep = tensor(
        &unitary_with_first_column(xi.vec()),
        &xor_oracle(0, ptr.len(), |_| j),
    )?;
    let mut answer = prime.moves[3].clone();
    answer.send.extend(pur.iter().cloned());
    answer.send.extend(ptr.iter().cloned());
    let mut map_targets = vec![y_label(j)];
    map_targets.extend(mp.bob_side.iter().cloned());
    map_targets.extend(pur.iter().cloned());

    let mut moves = vec![
        Move::matrix(Player::Alice, prep, prep_targets, Vec::new()),
        answer,
        Move::matrix(
            Player::Bob,
            controlled_blocks(1, &maps)?,
            map_targets,
            Vec::new(),
        ),
    ];
    moves.extend(prime.moves.iter().skip(4).cloned());
    let spec = ProtocolSpec {
        registers,
        matrices: prime.matrices.clone(),
        moves,
        measurement: prime.measurement.clone(),
    };
    spec.validate()?;
    Ok(DroppedProtocol {
        spec,
        purification_qubits: p,
        pointer_qubits: ptr.len(),
    })
}

/// `μ_i = I(M : y_i)` for the opening message under `input`, and its length.
pub fn message_info_budget(
    spec: &ProtocolSpec,
    input: &InputState,
    labels: &[String],
) -> Result<(Vec<f64>, usize)> {
    let first = spec
        .first_message()
        .ok_or_else(|| reduction_error("protocol sends nothing"))?;
    let mu = labels
        .iter()
        .map(|l| message_label_info(spec, input, l))
        .collect::<Result<Vec<_>>>()?;
    Ok((mu, first.qubits.len()))
}

/// Measured quantities for one pointer value.
#[derive(Debug, Clone, Serialize)]
pub struct SliceReport {
    pub j: usize,
    /// Error of `P` with the pointer fixed to `j`.
    pub eps_j: f64,
    /// Error of `P′`.
    pub delta_j: f64,
    /// Error of `P″`.
    pub delta_j_dropped: f64,
    pub mu_j: f64,
    pub mu_j_modified: f64,
    pub alignments: Vec<Alignment>,
    /// `ε_j + 2 E_z √t_z`.
    pub alignment_bound: f64,
    /// `ε_j + 4 μ_j^{1/4}`.
    pub info_bound: f64,
    pub tv: f64,
    pub rounds_modified: usize,
    pub rounds_dropped: usize,
    pub qubits_dropped: usize,
    /// `ℓ + ⌈log n⌉`.
    pub qubit_budget: usize,
}

impl SliceReport {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.mu_j_modified > ZERO_INFO_TOL {
            v.push(format!(
                "j={}: modified message information {:.3e}",
                self.j, self.mu_j_modified
            ));
        }
        if self.delta_j > self.alignment_bound + REDUCTION_TOL {
            v.push(format!("j={}: error above alignment bound", self.j));
        }
        if self.delta_j > self.info_bound + REDUCTION_TOL {
            v.push(format!("j={}: error above information bound", self.j));
        }
        if self.tv > REDUCTION_TOL {
            v.push(format!(
                "j={}: outcome distributions differ by {:.3e}",
                self.j, self.tv
            ));
        }
        if self.rounds_dropped + 1 != self.rounds_modified {
            v.push(format!("j={}: round count not reduced by one", self.j));
        }
        if self.qubits_dropped > self.qubit_budget {
            v.push(format!(
                "j={}: {} message qubits",
                self.j, self.qubits_dropped
            ));
        }
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub n: usize,
    pub slices: Vec<SliceReport>,
    /// Mean of `ε_j`.
    pub eps: f64,
    /// Mean of `δ_j`.
    pub eps_prime: f64,
    /// `ε + 4 (ℓ/n)^{1/4}`.
    pub eps_prime_bound: f64,
    /// The bound is at least one and says nothing.
    pub vacuous: bool,
    pub mu: Vec<f64>,
    pub first_message_qubits: usize,
    pub message_qubits: usize,
}

impl PipelineReport {
    pub fn mu_sum(&self) -> f64 {
        self.mu.iter().sum()
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .slices
            .iter()
            .flat_map(SliceReport::violations)
            .collect();
        if self.eps_prime > self.eps_prime_bound + REDUCTION_TOL {
            v.push("averaged error above bound".into());
        }
        if self.mu_sum() > self.first_message_qubits as f64 + ZERO_INFO_TOL {
            v.push(format!(
                "information sum {:.6} above message length",
                self.mu_sum()
            ));
        }
        v
    }
}

/// Runs `P → P′ → P″` for every pointer value and measures each step.
pub fn reduction_pipeline(spec: &ProtocolSpec, n: usize) -> Result<PipelineReport> {
    let task = SkTask::new(n);
    let ell = spec.message_qubits();
    let mut slices = Vec::new();
    for j in 0..n {
        let input = build_sk_distribution(2, n, j)?;
        let yj = y_label(j);
        let base = run_protocol(spec, &input, &task, Shots::Exact)?;
        let mp = modify_first_message(spec, n, j)?;
        let modified = run_protocol(&mp.spec, &input, &task, Shots::Exact)?;
        let dropped = drop_first_message(&mp, n)?;
        let last = run_protocol(&dropped.spec, &input, &task, Shots::Exact)?;
        let mu_j = message_label_info(spec, &input, &yj)?;
        let mu_j_modified = message_label_info(&mp.spec, &input, &yj)?;
        let mean_sqrt_t =
            mp.alignments.iter().map(|a| a.t_z.sqrt()).sum::<f64>() / mp.alignments.len() as f64;
        slices.push(SliceReport {
            j,
            eps_j: base.error,
            delta_j: modified.error,
            delta_j_dropped: last.error,
            mu_j,
            mu_j_modified,
            alignments: mp.alignments.clone(),
            alignment_bound: base.error + 2.0 * mean_sqrt_t,
            info_bound: base.error + 4.0 * mu_j.max(0.0).powf(0.25),
            tv: tv_distance(&modified, &last)?,
            rounds_modified: modified.rounds,
            rounds_dropped: last.rounds,
            qubits_dropped: last.message_qubits,
            qubit_budget: ell + ceil_log2(n),
        });
    }
    let eps = slices.iter().map(|s| s.eps_j).sum::<f64>() / n as f64;
    let eps_prime = slices.iter().map(|s| s.delta_j).sum::<f64>() / n as f64;
    let eps_prime_bound = eps + 4.0 * (ell as f64 / n as f64).powf(0.25);
    let (mu, first) = message_info_budget(spec, &sk_full_distribution(n)?, &y_labels(n))?;
    Ok(PipelineReport {
        n,
        slices,
        eps,
        eps_prime,
        eps_prime_bound,
        vacuous: eps_prime_bound >= 1.0,
        mu,
        first_message_qubits: first,
        message_qubits: ell,
    })
}

/// Registers of `spec` with the given role.
pub fn registers_with_role(spec: &ProtocolSpec, role: Role) -> Vec<String> {
    spec.registers
        .iter()
        .filter(|r| r.role == role)
        .map(|r| r.label.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protosim::sk::{copy_instance, random_first_message_protocol, toy_instances};
    use crate::qstate::derive_seed;

    #[test]
    fn copy_instance_pipeline() {
        let inst = copy_instance(2).unwrap();
        let r = reduction_pipeline(&inst.spec, 2).unwrap();
        assert!(r.violations().is_empty(), "{:?}", r.violations());
        assert!((r.slices[0].mu_j - 1.0).abs() < 1e-9);
        assert!(r.slices[1].mu_j.abs() < 1e-9);
        // the slice whose message ignores y_j keeps its error
        assert!((r.slices[1].delta_j - r.slices[1].eps_j).abs() < 1e-12);
        assert!((r.mu_sum() - 1.0).abs() < 1e-9);
        assert_eq!(r.first_message_qubits, 1);
    }

    #[test]
    fn modified_message_is_independent() {
        for inst in toy_instances(2, 3).unwrap() {
            for j in 0..2 {
                let mp = modify_first_message(&inst.spec, 2, j).unwrap();
                let input = build_sk_distribution(2, 2, j).unwrap();
                let mu = message_label_info(&mp.spec, &input, &y_label(j)).unwrap();
                assert!(mu.abs() < 1e-9, "{} j={j}: {mu}", inst.name);
                assert_eq!(
                    registers_with_role(&mp.spec, Role::BobInput),
                    vec![y_label(j)]
                );
            }
        }
    }

    #[test]
    fn dropped_protocol_matches_modified() {
        for inst in toy_instances(2, 4).unwrap() {
            let r = reduction_pipeline(&inst.spec, 2).unwrap();
            assert!(
                r.violations().is_empty(),
                "{}: {:?}",
                inst.name,
                r.violations()
            );
            for s in &r.slices {
                assert!((s.delta_j - s.delta_j_dropped).abs() < 1e-8);
                assert_eq!(s.rounds_dropped, 1);
            }
        }
    }

    #[test]
    fn opening_message_must_come_from_bob() {
        let alice_first = crate::protosim::rac::optimal_rac(2).unwrap();
        assert!(matches!(
            modify_first_message(&alice_first, 2, 0),
            Err(Error::Reduction(_))
        ));
        let mut inst = copy_instance(2).unwrap();
        inst.spec.moves.remove(0);
        assert!(modify_first_message(&inst.spec, 2, 0).is_err());
    }

    #[test]
    fn information_budget_sweep() {
        for s in 0..20 {
            let spec = random_first_message_protocol(3, derive_seed(9, s)).unwrap();
            let ys = y_labels(3);
            let input = InputState::uniform(&ys, &Default::default(), Vec::new()).unwrap();
            let (mu, ell1) = message_info_budget(&spec, &input, &ys).unwrap();
            assert_eq!(ell1, 1);
            assert!(mu.iter().sum::<f64>() <= 1.0 + 1e-9);
            assert!(mu.iter().all(|&m| m >= -1e-12));
        }
    }
}
