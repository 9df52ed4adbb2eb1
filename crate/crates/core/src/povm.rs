//! Generalized measurements realized by an ancilla, a joint unitary and a
//! projective measurement on object ⊗ ancilla.
//!
//! For outcome `k` the unnormalized object state is
//!
//! ```text
//! χ_k(ρ) = tr_A( P_k U (ρ ⊗ ρ_A) U† P_k ),   p_k = tr χ_k(ρ),   ρ_k = χ_k / p_k.
//! ```
//!
//! The projector is applied on both sides. For projectors of the form
//! `I ⊗ Π` this coincides with the one-sided `tr_A(P_k X)`; for entangled
//! projectors only the two-sided form yields a positive conditional state.
//!
//! All joint operators use object-first ordering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    hermitian_eigen, is_unitary, partial_trace, tensor_product, ComplexMatrix, Keep, C64, DEFAULT_TOL,
};
use crate::processes::probing_joint_unitary;
use crate::states::{
    common_dim, density_from_pure, purity, DensityMatrix, OutcomeEnsemble, ProjectorSet, PureState, PROBABILITY_FLOOR,
};

/// Residual threshold for the structural purity-preservation test.
pub const PPPOVM_TOL: f64 = 1e-8;

/// A dilated measurement: ancilla state, joint unitary, joint projectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmJson", into = "PovmJson")]
pub struct Povm {
    object_dim: usize,
    ancilla_dim: usize,
    ancilla_state: DensityMatrix,
    unitary: ComplexMatrix,
    projectors: ProjectorSet,
}

/// `{"object_dim", "ancilla_dim", "ancilla_state", "unitary", "projectors"}`.
#[derive(Serialize, Deserialize)]
struct PovmJson {
    object_dim: usize,
    ancilla_dim: usize,
    ancilla_state: ComplexMatrix,
    unitary: ComplexMatrix,
    projectors: Vec<ComplexMatrix>,
}

impl TryFrom<PovmJson> for Povm {
    type Error = Error;

    fn try_from(v: PovmJson) -> Result<Self> {
        Povm::new(
            v.object_dim,
            v.ancilla_dim,
            DensityMatrix::new(v.ancilla_state)?,
            v.unitary,
            ProjectorSet::new(v.projectors)?,
        )
    }
}

impl From<Povm> for PovmJson {
    fn from(m: Povm) -> Self {
        PovmJson {
            object_dim: m.object_dim,
            ancilla_dim: m.ancilla_dim,
            ancilla_state: m.ancilla_state.into_matrix(),
            unitary: m.unitary,
            projectors: m.projectors.projectors().to_vec(),
        }
    }
}

impl Povm {
    pub fn new(
        object_dim: usize,
        ancilla_dim: usize,
        ancilla_state: DensityMatrix,
        unitary: ComplexMatrix,
        projectors: ProjectorSet,
    ) -> Result<Self> {
        let joint = object_dim * ancilla_dim;
        if joint == 0 {
            return Err(Error::DimensionMismatch("zero-dimensional factor".into()));
        }
        if ancilla_state.dim() != ancilla_dim {
            return Err(Error::DimensionMismatch(format!(
                "ancilla state has dimension {}, expected {ancilla_dim}",
                ancilla_state.dim()
            )));
        }
        if unitary.shape() != (joint, joint) {
            return Err(Error::ShapeMismatch {
                left: (joint, joint),
                right: unitary.shape(),
            });
        }
        if !is_unitary(&unitary, DEFAULT_TOL)? {
            let residual = (&(&unitary.adjoint() * &unitary) - &ComplexMatrix::identity(joint)).max_norm();
            return Err(Error::Invariant {
                kind: "povm",
                invariant: "unitary",
                residual,
            });
        }
        if projectors.dim() != joint {
            return Err(Error::DimensionMismatch(format!(
                "projectors act on dimension {}, expected {joint}",
                projectors.dim()
            )));
        }
        Ok(Self {
            object_dim,
            ancilla_dim,
            ancilla_state,
            unitary,
            projectors,
        })
    }

    pub fn object_dim(&self) -> usize {
        self.object_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn ancilla_state(&self) -> &DensityMatrix {
        &self.ancilla_state
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn projectors(&self) -> &ProjectorSet {
        &self.projectors
    }

    pub fn has_pure_ancilla(&self) -> bool {
        (purity(&self.ancilla_state) - 1.0).abs() <= DEFAULT_TOL
    }

    /// Equivalent measurement with a pure ancilla of dimension `d²`:
    /// `ρ_A` is replaced by its purification and `U`, `P_k` act as the
    /// identity on the added copy.
    pub fn purified(&self) -> Result<Povm> {
        let d = self.ancilla_dim;
        let pure = purify_ancilla(&self.ancilla_state);
        let id = ComplexMatrix::identity(d);
        let projectors = self
            .projectors
            .projectors()
            .iter()
            .map(|p| tensor_product(p, &id))
            .collect();
        Povm::new(
            self.object_dim,
            d * d,
            density_from_pure(&pure),
            tensor_product(&self.unitary, &id),
            ProjectorSet::new(projectors)?,
        )
    }
}

/// Applies a dilated measurement to `ρ`.
///
/// Mixed ancillas are purified first. Zero-probability outcomes are kept with
/// `p = 0` and no state.
pub fn apply_povm(rho: &DensityMatrix, m: &Povm) -> Result<OutcomeEnsemble> {
    if rho.dim() != m.object_dim {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} given to a POVM on dimension {}",
            rho.dim(),
            m.object_dim
        )));
    }
    if !m.has_pure_ancilla() {
        return apply_povm(rho, &m.purified()?);
    }
    let joint = tensor_product(rho.matrix(), m.ancilla_state.matrix());
    let evolved = &(&m.unitary * &joint) * &m.unitary.adjoint();
    let mut outcomes = Vec::with_capacity(m.projectors.len());
    for p in m.projectors.projectors() {
        let projected = &(p * &evolved) * p;
        let chi = partial_trace(&projected, m.object_dim, m.ancilla_dim, Keep::First)?;
        let prob = chi.trace().re;
        if prob < PROBABILITY_FLOOR {
            outcomes.push((prob.max(0.0), None));
            continue;
        }
        let state = DensityMatrix::new(chi.hermitian_part().scale(1.0 / prob))?;
        outcomes.push((prob, Some(state)));
    }
    OutcomeEnsemble::new(outcomes)
}

/// The ancilla basis `{|a_k⟩}` when every projector is `I ⊗ |a_k⟩⟨a_k|`
/// within `tol` and the recovered vectors are orthonormal; `None` otherwise.
pub fn purity_preserving_basis(m: &Povm, tol: f64) -> Option<Vec<PureState>> {
    let n = m.object_dim;
    let d = m.ancilla_dim;
    let id = ComplexMatrix::identity(n);
    let mut basis = Vec::with_capacity(m.projectors.len());
    for p in m.projectors.projectors() {
        // tr_O(I ⊗ Π) = n Π.
        let reduced = partial_trace(p, n, d, Keep::Second).ok()?.scale(1.0 / n as f64);
        let (_, vectors) = hermitian_eigen(&reduced, tol).ok()?;
        let a = PureState::normalized(vectors.into_iter().next()?).ok()?;
        let rank_one = ComplexMatrix::outer(a.amplitudes(), a.amplitudes());
        if reduced.max_abs_diff(&rank_one) > tol {
            return None;
        }
        if p.max_abs_diff(&tensor_product(&id, &rank_one)) > tol {
            return None;
        }
        basis.push(a);
    }
    for (k, a) in basis.iter().enumerate() {
        for b in &basis[k + 1..] {
            if a.inner(b).norm() > tol {
                return None;
            }
        }
    }
    Some(basis)
}

/// Structural purity-preservation test: every joint projector has the form
/// `I ⊗ |a_k⟩⟨a_k|` for an orthonormal ancilla family.
pub fn is_purity_preserving(m: &Povm, tol: f64) -> bool {
    purity_preserving_basis(m, tol).is_some()
}

fn bell_states() -> [PureState; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: [f64; 4]| PureState::new(a.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap();
    [
        v([h, 0.0, 0.0, h]),
        v([h, 0.0, 0.0, -h]),
        v([0.0, h, h, 0.0]),
        v([0.0, h, -h, 0.0]),
    ]
}

/// Bell-basis measurement with `U = I` and ancilla `|0⟩`, applied to `|0⟩⟨0|`.
///
/// Entropy rises from 0 to ln 2, so observation-side entropy decrease fails.
pub fn counterexample_1() -> (Povm, DensityMatrix) {
    let zero = density_from_pure(&PureState::basis(2, 0));
    let projectors = ProjectorSet::from_basis(&bell_states()).expect("Bell basis is orthonormal");
    let povm = Povm::new(2, 2, zero.clone(), ComplexMatrix::identity(4), projectors).expect("valid by construction");
    (povm, zero)
}

/// Swap gate with ancilla `|0⟩` and projectors `I ⊗ |0⟩⟨0|`, `I ⊗ |1⟩⟨1|`,
/// applied to `I/2`.
///
/// The average post-measurement state is pure, so decoherence-side entropy
/// increase fails, while the measurement is purity preserving.
pub fn counterexample_2() -> (Povm, DensityMatrix) {
    let swap = ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ]);
    let id = ComplexMatrix::identity(2);
    let projectors = ProjectorSet::new(vec![
        tensor_product(&id, &ComplexMatrix::from_diagonal(&[1.0, 0.0])),
        tensor_product(&id, &ComplexMatrix::from_diagonal(&[0.0, 1.0])),
    ])
    .expect("complete by construction");
    let ancilla = density_from_pure(&PureState::basis(2, 0));
    let povm = Povm::new(2, 2, ancilla, swap, projectors).expect("valid by construction");
    (povm, DensityMatrix::maximally_mixed(2))
}

/// Lifts a probing with responses `|a_i⟩` to a measurement: the joint
/// unitary of [`probing_joint_unitary`], ancilla `|0⟩`, and projectors
/// `I ⊗ |k⟩⟨k|` over the ancilla basis.
pub fn probing_as_povm(responses: &[PureState]) -> Result<Povm> {
    let d = common_dim(responses)?;
    let n = responses.len();
    let unitary = probing_joint_unitary(responses)?;
    let id = ComplexMatrix::identity(n);
    let projectors = (0..d)
        .map(|k| {
            let e = PureState::basis(d, k);
            tensor_product(&id, &density_from_pure(&e).into_matrix())
        })
        .collect();
    Povm::new(
        n,
        d,
        density_from_pure(&PureState::basis(d, 0)),
        unitary,
        ProjectorSet::new(projectors)?,
    )
}

/// Purification `Σ_i √w_i |a_i⟩ ⊗ |a_i⟩` of `ρ_A = Σ_i w_i |a_i⟩⟨a_i|`.
///
/// Tracing out the second factor returns `ρ_A`.
pub fn purify_ancilla(rho_a: &DensityMatrix) -> PureState {
    let d = rho_a.dim();
    let (weights, vectors) =
        hermitian_eigen(rho_a.matrix(), DEFAULT_TOL).expect("validated density matrix is Hermitian");
    let mut amp = vec![C64::default(); d * d];
    for (w, a) in weights.values().iter().zip(&vectors) {
        let s = w.max(0.0).sqrt();
        for i in 0..d {
            for j in 0..d {
                amp[i * d + j] += a[i] * a[j] * s;
            }
        }
    }
    PureState::normalized(amp).expect("purification of a unit-trace state is nonzero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{entropy, expected_entropy, EntropyFunctional};
    use crate::matcore::c64;
    use crate::processes::{ensemble_average, observe};
    use crate::states::ProbingMatrix;
    use std::f64::consts::LN_2;

    #[test]
    fn counterexample_1_outcomes() {
        let (m, rho) = counterexample_1();
        let ens = apply_povm(&rho, &m).unwrap();
        let p = ens.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        assert_eq!(&p[2..], &[0.0, 0.0]);
        for (_, state) in ens.live() {
            assert!(state.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-12);
        }
        let vn = EntropyFunctional::VonNeumann;
        assert!(entropy(&rho, &vn).unwrap().abs() < 1e-12);
        assert!((expected_entropy(&ens, &vn).unwrap() - LN_2).abs() < 1e-12);
        assert!(!is_purity_preserving(&m, PPPOVM_TOL));
    }

    #[test]
    fn counterexample_2_outcomes() {
        let (m, rho) = counterexample_2();
        let ens = apply_povm(&rho, &m).unwrap();
        assert_eq!(ens.probabilities().len(), 2);
        let zero = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        for (p, state) in ens.live() {
            assert!((p - 0.5).abs() < 1e-12);
            assert!(state.matrix().max_abs_diff(&zero) < 1e-12);
        }
        let vn = EntropyFunctional::VonNeumann;
        let avg = ensemble_average(&ens).unwrap();
        assert!(entropy(&avg, &vn).unwrap().abs() < 1e-12);
        assert!((entropy(&rho, &vn).unwrap() - LN_2).abs() < 1e-12);
        let basis = purity_preserving_basis(&m, PPPOVM_TOL).unwrap();
        assert!((basis[0].amplitudes()[0].norm() - 1.0).abs() < 1e-12);
        assert!((basis[1].amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn counterexample_2_renyi_still_drops() {
        let (m, rho) = counterexample_2();
        let r2 = EntropyFunctional::renyi(2.0).unwrap();
        let before = entropy(&rho, &r2).unwrap();
        let after = entropy(&ensemble_average(&apply_povm(&rho, &m).unwrap()).unwrap(), &r2).unwrap();
        assert!((before + 0.5).abs() < 1e-12);
        assert!((after + 1.0).abs() < 1e-12);
    }

    fn responses() -> Vec<PureState> {
        vec![
            PureState::normalized(vec![c64(0.3, 0.1), c64(-0.2, 0.9), c64(0.0, 0.4)]).unwrap(),
            PureState::basis(3, 1),
        ]
    }

    #[test]
    fn probing_povm_matches_observe() {
        let rs = responses();
        let m = probing_as_povm(&rs).unwrap();
        assert!(is_purity_preserving(&m, PPPOVM_TOL));
        let rho = DensityMatrix::new(ComplexMatrix::from_rows(&[
            vec![c64(0.6, 0.0), c64(0.2, -0.1)],
            vec![c64(0.2, 0.1), c64(0.4, 0.0)],
        ]))
        .unwrap();
        let via_povm = apply_povm(&rho, &m).unwrap();
        let via_observe = observe(&rho, &ProbingMatrix::from_responses(&rs).unwrap()).unwrap();
        assert_eq!(via_povm.len(), via_observe.len());
        for (a, b) in via_povm.outcomes().iter().zip(via_observe.outcomes()) {
            assert!((a.probability - b.probability).abs() < 1e-12);
            match (&a.state, &b.state) {
                (Some(x), Some(y)) => assert!(x.matrix().max_abs_diff(y.matrix()) < 1e-12),
                (None, None) => {}
                _ => panic!("live/dead mismatch"),
            }
        }
    }

    #[test]
    fn orthonormal_responses_give_complete_measurement() {
        let rs: Vec<_> = (0..3).map(|i| PureState::basis(3, i)).collect();
        let m = probing_as_povm(&rs).unwrap();
        let rho = DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap();
        for (_, state) in apply_povm(&rho, &m).unwrap().live() {
            assert!((purity(state) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_responses_leave_state_unchanged() {
        let r = PureState::normalized(vec![c64(1.0, 0.0), c64(0.0, 1.0)]).unwrap();
        let m = probing_as_povm(&[r.clone(), r]).unwrap();
        let rho = DensityMatrix::new(ComplexMatrix::from_rows(&[
            vec![c64(0.6, 0.0), c64(0.2, -0.1)],
            vec![c64(0.2, 0.1), c64(0.4, 0.0)],
        ]))
        .unwrap();
        let ens = apply_povm(&rho, &m).unwrap();
        let avg = ensemble_average(&ens).unwrap();
        assert!(avg.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        for (_, state) in ens.live() {
            assert!(state.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        }
    }

    #[test]
    fn purification_round_trips() {
        let pure = density_from_pure(&PureState::normalized(vec![c64(0.6, 0.0), c64(0.0, 0.8)]).unwrap());
        let mixed = DensityMatrix::maximally_mixed(2);
        let generic = DensityMatrix::new(ComplexMatrix::from_rows(&[
            vec![c64(0.5, 0.0), c64(0.1, 0.2), c64(0.0, 0.0)],
            vec![c64(0.1, -0.2), c64(0.3, 0.0), c64(0.05, 0.0)],
            vec![c64(0.0, 0.0), c64(0.05, 0.0), c64(0.2, 0.0)],
        ]))
        .unwrap();
        for rho_a in [pure, mixed.clone(), generic] {
            let d = rho_a.dim();
            let psi = purify_ancilla(&rho_a);
            let full = density_from_pure(&psi);
            let reduced = partial_trace(full.matrix(), d, d, Keep::First).unwrap();
            assert!(reduced.max_abs_diff(rho_a.matrix()) < 1e-10);
        }
        // I/2 purifies to a maximally entangled state.
        let psi = purify_ancilla(&mixed);
        let reduced = partial_trace(density_from_pure(&psi).matrix(), 2, 2, Keep::Second).unwrap();
        assert!(reduced.max_abs_diff(mixed.matrix()) < 1e-12);
    }

    #[test]
    fn mixed_ancilla_matches_direct_formula() {
        let (m, _) = counterexample_2();
        let ancilla = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let mixed = Povm::new(2, 2, ancilla.clone(), m.unitary().clone(), m.projectors().clone()).unwrap();
        let rho = DensityMatrix::new(ComplexMatrix::from_rows(&[
            vec![c64(0.6, 0.0), c64(0.2, -0.1)],
            vec![c64(0.2, 0.1), c64(0.4, 0.0)],
        ]))
        .unwrap();
        let ens = apply_povm(&rho, &mixed).unwrap();
        // Oracle: evaluate with the mixed ancilla directly, no purification.
        let joint = tensor_product(rho.matrix(), ancilla.matrix());
        let u = m.unitary();
        let evolved = &(u * &joint) * &u.adjoint();
        for (p, outcome) in m.projectors().projectors().iter().zip(ens.outcomes()) {
            let chi = partial_trace(&(&(p * &evolved) * p), 2, 2, Keep::First).unwrap();
            let prob = chi.trace().re;
            assert!((prob - outcome.probability).abs() < 1e-12);
            let state = outcome.state.as_ref().unwrap();
            assert!(state.matrix().max_abs_diff(&chi.scale(1.0 / prob)) < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let (m, _) = counterexample_1();
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["object_dim"], 2);
        assert_eq!(json["ancilla_dim"], 2);
        assert_eq!(json["projectors"].as_array().unwrap().len(), 4);
        let back: Povm = serde_json::from_value(json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_non_unitary() {
        let (m, _) = counterexample_2();
        let err = Povm::new(
            2,
            2,
            m.ancilla_state().clone(),
            ComplexMatrix::from_diagonal(&[1.0, 1.0, 1.0, 0.5]),
            m.projectors().clone(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Invariant {
                invariant: "unitary",
                ..
            }
        ));
    }
}
