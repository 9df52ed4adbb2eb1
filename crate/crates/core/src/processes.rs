//! Decoherence and observation.
//!
//! Decoherence is Schur multiplication by an environment overlap matrix,
//! `ρ ↦ ρ ∘ E`. Observation through a probing matrix `S` is the quantum Bayes
//! update
//!
//! ```text
//! p_k = Σ_i ρ_ii |S_ik|²,     ρ^(k)_ij = ρ_ij S_ik S*_jk / p_k,
//! ```
//!
//! and averaging its outcomes reproduces decoherence by `F = S S†`.

use crate::error::{Error, Result};
use crate::matcore::{
    c64, hermitian_spectrum, partial_trace, schur_product, tensor_product, ComplexMatrix, Keep, C64, DEFAULT_TOL,
};
use crate::states::{
    common_dim, density_from_pure, DensityMatrix, GramMatrix, OutcomeEnsemble, ProbingMatrix, ProjectorSet, PureState,
    PROBABILITY_FLOOR,
};

/// Columns shorter than this are discarded while completing a block unitary.
const COMPLETION_FLOOR: f64 = 1e-8;

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            left: (a, a),
            right: (b, b),
        })
    }
}

/// `ρ ∘ E`.
pub fn decohere(rho: &DensityMatrix, e: &GramMatrix) -> Result<DensityMatrix> {
    same_dim(rho.dim(), e.dim())?;
    DensityMatrix::new(schur_product(rho.matrix(), e.matrix())?)
}

/// Quantum Bayes update: one outcome per column of `S`.
///
/// Outcomes with `p_k < 1e-12` are kept with probability zero and no state.
pub fn observe(rho: &DensityMatrix, s: &ProbingMatrix) -> Result<OutcomeEnsemble> {
    let n = rho.dim();
    if s.object_dim() != n {
        return Err(Error::ShapeMismatch {
            left: rho.matrix().shape(),
            right: s.matrix().shape(),
        });
    }
    let r = rho.matrix();
    let sm = s.matrix();
    let mut outcomes = Vec::with_capacity(s.outcomes());
    for k in 0..s.outcomes() {
        let p: f64 = (0..n).map(|i| r.get(i, i).re * sm.get(i, k).norm_sqr()).sum();
        if p < PROBABILITY_FLOOR {
            outcomes.push((p.max(0.0), None));
            continue;
        }
        let post = ComplexMatrix::from_fn(n, n, |i, j| r.get(i, j) * sm.get(i, k) * sm.get(j, k).conj() / p);
        outcomes.push((p, Some(DensityMatrix::new(post)?)));
    }
    OutcomeEnsemble::new(outcomes)
}

/// `F = S S†`.
pub fn response_gram(s: &ProbingMatrix) -> GramMatrix {
    let sm = s.matrix();
    let mut f = sm * &sm.adjoint();
    // Unit rows: pin the diagonal to exactly one.
    f = ComplexMatrix::from_fn(
        f.rows(),
        f.cols(),
        |i, j| {
            if i == j {
                c64(1.0, 0.0)
            } else {
                f.get(i, j)
            }
        },
    );
    GramMatrix::new(f).expect("S S† of a unit-row matrix is a Gram matrix")
}

/// `Σ_k p_k ρ^(k)` over live outcomes.
pub fn ensemble_average(ens: &OutcomeEnsemble) -> Result<DensityMatrix> {
    let n = ens.dim();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (p, state) in ens.live() {
        acc = &acc + &state.matrix().scale(p);
    }
    DensityMatrix::new(acc)
}

/// Lüders projection (pinching) `Σ_k P_k ρ P_k`.
pub fn luders(rho: &DensityMatrix, ps: &ProjectorSet) -> Result<DensityMatrix> {
    same_dim(rho.dim(), ps.dim())?;
    let n = rho.dim();
    let mut acc = ComplexMatrix::zeros(n, n);
    for p in ps.projectors() {
        acc = &acc + &(&(p * rho.matrix()) * p);
    }
    DensityMatrix::new(acc)
}

/// The diagonal part of `ρ`: decoherence with `E = I`.
pub fn von_neumann_reduce(rho: &DensityMatrix) -> DensityMatrix {
    decohere(rho, &GramMatrix::identity(rho.dim())).expect("dimensions agree by construction")
}

/// True when every live outcome of `observe(ρ, S)` has the spectrum of `ρ`
/// within `tol`, i.e. each outcome equals `ρ` up to a unitary.
pub fn is_trivial_probing_for(rho: &DensityMatrix, s: &ProbingMatrix, tol: f64) -> Result<bool> {
    let before = rho.spectrum();
    let ens = observe(rho, s)?;
    let trivial = ens.live().all(|(_, post)| post.spectrum().max_abs_diff(&before) <= tol);
    Ok(trivial)
}

/// True when `ρ ∘ E` has the spectrum of `ρ` within `tol`.
pub fn is_trivial_decoherence_for(rho: &DensityMatrix, e: &GramMatrix, tol: f64) -> Result<bool> {
    let after = decohere(rho, e)?;
    Ok(hermitian_spectrum(after.matrix(), DEFAULT_TOL)?.max_abs_diff(&rho.spectrum()) <= tol)
}

/// Joint unitary on object ⊗ ancilla realizing a probing:
/// `U (|o_i⟩ ⊗ |e*⟩) = |o_i⟩ ⊗ |ε_i⟩` with `|e*⟩` the first ancilla basis
/// vector.
///
/// `U` is block diagonal; block `i` is a `d × d` unitary whose first column
/// is `ε_i`, completed by Gram-Schmidt against the standard basis.
pub fn probing_joint_unitary(responses: &[PureState]) -> Result<ComplexMatrix> {
    let d = common_dim(responses)?;
    let n = responses.len();
    let blocks = responses
        .iter()
        .map(|r| complete_unitary(r.amplitudes()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexMatrix::from_fn(n * d, n * d, |r, c| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        if i == j {
            blocks[i][b][a]
        } else {
            C64::default()
        }
    }))
}

/// Columns of a unitary whose first column is `first`.
fn complete_unitary(first: &[C64]) -> Result<Vec<Vec<C64>>> {
    let d = first.len();
    let mut columns: Vec<Vec<C64>> = vec![first.to_vec()];
    for basis_index in 0..d {
        if columns.len() == d {
            break;
        }
        let mut v = vec![C64::default(); d];
        v[basis_index] = c64(1.0, 0.0);
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for q in &columns {
                let overlap: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= overlap * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < COMPLETION_FLOOR {
            continue;
        }
        columns.push(v.into_iter().map(|z| z / norm).collect());
    }
    if columns.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "could only complete {} of {d} orthonormal columns",
            columns.len()
        )));
    }
    Ok(columns)
}

/// Object-side state after the probing unitary acts on `ρ ⊗ |e*⟩⟨e*|` and
/// the ancilla is discarded.
pub fn reduced_after_probing(rho: &DensityMatrix, responses: &[PureState]) -> Result<DensityMatrix> {
    let d = common_dim(responses)?;
    same_dim(rho.dim(), responses.len())?;
    let u = probing_joint_unitary(responses)?;
    let ancilla = density_from_pure(&PureState::basis(d, 0));
    let joint = tensor_product(rho.matrix(), ancilla.matrix());
    let evolved = &(&u * &joint) * &u.adjoint();
    DensityMatrix::new(partial_trace(&evolved, rho.dim(), d, Keep::First)?.hermitian_part())
}
