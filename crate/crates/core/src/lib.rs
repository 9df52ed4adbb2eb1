//! # qentropy
//!
//! Entropy inequalities for decoherence and observation of finite-dimensional
//! quantum states.
//!
//! For a density matrix `ρ`, a probing matrix `S` with unit rows and any
//! concave entropy `S(ρ) = tr h(ρ)`:
//!
//! ```text
//! Σ_k p_k S(ρ^(k))  ≤  S(ρ)  ≤  S(ρ ∘ S S†)
//! ```
//!
//! Observation (the quantum Bayes update) lowers entropy on average, and
//! decoherence (Schur multiplication by a Gram matrix) raises it. Both follow
//! from spectral majorization. General measurements break both bounds;
//! purity-preserving measurements keep only the observation side.
//!
//! Modules:
//!
//! - [`matcore`]: dense complex matrices, Hermitian spectra, Schur/Kronecker
//!   products, partial trace.
//! - [`states`]: validated density, pure, Gram, probing, projector and
//!   ensemble types.
//! - [`processes`]: decoherence, observation, Lüders projection, triviality.
//! - [`entropy`]: concave entropy functionals.
//! - [`majorization`]: majorization and the spectral theorem checks.
//! - [`povm`]: dilated measurements, purity preservation, counterexamples.
//! - [`sampling`]: seeded random objects.

#![forbid(unsafe_code)]

pub mod entropy;
pub mod error;
pub mod majorization;
pub mod matcore;
pub mod povm;
pub mod processes;
pub mod sampling;
pub mod states;

pub use entropy::EntropyFunctional;
pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, Spectrum, C64};
pub use povm::Povm;
pub use states::{DensityMatrix, GramMatrix, OutcomeEnsemble, ProbingMatrix, ProjectorSet, PureState};
