//! Seeded random generation of test objects.
//!
//! All randomness flows from a [`SeedStream`]: a root seed plus a stream
//! index. Trial `i` of a campaign draws from stream `i`, so results do not
//! depend on how trials are scheduled across threads. The generator is
//! ChaCha20, which produces the same sequence on every platform.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matcore::{c64, tensor_product, ComplexMatrix, C64};
use crate::povm::Povm;
use crate::states::{
    density_from_pure, gram_from_vectors, DensityMatrix, GramMatrix, ProbingMatrix, ProjectorSet, PureState,
};

/// Root seed plus stream index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedStream {
    seed: u64,
    stream: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Stream reserved for trial `index`.
    pub fn trial(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: index,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n × m` Ginibre matrix.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    // Fill row-major so the draw order matches the wire layout.
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(complex_gaussian(rng));
    }
    ComplexMatrix::new(rows, cols, data).expect("gaussian samples are finite")
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "dimension must be positive");
    let g: DMatrix<C64> = ginibre(n, n, rng).as_dmatrix().clone();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix(q)
}

/// Hilbert–Schmidt random state `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    assert!(n >= 1, "dimension must be positive");
    let g = ginibre(n, n, rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(w.hermitian_part().scale(1.0 / tr)).expect("G G† is PSD")
}

/// Hermitian matrix `(G + G†) / 2`, for spectral theorems that do not need
/// positivity.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    ginibre(n, n, rng).hermitian_part()
}

pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PureState {
    assert!(n >= 1, "dimension must be positive");
    loop {
        let amp: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        if let Ok(v) = PureState::normalized(amp) {
            return v;
        }
    }
}

/// Gram matrix of `n` random responses in dimension `d`.
///
/// `d = 1` gives phase-only responses (rank one, trivial decoherence); large
/// `d` approaches the identity.
pub fn random_gram<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> GramMatrix {
    let responses: Vec<_> = (0..n).map(|_| random_pure(d, rng)).collect();
    gram_from_vectors(&responses).expect("responses share a dimension")
}

/// `n` rows, each an independent random unit vector of length `m`.
pub fn random_probing<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> ProbingMatrix {
    let rows: Vec<_> = (0..n).map(|_| random_pure(m, rng)).collect();
    ProbingMatrix::from_responses(&rows).expect("unit rows")
}

fn check_blocks(n: usize, blocks: &[usize]) -> Result<()> {
    if blocks.is_empty() || blocks.contains(&0) || blocks.iter().sum::<usize>() != n {
        return Err(Error::InvalidPartition(format!("{blocks:?} does not partition {n}")));
    }
    Ok(())
}

/// Random composition of `n` into positive block sizes.
pub fn random_block_sizes<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut blocks = vec![1];
    for _ in 1..n {
        if rng.random_bool(0.5) {
            blocks.push(1);
        } else {
            *blocks.last_mut().unwrap() += 1;
        }
    }
    blocks
}

/// Contiguous diagonal block projectors.
pub fn diagonal_partition(n: usize, blocks: &[usize]) -> Result<ProjectorSet> {
    check_blocks(n, blocks)?;
    let mut start = 0;
    let projectors = blocks
        .iter()
        .map(|&size| {
            let diag: Vec<f64> = (0..n)
                .map(|i| if (start..start + size).contains(&i) { 1.0 } else { 0.0 })
                .collect();
            start += size;
            ComplexMatrix::from_diagonal(&diag)
        })
        .collect();
    ProjectorSet::new(projectors)
}

/// Diagonal projectors onto a random assignment of basis indices to
/// `blocks` nonempty groups.
pub fn random_diagonal_partition<R: Rng + ?Sized>(n: usize, blocks: usize, rng: &mut R) -> Result<ProjectorSet> {
    if blocks == 0 || blocks > n {
        return Err(Error::InvalidPartition(format!("{blocks} blocks for dimension {n}")));
    }
    let mut labels: Vec<usize> = (0..n)
        .map(|i| if i < blocks { i } else { rng.random_range(0..blocks) })
        .collect();
    // Fisher-Yates so the guaranteed representatives land anywhere.
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let projectors = (0..blocks)
        .map(|b| {
            let diag: Vec<f64> = labels.iter().map(|&l| if l == b { 1.0 } else { 0.0 }).collect();
            ComplexMatrix::from_diagonal(&diag)
        })
        .collect();
    ProjectorSet::new(projectors)
}

/// Block partition `blocks` of dimension `n`, rotated by a Haar unitary.
pub fn random_projector_partition<R: Rng + ?Sized>(n: usize, blocks: &[usize], rng: &mut R) -> Result<ProjectorSet> {
    let diagonal = diagonal_partition(n, blocks)?;
    let u = haar_unitary(n, rng);
    let ud = u.adjoint();
    let projectors = diagonal
        .projectors()
        .iter()
        .map(|p| (&(&u * p) * &ud).hermitian_part())
        .collect();
    ProjectorSet::new(projectors)
}

/// Ensemble weights from normalized exponentials (flat Dirichlet).
pub fn random_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Purity-preserving measurement: Haar joint unitary, random pure ancilla and
/// projectors `I ⊗ |a_k⟩⟨a_k|` for a Haar-random ancilla basis.
pub fn random_pppovm<R: Rng + ?Sized>(object_dim: usize, ancilla_dim: usize, rng: &mut R) -> Povm {
    let unitary = haar_unitary(object_dim * ancilla_dim, rng);
    let ancilla = density_from_pure(&random_pure(ancilla_dim, rng));
    let basis = haar_unitary(ancilla_dim, rng);
    let id = ComplexMatrix::identity(object_dim);
    let projectors = (0..ancilla_dim)
        .map(|k| {
            let a = basis.column(k);
            tensor_product(&id, &ComplexMatrix::outer(&a, &a)).hermitian_part()
        })
        .collect();
    Povm::new(
        object_dim,
        ancilla_dim,
        ancilla,
        unitary,
        ProjectorSet::new(projectors).expect("rotated basis projectors are complete"),
    )
    .expect("valid by construction")
}

/// Measurement whose joint projectors are a Haar-rotated partition of the
/// joint space into rank-`object_dim` blocks; generically not of product form.
pub fn random_general_povm<R: Rng + ?Sized>(object_dim: usize, ancilla_dim: usize, rng: &mut R) -> Povm {
    let joint = object_dim * ancilla_dim;
    let unitary = haar_unitary(joint, rng);
    let ancilla = density_from_pure(&random_pure(ancilla_dim, rng));
    let blocks = vec![object_dim; ancilla_dim];
    let projectors = random_projector_partition(joint, &blocks, rng).expect("blocks partition the joint space");
    Povm::new(object_dim, ancilla_dim, ancilla, unitary, projectors).expect("valid by construction")
}
