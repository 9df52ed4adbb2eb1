//! Validated physical objects: density matrices, pure states, Gram matrices,
//! probing matrices, projector families and outcome ensembles.
//!
//! Every constructor checks its invariants once; afterwards the values are
//! immutable and can be shared freely. A failed check reports which invariant
//! broke and by how much.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c64, hermitian_spectrum, ComplexMatrix, Spectrum, C64, DEFAULT_TOL};

/// Tolerance for idempotence, orthogonality and completeness of projectors.
pub const PROJECTOR_TOL: f64 = 1e-9;

/// Probabilities below this are clamped to zero.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Tolerance on the sum of outcome probabilities.
pub const PROBABILITY_SUM_TOL: f64 = 1e-10;

fn invariant(kind: &'static str, invariant: &'static str, residual: f64) -> Error {
    Error::Invariant {
        kind,
        invariant,
        residual,
    }
}

fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.rows())
}

fn check_hermitian_psd(kind: &'static str, m: &ComplexMatrix) -> Result<Spectrum> {
    require_square(m)?;
    let residual = m.hermiticity_residual()?;
    if residual > DEFAULT_TOL {
        return Err(invariant(kind, "hermitian", residual));
    }
    let spectrum = hermitian_spectrum(m, DEFAULT_TOL)?;
    if spectrum.min() < -DEFAULT_TOL {
        return Err(invariant(kind, "positive semidefinite", -spectrum.min()));
    }
    Ok(spectrum)
}

/// Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDocument", into = "StateDocument")]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        check_hermitian_psd("density", &mat)?;
        let tr = mat.trace();
        let residual = (tr - c64(1.0, 0.0)).norm();
        if residual > DEFAULT_TOL {
            return Err(invariant("density", "unit trace", residual));
        }
        Ok(Self { mat })
    }

    /// `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(n).scale(1.0 / n as f64),
        }
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(populations))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_spectrum(&self.mat, DEFAULT_TOL).expect("validated density matrix is Hermitian")
    }
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDocument", into = "StateDocument")]
pub struct PureState {
    amp: Vec<C64>,
}

impl PureState {
    pub fn new(amp: Vec<C64>) -> Result<Self> {
        if amp.is_empty() {
            return Err(Error::DimensionMismatch("empty state vector".into()));
        }
        if amp.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        let norm = norm(&amp);
        if (norm - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::NormViolation {
                residual: (norm - 1.0).abs(),
            });
        }
        Ok(Self { amp })
    }

    /// Rescales `amp` to unit norm; fails on a (numerically) zero vector.
    pub fn normalized(amp: Vec<C64>) -> Result<Self> {
        let n = norm(&amp);
        if n.is_nan() || n <= 1e-300 || !n.is_finite() {
            return Err(Error::NormViolation { residual: 1.0 });
        }
        Self::new(amp.into_iter().map(|z| z / n).collect())
    }

    /// Computational basis vector `|index⟩` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amp = vec![C64::default(); dim];
        amp[index] = c64(1.0, 0.0);
        Self { amp }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum()
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian PSD matrix with unit diagonal: the overlap matrix of a family of
/// normalized response states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDocument", into = "StateDocument")]
pub struct GramMatrix {
    mat: ComplexMatrix,
}

impl GramMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        check_hermitian_psd("gram", &mat)?;
        let residual = (0..mat.rows())
            .map(|i| (mat.get(i, i) - c64(1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        if residual > DEFAULT_TOL {
            return Err(invariant("gram", "unit diagonal", residual));
        }
        Ok(Self { mat })
    }

    /// No decoherence at all.
    pub fn all_ones(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::ones(n, n),
        }
    }

    /// Complete decoherence in the working basis.
    pub fn identity(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(n),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }
}

/// Matrix of response amplitudes `S[i][k]`: row `i` is the response to object
/// basis state `i`, expanded in a perception basis of size `m`.
///
/// Rows must have unit norm. The matrix may be rectangular.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDocument", into = "StateDocument")]
pub struct ProbingMatrix {
    mat: ComplexMatrix,
}

impl ProbingMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let residual = (0..mat.rows())
            .map(|i| (norm(&mat.row(i)) - 1.0).abs())
            .fold(0.0, f64::max);
        if residual > DEFAULT_TOL {
            return Err(invariant("probing", "unit row norm", residual));
        }
        Ok(Self { mat })
    }

    /// Builds `S` from response states: `S[i][k] = ⟨k|response_i⟩`.
    pub fn from_responses(responses: &[PureState]) -> Result<Self> {
        let d = common_dim(responses)?;
        let rows: Vec<Vec<C64>> = responses.iter().map(|r| r.amp.clone()).collect();
        debug_assert!(rows.iter().all(|r| r.len() == d));
        Self::new(ComplexMatrix::from_rows(&rows))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Object dimension `n`.
    pub fn object_dim(&self) -> usize {
        self.mat.rows()
    }

    /// Number of perception outcomes `m`.
    pub fn outcomes(&self) -> usize {
        self.mat.cols()
    }
}

pub(crate) fn common_dim(states: &[PureState]) -> Result<usize> {
    let first = states
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty family of states".into()))?
        .dim();
    if let Some(bad) = states.iter().find(|s| s.dim() != first) {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {first} and {}",
            bad.dim()
        )));
    }
    Ok(first)
}

/// Complete family of mutually orthogonal projectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDocument", into = "StateDocument")]
pub struct ProjectorSet {
    projectors: Vec<ComplexMatrix>,
}

impl ProjectorSet {
    pub fn new(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        const KIND: &str = "projector_set";
        let first = projectors
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty projector set".into()))?;
        let n = require_square(first)?;
        let mut sum = ComplexMatrix::zeros(n, n);
        for p in &projectors {
            if p.shape() != (n, n) {
                return Err(Error::ShapeMismatch {
                    left: (n, n),
                    right: p.shape(),
                });
            }
            let residual = p.hermiticity_residual()?;
            if residual > DEFAULT_TOL {
                return Err(invariant(KIND, "hermitian", residual));
            }
            let residual = (p * p).max_abs_diff(p);
            if residual > PROJECTOR_TOL {
                return Err(invariant(KIND, "idempotent", residual));
            }
            sum = &sum + p;
        }
        for (i, p) in projectors.iter().enumerate() {
            for q in &projectors[i + 1..] {
                let residual = (p * q).max_norm();
                if residual > PROJECTOR_TOL {
                    return Err(invariant(KIND, "mutually orthogonal", residual));
                }
            }
        }
        let residual = sum.max_abs_diff(&ComplexMatrix::identity(n));
        if residual > PROJECTOR_TOL {
            return Err(invariant(KIND, "complete", residual));
        }
        Ok(Self { projectors })
    }

    /// Rank-one projectors onto an orthonormal basis.
    pub fn from_basis(basis: &[PureState]) -> Result<Self> {
        Self::new(
            basis
                .iter()
                .map(|v| ComplexMatrix::outer(v.amplitudes(), v.amplitudes()))
                .collect(),
        )
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }
}

/// One measurement outcome. `state` is `None` exactly when the probability was
/// clamped to zero, in which case the conditional state is undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub probability: f64,
    pub state: Option<DensityMatrix>,
}

impl Outcome {
    pub fn is_live(&self) -> bool {
        self.state.is_some()
    }
}

/// Probability-weighted family of post-measurement states `{p_k, ρ_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateDocument", into = "StateDocument")]
pub struct OutcomeEnsemble {
    dim: usize,
    outcomes: Vec<Outcome>,
}

impl OutcomeEnsemble {
    /// Validates probabilities and clamps those below `1e-12` to zero.
    ///
    /// States attached to clamped outcomes are discarded; a live outcome
    /// without a state is rejected.
    pub fn new(outcomes: Vec<(f64, Option<DensityMatrix>)>) -> Result<Self> {
        const KIND: &str = "ensemble";
        if outcomes.is_empty() {
            return Err(Error::DimensionMismatch("empty ensemble".into()));
        }
        let mut dim = None;
        let mut total = 0.0;
        let mut clean = Vec::with_capacity(outcomes.len());
        for (p, state) in outcomes {
            if !p.is_finite() || p < -PROBABILITY_FLOOR {
                return Err(invariant(KIND, "nonnegative probability", -p));
            }
            if p < PROBABILITY_FLOOR {
                clean.push(Outcome {
                    probability: 0.0,
                    state: None,
                });
                continue;
            }
            let state = state.ok_or(invariant(KIND, "live outcome has a state", p))?;
            match dim {
                None => dim = Some(state.dim()),
                Some(d) if d != state.dim() => {
                    return Err(Error::DimensionMismatch(format!(
                        "ensemble mixes dimensions {d} and {}",
                        state.dim()
                    )))
                }
                Some(_) => {}
            }
            total += p;
            clean.push(Outcome {
                probability: p,
                state: Some(state),
            });
        }
        let residual = (total - 1.0).abs();
        if residual > PROBABILITY_SUM_TOL {
            return Err(invariant(KIND, "probabilities sum to one", residual));
        }
        Ok(Self {
            dim: dim.expect("a unit-sum ensemble has a live outcome"),
            outcomes: clean,
        })
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.probability).collect()
    }

    /// Outcomes with nonzero probability.
    pub fn live(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.state.as_ref().map(|s| (o.probability, s)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// `|v⟩⟨v|`.
pub fn density_from_pure(v: &PureState) -> DensityMatrix {
    DensityMatrix {
        mat: ComplexMatrix::outer(&v.amp, &v.amp),
    }
}

/// `tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let n = m.rows();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            // tr ρ² = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ.
            total += m.get(i, j).norm_sqr();
        }
    }
    total
}

/// `E[i][j] = ⟨v_j|v_i⟩`.
pub fn gram_from_vectors(vs: &[PureState]) -> Result<GramMatrix> {
    common_dim(vs)?;
    let n = vs.len();
    let mat = ComplexMatrix::from_fn(n, n, |i, j| if i == j { c64(1.0, 0.0) } else { vs[j].inner(&vs[i]) });
    Ok(GramMatrix { mat })
}

/// Block Gram matrix `E[i][j] = Σ_k (P_k)_ii (P_k)_jj` of a projector family
/// that is diagonal in the working basis: ones inside each block, zeros
/// elsewhere.
pub fn gram_from_projectors(ps: &ProjectorSet) -> Result<GramMatrix> {
    let n = ps.dim();
    let residual = ps
        .projectors()
        .iter()
        .flat_map(|p| (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| p.get(i, j).norm())))
        .fold(0.0, f64::max);
    if residual > DEFAULT_TOL {
        return Err(Error::NotDiagonalBasis { residual });
    }
    let diagonals: Vec<Vec<f64>> = ps
        .projectors()
        .iter()
        .map(|p| (0..n).map(|i| p.get(i, i).re.round()).collect())
        .collect();
    let mat = ComplexMatrix::from_fn(n, n, |i, j| {
        let e: f64 = diagonals.iter().map(|d| d[i] * d[j]).sum();
        c64(e, 0.0)
    });
    GramMatrix::new(mat)
}

/// Tagged JSON document for every state-like type:
/// the shared matrix form plus a `"kind"` tag.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateDocument {
    Density(ComplexMatrix),
    Pure(ComplexMatrix),
    Gram(ComplexMatrix),
    Probing(ComplexMatrix),
    ProjectorSet { projectors: Vec<ComplexMatrix> },
    Ensemble { outcomes: Vec<OutcomeDocument> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutcomeDocument {
    pub p: f64,
    pub state: Option<ComplexMatrix>,
}

impl StateDocument {
    fn kind(&self) -> &'static str {
        match self {
            Self::Density(_) => "density",
            Self::Pure(_) => "pure",
            Self::Gram(_) => "gram",
            Self::Probing(_) => "probing",
            Self::ProjectorSet { .. } => "projector_set",
            Self::Ensemble { .. } => "ensemble",
        }
    }

    fn wrong(self, expected: &'static str) -> Error {
        Error::WrongKind {
            expected,
            found: self.kind().to_string(),
        }
    }
}

impl From<DensityMatrix> for StateDocument {
    fn from(v: DensityMatrix) -> Self {
        Self::Density(v.mat)
    }
}

impl TryFrom<StateDocument> for DensityMatrix {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        match doc {
            StateDocument::Density(m) => Self::new(m),
            other => Err(other.wrong("density")),
        }
    }
}

impl From<PureState> for StateDocument {
    fn from(v: PureState) -> Self {
        let n = v.amp.len();
        Self::Pure(ComplexMatrix::from_fn(n, 1, |i, _| v.amp[i]))
    }
}

impl TryFrom<StateDocument> for PureState {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        match doc {
            StateDocument::Pure(m) if m.cols() == 1 => Self::new(m.column(0)),
            StateDocument::Pure(m) => Err(Error::DimensionMismatch(format!(
                "pure state must be a single column, got {} columns",
                m.cols()
            ))),
            other => Err(other.wrong("pure")),
        }
    }
}

impl From<GramMatrix> for StateDocument {
    fn from(v: GramMatrix) -> Self {
        Self::Gram(v.mat)
    }
}

impl TryFrom<StateDocument> for GramMatrix {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        match doc {
            StateDocument::Gram(m) => Self::new(m),
            other => Err(other.wrong("gram")),
        }
    }
}

impl From<ProbingMatrix> for StateDocument {
    fn from(v: ProbingMatrix) -> Self {
        Self::Probing(v.mat)
    }
}

impl TryFrom<StateDocument> for ProbingMatrix {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        match doc {
            StateDocument::Probing(m) => Self::new(m),
            other => Err(other.wrong("probing")),
        }
    }
}

impl From<ProjectorSet> for StateDocument {
    fn from(v: ProjectorSet) -> Self {
        Self::ProjectorSet {
            projectors: v.projectors,
        }
    }
}

impl TryFrom<StateDocument> for ProjectorSet {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        match doc {
            StateDocument::ProjectorSet { projectors } => Self::new(projectors),
            other => Err(other.wrong("projector_set")),
        }
    }
}

impl From<OutcomeEnsemble> for StateDocument {
    fn from(v: OutcomeEnsemble) -> Self {
        Self::Ensemble {
            outcomes: v
                .outcomes
                .into_iter()
                .map(|o| OutcomeDocument {
                    p: o.probability,
                    state: o.state.map(DensityMatrix::into_matrix),
                })
                .collect(),
        }
    }
}

impl TryFrom<StateDocument> for OutcomeEnsemble {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        match doc {
            StateDocument::Ensemble { outcomes } => Self::new(
                outcomes
                    .into_iter()
                    .map(|o| Ok((o.p, o.state.map(DensityMatrix::new).transpose()?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            other => Err(other.wrong("ensemble")),
        }
    }
}
