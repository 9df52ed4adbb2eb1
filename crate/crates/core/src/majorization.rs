//! Vector majorization and the spectral theorems built on it.
//!
//! `λ ≻ μ` (λ majorizes μ) when both have the same sum and, after sorting in
//! descending order, every prefix sum of λ is at least the matching prefix sum
//! of μ. For any concave `h` this gives `Σ h(λ_i) ≤ Σ h(μ_i)`, which is how
//! spectral majorization turns into entropy inequalities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::entropy::{entropy, expected_entropy, margin, EntropyFunctional};
use crate::error::{Error, Result};
use crate::matcore::{hermitian_spectrum, schur_product, ComplexMatrix, Spectrum, DEFAULT_TOL};
use crate::processes::{decohere, ensemble_average};
use crate::states::{DensityMatrix, GramMatrix, OutcomeEnsemble, ProjectorSet};

/// Absolute slack on prefix sums and entropy comparisons.
pub const MAJORIZATION_TOL: f64 = 1e-9;

/// Outcome of a single theorem check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub pass: bool,
    /// Prefix-sum margins (dominating minus dominated), or entropy margins.
    pub margins: Vec<f64>,
    pub spectra: BTreeMap<String, Vec<f64>>,
    pub trial: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    fn new(pass: bool, margins: Vec<f64>) -> Self {
        Self {
            pass,
            margins,
            spectra: BTreeMap::new(),
            trial: None,
            note: None,
        }
    }

    fn with_spectrum(mut self, name: &str, values: &[f64]) -> Self {
        self.spectra.insert(name.to_string(), values.to_vec());
        self
    }

    pub fn with_trial(mut self, trial: u64) -> Self {
        self.trial = Some(trial);
        self
    }

    /// Smallest margin; `+∞` when there are none.
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn sorted_padded(v: &[f64], len: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(len, 0.0);
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Prefix-sum margins `Σ_{i≤k} λ↓_i − Σ_{i≤k} μ↓_i` for `k = 1..n`.
///
/// The last entry is the difference of the totals.
pub fn prefix_margins(lambda: &[f64], mu: &[f64]) -> Vec<f64> {
    let n = lambda.len().max(mu.len());
    let a = sorted_padded(lambda, n);
    let b = sorted_padded(mu, n);
    let (mut sa, mut sb) = (0.0, 0.0);
    a.iter()
        .zip(&b)
        .map(|(x, y)| {
            sa += x;
            sb += y;
            sa - sb
        })
        .collect()
}

/// `λ ≻ μ` within `tol`.
pub fn majorizes(lambda: &[f64], mu: &[f64], tol: f64) -> bool {
    let margins = prefix_margins(lambda, mu);
    match margins.last() {
        None => true,
        Some(total) => total.abs() <= tol && margins.iter().all(|&m| m >= -tol),
    }
}

/// Componentwise sum of descending-sorted, zero-padded sequences.
pub fn sorted_sum(parts: &[&[f64]]) -> Vec<f64> {
    let n = parts.iter().map(|p| p.len()).max().unwrap_or(0);
    let mut acc = vec![0.0; n];
    for p in parts {
        for (a, x) in acc.iter_mut().zip(sorted_padded(p, n)) {
            *a += x;
        }
    }
    acc
}

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

/// `λ(ρ ∘ E) ≺ λ(ρ)`.
pub fn check_schur_majorization(rho: &DensityMatrix, e: &GramMatrix) -> Result<CheckReport> {
    same_dim(rho.dim(), e.dim())?;
    let before = rho.spectrum();
    let after = hermitian_spectrum(&schur_product(rho.matrix(), e.matrix())?, DEFAULT_TOL)?;
    let pass = majorizes(before.values(), after.values(), MAJORIZATION_TOL);
    Ok(CheckReport::new(pass, prefix_margins(before.values(), after.values()))
        .with_spectrum("rho", before.values())
        .with_spectrum("rho_schur_e", after.values()))
}

/// Double majorization for a complete orthogonal projector family:
/// `Σ_i λ(P_i H P_i) ≻ λ(H) ≻ λ(Σ_i P_i H P_i)`.
///
/// Each `λ(P_i H P_i)` is taken over the full ambient dimension, structural
/// zeros included. The right half holds for every Hermitian `H`; the left
/// half relies on the block decomposition of positive-semidefinite matrices
/// and can fail for indefinite `H`. `margins` holds the left comparison's prefix margins
/// followed by the right comparison's.
pub fn check_pinching_double(h: &ComplexMatrix, ps: &ProjectorSet) -> Result<CheckReport> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    same_dim(h.rows(), ps.dim())?;
    let whole = hermitian_spectrum(h, DEFAULT_TOL)?;
    let mut pinched = ComplexMatrix::zeros(h.rows(), h.cols());
    let mut pieces: Vec<Spectrum> = Vec::with_capacity(ps.len());
    for p in ps.projectors() {
        let block = &(p * h) * p;
        pieces.push(hermitian_spectrum(&block.hermitian_part(), DEFAULT_TOL)?);
        pinched = &pinched + &block;
    }
    let pinched = hermitian_spectrum(&pinched.hermitian_part(), DEFAULT_TOL)?;
    let piece_refs: Vec<&[f64]> = pieces.iter().map(Spectrum::values).collect();
    let summed = sorted_sum(&piece_refs);

    let left = majorizes(&summed, whole.values(), MAJORIZATION_TOL);
    let right = majorizes(whole.values(), pinched.values(), MAJORIZATION_TOL);
    let mut margins = prefix_margins(&summed, whole.values());
    margins.extend(prefix_margins(whole.values(), pinched.values()));
    Ok(CheckReport::new(left && right, margins)
        .with_spectrum("sum_of_blocks", &summed)
        .with_spectrum("h", whole.values())
        .with_spectrum("pinched", pinched.values()))
}

/// Fan's inequality `λ(A + B) ≺ λ(A) + λ(B)`.
pub fn check_fan(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<CheckReport> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let la = hermitian_spectrum(a, DEFAULT_TOL)?;
    let lb = hermitian_spectrum(b, DEFAULT_TOL)?;
    let lsum = hermitian_spectrum(&(a + b).hermitian_part(), DEFAULT_TOL)?;
    let bound = sorted_sum(&[la.values(), lb.values()]);
    let pass = majorizes(&bound, lsum.values(), MAJORIZATION_TOL);
    Ok(CheckReport::new(pass, prefix_margins(&bound, lsum.values()))
        .with_spectrum("a", la.values())
        .with_spectrum("b", lb.values())
        .with_spectrum("a_plus_b", lsum.values()))
}

/// Holevo-type bound `Σ_k p_k S(ρ_k) ≤ S(Σ_k p_k ρ_k)`.
pub fn check_holevo(ens: &OutcomeEnsemble, f: &EntropyFunctional) -> Result<CheckReport> {
    let lhs = expected_entropy(ens, f)?;
    let average = ensemble_average(ens)?;
    let rhs = entropy(&average, f)?;
    let m = margin(lhs, rhs);
    let mut report =
        CheckReport::new(m >= -MAJORIZATION_TOL, vec![m]).with_spectrum("average", average.spectrum().values());
    report.note = Some(format!("{f}: expected {lhs} vs average {rhs}"));
    Ok(report)
}

/// If `λ(ρ1) ≻ λ(ρ2)` then `S(ρ1) ≤ S(ρ2)`; otherwise the pair is not
/// comparable and no entropy claim is made.
pub fn entropy_from_majorization_consistency(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    f: &EntropyFunctional,
) -> Result<CheckReport> {
    same_dim(rho1.dim(), rho2.dim())?;
    let l1 = rho1.spectrum();
    let l2 = rho2.spectrum();
    let base = |pass, margins| {
        CheckReport::new(pass, margins)
            .with_spectrum("rho1", l1.values())
            .with_spectrum("rho2", l2.values())
    };
    if !majorizes(l1.values(), l2.values(), MAJORIZATION_TOL) {
        let mut report = base(true, prefix_margins(l1.values(), l2.values()));
        report.note = Some("not comparable".into());
        return Ok(report);
    }
    let m = margin(entropy(rho1, f)?, entropy(rho2, f)?);
    Ok(base(m >= -MAJORIZATION_TOL, vec![m]))
}

/// Generic concavity consequence for two distributions: when `λ ≻ μ`,
/// `Σh(λ) ≤ Σh(μ)` within tolerance. Returns `None` when not comparable.
pub fn concave_sum_respects(lambda: &Spectrum, mu: &Spectrum, f: &EntropyFunctional) -> Result<Option<bool>> {
    if !majorizes(lambda.values(), mu.values(), MAJORIZATION_TOL) {
        return Ok(None);
    }
    let a = crate::entropy::entropy_of_spectrum(lambda, f)?;
    let b = crate::entropy::entropy_of_spectrum(mu, f)?;
    Ok(Some(margin(a, b) >= -MAJORIZATION_TOL))
}

/// Decoherence-side corollary used by the campaigns: `S(ρ) ≤ S(ρ ∘ E)`.
pub fn decoherence_margin(rho: &DensityMatrix, e: &GramMatrix, f: &EntropyFunctional) -> Result<f64> {
    Ok(margin(entropy(rho, f)?, entropy(&decohere(rho, e)?, f)?))
}
