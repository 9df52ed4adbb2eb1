//! Dense complex matrix kernel.
//!
//! [`ComplexMatrix`] is a thin validated wrapper around an `nalgebra` dense
//! matrix. Everything downstream (density matrices, Gram matrices, projector
//! families, dilations) is expressed through the operations in this module:
//! Hermitian spectra, Schur and Kronecker products, partial traces and the
//! structural predicates with explicit max-norm tolerances.
//!
//! Tensor products use a first-factor-major layout: entry
//! `(i * rB + k, j * cB + l)` of `A ⊗ B` is `A[i][j] * B[k][l]`. The partial
//! trace uses the same convention.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex<f64>;

/// Default absolute max-norm tolerance for Hermiticity and unitarity.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Shorthand for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Dense row-major complex matrix with finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix(DMatrix<C64>);

/// Wire form shared by every module and the CLI:
/// `{"rows": n, "cols": m, "data": [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(value: MatrixJson) -> Result<Self> {
        let data = value.data.iter().map(|&[re, im]| c64(re, im)).collect();
        ComplexMatrix::new(value.rows, value.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.rows() * m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let z = m.0[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data,
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "\n  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
        }
        write!(f, "\n]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong counts and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::BadEntryCount {
                rows,
                cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &data)))
    }

    /// Builds a matrix from real row-major rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self(DMatrix::from_fn(n, m, |i, j| c64(rows[i][j], 0.0)))
    }

    /// Builds a matrix from complex row-major rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// All-ones matrix: the Gram matrix of a family of identical responses.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self(DMatrix::from_element(rows, cols, c64(1.0, 0.0)))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c64(diag[i], 0.0)
            } else {
                C64::default()
            }
        }))
    }

    /// Outer product `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self(DMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj()))
    }

    /// Wraps an `nalgebra` matrix. Entries are assumed finite.
    pub(crate) fn from_dmatrix(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm distance `‖self − other‖_max`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(M + M†) / 2`, used to strip rounding asymmetry before eigensolves.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    /// Max-norm of `M − M†`.
    pub fn hermiticity_residual(&self) -> Result<f64> {
        self.require_square()?;
        Ok(self.max_abs_diff(&self.adjoint()))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Real eigenvalues sorted in non-increasing order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts `values` descending. Non-finite values are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos, col: 0 });
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.first().copied().unwrap_or(f64::NAN)
    }

    pub fn min(&self) -> f64 {
        self.0.last().copied().unwrap_or(f64::NAN)
    }

    /// Componentwise distance to `other` after zero-padding to equal length.
    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|i| {
                let a = self.0.get(i).copied().unwrap_or(0.0);
                let b = other.0.get(i).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
///
/// The input must be Hermitian within `tol` in max-norm.
pub fn hermitian_spectrum(m: &ComplexMatrix, tol: f64) -> Result<Spectrum> {
    let n = m.require_square()?;
    let residual = m.hermiticity_residual()?;
    if residual > tol {
        return Err(Error::NotHermitian { residual, tol });
    }
    if n == 1 {
        return Spectrum::new(vec![m.get(0, 0).re]);
    }
    let values = m.hermitian_part().0.symmetric_eigenvalues();
    Spectrum::new(values.iter().copied().collect())
}

/// Eigenpairs of a Hermitian matrix sorted by descending eigenvalue.
///
/// Eigenvectors are returned as unit columns, one per eigenvalue.
pub fn hermitian_eigen(m: &ComplexMatrix, tol: f64) -> Result<(Spectrum, Vec<Vec<C64>>)> {
    m.require_square()?;
    let residual = m.hermiticity_residual()?;
    if residual > tol {
        return Err(Error::NotHermitian { residual, tol });
    }
    let eig = SymmetricEigen::new(m.hermitian_part().0);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    Ok((Spectrum::new(values)?, vectors))
}

/// Elementwise (Schur / Hadamard) product.
pub fn schur_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(ComplexMatrix(a.0.component_mul(&b.0)))
}

/// Kronecker product `A ⊗ B` in first-factor-major layout.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Which tensor factor survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Traces out one factor of a bipartite operator on `dim_first ⊗ dim_second`.
pub fn partial_trace(m: &ComplexMatrix, dim_first: usize, dim_second: usize, keep: Keep) -> Result<ComplexMatrix> {
    let n = m.require_square()?;
    if dim_first == 0 || dim_second == 0 || n != dim_first * dim_second {
        return Err(Error::DimensionMismatch(format!(
            "{n}x{n} operator does not factor as {dim_first} x {dim_second}"
        )));
    }
    let out = match keep {
        Keep::First => DMatrix::from_fn(dim_first, dim_first, |i, j| {
            (0..dim_second)
                .map(|k| m.0[(i * dim_second + k, j * dim_second + k)])
                .sum()
        }),
        Keep::Second => DMatrix::from_fn(dim_second, dim_second, |k, l| {
            (0..dim_first)
                .map(|i| m.0[(i * dim_second + k, i * dim_second + l)])
                .sum()
        }),
    };
    Ok(ComplexMatrix(out))
}

/// `‖M†M − I‖_max ≤ tol`.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    let n = m.require_square()?;
    let gram = ComplexMatrix(m.0.adjoint() * &m.0);
    Ok(gram.max_abs_diff(&ComplexMatrix::identity(n)) <= tol)
}

/// `‖M − M†‖_max ≤ tol`.
pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(m.hermiticity_residual()? <= tol)
}

/// Hermitian within `tol` and smallest eigenvalue at least `−tol`.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    if !is_hermitian(m, tol)? {
        return Ok(false);
    }
    Ok(hermitian_spectrum(m, tol)?.min() >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_projector() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])
    }

    #[test]
    fn spectrum_of_diagonal_and_projector() {
        let s = hermitian_spectrum(&ComplexMatrix::from_diagonal(&[0.5, 0.5]), DEFAULT_TOL).unwrap();
        assert_eq!(s.values(), &[0.5, 0.5]);
        let s = hermitian_spectrum(&plus_projector(), DEFAULT_TOL).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-14);
        assert!(s.values()[1].abs() < 1e-14);
    }

    #[test]
    fn spectrum_matches_quadratic_formula() {
        // Closed-form roots of the characteristic polynomial of a 2x2 Hermitian matrix.
        let cases = [
            (0.3, -1.2, c64(0.4, -0.7)),
            (2.0, 2.0, c64(0.0, 1.0)),
            (-0.5, 1.5, c64(1e-3, 2.5)),
        ];
        for (a, d, b) in cases {
            let m = ComplexMatrix::from_rows(&[vec![c64(a, 0.0), b], vec![b.conj(), c64(d, 0.0)]]);
            let tr = a + d;
            let det = a * d - b.norm_sqr();
            let disc = (tr * tr - 4.0 * det).sqrt();
            let expected = [(tr + disc) / 2.0, (tr - disc) / 2.0];
            let s = hermitian_spectrum(&m, DEFAULT_TOL).unwrap();
            for (got, want) in s.values().iter().zip(expected) {
                assert!((got - want).abs() < 1e-12, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn spectrum_rejects_bad_input() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(
            hermitian_spectrum(&m, DEFAULT_TOL),
            Err(Error::NotHermitian { .. })
        ));
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_spectrum(&m, DEFAULT_TOL),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn schur_product_examples() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let mask = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            schur_product(&a, &mask).unwrap(),
            ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[3.0, 0.0]])
        );
        assert_eq!(schur_product(&a, &ComplexMatrix::ones(2, 2)).unwrap(), a);
        let rho = plus_projector();
        assert_eq!(
            schur_product(&rho, &ComplexMatrix::identity(2)).unwrap(),
            ComplexMatrix::from_diagonal(&[0.5, 0.5])
        );
        assert!(matches!(
            schur_product(&a, &ComplexMatrix::identity(3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn schur_trace_identity() {
        let a = ComplexMatrix::from_rows(&[vec![c64(1.0, 0.5), c64(2.0, -1.0)], vec![c64(0.3, 0.0), c64(-4.0, 2.0)]]);
        let b = ComplexMatrix::from_rows(&[vec![c64(0.5, 1.0), c64(7.0, 0.0)], vec![c64(1.0, 1.0), c64(0.25, -0.5)]]);
        let lhs = schur_product(&a, &b).unwrap().trace();
        let rhs = a.get(0, 0) * b.get(0, 0) + a.get(1, 1) * b.get(1, 1);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn tensor_product_layout() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(tensor_product(&a, &ComplexMatrix::identity(1)), a);
        let p0 = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        assert_eq!(
            tensor_product(&p0, &p0),
            ComplexMatrix::from_diagonal(&[1.0, 0.0, 0.0, 0.0])
        );
        // |0><0| ⊗ I/2 expanded by hand: only the top-left 2x2 block survives.
        let got = tensor_product(&p0, &ComplexMatrix::identity(2).scale(0.5));
        assert_eq!(got, ComplexMatrix::from_diagonal(&[0.5, 0.5, 0.0, 0.0]));
        // Generic entry check of the first-factor-major convention.
        let b = ComplexMatrix::from_rows(&[vec![c64(0.0, 1.0), c64(5.0, 0.0), c64(-1.0, 0.0)]]);
        let k = tensor_product(&a, &b);
        assert_eq!(k.shape(), (2, 6));
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..3 {
                    assert_eq!(k.get(i, j * 3 + l), a.get(i, j) * b.get(0, l));
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product_and_bell_state() {
        let a = ComplexMatrix::from_rows(&[vec![c64(0.7, 0.0), c64(0.1, 0.2)], vec![c64(0.1, -0.2), c64(0.3, 0.0)]]);
        let b = ComplexMatrix::from_real_rows(&[&[2.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 0.5]]);
        let ab = tensor_product(&a, &b);
        let kept = partial_trace(&ab, 2, 3, Keep::First).unwrap();
        assert!(kept.max_abs_diff(&a.scale(3.5)) < 1e-12);
        let kept = partial_trace(&ab, 2, 3, Keep::Second).unwrap();
        assert!(kept.max_abs_diff(&b) < 1e-12);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = [c64(h, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(h, 0.0)];
        let psi = ComplexMatrix::outer(&bell, &bell);
        let reduced = partial_trace(&psi, 2, 2, Keep::First).unwrap();
        assert!(reduced.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_sums_diagonal_blocks() {
        let m = ComplexMatrix::from_fn(4, 4, |i, j| {
            let re = (i * 4 + j) as f64 + 0.5 * (i + j) as f64;
            let im = if i == j { 0.0 } else { (i as f64) - (j as f64) };
            c64(re + (j * 4 + i) as f64 + 0.5 * (i + j) as f64, im)
        });
        // Index-summation oracle: keep the first factor by summing the two 2x2
        // diagonal sub-blocks of the second factor.
        let got = partial_trace(&m, 2, 2, Keep::First).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut want = C64::default();
                for k in 0..2 {
                    want += m.get(2 * i + k, 2 * j + k);
                }
                assert_eq!(got.get(i, j), want);
            }
        }
        // Keep the second factor: sum of the two diagonal 2x2 blocks.
        let got = partial_trace(&m, 2, 2, Keep::Second).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                assert_eq!(got.get(k, l), m.get(k, l) + m.get(2 + k, 2 + l));
            }
        }
        assert!(matches!(
            partial_trace(&m, 3, 2, Keep::First),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn structural_predicates() {
        let id = ComplexMatrix::identity(3);
        assert!(is_unitary(&id, DEFAULT_TOL).unwrap());
        assert!(is_hermitian(&id, DEFAULT_TOL).unwrap());
        assert!(is_psd(&id, DEFAULT_TOL).unwrap());

        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(is_unitary(&x, DEFAULT_TOL).unwrap());
        assert!(is_hermitian(&x, DEFAULT_TOL).unwrap());
        assert!(!is_psd(&x, DEFAULT_TOL).unwrap());

        assert!(matches!(
            is_unitary(&ComplexMatrix::zeros(1, 2), DEFAULT_TOL),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let m = ComplexMatrix::from_rows(&[vec![c64(1.0, -2.0), c64(0.5, 0.0)]]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"{"rows":1,"cols":2,"data":[[1.0,-2.0],[0.5,0.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
    }

    #[test]
    fn new_rejects_non_finite() {
        let err = ComplexMatrix::new(1, 2, vec![c64(0.0, 0.0), c64(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }
}
