//! Dense complex linear algebra substrate.
//!
//! Everything here is desk-scale by design: operators are dense, row-major
//! `Complex<f64>` matrices of dimension at most a few thousand. Eigen- and
//! QR-factorizations are delegated to `nalgebra`; the domain newtypes
//! ([`HermitianOperator`], [`DensityOperator`], [`UnitaryMatrix`]) validate
//! their defining property on construction and stay immutable afterwards.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{tol, Error, Result};

/// Complex scalar used everywhere in the crate.
pub type C64 = Complex<f64>;

/// Shorthand for a real complex scalar.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given shape. Panics on zero extent.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix extents must be positive");
        Self {
            rows,
            cols,
            entries: vec![C64::ZERO; rows * cols],
        }
    }

    /// Identity matrix of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, re(1.0));
        }
        m
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        assert!(r > 0, "no rows given");
        let c = rows[0].len();
        assert!(c > 0 && rows.iter().all(|row| row.len() == c));
        Self {
            rows: r,
            cols: c,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    /// Builds a matrix entry by entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.cols + j] = v;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, a: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(re(-1.0)))
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(n, m);
        for i in 0..n {
            for l in 0..k {
                let a = self.entries[i * k + l];
                if a == C64::ZERO {
                    continue;
                }
                let row = &other.entries[l * m..(l + 1) * m];
                let dst = &mut out.entries[i * m..(i + 1) * m];
                for j in 0..m {
                    dst[j] += a * row[j];
                }
            }
        }
        out
    }

    /// `U · self · U†`.
    pub fn conjugated_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    /// `tr(self · other)` in O(n²).
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = C64::ZERO;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        acc
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Deviation from hermiticity, `‖A − A†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Wire form: entries interleaved as `[re, im, re, im, …]` in row-major
/// order, so files stay plain decimal text and round-trip exactly.
#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut entries = Vec::with_capacity(2 * self.entries.len());
        for e in &self.entries {
            entries.push(e.re);
            entries.push(e.im);
        }
        MatrixWire {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = MatrixWire::deserialize(d)?;
        if w.rows == 0 || w.cols == 0 || w.entries.len() != 2 * w.rows * w.cols {
            return Err(serde::de::Error::custom(format!(
                "bad matrix wire: {}x{} with {} scalars",
                w.rows,
                w.cols,
                w.entries.len()
            )));
        }
        let entries = w
            .entries
            .chunks_exact(2)
            .map(|c| C64::new(c[0], c[1]))
            .collect();
        Ok(Self {
            rows: w.rows,
            cols: w.cols,
            entries,
        })
    }
}

/// Pauli matrices and friends, as plain [`ComplexMatrix`] values.
pub mod pauli {
    use super::{re, C64, ComplexMatrix};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![re(0.0), re(1.0)], vec![re(1.0), re(0.0)]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[
            vec![re(0.0), C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), re(0.0)],
        ])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![re(1.0), re(0.0)], vec![re(0.0), re(-1.0)]])
    }

    pub fn i2() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }
}

/// Kronecker product of two square matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare(a.rows(), a.cols()));
    }
    if !b.is_square() {
        return Err(Error::NotSquare(b.rows(), b.cols()));
    }
    let (da, db) = (a.rows(), b.rows());
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..da {
            let aij = a.get(i, j);
            if aij == C64::ZERO {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.set(i * db + k, j * db + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a list of square factors, left to right.
pub fn kron_all(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut it = factors.iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidArgument("empty Kronecker factor list".into()))?;
    let mut acc = first.clone();
    for f in it {
        acc = kron(&acc, f)?;
    }
    Ok(acc)
}

/// Hermitian operator: a square matrix with `‖A − A†‖_max ≤ 1e−12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianOperator {
    mat: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare(mat.rows(), mat.cols()));
        }
        let defect = mat.hermiticity_defect();
        if defect > tol::HERMITICITY {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { mat })
    }

    /// Constructor for values that are Hermitian by algebraic construction.
    pub(crate) fn trusted(mat: ComplexMatrix) -> Self {
        debug_assert!(mat.hermiticity_defect() <= 1e-9, "trusted Hermitian violated");
        Self { mat }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Real trace. The imaginary part vanishes by hermiticity.
    pub fn trace_re(&self) -> f64 {
        self.mat.trace().re
    }

    /// Hilbert–Schmidt inner product `tr(AB)`, real for Hermitian A, B.
    pub fn inner(&self, other: &Self) -> f64 {
        self.mat.trace_product(&other.mat).re
    }

    pub fn scale_re(&self, a: f64) -> Self {
        Self {
            mat: self.mat.scale(re(a)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.add(&other.mat),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.sub(&other.mat),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: kron(&self.mat, &other.mat).expect("square by construction"),
        }
    }
}

impl TryFrom<ComplexMatrix> for HermitianOperator {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<HermitianOperator> for ComplexMatrix {
    fn from(h: HermitianOperator) -> Self {
        h.mat
    }
}

/// Density operator: Hermitian, PSD up to `−1e−10`, unit trace to `1e−10`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityOperator {
    mat: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare(mat.rows(), mat.cols()));
        }
        let defect = mat.hermiticity_defect();
        if defect > tol::HERMITICITY {
            return Err(Error::NotHermitian(defect));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol::TRACE_ONE || tr.im.abs() > tol::TRACE_ONE {
            return Err(Error::InvalidTrace(tr.re));
        }
        // Cholesky of A + tol·I certifies λ_min ≥ −tol without a full
        // eigendecomposition; fall back to eigh only to report the failure.
        if !cholesky_succeeds(&mat, tol::PSD) {
            let h = HermitianOperator::trusted(mat);
            let (evals, _) = eigh(&h);
            return Err(Error::NotPsd(evals[0]));
        }
        Ok(Self { mat })
    }

    /// Pure state `vv†` from an ℓ2-normalized state vector.
    pub fn from_state_vector(v: &[C64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol::TRACE_ONE {
            return Err(Error::InvalidTrace(norm * norm));
        }
        let d = v.len();
        let mat = ComplexMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj());
        Ok(Self { mat })
    }

    /// The maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale(re(1.0 / dim as f64)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// View as a Hermitian operator.
    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator::trusted(self.mat.clone())
    }
}

impl TryFrom<ComplexMatrix> for DensityOperator {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<DensityOperator> for ComplexMatrix {
    fn from(d: DensityOperator) -> Self {
        d.mat
    }
}

/// Unitary matrix: `‖UU† − I‖_max ≤ 1e−10`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct UnitaryMatrix {
    mat: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare(mat.rows(), mat.cols()));
        }
        let defect = mat
            .matmul(&mat.adjoint())
            .max_abs_diff(&ComplexMatrix::identity(mat.rows()));
        if defect > tol::UNITARITY {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { mat })
    }

    pub(crate) fn trusted(mat: ComplexMatrix) -> Self {
        debug_assert!(
            mat.matmul(&mat.adjoint())
                .max_abs_diff(&ComplexMatrix::identity(mat.rows()))
                <= 1e-9,
            "trusted unitary violated"
        );
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }
}

impl TryFrom<ComplexMatrix> for UnitaryMatrix {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<UnitaryMatrix> for ComplexMatrix {
    fn from(u: UnitaryMatrix) -> Self {
        u.mat
    }
}

/// Hermitian Cholesky with positivity pivots on `A + shift·I`. The complex
/// Cholesky in nalgebra takes complex square roots and never fails, so the
/// pivot check has to live here.
fn cholesky_succeeds(a: &ComplexMatrix, shift: f64) -> bool {
    let n = a.rows();
    let mut l = vec![C64::ZERO; n * n];
    for j in 0..n {
        let mut pivot = a.get(j, j).re + shift;
        for k in 0..j {
            pivot -= l[j * n + k].norm_sqr();
        }
        if !(pivot > 0.0) {
            return false;
        }
        let diag = pivot.sqrt();
        l[j * n + j] = re(diag);
        for i in (j + 1)..n {
            let mut v = a.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = v / diag;
        }
    }
    true
}

/// Eigendecomposition of a Hermitian operator.
///
/// Returns the real eigenvalues in ascending order together with the unitary
/// whose columns are the matching eigenvectors, so that `A = V diag(λ) V†`.
pub fn eigh(a: &HermitianOperator) -> (Vec<f64>, UnitaryMatrix) {
    let dim = a.dim();
    let se = SymmetricEigen::new(a.matrix().to_nalgebra());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let evals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vecs = ComplexMatrix::from_fn(dim, dim, |i, j| se.eigenvectors[(i, order[j])]);
    (evals, UnitaryMatrix::trusted(vecs))
}

/// Smallest eigenvalue of a Hermitian operator.
pub fn min_eigenvalue(a: &HermitianOperator) -> f64 {
    eigh(a).0[0]
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the
/// diagonal-phase correction, deterministic for a given generator state.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidArgument("haar_unitary needs dim ≥ 1".into()));
    }
    let scale = 1.0 / 2.0f64.sqrt();
    let ginibre = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal) * scale,
            rng.sample::<f64, _>(StandardNormal) * scale,
        )
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Fix the phase ambiguity of QR so Q follows the Haar measure.
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { re(1.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(UnitaryMatrix::trusted(ComplexMatrix::from_nalgebra(&q)))
}

/// Orthonormal Hermitian basis of the d×d Hermitian space under `tr(AB)`.
///
/// The first element is `I/√d`; then the symmetric and antisymmetric
/// off-diagonal pairs, then the traceless diagonal ladder. For `dim = 2`
/// this is exactly `{I, X, Y, Z}/√2`.
pub fn hermitian_basis(dim: usize) -> Result<Vec<HermitianOperator>> {
    if dim < 2 {
        return Err(Error::InvalidArgument(
            "hermitian_basis needs dim ≥ 2".into(),
        ));
    }
    let mut basis = Vec::with_capacity(dim * dim);
    basis.push(HermitianOperator::trusted(
        ComplexMatrix::identity(dim).scale(re(1.0 / (dim as f64).sqrt())),
    ));
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut sym = ComplexMatrix::zeros(dim, dim);
            sym.set(i, j, re(inv_sqrt2));
            sym.set(j, i, re(inv_sqrt2));
            basis.push(HermitianOperator::trusted(sym));
            let mut asym = ComplexMatrix::zeros(dim, dim);
            asym.set(i, j, C64::new(0.0, -inv_sqrt2));
            asym.set(j, i, C64::new(0.0, inv_sqrt2));
            basis.push(HermitianOperator::trusted(asym));
        }
    }
    for k in 1..dim {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut diag = ComplexMatrix::zeros(dim, dim);
        for i in 0..k {
            diag.set(i, i, re(norm));
        }
        diag.set(k, k, re(-(k as f64) * norm));
        basis.push(HermitianOperator::trusted(diag));
    }
    Ok(basis)
}
