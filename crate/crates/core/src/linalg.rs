//! Small dense complex vectors and matrices.
//!
//! The inner product is the standard Hermitian one, linear in the first
//! argument: `<z, w> = sum_k z_k * conj(w_k)`. With this convention
//! `Re <z, a>` is the Euclidean inner product of the real embeddings of `z`
//! and `a`, so real hyperplanes `{Re <z, a> = b}` have Euclidean normal `a`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use nalgebra::Complex;

/// Double precision complex scalar.
pub type C64 = Complex<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("complex dimension must be at least 2, found {0}")]
    DimensionTooSmall(usize),
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Serde adapter writing a complex scalar as `[re, im]`.
pub mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// A point of `C^n`, `n >= 2`, with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct CVector(DVector<C64>);

impl CVector {
    pub fn new(entries: Vec<C64>) -> Result<Self, LinalgError> {
        if entries.len() < 2 {
            return Err(LinalgError::DimensionTooSmall(entries.len()));
        }
        if let Some(i) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite(i));
        }
        Ok(Self(DVector::from_vec(entries)))
    }

    /// Builds a vector from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, LinalgError> {
        Self::new(pairs.iter().map(|&(re, im)| c(re, im)).collect())
    }

    /// Builds a vector with real entries.
    pub fn from_real(values: &[f64]) -> Result<Self, LinalgError> {
        Self::new(values.iter().map(|&re| c(re, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(n))
    }

    /// The `j`-th standard basis vector (zero based).
    pub fn basis(n: usize, j: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[j] = c(1.0, 0.0);
        Self(v)
    }

    pub(crate) fn from_dvector(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn get(&self, k: usize) -> C64 {
        self.0[k]
    }

    /// `<self, other>`, linear in `self`.
    pub fn inner(&self, other: &CVector) -> C64 {
        other.0.dotc(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).sum()
    }

    pub fn add(&self, other: &CVector) -> CVector {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> CVector {
        Self(&self.0 * c(s, 0.0))
    }

    pub fn scale_complex(&self, s: C64) -> CVector {
        Self(&self.0 * s)
    }

    /// `self + s * dir`.
    pub fn axpy(&self, s: f64, dir: &CVector) -> CVector {
        Self(&self.0 + &dir.0 * c(s, 0.0))
    }

    /// Real embedding `(Re z_1, .., Re z_n, Im z_1, .., Im z_n)`.
    pub fn to_real(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; 2 * n];
        for (k, z) in self.0.iter().enumerate() {
            out[k] = z.re;
            out[n + k] = z.im;
        }
        out
    }

    /// Inverse of [`CVector::to_real`].
    pub fn from_real_embedding(x: &[f64]) -> CVector {
        let n = x.len() / 2;
        Self(DVector::from_fn(n, |k, _| c(x[k], x[n + k])))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl TryFrom<Vec<[f64; 2]>> for CVector {
    type Error = LinalgError;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self, Self::Error> {
        CVector::new(pairs.into_iter().map(|[re, im]| c(re, im)).collect())
    }
}

impl From<CVector> for Vec<[f64; 2]> {
    fn from(v: CVector) -> Self {
        v.0.iter().map(|z| [z.re, z.im]).collect()
    }
}

/// `(a+bi, c+di, ...)`.
impl std::fmt::Display for CVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.entries().iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", c.re, c.im)?;
        }
        write!(f, ")")
    }
}

/// A square complex matrix with a cached determinant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct CMatrix {
    entries: DMatrix<C64>,
    determinant: C64,
}

impl CMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self, LinalgError> {
        if entries.nrows() != entries.ncols() {
            return Err(LinalgError::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if let Some(i) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite(i));
        }
        let determinant = entries.determinant();
        Ok(Self {
            entries,
            determinant,
        })
    }

    /// Row-major construction.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is finite")
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { c(0.0, 0.0) }))
            .expect("finite diagonal")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn determinant(&self) -> C64 {
        self.determinant
    }

    /// Relative disagreement between the cached determinant and a fresh LU determinant.
    pub fn determinant_drift(&self) -> f64 {
        let fresh = self.entries.clone().lu().determinant();
        let scale = fresh.norm().max(self.determinant.norm()).max(f64::MIN_POSITIVE);
        (fresh - self.determinant).norm() / scale
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        CVector::from_dvector(&self.entries * v.as_dvector())
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        CMatrix::new(&self.entries * &other.entries).expect("product of finite matrices")
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::new(self.entries.adjoint()).expect("finite")
    }

    pub fn inverse(&self) -> Result<CMatrix, LinalgError> {
        let scale = self.operator_norm().max(f64::MIN_POSITIVE);
        if self.determinant.norm() <= 1e-12 * scale.powi(self.dim() as i32) {
            return Err(LinalgError::Singular(self.determinant.norm()));
        }
        let inv = self
            .entries
            .clone()
            .try_inverse()
            .ok_or(LinalgError::Singular(self.determinant.norm()))?;
        CMatrix::new(inv)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.entries
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    pub fn is_lower_triangular(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (i + 1..n).all(|j| self.entries[(i, j)].norm() <= tol))
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for CMatrix {
    type Error = LinalgError;

    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> Result<Self, Self::Error> {
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| c(re, im)).collect())
            .collect();
        CMatrix::from_rows(&rows)
    }
}

impl From<CMatrix> for Vec<Vec<[f64; 2]>> {
    fn from(m: CMatrix) -> Self {
        let n = m.dim();
        (0..n)
            .map(|i| (0..n).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
            .collect()
    }
}

/// Orthonormal basis of the orthogonal complement of `span(directions)` in `C^n`.
///
/// Obtained by Gram-Schmidt of the standard basis vectors against the given
/// (orthonormal) directions, keeping candidates in index order. The result is
/// deterministic for fixed input.
pub fn orthonormal_complement(directions: &[CVector], n: usize) -> Vec<CVector> {
    let mut accepted: Vec<DVector<C64>> =
        directions.iter().map(|d| d.as_dvector().clone()).collect();
    let mut out = Vec::new();
    let target = n.saturating_sub(directions.len());
    for j in 0..n {
        if out.len() == target {
            break;
        }
        let mut v = DVector::<C64>::zeros(n);
        v[j] = c(1.0, 0.0);
        // Two passes of classical Gram-Schmidt.
        for _ in 0..2 {
            for q in &accepted {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= c(norm, 0.0);
            accepted.push(v.clone());
            out.push(CVector::from_dvector(v));
        }
    }
    out
}

/// Max of `|<b_i, b_j> - delta_ij|` over a family of vectors.
pub fn gram_residual(vectors: &[CVector]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let g = a.inner(b);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - c(target, 0.0)).norm());
        }
    }
    worst
}

/// Standard complex Gaussian vector (independent real and imaginary parts).
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary matrix via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    CMatrix::new(q).expect("finite unitary")
}

/// Random matrix with i.i.d. complex Gaussian entries, shifted away from singularity.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    loop {
        let m = DMatrix::from_fn(n, n, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = CMatrix::new(m).expect("finite");
        let sv = m.entries.clone().singular_values();
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        if smin > 0.05 * smax {
            return m;
        }
    }
}
