//! Row-major dense complex matrices and the Hermitian/state layers.

use std::fmt;
use std::ops::{Add, Deref, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;

use crate::error::Error;
use crate::tol;
use crate::Result;

/// Which tensor factor of a bipartite operator to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major entries. Rejects length mismatches and non-finite
    /// entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(format!("{bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag_real(entries: &[f64]) -> Self {
        let d = entries.len();
        let mut m = Self::zeros(d, d);
        for (i, &x) in entries.iter().enumerate() {
            m.set(i, i, Complex64::new(x, 0.0));
        }
        m
    }

    pub fn from_fn<F>(rows: usize, cols: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Column vector `e_k` of dimension `dim`.
    pub fn basis_column(dim: usize, k: usize) -> Self {
        let mut m = Self::zeros(dim, 1);
        m.set(k, 0, Complex64::ONE);
        m
    }

    /// Ginibre matrix: independent standard complex Gaussian entries.
    pub fn random_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| {
            Complex64::new(gaussian(rng), gaussian(rng))
        })
    }

    /// Haar-like random unitary: Gram-Schmidt orthonormalization of a Ginibre
    /// matrix.
    pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = Self::random_ginibre(dim, dim, rng);
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut v: Vec<Complex64> = (0..dim).map(|i| g.get(i, j)).collect();
            for u in &cols {
                let overlap: Complex64 =
                    u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= overlap * ui;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for vi in v.iter_mut() {
                *vi /= norm;
            }
            cols.push(v);
        }
        Self::from_fn(dim, dim, |i, j| cols[j][i])
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude (max norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entry-wise equality within `tol` in max norm.
    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.max_abs_diff(other) <= tolerance
    }

    /// Max-norm deviation of `U U†` and `U† U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let id = Self::identity(self.rows);
        let d1 = (self * &self.adjoint()).max_abs_diff(&id);
        let d2 = (&self.adjoint() * self).max_abs_diff(&id);
        d1.max(d2)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Self::zeros(r1 * r2, c1 * c2);
        for i1 in 0..r1 {
            for j1 in 0..c1 {
                let a = self.get(i1, j1);
                if a == Complex64::ZERO {
                    continue;
                }
                for i2 in 0..r2 {
                    for j2 in 0..c2 {
                        out.set(i1 * r2 + i2, j1 * c2 + j2, a * other.get(i2, j2));
                    }
                }
            }
        }
        out
    }

    /// Partial trace of an operator on a `d1 ⊗ d2` space.
    ///
    /// Tracing [`Subsystem::Second`] returns the `d1 x d1` reduction,
    /// tracing [`Subsystem::First`] the `d2 x d2` one. The total trace is
    /// preserved.
    pub fn partial_trace(&self, d1: usize, d2: usize, which: Subsystem) -> Result<Self> {
        let d = d1 * d2;
        if self.rows != d || self.cols != d {
            return Err(Error::DimensionMismatch(format!(
                "partial trace needs a {d}x{d} matrix for d1={d1}, d2={d2}, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(match which {
            Subsystem::Second => Self::from_fn(d1, d1, |i, j| {
                (0..d2).map(|k| self.get(i * d2 + k, j * d2 + k)).sum()
            }),
            Subsystem::First => Self::from_fn(d2, d2, |i, j| {
                (0..d1).map(|k| self.get(k * d2 + i, k * d2 + j)).sum()
            }),
        })
    }

    /// Row-major vectorization: `vec(|a⟩⟨b|) = e_a ⊗ e_b` as a column.
    ///
    /// Satisfies `(A ⊗ B) vec(M) = vec(A M Bᵀ)`.
    pub fn vectorize(&self) -> Self {
        Self {
            rows: self.rows * self.cols,
            cols: 1,
            data: self.data.clone(),
        }
    }

    /// Inverse of [`Self::vectorize`]: reshape a `rows*cols` column back into
    /// a matrix.
    pub fn from_vectorized(column: &Self, rows: usize, cols: usize) -> Result<Self> {
        if column.cols != 1 || column.rows != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot reshape a {}x{} vector into {}x{}",
                column.rows, column.cols, rows, cols
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: column.data.clone(),
        })
    }

    /// Inner product `⟨self|other⟩` of two column vectors.
    pub fn column_dot(&self, other: &Self) -> Complex64 {
        debug_assert!(self.cols == 1 && other.cols == 1 && self.rows == other.rows);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Outer product `|self⟩⟨other|` of two column vectors.
    pub fn column_outer(&self, other: &Self) -> Self {
        debug_assert!(self.cols == 1 && other.cols == 1);
        Self::from_fn(self.rows, other.rows, |i, j| {
            self.data[i] * other.data[j].conj()
        })
    }

    fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; avoids log(0).
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Square complex matrix with `M = M†` enforced on construction.
///
/// The input may deviate from exact Hermiticity by at most
/// `tol * max(1, ‖M‖_max)`; it is then symmetrized exactly as `(M + M†)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    base: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::new_with_tol(m, tol::HERMITICITY)
    }

    pub fn new_with_tol(m: ComplexMatrix, tolerance: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.n_rows(),
                m.n_cols()
            )));
        }
        let adj = m.adjoint();
        let defect = m.max_abs_diff(&adj);
        let allowed = tolerance * 1.0_f64.max(m.max_abs());
        if defect > allowed {
            return Err(Error::NotHermitian {
                defect,
                tol: allowed,
            });
        }
        let symmetrized = (&m + &adj).scale(Complex64::new(0.5, 0.0));
        Ok(Self { base: symmetrized })
    }

    /// Identity scaled to unit trace lives in [`DensityMatrix`]; this is the
    /// plain identity.
    pub fn identity(dim: usize) -> Self {
        Self {
            base: ComplexMatrix::identity(dim),
        }
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self {
            base: ComplexMatrix::diag_real(entries),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.n_rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.base
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.base
    }

    /// Real trace of the Hermitian matrix.
    pub fn trace_real(&self) -> f64 {
        self.base.trace().re
    }

    /// Expectation value `⟨v|M|v⟩` for a column vector `v` (real for
    /// Hermitian `M`).
    pub fn expectation(&self, v: &ComplexMatrix) -> f64 {
        (&(&v.adjoint() * &self.base) * v).get(0, 0).re
    }
}

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.base
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    base: HermitianMatrix,
}

impl DensityMatrix {
    /// Validate the state invariants: `|tr - 1| ≤ 1e-10` and minimum
    /// eigenvalue at least `-1e-9` times the largest eigenvalue magnitude.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let trace = h.trace_real();
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(Error::NotAState(format!(
                "trace is {trace:.15}, expected 1"
            )));
        }
        let spectrum = super::spectral::eigh_desc(&h)?;
        let eigs = spectrum.eigenvalues();
        let scale = eigs
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let min = *eigs.last().expect("non-empty spectrum");
        if min < -tol::PSD_SLACK * scale {
            return Err(Error::NotAState(format!(
                "minimum eigenvalue {min:.6e} is negative beyond slack"
            )));
        }
        Ok(Self { base: h })
    }

    pub fn from_complex(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Pure state `|v⟩⟨v|` from a column vector, normalized.
    pub fn pure(v: &ComplexMatrix) -> Result<Self> {
        if v.n_cols() != 1 {
            return Err(Error::DimensionMismatch(
                "pure state requires a column vector".into(),
            ));
        }
        let norm_sq = v.column_dot(v).re;
        if norm_sq <= 0.0 {
            return Err(Error::NotAState("zero vector".into()));
        }
        let outer = v.column_outer(v).scale(Complex64::new(1.0 / norm_sq, 0.0));
        Self::from_complex(outer)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
        Self {
            base: HermitianMatrix { base: m },
        }
    }

    /// Random full-rank state `G G† / tr[G G†]` with Ginibre `G`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = ComplexMatrix::random_ginibre(dim, dim, rng);
        let gg = &g * &g.adjoint();
        let trace = gg.trace().re;
        let m = gg.scale(Complex64::new(1.0 / trace, 0.0));
        let h = HermitianMatrix::new(m).expect("G G† is Hermitian");
        Self { base: h }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.base
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.base
    }
}
