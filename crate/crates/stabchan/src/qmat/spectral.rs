//! Hermitian eigendecomposition with deterministic ordering, plus the
//! spectral-function operations built on it (thermal states, unitary
//! evolution, trace distance).

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, DensityMatrix, HermitianMatrix};
use crate::error::Error;
use crate::Result;

/// Eigenvalues sorted descending with phase-fixed orthonormal eigenvectors.
///
/// Ties are broken by lexicographic order of the phase-fixed eigenvectors
/// (larger vector first), so identical inputs always produce identical
/// output, including the choice of `v_max` for degenerate spectra.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector `k` as a column vector.
    pub fn eigenvector(&self, k: usize) -> ComplexMatrix {
        let d = self.eigenvectors.n_rows();
        ComplexMatrix::from_fn(d, 1, |i, _| self.eigenvectors.get(i, k))
    }

    /// All eigenvectors as matrix columns.
    pub fn eigenvector_matrix(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    /// `Σ λ_k |v_k⟩⟨v_k|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_function(|x| x)
    }

    /// `Σ f(λ_k) |v_k⟩⟨v_k|` for a real spectral function.
    pub fn apply_function<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        self.apply_complex_function(|x| Complex64::new(f(x), 0.0))
    }

    /// `Σ f(λ_k) |v_k⟩⟨v_k|` for a complex spectral function.
    pub fn apply_complex_function<F: Fn(f64) -> Complex64>(&self, f: F) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let d = v.n_rows();
        let weights: Vec<Complex64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(d, d, |i, j| {
            (0..self.eigenvalues.len())
                .map(|k| weights[k] * v.get(i, k) * v.get(j, k).conj())
                .sum()
        })
    }
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.n_rows(), m.n_cols(), |i, j| m.get(i, j))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
///
/// Each eigenvector's first component of largest magnitude is rotated to be
/// real and non-negative, making the output reproducible across runs.
pub fn eigh_desc(m: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let d = m.dim();
    let eig = nalgebra::SymmetricEigen::try_new(to_nalgebra(m.as_matrix()), f64::EPSILON, 100_000)
        .ok_or_else(|| {
            Error::EigenFailure(format!(
                "symmetric QR did not converge for d={d}, max|entry|={:.3e}, trace={:.3e}",
                m.max_abs(),
                m.trace_real()
            ))
        })?;

    let mut columns: Vec<(f64, Vec<Complex64>)> = (0..d)
        .map(|k| {
            let mut v: Vec<Complex64> = (0..d).map(|i| eig.eigenvectors[(i, k)]).collect();
            phase_fix(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();

    columns.sort_by(|(la, va), (lb, vb)| {
        lb.total_cmp(la).then_with(|| lex_cmp(vb, va))
    });

    let eigenvalues: Vec<f64> = columns.iter().map(|(l, _)| *l).collect();
    let eigenvectors = ComplexMatrix::from_fn(d, d, |i, k| columns[k].1[i]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Rotate a global phase so the first component of largest magnitude becomes
/// real and non-negative.
fn phase_fix(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_norm = v[0].norm();
    for (i, z) in v.iter().enumerate().skip(1) {
        let n = z.norm();
        if n > best_norm {
            best = i;
            best_norm = n;
        }
    }
    if best_norm > 0.0 {
        let phase = v[best].conj() / best_norm;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    std::cmp::Ordering::Equal
}

/// Thermal state `exp(-βH) / tr[exp(-βH)]`.
///
/// Computed spectrally with the largest Boltzmann exponent shifted to zero,
/// so large `β` or large spectral ranges cannot overflow.
pub fn gibbs(hamiltonian: &HermitianMatrix, beta: f64) -> Result<DensityMatrix> {
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "inverse temperature must be finite, got {beta}"
        )));
    }
    let spectrum = eigh_desc(hamiltonian)?;
    let exponents: Vec<f64> = spectrum.eigenvalues().iter().map(|&e| -beta * e).collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = exponents.iter().map(|&x| (x - shift).exp()).collect();
    let partition: f64 = weights.iter().sum();

    let d = hamiltonian.dim();
    let v = spectrum.eigenvector_matrix();
    let rho = ComplexMatrix::from_fn(d, d, |i, j| {
        (0..d)
            .map(|k| v.get(i, k) * v.get(j, k).conj() * (weights[k] / partition))
            .sum()
    });
    DensityMatrix::from_complex(rho)
}

/// `exp(-i t H)` for Hermitian `H` (ħ = 1), via the spectral decomposition.
pub fn evolution_unitary(hamiltonian: &HermitianMatrix, t: f64) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "evolution time must be finite, got {t}"
        )));
    }
    let spectrum = eigh_desc(hamiltonian)?;
    Ok(spectrum.apply_complex_function(|e| (Complex64::new(0.0, -t * e)).exp()))
}

/// Trace distance `½ tr|A - B|`, computed from the eigenvalues of the
/// Hermitian difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance needs equal dimensions, got {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    hermitian_half_l1(a.as_matrix(), b.as_matrix())
}

/// `½ Σ |eig(A - B)|` for Hermitian `A`, `B`; shared by [`trace_distance`]
/// and internal convergence checks.
pub(crate) fn hermitian_half_l1(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let diff = HermitianMatrix::new_with_tol(a - b, 1e-8)?;
    let spectrum = eigh_desc(&diff)?;
    Ok(0.5 * spectrum.eigenvalues().iter().map(|x| x.abs()).sum::<f64>())
}
