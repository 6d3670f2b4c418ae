//! Quantum-channel representations and structural checks.
//!
//! Channels are carried either as a Choi matrix on the `output ⊗ input`
//! space or as a set of Kraus operators. The two are interconvertible here,
//! and both can be applied to states. The Choi ordering is fixed so that
//! tracing out the input factor of `C (I ⊗ ρᵀ)` applies the channel:
//!
//! `Φ(ρ)[a,b] = Σ_{ij} C[(a,i),(b,j)] ρ[i,j]`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::Error;
use crate::qmat::{
    eigh_desc, ComplexMatrix, DensityMatrix, HermitianMatrix, Subsystem,
};
use crate::tol;
use crate::Result;

/// Choi matrix of a linear map, Hermitian on the `d_out * d_in` space with
/// the output factor first.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    mat: HermitianMatrix,
    d_out: usize,
    d_in: usize,
}

impl ChoiMatrix {
    pub fn new(mat: HermitianMatrix, d_out: usize, d_in: usize) -> Result<Self> {
        if mat.dim() != d_out * d_in {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix must be {}x{} for d_out={d_out}, d_in={d_in}, got {}x{}",
                d_out * d_in,
                d_out * d_in,
                mat.dim(),
                mat.dim()
            )));
        }
        Ok(Self { mat, d_out, d_in })
    }

    /// Choi matrix of the identity channel on dimension `d`.
    pub fn identity_channel(d: usize) -> Self {
        let id = ComplexMatrix::identity(d);
        kraus_to_choi(&KrausSet::new(vec![id]).expect("one operator"))
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.mat
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.mat.as_matrix()
    }

    #[inline]
    fn entry(&self, a: usize, i: usize, b: usize, j: usize) -> Complex64 {
        self.mat.get(a * self.d_in + i, b * self.d_in + j)
    }
}

/// Non-empty set of Kraus operators with uniform dimensions.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators.first().ok_or_else(|| {
            Error::InvalidArgument("Kraus set must contain at least one operator".into())
        })?;
        let (r, c) = (first.n_rows(), first.n_cols());
        if operators.iter().any(|k| k.n_rows() != r || k.n_cols() != c) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must share dimensions".into(),
            ));
        }
        Ok(Self { operators })
    }

    /// Random trace-preserving set: Ginibre draws renormalized by
    /// `S^{-1/2}` where `S = Σ G† G`.
    pub fn random_tp<R: Rng + ?Sized>(d: usize, n_ops: usize, rng: &mut R) -> Result<Self> {
        let draws: Vec<ComplexMatrix> = (0..n_ops.max(1))
            .map(|_| ComplexMatrix::random_ginibre(d, d, rng))
            .collect();
        let mut sum = ComplexMatrix::zeros(d, d);
        for g in &draws {
            sum = &sum + &(&g.adjoint() * g);
        }
        let s = HermitianMatrix::new(sum)?;
        let inv_sqrt = eigh_desc(&s)?.apply_function(|x| 1.0 / x.max(1e-300).sqrt());
        let ops = draws.iter().map(|g| g * &inv_sqrt).collect();
        Self::new(ops)
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn d_out(&self) -> usize {
        self.operators[0].n_rows()
    }

    pub fn d_in(&self) -> usize {
        self.operators[0].n_cols()
    }

    /// `Σ K ρ K†` on a raw matrix.
    pub fn apply_linear(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.d_in();
        if rho.n_rows() != d || rho.n_cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "Kraus application needs a {d}x{d} input, got {}x{}",
                rho.n_rows(),
                rho.n_cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.d_out(), self.d_out());
        for k in &self.operators {
            out = &out + &(&(k * rho) * &k.adjoint());
        }
        Ok(out)
    }

    /// `‖Σ K†K - I‖_max`, zero for a trace-preserving set.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.d_in();
        let mut sum = ComplexMatrix::zeros(d, d);
        for k in &self.operators {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

/// Apply a channel through its Choi matrix to a raw matrix (the linear
/// extension; the output is not symmetrized).
pub fn apply_choi_linear(c: &ChoiMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.n_rows() != c.d_in || rho.n_cols() != c.d_in {
        return Err(Error::DimensionMismatch(format!(
            "channel expects a {0}x{0} input, got {1}x{2}",
            c.d_in,
            rho.n_rows(),
            rho.n_cols()
        )));
    }
    let d_out = c.d_out;
    let d_in = c.d_in;
    Ok(ComplexMatrix::from_fn(d_out, d_out, |a, b| {
        let mut acc = Complex64::ZERO;
        for i in 0..d_in {
            for j in 0..d_in {
                acc += c.entry(a, i, b, j) * rho.get(i, j);
            }
        }
        acc
    }))
}

/// Apply a channel to a state. The result is Hermitian but not necessarily
/// unit-trace (the map need not be trace-preserving).
pub fn apply_choi(c: &ChoiMatrix, rho: &DensityMatrix) -> Result<HermitianMatrix> {
    let out = apply_choi_linear(c, rho.as_matrix())?;
    HermitianMatrix::new_with_tol(out, 1e-8)
}

/// Trace-preservation verdict with the defect `‖Tr_out[C] - I‖_max`.
#[derive(Debug, Clone)]
pub struct TracePreservationReport {
    pub is_tp: bool,
    pub defect: f64,
    /// `Tr_out[C] - I` on the input space.
    pub defect_matrix: ComplexMatrix,
}

/// Check `Tr_out[C] = I` within `tol`.
pub fn is_trace_preserving(c: &ChoiMatrix, tolerance: f64) -> TracePreservationReport {
    let reduced = c
        .matrix()
        .partial_trace(c.d_out, c.d_in, Subsystem::First)
        .expect("Choi dimensions are consistent by construction");
    let defect_matrix = &reduced - &ComplexMatrix::identity(c.d_in);
    let defect = defect_matrix.max_abs();
    TracePreservationReport {
        is_tp: defect <= tolerance,
        defect,
        defect_matrix,
    }
}

/// Complete-positivity verdict with the minimum eigenvalue of the Choi
/// matrix.
#[derive(Debug, Clone)]
pub struct CompletePositivityReport {
    pub is_cp: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Check `C ⪰ 0`: the minimum eigenvalue must be at least
/// `-tol * max(1, λ_max(C))`.
pub fn is_completely_positive(
    c: &ChoiMatrix,
    tolerance: f64,
) -> Result<CompletePositivityReport> {
    let spectrum = eigh_desc(&c.mat)?;
    let max = spectrum.eigenvalues()[0];
    let min = *spectrum.eigenvalues().last().expect("non-empty");
    Ok(CompletePositivityReport {
        is_cp: min >= -tolerance * 1.0_f64.max(max),
        min_eigenvalue: min,
        max_eigenvalue: max,
    })
}

/// `C = Σ_k vec(K_k) vec(K_k)†`, positive semidefinite by construction.
pub fn kraus_to_choi(kraus: &KrausSet) -> ChoiMatrix {
    let d_out = kraus.d_out();
    let d_in = kraus.d_in();
    let n = d_out * d_in;
    let mut mat = ComplexMatrix::zeros(n, n);
    for k in kraus.operators() {
        let v = k.vectorize();
        mat = &mat + &v.column_outer(&v);
    }
    let herm = HermitianMatrix::new(mat).expect("sum of outer products is Hermitian");
    ChoiMatrix {
        mat: herm,
        d_out,
        d_in,
    }
}

/// Decompose a positive semidefinite Choi matrix into Kraus operators:
/// the `√λ_k`-scaled eigenvectors, un-vectorized. Eigenvalues below
/// `1e-12 * λ_max` are treated as numerical rank and dropped.
pub fn choi_to_kraus(c: &ChoiMatrix, tolerance: f64) -> Result<KrausSet> {
    let spectrum = eigh_desc(&c.mat)?;
    let max = spectrum.eigenvalues()[0];
    let min = *spectrum.eigenvalues().last().expect("non-empty");
    if min < -tolerance * 1.0_f64.max(max) {
        return Err(Error::NotPsd(min));
    }
    let cut = tol::RANK * max.max(0.0);
    let mut operators = Vec::new();
    for (k, &lambda) in spectrum.eigenvalues().iter().enumerate() {
        if lambda <= cut {
            continue;
        }
        let v = spectrum
            .eigenvector(k)
            .scale(Complex64::new(lambda.sqrt(), 0.0));
        operators.push(ComplexMatrix::from_vectorized(&v, c.d_out, c.d_in)?);
    }
    if operators.is_empty() {
        return Err(Error::NotPsd(min));
    }
    KrausSet::new(operators)
}

/// The `d² x d²` matrix `T` with `T vec(ρ) = vec(Φ(ρ))`, a reshuffle of the
/// Choi matrix. Square channels only.
pub fn transfer_matrix(c: &ChoiMatrix) -> Result<ComplexMatrix> {
    if c.d_out != c.d_in {
        return Err(Error::DimensionMismatch(format!(
            "transfer matrix needs a square channel, got d_out={} d_in={}",
            c.d_out, c.d_in
        )));
    }
    let d = c.d_in;
    Ok(ComplexMatrix::from_fn(d * d, d * d, |row, col| {
        let (a, b) = (row / d, row % d);
        let (i, j) = (col / d, col % d);
        c.entry(a, i, b, j)
    }))
}

/// A fixed point `Φ(ρ) = ρ` together with uniqueness information.
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub state: DensityMatrix,
    /// Dimension of the fixed subspace of the transfer matrix.
    pub space_dim: usize,
    pub unique: bool,
    /// `‖Φ(ρ) - ρ‖_max` of the returned state.
    pub residual: f64,
}

/// Find a fixed point of a (trace-preserving) channel as the null space of
/// `T - I`.
///
/// Directions with singular value at most `tol` count as fixed. When the
/// fixed subspace has dimension above one, the returned state is the
/// projection of the maximally mixed state onto it and `unique` is false.
pub fn fixed_point(c: &ChoiMatrix, tolerance: f64) -> Result<FixedPointReport> {
    let t = transfer_matrix(c)?;
    let d = c.d_in;
    let n = d * d;
    let shifted = &t - &ComplexMatrix::identity(n);

    let nm = nalgebra::DMatrix::from_fn(n, n, |i, j| shifted.get(i, j));
    let svd = nalgebra::SVD::try_new(nm, false, true, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::EigenFailure(format!("SVD did not converge at n={n}")))?;
    let v_t = svd.v_t.as_ref().expect("requested V^H");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));

    let null_dim = order
        .iter()
        .take_while(|&&k| svd.singular_values[k] <= tolerance)
        .count();
    if null_dim == 0 {
        let smallest = svd.singular_values[order[0]];
        return Err(Error::NoFixedPoint(smallest, tolerance));
    }

    // Right singular vector k is column k of V, i.e. the conjugated row k
    // of V^H.
    let null_vector = |k: usize| -> ComplexMatrix {
        ComplexMatrix::from_fn(n, 1, |i, _| v_t[(k, i)].conj())
    };

    // Prefer the projection of vec(I/d) onto the fixed subspace: it keeps
    // the result Hermitian and trace-positive whenever possible.
    let mixed = ComplexMatrix::identity(d)
        .scale(Complex64::new(1.0 / d as f64, 0.0))
        .vectorize();
    let mut projected = ComplexMatrix::zeros(n, 1);
    for &k in order.iter().take(null_dim) {
        let basis = null_vector(k);
        let coeff = basis.column_dot(&mixed);
        projected = &projected + &basis.scale(coeff);
    }
    let norm = projected.column_dot(&projected).re.sqrt();
    let candidate = if norm > 1e-12 {
        projected
    } else {
        null_vector(order[0])
    };

    let raw = ComplexMatrix::from_vectorized(&candidate, d, d)?;
    let hermitian_part = (&raw + &raw.adjoint()).scale(Complex64::new(0.5, 0.0));
    let part = if hermitian_part.max_abs() > 1e-12 * raw.max_abs().max(1.0) {
        hermitian_part
    } else {
        // Anti-Hermitian fixed direction: i·X is the Hermitian one.
        let rotated = raw.scale(Complex64::new(0.0, 1.0));
        (&rotated + &rotated.adjoint()).scale(Complex64::new(0.5, 0.0))
    };
    let trace = part.trace().re;
    if trace.abs() < 1e-12 {
        return Err(Error::TracelessFixedPoint(trace));
    }
    let normalized = part.scale(Complex64::new(1.0 / trace, 0.0));
    let state = DensityMatrix::from_complex(normalized)?;

    let image = apply_choi_linear(c, state.as_matrix())?;
    let residual = image.max_abs_diff(state.as_matrix());
    if residual > tolerance * 10.0 {
        return Err(Error::NoFixedPoint(residual, tolerance));
    }

    Ok(FixedPointReport {
        state,
        space_dim: null_dim,
        unique: null_dim == 1,
        residual,
    })
}
