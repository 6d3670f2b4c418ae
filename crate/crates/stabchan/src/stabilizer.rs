//! Channels with a prescribed fixed point.
//!
//! For a target state `σ` with top eigenpair `(λ_max, v_max)`, the
//! minimum-trace Choi matrix that fixes `σ` is
//!
//! `Z_σ = σ ⊗ (|v_max⟩⟨v_max|)ᵀ / λ_max`,
//!
//! with trace `1/λ_max`. It is not trace-preserving; adding a completion
//! state `B` on the complementary sector,
//!
//! `C[σ,B] = σ ⊗ Pᵀ/λ_max + B ⊗ (I - Pᵀ/λ_max)`, `P = |v_max⟩⟨v_max|`,
//!
//! yields a trace-preserving family with fixed point `σ`, valid for
//! `⟨v_max|B|v_max⟩ ≤ λ_max`. One application sends `ρ` to
//! `p σ + (1-p) B` with `p = ⟨v_max|ρ|v_max⟩/λ_max`, so iterating drives
//! the `B`-weight down geometrically at rate `1-q`, `q = ⟨v_max|B|v_max⟩/λ_max`.
//! This module builds these objects, inverts the family construction, and
//! traces the iteration.

use num_complex::Complex64;

use crate::channel::{apply_choi_linear, is_trace_preserving, ChoiMatrix, KrausSet};
use crate::error::Error;
use crate::qmat::{
    eigh_desc, evolution_unitary, trace_distance, ComplexMatrix, DensityMatrix,
    HermitianMatrix, SpectralDecomposition,
};
use crate::tol;
use crate::Result;

/// Consecutive no-progress steps before an iteration is flagged stagnant.
const STAGNATION_STEPS: usize = 50;

/// A target state together with its top eigenpair.
#[derive(Debug, Clone)]
pub struct StabilizerTarget {
    sigma: DensityMatrix,
    spectrum: SpectralDecomposition,
    lambda_max: f64,
    v_max: ComplexMatrix,
    degenerate: bool,
}

impl StabilizerTarget {
    pub fn new(sigma: DensityMatrix) -> Result<Self> {
        let spectrum = eigh_desc(sigma.as_hermitian())?;
        let lambda_max = spectrum.eigenvalues()[0];
        let v_max = spectrum.eigenvector(0);
        // The tie-break in eigh_desc makes v_max deterministic, but a
        // degenerate top eigenvalue means the choice is a convention.
        let degenerate = spectrum.len() > 1 && spectrum.eigenvalues()[1] > lambda_max - 1e-9;
        Ok(Self {
            sigma,
            spectrum,
            lambda_max,
            v_max,
            degenerate,
        })
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.sigma
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Eigenvector of the largest eigenvalue, as a column.
    pub fn v_max(&self) -> &ComplexMatrix {
        &self.v_max
    }

    /// True when the top eigenvalue is degenerate within 1e-9 and the choice
    /// of `v_max` is only a tie-break convention.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// `(|v_max⟩⟨v_max|)ᵀ`, the projector appearing on the input factor.
    fn projector_t(&self) -> ComplexMatrix {
        self.v_max.column_outer(&self.v_max).transpose()
    }
}

/// Minimum-trace Choi matrix fixing the target: `σ ⊗ Pᵀ / λ_max`.
///
/// Its trace is `1/λ_max` and it stabilizes `σ` exactly, but it is not
/// trace-preserving. A degenerate target ([`StabilizerTarget::is_degenerate`])
/// makes the construction convention-dependent; callers should surface that
/// flag.
pub fn min_choi(target: &StabilizerTarget) -> ChoiMatrix {
    let scale = Complex64::new(1.0 / target.lambda_max, 0.0);
    let mat = target.sigma.kron(&target.projector_t()).scale(scale);
    let herm = HermitianMatrix::new(mat).expect("Kronecker of Hermitian factors");
    let d = target.dim();
    ChoiMatrix::new(herm, d, d).expect("dimensions agree by construction")
}

/// Kraus operators of [`min_choi`]: `A_i = √(λ_i/λ_max) |v_i⟩⟨v_max|` for
/// each non-zero eigenvalue `λ_i` of the target.
///
/// They satisfy `Σ A_i† A_i = |v_max⟩⟨v_max| / λ_max`, so the set is not
/// complete unless the target is pure.
pub fn min_kraus(target: &StabilizerTarget) -> KrausSet {
    let lambda = target.lambda_max;
    let mut ops = Vec::new();
    for (i, &l) in target.spectrum.eigenvalues().iter().enumerate() {
        if l <= tol::RANK {
            continue;
        }
        let weight = Complex64::new((l / lambda).sqrt(), 0.0);
        ops.push(
            target
                .spectrum
                .eigenvector(i)
                .column_outer(&target.v_max)
                .scale(weight),
        );
    }
    KrausSet::new(ops).expect("λ_max > 0 yields at least one operator")
}

/// Block-diagonal dilation of a Kraus set: `A = diag(K_1, ..., K_m)` acting
/// on `ancilla ⊗ system`, with
/// `Tr_ancilla[A (I ⊗ ρ) A†] = Σ K_i ρ K_i†`.
pub fn ancilla_dilation(kraus: &KrausSet) -> Result<ComplexMatrix> {
    let d = kraus.d_in();
    if kraus.d_out() != d {
        return Err(Error::DimensionMismatch(
            "ancilla dilation requires square Kraus operators".into(),
        ));
    }
    let m = kraus.len();
    let mut a = ComplexMatrix::zeros(m * d, m * d);
    for (block, k) in kraus.operators().iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                a.set(block * d + i, block * d + j, k.get(i, j));
            }
        }
    }
    Ok(a)
}

/// Trace-preserving completion `C[σ,B] = σ⊗Pᵀ/λ + B⊗(I - Pᵀ/λ)`.
///
/// Requires the validity condition `⟨v_max|B|v_max⟩ ≤ λ_max`. The result is
/// always trace-preserving with fixed point `σ`, but complete positivity is
/// not guaranteed; check it separately (see
/// [`FamilyChannel::cp_sector_min_eig`] or
/// [`crate::channel::is_completely_positive`]).
pub fn tp_family_choi(target: &StabilizerTarget, completion: &DensityMatrix) -> Result<ChoiMatrix> {
    let d = target.dim();
    if completion.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "completion dimension {} does not match target dimension {d}",
            completion.dim()
        )));
    }
    let overlap = completion.as_hermitian().expectation(&target.v_max);
    if overlap > target.lambda_max + 1e-10 {
        return Err(Error::ValidityCondition {
            overlap,
            lambda_max: target.lambda_max,
        });
    }
    let p_t = target.projector_t();
    let scale = Complex64::new(1.0 / target.lambda_max, 0.0);
    let rest = &ComplexMatrix::identity(d) - &p_t.scale(scale);
    let mat = &target.sigma.kron(&p_t.scale(scale)) + &completion.kron(&rest);
    ChoiMatrix::new(HermitianMatrix::new(mat)?, d, d)
}

/// A member of the trace-preserving family, with the completion overlap
/// `q = ⟨v_max|B|v_max⟩ / λ_max` precomputed.
#[derive(Debug, Clone)]
pub struct FamilyChannel {
    target: StabilizerTarget,
    completion: DensityMatrix,
    overlap_q: f64,
}

impl FamilyChannel {
    pub fn new(target: StabilizerTarget, completion: DensityMatrix) -> Result<Self> {
        if completion.dim() != target.dim() {
            return Err(Error::DimensionMismatch(format!(
                "completion dimension {} does not match target dimension {}",
                completion.dim(),
                target.dim()
            )));
        }
        let overlap = completion.as_hermitian().expectation(&target.v_max);
        if overlap > target.lambda_max + 1e-10 {
            return Err(Error::ValidityCondition {
                overlap,
                lambda_max: target.lambda_max,
            });
        }
        let overlap_q = (overlap / target.lambda_max).clamp(0.0, 1.0);
        Ok(Self {
            target,
            completion,
            overlap_q,
        })
    }

    pub fn target(&self) -> &StabilizerTarget {
        &self.target
    }

    pub fn completion(&self) -> &DensityMatrix {
        &self.completion
    }

    /// `q = ⟨v_max|B|v_max⟩ / λ_max ∈ [0, 1]`; the per-step shrink factor of
    /// the completion weight is `1 - q`.
    pub fn overlap_q(&self) -> f64 {
        self.overlap_q
    }

    /// Choi matrix of this family member.
    pub fn choi(&self) -> ChoiMatrix {
        tp_family_choi(&self.target, &self.completion)
            .expect("validity was checked at construction")
    }

    /// Minimum eigenvalue of the sector matrix `σ - (1-λ_max)B`.
    ///
    /// The family member is completely positive exactly when this is
    /// non-negative; the Choi matrix itself then has minimum eigenvalue
    /// `min(this / λ_max, min eig B)`.
    pub fn cp_sector_min_eig(&self) -> Result<f64> {
        let scaled = self
            .completion
            .scale(Complex64::new(1.0 - self.target.lambda_max, 0.0));
        let sector = HermitianMatrix::new(self.target.sigma.as_matrix() - &scaled)?;
        let spectrum = eigh_desc(&sector)?;
        Ok(*spectrum.eigenvalues().last().expect("non-empty"))
    }

    /// One application: `Φ(ρ) = p σ + (1-p) B` with
    /// `p = ⟨v_max|ρ|v_max⟩/λ_max`.
    ///
    /// In strict mode inputs with `p > 1` (outside the family's domain) are
    /// rejected; otherwise the linear extension is returned with
    /// `domain_violation` set. The output is a valid state whenever
    /// `p ∈ [0, 1]`.
    pub fn apply(&self, rho: &DensityMatrix, strict: bool) -> Result<FamilyApplication> {
        if rho.dim() != self.target.dim() {
            return Err(Error::DimensionMismatch(format!(
                "input dimension {} does not match channel dimension {}",
                rho.dim(),
                self.target.dim()
            )));
        }
        let p = rho.as_hermitian().expectation(&self.target.v_max) / self.target.lambda_max;
        let domain_violation = p > 1.0 + 1e-10;
        if strict && domain_violation {
            return Err(Error::DomainViolation(p));
        }
        let out = &self.target.sigma.scale(Complex64::new(p, 0.0))
            + &self.completion.scale(Complex64::new(1.0 - p, 0.0));
        Ok(FamilyApplication {
            state: HermitianMatrix::new(out)?,
            overlap_p: p,
            domain_violation,
        })
    }
}

/// Result of one family-channel application.
#[derive(Debug, Clone)]
pub struct FamilyApplication {
    /// `p σ + (1-p) B`; positive semidefinite when `p ∈ [0, 1]`.
    pub state: HermitianMatrix,
    /// `p = ⟨v_max|ρ|v_max⟩/λ_max`.
    pub overlap_p: f64,
    /// True when `p > 1` and the output is only the linear extension.
    pub domain_violation: bool,
}

impl FamilyApplication {
    pub fn into_state(self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.state)
    }
}

/// Free unitary evolution `ρ ↦ e^{-iτH} ρ e^{iτH}` interleaved between
/// channel applications, with one duration per step.
#[derive(Debug, Clone)]
pub struct FreeEvolution {
    pub hamiltonian: HermitianMatrix,
    pub taus: Vec<f64>,
}

/// One record of an iteration trace.
#[derive(Debug, Clone)]
pub struct IterationStep {
    pub n: usize,
    pub state: DensityMatrix,
    /// `p_n = ⟨v_max|ρ_n|v_max⟩/λ_max`.
    pub p: f64,
    /// Weight of the completion in the next application, `1 - p_n`; without
    /// free evolution it equals `(1-q)ⁿ (1-p_0)`.
    pub weight_b: f64,
    /// Trace distance to the target.
    pub dist_to_sigma: f64,
}

/// Full iteration record, step 0 being the initial state.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub steps: Vec<IterationStep>,
    /// Completion overlap `q` of the channel that was iterated.
    pub q: f64,
    /// Set when the distance to the target stayed put (above tolerance,
    /// moving less than 1e-12) for 50 consecutive steps. With `q = 0` the
    /// channel has additional fixed points and iteration need not converge
    /// to the target.
    pub stagnant: bool,
}

impl IterationTrace {
    pub fn final_distance(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.dist_to_sigma)
    }

    /// CSV export, one row per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p_n,weight_B,dist_to_sigma\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.n, s.p, s.weight_b, s.dist_to_sigma
            ));
        }
        out
    }
}

/// Iterate the channel `n_steps` times from `rho0`, recording overlap,
/// completion weight, and distance to the target at every step.
///
/// With free evolution, step `n` is `ε_{τ_n}(Φ(ρ_{n-1}))`; the `taus`
/// schedule must then have exactly `n_steps` entries.
pub fn iterate(
    fam: &FamilyChannel,
    rho0: &DensityMatrix,
    n_steps: usize,
    free_evolution: Option<&FreeEvolution>,
) -> Result<IterationTrace> {
    if let Some(fe) = free_evolution {
        if fe.taus.len() != n_steps {
            return Err(Error::InvalidArgument(format!(
                "free evolution needs {} durations, got {}",
                n_steps,
                fe.taus.len()
            )));
        }
        if fe.hamiltonian.dim() != fam.target.dim() {
            return Err(Error::DimensionMismatch(
                "free-evolution Hamiltonian dimension does not match channel".into(),
            ));
        }
    }

    let record = |n: usize, state: DensityMatrix| -> Result<IterationStep> {
        let p = state.as_hermitian().expectation(&fam.target.v_max) / fam.target.lambda_max;
        let dist = trace_distance(&state, &fam.target.sigma)?;
        Ok(IterationStep {
            n,
            state,
            p,
            weight_b: 1.0 - p,
            dist_to_sigma: dist,
        })
    };

    let mut steps = Vec::with_capacity(n_steps + 1);
    steps.push(record(0, rho0.clone())?);

    let mut stagnant = false;
    let mut no_progress = 0usize;
    for n in 1..=n_steps {
        let applied = fam.apply(&steps[n - 1].state, true)?.into_state()?;
        let state = match free_evolution {
            Some(fe) => {
                let u = evolution_unitary(&fe.hamiltonian, fe.taus[n - 1])?;
                let evolved = &(&u * applied.as_matrix()) * &u.adjoint();
                DensityMatrix::from_complex(evolved)?
            }
            None => applied,
        };
        let step = record(n, state)?;
        let prev = steps[n - 1].dist_to_sigma;
        if step.dist_to_sigma > tol::CHECK && (step.dist_to_sigma - prev).abs() <= 1e-12 {
            no_progress += 1;
            if no_progress >= STAGNATION_STEPS {
                stagnant = true;
            }
        } else {
            no_progress = 0;
        }
        steps.push(step);
    }

    Ok(IterationTrace {
        steps,
        q: fam.overlap_q,
        stagnant,
    })
}

/// Recover the completion state from a family member's Choi matrix.
///
/// `B = Φ(|w⟩⟨w|)` for any `w ⊥ v_max`; all `d-1` orthogonal basis choices
/// must agree within `tol` and the common value must be a state, else the
/// channel is not in the family.
pub fn extract_completion(
    c: &ChoiMatrix,
    target: &StabilizerTarget,
    tolerance: f64,
) -> Result<DensityMatrix> {
    let d = target.dim();
    if c.d_in() != d || c.d_out() != d {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}x{}-dimensional, target is {d}-dimensional",
            c.d_out(),
            c.d_in()
        )));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(
            "completion extraction needs dimension at least 2".into(),
        ));
    }
    let basis = complement_basis(&target.v_max);
    let images: Vec<ComplexMatrix> = basis
        .iter()
        .map(|w| apply_choi_linear(c, &w.column_outer(w)))
        .collect::<Result<_>>()?;
    for (k, image) in images.iter().enumerate().skip(1) {
        let diff = image.max_abs_diff(&images[0]);
        if diff > tolerance {
            return Err(Error::NotInFamily(format!(
                "images of orthogonal states disagree: ‖Φ(w_{k}) - Φ(w_0)‖_max = {diff:.3e}"
            )));
        }
    }
    state_from_noisy(&images[0], tolerance)
        .map_err(|e| Error::NotInFamily(format!("completion is not a state: {e}")))
}

/// Validate a noisy matrix as a state within `tol`: Hermitian and
/// unit-trace within `tol`, eigenvalues above `-max(tol, PSD slack)`.
fn state_from_noisy(m: &ComplexMatrix, tolerance: f64) -> Result<DensityMatrix> {
    let h = HermitianMatrix::new_with_tol(m.clone(), tolerance.max(tol::HERMITICITY))?;
    let trace = h.trace_real();
    if (trace - 1.0).abs() > tolerance.max(tol::TRACE) {
        return Err(Error::NotAState(format!("trace is {trace:.12}")));
    }
    let renorm = HermitianMatrix::new(h.scale(Complex64::new(1.0 / trace, 0.0)))?;
    let spectrum = eigh_desc(&renorm)?;
    let min = *spectrum.eigenvalues().last().expect("non-empty");
    if min < -tolerance.max(tol::PSD_SLACK) {
        return Err(Error::NotPsd(min));
    }
    // Clip the numerical noise so the result satisfies the state invariants
    // exactly.
    let clipped = spectrum.apply_function(|x| x.max(0.0));
    let trace = clipped.trace().re;
    DensityMatrix::from_complex(clipped.scale(Complex64::new(1.0 / trace, 0.0)))
}

/// Deterministic orthonormal basis of the orthogonal complement of a unit
/// column vector: Gram-Schmidt over the computational basis. For
/// `v = e_0` this returns `e_1, ..., e_{d-1}` exactly.
fn complement_basis(v: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let d = v.n_rows();
    let mut basis: Vec<ComplexMatrix> = Vec::with_capacity(d - 1);
    for k in 0..d {
        if basis.len() == d - 1 {
            break;
        }
        let mut w = ComplexMatrix::basis_column(d, k);
        // Two projection passes keep orthogonality at machine precision.
        for _ in 0..2 {
            let overlap = v.column_dot(&w);
            w = &w - &v.scale(overlap);
            for u in &basis {
                let overlap = u.column_dot(&w);
                w = &w - &u.scale(overlap);
            }
        }
        let norm = w.column_dot(&w).re.sqrt();
        if norm > 1e-6 {
            basis.push(w.scale(Complex64::new(1.0 / norm, 0.0)));
        }
    }
    basis
}

/// Family-membership verdict. `completion` is the recovered `B` when the
/// channel is in the family.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub in_family: bool,
    pub completion: Option<DensityMatrix>,
    /// `‖C - C[σ,B]‖_max` when a candidate completion exists.
    pub residual: Option<f64>,
    /// Why membership failed, when it did.
    pub reason: Option<String>,
}

/// Test whether a Choi matrix belongs to the trace-preserving family of the
/// target: a completion must be extractable and must reproduce the channel,
/// `‖C - C[σ,B]‖_max ≤ tol`.
pub fn is_in_family(c: &ChoiMatrix, target: &StabilizerTarget, tolerance: f64) -> MembershipReport {
    let not_in = |reason: String| MembershipReport {
        in_family: false,
        completion: None,
        residual: None,
        reason: Some(reason),
    };
    if c.d_in() != target.dim() || c.d_out() != target.dim() {
        return not_in("dimension mismatch".into());
    }
    let tp = is_trace_preserving(c, tolerance.max(tol::CHECK));
    if !tp.is_tp {
        return not_in(format!(
            "not trace-preserving: defect {:.3e}",
            tp.defect
        ));
    }
    let completion = match extract_completion(c, target, tolerance) {
        Ok(b) => b,
        Err(e) => return not_in(e.to_string()),
    };
    let rebuilt = match tp_family_choi(target, &completion) {
        Ok(c) => c,
        Err(e) => return not_in(e.to_string()),
    };
    let residual = c.matrix().max_abs_diff(rebuilt.matrix());
    MembershipReport {
        in_family: residual <= tolerance,
        completion: Some(completion),
        residual: Some(residual),
        reason: (residual > tolerance)
            .then(|| format!("family reconstruction residual {residual:.3e}")),
    }
}

/// `⟨v_max|ρ|v_max⟩ = λ_max` within `tol`: exactly the inputs on which the
/// minimum-trace channel preserves trace.
pub fn is_lossless(rho: &DensityMatrix, target: &StabilizerTarget, tolerance: f64) -> bool {
    let overlap = rho.as_hermitian().expectation(&target.v_max);
    (overlap - target.lambda_max).abs() <= tolerance
}

/// Build a state stabilized without loss: `U D U†` with
/// `D = diag(λ_max, (1-λ_max)Λ)` and `U = [v_max | W·U_rest]`, `W` an
/// orthonormal basis of the complement.
///
/// `weights` is `Λ`: `d-1` non-negative reals summing to one. `u_rest`
/// rotates the complement and must be unitary. With `enforce_half` the
/// target's top weight must be at least 1/2 (the normalization under which
/// the lossless set is usually stated); without it any target is accepted.
pub fn make_lossless_state(
    target: &StabilizerTarget,
    weights: &[f64],
    u_rest: &ComplexMatrix,
    enforce_half: bool,
) -> Result<DensityMatrix> {
    let d = target.dim();
    if weights.len() != d - 1 {
        return Err(Error::InvalidWeights(format!(
            "expected {} weights, got {}",
            d - 1,
            weights.len()
        )));
    }
    if let Some(bad) = weights.iter().find(|&&x| x < 0.0) {
        return Err(Error::InvalidWeights(format!("negative weight {bad}")));
    }
    if d > 1 {
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum:.12}, expected 1"
            )));
        }
    }
    if u_rest.n_rows() != d - 1 || u_rest.n_cols() != d - 1 {
        return Err(Error::DimensionMismatch(format!(
            "complement rotation must be {0}x{0}, got {1}x{2}",
            d - 1,
            u_rest.n_rows(),
            u_rest.n_cols()
        )));
    }
    if d > 1 {
        let defect = u_rest.unitarity_defect();
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
    }
    if enforce_half && target.lambda_max < 0.5 - 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "top eigenvalue {:.12} is below 1/2",
            target.lambda_max
        )));
    }

    let lambda = target.lambda_max;
    let complement = complement_basis(&target.v_max);
    // U = [v_max | W u_rest] column by column.
    let mut u = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        u.set(i, 0, target.v_max.get(i, 0));
    }
    for col in 0..d - 1 {
        for i in 0..d {
            let mut acc = Complex64::ZERO;
            for (k, w) in complement.iter().enumerate() {
                acc += w.get(i, 0) * u_rest.get(k, col);
            }
            u.set(i, col + 1, acc);
        }
    }
    let mut diag = vec![lambda];
    diag.extend(weights.iter().map(|w| (1.0 - lambda) * w));
    let dmat = ComplexMatrix::diag_real(&diag);
    let rho = &(&u * &dmat) * &u.adjoint();
    DensityMatrix::from_complex(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_choi, choi_to_kraus, is_completely_positive, kraus_to_choi};
    use crate::qmat::Subsystem;
    use num_complex::Complex64 as C;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn target_a() -> StabilizerTarget {
        let sigma = DensityMatrix::from_complex(ComplexMatrix::diag_real(&[0.75, 0.25])).unwrap();
        StabilizerTarget::new(sigma).unwrap()
    }

    fn half_mixed() -> DensityMatrix {
        DensityMatrix::maximally_mixed(2)
    }

    /// Draw a completion satisfying the validity condition.
    fn random_valid_completion(
        target: &StabilizerTarget,
        rng: &mut ChaCha8Rng,
    ) -> DensityMatrix {
        loop {
            let b = DensityMatrix::random(target.dim(), rng);
            if b.as_hermitian().expectation(target.v_max()) <= target.lambda_max() {
                return b;
            }
        }
    }

    #[test]
    fn target_extracts_top_eigenpair() {
        let t = target_a();
        assert_eq!(t.lambda_max(), 0.75);
        assert!(t.v_max().approx_eq(&ComplexMatrix::basis_column(2, 0), 1e-14));
        assert!(!t.is_degenerate());

        let mixed = StabilizerTarget::new(half_mixed()).unwrap();
        assert!(mixed.is_degenerate());
        assert!(mixed
            .v_max()
            .approx_eq(&ComplexMatrix::basis_column(2, 0), 1e-14));
    }

    #[test]
    fn min_choi_fixture() {
        let z = min_choi(&target_a());
        assert!(z
            .matrix()
            .approx_eq(&ComplexMatrix::diag_real(&[1.0, 0.0, 1.0 / 3.0, 0.0]), 1e-14));
        assert!((z.matrix().trace().re - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn min_choi_pure_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = ComplexMatrix::random_ginibre(3, 1, &mut rng);
        let sigma = DensityMatrix::pure(&g).unwrap();
        let t = StabilizerTarget::new(sigma.clone()).unwrap();
        let z = min_choi(&t);
        assert!((z.matrix().trace().re - 1.0).abs() < 1e-12);
        // λ_max = 1: Z = |v⟩⟨v| ⊗ (|v⟩⟨v|)ᵀ.
        let proj = t.v_max().column_outer(t.v_max());
        let expected = proj.kron(&proj.transpose());
        assert!(z.matrix().approx_eq(&expected, 1e-10));
    }

    #[test]
    fn min_choi_degenerate_target_uses_tie_break() {
        let t = StabilizerTarget::new(half_mixed()).unwrap();
        let z = min_choi(&t);
        assert!(t.is_degenerate());
        assert!((z.matrix().trace().re - 2.0).abs() < 1e-14);
        let expected = ComplexMatrix::diag_real(&[1.0, 0.0, 1.0, 0.0]);
        assert!(z.matrix().approx_eq(&expected, 1e-14));
    }

    #[test]
    fn exact_stabilization_on_random_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..500 {
            let d = 2 + (rng.random::<u32>() % 5) as usize; // 2..=6
            let sigma = DensityMatrix::random(d, &mut rng);
            let t = StabilizerTarget::new(sigma.clone()).unwrap();
            let z = min_choi(&t);
            let image = apply_choi(&z, &sigma).unwrap();
            assert!(
                image.approx_eq(sigma.as_matrix(), 1e-10),
                "stabilization failed at d={d}"
            );
            assert!(
                (z.matrix().trace().re - 1.0 / t.lambda_max()).abs() <= 1e-12,
                "trace deviates from 1/λ_max at d={d}"
            );
        }
    }

    #[test]
    fn min_kraus_fixture() {
        let k = min_kraus(&target_a());
        assert_eq!(k.len(), 2);
        let a0 = &k.operators()[0];
        let a1 = &k.operators()[1];
        assert!(a0.approx_eq(&ComplexMatrix::diag_real(&[1.0, 0.0]), 1e-14));
        let mut expected = ComplexMatrix::zeros(2, 2);
        expected.set(1, 0, C::new((1.0_f64 / 3.0).sqrt(), 0.0));
        assert!(a1.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn min_kraus_pure_and_three_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let sigma = DensityMatrix::pure(&ComplexMatrix::random_ginibre(2, 1, &mut rng)).unwrap();
        let t = StabilizerTarget::new(sigma).unwrap();
        assert_eq!(min_kraus(&t).len(), 1);

        let t3 = StabilizerTarget::new(
            DensityMatrix::from_complex(ComplexMatrix::diag_real(&[0.5, 0.3, 0.2])).unwrap(),
        )
        .unwrap();
        let k3 = min_kraus(&t3);
        assert_eq!(k3.len(), 3);
        let norms: Vec<f64> = k3.operators().iter().map(|op| op.max_abs()).collect();
        assert!((norms[0] - 1.0).abs() < 1e-12);
        assert!((norms[1] - 0.6_f64.sqrt()).abs() < 1e-12);
        assert!((norms[2] - 0.4_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn min_kraus_matches_min_choi_and_completeness_defect() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..50 {
            let d = 2 + (rng.random::<u32>() % 4) as usize;
            let t = StabilizerTarget::new(DensityMatrix::random(d, &mut rng)).unwrap();
            let k = min_kraus(&t);
            assert!(kraus_to_choi(&k)
                .matrix()
                .approx_eq(min_choi(&t).matrix(), 1e-10));

            // Σ A†A = |v_max⟩⟨v_max| / λ_max.
            let mut sum = ComplexMatrix::zeros(d, d);
            for op in k.operators() {
                sum = &sum + &(&op.adjoint() * op);
            }
            let expected = t
                .v_max()
                .column_outer(t.v_max())
                .scale(C::new(1.0 / t.lambda_max(), 0.0));
            assert!(sum.approx_eq(&expected, 1e-10));
        }
    }

    #[test]
    fn dilation_fixture_and_agreement() {
        let t = target_a();
        let k = min_kraus(&t);
        let a = ancilla_dilation(&k).unwrap();
        assert_eq!(a.n_rows(), 4);
        assert!(a.get(0, 0) == C::ONE);
        assert!((a.get(3, 2).re - (1.0_f64 / 3.0).sqrt()).abs() < 1e-14);

        let id = KrausSet::new(vec![ComplexMatrix::identity(2)]).unwrap();
        assert!(ancilla_dilation(&id)
            .unwrap()
            .approx_eq(&ComplexMatrix::identity(2), 0.0));
    }

    #[test]
    fn dilation_reproduces_kraus_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..30 {
            let d = 2 + (rng.random::<u32>() % 3) as usize;
            let t = StabilizerTarget::new(DensityMatrix::random(d, &mut rng)).unwrap();
            let k = min_kraus(&t);
            let a = ancilla_dilation(&k).unwrap();
            let m = k.len();
            let rho = DensityMatrix::random(d, &mut rng);
            let joint = ComplexMatrix::identity(m).kron(rho.as_matrix());
            let conjugated = &(&a * &joint) * &a.adjoint();
            let reduced = conjugated.partial_trace(m, d, Subsystem::First).unwrap();
            let direct = k.apply_linear(rho.as_matrix()).unwrap();
            assert!(reduced.approx_eq(&direct, 1e-12));
        }
    }

    #[test]
    fn dilation_rejects_rectangular() {
        let k = KrausSet::new(vec![ComplexMatrix::zeros(3, 2)]).unwrap();
        assert!(ancilla_dilation(&k).is_err());
    }

    #[test]
    fn family_choi_fixture_blocks() {
        let t = target_a();
        let c = tp_family_choi(&t, &half_mixed()).unwrap();
        assert!(is_trace_preserving(&c, 1e-10).is_tp);
        let cp = is_completely_positive(&c, 1e-10).unwrap();
        assert!(cp.is_cp);
        // Spectrum: sector block diag(5/6, 1/6) plus B's eigenvalues {1/2, 1/2}.
        let spectrum = eigh_desc(c.as_hermitian()).unwrap();
        let expect = [5.0 / 6.0, 0.5, 0.5, 1.0 / 6.0];
        for (got, want) in spectrum.eigenvalues().iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
        let stabilized = apply_choi(&c, t.sigma()).unwrap();
        assert!(stabilized.approx_eq(t.sigma().as_matrix(), 1e-12));
    }

    #[test]
    fn family_with_target_completion_is_replacement() {
        let t = target_a();
        let c = tp_family_choi(&t, t.sigma()).unwrap();
        let expected = t.sigma().kron(&ComplexMatrix::identity(2));
        assert!(c.matrix().approx_eq(&expected, 1e-14));
    }

    #[test]
    fn family_rejects_validity_violation() {
        let t = target_a();
        let b = DensityMatrix::from_complex(ComplexMatrix::diag_real(&[0.9, 0.1])).unwrap();
        assert!(matches!(
            tp_family_choi(&t, &b),
            Err(Error::ValidityCondition { .. })
        ));
        assert!(matches!(
            FamilyChannel::new(t, b),
            Err(Error::ValidityCondition { .. })
        ));
    }

    #[test]
    fn family_cp_gap_fixture() {
        // σ = diag(0.5, 0.3, 0.2), B = |e1⟩⟨e1|: trace-preserving but not CP.
        let t = StabilizerTarget::new(
            DensityMatrix::from_complex(ComplexMatrix::diag_real(&[0.5, 0.3, 0.2])).unwrap(),
        )
        .unwrap();
        let b = DensityMatrix::from_complex(ComplexMatrix::diag_real(&[0.0, 1.0, 0.0])).unwrap();
        let fam = FamilyChannel::new(t, b).unwrap();
        let c = fam.choi();
        assert!(is_trace_preserving(&c, 1e-10).is_tp);
        let cp = is_completely_positive(&c, 1e-10).unwrap();
        assert!(!cp.is_cp);
        // Sector matrix σ - (1-λ)B = diag(0.5, -0.2, 0.2); Choi min eig is
        // that divided by λ = 0.5.
        assert!((fam.cp_sector_min_eig().unwrap() - (-0.2)).abs() < 1e-12);
        assert!((cp.min_eigenvalue - (-0.4)).abs() < 1e-12);
    }

    #[test]
    fn apply_family_fixtures() {
        let t = target_a();
        let fam = FamilyChannel::new(t.clone(), half_mixed()).unwrap();
        assert!((fam.overlap_q() - 2.0 / 3.0).abs() < 1e-14);

        // Fixed point.
        let out = fam.apply(t.sigma(), true).unwrap();
        assert!((out.overlap_p - 1.0).abs() < 1e-14);
        assert!(out.state.approx_eq(t.sigma().as_matrix(), 1e-14));

        // Orthogonal input: p = 0, output B.
        let e1 = DensityMatrix::pure(&ComplexMatrix::basis_column(2, 1)).unwrap();
        let out = fam.apply(&e1, true).unwrap();
        assert_eq!(out.overlap_p, 0.0);
        assert!(out.state.approx_eq(half_mixed().as_matrix(), 1e-14));

        // q = 0 family member maps I/2 to itself: a second fixed point.
        let b = DensityMatrix::pure(&ComplexMatrix::basis_column(2, 1)).unwrap();
        let fam0 = FamilyChannel::new(t, b).unwrap();
        assert_eq!(fam0.overlap_q(), 0.0);
        let out = fam0.apply(&half_mixed(), true).unwrap();
        assert!((out.overlap_p - 2.0 / 3.0).abs() < 1e-14);
        assert!(out.state.approx_eq(half_mixed().as_matrix(), 1e-14));
    }

    #[test]
    fn apply_family_agrees_with_choi_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..50 {
            let d = 2 + (rng.random::<u32>() % 3) as usize;
            let t = StabilizerTarget::new(DensityMatrix::random(d, &mut rng)).unwrap();
            let b = random_valid_completion(&t, &mut rng);
            let fam = FamilyChannel::new(t, b).unwrap();
            let rho = DensityMatrix::random(d, &mut rng);
            let direct = fam.apply(&rho, false).unwrap();
            let via_choi = apply_choi(&fam.choi(), &rho).unwrap();
            assert!(direct.state.approx_eq(&via_choi, 1e-10));
        }
    }

    #[test]
    fn apply_family_domain_violation() {
        let t = target_a();
        let fam = FamilyChannel::new(t, half_mixed()).unwrap();
        let peak = DensityMatrix::pure(&ComplexMatrix::basis_column(2, 0)).unwrap();
        // p = 1/λ_max = 4/3 > 1.
        assert!(matches!(
            fam.apply(&peak, true),
            Err(Error::DomainViolation(_))
        ));
        let out = fam.apply(&peak, false).unwrap();
        assert!(out.domain_violation);
        assert!((out.overlap_p - 4.0 / 3.0).abs() < 1e-14);
        // Linear extension: (4/3)σ - (1/3)B, still trace one.
        assert!((out.state.trace_real() - 1.0).abs() < 1e-14);
        let expected = &ComplexMatrix::diag_real(&[0.75, 0.25]).scale(C::new(4.0 / 3.0, 0.0))
            - &ComplexMatrix::diag_real(&[1.0 / 6.0, 1.0 / 6.0]);
        assert!(out.state.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn iteration_convergence_fixture() {
        let t = target_a();
        let fam = FamilyChannel::new(t, half_mixed()).unwrap();
        let rho0 = DensityMatrix::pure(&ComplexMatrix::basis_column(2, 1)).unwrap();
        let trace = iterate(&fam, &rho0, 20, None).unwrap();

        assert_eq!(trace.steps.len(), 21);
        // Step 1 is B itself, step 2 is diag(2/3, 1/3) at distance 1/12.
        assert!(trace.steps[1]
            .state
            .approx_eq(half_mixed().as_matrix(), 1e-14));
        assert!(trace.steps[2]
            .state
            .approx_eq(&ComplexMatrix::diag_real(&[2.0 / 3.0, 1.0 / 3.0]), 1e-12));
        assert!((trace.steps[2].dist_to_sigma - 1.0 / 12.0).abs() < 1e-12);
        assert!((trace.steps[2].weight_b - 1.0 / 9.0).abs() < 1e-12);

        // weight_B(n) = (1-q)ⁿ (1-p_0) with q = 2/3, p_0 = 0.
        for (n, step) in trace.steps.iter().enumerate() {
            let expected = (1.0_f64 / 3.0).powi(n as i32);
            assert!(
                (step.weight_b - expected).abs() < 1e-9,
                "weight law broken at n={n}"
            );
        }
        assert!(trace.final_distance() <= 1e-8);
        assert!(!trace.stagnant);

        // Distances never increase.
        for w in trace.steps.windows(2) {
            assert!(w[1].dist_to_sigma <= w[0].dist_to_sigma + 1e-12);
        }
    }

    #[test]
    fn iteration_at_fixed_point_is_constant() {
        let t = target_a();
        let sigma = t.sigma().clone();
        let fam = FamilyChannel::new(t, half_mixed()).unwrap();
        let trace = iterate(&fam, &sigma, 5, None).unwrap();
        for step in &trace.steps {
            assert!(step.dist_to_sigma < 1e-12);
            assert!((step.state.trace_real() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn iteration_stagnates_at_q_zero() {
        let t = target_a();
        let b = DensityMatrix::pure(&ComplexMatrix::basis_column(2, 1)).unwrap();
        let fam = FamilyChannel::new(t, b).unwrap();
        let trace = iterate(&fam, &half_mixed(), 60, None).unwrap();
        assert_eq!(trace.q, 0.0);
        assert!(trace.stagnant);
        // The state never moves.
        for step in &trace.steps {
            assert!(step.state.approx_eq(half_mixed().as_matrix(), 1e-12));
            assert!((step.dist_to_sigma - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn iteration_weight_law_random_and_free_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let d = 2 + (rng.random::<u32>() % 3) as usize;
            let t = StabilizerTarget::new(DensityMatrix::random(d, &mut rng)).unwrap();
            let b = random_valid_completion(&t, &mut rng);
            let fam = FamilyChannel::new(t, b).unwrap();
            let rho0 = DensityMatrix::random(d, &mut rng);
            let trace = iterate(&fam, &rho0, 12, None).unwrap();
            let p0 = trace.steps[0].p;
            for (n, step) in trace.steps.iter().enumerate() {
                let expected = (1.0 - trace.q).powi(n as i32) * (1.0 - p0);
                assert!((step.weight_b - expected).abs() < 1e-9);
            }
            if trace.q > 0.0 {
                for w in trace.steps.windows(2) {
                    assert!(w[1].dist_to_sigma <= w[0].dist_to_sigma + 1e-12);
                }
            }
        }

        // Free evolution keeps states normalized and matches the composed map.
        let t = target_a();
        let fam = FamilyChannel::new(t.clone(), half_mixed()).unwrap();
        let h = HermitianMatrix::diag_real(&[0.0, 1.0]);
        let taus = vec![0.3, 0.7, 1.1];
        let rho0 = DensityMatrix::pure(&ComplexMatrix::basis_column(2, 1)).unwrap();
        let trace = iterate(
            &fam,
            &rho0,
            3,
            Some(&FreeEvolution {
                hamiltonian: h.clone(),
                taus: taus.clone(),
            }),
        )
        .unwrap();
        let mut state = rho0;
        for (n, &tau) in taus.iter().enumerate() {
            let applied = fam.apply(&state, true).unwrap().into_state().unwrap();
            let u = evolution_unitary(&h, tau).unwrap();
            state =
                DensityMatrix::from_complex(&(&u * applied.as_matrix()) * &u.adjoint()).unwrap();
            assert!(trace.steps[n + 1].state.approx_eq(state.as_matrix(), 1e-12));
        }
    }

    #[test]
    fn iteration_validates_tau_schedule() {
        let t = target_a();
        let fam = FamilyChannel::new(t, half_mixed()).unwrap();
        let rho0 = half_mixed();
        let fe = FreeEvolution {
            hamiltonian: HermitianMatrix::diag_real(&[0.0, 1.0]),
            taus: vec![0.1],
        };
        assert!(iterate(&fam, &rho0, 3, Some(&fe)).is_err());
    }

    #[test]
    fn csv_shape() {
        let t = target_a();
        let fam = FamilyChannel::new(t, half_mixed()).unwrap();
        let trace = iterate(&fam, &half_mixed(), 2, None).unwrap();
        let csv = trace.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "n,p_n,weight_B,dist_to_sigma");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,"));
    }

    #[test]
    fn extract_completion_round_trip() {
        let t = target_a();
        let c = tp_family_choi(&t, &half_mixed()).unwrap();
        let b = extract_completion(&c, &t, 1e-9).unwrap();
        assert!(b.approx_eq(half_mixed().as_matrix(), 1e-10));

        // Replacement channel: every completion image is σ itself.
        let rep = tp_family_choi(&t, t.sigma()).unwrap();
        let b = extract_completion(&rep, &t, 1e-9).unwrap();
        assert!(b.approx_eq(t.sigma().as_matrix(), 1e-10));
    }

    #[test]
    fn extract_completion_rejects_basis_dependent_channels() {
        // A generic unitary channel at d = 3 maps orthogonal projectors to
        // distinct images.
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let u = ComplexMatrix::random_unitary(3, &mut rng);
        let c = kraus_to_choi(&KrausSet::new(vec![u]).unwrap());
        let t = StabilizerTarget::new(
            DensityMatrix::from_complex(ComplexMatrix::diag_real(&[0.5, 0.3, 0.2])).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            extract_completion(&c, &t, 1e-9),
            Err(Error::NotInFamily(_))
        ));
    }

    #[test]
    fn membership_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        for _ in 0..100 {
            let d = 2 + (rng.random::<u32>() % 3) as usize;
            let t = StabilizerTarget::new(DensityMatrix::random(d, &mut rng)).unwrap();
            let b = random_valid_completion(&t, &mut rng);
            let c = tp_family_choi(&t, &b).unwrap();
            let report = is_in_family(&c, &t, 1e-9);
            assert!(report.in_family);
            let recovered = report.completion.expect("completion recovered");
            assert!(recovered.approx_eq(b.as_matrix(), 1e-9));
        }
    }

    #[test]
    fn membership_rejections() {
        let t = target_a();

        // Identity channel: every state is fixed, wrong rank structure.
        let id = ChoiMatrix::identity_channel(2);
        let report = is_in_family(&id, &t, 1e-9);
        assert!(!report.in_family);

        // The minimum-trace channel is not trace-preserving.
        let z = min_choi(&t);
        let report = is_in_family(&z, &t, 1e-9);
        assert!(!report.in_family);
        assert!(report.reason.unwrap().contains("trace-preserving"));
    }

    #[test]
    fn lossless_predicate() {
        let t = target_a();
        assert!(is_lossless(t.sigma(), &t, 1e-10));
        assert!(!is_lossless(&half_mixed(), &t, 1e-10));
    }

    #[test]
    fn lossless_state_one_qubit_is_sigma() {
        let t = target_a();
        let u1 = ComplexMatrix::identity(1);
        let rho = make_lossless_state(&t, &[1.0], &u1, true).unwrap();
        assert!(rho.approx_eq(t.sigma().as_matrix(), 1e-12));
        assert!(is_lossless(&rho, &t, 1e-10));
    }

    #[test]
    fn lossless_state_two_qubit_fixture() {
        // d = 4, v_max = e_0, λ_max = 0.6, Λ = (0.5, 0.3, 0.2).
        let sigma = DensityMatrix::from_complex(ComplexMatrix::diag_real(&[
            0.6, 0.25, 0.1, 0.05,
        ]))
        .unwrap();
        let t = StabilizerTarget::new(sigma).unwrap();
        let rho =
            make_lossless_state(&t, &[0.5, 0.3, 0.2], &ComplexMatrix::identity(3), true).unwrap();
        assert!(rho.approx_eq(
            &ComplexMatrix::diag_real(&[0.6, 0.2, 0.12, 0.08]),
            1e-12
        ));

        // A rotated complement keeps the spectrum and the v_max overlap.
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let u3 = ComplexMatrix::random_unitary(3, &mut rng);
        let rho = make_lossless_state(&t, &[0.5, 0.3, 0.2], &u3, true).unwrap();
        let spectrum = eigh_desc(rho.as_hermitian()).unwrap();
        let expect = [0.6, 0.2, 0.12, 0.08];
        for (got, want) in spectrum.eigenvalues().iter().zip(expect) {
            assert!((got - want).abs() < 1e-12);
        }
        let overlap = rho.as_hermitian().expectation(t.v_max());
        assert!((overlap - 0.6).abs() < 1e-12);
        assert!(is_lossless(&rho, &t, 1e-10));
    }

    #[test]
    fn lossless_states_keep_unit_trace_under_min_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let d = 2 + (rng.random::<u32>() % 3) as usize;
            let t = StabilizerTarget::new(DensityMatrix::random(d, &mut rng)).unwrap();
            let mut weights: Vec<f64> = (0..d - 1).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = weights.iter().sum();
            for w in weights.iter_mut() {
                *w /= sum;
            }
            let u = ComplexMatrix::random_unitary(d - 1, &mut rng);
            let rho = make_lossless_state(&t, &weights, &u, false).unwrap();
            assert!(is_lossless(&rho, &t, 1e-9));
            let image = apply_choi(&min_choi(&t), &rho).unwrap();
            assert!((image.trace().re - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn lossless_state_validation_errors() {
        let t = target_a();
        let u1 = ComplexMatrix::identity(1);
        assert!(matches!(
            make_lossless_state(&t, &[0.5], &u1, false),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            make_lossless_state(&t, &[-0.2], &u1, false),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            make_lossless_state(&t, &[0.5, 0.5], &u1, false),
            Err(Error::InvalidWeights(_))
        ));
        let not_unitary = ComplexMatrix::diag_real(&[2.0]);
        assert!(matches!(
            make_lossless_state(&t, &[1.0], &not_unitary, false),
            Err(Error::NotUnitary(_))
        ));

        // enforce_half rejects targets with top weight below 1/2.
        let flat = StabilizerTarget::new(
            DensityMatrix::from_complex(ComplexMatrix::diag_real(&[0.4, 0.35, 0.25])).unwrap(),
        )
        .unwrap();
        let u2 = ComplexMatrix::identity(2);
        assert!(make_lossless_state(&flat, &[0.6, 0.4], &u2, true).is_err());
        assert!(make_lossless_state(&flat, &[0.6, 0.4], &u2, false).is_ok());
    }

    #[test]
    fn complement_basis_of_e0_is_rest_of_basis() {
        let v = ComplexMatrix::basis_column(3, 0);
        let basis = complement_basis(&v);
        assert_eq!(basis.len(), 2);
        assert!(basis[0].approx_eq(&ComplexMatrix::basis_column(3, 1), 1e-14));
        assert!(basis[1].approx_eq(&ComplexMatrix::basis_column(3, 2), 1e-14));
    }

    #[test]
    fn choi_kraus_dilation_triple_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..30 {
            let d = 2 + (rng.random::<u32>() % 3) as usize;
            let t = StabilizerTarget::new(DensityMatrix::random(d, &mut rng)).unwrap();
            let b = random_valid_completion(&t, &mut rng);
            let fam = FamilyChannel::new(t, b).unwrap();
            let c = fam.choi();
            let rho = DensityMatrix::random(d, &mut rng);
            let via_choi = apply_choi(&c, &rho).unwrap();

            let cp = is_completely_positive(&c, 1e-10).unwrap();
            if !cp.is_cp {
                continue; // no Kraus form for non-CP members
            }
            let k = choi_to_kraus(&c, tol::PSD_SLACK).unwrap();
            let via_kraus = k.apply_linear(rho.as_matrix()).unwrap();
            assert!(via_choi.approx_eq(&via_kraus, 1e-10));

            let a = ancilla_dilation(&k).unwrap();
            let m = k.len();
            let joint = ComplexMatrix::identity(m).kron(rho.as_matrix());
            let reduced = (&(&a * &joint) * &a.adjoint())
                .partial_trace(m, d, Subsystem::First)
                .unwrap();
            assert!(via_choi.approx_eq(&reduced, 1e-10));
        }
    }
}
