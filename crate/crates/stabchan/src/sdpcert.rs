//! Optimality certificates for the minimum-trace stabilizing channel.
//!
//! The primal problem minimizes `tr[Z]` over Choi matrices `Z ⪰ 0` subject
//! to `Tr_in[Z (I ⊗ σᵀ)] ⪰ σ`; its dual maximizes `tr[Wσ]` over `W ⪰ 0`
//! with `Wᵀ ⊗ σᵀ ⪯ I`. The closed-form pair
//!
//! `Z_σ = σ ⊗ (|v_max⟩⟨v_max|)ᵀ/λ_max`, `W_σ = I/λ_max`
//!
//! is feasible on both sides and matches values at `1/λ_max`, so a zero
//! duality gap certifies optimality outright; no iterative solver is
//! involved. A seeded gradient-free search over Hermitian matrices serves
//! as an independent numerical cross-check at small dimension.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::ChoiMatrix;
use crate::error::Error;
use crate::qmat::{eigh_desc, ComplexMatrix, DensityMatrix, HermitianMatrix, Subsystem};
use crate::stabilizer::{min_choi, StabilizerTarget};
use crate::Result;

/// Feasibility verdict with the worst constraint violation magnitude.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violation: f64,
}

/// Joint primal/dual certificate. With both sides feasible and `gap ≤ tol`,
/// strong duality certifies the common value as optimal.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub primal_trace: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_feasible: FeasibilityReport,
    pub dual_feasible: FeasibilityReport,
    pub certified: bool,
}

/// `Tr_in[Z (I ⊗ σᵀ)]`, evaluated literally through the Kronecker product
/// and partial trace rather than the channel-application shortcut.
fn constraint_image(z: &ComplexMatrix, sigma: &DensityMatrix) -> Result<ComplexMatrix> {
    let d = sigma.dim();
    let lifted = ComplexMatrix::identity(d).kron(&sigma.transpose());
    (z * &lifted).partial_trace(d, d, Subsystem::Second)
}

/// Sum of negative eigenvalue parts, `Σ max(0, -λ_i)`; zero iff PSD.
fn negative_part(m: &ComplexMatrix) -> Result<f64> {
    let h = HermitianMatrix::new_with_tol(m.clone(), 1e-6)?;
    Ok(eigh_desc(&h)?
        .eigenvalues()
        .iter()
        .map(|&x| (-x).max(0.0))
        .sum())
}

fn min_eig(m: &ComplexMatrix) -> Result<f64> {
    let h = HermitianMatrix::new_with_tol(m.clone(), 1e-6)?;
    Ok(*eigh_desc(&h)?.eigenvalues().last().expect("non-empty"))
}

fn max_eig(m: &ComplexMatrix) -> Result<f64> {
    let h = HermitianMatrix::new_with_tol(m.clone(), 1e-6)?;
    Ok(eigh_desc(&h)?.eigenvalues()[0])
}

/// Primal feasibility: `Z ⪰ -tol` and `Tr_in[Z(I⊗σᵀ)] - σ ⪰ -tol`.
pub fn primal_feasible(
    z: &ChoiMatrix,
    sigma: &DensityMatrix,
    tolerance: f64,
) -> Result<FeasibilityReport> {
    let d = sigma.dim();
    if z.d_in() != d || z.d_out() != d {
        return Err(Error::DimensionMismatch(format!(
            "certificate dimension {}x{} does not match state dimension {d}",
            z.d_out(),
            z.d_in()
        )));
    }
    let psd_violation = (-min_eig(z.matrix())?).max(0.0);
    let image = constraint_image(z.matrix(), sigma)?;
    let gap = &image - sigma.as_matrix();
    let constraint_violation = (-min_eig(&gap)?).max(0.0);
    let violation = psd_violation.max(constraint_violation);
    Ok(FeasibilityReport {
        feasible: violation <= tolerance,
        violation,
    })
}

/// Dual feasibility: `W ⪰ -tol` and `λ_max(Wᵀ ⊗ σᵀ) ≤ 1 + tol`.
pub fn dual_feasible(
    w: &HermitianMatrix,
    sigma: &DensityMatrix,
    tolerance: f64,
) -> Result<FeasibilityReport> {
    if w.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dual certificate dimension {} does not match state dimension {}",
            w.dim(),
            sigma.dim()
        )));
    }
    let psd_violation = (-min_eig(w.as_matrix())?).max(0.0);
    let lifted = w.transpose().kron(&sigma.transpose());
    let operator_violation = (max_eig(&lifted)? - 1.0).max(0.0);
    let violation = psd_violation.max(operator_violation);
    Ok(FeasibilityReport {
        feasible: violation <= tolerance,
        violation,
    })
}

/// Build and check the closed-form certificate pair for `σ`.
///
/// Both values equal `1/λ_max`; any failure here indicates an
/// implementation bug rather than an infeasible instance.
pub fn certify_optimality(sigma: &DensityMatrix, tolerance: f64) -> Result<CertificateReport> {
    let target = StabilizerTarget::new(sigma.clone())?;
    let z = min_choi(&target);
    let w = HermitianMatrix::new(
        ComplexMatrix::identity(sigma.dim())
            .scale(Complex64::new(1.0 / target.lambda_max(), 0.0)),
    )?;

    let primal_trace = z.matrix().trace().re;
    let dual_value = (&*w * sigma.as_matrix()).trace().re;
    let gap = (primal_trace - dual_value).abs();
    let primal = primal_feasible(&z, sigma, tolerance)?;
    let dual = dual_feasible(&w, sigma, tolerance)?;
    let certified = primal.feasible && dual.feasible && gap <= tolerance;
    Ok(CertificateReport {
        primal_trace,
        dual_value,
        gap,
        primal_feasible: primal,
        dual_feasible: dual,
        certified,
    })
}

/// Gradient-free minimization of `tr[Z]` over feasible `Z`, independent of
/// the closed form. Restricted to `d ≤ 3`.
///
/// Each restart runs coordinate descent on the penalized objective
/// `tr[Z] + 1e3 (‖neg(Z)‖ + ‖neg(Tr_in[Z(I⊗σᵀ)] - σ)‖)`, then polishes by
/// descending directly on the repaired trace (clip to the positive cone,
/// scale to the smallest feasible multiple). The exact-penalty kink at the
/// feasibility boundary stalls plain coordinate moves, which is why the
/// polish phase optimizes the projection instead. `budget` caps objective
/// evaluations; identical seeds reproduce identical results.
pub fn brute_force_min_trace(sigma: &DensityMatrix, budget: usize, seed: u64) -> Result<f64> {
    let d = sigma.dim();
    if d > 3 {
        return Err(Error::InvalidArgument(format!(
            "brute-force search is limited to d ≤ 3, got d = {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = StabilizerTarget::new(sigma.clone())?;
    let warm = min_choi(&target).matrix().clone();
    let n = d * d;

    let restarts = 4;
    let per_restart = (budget / restarts).max(100);
    let mut best = f64::INFINITY;
    for r in 0..restarts {
        let start = if r == 0 {
            warm.clone()
        } else {
            let g = ComplexMatrix::random_ginibre(n, n, &mut rng);
            let gg = &g * &g.adjoint();
            let trace = gg.trace().re;
            gg.scale(Complex64::new(2.0 / (target.lambda_max() * trace), 0.0))
        };
        let z = coordinate_search(start, sigma, per_restart / 2)?;
        let z = polish_repaired(z, sigma, per_restart / 2)?;
        if let Some(trace) = repair_to_feasible(&z, sigma)? {
            best = best.min(trace);
        }
    }
    if !best.is_finite() {
        return Err(Error::BudgetExhausted);
    }
    Ok(best)
}

/// Coordinate descent on the repaired trace itself. The repaired trace is
/// invariant under positive scaling of `Z`, so this explores directions in
/// the positive cone without fighting the penalty slope. Between sweeps the
/// iterate is projected onto the cone and trace-normalized: clipped
/// directions form plateaus of the repaired objective, and staying on the
/// cone keeps coordinate moves effective.
fn polish_repaired(start: ComplexMatrix, sigma: &DensityMatrix, budget: usize) -> Result<ComplexMatrix> {
    let n = start.n_rows();
    let objective = |z: &ComplexMatrix| -> Result<f64> {
        Ok(repair_to_feasible(z, sigma)?.unwrap_or(f64::INFINITY))
    };
    let mut z = start;
    let mut current = objective(&z)?;
    if !current.is_finite() {
        return Ok(z);
    }
    let mut evals = 1usize;
    let mut step = 0.1;
    while step > 1e-9 && evals < budget {
        let h = HermitianMatrix::new_with_tol(z.clone(), 1e-6)?;
        let clipped = eigh_desc(&h)?.apply_function(|x| x.max(0.0));
        let trace = clipped.trace().re;
        if trace > 1e-12 {
            z = clipped.scale(Complex64::new(1.0 / trace, 0.0));
        }
        let mut improved = false;
        'sweep: for i in 0..n {
            for j in i..n {
                let parts: &[bool] = if i == j { &[true] } else { &[true, false] };
                for &real_part in parts {
                    for sign in [1.0, -1.0] {
                        if evals >= budget {
                            break 'sweep;
                        }
                        let delta = if real_part {
                            Complex64::new(sign * step, 0.0)
                        } else {
                            Complex64::new(0.0, sign * step)
                        };
                        let mut candidate = z.clone();
                        candidate.set(i, j, candidate.get(i, j) + delta);
                        if i != j {
                            candidate.set(j, i, candidate.get(j, i) + delta.conj());
                        }
                        let value = objective(&candidate)?;
                        evals += 1;
                        if value < current - 1e-14 {
                            z = candidate;
                            current = value;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(z)
}

const PENALTY: f64 = 1e3;

fn penalized_objective(z: &ComplexMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let image = constraint_image(z, sigma)?;
    let gap = &image - sigma.as_matrix();
    Ok(z.trace().re + PENALTY * (negative_part(z)? + negative_part(&gap)?))
}

/// Coordinate descent over Hermitian matrices: perturb one entry (and its
/// mirror) at a time, halve the step when a full sweep fails to improve.
fn coordinate_search(
    start: ComplexMatrix,
    sigma: &DensityMatrix,
    budget: usize,
) -> Result<ComplexMatrix> {
    let n = start.n_rows();
    let mut z = start;
    let mut current = penalized_objective(&z, sigma)?;
    let mut evals = 1usize;
    let mut step = 0.25;

    while step > 1e-8 && evals < budget {
        let mut improved = false;
        'sweep: for i in 0..n {
            for j in i..n {
                let parts: &[bool] = if i == j { &[true] } else { &[true, false] };
                for &real_part in parts {
                    for sign in [1.0, -1.0] {
                        if evals >= budget {
                            break 'sweep;
                        }
                        let delta = if real_part {
                            Complex64::new(sign * step, 0.0)
                        } else {
                            Complex64::new(0.0, sign * step)
                        };
                        let mut candidate = z.clone();
                        candidate.set(i, j, candidate.get(i, j) + delta);
                        if i != j {
                            candidate.set(j, i, candidate.get(j, i) + delta.conj());
                        }
                        let value = penalized_objective(&candidate, sigma)?;
                        evals += 1;
                        if value < current - 1e-15 {
                            z = candidate;
                            current = value;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(z)
}

/// Clip to the positive cone, then scale to the smallest multiple
/// satisfying the operator constraint. Returns the repaired trace, or
/// `None` when no scaling makes the point feasible.
fn repair_to_feasible(z: &ComplexMatrix, sigma: &DensityMatrix) -> Result<Option<f64>> {
    let h = HermitianMatrix::new_with_tol(z.clone(), 1e-6)?;
    let clipped = eigh_desc(&h)?.apply_function(|x| x.max(0.0));
    let base_trace = clipped.trace().re;
    if base_trace <= 0.0 {
        return Ok(None);
    }
    let image = constraint_image(&clipped, sigma)?;

    let feasible_at = |s: f64| -> Result<bool> {
        let gap = &image.scale(Complex64::new(s, 0.0)) - sigma.as_matrix();
        Ok(min_eig(&gap)? >= 0.0)
    };

    // Find an upper bound by doubling, then bisect to the threshold.
    let mut hi = 1.0;
    let mut tries = 0;
    while !feasible_at(hi)? {
        hi *= 2.0;
        tries += 1;
        if tries > 40 {
            return Ok(None);
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi * base_trace))
}
