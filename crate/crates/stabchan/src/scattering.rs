//! Collision-model channels: a bath unit in state `ρ_X` interacts with the
//! system through a joint unitary `S` and is traced out,
//!
//! `Φ(ρ) = Tr_X[S (ρ_X ⊗ ρ) S†]`.
//!
//! Expanding `ρ_X` in its eigenbasis gives the Kraus form
//! `K_{ij} = √r_j (⟨r_i| ⊗ I) S (|r_j⟩ ⊗ I)`, from which the Choi matrix
//! follows. [`thermal_membership`] asks whether the resulting channel fixes
//! a Gibbs state and whether it belongs to that state's trace-preserving
//! stabilizing family.

use num_complex::Complex64;

use crate::channel::{fixed_point, kraus_to_choi, ChoiMatrix, FixedPointReport, KrausSet};
use crate::error::Error;
use crate::qmat::{
    eigh_desc, gibbs, trace_distance, ComplexMatrix, DensityMatrix, HermitianMatrix,
};
use crate::stabilizer::{is_in_family, MembershipReport, StabilizerTarget};
use crate::tol;
use crate::Result;

/// A collision step: joint unitary `S` on `X ⊗ Y` (bath first) and the
/// fresh bath state used in every application.
#[derive(Debug, Clone)]
pub struct CollisionSpec {
    s: ComplexMatrix,
    rho_x: DensityMatrix,
    d_y: usize,
}

impl CollisionSpec {
    pub fn new(s: ComplexMatrix, rho_x: DensityMatrix, d_y: usize) -> Result<Self> {
        let d_x = rho_x.dim();
        if d_y == 0 {
            return Err(Error::InvalidArgument("system dimension must be positive".into()));
        }
        if s.n_rows() != d_x * d_y || s.n_cols() != d_x * d_y {
            return Err(Error::DimensionMismatch(format!(
                "joint unitary must be {0}x{0} for d_X={d_x}, d_Y={d_y}, got {1}x{2}",
                d_x * d_y,
                s.n_rows(),
                s.n_cols()
            )));
        }
        let defect = s.unitarity_defect();
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { s, rho_x, d_y })
    }

    pub fn joint_unitary(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn bath_state(&self) -> &DensityMatrix {
        &self.rho_x
    }

    pub fn d_x(&self) -> usize {
        self.rho_x.dim()
    }

    pub fn d_y(&self) -> usize {
        self.d_y
    }

    /// `(⟨x_i| ⊗ I_Y) S (|x_j⟩ ⊗ I_Y)` for columns `x_i`, `x_j` of the bath
    /// eigenbasis.
    fn block(&self, bra: &ComplexMatrix, ket: &ComplexMatrix) -> ComplexMatrix {
        let d_y = self.d_y;
        let d_x = self.d_x();
        ComplexMatrix::from_fn(d_y, d_y, |a, b| {
            let mut acc = Complex64::ZERO;
            for x in 0..d_x {
                let bra_amp = bra.get(x, 0).conj();
                if bra_amp == Complex64::ZERO {
                    continue;
                }
                for y in 0..d_x {
                    let ket_amp = ket.get(y, 0);
                    if ket_amp == Complex64::ZERO {
                        continue;
                    }
                    acc += bra_amp * self.s.get(x * d_y + a, y * d_y + b) * ket_amp;
                }
            }
            acc
        })
    }

    /// Direct application `Tr_X[S (ρ_X ⊗ ρ) S†]` without going through the
    /// Kraus form; used as an independent route in tests and reports.
    pub fn apply_direct(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.n_rows() != self.d_y || rho.n_cols() != self.d_y {
            return Err(Error::DimensionMismatch(format!(
                "collision channel expects a {0}x{0} input, got {1}x{2}",
                self.d_y,
                rho.n_rows(),
                rho.n_cols()
            )));
        }
        let joint = self.rho_x.kron(rho);
        let evolved = &(&self.s * &joint) * &self.s.adjoint();
        evolved.partial_trace(self.d_x(), self.d_y, crate::qmat::Subsystem::First)
    }
}

/// Kraus operators `K_{ij} = √r_j ⟨r_i|S|r_j⟩` over the bath eigenbasis.
///
/// The bra index runs over the full eigenbasis while kets with eigenvalue
/// at most 1e-12 are dropped (their operators vanish). The set satisfies
/// `Σ K†K = I`.
pub fn collision_kraus(spec: &CollisionSpec) -> Result<KrausSet> {
    let spectrum = eigh_desc(spec.rho_x.as_hermitian())?;
    let d_x = spec.d_x();
    let mut ops = Vec::new();
    for j in 0..d_x {
        let r_j = spectrum.eigenvalues()[j];
        if r_j <= tol::RANK {
            continue;
        }
        let ket = spectrum.eigenvector(j);
        let weight = Complex64::new(r_j.sqrt(), 0.0);
        for i in 0..d_x {
            let bra = spectrum.eigenvector(i);
            ops.push(spec.block(&bra, &ket).scale(weight));
        }
    }
    KrausSet::new(ops)
}

/// Choi matrix of the collision channel, `Σ vec(K)vec(K)†`. Always
/// trace-preserving.
pub fn collision_choi(spec: &CollisionSpec) -> Result<ChoiMatrix> {
    Ok(kraus_to_choi(&collision_kraus(spec)?))
}

/// `SWAP` on `d ⊗ d`.
pub fn swap_unitary(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            m.set(a * d + b, b * d + a, Complex64::ONE);
        }
    }
    m
}

/// Partial swap `cos θ · I + i sin θ · SWAP` on `d ⊗ d`; unitary because
/// `SWAP² = I`.
pub fn partial_swap(theta: f64, d: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(d * d).scale(Complex64::new(theta.cos(), 0.0));
    let sw = swap_unitary(d).scale(Complex64::new(0.0, theta.sin()));
    &id + &sw
}

/// Comparison of a collision channel against a thermal target.
#[derive(Debug, Clone)]
pub struct ThermalMembershipReport {
    /// `ρ_c = e^{-βH}/Z`, the target the channel is tested against.
    pub gibbs_state: DensityMatrix,
    pub fixed_point: FixedPointReport,
    /// Trace distance between the channel's fixed point and `ρ_c` is within
    /// tolerance.
    pub fixed_point_match: bool,
    pub membership: MembershipReport,
}

/// Does the collision channel thermalize to `gibbs(H_Y, β)`?
///
/// Computes the channel's fixed point (non-uniqueness is reported, not
/// fatal), compares it to the Gibbs state, and tests membership in the
/// Gibbs target's stabilizing family.
pub fn thermal_membership(
    spec: &CollisionSpec,
    h_y: &HermitianMatrix,
    beta: f64,
    tolerance: f64,
) -> Result<ThermalMembershipReport> {
    if h_y.dim() != spec.d_y() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian dimension {} does not match system dimension {}",
            h_y.dim(),
            spec.d_y()
        )));
    }
    let gibbs_state = gibbs(h_y, beta)?;
    let choi = collision_choi(spec)?;
    let fp = fixed_point(&choi, tol::FIXED_POINT)?;
    let fixed_point_match = trace_distance(&fp.state, &gibbs_state)? <= tolerance;
    let target = StabilizerTarget::new(gibbs_state.clone())?;
    let membership = is_in_family(&choi, &target, tolerance.max(tol::CHECK));
    Ok(ThermalMembershipReport {
        gibbs_state,
        fixed_point: fp,
        fixed_point_match,
        membership,
    })
}
