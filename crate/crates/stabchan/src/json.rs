//! JSON wire formats shared by the CLI, the C API, and file fixtures.
//!
//! Matrices travel as `{"rows": r, "cols": c, "data": [[re, im], ...]}` in
//! row-major order. Doubles are serialized with shortest round-trip
//! precision (serde_json/ryu), so write-then-read is exact.

use serde::{Deserialize, Serialize};

use crate::channel::{ChoiMatrix, KrausSet};
use crate::qmat::{ComplexMatrix, DensityMatrix, HermitianMatrix};
use crate::scattering::CollisionSpec;
use crate::stabilizer::IterationTrace;
use crate::Result;
use num_complex::Complex64;

/// `{"rows": r, "cols": c, "data": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.n_rows(),
            cols: m.n_cols(),
            data: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    /// Validates entry count and finiteness.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let data = self
            .data
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(self.rows, self.cols, data)
    }
}

/// `{"choi": <matrix>, "d_out": n, "d_in": m}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelJson {
    pub choi: MatrixJson,
    pub d_out: usize,
    pub d_in: usize,
}

impl ChannelJson {
    pub fn from_choi(c: &ChoiMatrix) -> Self {
        Self {
            choi: MatrixJson::from_matrix(c.matrix()),
            d_out: c.d_out(),
            d_in: c.d_in(),
        }
    }

    pub fn to_choi(&self) -> Result<ChoiMatrix> {
        let mat = HermitianMatrix::new(self.choi.to_matrix()?)?;
        ChoiMatrix::new(mat, self.d_out, self.d_in)
    }
}

/// `{"kraus": [<matrix>, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausJson {
    pub kraus: Vec<MatrixJson>,
}

impl KrausJson {
    pub fn from_kraus(k: &KrausSet) -> Self {
        Self {
            kraus: k.operators().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_kraus(&self) -> Result<KrausSet> {
        KrausSet::new(
            self.kraus
                .iter()
                .map(MatrixJson::to_matrix)
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// `{"sigma": <matrix>, "B": <matrix>}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub sigma: MatrixJson,
    #[serde(rename = "B")]
    pub completion: MatrixJson,
}

/// `{"S": <matrix>, "rho_X": <matrix>, "d_Y": n}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollisionJson {
    #[serde(rename = "S")]
    pub s: MatrixJson,
    #[serde(rename = "rho_X")]
    pub rho_x: MatrixJson,
    #[serde(rename = "d_Y")]
    pub d_y: usize,
}

impl CollisionJson {
    pub fn to_spec(&self) -> Result<CollisionSpec> {
        let s = self.s.to_matrix()?;
        let rho_x = parse_density_matrix_value(&self.rho_x)?;
        CollisionSpec::new(s, rho_x, self.d_y)
    }
}

/// One step of an iteration trace with the full state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceStepJson {
    pub n: usize,
    pub p_n: f64,
    #[serde(rename = "weight_B")]
    pub weight_b: f64,
    pub dist_to_sigma: f64,
    pub state: MatrixJson,
}

/// Full iteration trace with per-step states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceJson {
    pub q: f64,
    pub stagnant: bool,
    pub steps: Vec<TraceStepJson>,
}

impl TraceJson {
    pub fn from_trace(trace: &IterationTrace) -> Self {
        Self {
            q: trace.q,
            stagnant: trace.stagnant,
            steps: trace
                .steps
                .iter()
                .map(|s| TraceStepJson {
                    n: s.n,
                    p_n: s.p,
                    weight_b: s.weight_b,
                    dist_to_sigma: s.dist_to_sigma,
                    state: MatrixJson::from_matrix(s.state.as_matrix()),
                })
                .collect(),
        }
    }
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let dto: MatrixJson = serde_json::from_str(text)?;
    dto.to_matrix()
}

pub fn parse_hermitian(text: &str) -> Result<HermitianMatrix> {
    HermitianMatrix::new(parse_matrix(text)?)
}

pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::from_complex(parse_matrix(text)?)
}

fn parse_density_matrix_value(dto: &MatrixJson) -> Result<DensityMatrix> {
    DensityMatrix::from_complex(dto.to_matrix()?)
}

pub fn parse_channel(text: &str) -> Result<ChoiMatrix> {
    let dto: ChannelJson = serde_json::from_str(text)?;
    dto.to_choi()
}

pub fn parse_kraus(text: &str) -> Result<KrausSet> {
    let dto: KrausJson = serde_json::from_str(text)?;
    dto.to_kraus()
}

pub fn parse_collision(text: &str) -> Result<CollisionSpec> {
    let dto: CollisionJson = serde_json::from_str(text)?;
    dto.to_spec()
}

pub fn parse_family(text: &str) -> Result<(DensityMatrix, DensityMatrix)> {
    let dto: FamilyJson = serde_json::from_str(text)?;
    Ok((
        parse_density_matrix_value(&dto.sigma)?,
        parse_density_matrix_value(&dto.completion)?,
    ))
}

pub fn matrix_to_string(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixJson::from_matrix(m)).expect("plain data serializes")
}

pub fn channel_to_string(c: &ChoiMatrix) -> String {
    serde_json::to_string_pretty(&ChannelJson::from_choi(c)).expect("plain data serializes")
}
