use thiserror::Error;

use crate::sphere::SpherePoint;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    Eigensolver { dim: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below tolerance {tol:e}"
    )]
    NotPositiveSemidefinite { eigenvalue: f64, tol: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("outcome vector component {index} = {value} lies outside [-1, 1]")]
    OutsideCube { index: usize, value: f64 },

    #[error("invalid Markov kernel: {0}")]
    InvalidKernel(String),

    #[error("POVM is not commutative: max commutator norm {max_commutator:e} exceeds {tol:e}")]
    NotCommutative { max_commutator: f64, tol: f64 },

    #[error("joint diagonalization failed: {0}")]
    JointDiagonalization(String),

    #[error("random POVM generation failed after {attempts} attempts")]
    GeneratorExhausted { attempts: usize },

    #[error("function is not differentiable and finite differences are not permitted")]
    NotDifferentiable,

    #[error("function evaluated to a non-finite value at t = {t}, phi = {phi}")]
    NonFiniteFunction { t: f64, phi: f64 },

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("caps fail to cover the sphere: worst point t = {}, phi = {} has total bump mass {mass:e}", .point.t, .point.phi)]
    CoverageGap { point: SpherePoint, mass: f64 },

    #[error("invalid partition of unity: {0}")]
    InvalidPartition(String),

    #[error("grid too coarse for level m = {m}: need n_t >= {need_t} and n_phi >= {need_phi}, have {n_t} x {n_phi}")]
    ContextUnderresolved {
        m: usize,
        n_t: usize,
        n_phi: usize,
        need_t: usize,
        need_phi: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
