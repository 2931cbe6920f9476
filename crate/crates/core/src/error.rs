use thiserror::Error;

use crate::state::Spin;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spin coefficients are not normalized: c1^2 + c2^2 = {0}")]
    Normalization(f64),

    #[error("negative or non-finite spin coefficient: {0}")]
    InvalidCoefficient(f64),

    #[error("cutoff mismatch: {left} != {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("index ({m}, {n}) outside cutoff {cutoff}")]
    IndexOutOfRange { m: usize, n: usize, cutoff: usize },

    #[error("spin branch {0} carries no weight")]
    EmptyBranch(Spin),

    #[error("density matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("measurement range {n} is below the density-matrix cutoff {cutoff}")]
    RangeBelowCutoff { n: usize, cutoff: usize },

    #[error("quantum efficiency {0} outside (0, 1]")]
    EfficiencyOutOfRange(f64),

    #[error("event count must be positive")]
    NoEvents,

    #[error("measurement record is empty")]
    EmptyRecord,

    #[error("need at least {required} phases for cutoff {nc}, got {got}")]
    TooFewPhases {
        required: usize,
        got: usize,
        nc: usize,
    },

    #[error("phase {index} is {phase}, expected {expected} on a uniform grid")]
    NonUniformPhases {
        index: usize,
        phase: f64,
        expected: f64,
    },

    #[error("phase distributions disagree on length or |alpha|/eta")]
    InconsistentPhases,

    #[error("band {s} outside 0..={nc}")]
    BandOutOfRange { s: usize, nc: usize },

    #[error("measurement range {n} is below the reconstruction cutoff {nc}")]
    RangeBelowReconstruction { n: usize, nc: usize },

    #[error("band {s}: kernel is rank deficient (cond(G^T G) = {cond:e}, limit {limit:e})")]
    IllConditioned { s: usize, cond: f64, limit: f64 },

    #[error("largest diagonal element {0:e} is below the extraction threshold")]
    VanishingDiagonal(f64),

    #[error("spin-up probability {0} must lie strictly inside (0, 1)")]
    SpinProbability(f64),

    #[error("overlap modulus is zero; the relative phase is unobservable")]
    ZeroOverlap,

    #[error("pulse data must span two independent drive axes")]
    InsufficientPulses,

    #[error("inconsistent pulse data: normalized component {0} exceeds 1 beyond tolerance")]
    InconsistentSpinData(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
}
