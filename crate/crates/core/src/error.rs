use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("algebra is not nilpotent: lower central series stabilizes at dimension {stable_dim}")]
    NotNilpotent { stable_dim: usize },
    #[error("subspace is not closed under the bracket")]
    NotSubalgebra,
    #[error("subspace is not an ideal")]
    NotIdeal,
    #[error("matrix is not a derivation: fails on basis pair ({0}, {1})")]
    NotDerivation(usize, usize),
    #[error("derivation is not diagonalizable over the reals")]
    NotDiagonalizable,
    #[error("derivation has irrational eigenvalue near {0}; only rational spectra are supported exactly")]
    IrrationalSpectrum(f64),
    #[error("derivation has non-positive eigenvalue {0}")]
    NonPositiveEigenvalue(String),
    #[error("pair is not of Carnot type")]
    NotCarnot,
    #[error("flag index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("dilation parameter must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("degenerate sample: x = y")]
    DegenerateSample,
    #[error("limit did not converge: Cauchy estimate {estimate:e} exceeds tolerance {tol:e}")]
    NonConvergent { estimate: f64, tol: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("not a valid point of SL(m)/SO(m): {0}")]
    InvalidSpd(String),
    #[error("elements belong to different Heintze pairs")]
    PairMismatch,
    #[error("orbit diameter not stable between word caps: {previous} -> {current}")]
    OrbitNotStable { previous: f64, current: f64 },
    #[error("isometry group has a continuous part of dimension {0}")]
    NotFinite(usize),
    #[error("finite enumeration could not pin down the group: {0}")]
    Unresolved(String),
    #[error("map is not in diagonal graded normal form: {0}")]
    NotDiagonalForm(String),
    #[error("delta must be positive, got {0}")]
    NonPositiveDelta(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
