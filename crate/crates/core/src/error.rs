use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DamError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot draw {paths} distinct delays from the range [0, {max_delay}]")]
    DelayRangeTooNarrow { paths: usize, max_delay: usize },

    #[error("zero-norm vector in {0}")]
    ZeroNorm(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "zero forcing infeasible: {columns} channel paths with {antennas} antennas (rank {rank})"
    )]
    ZfInfeasible {
        antennas: usize,
        columns: usize,
        rank: usize,
    },

    #[error("regularized Gram matrix is singular")]
    SingularGram,

    #[error("power constraint violated: requested {requested:e} W with budget {budget:e} W")]
    PowerViolation { requested: f64, budget: f64 },

    #[error("negative power coefficient {0:e}")]
    NegativePower(f64),

    #[error("empty gain list")]
    EmptyGains,

    #[error("non-positive gain {0:e}")]
    NonPositiveGain(f64),

    #[error("noise power must be positive, got {0:e}")]
    NonPositiveNoise(f64),

    #[error("SINR slack must be positive at the expansion point, got {0:e}")]
    NonPositiveSlack(f64),

    #[error("local point is infeasible for the convex subproblem: {0}")]
    InfeasibleLocalPoint(String),

    #[error("interior-point solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverNonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T, E = DamError> = std::result::Result<T, E>;
