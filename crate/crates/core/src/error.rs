use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid density matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid Bloore coordinates: {0}")]
    InvalidCoords(String),

    #[error("degenerate state: diagonal entry {index} is not strictly positive")]
    Degenerate { index: usize },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error(
        "quadrature did not reach tolerance {tol:e}: best value {value}, \
         error estimate {abs_err_est:e} after {evals} evaluations"
    )]
    NoConvergence {
        value: f64,
        abs_err_est: f64,
        tol: f64,
        evals: usize,
    },

    #[error("no positive-semidefinite samples among {n_total} drawn")]
    InsufficientSamples { n_total: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
