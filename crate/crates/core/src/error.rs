use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix {0:?} is not in GL(2,Z): determinant {1}")]
    NotUnimodular([[i64; 2]; 2], i64),

    #[error("gluing matrix {matrix:?} has no real logarithm: eigenvalues {eigenvalues}")]
    NoRealLogarithm {
        matrix: [[i64; 2]; 2],
        eigenvalues: String,
    },

    #[error("cannot parse gluing matrix from {0:?}: expected four comma-separated integers")]
    MatrixParse(String),

    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),

    #[error("non-finite state: {0}")]
    NonFiniteState(String),

    #[error("no return to the section z in Z within t = {0}")]
    NoReturn(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integer overflow in group arithmetic at radius {radius}")]
    Overflow { radius: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
