use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state is not normalized: |psi|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("expected {expected} components, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("local factor {index} is not unitary (max deviation {deviation:e})")]
    NotUnitary { index: usize, deviation: f64 },

    #[error("state has no component in the permutation-symmetric subspace")]
    NoSymmetricComponent,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
