use num_complex::Complex64;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid damping symbol: {0}")]
    InvalidDamping(String),

    #[error("non-invertible damping (a_minus = {a_minus})")]
    NonInvertibleDamping { a_minus: f64 },

    #[error("damping too weak for T_(a,kappa): a_minus = {a_minus}")]
    DampingTooWeak { a_minus: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no samples")]
    NoSamples,

    #[error("matrix is not Hermitian (relative defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("QR iteration did not converge after {sweeps} sweeps ({} of {} eigenvalues found)", .partial.len(), .dim)]
    NoConvergence {
        sweeps: usize,
        dim: usize,
        partial: Vec<Complex64>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("corrupt operator file: {0}")]
    CorruptFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
