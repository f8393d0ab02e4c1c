use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported prime {0}: only odd primes are handled")]
    UnsupportedPrime(u64),

    #[error("precision exceeded: {0}")]
    PrecisionExceeded(String),

    #[error("cyclotomic depth mismatch: {left} vs {right}")]
    DepthMismatch { left: u32, right: u32 },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("matrix does not have determinant 1")]
    NotSpecialLinear,

    #[error("matrix is not a similitude of the form")]
    NotSimilitude,

    #[error("matrix is not symplectic")]
    NotSymplectic,

    #[error("point outside the domain: {0}")]
    NotInDomain(String),

    #[error("unsupported quadratic form: {0}")]
    UnsupportedForm(String),

    #[error("resource bound exceeded: {0}")]
    ResourceBound(String),

    #[error("orbit with representative {0} contains none of the standard isotropic subspaces")]
    UnmatchedOrbit(String),

    #[error("zero input where a nonzero value is required")]
    ZeroInput,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
