use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("covariance matrix is not symmetric positive-definite: {0}")]
    NotPositiveDefinite(String),
    #[error("uncertainty principle violated: symplectic eigenvalue {sigma} < 1/2")]
    UncertaintyViolated { sigma: f64 },
    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),
    #[error("matrix is not symplectic (residual {0:e})")]
    NotSymplectic(f64),
    #[error("matrix is not symplectic-orthogonal (residual {0:e})")]
    NotSymplecticOrthogonal(f64),
    #[error("matrix is not unitary (residual {0:e})")]
    NotUnitary(f64),
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("mixture weight is singular: Γ − Γ₀ is not positive-definite")]
    SingularMixture,
    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),
    #[error("state is not pure (max |σ − 1/2| = {0:e})")]
    NotPure(f64),
    #[error("syntax error at line {line}, column {col}: {msg}")]
    SyntaxError { line: usize, col: usize, msg: String },
    #[error("mode index out of range at line {line}: {msg}")]
    ModeOutOfRange { line: usize, msg: String },
    #[error("circuit does not reference the parameter phi")]
    NoParameter,
    #[error("Λ equation residual {0:e} exceeds tolerance")]
    SingularBeyondPureTol(f64),
    #[error("lemma precondition violated: {0}")]
    PrecondViolated(String),
    #[error("parameter is not identifiable inside the window: {0}")]
    NonIdentifiable(String),
}

pub type Result<T> = std::result::Result<T, Error>;
