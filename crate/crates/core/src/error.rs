use thiserror::Error;

/// Failure modes of the numerical pipeline.
///
/// The CLI maps these onto exit codes: input/contract/resource problems are
/// usage-class failures (exit 2), numeric problems are exit 3. A negative
/// verification verdict is *not* an error — it travels through ordinary
/// return values.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside the documented domain
    /// (negative distance, non-finite α, zero box side, ...).
    #[error("input error: {0}")]
    Input(String),

    /// Two objects that must belong together do not (field on a different
    /// grid, mode index past the decomposition, repeated quartet indices).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A configured size exceeds what the dense pipeline is willing to
    /// allocate.
    #[error("resource limit: {0}")]
    Resource(String),

    /// The computation itself failed (eigensolver did not converge,
    /// residuals above tolerance, non-finite intermediate).
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
