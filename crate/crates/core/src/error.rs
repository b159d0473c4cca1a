use thiserror::Error;

/// Which factor of the closed-form kernel vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularFactor {
    /// `b = w * conj(t)` is zero.
    BZero,
    /// `1 - b` is zero (both points on `|w| = 1`).
    OneMinusB,
    /// `b^l - a^m` is zero (the cone `|z|^m = |w|^l`).
    Cone,
}

impl std::fmt::Display for SingularFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SingularFactor::BZero => write!(f, "b = 0"),
            SingularFactor::OneMinusB => write!(f, "1 - b = 0"),
            SingularFactor::Cone => write!(f, "b^l - a^m = 0"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index pair not admissible: {0}")]
    NotAdmissible(String),

    #[error("indeterminate comparison: {what} lies within the {band:e} indeterminacy band")]
    Indeterminate { what: String, band: f64 },

    #[error("kernel singular: {0}")]
    Singular(SingularFactor),

    #[error("series truncation failed after {terms} terms (tail bound {tail_bound:e}, |u| = {abs_u})")]
    Truncation {
        terms: usize,
        tail_bound: f64,
        abs_u: f64,
    },

    #[error("non-finite integrand {value} at node {index} (|z| = {abs_z}, |w| = {abs_w})")]
    NonFinite {
        index: usize,
        abs_z: f64,
        abs_w: f64,
        value: String,
    },

    #[error("empty Schur window: {0}")]
    EmptySchurWindow(String),

    #[error("gamma is rational ({m}/{l}) within the supplied precision; use the rational pipeline")]
    RationalGamma { m: u64, l: u64 },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by invalid user input, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::NotAdmissible(_)
                | Error::EmptySchurWindow(_)
                | Error::RationalGamma { .. }
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
