use thiserror::Error;

/// Errors raised by the arithmetic layers and the Euler characteristic engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inversion of zero in a cyclotomic field")]
    ZeroInverse,

    #[error("cannot promote an element of Q(zeta_{from}) to Q(zeta_{to}): {to} is not a multiple of {from}")]
    NotAMultiple { from: u64, to: u64 },

    #[error("non-unit series: constant term is zero")]
    NonUnitSeries,

    #[error("degree {degree} out of range for a series truncated at H^{truncation}")]
    DegreeOutOfRange { degree: usize, truncation: usize },

    #[error("series truncated at H^{truncation} is too shallow to integrate over a stratum of dimension {dim}")]
    TruncationTooShallow { truncation: usize, dim: usize },

    #[error("fixed direction in virtual normal bundle (degree {degree}, sector r={order} k={exponent})")]
    FixedDirection {
        degree: i64,
        order: u64,
        exponent: u64,
    },

    #[error("internal invariant violation: {0}")]
    Invariant(String),

    /// `breakdown` holds the rendered per-sector contributions.
    #[error("non-rational total {total}")]
    NonRationalTotal { total: String, breakdown: Vec<String> },

    #[error("non-integer total {total}")]
    NonIntegerTotal { total: String, breakdown: Vec<String> },

    #[error("oracle undefined for negative degree {0}; use hypersurface_difference or HRR identities")]
    OracleUndefined(i64),

    #[error("invalid geometry: {0}")]
    Geometry(String),
}

impl Error {
    /// True for failures that indicate a bug in the engine rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::Invariant(_) | Error::NonRationalTotal { .. } | Error::NonIntegerTotal { .. }
        )
    }

    /// Per-sector breakdown attached to a failed total, if any.
    pub fn sector_dump(&self) -> Option<&[String]> {
        match self {
            Error::NonRationalTotal { breakdown, .. } | Error::NonIntegerTotal { breakdown, .. } => {
                Some(breakdown)
            }
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
