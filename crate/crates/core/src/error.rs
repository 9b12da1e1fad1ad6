use thiserror::Error;

/// Errors raised by the model, solvers and front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its documented invariant.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// An argument lies outside the domain of the function.
    #[error("`{field}` = {value} is outside the domain {domain}")]
    Domain {
        field: &'static str,
        value: f64,
        domain: String,
    },

    /// The air asset sits at the ground-device height, so the critical height is constant.
    #[error("degenerate geometry: h_a == h_g ({h}); use the ground-ground formula")]
    DegenerateGeometry { h: f64 },

    /// A closed form was requested for a height law it does not apply to.
    #[error("{method} requires a {expected} height distribution")]
    WrongDistribution {
        method: &'static str,
        expected: &'static str,
    },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge: error estimate {estimate:e} after {intervals} intervals"
    )]
    NonConvergence { estimate: f64, intervals: usize },

    /// The coarse scan placed the maximum on the upper end of the search range.
    #[error("maximum lies at the upper end of the range [{lo}, {hi}]; widen the range")]
    Bracket { lo: f64, hi: f64 },

    /// The objective has the same sign at both ends of the bracket.
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// A configuration or data file could not be parsed.
    #[error("{0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
