//! Crate-wide error type.
//!
//! Variants are grouped by what the caller should do about them:
//! configuration problems (bad scenario files, bad arguments) are
//! recoverable by fixing the input, while design and numerical errors
//! mean the requested control problem itself is ill-posed.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed arguments: dimension mismatches, nonpositive periods,
    /// negative weights and the like.
    InvalidInput(String),
    /// The control design is ill-posed: uncontrollable pair, unstable
    /// closed loop, singular DC gain, Riccati divergence.
    Design(String),
    /// The admissible-set horizon search exceeded its cap without
    /// certifying redundancy.
    HorizonOverflow { cap: usize, detail: String },
    /// Constraint tightening left an empty interior; carries the
    /// interior margin that was available and the slack that was needed.
    InfeasibleTightening { margin: f64, required: f64 },
    /// No command satisfies the constraints at the given state.
    Infeasible(String),
    /// A barrier evaluation was requested at a point outside the
    /// barrier's domain (some log argument nonpositive, or a negative
    /// multiplier).
    Domain(String),
    /// The per-sample invariant `(z, v_prev)` inside the tightened set
    /// was violated on entry to the governor.
    InvarianceViolation(String),
    /// Scenario / cache file problems: syntax, missing keys, bad types,
    /// unreadable includes.
    Config(String),
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 for configuration errors,
    /// 2 for design / numerical errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Config(_) | Error::Io(_) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(s) => write!(f, "invalid input: {s}"),
            Error::Design(s) => write!(f, "design error: {s}"),
            Error::HorizonOverflow { cap, detail } => {
                write!(f, "horizon overflow: no finite determination within {cap} steps ({detail})")
            }
            Error::InfeasibleTightening { margin, required } => write!(
                f,
                "infeasible tightening: interior margin {margin:.3e} is below the required slack {required:.3e}"
            ),
            Error::Infeasible(s) => write!(f, "infeasible: {s}"),
            Error::Domain(s) => write!(f, "domain error: {s}"),
            Error::InvarianceViolation(s) => write!(f, "invariance violation: {s}"),
            Error::Config(s) => write!(f, "config error: {s}"),
            Error::Io(s) => write!(f, "io error: {s}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
