use thiserror::Error;

/// Everything the kernels can reject.
///
/// Variants fall into three families, see [`Error::category`]: bad input,
/// numeric or capacity guards, and failed verifications.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("value {value:e} at index {index} exceeds the magnitude guard 2^45")]
    MagnitudeGuard { index: usize, value: f64 },
    #[error("sequence is not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("value at index {0} is not positive")]
    NonPositiveValue(usize),
    #[error("need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("window {window} must be below 1/2")]
    WindowTooWide { window: f64 },
    #[error("{what} needs {needed} units of work, capacity is {cap}")]
    CapacityGuard {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("brute force limited to N <= {max}, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("work estimate {needed} exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("window half-width {0} must lie in (0, 1/2)")]
    DegenerateWindow(f64),
    #[error("degree must be at least 1")]
    InvalidDegree,
    #[error("polynomials are built for different windows ({0} vs {1})")]
    MismatchedWindows(f64, f64),
    #[error("fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("count at point {0} is not positive")]
    NonPositiveCount(usize),
    #[error("r must be at least 2, got {0}")]
    InvalidR(usize),
}

/// Coarse grouping used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Guard,
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::MagnitudeGuard { .. }
            | Error::CapacityGuard { .. }
            | Error::TooLarge { .. }
            | Error::BudgetExceeded { .. }
            | Error::WindowTooWide { .. } => Category::Guard,
            _ => Category::Usage,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::MagnitudeGuard { .. } => "MagnitudeGuard",
            Error::NotIncreasing(_) => "NotIncreasing",
            Error::NonPositiveValue(_) => "NonPositiveValue",
            Error::TooShort { .. } => "TooShort",
            Error::WindowTooWide { .. } => "WindowTooWide",
            Error::CapacityGuard { .. } => "CapacityGuard",
            Error::TooLarge { .. } => "TooLarge",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::DegenerateWindow(_) => "DegenerateWindow",
            Error::InvalidDegree => "InvalidDegree",
            Error::MismatchedWindows(..) => "MismatchedWindows",
            Error::TooFewPoints(_) => "TooFewPoints",
            Error::NonPositiveCount(_) => "NonPositiveCount",
            Error::InvalidR(_) => "InvalidR",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
