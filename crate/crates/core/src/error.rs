use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("asymmetric {what} at ({i}, {k}): {a} vs {b}")]
    Asymmetric { what: &'static str, i: usize, k: usize, a: f64, b: f64 },
    #[error("eigendecomposition produced non-finite entries")]
    Eigen,
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("{0} is not a Young function")]
    NotYoung(String),
    #[error("subset enumeration limited to {max} points, got {got}")]
    TooLarge { max: usize, got: usize },
    #[error("rate function {0} is not positive and non-increasing")]
    NotRate(String),
    #[error("window radius {radius} leaks mass {leak:e}; smallest safe radius about {safe_radius}")]
    WindowOverflow { radius: usize, leak: f64, safe_radius: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
