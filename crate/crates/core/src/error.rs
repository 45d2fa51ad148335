use core::fmt;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A degree distribution is malformed (weights, duplicates, zero degree).
    InvalidDistribution(&'static str),
    /// A degree exceeds the number of information bits it is bound to.
    InvalidDegree { degree: usize, k_info: usize },
    /// Code or image dimensions are inconsistent.
    InvalidShape(&'static str),
    /// Two vectors that must agree in length do not.
    LengthMismatch { expected: usize, actual: usize },
    /// A scalar parameter is outside its admissible range.
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDistribution(why) => write!(f, "invalid degree distribution: {why}"),
            Error::InvalidDegree { degree, k_info } => {
                write!(f, "degree {degree} is outside 1..={k_info}")
            }
            Error::InvalidShape(why) => write!(f, "invalid shape: {why}"),
            Error::LengthMismatch { expected, actual } => {
                write!(f, "length mismatch: expected {expected}, got {actual}")
            }
            Error::InvalidParameter(why) => write!(f, "invalid parameter: {why}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
