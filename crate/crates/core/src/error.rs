use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree {degree} outside window [{lo}, {hi}]")]
    WindowViolation { degree: i32, lo: i32, hi: i32 },

    #[error("exponent {exponent:?} outside exponent window")]
    ExponentOverflow { exponent: Vec<i32> },

    #[error("invalid scalar: {0}")]
    InvalidScalar(String),

    #[error("mode index {k} exceeds cap {cap}")]
    ModeCap { k: i32, cap: i32 },

    #[error("pole at coordinate {index}")]
    Pole { index: usize },

    #[error("points {i} and {j} coincide")]
    Diagonal { i: usize, j: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("region error: {0}")]
    Region(String),

    #[error("aliasing: {samples} samples cannot resolve exponents up to {max_exponent}")]
    Aliasing { samples: usize, max_exponent: i32 },

    #[error("undetermined within cap: {0}")]
    Undetermined(String),

    #[error("structural inconsistency: {0}")]
    Structural(String),

    #[error("axiom violation: {0}")]
    AxiomViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("index error: {0}")]
    Index(String),
}

pub type Result<T> = std::result::Result<T, Error>;
