pub mod error;
pub mod extraction;
pub mod geometric;
pub mod grading;
pub mod laurent;
pub mod models;
pub mod scalar;
pub mod va_core;

pub use error::{Error, Result};
