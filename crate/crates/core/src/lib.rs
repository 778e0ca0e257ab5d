pub mod automata;
pub mod constraints;
pub mod error;
pub mod jsr;
pub mod language;
pub mod linalg;

pub use error::{Error, Result};
