pub mod affine;
pub mod arith;
pub mod error;
pub mod measure;
pub mod padic;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
