pub mod assembly;
pub mod diagnostics;
pub mod error;
pub mod feec;
pub mod manifest;
pub mod mesh;
pub mod reduction25d;
pub mod scheme;
pub mod sparse;
pub mod study;

pub use error::{Error, Result};
