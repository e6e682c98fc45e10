pub mod environment;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod feedback;
pub mod geometry;
pub mod learners;
pub mod losses;
mod vector;

pub use error::{Error, Result};
pub use vector::Vector;
