pub mod circle;
pub mod error;
pub mod expsums;
pub mod gamma;
pub mod measures;
pub mod quadform;
pub mod ring;
pub mod symplectic;
pub mod weil;

pub use error::{Error, Result};
