pub mod cli;
pub mod dualvol;
pub mod error;
pub mod family;
pub mod inequalities;
pub mod intersect;
pub mod oracle;
pub mod quadrature;
pub mod starbody;

pub use error::{Error, Result};
