pub mod cli;
pub mod error;
pub mod frame_finder;
pub mod gegenbauer;
pub mod inequalities;
pub mod montecarlo;
pub mod zonal;

pub use error::{Error, Result};
