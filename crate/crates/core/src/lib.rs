pub mod error;
pub mod hankel;
pub mod model_spaces;
pub mod ordered_group;
pub mod series;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
