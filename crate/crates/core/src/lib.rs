pub mod bkk;
pub mod convex;
pub mod crofton;
pub mod density;
pub mod error;
pub mod estimate;
pub mod field;
pub mod finsler;
pub mod hull;
pub mod mixed_volume;
pub mod quadrature;
pub mod rng;
pub mod roots;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
