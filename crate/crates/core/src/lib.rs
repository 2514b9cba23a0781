pub mod compressor;
pub mod decompose;
pub mod error;
pub mod harness;
pub mod identity_approx;
pub mod network;
pub mod structmat;

pub use error::{Error, Result};
