pub mod adaptive;
pub mod boundary;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod oracle;
pub mod postprocess;
pub mod scene_io;
pub mod system;

pub use error::{Error, Result};
