pub mod action;
pub mod error;
pub mod group;
pub mod harness;
pub mod measure;
pub mod space;

pub use error::{Error, Result};
