//! Exact symbolic engine for Fedosov star-products on flat symplectic charts
//! with polynomial data.

pub mod builtin;
pub mod cli;
pub mod cohomology;
pub mod config;
pub mod connection;
pub mod error;
pub mod forms;
pub mod hochschild;
pub mod linalg;
pub mod pipeline;
pub mod poly;
pub mod random;
pub mod report;
pub mod scalar;
pub mod series;
pub mod star_table;
pub mod verify;
pub mod weyl;
pub mod weyl_form;

pub use error::{Error, Result};
pub use scalar::Scalar;
