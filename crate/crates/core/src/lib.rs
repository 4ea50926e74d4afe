//! Detects Python dependencies that are declared but never imported, and
//! removes their declarations and imports.

pub mod detector;
pub mod error;
pub mod eval;
pub mod formats;
pub mod model;
pub mod pipeline;
pub mod python;
pub mod remover;
pub mod report;
pub mod resolver_dynamic;
pub mod resolver_static;
pub mod text;
pub mod vcs;

pub use error::{Error, Result};
