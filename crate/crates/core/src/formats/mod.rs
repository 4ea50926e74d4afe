//! Readers and surgical editors for each dependency-bearing file format.

pub mod environment;
pub mod pyproject;
pub mod python_source;
pub mod requirements;
pub mod setup_cfg;
pub mod setup_py;
