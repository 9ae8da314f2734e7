//! Toolchain for `.a4c` architecture descriptions of agentic AI systems:
//! parsing, name resolution, semantic validation, graph analyses and
//! diagram rendering.

pub mod analysis;
pub mod diag;
pub mod dsl;
pub mod graph;
pub mod model;
pub mod render;
pub mod resolve;
pub mod validate;

pub use diag::{Diagnostic, Severity};
pub use model::Model;
pub use resolve::{resolve, ResolvedModel, TaskKey};
