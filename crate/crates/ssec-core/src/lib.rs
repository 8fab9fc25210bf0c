//! Batch toolchain for security-aware embedded system models: a textual
//! modeling language covering requirements, attack graphs, hardware/software
//! partitioning and security-extended block designs, with attack coverage
//! analysis, performance-impact estimation, export to an applied-pi dialect,
//! and a built-in bounded Dolev-Yao verifier for confidentiality and
//! authenticity properties.

pub mod diag;
pub mod dsl;
pub mod dy;
pub mod threats;
pub mod model;
pub mod partition;
pub mod pi;
pub mod report;
pub mod term;

pub use diag::{Diagnostic, Severity, SourceSpan};
pub use model::Model;
