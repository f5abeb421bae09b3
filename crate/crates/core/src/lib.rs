//! Quadratic Lie algebroids over a coordinate chart.
//!
//! The crate checks, sample by sample, that a Lie algebroid with connection and
//! metrics `(g, κ)` is a positive quadratic Cartan-Lie algebroid, and then
//! builds and verifies the compatible bi-invariant metrics `η₀` on `TM ⊕ A`.
//!
//! * [`expr`]: the field expression language with dual-number gradients
//! * [`geometry`]: chart, algebroid data, induced connections, basic curvature
//! * [`axioms`]: Lie algebroid, Cartan and invariance residuals
//! * [`metric`]: existence bound, `Ψ±`, `η₀`, uniqueness and alternative metrics
//! * [`instances`]: built-in example algebroids
//! * [`config`], [`report`], [`pipeline`]: input files, JSON reports, the full run

pub mod axioms;
pub mod config;
pub mod expr;
pub mod geometry;
pub mod instances;
pub mod metric;
pub mod pipeline;
pub mod report;
