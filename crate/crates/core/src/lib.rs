//! Numerical Bergman-space toolkit for planar radial domains.
//!
//! The crate evaluates Bergman kernels on discs, annuli and the punctured
//! disc, realizes Toeplitz operators and finite operator words as truncated
//! matrices in the monomial basis, and computes Berezin transforms along
//! nested families of domains. The [`experiments`] module packages the
//! convergence statements as reproducible [`ConvergenceReport`]s.
//!
//! Data-parallel loops (quadrature nodes, matrix entries, evaluation points,
//! report rows) go through [`par`], which uses rayon when the `parallel`
//! feature is enabled and a plain sequential loop otherwise. Reductions are
//! always performed sequentially in a fixed order, so results are identical
//! under both back ends.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernels;
pub mod operators;
pub mod par;
pub mod quadrature;
pub mod scalar;

pub use error::{BlabError, Result};
pub use experiments::{ConvergenceReport, Criterion, Verdict};
pub use geometry::{CompactRegion, Direction, DomainKind, DomainSpec, ExhaustionPlan};
pub use kernels::{KernelModel, NormalizedKernel, Representation};
pub use num_complex::Complex64;
pub use operators::{OperatorMatrix, OperatorWord, SymbolExpr};
pub use quadrature::{QuadratureGrid, RadialRule, Resolution};
