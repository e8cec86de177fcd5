//! Exact symbolic engine for first-order Berezinian variational problems on
//! split supermanifolds.
//!
//! The crate works in a single global splitting chart of a graded submersion
//! `p: (N,B) -> (M,A)` with base dimension `(m|n)` and fiber dimension `(r|s)`.
//! Superfunctions are polynomials with exact rational coefficients in the even
//! coordinates times ordered Grassmann monomials in the odd coordinates, so
//! every identity the engine claims is an exact normal-form equality.
//!
//! Module layout:
//!
//! * [`superalg`] — supercommutative coordinate algebra: normal forms, parity,
//!   products, left partial derivatives.
//! * [`jetcoords`] — multi-index calculus, jet coordinate catalogs, total
//!   derivatives, contact forms, jet extensions and prolongation.
//! * [`gforms`] — graded differential forms: wedge, exterior differential,
//!   insertion, Lie derivative and the horizontal/vertical split.
//! * [`berezin`] — Berezinian sections in the canonical basis, the Berezin
//!   integral, Lie derivatives of Berezinian sections and divergences.
//! * [`varcalc`] — the variational core: Poincaré–Cartan forms by several
//!   routes, Euler–Lagrange operator, critical sections, Noether currents.
//! * [`evalor`] — independent finite Grassmann-algebra oracle for probing
//!   symbolic identities at structured and random points.
//! * [`render`] — plain-text, LaTeX and canonical-JSON renderers.

pub mod berezin;
pub mod evalor;
pub mod gforms;
pub mod jetcoords;
pub mod render;
pub mod superalg;
pub mod varcalc;

pub use superalg::{CoordId, Parity, Rational, SuperExpr};

/// Errors shared by all engine modules.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CasError {
    /// A value refers to coordinates outside the chart it is used with.
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    /// A coordinate is not part of the chart catalog.
    #[error("unknown coordinate: {0}")]
    UnknownCoordinate(String),
    /// An argument violates the operation contract.
    #[error("argument error: {0}")]
    ArgumentError(String),
    /// A precondition of the operation does not hold for the given value.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Even/odd bookkeeping would be violated.
    #[error("parity violation: {0}")]
    ParityViolation(String),
}

pub type Result<T> = std::result::Result<T, CasError>;
