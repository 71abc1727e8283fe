//! Spectral solver for the spatially homogeneous Fokker–Planck–Landau
//! equation with inverse-power-law collision kernels.
//!
//! The distribution function is expanded in probabilists' Hermite polynomials
//! weighted by the global Maxwellian,
//!
//! ```text
//! f(t, v) = Σ_α f_α(t) H^α(v) M(v),     M(v) = (2π)^{−3/2} e^{−|v|²/2},
//! ```
//!
//! which turns the collision operator into a bilinear form with constant
//! coefficients A_α^{λ,κ}.  For kernels Ψ(|g|) = Λ|g|^{γ+2} with γ > −5 these
//! coefficients have a closed form: the Hermite basis is converted to Burnett
//! polynomials (Laguerre × solid harmonic), whose radial/angular separation
//! reduces every singular integral to Γ-function expressions.  The tensor is
//! computed once per (γ, Λ, M₀), cached to disk, and contracted at run time.
//!
//! Truncating the quadratic form at degree M₀ and modelling the remaining
//! tail degrees ≤ M with the (diagonal) linear Fokker–Planck operator yields
//! the hybrid right-hand side integrated here with fixed-step RK4.
//!
//! Module map:
//!
//! * [`index_space`] — graded multi-index sets and Burnett index enumeration;
//! * [`basis_functions`] — Hermite/Laguerre/spherical-harmonic/Burnett evaluation;
//! * [`quadrature`] — Gauss rules and the singular radial integrator used as
//!   the brute-force oracle for every closed form;
//! * [`hermite_burnett`] — the Hermite→Burnett conversion table;
//! * [`collision_kernel`] — closed-form collision coefficients and the cache;
//! * [`collision_models`] — quadratic, linear, and hybrid right-hand sides;
//! * [`dynamics`] — RK4 time integration and trajectory recording;
//! * [`observables`] — moments, marginals, and initial-state projection;
//! * [`scenarios`] — the BKW, bi-Gaussian, and Rosenbluth initial data;
//! * [`cli`] — configuration, CSV emission, and the command entry points;
//! * [`validate`] — the self-check suite behind `fpl validate`.

pub mod basis_functions;
pub mod cli;
pub mod collision_kernel;
pub mod collision_models;
pub mod dynamics;
pub mod hermite_burnett;
pub mod index_space;
mod numeric;
pub mod observables;
pub mod quadrature;
pub mod scenarios;
pub mod validate;

use index_space::MultiIndex;

/// Errors produced by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A scalar parameter lies outside its admissible range.
    #[error("{name} = {value} is outside the admissible range ({requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    /// Structurally invalid input (mismatched lengths, bad index pairs, …).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A multi-index falls outside the index set it was used with.
    #[error("multi-index {index} has degree {degree}, outside the set of max degree {max_degree}")]
    IndexNotFound {
        index: MultiIndex,
        degree: usize,
        max_degree: usize,
    },
    /// A precomputed table does not cover the requested indices.
    #[error("table too small: {0}")]
    Capacity(String),
    /// An internal consistency check failed (numerical residual too large).
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    /// Configuration rejected before any computation started.
    #[error("configuration error: {0}")]
    Config(String),
    /// On-disk data is malformed (bad magic, version, or checksum).
    #[error("format error: {0}")]
    Format(String),
    /// On-disk data is well-formed but incompatible with the request.
    #[error("cache mismatch: {field} is {found}, expected {expected}")]
    Mismatch {
        field: &'static str,
        expected: String,
        found: String,
    },
    /// The right-hand side produced a non-finite value.
    #[error("non-finite right-hand side at t = {time}")]
    NonFinite { time: f64 },
    /// Time integration diverged.
    #[error("numerical blowup at step {step} (t = {time}): non-finite state")]
    Blowup { step: usize, time: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
