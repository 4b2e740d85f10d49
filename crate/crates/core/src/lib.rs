//! Extrinsic geometry of hypersurfaces in Minkowski 4-space, with a focus on
//! the biconservative condition for shapes whose shape operator is real
//! diagonalizable.
//!
//! # Setting
//!
//! The ambient space is `R^4` with the Lorentzian inner product
//! `<a,b> = -a0*b0 + a1*b1 + a2*b2 + a3*b3`. A hypersurface is given as an
//! immersion `x(s,t,u)` with non-degenerate induced metric `g` and unit
//! normal `N`; we write `eps = <N,N>` (so `eps = -1` means the induced
//! metric is Riemannian and `eps = +1` means it is Lorentzian). The shape
//! operator is `S = g^{-1} b` with `b_ij = <x_ij, N>`, and the mean
//! curvature is `H = tr(S) / 3`.
//!
//! # Biconservative condition
//!
//! A hypersurface is biconservative when the tangential part of its
//! bitension field vanishes:
//!
//! ```text
//! S(grad H) + eps * (3H/2) * grad H = 0.
//! ```
//!
//! Wherever `grad H != 0` this forces `grad H` to be an eigenvector of `S`
//! with eigenvalue `k1 = -(3 eps / 2) H`, which is the scalar reduction the
//! verification pipeline checks pointwise. With `k1` labeled as the
//! curvature along `grad H` and `k2, k3` the remaining principal
//! curvatures, the trace identity turns the reduction into
//!
//! * `k1 = k2 + k3` when `eps = -1` (Riemannian case),
//! * `-3 k1 = k2 + k3` when `eps = +1` (Lorentzian case).
//!
//! # Module map
//!
//! * [`minkowski`]: inner product, Lorentzian cross product, causal
//!   classification, 3x3 solvers and the eigensolver for shape operators.
//! * [`jet`]: third-order forward-mode jets in three variables; every
//!   geometric quantity is evaluated through these, so curvature derivatives
//!   are exact to round-off rather than finite-differenced.
//! * [`geometry`]: the per-point pipeline from an immersion to metric,
//!   normal, shape operator, principal curvatures, `grad H`, connection
//!   forms, and Gauss/Codazzi residuals.
//! * [`catalog`]: the hypersurface families (rotational, cylindrical, and
//!   null-cone-ruled constructions) with closed-form profile curves, an ODE
//!   integrator, and a pointwise synthesis fallback.
//! * [`biconservative`]: grid verification producing deterministic
//!   machine-readable summaries.
//! * [`surface`]: codimension-two surface checks used to validate the
//!   constant-mean-curvature slices of the families.
//! * [`fixtures`]: reference hypersurfaces with hand-computed invariants.
//! * [`config`]: centralized numeric tolerances.
//! * [`jsonfmt`]: a tiny deterministic JSON writer (fixed key order, fixed
//!   float formatting) so reports are byte-identical across runs.

pub mod biconservative;
pub mod catalog;
pub mod config;
pub mod fixtures;
pub mod geometry;
pub mod jet;
pub mod jsonfmt;
pub mod minkowski;
pub mod surface;

pub use biconservative::{grid_verify, GridSpec, VerifySummary};
pub use catalog::families::{build_family, FamilyId, Signature};
pub use catalog::profile::ProfileSolution;
pub use config::Tolerances;
pub use geometry::{ImmersionPatch, PointData};
pub use jet::Jet3;
pub use minkowski::{cross4, inner4, CausalClass, SpectralResult, Vec4};

use thiserror::Error;

/// Unified error type for geometric and numeric failures.
#[derive(Debug, Error)]
pub enum GeomError {
    /// The induced metric is singular at a chart point.
    #[error("degenerate induced metric at (s,t,u)=({s},{t},{u}): det g = {det}")]
    DegenerateMetric { s: f64, t: f64, u: f64, det: f64 },

    /// A vector that must be normalized has (numerically) null causal norm.
    #[error("cannot normalize a null vector: <v,v> = {value}")]
    NullVector { value: f64 },

    /// A 3x3 linear solve hit a singular matrix.
    #[error("singular 3x3 system: det = {det}")]
    SingularMatrix { det: f64 },

    /// A jet division ran into a denominator too close to zero.
    #[error("division by a near-zero value: {value}")]
    DivisionNearZero { value: f64 },

    /// An elementary function left its real domain (log of a non-positive
    /// value, square root of a negative value, ...).
    #[error("{func} is undefined at {value}")]
    FunctionDomain { func: &'static str, value: f64 },

    /// A requested coordinate lies outside the valid chart domain.
    #[error("{what} = {value} outside valid range [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Inconsistent or incomplete run configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// ODE integration stopped at a domain guard before reaching the
    /// requested endpoint.
    #[error("integration guard triggered at s = {s}: {what}")]
    GuardHit { s: f64, what: &'static str },

    /// Root bracketing for profile synthesis failed to enclose a sign change.
    #[error("no sign-change bracket found for {what} at s = {s}")]
    NoBracket { what: &'static str, s: f64 },

    /// The shape operator has a complex eigenvalue pair or a defective
    /// repeated eigenvalue at a chart point.
    #[error("shape operator not real-diagonalizable at (s,t,u)=({s},{t},{u})")]
    NonDiagonalizable { s: f64, t: f64, u: f64 },

    /// `grad H` is numerically zero, so no principal direction can be
    /// labeled by it.
    #[error("mean-curvature gradient too small to orient: |grad H| = {grad_norm}")]
    GradTooSmall { grad_norm: f64 },

    /// All principal curvatures coincide, so the orthonormal frame adapted
    /// to distinct curvatures is undefined.
    #[error("umbilic point at (s,t,u)=({s},{t},{u}): frame undefined")]
    UmbilicPoint { s: f64, t: f64, u: f64 },

    /// The requested grid or interval selects no points.
    #[error("empty domain: the requested grid or interval contains no points")]
    EmptyDomain,

    /// An adaptive numeric routine exhausted its refinement budget.
    #[error("numeric routine failed to converge within its refinement budget")]
    NoConvergence,

    /// A quadrature endpoint sits on a singularity of the integrand.
    #[error("integrand is singular at endpoint {at}")]
    SingularEndpoint { at: f64 },

    /// A tabulated profile does not cover the interval it is queried on.
    #[error("profile table does not cover the requested interval")]
    IntervalMismatch,
}
