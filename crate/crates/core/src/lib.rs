//! Equilibrium theory of mean-field nematic liquid crystals on the half-sphere.
//!
//! The library solves the homogeneous self-consistency equation
//!
//! ```text
//! nu(m) = exp(-beta * H_nu(m)) / Z,    H_nu(m) = integral of U(m, m') nu(m') dm'
//! ```
//!
//! for an axisymmetric two-body potential `U` on the projective half-sphere,
//! and exposes the machinery built around it:
//!
//! * [`numerics`] — Gauss–Legendre quadrature in `u = cos(theta)` and Legendre
//!   polynomials.
//! * [`potential`] — axisymmetric potentials as even-degree Legendre expansions
//!   and the effective one-body field `H_nu`.
//! * [`sce`] — the density fixed-point solver and the scalar order-parameter
//!   reduction `xi = F(beta, xi)`.
//! * [`spectrum`] — eigenvalues of the linearized operator, bifurcation
//!   temperatures and the transcriticality coefficient.
//! * [`continuation`] — branch tracing over a `beta` range with saddle-node and
//!   transcritical event detection.
//! * [`thermo`] — free-energy density of homogeneous states and branch ranking.
//! * [`laplace`] — low-temperature asymptotic expansions and their numerical
//!   verification harness.
//! * [`mc`] — a finite-N Metropolis sampler validating the mean-field limit.

pub mod continuation;
pub mod error;
pub mod laplace;
pub mod mc;
pub mod numerics;
pub mod potential;
pub mod sce;
pub mod spectrum;
pub mod thermo;

pub use continuation::{BifurcationEvent, Branch, BranchKind, EventKind, TraceConfig};
pub use error::{Error, Result};
pub use laplace::{CumulantDiagnostics, LocalData};
pub use mc::{McEstimate, ParticleSystem};
pub use numerics::QuadratureRule;
pub use potential::{AxisymmetricPotential, EffectivePotential, PotentialSpec};
pub use sce::{FixedPointResult, OrientationDensity, ScalarRoot};
pub use spectrum::SpectrumReport;
pub use thermo::FreeEnergyReport;

/// Area of the configuration manifold: the unit upper half-sphere.
pub const HALF_SPHERE_AREA: f64 = 2.0 * std::f64::consts::PI;
