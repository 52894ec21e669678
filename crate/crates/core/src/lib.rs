//! Desk-scale functional analysis for vector-valued Riemann-Stieltjes integration.
//!
//! The locally convex target space is modelled as `C^n` or `R^n` carrying a
//! finite family of seminorms ([`space`]). Integrands and integrators are
//! breakpoint-based piecewise polynomials with explicit jump data
//! ([`function`]), so that every quantity of interest (variation,
//! semivariation, Stieltjes integrals, interval measures) has an exact or
//! certified counterpart to test against.
//!
//! Module map:
//!
//! * [`space`]: seminorms, dual vectors, polar gauges.
//! * [`function`] and [`partition`]: piecewise functions and tagged divisions.
//! * [`semivariation`]: semivariation, the increment set `E(a, b)`, dual bounds.
//! * [`stieltjes`]: both Riemann-Stieltjes sums, adaptive integration with
//!   certified error estimates, integration by parts.
//! * [`representation`]: the operator `Tg = ∫ g dx`, decomposition of the
//!   unit ball, hull containment and the interval measure of an integrator.

pub mod error;
pub mod function;
pub mod hull;
pub mod partition;
pub mod poly;
pub mod representation;
pub mod sample;
pub mod semivariation;
pub mod space;
pub mod stieltjes;
pub mod vector;

pub use error::{Error, Result};
pub use function::PiecewiseFunction;
pub use partition::{TagRule, TaggedPartition};
pub use poly::{CPoly, Poly};
pub use space::{DualVector, Field, Seminorm, SeminormKind, SpaceModel};
pub use vector::{Scalar, Vector};
