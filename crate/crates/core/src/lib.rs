//! Geometric models of closed immersed-boundary structures.
//!
//! A closed curve (or surface) is represented from samples on the circle
//! (sphere) either as a piecewise linear object, a trigonometric / spherical
//! harmonic interpolant, or a radial basis function interpolant. Each model
//! supplies normals and elastic forces; [`experiments`] compares them against
//! analytic test objects.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod linalg;
pub mod mechanics;
pub mod plot;
pub mod points;
pub mod pwl;
pub mod rbf;
pub mod shapes;

pub use error::{Error, Result};
