//! Active exterior cloaking for the 2D Helmholtz equation.
//!
//! A known incident field is cancelled inside a region by either layer
//! potentials on a closed curve ([`interior`]) or a handful of multipolar
//! point devices whose coefficients come from Green's formula and Graf's
//! addition theorem ([`multipole`]). A truncated-SVD least-squares design
//! ([`svd`]) serves as baseline, and a sound-soft scattering solver
//! ([`scatter`]) checks that hidden obstacles stay invisible.

pub mod error;
pub mod fields;
pub mod geometry;
pub mod interior;
pub mod linalg;
pub mod metrics;
pub mod multipole;
pub mod scatter;
pub mod specfun;
pub mod svd;
pub mod wave;

pub use error::{CloakError, Result};
pub use wave::{CVec2, Complex64, Point2, WaveContext};
