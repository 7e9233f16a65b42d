//! Numerical laboratory for generalized Yosida classes `Y_{α,β}`.
//!
//! The crate provides evaluable meromorphic test functions together with the
//! engines needed to measure them: spherical derivatives and chordal geometry
//! ([`riemann`]), a function catalog built around the Weierstrass ℘-function
//! ([`catalog`]), meromorphic continuation of first Painlevé transcendents
//! ([`painleve`]), argument-principle zero/pole location ([`locate`]),
//! Nevanlinna growth quantities ([`nevanlinna`]), the rescaling family
//! `f_h(z) = h^{-α} f(h + h^{-β} z)` and its normality diagnostics
//! ([`rescale`]), and Mittag-Leffler / Hadamard reconstructions from located
//! zero and pole data ([`expansion`]).
//!
//! Everything is plain double precision; tolerances are documented per
//! operation. All core values are immutable and all operations are pure, so
//! types can be shared freely across threads.

pub mod catalog;
pub mod expansion;
pub mod fit;
pub mod locate;
pub mod nevanlinna;
pub mod painleve;
pub mod quad;
pub mod rescale;
pub mod riemann;
pub mod util;
pub mod verify;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex64;
