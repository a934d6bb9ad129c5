//! Certification of the correspondence between the elliptic solutions of the
//! autonomous Schwarzian ODEs `{u;z}^p = R(u)` and the elliptic binomial
//! equations `(u')^k = R(u)` of Briot and Bouquet.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: polynomials, rational functions, Möbius maps and a parser
//!   for rational expressions in `u`.
//! * [`series`]: truncated Laurent series arithmetic.
//! * [`weierstrass`]: evaluation of `℘`, `℘'` and derivative jets of the
//!   canonical solution families.
//! * [`schwarzian`]: the Schwarzian operator and the six canonical rows.
//! * [`fuchs`]: dominant balances, local Laurent solutions and Fuchs indices.
//! * [`briot_bouquet`]: binomial equations, the two theorem instances and
//!   the correspondence table.
//! * [`report`]: the suite runner and report encoders used by the CLI.

pub mod algebra;
pub mod briot_bouquet;
pub mod error;
pub mod fuchs;
pub mod jet;
pub mod report;
pub mod sampling;
pub mod schwarzian;
pub mod series;
pub mod weierstrass;

pub use algebra::{Mobius, Poly, RationalFn};
pub use error::{Error, Result};
pub use jet::DerivativeJet;
pub use series::LaurentSeries;

/// The scalar type used throughout.
pub type Complex = num_complex::Complex64;

/// Shorthand constructor for a [`Complex`].
#[inline]
pub const fn c64(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}
