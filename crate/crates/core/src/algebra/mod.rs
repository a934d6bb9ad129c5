//! Polynomials, rational functions and Möbius maps over the complex numbers,
//! plus a small parser for rational expressions in `u`.

mod mobius;
mod parse;
mod poly;
mod ratfn;

pub use mobius::Mobius;
pub use parse::{parse_complex, parse_ratfn};
pub use poly::{cluster_roots, Poly};
pub use ratfn::RationalFn;

use crate::Complex;

/// Formats a complex literal in the expression grammar, e.g. `(1.5-2i)`.
/// Uses the shortest round-trip representation of each component.
pub(crate) fn fmt_complex(c: Complex) -> String {
    if c.im == 0.0 {
        if c.re.is_sign_negative() {
            format!("({})", c.re)
        } else {
            format!("{}", c.re)
        }
    } else if c.im < 0.0 {
        format!("({}-{}i)", c.re, -c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}
