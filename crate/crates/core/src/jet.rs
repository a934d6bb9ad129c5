use crate::error::{Error, Result};
use crate::{Complex, Mobius};

/// Value and first three derivatives of a function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeJet {
    pub u: Complex,
    pub u1: Complex,
    pub u2: Complex,
    pub u3: Complex,
}

impl DerivativeJet {
    pub fn new(u: Complex, u1: Complex, u2: Complex, u3: Complex) -> Self {
        Self { u, u1, u2, u3 }
    }

    /// Jet of `f ∘ g` from `outer = (f(g), f'(g), f''(g), f'''(g))` and the
    /// jet of `g` (Faà di Bruno to third order).
    pub fn compose(outer: [Complex; 4], inner: &DerivativeJet) -> Self {
        let [f0, f1, f2, f3] = outer;
        let (g1, g2, g3) = (inner.u1, inner.u2, inner.u3);
        Self {
            u: f0,
            u1: f1 * g1,
            u2: f2 * g1 * g1 + f1 * g2,
            u3: f3 * g1 * g1 * g1 + 3.0 * f2 * g1 * g2 + f1 * g3,
        }
    }

    /// Jet of `m ∘ u`. Fails near a pole of the composite.
    pub fn through_mobius(&self, m: &Mobius) -> Result<Self> {
        if m.is_identity() {
            return Ok(*self);
        }
        let [a, b, c, d] = m.entries();
        let den = c * self.u + d;
        if den.norm() <= 1e-12 * (a * self.u + b).norm().max(1.0) {
            return Err(Error::PoleProximity(self.u));
        }
        let [d1, d2, d3] = m.derivatives(self.u);
        Ok(Self::compose([m.apply(self.u), d1, d2, d3], self))
    }

    /// Jet of `u^n`.
    pub fn powi(&self, n: i32) -> Self {
        let nf = n as f64;
        let u = self.u;
        let outer = [
            u.powi(n),
            nf * u.powi(n - 1),
            nf * (nf - 1.0) * u.powi(n - 2),
            nf * (nf - 1.0) * (nf - 2.0) * u.powi(n - 3),
        ];
        Self::compose(outer, self)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.u1.is_finite() && self.u2.is_finite() && self.u3.is_finite()
    }
}
