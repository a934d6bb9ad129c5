use crate::error::{Error, Result};
use crate::{Complex, Poly, RationalFn};

/// Homographic map `u ↦ (a·u + b)/(c·u + d)`.
///
/// Stored in canonical form: the entry of largest magnitude equals 1 (first
/// of `a, b, c, d` on ties), and `|ad - bc| > 1e-12` in that normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    a: Complex,
    b: Complex,
    c: Complex,
    d: Complex,
}

const DET_FLOOR: f64 = 1e-12;

impl Mobius {
    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<Self> {
        let entries = [a, b, c, d];
        let (mut pivot, mut best) = (Complex::ZERO, 0.0);
        for e in entries {
            if e.norm() > best {
                best = e.norm();
                pivot = e;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::DegenerateMobius(0.0));
        }
        let inv = pivot.inv();
        let m = Self {
            a: a * inv,
            b: b * inv,
            c: c * inv,
            d: d * inv,
        };
        let det = m.det().norm();
        if det <= DET_FLOOR {
            return Err(Error::DegenerateMobius(det));
        }
        Ok(m)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self {
            a: Complex::ONE,
            b: Complex::ZERO,
            c: Complex::ZERO,
            d: Complex::ONE,
        }
    }

    /// `u ↦ scale · u`.
    pub fn scaling(scale: Complex) -> Result<Self> {
        Self::new(scale, Complex::ZERO, Complex::ZERO, Complex::ONE)
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Image of `u`; a pole of the map yields a non-finite value.
    pub fn apply(&self, u: Complex) -> Complex {
        (self.a * u + self.b) / (self.c * u + self.d)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Mobius) -> Result<Self> {
        let (a1, b1, c1, d1) = (self.a, self.b, self.c, self.d);
        let (a2, b2, c2, d2) = (inner.a, inner.b, inner.c, inner.d);
        Self::new(
            a1 * a2 + b1 * c2,
            a1 * b2 + b1 * d2,
            c1 * a2 + d1 * c2,
            c1 * b2 + d1 * d2,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.d, -self.b, -self.c, self.a).expect("inverse of a nondegenerate map")
    }

    /// First three derivatives of the map at `u`.
    pub fn derivatives(&self, u: Complex) -> [Complex; 3] {
        let den = self.c * u + self.d;
        let det = self.det();
        let d1 = det / (den * den);
        let d2 = -2.0 * self.c * d1 / den;
        let d3 = -3.0 * self.c * d2 / den;
        [d1, d2, d3]
    }

    /// The map as a degree-(1,1) rational function of `u`.
    pub fn to_ratfn(&self) -> RationalFn {
        RationalFn::new(
            Poly::new(vec![self.b, self.a]),
            Poly::new(vec![self.d, self.c]),
        )
        .expect("nondegenerate Möbius map is gcd-free")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use proptest::prelude::*;

    #[test]
    fn identity_fixes_points() {
        let u = c64(5.0, 2.0);
        assert_eq!(Mobius::identity().apply(u), u);
    }

    #[test]
    fn cayley_like_map_is_an_involution() {
        let m = Mobius::from_real(1.0, 1.0, 1.0, -1.0).unwrap();
        let mm = m.compose(&m).unwrap();
        assert!((mm.apply(c64(3.0, 0.0)) - c64(3.0, 0.0)).norm() < 1e-14);
        assert!(mm.is_identity() || mm.entries()[1].norm() < 1e-15);
    }

    #[test]
    fn inverse_of_affine_map() {
        let m = Mobius::from_real(2.0, 3.0, 0.0, 1.0).unwrap();
        assert!((m.inverse().apply(c64(7.0, 0.0)) - c64(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn normalization_and_degeneracy() {
        let m = Mobius::from_real(2.0, 4.0, 1.0, 3.0).unwrap();
        assert_eq!(m.entries()[1], Complex::ONE);
        assert!(matches!(
            Mobius::from_real(1.0, 2.0, 2.0, 4.0),
            Err(Error::DegenerateMobius(_))
        ));
        assert!(Mobius::from_real(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = Mobius::new(c64(1.0, 0.5), c64(-2.0, 0.0), c64(0.3, 0.1), c64(1.0, -1.0)).unwrap();
        let u = c64(0.4, 0.2);
        let h = 1e-4;
        let fd1 = (m.apply(u + h) - m.apply(u - h)) / (2.0 * h);
        let d = m.derivatives(u);
        assert!((fd1 - d[0]).norm() < 1e-7);
        let fd2 = (m.apply(u + h) - 2.0 * m.apply(u) + m.apply(u - h)) / (h * h);
        assert!((fd2 - d[1]).norm() < 1e-5);
    }

    pub(crate) fn arb_mobius() -> impl Strategy<Value = Mobius> {
        prop::array::uniform8(-2.0f64..2.0).prop_filter_map("nondegenerate", |v| {
            let m = Mobius::new(
                c64(v[0], v[1]),
                c64(v[2], v[3]),
                c64(v[4], v[5]),
                c64(v[6], v[7]),
            )
            .ok()?;
            (m.det().norm() > 1e-3).then_some(m)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn inverse_round_trip(m in arb_mobius(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let u = c64(re, im);
            let w = m.apply(u);
            prop_assume!(w.norm() < 1e6);
            let back = m.inverse().apply(w);
            prop_assert!((back - u).norm() < 1e-10 * (1.0 + u.norm()) * (1.0 + w.norm()));
        }

        #[test]
        fn composition_is_pointwise(m1 in arb_mobius(), m2 in arb_mobius(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let u = c64(re, im);
            let inner = m2.apply(u);
            let outer = m1.apply(inner);
            prop_assume!(inner.norm() < 1e4 && outer.norm() < 1e4);
            let composed = m1.compose(&m2).unwrap().apply(u);
            prop_assert!((composed - outer).norm() < 1e-9 * (1.0 + outer.norm()));
        }
    }
}
