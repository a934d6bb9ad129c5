//! The Schwarzian derivative `{u;z} = u'''/u' − (3/2)(u''/u')²` and the six
//! canonical autonomous equations `{u;z}^p = R(u)` with their solutions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{random_mobius, stream_rng};
use crate::weierstrass::{EllipticInvariants, FamilyKind, SolutionFamily};
use crate::{c64, Complex, DerivativeJet, Mobius, Poly, RationalFn};

/// `{u;z}` from a derivative jet.
pub fn schwarzian_from_jet(j: &DerivativeJet) -> Result<Complex> {
    if j.u1.norm() <= 1e-300 {
        return Err(Error::CriticalPoint);
    }
    let r = j.u2 / j.u1;
    Ok(j.u3 / j.u1 - 1.5 * r * r)
}

fn stencil_derivatives<F>(f: &F, z: Complex, h: f64) -> Result<[Complex; 3]>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let (fm2, fm1, f0, fp1, fp2) = (
        f(z - 2.0 * h)?,
        f(z - h)?,
        f(z)?,
        f(z + h)?,
        f(z + 2.0 * h)?,
    );
    Ok([
        (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h),
        (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h),
        (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h),
    ])
}

fn schwarzian_of(d: [Complex; 3]) -> Result<Complex> {
    schwarzian_from_jet(&DerivativeJet::new(Complex::ZERO, d[0], d[1], d[2]))
}

/// `{f;z}` from central differences with one Richardson step.
///
/// Five-point stencils at `h` and `h/2` give `u'`, `u''` (error `O(h⁴)`) and
/// `u'''` (error `O(h²)`); these are extrapolated with weights 16/15 and 4/3.
/// If the Schwarzian computed from the extrapolated and the `h/2` derivatives
/// differ by more than `1e-3` relative, the step is reduced; after four
/// attempts the result is rejected.
pub fn schwarzian_numeric<F>(f: F, z: Complex) -> Result<Complex>
where
    F: Fn(Complex) -> Result<Complex>,
{
    let mut h = 2e-2;
    let mut last = f64::INFINITY;
    for _ in 0..4 {
        let coarse = stencil_derivatives(&f, z, h)?;
        let fine = stencil_derivatives(&f, z, h / 2.0)?;
        let extrap = [
            (16.0 * fine[0] - coarse[0]) / 15.0,
            (16.0 * fine[1] - coarse[1]) / 15.0,
            (4.0 * fine[2] - coarse[2]) / 3.0,
        ];
        let s = schwarzian_of(extrap)?;
        let s_fine = schwarzian_of(fine)?;
        last = (s - s_fine).norm() / (1.0 + s.norm());
        if last <= 1e-3 {
            return Ok(s);
        }
        h /= 4.0;
    }
    Err(Error::UnstableStencil(last))
}

/// `{u;z}^p = R(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzianEquation {
    p: u32,
    rhs: RationalFn,
}

impl SchwarzianEquation {
    pub fn new(p: u32, rhs: RationalFn) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("Schwarzian exponent must be positive".into()));
        }
        if rhs.is_zero() {
            return Err(Error::Config("right side must be nonzero".into()));
        }
        Ok(Self { p, rhs })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rhs(&self) -> &RationalFn {
        &self.rhs
    }

    /// `({u;z}^p − R(u)) / (1 + |R(u)|)` from a jet of `u`.
    pub fn residual(&self, jet: &DerivativeJet) -> Result<Complex> {
        let s = schwarzian_from_jet(jet)?;
        let r = self.rhs.eval(jet.u)?;
        Ok((s.powu(self.p) - r) / (1.0 + r.norm()))
    }
}

/// Free parameters of a canonical row. Rows 1–4 read `g2`, `g3`; rows 5 and
/// 6 read `a`; row 6 also reads the Möbius map `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowParams {
    pub g2: Complex,
    pub g3: Complex,
    pub a: Complex,
    pub m: Mobius,
}

impl RowParams {
    /// Suite defaults. Row 6's map is drawn from `seed`.
    pub fn defaults(index: usize, seed: u64) -> Self {
        let mut p = Self {
            g2: Complex::ZERO,
            g3: Complex::ZERO,
            a: Complex::ZERO,
            m: Mobius::identity(),
        };
        match index {
            1 => (p.g2, p.g3) = (c64(4.0, 0.0), c64(1.0, 0.0)),
            2 => p.g3 = c64(2.0, 0.0),
            3 => p.g2 = c64(5.0, 0.0),
            4 => p.g3 = c64(1.0, 0.0),
            5 => p.a = c64(2.0, 0.0),
            6 => {
                p.a = c64(1.3, 0.0);
                p.m = random_mobius(&mut stream_rng(seed, 1_000 + index as u64));
            }
            _ => {}
        }
        p
    }

    pub fn invariants(&self) -> EllipticInvariants {
        EllipticInvariants::new(self.g2, self.g3)
    }
}

/// Exponent `p` of each canonical row.
pub const ROW_EXPONENTS: [u32; 6] = [1, 3, 2, 3, 1, 1];

/// Solution kind of each canonical row.
pub const ROW_FAMILIES: [FamilyKind; 6] = [
    FamilyKind::Wp,
    FamilyKind::WpPrime,
    FamilyKind::Wp2,
    FamilyKind::Wp3,
    FamilyKind::AOverSinh,
    FamilyKind::MobiusExp,
];

fn poly(cs: &[Complex]) -> Poly {
    Poly::new(cs.to_vec())
}

/// Right side of canonical row `index` for the given parameters.
pub fn row_rhs(index: usize, p: &RowParams) -> Result<RationalFn> {
    let (g2, g3, a) = (p.g2, p.g3, p.a);
    let z = Complex::ZERO;
    let (num, den) = match index {
        1 => {
            let q = poly(&[g2, z, c64(4.0, 0.0)]);
            let num = &q.pow(2) + &poly(&[z, 32.0 * g3]);
            (
                num.scale(c64(-3.0 / 8.0, 0.0)),
                poly(&[-g3, -g2, z, c64(4.0, 0.0)]),
            )
        }
        2 => (
            poly(&[-3.0 * g3, z, c64(1.0, 0.0)])
                .pow(3)
                .scale(c64(-16.0, 0.0)),
            poly(&[g3, z, c64(1.0, 0.0)]).pow(2),
        ),
        3 => (
            poly(&[5.0 * g2 * g2, -24.0 * g2, c64(80.0, 0.0)])
                .pow(2)
                .scale(c64(9.0, 0.0)),
            &poly(&[z, c64(64.0, 0.0)]) * &poly(&[-g2, c64(4.0, 0.0)]).pow(2),
        ),
        4 => (
            poly(&[2.0 * g3 * g3, -10.0 * g3, c64(35.0, 0.0)])
                .pow(3)
                .scale(c64(-8.0, 0.0)),
            &poly(&[z, z, c64(1.0, 0.0)]) * &poly(&[-g3, c64(4.0, 0.0)]).pow(3),
        ),
        5 => (
            poly(&[-a * a, z, c64(2.0, 0.0)]).scale(a * a),
            poly(&[2.0 * a * a, z, c64(2.0, 0.0)]),
        ),
        6 => (Poly::constant(-a * a / 2.0), Poly::one()),
        _ => return Err(Error::Config(format!("row index {index} outside 1..=6"))),
    };
    RationalFn::reduced(num, den)
}

/// A canonical equation paired with its solution family.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalRow {
    pub index: usize,
    pub eq: SchwarzianEquation,
    pub family: SolutionFamily,
    pub params: RowParams,
}

impl CanonicalRow {
    pub fn new(index: usize, params: RowParams) -> Result<Self> {
        let eq = SchwarzianEquation::new(
            *ROW_EXPONENTS
                .get(index.wrapping_sub(1))
                .ok_or_else(|| Error::Config(format!("row index {index} outside 1..=6")))?,
            row_rhs(index, &params)?,
        )?;
        let family = match ROW_FAMILIES[index - 1] {
            FamilyKind::AOverSinh => SolutionFamily::a_over_sinh(params.a)?,
            FamilyKind::MobiusExp => SolutionFamily::mobius_exp(params.a, params.m)?,
            kind => SolutionFamily::elliptic(kind, params.invariants())?,
        };
        Ok(Self {
            index,
            eq,
            family,
            params,
        })
    }

    pub fn with_defaults(index: usize, seed: u64) -> Result<Self> {
        Self::new(index, RowParams::defaults(index, seed))
    }

    /// Normalized residual of the row's equation for its own solution.
    pub fn residual(&self, z: Complex) -> Result<Complex> {
        self.eq.residual(&self.family.jet(z)?)
    }

    /// Whether the elliptic invariants are degenerate (rows 1–4 only).
    pub fn is_degenerate(&self) -> bool {
        self.family.kind().is_elliptic() && self.params.invariants().is_degenerate()
    }
}

/// `|{m∘u; z} − {u; z}| / (1 + |{u; z}|)` for the row's solution `u`.
pub fn mobius_conjugate_check(row: &CanonicalRow, m: &Mobius, z: Complex) -> Result<f64> {
    let jet = row.family.jet(z)?;
    let s = schwarzian_from_jet(&jet)?;
    let sm = schwarzian_from_jet(&jet.through_mobius(m)?)?;
    Ok((sm - s).norm() / (1.0 + s.norm()))
}

/// Zero and pole multiplicities on the Riemann sphere of a right side
/// `c ∏(u − σ)^m / ∏(u − τ)^n` from the first canonical list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactoredShape {
    pub p: u32,
    pub zeros: &'static [usize],
    pub poles: &'static [usize],
}

pub const FIRST_CANONICAL_SHAPES: [FactoredShape; 5] = [
    FactoredShape {
        p: 1,
        zeros: &[1, 1, 1, 1],
        poles: &[1, 1, 1, 1],
    },
    FactoredShape {
        p: 3,
        zeros: &[3, 3],
        poles: &[2, 2, 2],
    },
    FactoredShape {
        p: 2,
        zeros: &[2, 2],
        poles: &[2, 1, 1],
    },
    FactoredShape {
        p: 3,
        zeros: &[3, 3],
        poles: &[3, 2, 1],
    },
    FactoredShape {
        p: 1,
        zeros: &[1, 1],
        poles: &[1, 1],
    },
];

impl FactoredShape {
    /// True when `eq` has this exponent and multiplicity pattern.
    pub fn matches(&self, eq: &SchwarzianEquation) -> bool {
        let (z, p) = eq.rhs().multiplicity_signature();
        eq.p() == self.p && z == self.zeros && p == self.poles
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::sample_family;
    use proptest::prelude::*;

    fn re(x: f64) -> Complex {
        c64(x, 0.0)
    }

    #[test]
    fn jet_examples() {
        let e2z = DerivativeJet::new(re(1.0), re(2.0), re(4.0), re(8.0));
        assert_eq!(schwarzian_from_jet(&e2z).unwrap(), re(-2.0));
        let zm2 = DerivativeJet::new(re(1.0), re(-2.0), re(6.0), re(-24.0));
        assert_eq!(schwarzian_from_jet(&zm2).unwrap(), re(-1.5));
        let crit = DerivativeJet::new(re(1.0), Complex::ZERO, re(1.0), re(1.0));
        assert!(matches!(
            schwarzian_from_jet(&crit),
            Err(Error::CriticalPoint)
        ));
    }

    #[test]
    fn power_function_closed_form() {
        // {z^q; z} = (1 − q²)/(2z²)
        for q in [-6i32, -3, -2, 2, 3, 5] {
            let z = c64(0.8, 0.3);
            let qf = q as f64;
            let jet = DerivativeJet::new(
                z.powi(q),
                qf * z.powi(q - 1),
                qf * (qf - 1.0) * z.powi(q - 2),
                qf * (qf - 1.0) * (qf - 2.0) * z.powi(q - 3),
            );
            let s = schwarzian_from_jet(&jet).unwrap();
            let expect = (1.0 - qf * qf) / (2.0 * z * z);
            assert!((s - expect).norm() < 1e-12 * expect.norm());
        }
    }

    #[test]
    fn numeric_examples() {
        let s = schwarzian_numeric(|z| Ok((2.0 * z).exp()), re(0.3)).unwrap();
        assert!((s - re(-2.0)).norm() < 1e-6);

        let m = Mobius::new(c64(0.3, 1.0), re(-0.5), c64(0.2, -0.4), re(1.0)).unwrap();
        let s = schwarzian_numeric(|z| Ok(m.apply(z)), c64(0.4, 0.7)).unwrap();
        assert!(s.norm() < 1e-6);

        let fam = SolutionFamily::wp(EllipticInvariants::real(4.0, 1.0));
        for z in [c64(0.4, 0.3), c64(-0.6, 0.2), c64(0.1, -0.5)] {
            let num = schwarzian_numeric(|x| fam.value(x), z).unwrap();
            let exact = schwarzian_from_jet(&fam.jet(z).unwrap()).unwrap();
            assert!((num - exact).norm() <= 1e-5 * (1.0 + exact.norm()));
        }
    }

    #[test]
    fn numeric_rejects_noise() {
        let f = |z: Complex| Ok(z * z * z + 1e-4 * (1e7 * z.re).sin());
        assert!(matches!(
            schwarzian_numeric(f, re(0.3)),
            Err(Error::UnstableStencil(_))
        ));
    }

    #[test]
    fn residual_examples() {
        let row6 = CanonicalRow::with_defaults(6, 42).unwrap();
        assert!(row6.residual(c64(0.2, 0.1)).unwrap().norm() < 1e-8);

        // degenerate invariants still satisfy the row (trigonometric ℘)
        let mut p = RowParams::defaults(1, 0);
        (p.g2, p.g3) = (re(3.0), re(1.0));
        let row1 = CanonicalRow::new(1, p).unwrap();
        assert!(row1.is_degenerate());
        assert!(row1.residual(c64(0.7, 0.2)).unwrap().norm() < 1e-8);

        let row5 = CanonicalRow::with_defaults(5, 0).unwrap();
        assert!(row5.residual(re(0.4)).unwrap().norm() < 1e-8);
    }

    #[test]
    fn row_five_needs_the_half() {
        let a = re(2.0);
        let u = RationalFn::var();
        let wrong = u
            .pow(2)
            .mul(&RationalFn::constant(2.0 * a * a))
            .unwrap()
            .sub(&RationalFn::constant(a.powu(4)))
            .unwrap()
            .div(&u.pow(2).add(&RationalFn::constant(a * a)).unwrap())
            .unwrap();
        let row5 = CanonicalRow::with_defaults(5, 0).unwrap();
        let jet = row5.family.jet(re(0.4)).unwrap();
        let bad = SchwarzianEquation::new(1, wrong)
            .unwrap()
            .residual(&jet)
            .unwrap();
        assert!(bad.norm() > 1e-1);
    }

    #[test]
    fn all_rows_certify_at_default_samples() {
        for index in 1..=6 {
            let row = CanonicalRow::with_defaults(index, 42).unwrap();
            let pts = sample_family(&row.family, 32, 42, index as u64).unwrap();
            for s in pts {
                let r = row.eq.residual(&s.jet).unwrap().norm();
                assert!(r < 1e-8, "row {index} residual {r:e} at {}", s.z);
            }
        }
    }

    #[test]
    fn complex_exponent_parameter() {
        for index in [5, 6] {
            let mut p = RowParams::defaults(index, 7);
            p.a = c64(1.0, 0.3);
            let row = CanonicalRow::new(index, p).unwrap();
            for s in sample_family(&row.family, 16, 7, index as u64).unwrap() {
                assert!(row.eq.residual(&s.jet).unwrap().norm() < 1e-8);
            }
        }
    }

    #[test]
    fn jets_agree_with_numeric_schwarzian() {
        for index in 1..=6 {
            let row = CanonicalRow::with_defaults(index, 42).unwrap();
            for s in sample_family(&row.family, 4, 3, index as u64).unwrap() {
                let exact = schwarzian_from_jet(&s.jet).unwrap();
                let Ok(num) = schwarzian_numeric(|x| row.family.value(x), s.z) else {
                    continue;
                };
                assert!(
                    (num - exact).norm() <= 1e-5 * (1.0 + exact.norm()),
                    "row {index} at {}: {num} vs {exact}",
                    s.z
                );
            }
        }
    }

    #[test]
    fn conjugation_examples() {
        let row1 = CanonicalRow::with_defaults(1, 0).unwrap();
        let z = c64(0.5, 0.25);
        assert_eq!(
            mobius_conjugate_check(&row1, &Mobius::identity(), z).unwrap(),
            0.0
        );
        let inv = Mobius::from_real(1.0, 1.0, 1.0, -1.0).unwrap();
        assert!(mobius_conjugate_check(&row1, &inv, z).unwrap() < 1e-8);
        let row5 = CanonicalRow::with_defaults(5, 0).unwrap();
        let dbl = Mobius::scaling(re(2.0)).unwrap();
        assert!(mobius_conjugate_check(&row5, &dbl, c64(0.3, 0.2)).unwrap() < 1e-8);
    }

    #[test]
    fn rows_have_first_list_shapes() {
        for (index, shape) in (1..=5).zip(FIRST_CANONICAL_SHAPES) {
            let row = CanonicalRow::with_defaults(index, 0).unwrap();
            assert!(
                shape.matches(&row.eq),
                "row {index}: {:?}",
                row.eq.rhs().multiplicity_signature()
            );
        }
    }

    #[test]
    fn row_index_is_checked() {
        assert!(matches!(
            CanonicalRow::with_defaults(0, 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            CanonicalRow::with_defaults(7, 0),
            Err(Error::Config(_))
        ));
    }

    fn arb_complex(r: f64) -> impl Strategy<Value = Complex> {
        (-r..r, -r..r).prop_map(|(x, y)| c64(x, y))
    }

    fn poly_jet(p: &Poly, z: Complex) -> [Complex; 4] {
        let d1 = p.derivative();
        let d2 = d1.derivative();
        [p.eval(z), d1.eval(z), d2.eval(z), d2.derivative().eval(z)]
    }

    proptest! {
        #[test]
        fn chain_rule(
            fc in prop::collection::vec(arb_complex(1.0), 2..=5),
            gc in prop::collection::vec(arb_complex(1.0), 2..=5),
            z in arb_complex(1.0),
        ) {
            let (f, g) = (Poly::new(fc), Poly::new(gc));
            let gj = poly_jet(&g, z);
            let fj = poly_jet(&f, gj[0]);
            prop_assume!(gj[1].norm() > 0.1 && fj[1].norm() > 0.1);
            let g_jet = DerivativeJet::new(gj[0], gj[1], gj[2], gj[3]);
            let f_jet = DerivativeJet::new(fj[0], fj[1], fj[2], fj[3]);
            let fg = DerivativeJet::compose(fj, &g_jet);
            let lhs = schwarzian_from_jet(&fg).unwrap();
            let sf = schwarzian_from_jet(&f_jet).unwrap();
            let sg = schwarzian_from_jet(&g_jet).unwrap();
            let rhs = sf * gj[1] * gj[1] + sg;
            let scale = 1.0 + (sf * gj[1] * gj[1]).norm() + sg.norm();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * scale);
        }

        #[test]
        fn mobius_is_annihilated(
            e in prop::collection::vec(arb_complex(1.0), 4),
            z in arb_complex(2.0),
        ) {
            let Ok(m) = Mobius::new(e[0], e[1], e[2], e[3]) else { return Ok(()); };
            let [a, b, c, d] = m.entries();
            prop_assume!((c * z + d).norm() > 0.3 && (a * d - b * c).norm() > 0.05);
            let [d1, d2, d3] = m.derivatives(z);
            let s = schwarzian_from_jet(&DerivativeJet::new(m.apply(z), d1, d2, d3)).unwrap();
            prop_assert!(s.norm() < 1e-12, "{}", s);
        }
    }
}
