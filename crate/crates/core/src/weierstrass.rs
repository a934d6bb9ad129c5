//! Weierstrass `℘` by Laurent recursion plus duplication, and derivative jets
//! of the canonical solution families.
//!
//! Everything is parameterized by the invariants `(g₂, g₃)`; no lattice is
//! ever computed. To evaluate at `z`, the argument is halved until it lies in
//! a disc of radius `r₀ = 0.5·min(1, |g₂|^(-1/4), |g₃|^(-1/6))` where the
//! truncated Laurent series is accurate, then the duplication formula
//! `℘(2z) = (℘''/(2℘'))² − 2℘` is applied once per halving.
//!
//! Near a pole that form subtracts two nearly equal terms and loses about a
//! digit per step, so it is evaluated as the equivalent rational function
//!
//! ```text
//! ℘(2z)  = ((℘² + g₂/4)² + 2g₃℘) / (4℘³ − g₂℘ − g₃)
//! ℘'(2z) = ℘'·M(℘) / (2(4℘³ − g₂℘ − g₃)²)
//! M(x)   = 4x⁶ − 5g₂x⁴ − 20g₃x³ − (5/4)g₂²x² − g₂g₃x − 2g₃² + g₂³/16
//! ```
//!
//! where the second line is the derivative of the first.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::{Complex, DerivativeJet, LaurentSeries, Mobius};

/// Number of Laurent coefficients used by the evaluator.
pub const EVAL_TERMS: usize = 24;
/// Magnitude above which a value is reported as a pole.
pub const POLE_THRESHOLD: f64 = 1e8;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticInvariants {
    #[serde(with = "crate::report::complex_pair")]
    pub g2: Complex,
    #[serde(with = "crate::report::complex_pair")]
    pub g3: Complex,
}

impl EllipticInvariants {
    pub fn new(g2: Complex, g3: Complex) -> Self {
        Self { g2, g3 }
    }

    pub fn real(g2: f64, g3: f64) -> Self {
        Self::new(g2.into(), g3.into())
    }

    /// `g₂³ − 27 g₃²`.
    pub fn discriminant(&self) -> Complex {
        self.g2.powu(3) - 27.0 * self.g3 * self.g3
    }

    /// True when the cubic `4t³ − g₂t − g₃` has a repeated root.
    pub fn is_degenerate(&self) -> bool {
        let scale = self.g2.norm().powi(3) + 27.0 * self.g3.norm_sqr();
        self.discriminant().norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE)
    }

    /// Homogeneity length scale `min(|g₂|^(-1/4), |g₃|^(-1/6))` (1 when both
    /// vanish); the lattice of `℘(·; g₂, g₃)` scales with it.
    pub fn length_scale(&self) -> f64 {
        let mut s = f64::INFINITY;
        if self.g2.norm() > 0.0 {
            s = s.min(self.g2.norm().powf(-0.25));
        }
        if self.g3.norm() > 0.0 {
            s = s.min(self.g3.norm().powf(-1.0 / 6.0));
        }
        if s.is_finite() {
            s
        } else {
            1.0
        }
    }
}

/// Coefficients `c_k` of `℘ = z⁻² + Σ_{k≥2} c_k z^(2k−2)` for `k = 2..=nterms`
/// (index `k` of the returned vector; entries 0 and 1 are unused).
pub fn wp_coefficients(inv: &EllipticInvariants, nterms: usize) -> Vec<Complex> {
    let mut c = vec![Complex::ZERO; nterms.max(3) + 1];
    c[1] = Complex::ONE;
    c[2] = inv.g2 / 20.0;
    c[3] = inv.g3 / 28.0;
    for k in 4..=nterms {
        let s: Complex = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
        c[k] = s * (3.0 / ((2 * k + 1) as f64 * (k as f64 - 3.0)));
    }
    c.truncate(nterms + 1);
    c
}

/// Truncated Laurent expansion of `℘` at the origin through the term
/// `c_nterms z^(2·nterms−2)`; the truncation order is `2·nterms`.
pub fn wp_series(inv: &EllipticInvariants, nterms: usize) -> LaurentSeries {
    assert!(nterms >= 2, "wp_series needs at least two terms");
    let c = wp_coefficients(inv, nterms);
    let mut coeffs = vec![Complex::ZERO; 2 * nterms + 2];
    coeffs[0] = Complex::ONE;
    for (k, &ck) in c.iter().enumerate().skip(2) {
        coeffs[2 * k] = ck;
    }
    LaurentSeries::new(-2, coeffs)
}

/// Evaluator for `℘(·; g₂, g₃)` and `℘'` with cached series coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct WeierstrassP {
    inv: EllipticInvariants,
    coeffs: Vec<Complex>,
    r0: f64,
}

impl WeierstrassP {
    pub fn new(inv: EllipticInvariants) -> Self {
        Self {
            inv,
            coeffs: wp_coefficients(&inv, EVAL_TERMS),
            r0: 0.5 * inv.length_scale().min(1.0),
        }
    }

    pub fn invariants(&self) -> &EllipticInvariants {
        &self.inv
    }

    /// Radius of the disc on which the series is summed directly.
    pub fn reduction_radius(&self) -> f64 {
        self.r0
    }

    /// `(℘, ℘')` by direct series summation, without argument reduction.
    pub fn eval_series(&self, z: Complex) -> (Complex, Complex) {
        let w = z * z;
        let (mut p, mut dp) = (Complex::ZERO, Complex::ZERO);
        for k in (2..self.coeffs.len()).rev() {
            p = p * w + self.coeffs[k];
            dp = dp * w + self.coeffs[k] * (2 * k - 2) as f64;
        }
        // p = Σ c_k w^(k-2), dp = Σ (2k-2) c_k w^(k-2)
        (w.inv() + p * w, -2.0 / (w * z) + dp * z)
    }

    /// One duplication step: `(℘(z), ℘'(z)) ↦ (℘(2z), ℘'(2z))`.
    pub fn duplicate(&self, p: Complex, dp: Complex) -> (Complex, Complex) {
        let EllipticInvariants { g2, g3 } = self.inv;
        let p2 = p * p;
        let s = p2 + g2 / 4.0;
        let num = s * s + 2.0 * g3 * p;
        let cubic = (4.0 * p2 - g2) * p - g3;
        let m = ((4.0 * p2 - 5.0 * g2) * p2 - 20.0 * g3 * p - 1.25 * g2 * g2) * p2
            - g2 * g3 * p
            - 2.0 * g3 * g3
            + g2 * g2 * g2 / 16.0;
        (num / cubic, dp * m / (2.0 * cubic * cubic))
    }

    /// `(℘(z), ℘'(z))`.
    pub fn eval(&self, z: Complex) -> Result<(Complex, Complex)> {
        if !z.is_finite() || z == Complex::ZERO {
            return Err(Error::PoleProximity(z));
        }
        let mut t = z;
        let mut halvings = 0;
        while t.norm() > self.r0 {
            if halvings == MAX_HALVINGS {
                return Err(Error::ReductionDepthExceeded(MAX_HALVINGS));
            }
            t /= 2.0;
            halvings += 1;
        }
        let (mut p, mut dp) = self.eval_series(t);
        for _ in 0..halvings {
            (p, dp) = self.duplicate(p, dp);
        }
        if !p.is_finite() || !dp.is_finite() || p.norm() > POLE_THRESHOLD {
            return Err(Error::PoleProximity(z));
        }
        Ok((p, dp))
    }

    pub fn wp(&self, z: Complex) -> Result<Complex> {
        self.eval(z).map(|(p, _)| p)
    }

    pub fn wp_prime(&self, z: Complex) -> Result<Complex> {
        self.eval(z).map(|(_, dp)| dp)
    }

    /// `(℘, ℘', ℘'', ℘''')` using `℘'' = 6℘² − g₂/2`, `℘''' = 12℘℘'`.
    pub fn jet(&self, z: Complex) -> Result<DerivativeJet> {
        let (p, dp) = self.eval(z)?;
        Ok(DerivativeJet::new(
            p,
            dp,
            6.0 * p * p - self.inv.g2 / 2.0,
            12.0 * p * dp,
        ))
    }

    /// Relative residual of `℘'² = 4℘³ − g₂℘ − g₃` at `z`.
    pub fn ode_residual(&self, z: Complex) -> Result<f64> {
        let (p, dp) = self.eval(z)?;
        let rhs = 4.0 * p * p * p - self.inv.g2 * p - self.inv.g3;
        Ok((dp * dp - rhs).norm() / (1.0 + p.norm().powi(3)))
    }
}

pub fn wp_eval(z: Complex, inv: &EllipticInvariants) -> Result<Complex> {
    WeierstrassP::new(*inv).wp(z)
}

pub fn wp_prime_eval(z: Complex, inv: &EllipticInvariants) -> Result<Complex> {
    WeierstrassP::new(*inv).wp_prime(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Wp,
    WpPrime,
    Wp2,
    Wp3,
    AOverSinh,
    MobiusExp,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Wp => "wp",
            FamilyKind::WpPrime => "wpprime",
            FamilyKind::Wp2 => "wp2",
            FamilyKind::Wp3 => "wp3",
            FamilyKind::AOverSinh => "a_over_sinh",
            FamilyKind::MobiusExp => "mobius_exp",
        }
    }

    pub fn is_elliptic(self) -> bool {
        matches!(
            self,
            FamilyKind::Wp | FamilyKind::WpPrime | FamilyKind::Wp2 | FamilyKind::Wp3
        )
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "wp" => FamilyKind::Wp,
            "wpprime" | "wp_prime" => FamilyKind::WpPrime,
            "wp2" => FamilyKind::Wp2,
            "wp3" => FamilyKind::Wp3,
            "a_over_sinh" => FamilyKind::AOverSinh,
            "mobius_exp" => FamilyKind::MobiusExp,
            _ => return Err(Error::InvalidFamily("unknown family name")),
        })
    }
}

/// A canonical solution `front ∘ base(z − z₀)`, where `base` is one of
/// `℘, ℘', ℘², ℘³, a/sinh(az), e^(az)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFamily {
    kind: FamilyKind,
    wp: WeierstrassP,
    a: Complex,
    front: Mobius,
    z0: Complex,
}

impl SolutionFamily {
    fn build(kind: FamilyKind, inv: EllipticInvariants, a: Complex) -> Self {
        Self {
            kind,
            wp: WeierstrassP::new(inv),
            a,
            front: Mobius::identity(),
            z0: Complex::ZERO,
        }
    }

    pub fn elliptic(kind: FamilyKind, inv: EllipticInvariants) -> Result<Self> {
        match kind {
            FamilyKind::Wp => {}
            FamilyKind::WpPrime | FamilyKind::Wp3 if inv.g2 != Complex::ZERO => {
                return Err(Error::InvalidFamily("℘' and ℘³ families need g2 = 0"))
            }
            FamilyKind::Wp2 if inv.g3 != Complex::ZERO => {
                return Err(Error::InvalidFamily("℘² family needs g3 = 0"))
            }
            FamilyKind::WpPrime | FamilyKind::Wp2 | FamilyKind::Wp3 => {}
            _ => return Err(Error::InvalidFamily("not an elliptic family")),
        }
        Ok(Self::build(kind, inv, Complex::ZERO))
    }

    pub fn wp(inv: EllipticInvariants) -> Self {
        Self::build(FamilyKind::Wp, inv, Complex::ZERO)
    }

    pub fn a_over_sinh(a: Complex) -> Result<Self> {
        if a == Complex::ZERO {
            return Err(Error::InvalidFamily("a must be nonzero"));
        }
        Ok(Self::build(
            FamilyKind::AOverSinh,
            EllipticInvariants::real(0.0, 0.0),
            a,
        ))
    }

    /// `(c₁e^(az) + c₂)/(c₃e^(az) + c₄)` with `m = (c₁, c₂, c₃, c₄)`.
    pub fn mobius_exp(a: Complex, m: Mobius) -> Result<Self> {
        if a == Complex::ZERO {
            return Err(Error::InvalidFamily("a must be nonzero"));
        }
        let mut f = Self::build(FamilyKind::MobiusExp, EllipticInvariants::real(0.0, 0.0), a);
        f.front = m;
        Ok(f)
    }

    /// Post-composes with a homography.
    pub fn with_front(mut self, m: Mobius) -> Result<Self> {
        self.front = m.compose(&self.front)?;
        Ok(self)
    }

    /// Translates: the new family evaluates the old one at `z − z0`.
    pub fn shifted(mut self, z0: Complex) -> Self {
        self.z0 += z0;
        self
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn invariants(&self) -> &EllipticInvariants {
        self.wp.invariants()
    }

    pub fn a(&self) -> Complex {
        self.a
    }

    pub fn front(&self) -> &Mobius {
        &self.front
    }

    pub fn z0(&self) -> Complex {
        self.z0
    }

    /// Natural length scale used for sampling.
    pub fn length_scale(&self) -> f64 {
        if self.kind.is_elliptic() {
            self.invariants().length_scale()
        } else {
            1.0 / self.a.norm()
        }
    }

    fn base_jet(&self, t: Complex) -> Result<DerivativeJet> {
        let a = self.a;
        let jet = match self.kind {
            FamilyKind::Wp => self.wp.jet(t)?,
            FamilyKind::WpPrime => {
                let (p, dp) = self.wp.eval(t)?;
                let EllipticInvariants { g2, g3 } = *self.invariants();
                DerivativeJet::new(
                    dp,
                    6.0 * p * p - g2 / 2.0,
                    12.0 * p * dp,
                    120.0 * p * p * p - 18.0 * g2 * p - 12.0 * g3,
                )
            }
            FamilyKind::Wp2 => self.wp.jet(t)?.powi(2),
            FamilyKind::Wp3 => self.wp.jet(t)?.powi(3),
            FamilyKind::AOverSinh => {
                let s = (a * t).sinh();
                let c = (a * t).cosh();
                if (a / s).norm() > POLE_THRESHOLD || !s.is_finite() {
                    return Err(Error::PoleProximity(t + self.z0));
                }
                let (a2, a3) = (a * a, a * a * a);
                DerivativeJet::new(
                    a / s,
                    -a2 * c / (s * s),
                    a3 * (2.0 / (s * s * s) + 1.0 / s),
                    -a3 * a * c * (6.0 / s.powi(4) + 1.0 / (s * s)),
                )
            }
            FamilyKind::MobiusExp => {
                let e = (a * t).exp();
                if !e.is_finite() {
                    return Err(Error::PoleProximity(t + self.z0));
                }
                DerivativeJet::new(e, a * e, a * a * e, a * a * a * e)
            }
        };
        Ok(jet)
    }

    /// `(u, u', u'', u''')` at `z`.
    pub fn jet(&self, z: Complex) -> Result<DerivativeJet> {
        let jet = self.base_jet(z - self.z0)?.through_mobius(&self.front)?;
        if !jet.is_finite() || jet.u.norm() > POLE_THRESHOLD {
            return Err(Error::PoleProximity(z));
        }
        Ok(jet)
    }

    /// `u(z)` alone.
    pub fn value(&self, z: Complex) -> Result<Complex> {
        let t = z - self.z0;
        let base = match self.kind {
            FamilyKind::Wp => self.wp.wp(t)?,
            FamilyKind::WpPrime => self.wp.wp_prime(t)?,
            FamilyKind::Wp2 => self.wp.wp(t)?.powu(2),
            FamilyKind::Wp3 => self.wp.wp(t)?.powu(3),
            FamilyKind::AOverSinh => self.a / (self.a * t).sinh(),
            FamilyKind::MobiusExp => (self.a * t).exp(),
        };
        let u = self.front.apply(base);
        if !u.is_finite() || u.norm() > POLE_THRESHOLD {
            return Err(Error::PoleProximity(z));
        }
        Ok(u)
    }

    /// Laurent expansion of the elliptic families about the pole of the base
    /// function at `z = z₀`, in the local variable `z − z₀`.
    pub fn laurent_series(&self, wp_terms: usize) -> Result<LaurentSeries> {
        let p = wp_series(self.invariants(), wp_terms);
        let base = match self.kind {
            FamilyKind::Wp => p,
            FamilyKind::WpPrime => p.differentiate(),
            FamilyKind::Wp2 => p.pow(2)?,
            FamilyKind::Wp3 => p.pow(3)?,
            _ => return Err(Error::InvalidFamily("no Laurent expansion for this family")),
        };
        if self.front.is_identity() {
            Ok(base)
        } else {
            base.compose_rational(&self.front.to_ratfn())
        }
    }
}
