use std::fmt;

use super::{fmt_complex, Mobius, Poly};
use crate::error::{Error, Result};
use crate::Complex;

/// `scale · num(u) / den(u)` with `num` and `den` monic and without common
/// roots. The zero function is `scale = 0` over `1/1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
    scale: Complex,
}

/// Shared-root tolerance for the gcd check, relative to `1 + |root|`.
const COMMON_ROOT_TOL: f64 = 1e-10;
/// Computed roots closer than this (relative) are treated as one multiple root.
const CLUSTER_TOL: f64 = 1e-4;
/// Largest degree on which the gcd check runs.
const GCD_CHECK_MAX_DEGREE: usize = 8;

impl RationalFn {
    /// Builds `num/den`, rejecting a zero denominator and (on degrees ≤ 8)
    /// any root shared by numerator and denominator.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        let r = Self::normalized(num, den)?;
        if let Some(root) = r.common_root() {
            return Err(Error::CommonFactor(root));
        }
        Ok(r)
    }

    /// Like [`RationalFn::new`] but cancels shared roots instead of failing.
    pub fn reduced(num: Poly, den: Poly) -> Result<Self> {
        let mut r = Self::normalized(num, den)?;
        while let Some(root) = r.common_root() {
            let factor = Poly::linear_factor(root);
            let (n, _) = r.num.div_rem(&factor);
            let (d, _) = r.den.div_rem(&factor);
            r = Self::normalized(n.scale(r.scale), d)?;
        }
        Ok(r)
    }

    fn normalized(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let (num, ln) = num.monic();
        let (den, ld) = den.monic();
        Ok(Self {
            num,
            den,
            scale: ln / ld,
        })
    }

    fn common_root(&self) -> Option<Complex> {
        if self.num.degree() == 0
            || self.den.degree() == 0
            || self.num.degree() > GCD_CHECK_MAX_DEGREE
            || self.den.degree() > GCD_CHECK_MAX_DEGREE
        {
            return None;
        }
        let nr = self.num.distinct_roots(CLUSTER_TOL);
        let dr = self.den.distinct_roots(CLUSTER_TOL);
        for (a, _) in &nr {
            for (b, _) in &dr {
                if (a - b).norm() <= COMMON_ROOT_TOL * (1.0 + a.norm()) {
                    return Some((a + b) / 2.0);
                }
            }
        }
        None
    }

    pub fn zero() -> Self {
        Self {
            num: Poly::one(),
            den: Poly::one(),
            scale: Complex::ZERO,
        }
    }

    pub fn constant(c: Complex) -> Self {
        Self {
            num: Poly::one(),
            den: Poly::one(),
            scale: c,
        }
    }

    pub fn var() -> Self {
        Self::from_poly(Poly::var())
    }

    pub fn from_poly(p: Poly) -> Self {
        Self::normalized(p, Poly::one()).expect("unit denominator")
    }

    /// `scale · Π(u - σ)/Π(u - τ)`.
    pub fn from_roots(scale: Complex, zeros: &[Complex], poles: &[Complex]) -> Result<Self> {
        Self::new(
            Poly::from_roots(zeros, scale),
            Poly::from_roots(poles, Complex::ONE),
        )
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn scale(&self) -> Complex {
        self.scale
    }

    /// `scale · num`, the numerator with the multiplier folded in.
    pub fn scaled_num(&self) -> Poly {
        self.num.scale(self.scale)
    }

    pub fn is_zero(&self) -> bool {
        self.scale == Complex::ZERO
    }

    pub fn is_constant(&self) -> bool {
        self.is_zero() || (self.num.degree() == 0 && self.den.degree() == 0)
    }

    /// `deg num − deg den`: the growth exponent of `R(u)` as `u → ∞`.
    pub fn degree_balance(&self) -> i64 {
        self.num.degree() as i64 - self.den.degree() as i64
    }

    pub fn eval(&self, u: Complex) -> Result<Complex> {
        let d = self.den.eval(u);
        if d.norm() <= 1e-300 {
            return Err(Error::PoleAt(u));
        }
        Ok(self.scale * self.num.eval(u) / d)
    }

    /// Distinct poles (finite), with multiplicities.
    pub fn poles(&self) -> Vec<(Complex, usize)> {
        self.den.distinct_roots(CLUSTER_TOL)
    }

    /// Distinct finite zeros, with multiplicities.
    pub fn zeros(&self) -> Vec<(Complex, usize)> {
        if self.is_zero() {
            return Vec::new();
        }
        self.num.distinct_roots(CLUSTER_TOL)
    }

    pub fn mul(&self, rhs: &RationalFn) -> Result<Self> {
        Self::reduced(&self.scaled_num() * &rhs.scaled_num(), &self.den * &rhs.den)
    }

    pub fn div(&self, rhs: &RationalFn) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Self::reduced(&self.scaled_num() * &rhs.den, &self.den * &rhs.scaled_num())
    }

    pub fn add(&self, rhs: &RationalFn) -> Result<Self> {
        let n = &(&self.scaled_num() * &rhs.den) + &(&rhs.scaled_num() * &self.den);
        Self::reduced(n, &self.den * &rhs.den)
    }

    pub fn sub(&self, rhs: &RationalFn) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            scale: -self.scale,
            ..self.clone()
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        if self.is_zero() {
            return if n == 0 {
                Self::constant(Complex::ONE)
            } else {
                Self::zero()
            };
        }
        Self {
            num: self.num.pow(n),
            den: self.den.pow(n),
            scale: self.scale.powu(n),
        }
    }

    /// `R ∘ m`, i.e. `u ↦ R(m(u))`.
    pub fn compose_mobius(&self, m: &Mobius) -> Result<Self> {
        if self.is_constant() {
            return Ok(self.clone());
        }
        let [a, b, c, d] = m.entries();
        let top = Poly::new(vec![b, a]);
        let bottom = Poly::new(vec![d, c]);
        // homogenize p(top/bottom) = P(top, bottom)/bottom^deg
        let homogenize = |p: &Poly, deg: usize| -> Poly {
            p.coeffs()
                .iter()
                .enumerate()
                .fold(Poly::zero(), |acc, (i, &ci)| {
                    let term = &top.pow(i as u32) * &bottom.pow((deg - i) as u32);
                    &acc + &term.scale(ci)
                })
        };
        let dn = self.num.degree();
        let dd = self.den.degree();
        let mut n = homogenize(&self.num, dn).scale(self.scale);
        let mut dpoly = homogenize(&self.den, dd);
        if dd > dn {
            n = &n * &bottom.pow((dd - dn) as u32);
        } else {
            dpoly = &dpoly * &bottom.pow((dn - dd) as u32);
        }
        Self::reduced(n.trimmed(1e-14), dpoly.trimmed(1e-14))
    }

    /// Multiplicities of zeros and poles on the Riemann sphere, each sorted
    /// descending; the point at infinity contributes `|deg num − deg den|`
    /// to whichever side it belongs.
    pub fn multiplicity_signature(&self) -> (Vec<usize>, Vec<usize>) {
        let mut zeros: Vec<usize> = self.zeros().into_iter().map(|(_, m)| m).collect();
        let mut poles: Vec<usize> = self.poles().into_iter().map(|(_, m)| m).collect();
        let bal = self.degree_balance();
        if bal > 0 {
            poles.push(bal as usize);
        } else if bal < 0 {
            zeros.push((-bal) as usize);
        }
        zeros.sort_unstable_by(|a, b| b.cmp(a));
        poles.sort_unstable_by(|a, b| b.cmp(a));
        (zeros, poles)
    }
}

impl fmt::Display for RationalFn {
    /// Prints `scale*(num)/(den)` in the grammar accepted by
    /// [`super::parse_ratfn`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_complex(self.scale))?;
        if self.is_zero() {
            return Ok(());
        }
        if self.num.degree() > 0 {
            write!(f, "*({})", self.num)?;
        }
        if self.den.degree() > 0 {
            write!(f, "/({})", self.den)?;
        }
        Ok(())
    }
}
