//! Truncated Laurent series `Σ_{k<n} c_k z^(lead+k) + O(z^(lead+n))`.
//!
//! Truncation bookkeeping is a single integer per series (its order). Every
//! operation reports only coefficients provable from its inputs: a product
//! or quotient keeps as many terms as its shorter operand, a sum stops at the
//! smaller order, and a derivative lowers the order by one.
//!
//! Normal form strips leading coefficients that are exactly zero; nothing is
//! thresholded, so cancellation noise stays visible.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::{Complex, RationalFn};

/// Default number of stored coefficients for suite computations.
pub const DEFAULT_TERMS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentSeries {
    lead: i32,
    coeffs: Vec<Complex>,
}

impl LaurentSeries {
    /// Series with first stored exponent `lead`; leading exact zeros are
    /// stripped while the truncation order `lead + coeffs.len()` is kept.
    pub fn new(lead: i32, coeffs: Vec<Complex>) -> Self {
        let skip = coeffs.iter().take_while(|c| **c == Complex::ZERO).count();
        let mut coeffs = coeffs;
        coeffs.drain(..skip);
        Self {
            lead: lead + skip as i32,
            coeffs,
        }
    }

    /// The series `O(z^order)`.
    pub fn zero(order: i32) -> Self {
        Self {
            lead: order,
            coeffs: Vec::new(),
        }
    }

    /// `c · z^exp` known exactly through `nterms` coefficients.
    pub fn monomial(exp: i32, c: Complex, nterms: usize) -> Self {
        if nterms == 0 {
            return Self::zero(exp);
        }
        let mut coeffs = vec![Complex::ZERO; nterms];
        coeffs[0] = c;
        Self::new(exp, coeffs)
    }

    pub fn constant(c: Complex, nterms: usize) -> Self {
        Self::monomial(0, c, nterms)
    }

    /// The series `z`.
    pub fn var(nterms: usize) -> Self {
        Self::monomial(1, Complex::ONE, nterms)
    }

    /// Exponent of the first stored coefficient (the valuation, unless the
    /// series is zero, in which case it equals the order).
    pub fn lead_exp(&self) -> i32 {
        self.lead
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exponent of the first unknown term.
    pub fn order(&self) -> i32 {
        self.lead + self.coeffs.len() as i32
    }

    /// True when no coefficient is known to be nonzero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<Complex> {
        self.coeffs.first().copied()
    }

    /// Coefficient of `z^exp`; zero below the valuation, an error at or
    /// beyond the truncation order.
    pub fn coeff(&self, exp: i32) -> Result<Complex> {
        if exp >= self.order() {
            return Err(Error::EmptyTruncation(exp));
        }
        if exp < self.lead {
            return Ok(Complex::ZERO);
        }
        Ok(self.coeffs[(exp - self.lead) as usize])
    }

    /// Drops every term at or beyond `order`.
    pub fn truncate(&self, order: i32) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        if order <= self.lead {
            return Self::zero(order);
        }
        Self::new(
            self.lead,
            self.coeffs[..(order - self.lead) as usize].to_vec(),
        )
    }

    pub fn scale(&self, c: Complex) -> Self {
        Self::new(self.lead, self.coeffs.iter().map(|&x| x * c).collect())
    }

    /// Adds a constant; invisible when the constant term is past truncation.
    pub fn add_scalar(&self, c: Complex) -> Self {
        let order = self.order();
        if c == Complex::ZERO || order <= 0 {
            return self.clone();
        }
        let lead = self.lead.min(0);
        let mut coeffs = vec![Complex::ZERO; (order - lead) as usize];
        for (k, &x) in self.coeffs.iter().enumerate() {
            coeffs[(self.lead - lead) as usize + k] = x;
        }
        coeffs[(-lead) as usize] += c;
        Self::new(lead, coeffs)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.len().min(rhs.len());
        let lead = self.lead + rhs.lead;
        if n == 0 {
            return Self::zero(lead);
        }
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|i| self.coeffs[i] * rhs.coeffs[k - i]).sum())
            .collect();
        Self::new(lead, coeffs)
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let b0 = rhs.leading().ok_or(Error::DivisionByZeroSeries)?;
        if b0.norm() <= 1e-300 {
            return Err(Error::DivisionByZeroSeries);
        }
        let lead = self.lead - rhs.lead;
        let n = self.len().min(rhs.len());
        if n == 0 {
            return Ok(Self::zero(lead));
        }
        let inv = b0.inv();
        let mut q: Vec<Complex> = Vec::with_capacity(n);
        for k in 0..n {
            let acc: Complex = (1..=k).map(|i| rhs.coeffs[i] * q[k - i]).sum();
            q.push((self.coeffs[k] - acc) * inv);
        }
        Ok(Self::new(lead, q))
    }

    /// Integer power; negative exponents divide.
    pub fn pow(&self, n: i32) -> Result<Self> {
        if n < 0 {
            let p = self.pow(-n)?;
            return Self::constant(Complex::ONE, p.len()).div(&p);
        }
        let mut result = Self::constant(Complex::ONE, self.len().max(1));
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    pub fn differentiate(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * (self.lead + k as i32) as f64)
            .collect();
        Self::new(self.lead - 1, coeffs)
    }

    /// `p(s)` by Horner's rule.
    pub fn compose_poly(&self, p: &crate::Poly) -> Self {
        let cs = p.coeffs();
        if cs.len() <= 1 {
            return Self::constant(p.coeff(0), self.len().max(1));
        }
        let mut acc = self.scale(cs[cs.len() - 1]);
        for &c in cs[1..cs.len() - 1].iter().rev() {
            acc = acc.add_scalar(c).mul(self);
        }
        acc.add_scalar(cs[0])
    }

    /// `r(s) = scale · num(s) / den(s)`.
    pub fn compose_rational(&self, r: &RationalFn) -> Result<Self> {
        if r.is_constant() {
            return Ok(Self::constant(r.scale(), self.len().max(1)));
        }
        let n = self.compose_poly(r.num());
        let d = self.compose_poly(r.den());
        Ok(n.div(&d)?.scale(r.scale()))
    }

    /// Schwarzian derivative `s'''/s' − (3/2)(s''/s')²`.
    pub fn schwarzian(&self) -> Result<Self> {
        let d1 = self.differentiate();
        if d1.is_zero() {
            return Err(Error::ConstantSeries);
        }
        let d2 = d1.differentiate();
        let d3 = d2.differentiate();
        let r1 = d3.div(&d1)?;
        let r2 = d2.div(&d1)?;
        Ok(&r1 - &r2.mul(&r2).scale(Complex::new(1.5, 0.0)))
    }

    /// Sums the stored terms at `z`.
    pub fn eval(&self, z: Complex) -> Complex {
        let poly: Complex = self
            .coeffs
            .iter()
            .rev()
            .fold(Complex::ZERO, |acc, &c| acc * z + c);
        poly * z.powi(self.lead)
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        let order = self.order().min(rhs.order());
        let lead = self.lead.min(rhs.lead).min(order);
        let coeffs = (lead..order)
            .map(|e| self.coeff(e).unwrap_or_default() + rhs.coeff(e).unwrap_or_default())
            .collect();
        LaurentSeries::new(lead, coeffs)
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self + &(-rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scale(-Complex::ONE)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        LaurentSeries::mul(self, rhs)
    }
}
