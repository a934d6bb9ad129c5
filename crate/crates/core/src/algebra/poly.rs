use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::{c64, Complex};

/// Dense univariate polynomial with complex coefficients in ascending degree
/// order. The highest stored coefficient is nonzero unless the polynomial is
/// zero, which is stored as an empty vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex::ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| c64(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex::ONE)
    }

    pub fn constant(c: Complex) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `u`.
    pub fn var() -> Self {
        Self::new(vec![Complex::ZERO, Complex::ONE])
    }

    /// `u - root`.
    pub fn linear_factor(root: Complex) -> Self {
        Self::new(vec![-root, Complex::ONE])
    }

    /// `scale * Π (u - r)` over the given multiset of roots.
    pub fn from_roots(roots: &[Complex], scale: Complex) -> Self {
        let mut coeffs = vec![scale];
        for &r in roots {
            let mut next = vec![Complex::ZERO; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= r * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex {
        self.coeffs.get(k).copied().unwrap_or(Complex::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index of the last nonzero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex {
        self.coeffs.last().copied().unwrap_or(Complex::ZERO)
    }

    pub fn eval(&self, u: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::ZERO, |acc, &c| acc * u + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Splits off the leading coefficient: returns `(monic, leading)`.
    /// The zero polynomial is returned unchanged with leading coefficient 0.
    pub fn monic(&self) -> (Self, Complex) {
        let lead = self.leading();
        if self.is_zero() {
            return (Self::zero(), Complex::ZERO);
        }
        let mut m = self.scale(lead.inv());
        if let Some(last) = m.coeffs.last_mut() {
            *last = Complex::ONE;
        }
        (m, lead)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division. Panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let dd = divisor.degree();
        if self.is_zero() || self.degree() < dd {
            return (Poly::zero(), self.clone());
        }
        let lead_inv = divisor.leading().inv();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Complex::ZERO; self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] * lead_inv;
            quot[k] = q;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= q * d;
            }
            rem[k + dd] = Complex::ZERO;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Drops leading coefficients smaller than `tol` times the largest one.
    pub fn trimmed(&self, tol: f64) -> Self {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= tol * max) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    /// All complex roots, by Aberth–Ehrlich iteration followed by Newton
    /// polishing. Multiple roots come back as clusters.
    pub fn roots(&self) -> Vec<Complex> {
        let n = self.degree();
        if self.is_zero() || n == 0 {
            return Vec::new();
        }
        let (monic, _) = self.monic();
        if n == 1 {
            return vec![-monic.coeffs[0]];
        }
        let d1 = monic.derivative();
        // Cauchy-style radius for the starting circle
        let radius = 1.0
            + monic.coeffs[..n]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
        let mut z: Vec<Complex> = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
                Complex::from_polar(0.5 * radius, theta)
            })
            .collect();
        for _ in 0..500 {
            let mut max_step: f64 = 0.0;
            for i in 0..n {
                let p = monic.eval(z[i]);
                if p == Complex::ZERO {
                    continue;
                }
                let ratio = p / d1.eval(z[i]);
                let repulsion: Complex = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (z[i] - z[j]).inv())
                    .sum();
                let step = ratio / (Complex::ONE - ratio * repulsion);
                if step.is_finite() {
                    z[i] -= step;
                    max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        for r in z.iter_mut() {
            for _ in 0..3 {
                let dp = d1.eval(*r);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = monic.eval(*r) / dp;
                if !step.is_finite() || step.norm() > 1e-6 * (1.0 + r.norm()) {
                    break;
                }
                *r -= step;
            }
        }
        z
    }
}

impl Poly {
    /// Distinct roots with multiplicities. Clusters from [`Poly::roots`] are
    /// merged and each centroid is refined by Newton's method on the
    /// `(m-1)`-th derivative, where a root of multiplicity `m` is simple.
    pub fn distinct_roots(&self, cluster_tol: f64) -> Vec<(Complex, usize)> {
        let mut out = cluster_roots(&self.roots(), cluster_tol);
        for (r, m) in out.iter_mut() {
            let mut p = self.clone();
            for _ in 1..*m {
                p = p.derivative();
            }
            let dp = p.derivative();
            for _ in 0..8 {
                let step = p.eval(*r) / dp.eval(*r);
                if !step.is_finite() || step.norm() > cluster_tol * (1.0 + r.norm()) {
                    break;
                }
                *r -= step;
                if step.norm() <= 1e-16 * (1.0 + r.norm()) {
                    break;
                }
            }
        }
        out
    }
}

/// Groups roots closer than `tol * (1 + |r|)` and returns each cluster's
/// centroid with its size. The centroid of a perturbed multiple root is far
/// more accurate than any single member.
pub fn cluster_roots(roots: &[Complex], tol: f64) -> Vec<(Complex, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i]];
        // grow transitively so a loose triple cluster is not split
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..roots.len() {
                if used[j] {
                    continue;
                }
                if members
                    .iter()
                    .any(|m| (roots[j] - m).norm() <= tol * (1.0 + m.norm()))
                {
                    used[j] = true;
                    members.push(roots[j]);
                    grew = true;
                }
            }
        }
        let centroid = members.iter().sum::<Complex>() / members.len() as f64;
        out.push((centroid, members.len()));
    }
    out
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex::ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-Complex::ONE)
    }
}

impl fmt::Display for Poly {
    /// Prints in the expression grammar accepted by [`super::parse_ratfn`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == Complex::ZERO {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            write!(f, "{}", super::fmt_complex(*c))?;
            match k {
                0 => {}
                1 => write!(f, "*u")?,
                _ => write!(f, "*u^{k}")?,
            }
        }
        Ok(())
    }
}
