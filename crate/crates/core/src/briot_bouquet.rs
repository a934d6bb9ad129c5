//! Binomial equations `(u')^k = R(u)`: residuals, the two theorem instances
//! with their elliptic invariants recovered from series, rational fitting of
//! `R` from a Laurent expansion, and the correspondence with the Schwarzian
//! rows.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling::{annulus_point, sample_family, stream_rng};
use crate::schwarzian::CanonicalRow;
use crate::weierstrass::{EllipticInvariants, FamilyKind, SolutionFamily};
use crate::{c64, Complex, DerivativeJet, LaurentSeries, Mobius, Poly, RationalFn};

/// Fit residual below which a fit counts as exact.
pub const EXACT_FIT: f64 = 1e-9;
/// Fit residual above which no fit is returned.
pub const MAX_FIT_RESIDUAL: f64 = 1e-6;
/// Laurent terms of `℘` used when expanding candidate solutions.
pub const WP_TERMS: usize = 12;

/// `(u')^k = R(u)`, optionally tagged with the constant `L` it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialEquation {
    pub k: u32,
    pub rhs: RationalFn,
    pub l: Option<Complex>,
}

impl BinomialEquation {
    pub fn new(k: u32, rhs: RationalFn) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("binomial exponent must be positive".into()));
        }
        if rhs.is_zero() {
            return Err(Error::Config("right side must be nonzero".into()));
        }
        Ok(Self { k, rhs, l: None })
    }

    /// Residual series `(u')^k − R(u)` for a Laurent series `u`, with the
    /// largest coefficient of either side as a reference magnitude.
    pub fn residual_series(&self, u: &LaurentSeries) -> Result<(LaurentSeries, f64)> {
        let lhs = u.differentiate().pow(self.k as i32)?;
        let rhs = u.compose_rational(&self.rhs)?;
        let scale = series_scale(&lhs).max(series_scale(&rhs));
        Ok((&lhs - &rhs, scale))
    }
}

/// `((u')^k − R(u)) / (1 + |R(u)|)`.
pub fn residual_binomial(eq: &BinomialEquation, j: &DerivativeJet) -> Result<Complex> {
    let r = eq.rhs.eval(j.u)?;
    Ok((j.u1.powu(eq.k) - r) / (1.0 + r.norm()))
}

/// Largest `|residual_binomial|` of `family` over `points`.
pub fn max_binomial_residual(
    eq: &BinomialEquation,
    family: &SolutionFamily,
    points: &[Complex],
) -> Result<f64> {
    points.iter().try_fold(0.0f64, |acc, &z| {
        Ok(acc.max(residual_binomial(eq, &family.jet(z)?)?.norm()))
    })
}

fn poly_of_roots(roots: &[(f64, usize)]) -> Poly {
    roots.iter().fold(Poly::one(), |acc, &(r, m)| {
        &acc * &Poly::linear_factor(c64(r, 0.0)).pow(m as u32)
    })
}

/// Which theorem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// `(u')³ = L³u²(u−1)²(u+1)²`, `u = A/℘'(z; 0, g₃)`, `A = −2L³/27`.
    Five,
    /// `(u')⁴ = L⁴u²(u−1)³(u+1)³`, `u = 1 + B/(℘²(z; g₂, 0) − C)`,
    /// `B = L⁴/32`, `C = L⁴/64`.
    Six,
}

impl Theorem {
    pub fn k(self) -> u32 {
        match self {
            Theorem::Five => 3,
            Theorem::Six => 4,
        }
    }

    /// Homogeneity weight of the unknown invariant in `L`.
    fn weight(self) -> i32 {
        match self {
            Theorem::Five => 6,
            Theorem::Six => 4,
        }
    }

    pub fn equation(self, l: Complex) -> Result<BinomialEquation> {
        if l == Complex::ZERO {
            return Err(Error::ZeroL);
        }
        let (mult, k) = match self {
            Theorem::Five => (2, 3),
            Theorem::Six => (3, 4),
        };
        let p = poly_of_roots(&[(0.0, 2), (1.0, mult), (-1.0, mult)]).scale(l.powu(k));
        let mut eq = BinomialEquation::new(k, RationalFn::from_poly(p))?;
        eq.l = Some(l);
        Ok(eq)
    }

    /// Candidate solution with the unknown invariant set to `g`.
    pub fn family(self, l: Complex, g: Complex) -> Result<SolutionFamily> {
        if l == Complex::ZERO {
            return Err(Error::ZeroL);
        }
        match self {
            Theorem::Five => {
                let a = -2.0 * l.powu(3) / 27.0;
                SolutionFamily::elliptic(
                    FamilyKind::WpPrime,
                    EllipticInvariants::new(Complex::ZERO, g),
                )?
                .with_front(Mobius::new(
                    Complex::ZERO,
                    a,
                    Complex::ONE,
                    Complex::ZERO,
                )?)
            }
            Theorem::Six => {
                let (b, c) = (l.powu(4) / 32.0, l.powu(4) / 64.0);
                SolutionFamily::elliptic(
                    FamilyKind::Wp2,
                    EllipticInvariants::new(g, Complex::ZERO),
                )?
                .with_front(Mobius::new(Complex::ONE, b - c, Complex::ONE, -c)?)
            }
        }
    }

    /// The invariant obtained by hand elimination: `g₃ = −4L⁶/729` and
    /// `g₂ = −L⁴/16`.
    pub fn closed_form_invariant(self, l: Complex) -> Complex {
        match self {
            Theorem::Five => -4.0 * l.powu(6) / 729.0,
            Theorem::Six => -l.powu(4) / 16.0,
        }
    }
}

fn residual_coefficients(
    thm: Theorem,
    eq: &BinomialEquation,
    l: Complex,
    g: Complex,
) -> Result<(LaurentSeries, f64)> {
    eq.residual_series(&thm.family(l, g)?.laurent_series(WP_TERMS)?)
}

fn series_scale(s: &LaurentSeries) -> f64 {
    s.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Invariant from series matching: expand the candidate about its pole,
/// substitute into the equation, and solve the lowest coefficient of the
/// residual series that depends on the invariant (secant iteration).
/// Every other determined coefficient must then vanish.
pub fn invariant_by_series(thm: Theorem, l: Complex) -> Result<Complex> {
    let eq = thm.equation(l)?;
    let unit = l.powi(thm.weight());
    let (r0, s0) = residual_coefficients(thm, &eq, l, Complex::ZERO)?;
    let (r1, s1) = residual_coefficients(thm, &eq, l, unit)?;
    let scale = s0.max(s1);
    let order = r0.order().min(r1.order());
    let lead = r0.lead_exp().min(r1.lead_exp());
    let mut target = None;
    for e in lead..order {
        let (a, b) = (r0.coeff(e)?, r1.coeff(e)?);
        if (a - b).norm() > 1e-9 * scale {
            target = Some(e);
            break;
        }
        if a.norm() > 1e-9 * scale {
            return Err(Error::InvariantMatch(
                "a coefficient independent of the invariant is nonzero",
            ));
        }
    }
    let e = target.ok_or(Error::InvariantMatch(
        "no coefficient depends on the invariant",
    ))?;
    let f = |g: Complex| -> Result<Complex> { residual_coefficients(thm, &eq, l, g)?.0.coeff(e) };
    let (mut x0, mut x1) = (Complex::ZERO, unit);
    let (mut f0, mut f1) = (f(x0)?, f(x1)?);
    for _ in 0..30 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        (x0, f0) = (x1, f1);
        x1 = x2;
        f1 = f(x1)?;
        if (x1 - x0).norm() <= 1e-15 * x1.norm() {
            break;
        }
    }
    let (check, scale) = residual_coefficients(thm, &eq, l, x1)?;
    for e in check.lead_exp()..check.order() {
        if check.coeff(e)?.norm() > 1e-9 * scale {
            return Err(Error::InvariantMatch(
                "series residual does not vanish at the solved invariant",
            ));
        }
    }
    Ok(x1)
}

/// Fixed evaluation points for the scan, scaled by `1/|L|`.
fn scan_points(l: Complex) -> Vec<Complex> {
    let mut rng = stream_rng(0x5ca7, 0);
    let s = 1.0 / l.norm();
    (0..16)
        .map(|_| annulus_point(&mut rng, Complex::ZERO, 0.3 * s, 0.7 * s))
        .collect()
}

fn scan_objective(
    thm: Theorem,
    eq: &BinomialEquation,
    l: Complex,
    pts: &[Complex],
    g: Complex,
) -> f64 {
    let Ok(fam) = thm.family(l, g) else {
        return f64::INFINITY;
    };
    pts.iter()
        .map(|&z| {
            fam.jet(z)
                .and_then(|j| residual_binomial(eq, &j))
                .map_or(f64::INFINITY, |r| r.norm())
        })
        .sum()
}

/// Invariant by direct residual minimization along the homogeneity ray
/// `g = t·|L|^w·(L/|L|)^w`, `t ∈ [−1, 1]`: a 2001-point grid followed by
/// golden-section refinement.
pub fn invariant_by_scan(thm: Theorem, l: Complex) -> Result<Complex> {
    let eq = thm.equation(l)?;
    let dir = l.powi(thm.weight());
    let pts = scan_points(l);
    let obj = |t: f64| scan_objective(thm, &eq, l, &pts, dir * t);
    let n = 2000;
    let ts: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let best = (0..=n)
        .min_by(|&a, &b| obj(ts[a]).total_cmp(&obj(ts[b])))
        .expect("nonempty grid");
    let (mut a, mut b) = (ts[best.saturating_sub(1)], ts[(best + 1).min(n)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut fc, mut fd) = (obj(c), obj(d));
    while b - a > 1e-14 {
        if fc < fd {
            (b, d, fd) = (d, c, fc);
            c = b - phi * (b - a);
            fc = obj(c);
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + phi * (b - a);
            fd = obj(d);
        }
    }
    Ok(dir * ((a + b) / 2.0))
}

/// A theorem instance with its invariant derived by both routes.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremInstance {
    pub theorem: Theorem,
    pub eq: BinomialEquation,
    pub family: SolutionFamily,
    pub invariant: Complex,
    pub scan_invariant: Complex,
}

impl TheoremInstance {
    /// Relative disagreement between the two derivations.
    pub fn route_disagreement(&self) -> f64 {
        (self.invariant - self.scan_invariant).norm() / self.invariant.norm()
    }
}

pub fn theorem_instance(thm: Theorem, l: Complex) -> Result<TheoremInstance> {
    let invariant = invariant_by_series(thm, l)?;
    let scan_invariant = invariant_by_scan(thm, l)?;
    Ok(TheoremInstance {
        theorem: thm,
        eq: thm.equation(l)?,
        family: thm.family(l, invariant)?,
        invariant,
        scan_invariant,
    })
}

pub fn thm5_instance(l: Complex) -> Result<(BinomialEquation, SolutionFamily)> {
    let t = theorem_instance(Theorem::Five, l)?;
    Ok((t.eq, t.family))
}

pub fn thm6_instance(l: Complex) -> Result<(BinomialEquation, SolutionFamily)> {
    let t = theorem_instance(Theorem::Six, l)?;
    Ok((t.eq, t.family))
}

/// Result of fitting `(u')^k·D(u) = N(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialFit {
    pub eq: BinomialEquation,
    /// Largest equilibrated equation residual.
    pub residual: f64,
}

impl BinomialFit {
    pub fn is_exact(&self) -> bool {
        self.residual < EXACT_FIT
    }
}

/// `Σ c_i (u − u₀)^i` in monomials of `u`.
fn unshift(coeffs: &[Complex], u0: Complex) -> Poly {
    let t = Poly::linear_factor(u0);
    coeffs
        .iter()
        .rev()
        .fold(Poly::zero(), |acc, &c| &(&acc * &t) + &Poly::constant(c))
}

fn clean(p: Poly) -> Poly {
    let max = p.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    Poly::new(
        p.coeffs()
            .iter()
            .map(|&c| {
                if c.norm() <= 1e-10 * max {
                    Complex::ZERO
                } else {
                    c
                }
            })
            .collect(),
    )
}

/// Fits `R = N/D` with `deg N ≤ deg_n`, `D` monic of degree `deg_d`, so
/// that `(u')^k·D(u) − N(u)` vanishes coefficientwise on the series `u`.
///
/// `N` and `D` are solved for in powers of `t = u − u₀`, with `u₀` the
/// constant term of `u`, so that the columns have increasing valuation;
/// monomials in `u` would all start with `u₀^i` and be nearly parallel. Each
/// row (one power of `z`) and column is then scaled to unit maximum before
/// the complex least-squares solve.
pub fn fit_binomial_from_series(
    u: &LaurentSeries,
    k: u32,
    deg_n: usize,
    deg_d: usize,
) -> Result<BinomialFit> {
    let need = k as usize * (deg_n + deg_d + 3);
    if u.len() < need {
        return Err(Error::InsufficientTerms {
            have: u.len(),
            need,
        });
    }
    let du_k = u.differentiate().pow(k as i32)?;
    let u0 = u.coeff(0).unwrap_or_default();
    let t = u.add_scalar(-u0);
    let powers: Vec<LaurentSeries> = (0..=deg_n.max(deg_d))
        .map(|i| t.pow(i as i32))
        .collect::<Result<_>>()?;
    // unknowns: n_0..n_deg_n, d_0..d_{deg_d−1}
    let mut cols: Vec<LaurentSeries> = powers[..=deg_n]
        .iter()
        .map(|p| p.scale(c64(-1.0, 0.0)))
        .collect();
    cols.extend(powers[..deg_d].iter().map(|p| du_k.mul(p)));
    let rhs = du_k.mul(&powers[deg_d]).scale(c64(-1.0, 0.0));
    let lead = cols
        .iter()
        .chain([&rhs])
        .map(|c| c.lead_exp())
        .min()
        .expect("columns");
    let order = cols
        .iter()
        .chain([&rhs])
        .map(|c| c.order())
        .min()
        .expect("columns");
    let nrows = (order - lead).max(0) as usize;
    let ncols = cols.len();
    let mut a = DMatrix::<Complex>::zeros(nrows, ncols);
    let mut b = DVector::<Complex>::zeros(nrows);
    for r in 0..nrows {
        let e = lead + r as i32;
        for (c, col) in cols.iter().enumerate() {
            a[(r, c)] = col.coeff(e)?;
        }
        b[r] = rhs.coeff(e)?;
        let m = a
            .row(r)
            .iter()
            .chain([&b[r]])
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        if m > 0.0 {
            a.row_mut(r).scale_mut(1.0 / m);
            b[r] /= m;
        }
    }
    let col_scale: Vec<f64> = (0..ncols)
        .map(|c| {
            a.column(c)
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE)
        })
        .collect();
    for (c, s) in col_scale.iter().enumerate() {
        a.column_mut(c).scale_mut(1.0 / s);
    }
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-13)
        .map_err(|e| Error::Config(e.to_string()))?;
    let residual = (&a * &x - &b).iter().map(|r| r.norm()).fold(0.0, f64::max);
    let coef = |c: usize| x[c] / col_scale[c];
    let num = clean(unshift(&(0..=deg_n).map(coef).collect::<Vec<_>>(), u0));
    let mut dc: Vec<Complex> = (0..deg_d).map(|i| coef(deg_n + 1 + i)).collect();
    dc.push(Complex::ONE);
    let den = clean(unshift(&dc, u0));
    let rhs = if num.is_zero() {
        RationalFn::zero()
    } else {
        RationalFn::reduced(num, den)?
    };
    if rhs.is_zero() {
        return Err(Error::NoExactFit {
            residual,
            best: Box::new(rhs),
        });
    }
    if residual > MAX_FIT_RESIDUAL {
        return Err(Error::NoExactFit {
            residual,
            best: Box::new(rhs),
        });
    }
    Ok(BinomialFit {
        eq: BinomialEquation::new(k, rhs)?,
        residual,
    })
}

/// First exact fit over `k = 1..=k_max`, then total degree, then `deg D`,
/// with `deg N ≤ 8`, `deg D ≤ 4`.
pub fn discover_binomial(u: &LaurentSeries, k_max: u32) -> Result<BinomialFit> {
    for k in 1..=k_max {
        match discover_binomial_for(u, k) {
            Err(Error::NoExactFit { .. }) => {}
            other => return other,
        }
    }
    Err(Error::NoExactFit {
        residual: f64::INFINITY,
        best: Box::new(RationalFn::zero()),
    })
}

/// Lowest-degree exact fit with fixed `k`.
pub fn discover_binomial_for(u: &LaurentSeries, k: u32) -> Result<BinomialFit> {
    let mut best: Option<(f64, RationalFn)> = None;
    for total in 0..=12 {
        for deg_d in 0..=total.min(4) {
            let deg_n = total - deg_d;
            if deg_n > 8 {
                continue;
            }
            let (residual, rhs) = match fit_binomial_from_series(u, k, deg_n, deg_d) {
                Ok(fit) if fit.is_exact() => return Ok(fit),
                Ok(fit) => (fit.residual, fit.eq.rhs),
                Err(Error::NoExactFit { residual, best }) => (residual, *best),
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|b| residual < b.0) {
                best = Some((residual, rhs));
            }
        }
    }
    let (residual, rhs) = best.unwrap_or((f64::INFINITY, RationalFn::zero()));
    Err(Error::NoExactFit {
        residual,
        best: Box::new(rhs),
    })
}

/// `(k, deg N, deg D)` for rows 1–4 of the correspondence.
pub const CORRESPONDENCE_SHAPES: [(u32, usize, usize); 4] =
    [(2, 3, 0), (3, 4, 0), (4, 5, 0), (6, 7, 0)];

/// Laurent terms of `℘` needed to fit every correspondence row.
pub const CORRESPONDENCE_WP_TERMS: usize = 32;

/// One row of the correspondence table.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceEntry {
    pub row: usize,
    pub binomial: BinomialEquation,
    pub family: SolutionFamily,
    pub fit_residual: f64,
    pub schwarzian_residual: f64,
    pub binomial_residual: f64,
    pub samples: usize,
}

impl CorrespondenceEntry {
    pub fn passes(&self, tol: f64) -> bool {
        self.fit_residual < EXACT_FIT
            && self.schwarzian_residual < tol
            && self.binomial_residual < tol
    }
}

/// Fits the binomial equation of a Schwarzian row's solution and checks
/// both equations at the same sample points.
pub fn correspondence_entry(
    row: &CanonicalRow,
    samples: usize,
    seed: u64,
) -> Result<CorrespondenceEntry> {
    if !(1..=4).contains(&row.index) {
        return Err(Error::Config(format!(
            "row {} has no elliptic binomial partner",
            row.index
        )));
    }
    let (k, deg_n, deg_d) = CORRESPONDENCE_SHAPES[row.index - 1];
    let series = row.family.laurent_series(CORRESPONDENCE_WP_TERMS)?;
    let fit = fit_binomial_from_series(&series, k, deg_n, deg_d)?;
    let pts = sample_family(&row.family, samples, seed, row.index as u64)?;
    let (mut s_res, mut b_res) = (0.0f64, 0.0f64);
    for p in &pts {
        s_res = s_res.max(row.eq.residual(&p.jet)?.norm());
        b_res = b_res.max(residual_binomial(&fit.eq, &p.jet)?.norm());
    }
    Ok(CorrespondenceEntry {
        row: row.index,
        binomial: fit.eq,
        family: row.family.clone(),
        fit_residual: fit.residual,
        schwarzian_residual: s_res,
        binomial_residual: b_res,
        samples: pts.len(),
    })
}

/// The four-entry table for the given rows, failing on the first broken
/// entry.
pub fn correspondence_table(
    rows: &[CanonicalRow; 4],
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<CorrespondenceEntry>> {
    rows.iter()
        .map(|row| {
            let e = correspondence_entry(row, samples, seed)
                .map_err(|_| Error::CorrespondenceBroken(row.index))?;
            if e.passes(tol) {
                Ok(e)
            } else {
                Err(Error::CorrespondenceBroken(row.index))
            }
        })
        .collect()
}
