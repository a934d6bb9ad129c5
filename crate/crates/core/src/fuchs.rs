//! Movable-pole analysis of `{u;z}^p = R(u)`: dominant balances, local
//! Laurent solutions and Fuchs indices.
//!
//! With `R = c·N/D` (`N`, `D` monic) everything is done on the cleared form
//! `G(u) = {u;z}^p·D(u) − c·N(u)`. For `u = Σ a_k z^(q+k)` the coefficient of
//! `G` at `z^(e₀+k)`, `e₀ = q·deg N`, is affine in `a_k`; its slope is the
//! indicial polynomial evaluated at `k`, up to a constant factor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schwarzian::SchwarzianEquation;
use crate::{c64, Complex, LaurentSeries, Mobius, Poly};

/// Range of leading exponents searched.
pub const Q_RANGE: std::ops::RangeInclusive<i32> = -8..=-2;
/// Relative size below which a coefficient of `G` counts as zero.
pub const SOLVE_TOL: f64 = 1e-9;
/// Default number of local series terms; enough for indicial sampling.
pub const SERIES_TERMS: usize = 16;
pub const INDICIAL_SAMPLES: [i32; 4] = [10, 11, 12, 13];
pub const INDICIAL_CHECK: i32 = 14;

/// Leading behaviour `v ≈ u₀ z^q` near a movable pole, where `v = u` or,
/// when `tau` is set, `v = 1/(u − τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominantBalance {
    pub q: i32,
    #[serde(with = "crate::report::complex_pair")]
    pub u0: Complex,
    #[serde(serialize_with = "crate::report::optional_complex_pair")]
    pub tau: Option<Complex>,
}

impl DominantBalance {
    /// The chart `u ↦ v`, if not the identity.
    pub fn chart(&self) -> Option<Mobius> {
        self.tau.map(|t| {
            Mobius::new(Complex::ZERO, Complex::ONE, Complex::ONE, -t).expect("chart is invertible")
        })
    }

    /// The equation satisfied by the chart variable (Möbius invariance keeps
    /// the left side unchanged).
    pub fn equation(&self, eq: &SchwarzianEquation) -> Result<SchwarzianEquation> {
        match self.tau {
            None => Ok(eq.clone()),
            Some(t) => {
                let back = Mobius::new(t, Complex::ONE, Complex::ONE, Complex::ZERO)?;
                SchwarzianEquation::new(eq.p(), eq.rhs().compose_mobius(&back)?)
            }
        }
    }
}

fn balances_at_infinity(eq: &SchwarzianEquation, tau: Option<Complex>) -> Vec<DominantBalance> {
    let r = eq.rhs();
    let d = r.degree_balance();
    let p = eq.p() as i64;
    if d <= 0 || (2 * p) % d != 0 {
        return Vec::new();
    }
    let q = (-2 * p / d) as i32;
    if !Q_RANGE.contains(&q) {
        return Vec::new();
    }
    let qf = q as f64;
    let target = c64((1.0 - qf * qf) / 2.0, 0.0).powu(eq.p()) / r.scale();
    let (rho, theta) = target.to_polar();
    (0..d)
        .map(|k| DominantBalance {
            q,
            u0: Complex::from_polar(
                rho.powf(1.0 / d as f64),
                (theta + std::f64::consts::TAU * k as f64) / d as f64,
            ),
            tau,
        })
        .collect()
}

/// All integer pole balances with `q ∈ [−8, −2]`. When none exists in `u`
/// itself, the charts `1/(u − τ)` at the poles `τ` of `R` are tried.
pub fn dominant_balances(eq: &SchwarzianEquation) -> Result<Vec<DominantBalance>> {
    if eq.rhs().is_constant() {
        return Err(Error::NoBalanceFound);
    }
    let direct = balances_at_infinity(eq, None);
    if !direct.is_empty() {
        return Ok(direct);
    }
    let mut poles: Vec<Complex> = eq.rhs().poles().into_iter().map(|(t, _)| t).collect();
    let key = |c: &Complex| ((c.re * 1e8).round() as i64, (c.im * 1e8).round() as i64);
    poles.sort_by_key(key);
    let mut out = Vec::new();
    for tau in poles {
        let probe = DominantBalance {
            q: 0,
            u0: Complex::ONE,
            tau: Some(tau),
        };
        out.extend(balances_at_infinity(&probe.equation(eq)?, Some(tau)));
    }
    if out.is_empty() {
        return Err(Error::NoBalanceFound);
    }
    Ok(out)
}

/// `G(s) = {s;z}^p·D(s) − c·N(s)` and the magnitude of its first part, used
/// as the reference scale for "zero".
fn cleared(eq: &SchwarzianEquation, s: &LaurentSeries) -> Result<(LaurentSeries, f64)> {
    let r = eq.rhs();
    let lhs = s
        .schwarzian()?
        .pow(eq.p() as i32)?
        .mul(&s.compose_poly(r.den()));
    let rhs = s.compose_poly(r.num()).scale(r.scale());
    let scale = lhs.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok((&lhs - &rhs, scale))
}

fn leading_exponent(eq: &SchwarzianEquation, q: i32) -> i32 {
    q * eq.rhs().num().degree() as i32
}

fn with_coeff(q: i32, known: &[Complex], next: Complex) -> LaurentSeries {
    let mut c = known.to_vec();
    c.push(next);
    LaurentSeries::new(q, c)
}

/// Affine dependence of the coefficient of `G` at `z^(e₀+k)` on `a_k`:
/// returns `(value at a_k = 0, slope, scale)`.
fn order_k(eq: &SchwarzianEquation, q: i32, known: &[Complex]) -> Result<(Complex, Complex, f64)> {
    let k = known.len() as i32;
    let e = leading_exponent(eq, q) + k;
    let (g0, s0) = cleared(eq, &with_coeff(q, known, Complex::ZERO))?;
    let (g1, s1) = cleared(eq, &with_coeff(q, known, Complex::ONE))?;
    let (c0, c1) = (g0.coeff(e)?, g1.coeff(e)?);
    Ok((c0, c1 - c0, s0.max(s1)))
}

/// Local Laurent solution in the balance's variable with `n` terms. Free
/// coefficients at resonances whose compatibility condition holds are set
/// to zero.
pub fn local_series(
    eq: &SchwarzianEquation,
    bal: &DominantBalance,
    n: usize,
) -> Result<LaurentSeries> {
    let eq = bal.equation(eq)?;
    let mut coeffs = vec![bal.u0];
    for k in 1..n {
        let (c0, slope, scale) = order_k(&eq, bal.q, &coeffs)?;
        let next = if slope.norm() <= SOLVE_TOL * scale {
            if c0.norm() > SOLVE_TOL * scale {
                return Err(Error::ResonanceObstruction(k as i32));
            }
            Complex::ZERO
        } else {
            -c0 / slope
        };
        coeffs.push(next);
    }
    Ok(LaurentSeries::new(bal.q, coeffs))
}

/// Largest coefficient of `G(s)` relative to the size of its terms, over
/// every order the truncation determines.
pub fn back_substitution_residual(
    eq: &SchwarzianEquation,
    bal: &DominantBalance,
    s: &LaurentSeries,
) -> Result<f64> {
    let eq = bal.equation(eq)?;
    let (g, scale) = cleared(&eq, s)?;
    let e0 = leading_exponent(&eq, bal.q);
    let worst = (0..s.len() as i32)
        .map(|k| g.coeff(e0 + k).map(|c| c.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// Monic cubic whose roots are the Fuchs indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicialPolynomial {
    /// Ascending coefficients; the last is 1.
    #[serde(serialize_with = "crate::report::complex_pairs")]
    pub coeffs: [Complex; 4],
    /// `−1` first, then the others by decreasing real part.
    #[serde(serialize_with = "crate::report::complex_pairs")]
    pub roots: [Complex; 3],
}

impl IndicialPolynomial {
    fn from_coeffs(coeffs: [Complex; 4]) -> Self {
        let mut roots = Poly::new(coeffs.to_vec()).roots();
        roots.sort_by(|a, b| {
            let da = (a + 1.0).norm() < 1e-6;
            let db = (b + 1.0).norm() < 1e-6;
            db.cmp(&da)
                .then(b.re.total_cmp(&a.re))
                .then(b.im.total_cmp(&a.im))
        });
        Self {
            coeffs,
            roots: [roots[0], roots[1], roots[2]],
        }
    }

    pub fn eval(&self, j: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::ZERO, |acc, &c| acc * j + c)
    }

    /// `K` in `(j + 1)(j² − j − K)`, read off the constant term.
    pub fn k_value(&self) -> Complex {
        -self.coeffs[0]
    }

    /// Distance of the coefficients from the exact `(j + 1)(j² − j − K)`
    /// pattern with `K` from [`Self::k_value`].
    pub fn pattern_error(&self) -> f64 {
        let k = self.k_value();
        self.coeffs[2].norm().max((self.coeffs[1] + k + 1.0).norm())
    }

    /// Indices other than the universal `−1`.
    pub fn nontrivial_indices(&self) -> [Complex; 2] {
        [self.roots[1], self.roots[2]]
    }
}

fn slope_at(
    eq: &SchwarzianEquation,
    bal: &DominantBalance,
    s: &LaurentSeries,
    j: i32,
) -> Result<Complex> {
    let need = j as usize + 1;
    if s.len() < need {
        return Err(Error::InsufficientTerms {
            have: s.len(),
            need,
        });
    }
    Ok(order_k(eq, bal.q, &s.coeffs()[..j as usize])?.1)
}

/// Indicial cubic from four samples of the linearized leading coefficient,
/// checked against a fifth.
pub fn indicial_polynomial_from(
    eq: &SchwarzianEquation,
    bal: &DominantBalance,
    s: &LaurentSeries,
    samples: [i32; 4],
    check: i32,
) -> Result<IndicialPolynomial> {
    let eq = bal.equation(eq)?;
    let mut vals = [Complex::ZERO; 4];
    for (v, &j) in vals.iter_mut().zip(&samples) {
        *v = slope_at(&eq, bal, s, j)?;
    }
    let xs = samples.map(|j| j as f64);
    let cubic = interpolate_cubic(&xs, &vals);
    let expected = slope_at(&eq, bal, s, check)?;
    let got = cubic.eval(c64(check as f64, 0.0));
    let rel = (got - expected).norm() / expected.norm().max(f64::MIN_POSITIVE);
    if rel > 1e-6 {
        return Err(Error::InterpolationUnstable(rel));
    }
    let lead = cubic.coeff(3);
    let coeffs = [0, 1, 2, 3].map(|i| cubic.coeff(i) / lead);
    Ok(IndicialPolynomial::from_coeffs(coeffs))
}

pub fn indicial_polynomial(
    eq: &SchwarzianEquation,
    bal: &DominantBalance,
    s: &LaurentSeries,
) -> Result<IndicialPolynomial> {
    indicial_polynomial_from(eq, bal, s, INDICIAL_SAMPLES, INDICIAL_CHECK)
}

/// Lagrange interpolation through four points, expanded to monomials.
fn interpolate_cubic(xs: &[f64; 4], ys: &[Complex; 4]) -> Poly {
    let mut acc = Poly::zero();
    for i in 0..4 {
        let mut basis = Poly::constant(ys[i]);
        for (j, &xj) in xs.iter().enumerate() {
            if j != i {
                basis =
                    &basis * &Poly::linear_factor(c64(xj, 0.0)).scale(c64(1.0 / (xs[i] - xj), 0.0));
            }
        }
        acc = &acc + &basis;
    }
    acc
}

/// Whether the compatibility condition at an integer resonance `j` holds
/// for the local series `s` (in the balance's variable).
pub fn resonance_condition_holds(
    eq: &SchwarzianEquation,
    bal: &DominantBalance,
    s: &LaurentSeries,
    j: i32,
) -> Result<bool> {
    let eq = bal.equation(eq)?;
    let need = j as usize;
    if s.len() < need {
        return Err(Error::InsufficientTerms {
            have: s.len(),
            need,
        });
    }
    let (c0, _, scale) = order_k(&eq, bal.q, &s.coeffs()[..need])?;
    Ok(c0.norm() <= SOLVE_TOL * scale)
}

fn as_positive_integer(j: Complex) -> Option<i32> {
    let r = j.re.round();
    ((j - r).norm() < 1e-6 && r >= 1.0).then_some(r as i32)
}

/// Number of free constants in the local solution: one for the pole
/// position, plus one per positive integer index whose compatibility
/// condition holds.
pub fn free_constant_count(indices: &[Complex], condition_holds: impl Fn(i32) -> bool) -> usize {
    1 + indices
        .iter()
        .filter_map(|&j| as_positive_integer(j))
        .filter(|&j| condition_holds(j))
        .count()
}

/// Distance from `j` to the nearest integer.
pub fn integer_distance(j: Complex) -> f64 {
    (j - j.re.round()).norm()
}

/// Analysis of one balance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceAnalysis {
    pub balance: DominantBalance,
    pub indicial: IndicialPolynomial,
    #[serde(with = "crate::report::complex_pair")]
    pub k: Complex,
    pub pattern_error: f64,
    /// `|P(−1)|`.
    pub minus_one_residual: f64,
    pub integer_indices: usize,
    pub free_constants: usize,
    /// Smallest distance of a nontrivial index to an integer.
    pub min_integer_distance: f64,
    pub series_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuchsReport {
    pub balances: Vec<BalanceAnalysis>,
    /// Free constants of the general solution when no pole balance exists.
    pub free_constants: usize,
    pub note: Option<String>,
}

pub fn analyze_balance(eq: &SchwarzianEquation, bal: &DominantBalance) -> Result<BalanceAnalysis> {
    let s = local_series(eq, bal, SERIES_TERMS)?;
    let series_residual = back_substitution_residual(eq, bal, &s)?;
    let ip = indicial_polynomial(eq, bal, &s)?;
    let nontrivial = ip.nontrivial_indices();
    let integer_indices = nontrivial
        .iter()
        .filter(|j| integer_distance(**j) < 1e-6)
        .count();
    let free_constants = free_constant_count(&nontrivial, |j| {
        resonance_condition_holds(eq, bal, &s, j).unwrap_or(false)
    });
    Ok(BalanceAnalysis {
        balance: *bal,
        k: ip.k_value(),
        pattern_error: ip.pattern_error(),
        minus_one_residual: ip.eval(c64(-1.0, 0.0)).norm(),
        integer_indices,
        free_constants,
        min_integer_distance: nontrivial
            .iter()
            .map(|j| integer_distance(*j))
            .fold(f64::INFINITY, f64::min),
        series_residual,
        indicial: ip,
    })
}

pub fn fuchs_report(eq: &SchwarzianEquation) -> Result<FuchsReport> {
    let balances = match dominant_balances(eq) {
        Ok(b) => b,
        Err(Error::NoBalanceFound) if eq.rhs().is_constant() => {
            return Ok(FuchsReport {
                balances: Vec::new(),
                free_constants: 3,
                note: Some(
                    "constant right side: no pole balance; the general solution \
                     (c1 e^(az) + c2)/(c3 e^(az) + c4) carries three parameters"
                        .into(),
                ),
            })
        }
        Err(e) => return Err(e),
    };
    let analyses = balances
        .iter()
        .map(|b| analyze_balance(eq, b))
        .collect::<Result<Vec<_>>>()?;
    let free_constants = analyses.iter().map(|a| a.free_constants).max().unwrap_or(0);
    Ok(FuchsReport {
        balances: analyses,
        free_constants,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schwarzian::{CanonicalRow, RowParams};
    use crate::weierstrass::wp_series;

    fn re(x: f64) -> Complex {
        c64(x, 0.0)
    }

    fn row(index: usize) -> CanonicalRow {
        CanonicalRow::with_defaults(index, 42).unwrap()
    }

    fn row5(a: Complex) -> CanonicalRow {
        let mut p = RowParams::defaults(5, 0);
        p.a = a;
        CanonicalRow::new(5, p).unwrap()
    }

    #[test]
    fn leading_balances() {
        let b = dominant_balances(&row(1).eq).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].q, -2);
        assert!((b[0].u0 - re(1.0)).norm() < 1e-12);

        let b = dominant_balances(&row(2).eq).unwrap();
        assert!(b.iter().all(|x| x.q == -3));
        assert!(b.iter().any(|x| (x.u0 - re(-2.0)).norm() < 1e-12));

        for (index, q) in [(3, -4), (4, -6)] {
            let b = dominant_balances(&row(index).eq).unwrap();
            assert_eq!((b.len(), b[0].q), (1, q));
            assert!((b[0].u0 - re(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn chart_balance_for_hyperbolic_row() {
        for a in [re(1.0), re(2.0), c64(1.0, 0.3)] {
            let b = dominant_balances(&row5(a).eq).unwrap();
            let tau = c64(0.0, 1.0) * a;
            let hit = b
                .iter()
                .find(|x| (x.tau.unwrap() - tau).norm() < 1e-9)
                .expect("balance in chart 1/(u - ia)");
            assert_eq!(hit.q, -2);
            let expect = c64(0.0, 2.0) / a.powu(3);
            assert!(
                (hit.u0 - expect).norm() < 1e-9 * expect.norm(),
                "{} vs {expect}",
                hit.u0
            );
        }
    }

    #[test]
    fn constant_right_side_has_no_balance() {
        assert!(matches!(
            dominant_balances(&row(6).eq),
            Err(Error::NoBalanceFound)
        ));
        let rep = fuchs_report(&row(6).eq).unwrap();
        assert!(rep.balances.is_empty());
        assert_eq!(rep.free_constants, 3);
    }

    #[test]
    fn local_series_reproduces_wp() {
        let r = row(1);
        let bal = dominant_balances(&r.eq).unwrap()[0];
        let s = local_series(&r.eq, &bal, 12).unwrap();
        let wp = wp_series(r.family.invariants(), 8);
        for e in -2..10 {
            let (a, b) = (s.coeff(e).unwrap(), wp.coeff(e).unwrap());
            assert!(
                (a - b).norm() < 1e-12 * (1.0 + b.norm()),
                "z^{e}: {a} vs {b}"
            );
        }
        assert!(back_substitution_residual(&r.eq, &bal, &s).unwrap() < 1e-9);
    }

    #[test]
    fn local_series_leading_terms() {
        let r = row(3);
        let bal = dominant_balances(&r.eq).unwrap()[0];
        let s = local_series(&r.eq, &bal, 8).unwrap();
        assert_eq!(s.lead_exp(), -4);
        assert!((s.leading().unwrap() - re(1.0)).norm() < 1e-12);
        for index in 1..=5 {
            let r = row(index);
            for bal in dominant_balances(&r.eq).unwrap() {
                let s = local_series(&r.eq, &bal, 8).unwrap();
                assert!(
                    back_substitution_residual(&r.eq, &bal, &s).unwrap() < 1e-9,
                    "row {index}"
                );
            }
        }
    }

    #[test]
    fn indicial_cubics() {
        for (index, k) in [(1, 3.0), (2, 8.0), (3, 15.0), (4, 35.0), (5, 3.0)] {
            let r = row(index);
            for bal in dominant_balances(&r.eq).unwrap() {
                let a = analyze_balance(&r.eq, &bal).unwrap();
                assert!((a.k - re(k)).norm() < 1e-8, "row {index}: K = {}", a.k);
                assert!(
                    a.pattern_error < 1e-8,
                    "row {index}: {:?}",
                    a.indicial.coeffs
                );
                assert!(a.minus_one_residual < 1e-8);
                assert!((a.indicial.roots[0] + 1.0).norm() < 1e-8);
                assert_eq!(a.integer_indices, 0);
                assert!(a.min_integer_distance > 0.2);
                assert_eq!(a.free_constants, 1);
            }
        }
    }

    #[test]
    fn row_one_indices_by_quadratic_formula() {
        let r = row(1);
        let bal = dominant_balances(&r.eq).unwrap()[0];
        let a = analyze_balance(&r.eq, &bal).unwrap();
        let s13 = 13f64.sqrt();
        assert!((a.indicial.roots[1] - re((1.0 + s13) / 2.0)).norm() < 1e-8);
        assert!((a.indicial.roots[2] - re((1.0 - s13) / 2.0)).norm() < 1e-8);
        // Vieta
        let [r0, r1, r2] = a.indicial.roots;
        assert!((r0 + r1 + r2 + a.indicial.coeffs[2]).norm() < 1e-8);
        assert!((r0 * r1 * r2 + a.indicial.coeffs[0]).norm() < 1e-8);
    }

    #[test]
    fn indicial_cubic_does_not_depend_on_samples() {
        for index in [1, 2, 4, 5] {
            let r = row(index);
            let bal = dominant_balances(&r.eq).unwrap()[0];
            let s = local_series(&r.eq, &bal, 20).unwrap();
            let a = indicial_polynomial_from(&r.eq, &bal, &s, [4, 5, 6, 7], 8).unwrap();
            let b = indicial_polynomial_from(&r.eq, &bal, &s, [15, 16, 17, 18], 19).unwrap();
            for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
                assert!(
                    (x - y).norm() < 1e-8,
                    "row {index}: {:?} vs {:?}",
                    a.coeffs,
                    b.coeffs
                );
            }
        }
    }

    #[test]
    fn short_series_is_rejected() {
        let r = row(1);
        let bal = dominant_balances(&r.eq).unwrap()[0];
        let s = local_series(&r.eq, &bal, 6).unwrap();
        assert!(matches!(
            indicial_polynomial(&r.eq, &bal, &s),
            Err(Error::InsufficientTerms { .. })
        ));
    }

    #[test]
    fn counting_rule_with_integer_resonances() {
        // indices −1, 2, 5: both compatibility conditions pass → 3 constants
        let idx = [re(-1.0), re(2.0), re(5.0)];
        assert_eq!(free_constant_count(&idx, |_| true), 3);
        assert_eq!(free_constant_count(&idx, |j| j == 2), 2);
        assert_eq!(free_constant_count(&idx, |_| false), 1);
        let irrational = [re(-1.0), re(2.302_775_637_7), re(-1.302_775_637_7)];
        assert_eq!(free_constant_count(&irrational, |_| true), 1);
    }
}
