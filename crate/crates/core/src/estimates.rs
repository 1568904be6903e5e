//! Rate fitting, two-sided equivalence checks and inequality margins.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent f64 math shadows the trait when std is linked (tests)
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::lp::{DyadicPartition, GridFunction};
use crate::norms::{besov_norm_lp, lp_norm, BesovParams, Exponent};

/// Least-squares line through `(ln param, ln value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|fit - value| / value` over the data.
    pub max_relative_residual: f64,
}

impl RateFit {
    pub fn predict(&self, param: f64) -> f64 {
        (self.intercept + self.slope * param.ln()).exp()
    }
}

pub fn fit_loglog_slope(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 4 {
        return Err(invalid!("a rate fit needs at least 4 points, got {}", pairs.len()));
    }
    if pairs.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(invalid!("fit parameters must be strictly increasing"));
    }
    if let Some((x, y)) = pairs.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(invalid!("log-log fit needs positive finite data, got ({x}, {y})"));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_relative_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| ((intercept + slope * x - y).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        params: pairs.iter().map(|p| p.0).collect(),
        values: pairs.iter().map(|p| p.1).collect(),
        slope,
        intercept,
        max_relative_residual,
    })
}

/// Outcome of a two-sided bound `1/C <= value / ref <= C` for some common `ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSided {
    pub min: f64,
    pub max: f64,
    pub budget: f64,
    pub pass: bool,
}

impl TwoSided {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

/// Passes iff `max / min <= C^2`.
pub fn check_two_sided(values: &[f64], budget: f64) -> Result<TwoSided> {
    if values.is_empty() {
        return Err(invalid!("two-sided check needs at least one value"));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(invalid!("two-sided check needs positive values, got {v}"));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(0.0, f64::max);
    Ok(TwoSided { min, max, budget, pass: max / min <= budget * budget })
}

/// `left <= constant * right_unit`, reported as `margin = constant * right_unit / left`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityMargin {
    pub left: f64,
    pub right: f64,
    pub margin: f64,
    pub pass: bool,
}

impl InequalityMargin {
    pub fn new(left: f64, right_unit: f64, constant: f64) -> Self {
        let right = constant * right_unit;
        let margin = if left == 0.0 { f64::INFINITY } else { right / left };
        // ties up to rounding count as satisfied
        Self { left, right, margin, pass: margin >= 1.0 - 1e-12 }
    }
}

/// Both sides of an inequality before the constant is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub left: f64,
    pub right_unit: f64,
}

/// The smallest constant that makes every instance hold.
pub fn fit_constant(sides: &[Sides]) -> f64 {
    sides
        .iter()
        .filter(|s| s.left > 0.0)
        .map(|s| s.left / s.right_unit)
        .fold(0.0, f64::max)
}

/// Exponents of `||fg||_{B^s_{p,q}} <= C (||f||_{p1} ||g||_{B^s_{p2,q}} + ||g||_{p3} ||f||_{B^s_{p4,q}})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoserSplit {
    pub p: Exponent,
    pub p1: Exponent,
    pub p2: Exponent,
    pub p3: Exponent,
    pub p4: Exponent,
}

impl MoserSplit {
    /// The split `p1 = p3 = inf`, `p2 = p4 = p = 2`.
    pub fn sup_l2() -> Self {
        let two = Exponent::Finite(2.0);
        Self { p: two, p1: Exponent::Infinity, p2: two, p3: Exponent::Infinity, p4: two }
    }

    fn validate(&self) -> Result<()> {
        let inv = |e: Exponent| 1.0 / e.value();
        let target = inv(self.p);
        if (inv(self.p1) + inv(self.p2) - target).abs() > 1e-12 || (inv(self.p3) + inv(self.p4) - target).abs() > 1e-12 {
            return Err(invalid!("Moser exponents need 1/p = 1/p1 + 1/p2 = 1/p3 + 1/p4"));
        }
        Ok(())
    }
}

pub fn moser_sides(
    f: &GridFunction,
    g: &GridFunction,
    s: f64,
    q: Exponent,
    split: &MoserSplit,
    partition: &DyadicPartition,
) -> Result<Sides> {
    split.validate()?;
    let besov = |h: &GridFunction, p: Exponent| besov_norm_lp(h, &BesovParams::new(s, p, q)?, partition);
    let left = besov(&f.mul(g), split.p)?;
    let right_unit = lp_norm(f, split.p1) * besov(g, split.p2)? + lp_norm(g, split.p3) * besov(f, split.p4)?;
    Ok(Sides { left, right_unit })
}

pub fn verify_moser(
    f: &GridFunction,
    g: &GridFunction,
    s: f64,
    q: Exponent,
    split: &MoserSplit,
    partition: &DyadicPartition,
    constant: f64,
) -> Result<InequalityMargin> {
    let sides = moser_sides(f, g, s, q, split, partition)?;
    Ok(InequalityMargin::new(sides.left, sides.right_unit, constant))
}

/// `||fg||_{B^s_{p,q}}` against `||f|| ||g||`, asserted only for `s > d/p`.
pub fn algebra_sides(f: &GridFunction, g: &GridFunction, prm: &BesovParams, partition: &DyadicPartition) -> Result<Sides> {
    let d = f.grid().dim() as f64;
    if prm.s <= d / prm.p.value() {
        return Err(Error::PreconditionViolation(alloc::format!(
            "the algebra property needs s > d/p, got s = {}, d/p = {}",
            prm.s,
            d / prm.p.value()
        )));
    }
    let left = besov_norm_lp(&f.mul(g), prm, partition)?;
    let right_unit = besov_norm_lp(f, prm, partition)? * besov_norm_lp(g, prm, partition)?;
    Ok(Sides { left, right_unit })
}

pub fn verify_algebra(
    f: &GridFunction,
    g: &GridFunction,
    prm: &BesovParams,
    partition: &DyadicPartition,
    constant: f64,
) -> Result<InequalityMargin> {
    let sides = algebra_sides(f, g, prm, partition)?;
    Ok(InequalityMargin::new(sides.left, sides.right_unit, constant))
}

/// `||f||_{B^s} ` against `||f||_{B^{s1}}^theta ||f||_{B^{s2}}^{1-theta}` with `s = theta s1 + (1-theta) s2`.
pub fn interpolation_sides(
    f: &GridFunction,
    s1: f64,
    s2: f64,
    theta: f64,
    p: Exponent,
    q: Exponent,
    partition: &DyadicPartition,
) -> Result<Sides> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(invalid!("interpolation weight {theta} outside [0, 1]"));
    }
    let s = theta * s1 + (1.0 - theta) * s2;
    let norm = |s: f64| besov_norm_lp(f, &BesovParams::new(s, p, q)?, partition);
    let left = norm(s)?;
    let right_unit = norm(s1)?.powf(theta) * norm(s2)?.powf(1.0 - theta);
    Ok(Sides { left, right_unit })
}

#[allow(clippy::too_many_arguments)]
pub fn verify_interpolation(
    f: &GridFunction,
    s1: f64,
    s2: f64,
    theta: f64,
    p: Exponent,
    q: Exponent,
    partition: &DyadicPartition,
    constant: f64,
) -> Result<InequalityMargin> {
    let sides = interpolation_sides(f, s1, s2, theta, p, q, partition)?;
    Ok(InequalityMargin::new(sides.left, sides.right_unit, constant))
}

fn d1_exponents(s: f64, sigma: f64, delta: f64) -> [f64; 3] {
    [-(s + 1.0 - 2.0 * delta - sigma), -(s - sigma + 1.0 - delta), -(2.0 * s + 2.0 * delta - sigma)]
}

fn check_d1(lambda: f64, sigma: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid!("lambda = {lambda} must be positive"));
    }
    if !(sigma > 1.0) {
        return Err(invalid!("d1 needs sigma > 1, got {sigma}"));
    }
    Ok(())
}

/// `lambda^{-(s+1-2 delta-sigma)} + lambda^{-(s-sigma+1-delta)} + lambda^{-(2s+2 delta-sigma)}`.
pub fn rate_d1(lambda: f64, s: f64, sigma: f64, delta: f64) -> Result<f64> {
    check_d1(lambda, sigma)?;
    Ok(d1_exponents(s, sigma, delta).iter().map(|e| lambda.powf(*e)).sum())
}

/// Largest of the three exponents of `d1`.
pub fn rate_d1_dominant_exponent(s: f64, sigma: f64, delta: f64) -> Result<f64> {
    check_d1(1.0, sigma)?;
    Ok(d1_exponents(s, sigma, delta).into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn check_d2(lambda: f64, s: f64, sigma: f64, delta: f64, k: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid!("lambda = {lambda} must be positive"));
    }
    if !(s > 2.0) {
        return Err(invalid!("d2 needs s > 2, got {s}"));
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(invalid!("d2 needs 0 < delta < 1/2, got {delta}"));
    }
    if !(sigma > 1.0 && sigma < 2.0f64.min(s - 1.0)) {
        return Err(invalid!("d2 needs 1 < sigma < min(2, s - 1), got sigma = {sigma}"));
    }
    if !(k > s) {
        return Err(invalid!("d2 needs k > s, got k = {k}"));
    }
    Ok(())
}

/// `(lambda^{-(1-2 delta)} + lambda^{-(1-delta)} + lambda^{-(s+2 delta)})^{(k-s)/(k-sigma)}`.
pub fn rate_d2(lambda: f64, s: f64, sigma: f64, delta: f64, k: f64) -> Result<f64> {
    check_d2(lambda, s, sigma, delta, k)?;
    let base = lambda.powf(-(1.0 - 2.0 * delta)) + lambda.powf(-(1.0 - delta)) + lambda.powf(-(s + 2.0 * delta));
    Ok(base.powf((k - s) / (k - sigma)))
}

/// `-(1 - 2 delta)(k - s)/(k - sigma)`, the exponent of the leading term of `d2`.
pub fn rate_d2_dominant_exponent(s: f64, sigma: f64, delta: f64, k: f64) -> Result<f64> {
    check_d2(1.0, s, sigma, delta, k)?;
    Ok(-(1.0 - 2.0 * delta) * (k - s) / (k - sigma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let pairs: Vec<(f64, f64)> = (1..=6).map(|i| (i as f64, (i * i) as f64)).collect();
        let fit = fit_loglog_slope(&pairs).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!(fit.max_relative_residual < 1e-12);
        let pairs: Vec<(f64, f64)> = (1..=5).map(|i| (i as f64, 5.0 / i as f64)).collect();
        let fit = fit_loglog_slope(&pairs).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 5.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_data() {
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0), (4.0, 1.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (3.0, 2.0), (2.0, 3.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn two_sided_examples() {
        assert!(check_two_sided(&[1.0, 1.0, 1.0], 1.0).unwrap().pass);
        assert!(check_two_sided(&[0.5, 2.0], 2.0).unwrap().pass);
        assert!(!check_two_sided(&[0.5, 2.1], 2.0).unwrap().pass);
    }

    #[test]
    fn rate_constraints() {
        assert!(rate_d1(8.0, 2.5, 1.0, 0.25).is_err());
        assert!(rate_d2(8.0, 2.5, 1.25, 0.6, 3.0).is_err());
        assert!(rate_d2(8.0, 2.5, 1.6, 0.25, 3.0).is_err());
        assert!(rate_d2(8.0, 2.5, 1.25, 0.25, 2.5).is_err());
        let e = rate_d1_dominant_exponent(2.5, 1.25, 0.25).unwrap();
        assert!((e + 1.75).abs() < 1e-15);
    }
}
