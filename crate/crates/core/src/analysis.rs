//! Charge estimation and numerical checks of the singularity classification.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{integrate_values, polyharmonic_apply, BallIntegral};
use crate::error::{Error, Result};
use crate::field::{ChargeVector, RadialField};
use crate::greens::{exp_integrability_threshold, martinazzi_constant, navier_solve, NavierOptions, SingularBasis};
use crate::grid::RadialGrid;
use crate::nonlinearity::{classify_growth, Nonlinearity, Weight};

/// Fewest nodes accepted in a fit window.
pub const MIN_FIT_NODES: usize = 8;
/// Largest accepted condition number of the normal equations.
pub const MAX_NORMAL_CONDITION: f64 = 1e10;
/// Largest exponent evaluated before an integrand is flagged as overflowing.
pub const EXPONENT_CAP: f64 = 700.0;
/// Upper end of the `t` range sampled when a check needs a growth class.
const CLASSIFY_T_MAX: f64 = 1e3;

/// Least-squares coefficients of `u ≈ Σ charges[i] G_{m-i} + constant` near the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticFit {
    /// `charges[0]` multiplies `G_m` (the `δ₀` charge), `charges[1]` multiplies `G_{m-1}`.
    pub charges: Vec<f64>,
    pub constant: f64,
    pub window: (f64, f64),
    /// RMS misfit over the window, in the units of `u`.
    pub residual: f64,
    pub nodes: usize,
    pub condition: f64,
}

impl AsymptoticFit {
    pub fn alpha(&self) -> f64 {
        self.charges[0]
    }

    pub fn beta(&self) -> f64 {
        self.charges.get(1).copied().unwrap_or(0.0)
    }
}

/// Fits the nodal values of `u` on `window` (default `[ε, 10ε]`) against
/// `{G_m, …, G_1, 1}`.
pub fn estimate_charges(u: &RadialField, window: Option<(f64, f64)>) -> Result<AsymptoticFit> {
    let grid = u.grid();
    let m = grid.order();
    let basis = match u.basis() {
        Some(b) => b,
        None => SingularBasis::for_grid(grid)?,
    };
    let eps = grid.inner_cutoff();
    let (lo, hi) = window.unwrap_or((eps, 10.0 * eps));
    if !(lo >= eps * (1.0 - 1e-12) && hi <= grid.radius() && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "fit window [{lo}, {hi}] must lie inside [{eps}, {}]",
            grid.radius()
        )));
    }
    let idx = grid.window(lo, hi);
    if idx.len() < MIN_FIT_NODES {
        return Err(Error::InsufficientResolution(format!(
            "{} nodes in the fit window, need {MIN_FIT_NODES}",
            idx.len()
        )));
    }
    let x = grid.nodes();
    let cols = m + 1;
    let rows = idx.len();
    // column j < m holds G_{m-j}; the last column is the constant
    let column = |j: usize, r: f64| if j < m { basis.value(m - j, r) } else { 1.0 };
    let mut a = DMatrix::from_fn(rows, cols, |i, j| column(j, x[idx.start + i]));
    let scales: Vec<f64> = (0..cols)
        .map(|j| a.column(j).iter().fold(0.0f64, |s, v| s.max(v.abs())))
        .collect();
    for (j, &s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }
    let y = DVector::from_iterator(rows, idx.clone().map(|i| u.value(i)));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(condition < MAX_NORMAL_CONDITION) {
        return Err(Error::RankDeficient { condition });
    }
    let c = svd
        .solve(&y, smax * f64::EPSILON)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let misfit = &y - &a * &c;
    let residual = (misfit.norm_squared() / rows as f64).sqrt();
    let coef: Vec<f64> = (0..cols).map(|j| c[j] / scales[j]).collect();
    Ok(AsymptoticFit {
        charges: coef[..m].to_vec(),
        constant: coef[m],
        window: (lo, hi),
        residual,
        nodes: rows,
        condition,
    })
}

/// Outcome of a divergence-based classification check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeCheck {
    pub applicable: bool,
    /// Why the check's precondition fails, if it does.
    pub reason: Option<String>,
    pub diverged: bool,
    pub integral: BallIntegral,
    pub gamma_used: Option<f64>,
    /// Same check with the undamped lower bound.
    pub sensitivity: Option<BallIntegral>,
}

fn growth_t_max(f: &Nonlinearity) -> f64 {
    f.table_range().map_or(CLASSIFY_T_MAX, |(_, hi)| hi.min(CLASSIFY_T_MAX))
}

/// A nonzero `Δδ₀` charge forces `u >= 2β G_{m-1}` near the origin
/// (`β / (2π² r²)` in `ℝ⁴`); for superquadratic `f` the integral of
/// `a f(2β G_{m-1})` then diverges, so `β` must vanish.
pub fn beta_vanishing_check(f: &Nonlinearity, a: &Weight, beta: f64, grid: &RadialGrid) -> Result<ChargeCheck> {
    let m = grid.order();
    if m < 2 {
        return Err(Error::InvalidArgument("the check needs m >= 2".into()));
    }
    let basis = SingularBasis::for_grid(grid)?;
    let mut reason = None;
    if !(beta > 0.0) {
        reason = Some(format!("beta = {beta} is not positive"));
    }
    let t_max = growth_t_max(f);
    if t_max >= 10.0 {
        if !classify_growth(f, t_max)?.superquadratic {
            reason.get_or_insert_with(|| "f is not superquadratic".into());
        }
    } else {
        reason.get_or_insert_with(|| "table too short to classify growth".into());
    }
    let values = grid
        .nodes()
        .iter()
        .map(|&r| Ok(a.value(r) * f.eval(2.0 * beta * basis.value(m - 1, r))?))
        .collect::<Result<Vec<_>>>()?;
    let integral = integrate_values(grid, &values)?;
    Ok(ChargeCheck {
        applicable: reason.is_none(),
        reason,
        diverged: integral.diverged,
        integral,
        gamma_used: None,
        sensitivity: None,
    })
}

fn exp_profile(grid: &RadialGrid, a: &Weight, exponent: impl Fn(f64) -> f64) -> Result<BallIntegral> {
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let e = exponent(r);
            if e > EXPONENT_CAP {
                f64::INFINITY
            } else {
                a.value(r) * e.exp()
            }
        })
        .collect();
    integrate_values(grid, &values)
}

/// A nonzero `δ₀` charge forces `u >= (α/2) G_m` near the origin. With
/// `γ = 2N / (α c_m)` (`64π²/α` in `ℝ⁴`) the profile `a e^(γ u)` is at
/// least `a r^(-N)`, whose divergence rules out super-exponential `f`.
/// The sensitivity variant uses the full `α G_m`.
pub fn alpha_removability_check(f: &Nonlinearity, a: &Weight, alpha: f64, grid: &RadialGrid) -> Result<ChargeCheck> {
    let n = grid.dimension();
    let m = grid.order();
    let cm = SingularBasis::new(n, 1.0)?.coefficient(m);
    let mut reason = None;
    if !(alpha > 0.0) {
        reason = Some(format!("alpha = {alpha} is not positive"));
    }
    let t_max = growth_t_max(f);
    if t_max >= 10.0 {
        if !classify_growth(f, t_max)?.super_exponential {
            reason.get_or_insert_with(|| "f is not super-exponential".into());
        }
    } else {
        reason.get_or_insert_with(|| "table too short to classify growth".into());
    }
    if !(alpha > 0.0) {
        let zero = integrate_values(grid, &vec![0.0; grid.len()])?;
        return Ok(ChargeCheck {
            applicable: false,
            reason,
            diverged: false,
            integral: zero,
            gamma_used: None,
            sensitivity: None,
        });
    }
    let gamma = 2.0 * n as f64 / (alpha * cm);
    let lower = |r: f64, k: f64| k * alpha * cm * (1.0 / r).ln();
    let integral = exp_profile(grid, a, |r| gamma * lower(r, 0.5))?;
    let sensitivity = exp_profile(grid, a, |r| gamma * lower(r, 1.0))?;
    Ok(ChargeCheck {
        applicable: reason.is_none(),
        reason,
        diverged: integral.diverged,
        integral,
        gamma_used: Some(gamma),
        sensitivity: Some(sensitivity),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpIntegrability {
    /// `∫ exp(δ |h| / ‖f‖₁)`; infinite when divergent or overflowing.
    pub value: f64,
    pub admissible: bool,
    /// `2m γ_m`; `32π²` for `m = 2`.
    pub threshold: f64,
    pub martinazzi_constant: f64,
    pub overflow: bool,
    pub diverged: bool,
}

impl ExpIntegrability {
    pub fn finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// Integrates `exp(δ |h| / l1_norm)` over the ball. `admissible` records
/// whether `δ` lies below the sharp threshold `2m γ_m`.
pub fn exp_integrability_check(h: &RadialField, l1_norm: f64, delta: f64, m: usize) -> Result<ExpIntegrability> {
    if !(l1_norm > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidArgument("l1_norm and delta must be positive".into()));
    }
    if h.grid().dimension() != 2 * m {
        return Err(Error::InvalidArgument(format!("m = {m} does not match the grid dimension")));
    }
    let gm = martinazzi_constant(m);
    let threshold = exp_integrability_threshold(m);
    let exponents: Vec<f64> = h.values().iter().map(|v| delta * v.abs() / l1_norm).collect();
    let overflow = exponents.iter().any(|&e| !(e <= EXPONENT_CAP));
    let (value, diverged) = if overflow {
        (f64::INFINITY, false)
    } else {
        let values: Vec<f64> = exponents.iter().map(|e| e.exp()).collect();
        let b = integrate_values(h.grid(), &values)?;
        (if b.diverged { f64::INFINITY } else { b.value }, b.diverged)
    };
    Ok(ExpIntegrability {
        value,
        admissible: delta < threshold,
        threshold,
        martinazzi_constant: gm,
        overflow,
        diverged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpMoment {
    pub l: f64,
    pub value: f64,
    pub finite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub moments: Vec<ExpMoment>,
    /// Exponent `r = √k` of the Hölder split, `k` the weight's integrability exponent.
    pub holder_exponent: f64,
    /// `∫ (a f(u))^r`.
    pub holder_integral: f64,
    pub holder_finite: bool,
    pub sup_norm: f64,
}

fn exp_moment(u: &RadialField, l: f64) -> Result<ExpMoment> {
    let e: Vec<f64> = u.values().iter().map(|v| l * v.abs()).collect();
    if e.iter().any(|&x| !(x <= EXPONENT_CAP)) {
        return Ok(ExpMoment { l, value: f64::INFINITY, finite: false });
    }
    let vals: Vec<f64> = e.iter().map(|x| x.exp()).collect();
    let b = integrate_values(u.grid(), &vals)?;
    let finite = !b.diverged;
    Ok(ExpMoment { l, value: if finite { b.value } else { f64::INFINITY }, finite })
}

/// Integrability ladder behind the boundedness of solutions with zero
/// charges: `∫ e^(l|u|)` for `l ∈ {1, 2γ, 4γ}`, the Hölder-split integral
/// `∫ (a f(u))^r` with `r = √k`, and `sup |u|`.
pub fn regularity_bootstrap_check(u: &RadialField, f: &Nonlinearity, a: &Weight, gamma: f64) -> Result<RegularityReport> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let m = u.grid().order();
    let k = a
        .witness_exponent(m)
        .ok_or_else(|| Error::Hypothesis { name: "H2".into(), detail: "no admissible exponent".into() })?;
    let moments = [1.0, 2.0 * gamma, 4.0 * gamma]
        .into_iter()
        .map(|l| exp_moment(u, l))
        .collect::<Result<Vec<_>>>()?;
    let r_exp = k.sqrt();
    let x = u.grid().nodes();
    let vals = (0..x.len())
        .map(|i| Ok((a.value(x[i]) * f.eval(u.value(i))?).abs().powf(r_exp)))
        .collect::<Result<Vec<_>>>()?;
    let (holder_integral, holder_finite) = match integrate_values(u.grid(), &vals) {
        Ok(b) if !b.diverged => (b.value, true),
        Ok(_) | Err(Error::NonFinite { .. }) => (f64::INFINITY, false),
        Err(e) => return Err(e),
    };
    Ok(RegularityReport {
        moments,
        holder_exponent: r_exp,
        holder_integral,
        holder_finite,
        sup_norm: u.sup_norm(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub seed: u64,
    pub level: usize,
    pub node: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub trials: usize,
    pub seed: u64,
    pub failures: Vec<TrialFailure>,
}

/// Number of smooth basis functions mixed into each random right-hand side.
const RHS_BASIS: usize = 6;

fn rhs_basis(j: usize, r: f64, radius: f64) -> f64 {
    let x = r / radius;
    match j {
        0..=3 => x.powi(2 * j as i32),
        4 => (-10.0 * x * x).exp(),
        _ => (0.5 * std::f64::consts::PI * x).cos().powi(2),
    }
}

/// Seed of trial `k` in a suite started from `seed`.
pub fn trial_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(k as u64)
}

/// Checks `(-Δ)^k u >= 0` for every level of a Navier solve with a random
/// nonnegative smooth right-hand side and zero charges.
pub fn comparison_trial(grid: &Arc<RadialGrid>, seed: u64) -> Result<Option<(usize, usize, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..RHS_BASIS)
        .map(|_| rng.gen::<f64>() * 10f64.powf(rng.gen_range(-3.0..3.0)))
        .collect();
    let radius = grid.radius();
    let rhs = RadialField::from_fn(Arc::clone(grid), |r| {
        coeffs.iter().enumerate().map(|(j, c)| c * rhs_basis(j, r, radius)).sum()
    })?;
    let m = grid.order();
    let sol = navier_solve(m, &rhs, &ChargeVector::zeros(m), &NavierOptions::default())?;
    for (k, level) in sol.levels.iter().enumerate() {
        let vals = level.values();
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if let Some(i) = vals.iter().position(|&v| v < -1e-12 * scale) {
            return Ok(Some((k, i, vals[i])));
        }
    }
    Ok(None)
}

/// Runs [`comparison_trial`] `trials` times with seeds `seed, seed + 1, …`.
pub fn comparison_property_check(trials: usize, grid: &Arc<RadialGrid>, seed: u64) -> Result<PropertyReport> {
    let mut failures = Vec::new();
    for trial in 0..trials {
        let s = trial_seed(seed, trial);
        if let Some((level, node, value)) = comparison_trial(grid, s)? {
            failures.push(TrialFailure { trial, seed: s, level, node, value });
        }
    }
    Ok(PropertyReport { trials, seed, failures })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogExample {
    pub mu: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub max_rel_residual: f64,
    pub nodes: usize,
}

/// `Δ²w` for `w = (-4 log r)^(1/μ)` in `ℝ⁴` against the closed form
/// `b₁ e^(w^μ) w^(1-4μ) [b₂ w^(2μ) - b₃]`.
///
/// With `s = log r`, `Δ²g = r⁻⁴ (g'''' - 4g'')` for radial `g`, and each
/// `d/ds` maps `c (4L)^e` to `-4ce (4L)^(e-1)`, `L = -s`. The constants
/// follow from that recursion with `b₂ = 1`. The residual is taken on nodes
/// clear of the one-sided end stencils.
pub fn verify_log_example(mu: f64, grid: &Arc<RadialGrid>) -> Result<LogExample> {
    if !(mu > 1.0) {
        return Err(Error::InvalidArgument(format!("mu must exceed 1, got {mu}")));
    }
    if grid.dimension() != 4 {
        return Err(Error::InvalidArgument("the example lives in dimension 4".into()));
    }
    if grid.radius() > (-0.25f64).exp() {
        return Err(Error::InvalidArgument(format!(
            "grid radius {} exceeds e^(-1/4)",
            grid.radius()
        )));
    }
    let (b1, b2, b3) = log_example_constants(mu);
    let w = RadialField::from_fn(Arc::clone(grid), |r| (-4.0 * r.ln()).powf(1.0 / mu))?;
    let d = polyharmonic_apply(&w, 2)?;
    let x = grid.nodes();
    let n = x.len();
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        let wi = w.value(i);
        let exact = b1 * wi.powf(mu).exp() * wi.powf(1.0 - 4.0 * mu) * (b2 * wi.powf(2.0 * mu) - b3);
        worst = worst.max(((d.value(i) - exact) / exact).abs());
    }
    Ok(LogExample { mu, b1, b2, b3, max_rel_residual: worst, nodes: n })
}

/// `(b₁, b₂, b₃)` with `b₂ = 1`; `(16, 1, 15)` for `μ = 2`.
pub fn log_example_constants(mu: f64) -> (f64, f64, f64) {
    // d^k/ds^k (4L)^e = (-4)^k e (e-1)…(e-k+1) (4L)^(e-k)
    let e = 1.0 / mu;
    let falling = |k: usize| (0..k).map(|j| e - j as f64).product::<f64>();
    let second = 16.0 * falling(2);
    let fourth = 256.0 * falling(4);
    // Δ²w = r⁻⁴ (fourth w^(1-4μ) - 4 second w^(1-2μ))
    let b1 = -4.0 * second;
    (b1, 1.0, -fourth / b1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn geo(n: usize, eps: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::geometric_with_cutoff(4, 1.0, n, eps).unwrap())
    }

    #[test]
    fn exact_basis_recovery() {
        let grid = geo(256, 1e-6);
        let b = SingularBasis::for_grid(&grid).unwrap();
        let u = RadialField::from_fn(grid.clone(), |r| 3.0 * b.value(2, r) + 7.0).unwrap();
        let fit = estimate_charges(&u, None).unwrap();
        assert!((fit.alpha() - 3.0).abs() < 1e-8);
        assert!(fit.beta().abs() < 1e-8);
        assert!((fit.constant - 7.0).abs() < 1e-8);
    }

    #[test]
    fn fit_with_smooth_tail() {
        let grid = geo(256, 1e-6);
        let b = SingularBasis::for_grid(&grid).unwrap();
        let u = RadialField::from_fn(grid.clone(), |r| 2.0 * b.value(2, r) + 5.0 * b.value(1, r) + r * r).unwrap();
        let fit = estimate_charges(&u, None).unwrap();
        assert!((fit.alpha() - 2.0).abs() < 0.02);
        assert!((fit.beta() - 5.0).abs() < 0.05);
    }

    #[test]
    fn fit_rejects_narrow_windows() {
        let grid = geo(32, 1e-6);
        let u = RadialField::zeros(grid.clone());
        assert!(matches!(estimate_charges(&u, None), Err(Error::InsufficientResolution(_))));
        let dense = geo(4096, 1e-6);
        let u = RadialField::zeros(dense.clone());
        let lo = dense.nodes()[100];
        let hi = dense.nodes()[110];
        assert!(matches!(estimate_charges(&u, Some((lo, hi))), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn beta_check_cases() {
        let grid = geo(256, 1e-6);
        let one = Weight::constant(1.0);
        let sq = beta_vanishing_check(&Nonlinearity::power(2.0), &one, 1.0, &grid).unwrap();
        assert!(sq.applicable && sq.diverged);
        let lin = beta_vanishing_check(&Nonlinearity::power(1.0), &one, 1.0, &grid).unwrap();
        assert!(!lin.applicable && !lin.diverged);
        let zero = beta_vanishing_check(&Nonlinearity::power(2.0), &one, 0.0, &grid).unwrap();
        assert!(!zero.applicable && !zero.diverged);
    }

    #[test]
    fn alpha_check_cases() {
        let grid = geo(256, 1e-6);
        let a = Weight::power_law(-0.5);
        let es = Nonlinearity::exp_power(2.0);
        for alpha in [0.1, 1.0, 10.0] {
            let c = alpha_removability_check(&es, &a, alpha, &grid).unwrap();
            assert!(c.applicable && c.diverged);
            assert!((c.gamma_used.unwrap() - 64.0 * PI * PI / alpha).abs() < 1e-9 * c.gamma_used.unwrap());
        }
        let none = alpha_removability_check(&es, &a, 0.0, &grid).unwrap();
        assert!(!none.applicable && !none.diverged);
        let sub = alpha_removability_check(&Nonlinearity::power(3.0), &a, 1.0, &grid).unwrap();
        assert!(!sub.applicable);
        assert!(sub.reason.unwrap().contains("super-exponential"));
    }

    #[test]
    fn exp_integrability_of_zero() {
        let grid = geo(256, 1e-6);
        let z = RadialField::zeros(grid.clone());
        let r = exp_integrability_check(&z, 1.0, 16.0 * PI * PI, 2).unwrap();
        assert!((r.value - PI * PI / 2.0).abs() < 1e-6);
        assert!(r.admissible);
        assert!((r.threshold - 32.0 * PI * PI).abs() < 1e-9);
        assert!(!exp_integrability_check(&z, 1.0, 33.0 * PI * PI, 2).unwrap().admissible);
    }

    #[test]
    fn log_singularity_breaks_regularity() {
        // e^(l c |log r|) = r^(-lc): divergent once lc >= 4
        let grid = geo(512, 1e-8);
        let c = 2.0;
        let u = RadialField::from_fn(grid.clone(), |r| -c * r.ln()).unwrap();
        for (l, finite) in [(1.0, true), (1.9, true), (2.0, false), (3.0, false)] {
            let m = exp_moment(&u, l).unwrap();
            assert_eq!(m.finite, finite, "l = {l}");
        }
    }

    #[test]
    fn regularity_of_zero() {
        let grid = geo(256, 1e-6);
        let z = RadialField::zeros(grid.clone());
        let r = regularity_bootstrap_check(&z, &Nonlinearity::power(2.0), &Weight::power_law(-1.0), 1.0).unwrap();
        for m in &r.moments {
            assert!(m.finite && (m.value - PI * PI / 2.0).abs() < 1e-6);
        }
        assert_eq!(r.sup_norm, 0.0);
        assert!(r.holder_finite);
    }

    #[test]
    fn comparison_suite_small() {
        let grid = geo(128, 1e-6);
        let rep = comparison_property_check(10, &grid, 7).unwrap();
        assert!(rep.failures.is_empty());
        let grid6 = Arc::new(RadialGrid::geometric_with_cutoff(6, 1.0, 128, 1e-4).unwrap());
        assert!(comparison_property_check(5, &grid6, 1).unwrap().failures.is_empty());
    }

    #[test]
    fn log_example_constants_for_mu_two() {
        let (b1, b2, b3) = log_example_constants(2.0);
        assert!((b1 - 16.0).abs() < 1e-12 && b2 == 1.0 && (b3 - 15.0).abs() < 1e-12);
        for mu in [1.5, 3.0, 7.0] {
            let (b1, _, b3) = log_example_constants(mu);
            assert!(b1 > 0.0 && b3 > 0.0, "mu = {mu}");
        }
    }

    #[test]
    fn log_example_preconditions() {
        let g = Arc::new(RadialGrid::geometric_with_cutoff(4, 0.1, 64, 1e-3).unwrap());
        assert!(verify_log_example(1.0, &g).is_err());
        assert!(verify_log_example(2.0, &geo(64, 1e-3)).is_err());
    }
}
