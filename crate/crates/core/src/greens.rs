//! Fundamental solutions and Navier boundary-value solvers on balls.
//!
//! In dimension `N = 2m` the chain `G_1, ..., G_m` with `(-Δ) G_1 = δ₀` and
//! `(-Δ) G_k = G_{k-1}` is
//!
//! ```text
//! G_k(r) = c_k r^(2k - N)     (k < m)
//! G_m(r) = c_m log(s / r)
//! ```
//!
//! where `c_1 = 1 / ((N - 2) |S^(N-1)|)`. `G_1` is the Laplace fundamental
//! solution Γ and `G_m` the polyharmonic one (Φ when `m = 2`). Navier solves
//! keep point charges in this analytic basis; only the regular remainder is
//! discretized.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::solve_tridiagonal;
use crate::calculus::integrate_values;
use crate::error::{Error, Result};
use crate::field::{ChargeVector, RadialField};
use crate::grid::RadialGrid;

pub const DEFAULT_LOG_SCALE: f64 = 5.0;

/// Surface area `|S^(d-1)|` of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * sphere_area(d - 2) / (d - 2) as f64,
    }
}

/// Volume of the ball of radius `r` in `R^d`.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    sphere_area(d) * r.powi(d as i32) / d as f64
}

/// Martinazzi constant `γ_m = ((2m - 1)! / 2) |S^(2m)|`.
pub fn martinazzi_constant(m: usize) -> f64 {
    let fact: f64 = (1..2 * m).map(|k| k as f64).product();
    fact / 2.0 * sphere_area(2 * m + 1)
}

/// Threshold on `δ` for `∫ exp(δ |h| / ||f||₁) < ∞` in `R^(2m)`; `32π²` for `m = 2`.
pub fn exp_integrability_threshold(m: usize) -> f64 {
    2.0 * m as f64 * martinazzi_constant(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Operator {
    Laplace,
    Biharmonic,
    Polyharmonic { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSolution {
    pub operator: Operator,
    pub dimension: usize,
    pub normalization: f64,
    pub log_scale: f64,
}

impl FundamentalSolution {
    pub fn laplace(dimension: usize) -> Result<Self> {
        if dimension < 3 {
            return Err(Error::InvalidArgument(format!(
                "Laplace fundamental solution needs N >= 3, got {dimension}"
            )));
        }
        Ok(Self {
            operator: Operator::Laplace,
            dimension,
            normalization: 1.0 / ((dimension - 2) as f64 * sphere_area(dimension)),
            log_scale: DEFAULT_LOG_SCALE,
        })
    }

    /// Biharmonic fundamental solution. Only `N = 4` carries its true
    /// normalization `1/(8π²)`; other dimensions return the bare profile.
    pub fn biharmonic(dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dimension}")));
        }
        let normalization = if dimension == 4 { 1.0 / (8.0 * PI * PI) } else { 1.0 };
        Ok(Self {
            operator: Operator::Biharmonic,
            dimension,
            normalization,
            log_scale: DEFAULT_LOG_SCALE,
        })
    }

    /// `(-Δ)^m` fundamental solution in `N = 2m`.
    pub fn polyharmonic(m: usize, log_scale: f64) -> Result<Self> {
        let basis = SingularBasis::new(2 * m, log_scale)?;
        Ok(Self {
            operator: Operator::Polyharmonic { m },
            dimension: 2 * m,
            normalization: basis.coefficient(m),
            log_scale,
        })
    }

    pub fn with_log_scale(mut self, log_scale: f64) -> Self {
        self.log_scale = log_scale;
        self
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
        }
        let n = self.dimension as i32;
        let a = self.normalization;
        let s = self.log_scale;
        Ok(match self.operator {
            Operator::Laplace => a * r.powi(2 - n),
            Operator::Biharmonic => match self.dimension {
                2 => a * r * r * (s / r).ln(),
                3 => a * r,
                4 => a * (s / r).ln(),
                _ => a * r.powi(4 - n),
            },
            Operator::Polyharmonic { m } => {
                SingularBasis::new(2 * m, s)?.value(m, r)
            }
        })
    }
}

pub fn fundamental_biharmonic(dimension: usize, r: f64) -> Result<f64> {
    FundamentalSolution::biharmonic(dimension)?.value(r)
}

pub fn fundamental_laplace(dimension: usize, r: f64) -> Result<f64> {
    FundamentalSolution::laplace(dimension)?.value(r)
}

/// The chain `G_1..G_m` in dimension `N = 2m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularBasis {
    dimension: usize,
    log_scale: f64,
}

impl SingularBasis {
    pub fn new(dimension: usize, log_scale: f64) -> Result<Self> {
        if dimension < 4 || !dimension.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "singular basis needs an even dimension >= 4, got {dimension}"
            )));
        }
        if !(log_scale > 0.0) {
            return Err(Error::InvalidArgument(format!("log scale must be positive, got {log_scale}")));
        }
        Ok(Self { dimension, log_scale })
    }

    pub fn for_grid(grid: &RadialGrid) -> Result<Self> {
        Self::new(grid.dimension(), DEFAULT_LOG_SCALE)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn order(&self) -> usize {
        self.dimension / 2
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Normalization `c_k` of `G_k`, `1 <= k <= m`.
    pub fn coefficient(&self, k: usize) -> f64 {
        let n = self.dimension;
        let m = n / 2;
        assert!((1..=m).contains(&k), "basis index {k} outside 1..={m}");
        let mut c = 1.0 / ((n - 2) as f64 * sphere_area(n));
        for j in 2..=k {
            if j < m {
                c /= ((n - 2 * j) * (2 * j - 2)) as f64;
            } else {
                c /= (n - 2) as f64;
            }
        }
        c
    }

    pub fn value(&self, k: usize, r: f64) -> f64 {
        let m = self.order();
        let c = self.coefficient(k);
        if k == m {
            c * (self.log_scale / r).ln()
        } else {
            c * r.powi(2 * k as i32 - self.dimension as i32)
        }
    }

    pub fn derivative(&self, k: usize, r: f64) -> f64 {
        let m = self.order();
        let c = self.coefficient(k);
        if k == m {
            -c / r
        } else {
            let p = 2 * k as i32 - self.dimension as i32;
            c * p as f64 * r.powi(p - 1)
        }
    }
}

/// Solves `-Δv = rhs` on the ball with `v(R) = boundary_value` and zero flux
/// at the origin. The rhs must be a regular field.
///
/// Conservative three-point discretization of `-(r^(N-1) v')' = r^(N-1) rhs`
/// with faces at node midpoints and the innermost cell `[0, face_0]`. The
/// matrix is an M-matrix, so nonnegative data gives nonnegative solutions.
pub fn poisson_solve(rhs: &RadialField, boundary_value: f64) -> Result<RadialField> {
    if rhs.has_singular_part() || rhs.has_point_charges() {
        return Err(Error::InvalidArgument(
            "poisson_solve expects a regular right-hand side".into(),
        ));
    }
    let grid = rhs.grid();
    let r = grid.nodes();
    let n = r.len();
    if n < 3 {
        return Err(Error::InsufficientResolution(format!("{n} nodes")));
    }
    let g = rhs.regular_values();
    if let Some(i) = g.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: i, r: r[i], value: g[i] });
    }
    if !boundary_value.is_finite() {
        return Err(Error::InvalidArgument("boundary value must be finite".into()));
    }
    let abs: Vec<f64> = g.iter().map(|v| v.abs()).collect();
    if integrate_values(grid, &abs)?.diverged {
        return Err(Error::NonIntegrable);
    }

    let dim = grid.dimension() as i32;
    let faces: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let conductance: Vec<f64> = (0..n - 1)
        .map(|i| faces[i].powi(dim - 1) / (r[i + 1] - r[i]))
        .collect();

    let m = n - 1;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut b = vec![0.0; m];
    for i in 0..m {
        let inner_face = if i == 0 { 0.0 } else { faces[i - 1] };
        let volume = (faces[i].powi(dim) - inner_face.powi(dim)) / dim as f64;
        diag[i] = conductance[i];
        upper[i] = -conductance[i];
        if i > 0 {
            diag[i] += conductance[i - 1];
            lower[i] = -conductance[i - 1];
        }
        b[i] = g[i] * volume;
    }
    upper[m - 1] = 0.0;
    b[m - 1] += conductance[m - 1] * boundary_value;

    let mut v = solve_tridiagonal(&lower, &diag, &upper, &b)?;
    v.push(boundary_value);
    // v'(0) = 0 and -Δv ≈ g₀ on the innermost cell.
    let origin = v[0] + g[0] * r[0] * r[0] / (2.0 * dim as f64);
    let mut out = RadialField::regular(Arc::clone(rhs.grid_arc()), v)?;
    out.set_origin_value(Some(origin));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavierOptions {
    /// Re-check `(-Δ)^k u >= 0` for all levels when the data are nonnegative.
    pub validate: bool,
    pub log_scale: f64,
}

impl Default for NavierOptions {
    fn default() -> Self {
        Self { validate: false, log_scale: DEFAULT_LOG_SCALE }
    }
}

/// Output of a Navier solve: `levels[k] = (-Δ)^k u` for `k = 0..m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NavierSolution {
    pub levels: Vec<RadialField>,
    pub charges: ChargeVector,
}

impl NavierSolution {
    pub fn u(&self) -> &RadialField {
        &self.levels[0]
    }

    /// `-Δu`.
    pub fn neg_laplacian(&self) -> &RadialField {
        &self.levels[1]
    }

    pub fn level(&self, k: usize) -> &RadialField {
        &self.levels[k]
    }

    pub fn order(&self) -> usize {
        self.levels.len()
    }

    pub fn into_u(mut self) -> RadialField {
        self.levels.swap_remove(0)
    }
}

/// Solves `(-Δ)^m u = rhs + Σ αᵢ (-Δ)^i δ₀` with homogeneous Navier data
/// `u = Δu = ... = Δ^(m-1) u = 0` at `r = R`.
///
/// The charge `αᵢ` enters as the analytic term `αᵢ G_{m-i}`. The regular
/// remainder is found by `m` nested Poisson solves from `(-Δ)^(m-1) u` down
/// to `u`, each with boundary data cancelling the singular part at `R`.
pub fn navier_solve(
    m: usize,
    rhs: &RadialField,
    charges: &ChargeVector,
    options: &NavierOptions,
) -> Result<NavierSolution> {
    let grid = rhs.grid();
    if m < 1 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if grid.dimension() != 2 * m {
        return Err(Error::InvalidArgument(format!(
            "order m = {m} needs dimension {}, grid has {}",
            2 * m,
            grid.dimension()
        )));
    }
    if charges.len() != m {
        return Err(Error::InvalidArgument(format!(
            "expected {m} charges, got {}",
            charges.len()
        )));
    }
    let basis = SingularBasis::new(grid.dimension(), options.log_scale)?;
    let radius = grid.radius();

    // u singular coefficients: singular[k-1] multiplies G_k.
    let mut u_singular = vec![0.0; m];
    for (i, &a) in charges.iter().enumerate() {
        u_singular[m - i - 1] = a;
    }

    let mut levels: Vec<RadialField> = Vec::with_capacity(m);
    let mut current = rhs.clone();
    for j in (0..m).rev() {
        // (-Δ)^j u: G_k -> G_{k-j} for k > j, G_k -> (-Δ)^(j-k) δ₀ for k <= j.
        let mut singular = vec![0.0; m];
        let mut point = vec![0.0; j];
        for k in 1..=m {
            let c = u_singular[k - 1];
            if k > j {
                singular[k - j - 1] = c;
            } else {
                point[j - k] += c;
            }
        }
        let boundary: f64 = singular
            .iter()
            .enumerate()
            .map(|(idx, &c)| if c == 0.0 { 0.0 } else { c * basis.value(idx + 1, radius) })
            .sum();
        let regular = poisson_solve(&current, -boundary)?;
        let mut level = regular.clone();
        level.set_singular(basis, singular)?;
        level.set_point_charges(point);
        if level.has_singular_part() {
            level.set_origin_value(None);
        }
        levels.push(level);
        current = regular;
    }
    levels.reverse();

    let solution = NavierSolution { levels, charges: charges.clone() };
    if options.validate
        && rhs.regular_values().iter().all(|&v| v >= 0.0)
        && charges.iter().all(|&a| a >= 0.0)
    {
        check_nonnegative_levels(&solution)?;
    }
    Ok(solution)
}

/// Verifies `(-Δ)^k u >= 0` at every node of every level.
pub fn check_nonnegative_levels(solution: &NavierSolution) -> Result<()> {
    for (k, level) in solution.levels.iter().enumerate() {
        let values = level.values();
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (i, &v) in values.iter().enumerate() {
            if v < -1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::MaximumPrinciple { level: k, node: i, value: v });
            }
        }
    }
    Ok(())
}

/// `-|S^(N-1)| r^(N-1) d/dr field` at node `i`: the charge enclosed by the
/// sphere of radius `r_i` when `field = (-Δ)^(m-1) u`.
pub fn charge_flux(field: &RadialField, i: usize) -> f64 {
    let grid = field.grid();
    let n = grid.dimension();
    let r = grid.nodes()[i];
    -sphere_area(n) * r.powi(n as i32 - 1) * field.derivative(i)
}

/// Estimates the `δ₀` charge of `u` from the flux of the discrete
/// `(-Δ)^(m-1) u`, averaged over nodes `m..m+3`: the innermost nodes whose
/// stencils never touch a one-sided end stencil.
pub fn recovered_point_charge(u: &RadialField, m: usize) -> Result<f64> {
    let level = crate::calculus::polyharmonic_apply(u, m - 1)?;
    Ok((m..m + 3).map(|i| charge_flux(&level, i)).sum::<f64>() / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grading, RadialGrid};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn sphere_areas() {
        assert!(close(sphere_area(3), 4.0 * PI, 1e-15));
        assert!(close(sphere_area(4), 2.0 * PI * PI, 1e-15));
        assert!(close(sphere_area(6), PI.powi(3), 1e-15));
        assert!(close(sphere_area(7), 16.0 * PI.powi(3) / 15.0, 1e-15));
    }

    #[test]
    fn biharmonic_values() {
        assert_eq!(fundamental_biharmonic(4, 5.0).unwrap(), 0.0);
        let a4 = 1.0 / (8.0 * PI * PI);
        assert!(close(FundamentalSolution::biharmonic(4).unwrap().normalization, a4, 1e-15));
        assert!(close(fundamental_biharmonic(4, 5.0 / std::f64::consts::E).unwrap(), a4, 1e-14));
        assert!(fundamental_biharmonic(4, 0.0).is_err());
        assert!(fundamental_biharmonic(4, -1.0).is_err());
    }

    #[test]
    fn laplace_values() {
        assert!(close(fundamental_laplace(4, 1.0).unwrap(), 1.0 / (4.0 * PI * PI), 1e-15));
        let r = 0.37;
        assert!(close(
            2.0 * fundamental_laplace(4, r).unwrap(),
            1.0 / (2.0 * PI * PI * r * r),
            1e-14
        ));
        let ratio = fundamental_laplace(4, 2.0 * r).unwrap() / fundamental_laplace(4, r).unwrap();
        assert!(close(ratio, 0.25, 1e-14));
        assert!(fundamental_laplace(2, 1.0).is_err());
        assert!(fundamental_laplace(4, 0.0).is_err());
    }

    #[test]
    fn basis_matches_named_solutions() {
        let b = SingularBasis::new(4, 5.0).unwrap();
        for &r in &[1e-3, 0.2, 3.0] {
            assert!(close(b.value(1, r), fundamental_laplace(4, r).unwrap(), 1e-14));
            assert!(close(b.value(2, r), fundamental_biharmonic(4, r).unwrap(), 1e-14));
        }
    }

    #[test]
    fn martinazzi_matches_basis() {
        assert!(close(exp_integrability_threshold(2), 32.0 * PI * PI, 1e-14));
        assert!(close(martinazzi_constant(3), 64.0 * PI.powi(3), 1e-14));
        for m in 2..=4 {
            let b = SingularBasis::new(2 * m, 1.0).unwrap();
            assert!(close(martinazzi_constant(m) * b.coefficient(m), 1.0, 1e-13), "m = {m}");
        }
    }

    #[test]
    fn basis_chain_is_consistent() {
        // -ΔG_k = G_{k-1} away from the origin, via the radial formula.
        for m in 2..=4 {
            let n = 2 * m;
            let b = SingularBasis::new(n, 5.0).unwrap();
            for k in 2..=m {
                let r: f64 = 0.3;
                let h = 1e-4;
                let d2 = (b.value(k, r + h) - 2.0 * b.value(k, r) + b.value(k, r - h)) / (h * h);
                let lap = d2 + (n - 1) as f64 / r * b.derivative(k, r);
                assert!(close(-lap, b.value(k - 1, r), 1e-6), "m={m} k={k}");
            }
            // flux of G_1 is one
            let r: f64 = 0.7;
            let flux = -sphere_area(n) * r.powi(n as i32 - 1) * b.derivative(1, r);
            assert!(close(flux, 1.0, 1e-14));
        }
    }

    #[test]
    fn poisson_zero_rhs() {
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 1.0, 64, 1e-4).unwrap());
        let zero = RadialField::zeros(grid.clone());
        let v = poisson_solve(&zero, 0.0).unwrap();
        assert!(v.values().iter().all(|&x| x == 0.0));
        let c = poisson_solve(&zero, 2.5).unwrap();
        assert!(c.values().iter().all(|&x| (x - 2.5).abs() < 1e-13));
    }

    #[test]
    fn poisson_constant_rhs_is_exact() {
        for grading in [Grading::Uniform, Grading::Geometric { q: 0.85 }] {
            let grid = Arc::new(RadialGrid::build(4, 1.0, 40, grading).unwrap());
            let rhs = RadialField::from_fn(grid.clone(), |_| 8.0).unwrap();
            let v = poisson_solve(&rhs, 0.0).unwrap();
            for (&r, &x) in grid.nodes().iter().zip(v.values().iter()) {
                assert!((x - (1.0 - r * r)).abs() < 1e-12, "r = {r}");
            }
            assert!((v.origin_value().unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn poisson_rejects_singular_or_nonintegrable_rhs() {
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 1.0, 64, 1e-6).unwrap());
        let bad = RadialField::from_fn(grid.clone(), |r| r.powi(-5)).unwrap();
        assert_eq!(poisson_solve(&bad, 0.0), Err(Error::NonIntegrable));
        let mut sing = RadialField::zeros(grid.clone());
        sing.set_singular(SingularBasis::for_grid(&grid).unwrap(), vec![0.0, 1.0]).unwrap();
        assert!(poisson_solve(&sing, 0.0).is_err());
    }

    #[test]
    fn navier_zero_data_is_zero() {
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 1.0, 64, 1e-4).unwrap());
        let zero = RadialField::zeros(grid);
        let sol = navier_solve(2, &zero, &ChargeVector::zeros(2), &NavierOptions::default()).unwrap();
        for level in &sol.levels {
            assert!(level.values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn navier_rejects_bad_charge_length() {
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 1.0, 64, 1e-4).unwrap());
        let zero = RadialField::zeros(grid);
        assert!(navier_solve(2, &zero, &ChargeVector::new(vec![1.0]), &NavierOptions::default()).is_err());
        assert!(navier_solve(3, &zero, &ChargeVector::zeros(3), &NavierOptions::default()).is_err());
    }

    #[test]
    fn navier_alpha_charge_closed_form() {
        // (Δ²)u = α δ₀, u = Δu = 0 at R: u = α[Φ(r) - Φ(R) - Γ(R)(R² - r²)/8].
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 1.0, 256, 1e-5).unwrap());
        let alpha = 1.7;
        let sol = navier_solve(
            2,
            &RadialField::zeros(grid.clone()),
            &ChargeVector::new(vec![alpha, 0.0]),
            &NavierOptions { validate: true, ..Default::default() },
        )
        .unwrap();
        let phi = |r: f64| fundamental_biharmonic(4, r).unwrap();
        let gam = |r: f64| fundamental_laplace(4, r).unwrap();
        for (i, &r) in grid.nodes().iter().enumerate() {
            let exact = alpha * (phi(r) - phi(1.0) - gam(1.0) * (1.0 - r * r) / 8.0);
            assert!((sol.u().value(i) - exact).abs() < 1e-12 * exact.abs().max(1.0));
            let exact_w = alpha * (gam(r) - gam(1.0));
            assert!((sol.neg_laplacian().value(i) - exact_w).abs() < 1e-10 * exact_w.abs().max(1.0));
            assert!(sol.u().value(i) >= 0.0 && sol.neg_laplacian().value(i) >= -1e-12);
        }
    }

    #[test]
    fn navier_beta_charge_closed_form() {
        // Δ²u = -βΔδ₀: u = β(Γ(r) - Γ(R)), -Δu = β δ₀ (no regular part).
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 1.0, 128, 1e-4).unwrap());
        let beta = 0.6;
        let sol = navier_solve(
            2,
            &RadialField::zeros(grid.clone()),
            &ChargeVector::new(vec![0.0, beta]),
            &NavierOptions::default(),
        )
        .unwrap();
        let gam = |r: f64| fundamental_laplace(4, r).unwrap();
        for (i, &r) in grid.nodes().iter().enumerate() {
            let exact = beta * (gam(r) - gam(1.0));
            assert!((sol.u().value(i) - exact).abs() < 1e-12 * exact.abs().max(1.0));
            assert!(sol.neg_laplacian().value(i).abs() < 1e-12);
        }
        assert_eq!(sol.neg_laplacian().point_charges(), &[beta]);
    }
}
