//! Discrete radial operators and ball quadrature.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::greens::sphere_area;
use crate::grid::RadialGrid;
use crate::nonlinearity::Weight;

/// Relative slack allowed when comparing successive cutoff increments.
pub const DIVERGENCE_SLACK: f64 = 1e-3;

/// Finite-difference weights for derivatives `0..=max_order` at `x0` on
/// arbitrary nodes `xs` (Fornberg's recursion). `w[d][j]` multiplies `u(xs[j])`.
pub fn fd_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Discrete `Δ` of nodal values.
///
/// Interior nodes use the conservative three-point form
/// `N (f₊^(N-1) u'₊ - f₋^(N-1) u'₋) / (f₊^N - f₋^N)` with faces at node
/// midpoints; it is exact on `1` and `r²` and matches the Poisson solver's
/// stencil. The two end nodes use one-sided four-point differences.
pub fn laplacian_values(grid: &RadialGrid, u: &[f64]) -> Vec<f64> {
    let x = grid.nodes();
    let n = x.len();
    let dim = grid.dimension() as i32;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let fp = 0.5 * (x[i] + x[i + 1]);
        let fm = 0.5 * (x[i - 1] + x[i]);
        let gp = (u[i + 1] - u[i]) / (x[i + 1] - x[i]);
        let gm = (u[i] - u[i - 1]) / (x[i] - x[i - 1]);
        // f₊^k - f₋^k = (f₊ - f₋) Σ_j f₊^(k-1-j) f₋^j, avoiding cancellation.
        let dfc = 0.5 * (x[i + 1] - x[i - 1]);
        let sum = |k: i32| -> f64 { (0..k).map(|j| fp.powi(k - 1 - j) * fm.powi(j)).sum() };
        let num = fp.powi(dim - 1) * (gp - gm) + gm * dfc * sum(dim - 1);
        out[i] = dim as f64 * num / (dfc * sum(dim));
    }
    let width = n.min(4);
    for &i in &[0, n - 1] {
        let idx: Vec<usize> = if i == 0 { (0..width).collect() } else { (n - width..n).collect() };
        let xs: Vec<f64> = idx.iter().map(|&k| x[k]).collect();
        let w = fd_weights(x[i], &xs, 2);
        let d1: f64 = idx.iter().enumerate().map(|(j, &k)| w[1][j] * u[k]).sum();
        let d2: f64 = idx.iter().enumerate().map(|(j, &k)| w[2][j] * u[k]).sum();
        out[i] = d2 + (dim - 1) as f64 / x[i] * d1;
    }
    out
}

/// `-Δ field`: discrete on the regular part, exact on the singular part.
/// `G_k` maps to `G_{k-1}`, `G_1` to `δ₀`, and `(-Δ)^i δ₀` to `(-Δ)^(i+1) δ₀`.
pub fn neg_laplacian(field: &RadialField) -> Result<RadialField> {
    let grid = field.grid();
    if grid.len() < 3 {
        return Err(Error::InsufficientResolution(format!("{} nodes", grid.len())));
    }
    let regular: Vec<f64> = laplacian_values(grid, field.regular_values())
        .into_iter()
        .map(|v| -v)
        .collect();
    let sing = field.singular_coefficients();
    let (singular, mut point) = if sing.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let mut s = sing[1..].to_vec();
        s.push(0.0);
        (s, vec![sing[0]])
    };
    point.extend_from_slice(field.point_charges());
    if point.iter().all(|&c| c == 0.0) {
        point.clear();
    }
    Ok(RadialField::with_parts(
        Arc::clone(field.grid_arc()),
        regular,
        field.basis(),
        singular,
        point,
    ))
}

/// `Δ field`.
pub fn radial_laplacian(field: &RadialField) -> Result<RadialField> {
    Ok(-&neg_laplacian(field)?)
}

/// `(-Δ)^m field` by `m`-fold composition. Only nodes `m..len-m` are free of
/// one-sided boundary stencils.
pub fn polyharmonic_apply(field: &RadialField, m: usize) -> Result<RadialField> {
    let n = field.grid().len();
    if m > 0 && n < 2 * m + 3 {
        return Err(Error::InsufficientResolution(format!(
            "{n} nodes cannot support {m} stencil compositions"
        )));
    }
    let mut out = field.clone();
    for _ in 0..m {
        out = neg_laplacian(&out)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallIntegral {
    pub value: f64,
    pub diverged: bool,
    /// Contributions of `[ε, 2ε]`, `[2ε, 4ε]`, `[4ε, 8ε]` to `∫|integrand|`.
    pub increments: [f64; 3],
}

fn log_mean(a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    if a * b > 0.0 {
        let ratio = b / a;
        if (ratio - 1.0).abs() < 1e-6 {
            // series of (b - a) / ln(b / a) around a = b
            let d = ratio - 1.0;
            return a * (1.0 + d / 2.0 - d * d / 12.0 + d * d * d / 24.0);
        }
        (b - a) / ratio.ln()
    } else {
        0.5 * (a + b)
    }
}

/// `∫_{s0}^{s1} g ds` for `g` log-linear (exact on pure powers of `r`).
fn cell(s0: f64, s1: f64, g0: f64, g1: f64) -> f64 {
    (s1 - s0) * log_mean(g0, g1)
}

fn interpolate(g0: f64, g1: f64, t: f64) -> f64 {
    if g0 * g1 > 0.0 {
        g0 * (g1 / g0).powf(t)
    } else {
        g0 + t * (g1 - g0)
    }
}

/// `∫_x^R g d(log r)` with `g` sampled at the grid nodes.
fn tail_integral(x: &[f64], s: &[f64], g: &[f64], from: f64) -> f64 {
    let n = x.len();
    let j = x.partition_point(|&v| v <= from).clamp(1, n - 1);
    let i = j - 1;
    let sf = from.ln();
    let t = (sf - s[i]) / (s[j] - s[i]);
    let gf = interpolate(g[i], g[j], t);
    let mut total = cell(sf, s[j], gf, g[j]);
    for k in j..n - 1 {
        total += cell(s[k], s[k + 1], g[k], g[k + 1]);
    }
    total
}

/// `|S^(N-1)| ∫_ε^R v(r) r^(N-1) dr` for nodal values `v`, with the
/// cutoff-refinement divergence test: the integral is declared divergent
/// when the contributions of `[ε, 2ε]`, `[2ε, 4ε]`, `[4ε, 8ε]` to `∫|v|` do
/// not decrease toward the origin (within [`DIVERGENCE_SLACK`]).
///
/// Quadrature is in `log r` with a log-linear model per cell, exact for
/// power-law integrands.
pub fn integrate_values(grid: &RadialGrid, values: &[f64]) -> Result<BallIntegral> {
    let x = grid.nodes();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { node: i, r: x[i], value: values[i] });
    }
    let dim = grid.dimension() as i32;
    let s: Vec<f64> = x.iter().map(|r| r.ln()).collect();
    let g: Vec<f64> = x.iter().zip(values).map(|(r, v)| v * r.powi(dim)).collect();
    let value = sphere_area(grid.dimension())
        * (0..x.len() - 1).map(|k| cell(s[k], s[k + 1], g[k], g[k + 1])).sum::<f64>();

    let eps = x[0];
    let mut increments = [0.0; 3];
    let mut diverged = false;
    if 8.0 * eps <= grid.radius() {
        let ga: Vec<f64> = g.iter().map(|v| v.abs()).collect();
        let tails: Vec<f64> = (0..4).map(|k| tail_integral(x, &s, &ga, eps * f64::from(1u32 << k))).collect();
        for k in 0..3 {
            increments[k] = tails[k] - tails[k + 1];
        }
        let [d1, d2, d3] = increments;
        let keep = 1.0 - DIVERGENCE_SLACK;
        diverged = d1 > 0.0 && d1 >= keep * d2 && d2 >= keep * d3;
    }
    Ok(BallIntegral { value, diverged, increments })
}

/// `|S^(N-1)| ∫_ε^R a(r) field(r) r^(N-1) dr` with divergence detection.
pub fn ball_integral(field: &RadialField, weight: &Weight) -> Result<BallIntegral> {
    let x = field.grid().nodes();
    let values: Vec<f64> = (0..x.len()).map(|i| weight.value(x[i]) * field.value(i)).collect();
    integrate_values(field.grid(), &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::SingularBasis;
    use crate::grid::Grading;
    use std::f64::consts::PI;

    fn geo(n: usize, eps: f64) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::geometric_with_cutoff(4, 1.0, n, eps).unwrap())
    }

    #[test]
    fn fornberg_reproduces_central_difference() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn laplacian_exact_on_constants_and_r_squared() {
        for grid in [geo(64, 1e-4), Arc::new(RadialGrid::build(4, 1.0, 32, Grading::Uniform).unwrap())] {
            let c = RadialField::from_fn(grid.clone(), |_| 3.0).unwrap();
            let lc = radial_laplacian(&c).unwrap();
            let q = RadialField::from_fn(grid.clone(), |r| r * r).unwrap();
            let lq = radial_laplacian(&q).unwrap();
            // round-off in the one-sided end stencil scales like 1/h²
            for (i, &r) in grid.nodes().iter().enumerate() {
                let tol = 1e-12 * (1.0 + 1.0 / (r * r));
                assert!(lc.value(i).abs() < tol, "{}", lc.value(i));
                assert!((lq.value(i) - 8.0).abs() < tol, "{}", lq.value(i));
            }
        }
    }

    #[test]
    fn laplacian_of_r4_is_second_order() {
        // Δ r⁴ = 24 r² in N = 4.
        let err = |n: usize| {
            let grid = Arc::new(RadialGrid::build(4, 1.0, n, Grading::Uniform).unwrap());
            let f = RadialField::from_fn(grid.clone(), |r| r.powi(4)).unwrap();
            let l = radial_laplacian(&f).unwrap();
            grid.nodes()
                .iter()
                .zip(l.values())
                .map(|(r, v)| (v - 24.0 * r * r).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 < 0.1);
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn neg_laplacian_of_log_samples() {
        // -Δ(-log r) = 2 / r² in N = 4.
        let grid = geo(400, 1e-3);
        let f = RadialField::from_fn(grid.clone(), |r| -r.ln()).unwrap();
        let l = neg_laplacian(&f).unwrap();
        for (i, &r) in grid.nodes().iter().enumerate().skip(1).take(grid.len() - 2) {
            let exact = 2.0 / (r * r);
            assert!((l.value(i) - exact).abs() < 1e-3 * exact);
        }
    }

    #[test]
    fn singular_part_is_shifted_exactly() {
        let grid = geo(64, 1e-4);
        let basis = SingularBasis::for_grid(&grid).unwrap();
        let phi = RadialField::singular_only(grid.clone(), basis, vec![0.0, 1.0]).unwrap();
        let w = polyharmonic_apply(&phi, 1).unwrap();
        assert_eq!(w.singular_coefficients(), &[1.0, 0.0]);
        let d = polyharmonic_apply(&phi, 2).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
        assert_eq!(d.point_charges(), &[1.0]);
        let l = radial_laplacian(&phi).unwrap();
        assert_eq!(l.singular_coefficients(), &[-1.0, 0.0]);
    }

    #[test]
    fn polyharmonic_m1_is_neg_laplacian() {
        let grid = geo(64, 1e-3);
        let f = RadialField::from_fn(grid.clone(), |r| (r * 3.0).sin()).unwrap();
        assert_eq!(polyharmonic_apply(&f, 1).unwrap(), neg_laplacian(&f).unwrap());
        assert_eq!(polyharmonic_apply(&f, 0).unwrap(), f);
    }

    #[test]
    fn biharmonic_of_r4() {
        let grid = Arc::new(RadialGrid::build(4, 1.0, 128, Grading::Uniform).unwrap());
        let f = RadialField::from_fn(grid.clone(), |r| r.powi(4)).unwrap();
        let d = polyharmonic_apply(&f, 2).unwrap();
        for i in 2..grid.len() - 2 {
            // second order: h² ≈ 6e-5
            assert!((d.value(i) - 192.0).abs() < 1e-5 * 192.0, "{}", d.value(i));
        }
    }

    #[test]
    fn polyharmonic_rejects_tiny_grids() {
        let grid = Arc::new(RadialGrid::from_nodes(4, vec![0.1, 0.2, 0.4, 0.6, 1.0]).unwrap());
        let f = RadialField::zeros(grid);
        assert!(polyharmonic_apply(&f, 2).is_err());
        assert!(polyharmonic_apply(&f, 1).is_ok());
    }

    #[test]
    fn unit_ball_volume() {
        let grid = geo(256, 1e-4);
        let one = RadialField::from_fn(grid.clone(), |_| 1.0).unwrap();
        let b = ball_integral(&one, &Weight::constant(1.0)).unwrap();
        assert!((b.value - PI * PI / 2.0).abs() < 1e-6);
        assert!(!b.diverged);
        let grid = Arc::new(RadialGrid::build(4, 1.0, 100, Grading::Uniform).unwrap());
        let one = RadialField::from_fn(grid, |_| 1.0).unwrap();
        let b = ball_integral(&one, &Weight::constant(1.0)).unwrap();
        assert!((b.value - PI * PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn divergence_test_fires_on_r_minus_four() {
        let grid = geo(256, 1e-6);
        let f = RadialField::from_fn(grid.clone(), |r| r.powi(-4)).unwrap();
        let b = ball_integral(&f, &Weight::constant(1.0)).unwrap();
        assert!(b.diverged);
        let zero = RadialField::zeros(grid.clone());
        let z = ball_integral(&zero, &Weight::constant(1.0)).unwrap();
        assert_eq!((z.value, z.diverged), (0.0, false));
    }

    #[test]
    fn integrable_singular_profiles_converge() {
        for s in [1.0, 2.0, 3.0, 3.9] {
            let exact = 2.0 * PI * PI / (4.0 - s);
            let mut prev = f64::INFINITY;
            for eps in [1e-3, 1e-5, 1e-7] {
                let grid = geo(400, eps);
                let f = RadialField::from_fn(grid.clone(), |r| r.powf(-s)).unwrap();
                let b = ball_integral(&f, &Weight::constant(1.0)).unwrap();
                assert!(!b.diverged, "s = {s}");
                let err = (b.value - exact).abs();
                assert!(err < prev);
                prev = err;
            }
        }
        for s in [4.0, 4.5, 6.0] {
            let grid = geo(400, 1e-5);
            let f = RadialField::from_fn(grid, |r| r.powf(-s)).unwrap();
            assert!(ball_integral(&f, &Weight::constant(1.0)).unwrap().diverged, "s = {s}");
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let grid = geo(64, 1e-3);
        let f = RadialField::from_fn(grid, |r| if r < 2e-3 { f64::NAN } else { 1.0 }).unwrap();
        assert!(matches!(
            ball_integral(&f, &Weight::constant(1.0)),
            Err(Error::NonFinite { node: 0, .. })
        ));
    }
}
