//! Radial fields: nodal samples plus an analytic singular part.
//!
//! A field is `regular(r) + Σ_k singular[k-1] G_k(r)` away from the origin,
//! together with point charges `Σ_i point_charges[i] (-Δ)^i δ₀` that only
//! arise from differentiating `G_1`. Dirac masses are never sampled.

use std::ops::{Add, Deref, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::SingularBasis;
use crate::grid::RadialGrid;

/// Measure coefficients `(α₀, ..., α_{m-1})` of `Σ αᵢ (-Δ)^i δ₀`; `(α, β)` for `m = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeVector(Vec<f64>);

impl ChargeVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    /// `(α, 0, ..., 0)` of length `m`.
    pub fn point(m: usize, alpha: f64) -> Self {
        let mut v = vec![0.0; m];
        v[0] = alpha;
        Self(v)
    }

    pub fn alpha(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    pub fn beta(&self) -> f64 {
        self.0.get(1).copied().unwrap_or(0.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ChargeVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    regular: Vec<f64>,
    origin_value: Option<f64>,
    basis: Option<SingularBasis>,
    singular: Vec<f64>,
    point_charges: Vec<f64>,
}

impl RadialField {
    pub fn regular(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            regular: values,
            origin_value: None,
            basis: None,
            singular: Vec::new(),
            point_charges: Vec::new(),
        })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self {
            grid,
            regular: vec![0.0; n],
            origin_value: Some(0.0),
            basis: None,
            singular: Vec::new(),
            point_charges: Vec::new(),
        }
    }

    /// Samples `f` at every node as a regular field.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::regular(grid, values)
    }

    /// Pure singular field `Σ coeffs[k-1] G_k`.
    pub fn singular_only(grid: Arc<RadialGrid>, basis: SingularBasis, coeffs: Vec<f64>) -> Result<Self> {
        let mut f = Self::zeros(grid);
        f.set_singular(basis, coeffs)?;
        f.origin_value = None;
        Ok(f)
    }

    pub fn set_singular(&mut self, basis: SingularBasis, coeffs: Vec<f64>) -> Result<()> {
        if basis.dimension() != self.grid.dimension() {
            return Err(Error::InvalidArgument(format!(
                "basis dimension {} does not match grid dimension {}",
                basis.dimension(),
                self.grid.dimension()
            )));
        }
        if coeffs.len() != basis.order() {
            return Err(Error::InvalidArgument(format!(
                "expected {} singular coefficients, got {}",
                basis.order(),
                coeffs.len()
            )));
        }
        self.basis = Some(basis);
        self.singular = coeffs;
        if self.has_singular_part() {
            self.origin_value = None;
        }
        Ok(())
    }

    pub fn set_point_charges(&mut self, charges: Vec<f64>) {
        self.point_charges = charges;
    }

    pub fn set_origin_value(&mut self, v: Option<f64>) {
        self.origin_value = v;
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn regular_values(&self) -> &[f64] {
        &self.regular
    }

    pub fn origin_value(&self) -> Option<f64> {
        self.origin_value
    }

    pub fn basis(&self) -> Option<SingularBasis> {
        self.basis
    }

    /// Coefficients of `G_1..G_m` (empty when the field has no singular part).
    pub fn singular_coefficients(&self) -> &[f64] {
        &self.singular
    }

    /// Coefficients of `(-Δ)^i δ₀`.
    pub fn point_charges(&self) -> &[f64] {
        &self.point_charges
    }

    pub fn has_singular_part(&self) -> bool {
        self.singular.iter().any(|&c| c != 0.0)
    }

    pub fn has_point_charges(&self) -> bool {
        self.point_charges.iter().any(|&c| c != 0.0)
    }

    /// Mass of the `δ₀` term of `(-Δ)^m` applied to this field, i.e. the
    /// coefficient of `G_m`.
    pub fn origin_mass(&self) -> f64 {
        self.singular.last().copied().unwrap_or(0.0)
    }

    fn singular_value(&self, r: f64) -> f64 {
        match self.basis {
            Some(b) => self
                .singular
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(k, &c)| c * b.value(k + 1, r))
                .sum(),
            None => 0.0,
        }
    }

    fn singular_derivative(&self, r: f64) -> f64 {
        match self.basis {
            Some(b) => self
                .singular
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0.0)
                .map(|(k, &c)| c * b.derivative(k + 1, r))
                .sum(),
            None => 0.0,
        }
    }

    /// Total value at node `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.regular[i] + self.singular_value(self.grid.nodes()[i])
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.regular.len()).map(|i| self.value(i)).collect()
    }

    /// Value at an arbitrary `r` in `[ε, R]`; the regular part is interpolated
    /// linearly in `log r`.
    pub fn eval(&self, r: f64) -> Option<f64> {
        let (i, j) = self.grid.bracket(r)?;
        let x = self.grid.nodes();
        let t = (r / x[i]).ln() / (x[j] / x[i]).ln();
        let reg = self.regular[i] + t * (self.regular[j] - self.regular[i]);
        Some(reg + self.singular_value(r))
    }

    /// `d/dr` at node `i`: three-point differences on the regular part
    /// (one-sided at the ends) plus the exact singular derivative.
    pub fn derivative(&self, i: usize) -> f64 {
        let x = self.grid.nodes();
        let n = x.len();
        let idx: [usize; 3] = if i == 0 {
            [0, 1, 2]
        } else if i == n - 1 {
            [n - 3, n - 2, n - 1]
        } else {
            [i - 1, i, i + 1]
        };
        let xs = [x[idx[0]], x[idx[1]], x[idx[2]]];
        let w = crate::calculus::fd_weights(x[i], &xs, 1);
        let reg: f64 = (0..3).map(|k| w[1][k] * self.regular[idx[k]]).sum();
        reg + self.singular_derivative(x[i])
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Applies `f` to the total nodal values, returning a regular field.
    pub fn map_values(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let x = self.grid.nodes();
        let values = (0..x.len()).map(|i| f(x[i], self.value(i))).collect();
        Self::regular(Arc::clone(&self.grid), values)
    }

    /// Drops the analytic structure and keeps only nodal totals.
    pub fn flattened(&self) -> Self {
        let mut f = Self::regular(Arc::clone(&self.grid), self.values()).expect("same grid");
        f.origin_value = if self.has_singular_part() { None } else { self.origin_value };
        f
    }

    pub(crate) fn with_parts(
        grid: Arc<RadialGrid>,
        regular: Vec<f64>,
        basis: Option<SingularBasis>,
        singular: Vec<f64>,
        point_charges: Vec<f64>,
    ) -> Self {
        let mut f = Self { grid, regular, origin_value: None, basis, singular, point_charges };
        if f.singular.iter().all(|&c| c == 0.0) {
            f.singular.clear();
            f.basis = None;
        }
        f
    }

    fn combine(&self, other: &Self, a: f64, b: f64) -> Self {
        assert!(
            Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid,
            "fields live on different grids"
        );
        let regular = self
            .regular
            .iter()
            .zip(&other.regular)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let basis = match (self.basis, other.basis) {
            (Some(p), Some(q)) => {
                assert_eq!(p, q, "fields use different singular bases");
                Some(p)
            }
            (p, q) => p.or(q),
        };
        let m = self.singular.len().max(other.singular.len());
        let singular = (0..m)
            .map(|k| {
                a * self.singular.get(k).copied().unwrap_or(0.0)
                    + b * other.singular.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        let p = self.point_charges.len().max(other.point_charges.len());
        let point = (0..p)
            .map(|k| {
                a * self.point_charges.get(k).copied().unwrap_or(0.0)
                    + b * other.point_charges.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        let mut f = Self::with_parts(Arc::clone(&self.grid), regular, basis, singular, point);
        f.origin_value = match (self.origin_value, other.origin_value) {
            (Some(x), Some(y)) if !f.has_singular_part() => Some(a * x + b * y),
            _ => None,
        };
        f
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut f = self.clone();
        f.regular.iter_mut().for_each(|v| *v *= c);
        f.singular.iter_mut().for_each(|v| *v *= c);
        f.point_charges.iter_mut().for_each(|v| *v *= c);
        f.origin_value = f.origin_value.map(|v| v * c);
        f
    }
}

impl Add for &RadialField {
    type Output = RadialField;

    fn add(self, rhs: &RadialField) -> RadialField {
        self.combine(rhs, 1.0, 1.0)
    }
}

impl Sub for &RadialField {
    type Output = RadialField;

    fn sub(self, rhs: &RadialField) -> RadialField {
        self.combine(rhs, 1.0, -1.0)
    }
}

impl Mul<f64> for &RadialField {
    type Output = RadialField;

    fn mul(self, c: f64) -> RadialField {
        self.scaled(c)
    }
}

impl Neg for &RadialField {
    type Output = RadialField;

    fn neg(self) -> RadialField {
        self.scaled(-1.0)
    }
}
