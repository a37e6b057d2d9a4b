//! Graded radial meshes on the punctured ball `(0, R]`.
//!
//! The origin is never stored. Uniform grids place `n` nodes at `R i / n`
//! for `i = 1..=n`; geometric grids place `n + 1` nodes at `R q^(n - i)` so that
//! the innermost node is `R q^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_INTERVALS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    Uniform,
    Geometric { q: f64 },
    /// Nodes supplied externally (e.g. re-ingested from a CSV dump).
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    dimension: usize,
    radius: f64,
    grading: Grading,
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn build(dimension: usize, radius: f64, n: usize, grading: Grading) -> Result<Self> {
        if !matches!(dimension, 4 | 6 | 8) {
            return Err(Error::InvalidArgument(format!(
                "dimension must be 4, 6 or 8, got {dimension}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        if n < MIN_INTERVALS {
            return Err(Error::InsufficientResolution(format!(
                "n = {n} is below the minimum of {MIN_INTERVALS}"
            )));
        }
        let nodes = match grading {
            Grading::Uniform => {
                let h = radius / n as f64;
                let mut v: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
                v[n - 1] = radius;
                v
            }
            Grading::Geometric { q } => {
                if !(q > 0.0 && q < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "geometric ratio must lie in (0, 1), got {q}"
                    )));
                }
                let lnq = q.ln();
                let mut v: Vec<f64> =
                    (0..=n).map(|i| radius * ((n - i) as f64 * lnq).exp()).collect();
                v[n] = radius;
                v
            }
            Grading::Custom => {
                return Err(Error::InvalidArgument(
                    "custom grids are built with RadialGrid::from_nodes".into(),
                ))
            }
        };
        Ok(Self { dimension, radius, grading, nodes })
    }

    /// Geometric grid with `n_nodes` nodes whose innermost node is `cutoff`.
    pub fn geometric_with_cutoff(
        dimension: usize,
        radius: f64,
        n_nodes: usize,
        cutoff: f64,
    ) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff < radius) {
            return Err(Error::InvalidArgument(format!(
                "cutoff {cutoff} must lie in (0, {radius})"
            )));
        }
        if n_nodes < 2 {
            return Err(Error::InsufficientResolution(format!("{n_nodes} nodes")));
        }
        let n = n_nodes - 1;
        let q = (cutoff / radius).powf(1.0 / n as f64);
        let mut grid = Self::build(dimension, radius, n, Grading::Geometric { q })?;
        grid.nodes[0] = cutoff;
        Ok(grid)
    }

    /// Wraps externally supplied nodes. The grading is detected: geometric if
    /// successive ratios agree to 1e-12, uniform if spacings do, custom otherwise.
    pub fn from_nodes(dimension: usize, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InsufficientResolution(format!("{} nodes", nodes.len())));
        }
        if !(nodes[0] > 0.0) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "nodes must be positive and strictly increasing".into(),
            ));
        }
        if dimension < 3 || !dimension.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("unsupported dimension {dimension}")));
        }
        let radius = *nodes.last().unwrap();
        let q = nodes[0] / nodes[1];
        let geometric = nodes
            .windows(2)
            .all(|w| ((w[0] / w[1]) / q - 1.0).abs() < 1e-12);
        let h = nodes[1] - nodes[0];
        let uniform = (nodes[0] - h).abs() < 1e-12 * radius
            && nodes.windows(2).all(|w| ((w[1] - w[0]) - h).abs() < 1e-12 * radius);
        let grading = if geometric {
            Grading::Geometric { q }
        } else if uniform {
            Grading::Uniform
        } else {
            Grading::Custom
        };
        Ok(Self { dimension, radius, grading, nodes })
    }

    /// Keeps nodes `0..=last`; the new outer radius is `nodes[last]`.
    pub fn truncate(&self, last: usize) -> Result<Self> {
        if last + 1 < 3 || last >= self.nodes.len() {
            return Err(Error::InsufficientResolution(format!(
                "cannot truncate at node {last}"
            )));
        }
        let nodes = self.nodes[..=last].to_vec();
        Ok(Self {
            dimension: self.dimension,
            radius: nodes[last],
            grading: self.grading,
            nodes,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Polyharmonic order `m` with `N = 2m`.
    pub fn order(&self) -> usize {
        self.dimension / 2
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn inner_cutoff(&self) -> f64 {
        self.nodes[0]
    }

    /// Smallest number of nodes found in any full decade `[r, 10 r]` inside the grid.
    pub fn min_nodes_per_decade(&self) -> Option<usize> {
        let eps = self.inner_cutoff();
        if self.radius < 10.0 * eps {
            return None;
        }
        let mut min = usize::MAX;
        for (i, &r) in self.nodes.iter().enumerate() {
            if 10.0 * r > self.radius {
                break;
            }
            let count = self.nodes[i..].iter().take_while(|&&x| x <= 10.0 * r).count();
            min = min.min(count);
        }
        Some(min)
    }

    /// Indices `(i, i + 1)` with `nodes[i] <= r <= nodes[i + 1]`.
    pub fn bracket(&self, r: f64) -> Option<(usize, usize)> {
        let n = self.nodes.len();
        if !(r >= self.nodes[0] && r <= self.nodes[n - 1]) {
            return None;
        }
        let idx = self.nodes.partition_point(|&x| x <= r);
        let i = idx.saturating_sub(1).min(n - 2);
        Some((i, i + 1))
    }

    /// Index of the node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        match self.bracket(r) {
            Some((i, j)) => {
                if (r - self.nodes[i]).abs() <= (self.nodes[j] - r).abs() {
                    i
                } else {
                    j
                }
            }
            None if r < self.nodes[0] => 0,
            None => self.nodes.len() - 1,
        }
    }

    /// Indices of nodes in the closed window `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.nodes.partition_point(|&x| x < lo * (1.0 - 1e-12));
        let end = self.nodes.partition_point(|&x| x <= hi * (1.0 + 1e-12));
        start..end.max(start)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_spacing() {
        let g = RadialGrid::build(4, 1.0, 100, Grading::Uniform).unwrap();
        assert_eq!(g.len(), 100);
        assert!((g.inner_cutoff() - 0.01).abs() < 1e-15);
        assert_eq!(*g.nodes().last().unwrap(), 1.0);
        for w in g.nodes().windows(2) {
            assert!((w[1] - w[0] - 0.01).abs() < 1e-14);
        }
    }

    #[test]
    fn geometric_grid_cutoff() {
        let g = RadialGrid::build(4, 1.0, 64, Grading::Geometric { q: 0.9 }).unwrap();
        let expected = 0.9f64.powi(64);
        assert!((expected - 1.18e-3).abs() < 1e-5);
        assert!((g.inner_cutoff() / expected - 1.0).abs() < 1e-12);
        assert_eq!(g.len(), 65);
        for w in g.nodes().windows(2) {
            assert!((w[1] / w[0] / (1.0 / 0.9) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn six_dimensional_uniform() {
        let g = RadialGrid::build(6, 0.5, 16, Grading::Uniform).unwrap();
        assert_eq!(*g.nodes().last().unwrap(), 0.5);
        assert_eq!(g.inner_cutoff(), 0.03125);
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(matches!(
            RadialGrid::build(4, 1.0, 15, Grading::Uniform),
            Err(Error::InsufficientResolution(_))
        ));
        assert!(RadialGrid::build(4, 1.0, 32, Grading::Geometric { q: 1.0 }).is_err());
        assert!(RadialGrid::build(4, 1.0, 32, Grading::Geometric { q: 0.0 }).is_err());
        assert!(RadialGrid::build(5, 1.0, 32, Grading::Uniform).is_err());
        assert!(RadialGrid::build(4, -1.0, 32, Grading::Uniform).is_err());
    }

    #[test]
    fn doubling_intervals_shrinks_cutoff() {
        let a = RadialGrid::build(4, 1.0, 40, Grading::Geometric { q: 0.8 }).unwrap();
        let b = RadialGrid::build(4, 1.0, 80, Grading::Geometric { q: 0.8 }).unwrap();
        assert!(b.inner_cutoff() < a.inner_cutoff());
    }

    #[test]
    fn bracket_covers_range() {
        let g = RadialGrid::geometric_with_cutoff(4, 1.0, 50, 1e-4).unwrap();
        for &r in &[1e-4, 3.3e-4, 0.5, 1.0] {
            let (i, j) = g.bracket(r).unwrap();
            assert_eq!(j, i + 1);
            assert!(g.nodes()[i] <= r && r <= g.nodes()[j]);
        }
        assert!(g.bracket(1e-5).is_none());
        assert!(g.bracket(1.5).is_none());
    }

    #[test]
    fn from_nodes_detects_grading() {
        let g = RadialGrid::geometric_with_cutoff(4, 1.0, 40, 1e-3).unwrap();
        let h = RadialGrid::from_nodes(4, g.nodes().to_vec()).unwrap();
        assert!(matches!(h.grading(), Grading::Geometric { .. }));
        let u = RadialGrid::build(4, 1.0, 20, Grading::Uniform).unwrap();
        let v = RadialGrid::from_nodes(4, u.nodes().to_vec()).unwrap();
        assert_eq!(v.grading(), Grading::Uniform);
        let c = RadialGrid::from_nodes(4, vec![0.1, 0.3, 0.35, 1.0]).unwrap();
        assert_eq!(c.grading(), Grading::Custom);
    }

    #[test]
    fn decade_density() {
        let g = RadialGrid::geometric_with_cutoff(4, 1.0, 512, 1e-6).unwrap();
        assert!(g.min_nodes_per_decade().unwrap() >= 3);
    }
}
