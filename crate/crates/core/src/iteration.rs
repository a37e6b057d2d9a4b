//! Barrier construction, supersolutions and the monotone iteration
//! `(-Δ)^m u_n = a f(u_{n-1}) + α δ₀` started from `u₀ = 0`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ChargeVector, RadialField};
use crate::greens::{navier_solve, NavierOptions, NavierSolution, SingularBasis};
use crate::grid::RadialGrid;
use crate::nonlinearity::{validate_hypotheses, Nonlinearity, Weight};

/// A validated problem `(-Δ)^m u = a f(u) + α δ₀` on the ball of the grid.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemSpec {
    pub m: usize,
    #[serde(skip)]
    pub grid: Arc<RadialGrid>,
    pub weight: Weight,
    pub f: Nonlinearity,
    pub alpha: f64,
}

impl ProblemSpec {
    pub fn new(m: usize, grid: Arc<RadialGrid>, weight: Weight, f: Nonlinearity, alpha: f64) -> Result<Self> {
        if grid.dimension() != 2 * m {
            return Err(Error::InvalidArgument(format!(
                "order m = {m} needs dimension {}, grid has {}",
                2 * m,
                grid.dimension()
            )));
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
        }
        let report = validate_hypotheses(&f, &weight, m);
        if let Some(c) = report.first_failure() {
            return Err(Error::Hypothesis { name: c.name.clone(), detail: c.witness.clone() });
        }
        Ok(Self { m, grid, weight, f, alpha })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
        }
        Ok(Self { alpha, ..self.clone() })
    }

    pub fn dimension(&self) -> usize {
        2 * self.m
    }
}

/// Solves `(-Δ)^m φ = a(r) |log r| / r` on the unit ball with Navier data.
/// Every level `(-Δ)^k φ` is nonnegative.
pub fn barrier_phi(weight: &Weight, m: usize, grid: Arc<RadialGrid>) -> Result<NavierSolution> {
    if (grid.radius() - 1.0).abs() > 1e-14 {
        return Err(Error::InvalidArgument(format!(
            "the barrier lives on the unit ball, grid radius is {}",
            grid.radius()
        )));
    }
    let h2 = validate_hypotheses(&Nonlinearity::power(1.0), weight, m);
    if let Some(c) = h2.get("H2").filter(|c| !c.passed) {
        return Err(Error::Hypothesis { name: c.name.clone(), detail: c.witness.clone() });
    }
    let rhs = RadialField::from_fn(Arc::clone(&grid), |r| weight.value(r) * r.ln().abs() / r)?;
    navier_solve(m, &rhs, &ChargeVector::zeros(m), &NavierOptions { validate: true, ..Default::default() })
}

/// `ū = (-log r + C φ) / γ` with all levels `(-Δ)^k ū`, `k < m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Supersolution {
    pub gamma: f64,
    pub c: f64,
    pub levels: Vec<RadialField>,
}

impl Supersolution {
    pub fn u(&self) -> &RadialField {
        &self.levels[0]
    }

    pub fn neg_laplacian(&self) -> &RadialField {
        &self.levels[1]
    }

    /// Coefficient of `δ₀` in `(-Δ)^m ū`: `1 / (γ c_m)`, which is `8π²/γ` for `m = 2`.
    pub fn origin_mass(&self) -> f64 {
        self.levels[0].origin_mass()
    }
}

/// Assembles `ū` from the barrier `φ`. `-log r` is carried exactly as
/// `G_m / c_m` with log scale 1.
pub fn supersolution(gamma: f64, c: f64, phi: &NavierSolution) -> Result<Supersolution> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    if !(c >= 0.0) {
        return Err(Error::InvalidArgument(format!("C must be nonnegative, got {c}")));
    }
    let m = phi.order();
    let grid = phi.u().grid_arc();
    let basis = SingularBasis::new(grid.dimension(), 1.0)?;
    let lead = 1.0 / (gamma * basis.coefficient(m));
    let levels = phi
        .levels
        .iter()
        .enumerate()
        .map(|(k, level)| {
            let mut out = level.scaled(c / gamma).flattened();
            let mut sing = vec![0.0; m];
            sing[m - k - 1] = lead;
            out.set_singular(basis, sing)?;
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Supersolution { gamma, c, levels })
}

/// Largest node `r_k` with `e^(C φ(r_i)) <= |log r_i| / γ` for every `i <= k`,
/// together with `k`.
pub fn supersolution_radius(gamma: f64, c: f64, phi: &RadialField) -> Result<(f64, usize)> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    let nodes = phi.grid().nodes();
    let last = (0..nodes.len())
        .take_while(|&i| (c * phi.value(i)).exp() <= nodes[i].ln().abs() / gamma)
        .last()
        .ok_or(Error::NoSupersolutionRadius)?;
    Ok((nodes[last], last))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationOptions {
    /// Stop when `max|u_n - u_{n-1}| / max|u_n|` drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative slack for the nodewise monotonicity and barrier comparisons.
    pub comparison_slack: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 500, comparison_slack: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationStatus {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    /// An iterate rose above the barrier.
    BarrierExceeded,
    /// `a f(u)` or an iterate is not finite.
    NonFinite,
    /// `a f(u)` is not integrable near the origin.
    NonIntegrable,
}

/// Where and why the iteration stopped with [`IterationStatus::Diverged`].
/// `node` is the first offending node; for [`DivergenceKind::NonIntegrable`]
/// it is the innermost node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierViolation {
    pub kind: DivergenceKind,
    pub iteration: usize,
    pub node: usize,
    pub r: f64,
    pub value: f64,
    pub barrier: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationReport {
    pub status: IterationStatus,
    pub iterations: usize,
    pub sup_norm_history: Vec<f64>,
    /// Relative change of the last step.
    pub residual: f64,
    /// Nodes where `u_n < u_{n-1}` or `-Δu_n < -Δu_{n-1}`, summed over all steps.
    pub monotonicity_violations: usize,
    pub violation: Option<BarrierViolation>,
    #[serde(skip)]
    pub solution: NavierSolution,
}

impl IterationReport {
    pub fn converged(&self) -> bool {
        self.status == IterationStatus::Converged
    }

    pub fn u(&self) -> &RadialField {
        self.solution.u()
    }

    pub fn neg_laplacian(&self) -> &RadialField {
        self.solution.neg_laplacian()
    }
}

fn count_decreases(prev: &RadialField, next: &RadialField, slack: f64) -> usize {
    // the singular parts of successive iterates coincide
    let (p, q) = (prev.regular_values(), next.regular_values());
    let scale = q.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    p.iter().zip(q).filter(|(a, b)| **b < **a - slack * scale).count()
}

fn frozen_rhs(problem: &ProblemSpec, u: &RadialField) -> Result<RadialField> {
    let grid = &problem.grid;
    let values = grid
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &r)| Ok(problem.weight.value(r) * problem.f.eval(u.value(i).max(0.0))?))
        .collect::<Result<Vec<_>>>()?;
    RadialField::regular(Arc::clone(grid), values)
}

/// Picard iteration from `u₀ = 0` with frozen right-hand side `a f(u_{n-1})`
/// and charge vector `(α, 0, …, 0)`.
///
/// An iterate above the barrier, a non-finite right-hand side or a
/// non-integrable one ends the run with [`IterationStatus::Diverged`].
pub fn monotone_solve(problem: &ProblemSpec, barrier: &Supersolution, opts: &IterationOptions) -> Result<IterationReport> {
    let m = problem.m;
    if barrier.levels.len() != m || barrier.u().grid().dimension() != problem.dimension() {
        return Err(Error::InvalidArgument("barrier and problem orders differ".into()));
    }
    let mass = barrier.origin_mass();
    if problem.alpha > mass * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "alpha = {} exceeds the barrier mass {mass}",
            problem.alpha
        )));
    }
    let grid = Arc::clone(&problem.grid);
    let bar = grid
        .nodes()
        .iter()
        .map(|&r| {
            barrier.u().eval(r).ok_or_else(|| {
                Error::Precondition(format!("barrier is not defined at r = {r}"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let charges = ChargeVector::point(m, problem.alpha);
    let navier = NavierOptions::default();

    let zero = RadialField::zeros(Arc::clone(&grid));
    let mut current = NavierSolution { levels: vec![zero; m], charges: ChargeVector::zeros(m) };
    let mut history = Vec::new();
    let mut violations = 0;
    let mut residual = f64::INFINITY;
    let mut status = IterationStatus::MaxIter;
    let mut violation = None;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let rhs = frozen_rhs(problem, current.u())?;
        let stop = |kind, i: usize| BarrierViolation {
            kind,
            iteration: iterations,
            node: i,
            r: grid.nodes()[i],
            value: current.u().value(i),
            barrier: bar[i],
        };
        if let Some(i) = rhs.regular_values().iter().position(|v| !v.is_finite()) {
            violation = Some(stop(DivergenceKind::NonFinite, i));
            status = IterationStatus::Diverged;
            break;
        }
        let next = match navier_solve(m, &rhs, &charges, &navier) {
            Ok(s) => s,
            Err(Error::NonIntegrable) => {
                violation = Some(stop(DivergenceKind::NonIntegrable, 0));
                status = IterationStatus::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        if iterations > 1 {
            violations += count_decreases(current.u(), next.u(), opts.comparison_slack);
            violations += count_decreases(current.neg_laplacian(), next.neg_laplacian(), opts.comparison_slack);
        }
        let u = next.u();
        let values = u.values();
        if let Some(i) = (0..values.len()).find(|&i| {
            !values[i].is_finite() || values[i] > bar[i] + opts.comparison_slack * bar[i].abs()
        }) {
            let kind = if values[i].is_finite() { DivergenceKind::BarrierExceeded } else { DivergenceKind::NonFinite };
            violation = Some(BarrierViolation {
                kind,
                iteration: iterations,
                node: i,
                r: grid.nodes()[i],
                value: values[i],
                barrier: bar[i],
            });
            current = next;
            status = IterationStatus::Diverged;
            break;
        }
        let change = current
            .u()
            .regular_values()
            .iter()
            .zip(u.regular_values())
            .fold(0.0f64, |a, (p, q)| a.max((q - p).abs()));
        let size = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        residual = if change == 0.0 { 0.0 } else { change / size };
        history.push(size);
        current = next;
        if residual < opts.tol {
            status = IterationStatus::Converged;
            break;
        }
    }

    Ok(IterationReport {
        status,
        iterations,
        sup_norm_history: history,
        residual,
        monotonicity_violations: violations,
        violation,
        solution: current,
    })
}

/// A `(γ, C_γ)` pair whose barrier carries charge `alpha`, with the radius of
/// the ball on which it is a supersolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaWitness {
    pub alpha: f64,
    pub gamma: f64,
    pub c: f64,
    pub radius: f64,
}

/// Number of `γ` samples tried by [`alpha_witness`].
pub const GAMMA_SAMPLES: usize = 33;

/// Finds `γ` with `1/(γ c_m) >= alpha` and a sub-exponential witness `C_γ`,
/// maximising the supersolution radius over geometrically sampled `γ`.
pub fn alpha_witness(f: &Nonlinearity, phi: &NavierSolution, alpha: f64) -> Result<AlphaWitness> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative, got {alpha}")));
    }
    let m = phi.order();
    let basis = SingularBasis::new(2 * m, 1.0)?;
    let gamma_max = if alpha == 0.0 { 1e3 } else { 1.0 / (alpha * basis.coefficient(m)) };
    let gamma_min = gamma_max * 1e-4;
    let mut best: Option<AlphaWitness> = None;
    for j in 0..GAMMA_SAMPLES {
        let gamma = gamma_min * (gamma_max / gamma_min).powf(j as f64 / (GAMMA_SAMPLES - 1) as f64);
        let Some(c) = f.exp_witness(gamma) else { continue };
        let Ok((radius, _)) = supersolution_radius(gamma, c, phi.u()) else { continue };
        if best.is_none_or(|b| radius > b.radius) {
            best = Some(AlphaWitness { alpha, gamma, c, radius });
        }
    }
    best.ok_or(Error::NoAdmissibleGamma { alpha })
}

/// Largest `α` in `[0, barrier mass]` for which [`monotone_solve`] converges
/// on the template's grid, to 1% relative accuracy.
pub fn max_alpha(template: &ProblemSpec, barrier: &Supersolution, opts: &IterationOptions) -> Result<f64> {
    let converges = |alpha: f64| -> Result<bool> {
        Ok(monotone_solve(&template.with_alpha(alpha)?, barrier, opts)?.converged())
    };
    let mut hi = barrier.origin_mass();
    if converges(hi)? {
        return Ok(hi);
    }
    let mut lo = 0.0;
    while hi - lo > 0.01 * hi {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn unit_grid(m: usize, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::geometric_with_cutoff(2 * m, 1.0, n, 1e-6).unwrap())
    }

    #[test]
    fn zero_weight_gives_zero_barrier() {
        let phi = barrier_phi(&Weight::constant(0.0), 2, unit_grid(2, 128)).unwrap();
        assert!(phi.levels.iter().all(|l| l.values().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn barrier_is_positive_and_vanishes_on_the_sphere() {
        let phi = barrier_phi(&Weight::power_law(-1.0), 2, unit_grid(2, 256)).unwrap();
        let u = phi.u();
        let n = u.grid().len();
        assert_eq!(u.value(n - 1), 0.0);
        assert!((0..n - 1).all(|i| u.value(i) > 0.0));
        assert!(phi.neg_laplacian().values().iter().all(|&v| v >= 0.0));
        // bounded near the origin
        assert!((u.value(0) - u.value(1)).abs() < 1e-3 * u.value(0));
    }

    #[test]
    fn barrier_rejects_non_unit_radius() {
        let g = Arc::new(RadialGrid::geometric_with_cutoff(4, 0.5, 64, 1e-4).unwrap());
        assert!(barrier_phi(&Weight::power_law(-1.0), 2, g).is_err());
    }

    #[test]
    fn supersolution_radius_without_phi() {
        let grid = unit_grid(2, 512);
        let phi = RadialField::zeros(grid.clone());
        let h = |r: f64| grid.nodes().iter().filter(|&&x| x > r).fold(f64::INFINITY, |a, &b| a.min(b));
        for (gamma, expected) in [(1.0, (-1.0f64).exp()), (0.5, (-0.5f64).exp())] {
            let (r, k) = supersolution_radius(gamma, 1.0, &phi).unwrap();
            assert!(r <= expected && h(r) > expected, "gamma {gamma}: {r}");
            assert_eq!(grid.nodes()[k], r);
        }
        assert!(matches!(supersolution_radius(1e7, 1.0, &phi), Err(Error::NoSupersolutionRadius)));
        assert!(supersolution_radius(0.0, 1.0, &phi).is_err());
    }

    #[test]
    fn larger_constant_shrinks_radius() {
        let phi = barrier_phi(&Weight::power_law(-1.0), 2, unit_grid(2, 256)).unwrap();
        let (r1, _) = supersolution_radius(1.0, 0.5, phi.u()).unwrap();
        let (r2, _) = supersolution_radius(1.0, 5.0, phi.u()).unwrap();
        assert!(r2 <= r1);
    }

    #[test]
    fn supersolution_levels() {
        let phi = barrier_phi(&Weight::power_law(-1.0), 2, unit_grid(2, 256)).unwrap();
        let s = supersolution(1.0, (2.0 / E).powi(2), &phi).unwrap();
        assert!((s.origin_mass() - 8.0 * PI * PI).abs() < 1e-12);
        assert!(s.u().values().iter().all(|&v| v >= 0.0));
        assert!(s.neg_laplacian().values().iter().all(|&v| v >= 0.0));
        let bare = supersolution(2.0, 0.0, &phi).unwrap();
        for (i, &r) in bare.u().grid().nodes().iter().enumerate() {
            assert!((bare.u().value(i) + r.ln() / 2.0).abs() < 1e-12 * (1.0 + r.ln().abs()));
            // -Δ(-log r) = 2 / r²
            assert!((bare.neg_laplacian().value(i) - 1.0 / (r * r)).abs() < 1e-12 / (r * r));
        }
        assert!(supersolution(0.0, 1.0, &phi).is_err());
    }

    #[test]
    fn zero_charge_zero_solution() {
        let phi = barrier_phi(&Weight::power_law(-1.0), 2, unit_grid(2, 128)).unwrap();
        let bar = supersolution(1.0, (2.0 / E).powi(2), &phi).unwrap();
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 0.3, 128, 1e-5).unwrap());
        let p = ProblemSpec::new(2, grid, Weight::power_law(-1.0), Nonlinearity::power(2.0), 0.0).unwrap();
        let rep = monotone_solve(&p, &bar, &IterationOptions::default()).unwrap();
        assert_eq!(rep.status, IterationStatus::Converged);
        assert_eq!(rep.iterations, 1);
        assert!(rep.u().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn problem_rejects_bad_data() {
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 0.3, 64, 1e-5).unwrap());
        let e = ProblemSpec::new(2, grid.clone(), Weight::power_law(-3.5), Nonlinearity::power(2.0), 0.1);
        assert!(matches!(e, Err(Error::Hypothesis { .. })));
        assert!(ProblemSpec::new(2, grid.clone(), Weight::power_law(-1.0), Nonlinearity::power(2.0), -1.0).is_err());
        assert!(ProblemSpec::new(3, grid, Weight::power_law(-1.0), Nonlinearity::power(2.0), 0.1).is_err());
    }

    #[test]
    fn alpha_above_barrier_mass_is_rejected() {
        let phi = barrier_phi(&Weight::power_law(-1.0), 2, unit_grid(2, 128)).unwrap();
        let bar = supersolution(1.0, 1.0, &phi).unwrap();
        let grid = Arc::new(RadialGrid::geometric_with_cutoff(4, 0.3, 64, 1e-5).unwrap());
        let p = ProblemSpec::new(2, grid, Weight::power_law(-1.0), Nonlinearity::power(2.0), 100.0).unwrap();
        assert!(matches!(monotone_solve(&p, &bar, &IterationOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn alpha_witness_for_powers_and_exponentials() {
        let phi = barrier_phi(&Weight::power_law(-1.0), 2, unit_grid(2, 256)).unwrap();
        let gm = 8.0 * PI * PI;
        for alpha in [0.0, 1e-3, 1.0, 100.0] {
            let w = alpha_witness(&Nonlinearity::power(3.0), &phi, alpha).unwrap();
            assert!(alpha * w.gamma <= gm * (1.0 + 1e-12));
            assert!(w.radius > 0.0);
        }
        let f = Nonlinearity::exponential(2.0, 1.0);
        assert!(alpha_witness(&f, &phi, gm / 2.0).is_ok());
        assert!(matches!(alpha_witness(&f, &phi, gm), Err(Error::NoAdmissibleGamma { .. })));
        assert!(alpha_witness(&Nonlinearity::exp_power(2.0), &phi, 1.0).is_err());
    }
}
