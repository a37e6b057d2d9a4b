//! Nonlinearities `f` and weights `a`: evaluation, hypothesis checks, and
//! growth classification (sub-/super-exponential, superquadratic).

use std::f64::consts::E;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::integrate_values;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

/// Samples per decade used by sampled classification.
pub const SAMPLES_PER_DECADE: usize = 32;
/// Growth factor between the first and last sampled decade that counts as unbounded.
pub const UNBOUNDED_FACTOR: f64 = 1e6;
/// Smallest exponent tried when searching for a sub-exponential witness.
pub const GAMMA_MIN: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind {
    /// `t^p`
    Power { p: f64 },
    /// `c (e^(γt) - 1)`
    Exponential { gamma: f64, c: f64 },
    /// `e^(t^δ) - 1`
    ExpPower { delta: f64 },
    /// `Σ coeffs[k] t^k`
    Polynomial { coeffs: Vec<f64> },
    /// Piecewise-linear through `(t[i], f[i])`.
    Tabulated { t: Vec<f64>, f: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    SubExponential,
    SuperExponential,
}

/// `f(t) <= c e^(γ t)` for all sampled `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpWitness {
    pub gamma: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    /// Overall positive factor; `f = scale * base(t)`.
    pub scale: f64,
    pub declared_class: Option<GrowthClass>,
}

impl Nonlinearity {
    pub fn new(kind: NonlinearityKind) -> Self {
        Self { kind, scale: 1.0, declared_class: None }
    }

    pub fn power(p: f64) -> Self {
        Self::new(NonlinearityKind::Power { p })
    }

    pub fn exponential(gamma: f64, c: f64) -> Self {
        Self::new(NonlinearityKind::Exponential { gamma, c })
    }

    pub fn exp_power(delta: f64) -> Self {
        Self::new(NonlinearityKind::ExpPower { delta })
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::new(NonlinearityKind::Polynomial { coeffs })
    }

    pub fn tabulated(t: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if t.len() != f.len() || t.len() < 2 {
            return Err(Error::InvalidArgument("table needs at least two (t, f) pairs".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("table abscissae must increase".into()));
        }
        Ok(Self::new(NonlinearityKind::Tabulated { t, f }))
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale *= c;
        self
    }

    pub fn is_symbolic(&self) -> bool {
        !matches!(self.kind, NonlinearityKind::Tabulated { .. })
    }

    pub fn table_range(&self) -> Option<(f64, f64)> {
        match &self.kind {
            NonlinearityKind::Tabulated { t, .. } => Some((t[0], t[t.len() - 1])),
            _ => None,
        }
    }

    /// `f(t)`; negative arguments are clamped to zero.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = t.max(0.0);
        let base = match &self.kind {
            NonlinearityKind::Power { p } => t.powf(*p),
            NonlinearityKind::Exponential { gamma, c } => c * (gamma * t).exp_m1(),
            NonlinearityKind::ExpPower { delta } => t.powf(*delta).exp_m1(),
            NonlinearityKind::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
            }
            NonlinearityKind::Tabulated { t: ts, f } => {
                let (lo, hi) = (ts[0], ts[ts.len() - 1]);
                if t < lo || t > hi {
                    return Err(Error::OutOfTable { t, lo, hi });
                }
                let j = ts.partition_point(|&x| x <= t).clamp(1, ts.len() - 1);
                let w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
                f[j - 1] + w * (f[j] - f[j - 1])
            }
        };
        Ok(self.scale * base)
    }

    /// Smallest known `C` with `f(t) <= C e^(γt)` on `[0, ∞)`, if one exists.
    /// Sampled for tables.
    pub fn exp_witness(&self, gamma: f64) -> Option<f64> {
        if !(gamma > 0.0) {
            return None;
        }
        let s = self.scale;
        match &self.kind {
            NonlinearityKind::Power { p } => Some(s * sup_power_exp(*p, gamma)),
            NonlinearityKind::Exponential { gamma: g0, c } => (gamma >= *g0).then_some(s * c),
            NonlinearityKind::ExpPower { delta } => {
                let d = *delta;
                if d < 1.0 {
                    // e^(t^δ) <= e^(t*^δ - γ t*) e^(γt), t* = (δ/γ)^(1/(1-δ))
                    let t_star = (d / gamma).powf(1.0 / (1.0 - d));
                    Some(s * (t_star.powf(d) - gamma * t_star).exp())
                } else if d == 1.0 {
                    (gamma >= 1.0).then_some(s)
                } else {
                    None
                }
            }
            NonlinearityKind::Polynomial { coeffs } => Some(
                s * coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c.abs() * sup_power_exp(k as f64, gamma))
                    .sum::<f64>(),
            ),
            NonlinearityKind::Tabulated { t, f } => {
                let t_max = t[t.len() - 1];
                if t_max < 10.0 {
                    return None;
                }
                let samples = sample_points(t_max);
                let lf: Vec<f64> = samples.iter().map(|&x| self.eval(x).map(|v| v.ln()).unwrap_or(f64::NAN)).collect();
                if !bounded_for(&samples, &lf, gamma) {
                    return None;
                }
                let table = t.iter().zip(f).map(|(x, y)| s * y * (-gamma * x).exp());
                Some(table.fold(0.0, f64::max))
            }
        }
    }

    /// `lim_{t→∞} f(t) / t^q` for symbolic kinds (`∞` when it diverges).
    pub fn limit_ratio(&self, q: f64) -> Option<f64> {
        let s = self.scale;
        match &self.kind {
            NonlinearityKind::Power { p } => Some(if *p > q {
                f64::INFINITY
            } else if *p == q {
                s
            } else {
                0.0
            }),
            NonlinearityKind::Exponential { gamma, c } => {
                Some(if *gamma > 0.0 && *c > 0.0 { f64::INFINITY } else { 0.0 })
            }
            NonlinearityKind::ExpPower { delta } => Some(if *delta > 0.0 { f64::INFINITY } else { 0.0 }),
            NonlinearityKind::Polynomial { coeffs } => {
                let d = coeffs.iter().rposition(|&c| c != 0.0)?;
                let lead = s * coeffs[d];
                Some(if (d as f64) > q {
                    lead.signum() * f64::INFINITY
                } else if (d as f64) == q {
                    lead
                } else {
                    0.0
                })
            }
            NonlinearityKind::Tabulated { .. } => None,
        }
    }
}

/// `sup_{t>=0} t^p e^(-γt) = (p / (γ e))^p`.
fn sup_power_exp(p: f64, gamma: f64) -> f64 {
    if p <= 0.0 {
        1.0
    } else {
        (p / (gamma * E)).powf(p)
    }
}

/// Geometric samples on `[1, t_max]`, [`SAMPLES_PER_DECADE`] per decade.
fn sample_points(t_max: f64) -> Vec<f64> {
    let decades = t_max.log10();
    let count = (decades * SAMPLES_PER_DECADE as f64).ceil() as usize;
    (0..=count)
        .map(|j| 10f64.powf(decades * j as f64 / count as f64))
        .collect()
}

fn decade_max(samples: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    samples
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12))
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Whether `f(t) e^(-γt)` stays bounded along the samples, given `ln f`.
fn bounded_for(samples: &[f64], log_f: &[f64], gamma: f64) -> bool {
    let t_max = samples[samples.len() - 1];
    let g: Vec<f64> = samples.iter().zip(log_f).map(|(t, l)| l - gamma * t).collect();
    let first = decade_max(samples, &g, 1.0, 10.0);
    let last = decade_max(samples, &g, t_max / 10.0, t_max);
    if last == f64::NEG_INFINITY {
        return true;
    }
    last.is_finite() && last <= first + UNBOUNDED_FACTOR.ln()
}

/// `γ` samples on `[GAMMA_MIN, t_max / 2]`, 8 per decade. Rates above
/// `t_max / 2` cannot be told apart on `[1, t_max]` before `f` overflows.
fn exponent_samples(t_max: f64) -> Vec<f64> {
    let decades = (0.5 * t_max / GAMMA_MIN).log10();
    let count = (decades * 8.0).ceil() as usize;
    (0..=count)
        .map(|j| GAMMA_MIN * 10f64.powf(decades * j as f64 / count as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// `lim f(t)/t² ∈ (0, ∞]`.
    pub superquadratic: bool,
    /// The limit (symbolic) or the top-decade minimum of `f/t²` (sampled).
    pub quadratic_ratio: f64,
    pub sub_exponential: bool,
    pub witness: Option<ExpWitness>,
    pub super_exponential: bool,
    pub sampled: bool,
}

impl GrowthReport {
    pub fn class(&self) -> GrowthClass {
        if self.super_exponential {
            GrowthClass::SuperExponential
        } else {
            GrowthClass::SubExponential
        }
    }
}

/// Decides superquadratic growth and the sub-/super-exponential dichotomy.
///
/// Symbolic kinds are classified exactly. Tables are sampled on `[1, t_max]`:
/// superquadratic when `f/t²` is positive on the top decade and loses at most
/// 10% across it; sub-exponential with the smallest sampled `γ` for which
/// `f e^(-γt)` grows by less than [`UNBOUNDED_FACTOR`] between the first and
/// last decade, searching `γ ∈ [GAMMA_MIN, t_max / 2]`.
pub fn classify_growth(f: &Nonlinearity, t_max: f64) -> Result<GrowthReport> {
    if !(t_max >= 10.0) {
        return Err(Error::InvalidArgument(format!("t_max must be at least 10, got {t_max}")));
    }
    if f.is_symbolic() {
        let ratio = f.limit_ratio(2.0).unwrap_or(0.0);
        let witness = default_witness(f);
        let sub = witness.is_some();
        return Ok(GrowthReport {
            superquadratic: ratio > 0.0,
            quadratic_ratio: ratio,
            sub_exponential: sub,
            witness,
            super_exponential: !sub,
            sampled: false,
        });
    }
    let (_, hi) = f.table_range().expect("tabulated");
    if t_max > hi {
        return Err(Error::OutOfTable { t: t_max, lo: 0.0, hi });
    }
    let samples = sample_points(t_max);
    let values = samples.iter().map(|&t| f.eval(t)).collect::<Result<Vec<_>>>()?;
    let (quadratic_ratio, superquadratic) = sampled_power_growth(&samples, &values, 2.0);
    let log_f: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let witness = exponent_samples(t_max)
        .into_iter()
        .find(|&g| bounded_for(&samples, &log_f, g))
        .map(|gamma| {
            let c = samples
                .iter()
                .zip(&values)
                .map(|(t, v)| v * (-gamma * t).exp())
                .fold(0.0, f64::max);
            ExpWitness { gamma, c }
        });
    let sub = witness.is_some();
    Ok(GrowthReport {
        superquadratic,
        quadratic_ratio,
        sub_exponential: sub,
        witness,
        super_exponential: !sub,
        sampled: true,
    })
}

fn sampled_power_growth(samples: &[f64], values: &[f64], q: f64) -> (f64, bool) {
    let t_max = samples[samples.len() - 1];
    let top: Vec<(f64, f64)> = samples
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= t_max / 10.0 * (1.0 - 1e-12))
        .map(|(&t, &v)| (t, v / t.powf(q)))
        .collect();
    let min = top.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let first = top[0].1;
    let last = top[top.len() - 1].1;
    (min, min > 0.0 && last >= 0.9 * first)
}

/// `lim f(t)/t^q ∈ (0, ∞]`, exactly for symbolic kinds and sampled up to `t_max` for tables.
pub fn grows_at_least_power(f: &Nonlinearity, q: f64, t_max: f64) -> Result<bool> {
    if let Some(l) = f.limit_ratio(q) {
        return Ok(l > 0.0);
    }
    let samples = sample_points(t_max);
    let values = samples.iter().map(|&t| f.eval(t)).collect::<Result<Vec<_>>>()?;
    Ok(sampled_power_growth(&samples, &values, q).1)
}

fn default_witness(f: &Nonlinearity) -> Option<ExpWitness> {
    let gamma = match &f.kind {
        NonlinearityKind::Exponential { gamma, .. } => *gamma,
        _ => 1.0,
    };
    f.exp_witness(gamma).map(|c| ExpWitness { gamma, c })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// `coef · r^σ`
    PowerLaw { coef: f64, sigma: f64 },
    /// Piecewise-linear in `r`; constant beyond the table ends.
    Tabulated { r: Vec<f64>, a: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub kind: WeightKind,
    /// Integrability exponent `k` of the hypothesis `a ∈ L^k`; chosen
    /// automatically when absent.
    pub integrability_exponent: Option<f64>,
    pub positivity_radius: f64,
}

impl Weight {
    pub fn new(kind: WeightKind) -> Self {
        Self { kind, integrability_exponent: None, positivity_radius: 1.0 }
    }

    pub fn power_law(sigma: f64) -> Self {
        Self::new(WeightKind::PowerLaw { coef: 1.0, sigma })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(WeightKind::PowerLaw { coef: c, sigma: 0.0 })
    }

    pub fn tabulated(r: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if r.len() != a.len() || r.len() < 2 || r.windows(2).any(|w| !(w[1] > w[0])) || r[0] <= 0.0 {
            return Err(Error::InvalidArgument("weight table needs increasing positive radii".into()));
        }
        Ok(Self::new(WeightKind::Tabulated { r, a }))
    }

    pub fn with_exponent(mut self, k: f64) -> Self {
        self.integrability_exponent = Some(k);
        self
    }

    pub fn with_positivity_radius(mut self, r0: f64) -> Self {
        self.positivity_radius = r0;
        self
    }

    pub fn value(&self, r: f64) -> f64 {
        match &self.kind {
            WeightKind::PowerLaw { coef, sigma } => {
                if *coef == 0.0 {
                    0.0
                } else if *sigma == 0.0 {
                    *coef
                } else {
                    coef * r.powf(*sigma)
                }
            }
            WeightKind::Tabulated { r: rs, a } => {
                if r <= rs[0] {
                    a[0]
                } else if r >= rs[rs.len() - 1] {
                    a[a.len() - 1]
                } else {
                    let j = rs.partition_point(|&x| x <= r).clamp(1, rs.len() - 1);
                    let w = (r - rs[j - 1]) / (rs[j] - rs[j - 1]);
                    a[j - 1] + w * (a[j] - a[j - 1])
                }
            }
        }
    }

    /// `ess inf_{B_r0} a`.
    pub fn essential_infimum(&self, r0: f64) -> f64 {
        match &self.kind {
            WeightKind::PowerLaw { coef, sigma } => {
                if *sigma > 0.0 {
                    0.0
                } else {
                    coef * r0.powf(*sigma)
                }
            }
            WeightKind::Tabulated { r, a } => r
                .iter()
                .zip(a)
                .filter(|(&x, _)| x <= r0)
                .map(|(_, &y)| y)
                .chain(std::iter::once(self.value(r0)))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Open interval of admissible `k` for `a ∈ L^k(B_1)` together with
    /// `k > 2m/(2m-1)`. Exact for power laws.
    pub fn admissible_exponents(&self, m: usize) -> Option<(f64, f64)> {
        let k_min = lower_exponent(m);
        match &self.kind {
            WeightKind::PowerLaw { coef, sigma } => {
                let k_max = if *coef == 0.0 || *sigma >= 0.0 {
                    f64::INFINITY
                } else {
                    (2 * m) as f64 / -sigma
                };
                Some((k_min, k_max))
            }
            WeightKind::Tabulated { .. } => None,
        }
    }
}

impl Weight {
    /// The exponent `k` used to witness `a ∈ L^k`: the configured one, else
    /// the midpoint of the admissible interval (twice its lower end when
    /// unbounded). `None` when the exact interval is empty.
    pub fn witness_exponent(&self, m: usize) -> Option<f64> {
        if let Some(k) = self.integrability_exponent {
            return Some(k);
        }
        match self.admissible_exponents(m) {
            Some((lo, hi)) if hi.is_infinite() => Some(2.0 * lo),
            Some((lo, hi)) if hi > lo => Some(0.5 * (lo + hi)),
            Some(_) => None,
            None => Some(1.05 * lower_exponent(m)),
        }
    }
}

/// `2m / (2m - 1)`: `4/3` for the biharmonic case.
pub fn lower_exponent(m: usize) -> f64 {
    (2 * m) as f64 / (2 * m - 1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub witness: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub m: usize,
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn first_failure(&self) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

fn h1_samples(f: &Nonlinearity) -> Vec<f64> {
    let hi = f.table_range().map(|(_, h)| h).unwrap_or(1e3);
    let lo = f.table_range().map(|(l, _)| l).unwrap_or(0.0);
    let mut t: Vec<f64> = (0..=6 * SAMPLES_PER_DECADE)
        .map(|j| 1e-3 * 10f64.powf(j as f64 / SAMPLES_PER_DECADE as f64))
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    t.insert(0, lo.max(0.0));
    t
}

fn check_h1(f: &Nonlinearity) -> HypothesisCheck {
    let name = "H1".to_string();
    let fail = |witness: String| HypothesisCheck { name: name.clone(), passed: false, witness, value: None };
    match f.eval(0.0) {
        Ok(0.0) => {}
        Ok(v) => return fail(format!("f(0) = {v} != 0")),
        Err(e) => return fail(format!("f(0) undefined: {e}")),
    }
    let ts = h1_samples(f);
    let mut prev = 0.0;
    for &t in &ts {
        let v = match f.eval(t) {
            Ok(v) => v,
            Err(e) => return fail(e.to_string()),
        };
        if v.is_nan() {
            return fail(format!("f({t}) is NaN"));
        }
        if v < 0.0 {
            return fail(format!("f({t}) = {v} < 0"));
        }
        if v < prev {
            return fail(format!("f decreases before t = {t}: {prev} > {v}"));
        }
        prev = v;
    }
    HypothesisCheck {
        name,
        passed: true,
        witness: format!("f(0) = 0, nonnegative and nondecreasing on {} samples", ts.len()),
        value: None,
    }
}

fn check_h2(a: &Weight, m: usize) -> HypothesisCheck {
    let name = "H2".to_string();
    let k_min = lower_exponent(m);
    let exact = a.admissible_exponents(m);
    let Some(k) = a.witness_exponent(m) else {
        let (lo, hi) = exact.expect("only exact ranges can be empty");
        return HypothesisCheck {
            name,
            passed: false,
            witness: format!("a ∈ L^k needs k < {hi:.6}, but k > {lo:.6} is required"),
            value: None,
        };
    };
    if !(k > k_min) {
        return HypothesisCheck {
            name,
            passed: false,
            witness: format!("k = {k} does not exceed {k_min:.6}"),
            value: None,
        };
    }
    let radius = match &a.kind {
        WeightKind::Tabulated { r, .. } => r[r.len() - 1].min(1.0),
        _ => 1.0,
    };
    let quad = RadialGrid::geometric_with_cutoff(2 * m, radius, 512, radius * 1e-8)
        .and_then(|g| {
            let g = Arc::new(g);
            let vals: Vec<f64> = g.nodes().iter().map(|&r| a.value(r).abs().powf(k)).collect();
            integrate_values(&g, &vals)
        });
    let (integral, diverged) = match quad {
        Ok(b) => (Some(b.value), b.diverged),
        Err(_) => (None, true),
    };
    let passed = match exact {
        Some((_, hi)) => k < hi,
        None => !diverged,
    };
    let witness = if passed {
        format!("k = {k:.6}, ∫_B a^k ≈ {}", integral.unwrap_or(f64::NAN))
    } else {
        format!("∫_B a^k diverges for k = {k:.6}")
    };
    HypothesisCheck { name, passed, witness, value: integral }
}

fn check_h3(a: &Weight) -> HypothesisCheck {
    let r0 = a.positivity_radius;
    let inf = a.essential_infimum(r0);
    HypothesisCheck {
        name: "H3".to_string(),
        passed: r0 > 0.0 && inf > 0.0,
        witness: format!("ess inf over B_{r0} = {inf}"),
        value: Some(inf),
    }
}

/// Reports each hypothesis with pass/fail and a witness. Never fails.
pub fn validate_hypotheses(f: &Nonlinearity, a: &Weight, m: usize) -> HypothesisReport {
    HypothesisReport { m, checks: vec![check_h1(f), check_h2(a, m), check_h3(a)] }
}
