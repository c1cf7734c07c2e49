//! Distances between root measures, grid densities and closed forms.
//!
//! Every comparison normalizes both sides to probability measures first
//! and records the raw masses. Solutions lose mass at unit rate while an
//! empirical root measure always has mass one, so this is the only
//! convention under which the formalisms are comparable.

use serde::{Deserialize, Serialize};

use crate::densities::ClosedFormFamily;
use crate::error::{Error, Result};
use crate::pde_solver::PdeState;
use crate::poly_dynamics::EmpiricalCdf;
use crate::quadrature::GaussLegendre;

/// A finite measure on the line seen through its cumulative distribution.
pub trait Measure {
    /// Total mass.
    fn mass(&self) -> f64;
    /// Unnormalized right-continuous CDF.
    fn cdf(&self, x: f64) -> f64;
    /// Left limit of the CDF.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }
    /// Smallest interval carrying all the mass.
    fn support(&self) -> (f64, f64);
    /// Points where the CDF jumps or changes its smooth form.
    fn breakpoints(&self) -> Vec<f64>;
    /// Purely atomic measures have piecewise-constant CDFs.
    fn is_atomic(&self) -> bool {
        false
    }
}

impl Measure for EmpiricalCdf {
    fn mass(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            1.0
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        self.value(x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.left_value(x)
    }

    fn support(&self) -> (f64, f64) {
        let p = self.points();
        match (p.first(), p.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, 0.0),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.points().to_vec()
    }

    fn is_atomic(&self) -> bool {
        true
    }
}

/// A closed-form solution frozen at time `t`.
#[derive(Debug, Clone, Copy)]
pub struct FamilyMeasure {
    family: ClosedFormFamily,
    t: f64,
    support: (f64, f64),
    mass: f64,
}

impl FamilyMeasure {
    pub fn new(family: ClosedFormFamily, t: f64) -> Result<Self> {
        let s = family.support(t)?;
        Ok(Self { family, t, support: (s.a(), s.b()), mass: family.mass(t)? })
    }
}

impl Measure for FamilyMeasure {
    fn mass(&self) -> f64 {
        self.mass
    }

    fn cdf(&self, x: f64) -> f64 {
        self.family.cdf(self.t, x).expect("time validated at construction")
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.support.0, self.support.1]
    }
}

/// Piecewise-linear density on a grid.
#[derive(Debug, Clone)]
pub struct GridMeasure {
    xs: Vec<f64>,
    us: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GridMeasure {
    pub fn new(xs: Vec<f64>, us: Vec<f64>) -> Result<Self> {
        if xs.len() != us.len() || xs.len() < 2 {
            return Err(Error::RejectedInput("grid needs matching nodes and values, at least two".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::RejectedInput("grid nodes must be strictly increasing".into()));
        }
        if us.iter().any(|u| !u.is_finite() || *u < 0.0) {
            return Err(Error::RejectedInput("grid density must be finite and nonnegative".into()));
        }
        let mut cumulative = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for k in 1..xs.len() {
            acc += 0.5 * (xs[k] - xs[k - 1]) * (us[k] + us[k - 1]);
            cumulative.push(acc);
        }
        Ok(Self { xs, us, cumulative })
    }

    pub fn from_state(state: &PdeState) -> Result<Self> {
        Self::new(state.grid(), state.values().to_vec())
    }

    /// Linear interpolant, zero outside the grid.
    pub fn density(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let k = self.xs.partition_point(|&p| p <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let w = (x - x0) / (x1 - x0);
        self.us[k - 1] * (1.0 - w) + self.us[k] * w
    }
}

impl Measure for GridMeasure {
    fn mass(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return self.mass();
        }
        let k = self.xs.partition_point(|&p| p <= x).clamp(1, n - 1);
        let x0 = self.xs[k - 1];
        self.cumulative[k - 1] + 0.5 * (x - x0) * (self.us[k - 1] + self.density(x))
    }

    fn support(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.xs.clone()
    }
}

fn normalized_masses(a: &dyn Measure, b: &dyn Measure) -> Result<(f64, f64)> {
    let (ma, mb) = (a.mass(), b.mass());
    for (m, side) in [(ma, "first"), (mb, "second")] {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::DegenerateMeasure(format!("{side} measure has mass {m}")));
        }
    }
    Ok((ma, mb))
}

/// Sorted, deduplicated breakpoints of both measures, refined with
/// uniform points over the union of supports when a side is smooth.
fn partition(a: &dyn Measure, b: &dyn Measure, dense: usize) -> Vec<f64> {
    let mut pts = a.breakpoints();
    pts.extend(b.breakpoints());
    let (sa, sb) = (a.support(), b.support());
    let (lo, hi) = (sa.0.min(sb.0), sa.1.max(sb.1));
    pts.push(lo);
    pts.push(hi);
    if !(a.is_atomic() && b.is_atomic()) && hi > lo {
        pts.extend((0..=dense).map(|i| lo + (hi - lo) * i as f64 / dense as f64));
    }
    pts.retain(|x| x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `sup_x |F_a(x) - F_b(x)|` of the normalized CDFs, over the jump points
/// (both one-sided limits) and the midpoints between them.
pub fn ks_distance(a: &dyn Measure, b: &dyn Measure) -> Result<f64> {
    let (ma, mb) = normalized_masses(a, b)?;
    let pts = partition(a, b, 4000);
    let diff = |x: f64| (a.cdf(x) / ma - b.cdf(x) / mb).abs();
    let diff_left = |x: f64| (a.cdf_left(x) / ma - b.cdf_left(x) / mb).abs();
    let mut sup: f64 = 0.0;
    for (k, &p) in pts.iter().enumerate() {
        sup = sup.max(diff(p)).max(diff_left(p));
        if let Some(&q) = pts.get(k + 1) {
            sup = sup.max(diff(0.5 * (p + q)));
        }
    }
    Ok(sup.min(1.0))
}

/// `∫ |F_a - F_b| dx` of the normalized CDFs.
pub fn wasserstein1(a: &dyn Measure, b: &dyn Measure) -> Result<f64> {
    let (ma, mb) = normalized_masses(a, b)?;
    let pts = partition(a, b, 512);
    let gl = GaussLegendre::new(8);
    let diff = |x: f64| a.cdf(x) / ma - b.cdf(x) / mb;
    let atomic = a.is_atomic() && b.is_atomic();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let len = q - p;
        if len <= 0.0 {
            continue;
        }
        if atomic {
            total += diff(0.5 * (p + q)).abs() * len;
            continue;
        }
        // split at sign changes so each piece integrates a smooth |·|
        let probes = 8;
        let mut cuts = vec![p];
        let mut prev_x = p + 1e-12 * len;
        let mut prev = diff(prev_x);
        for i in 1..=probes {
            let x = if i == probes { q - 1e-12 * len } else { p + len * i as f64 / probes as f64 };
            let v = diff(x);
            if v * prev < 0.0 {
                let (mut lo, mut hi) = (prev_x, x);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if diff(mid) * prev < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                cuts.push(0.5 * (lo + hi));
            }
            prev = v;
            prev_x = x;
        }
        cuts.push(q);
        for c in cuts.windows(2) {
            total += gl.integrate(c[0], c[1], |x| diff(x).abs());
        }
    }
    Ok(total)
}

/// Trapezoid integral of `|u_grid - u_exact|` over the union of the grid
/// and the exact support; the grid density is linear between nodes and
/// zero outside the grid.
pub fn l1_density_error(state: &PdeState, reference: &ClosedFormFamily, t: f64) -> Result<f64> {
    let grid = GridMeasure::from_state(state)?;
    let support = reference.support(t)?;
    let mut nodes = grid.breakpoints();
    let (g0, g1) = grid.support();
    let extra = nodes.len();
    for (lo, hi) in [(support.a(), support.b().min(g0)), (support.a().max(g1), support.b())] {
        if hi > lo {
            nodes.extend((0..=extra).map(|i| lo + (hi - lo) * i as f64 / extra as f64));
        }
    }
    nodes.push(support.a());
    nodes.push(support.b());
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let err = |x: f64| (grid.density(x) - reference.density_raw(t, x)).abs();
    Ok(nodes
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (err(w[0]) + err(w[1])))
        .sum())
}

/// Distances between two normalized measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub ks: f64,
    pub wasserstein1: f64,
    /// Only defined when both sides carry densities.
    pub l1: Option<f64>,
    /// Root count or grid size of the discretized side.
    pub n_or_grid: usize,
    /// Raw masses used to normalize the two sides.
    pub normalization: [f64; 2],
}

impl ComparisonReport {
    pub fn new(a: &dyn Measure, b: &dyn Measure, n_or_grid: usize, l1: Option<f64>) -> Result<Self> {
        Ok(Self {
            ks: ks_distance(a, b)?,
            wasserstein1: wasserstein1(a, b)?,
            l1,
            n_or_grid,
            normalization: [a.mass(), b.mass()],
        })
    }
}
