//! Finite-difference solver for `u_t + (1/π) ∂_x arctan(Hu/u) = 0`.
//!
//! The density lives on a uniform grid over its current support. Each flux
//! evaluation maps the support to `[-1, 1]`, interpolates `g = u √(1-s²)`
//! cubically to Gauss-Chebyshev nodes, projects `g` onto
//! first-kind modes and applies the exact shift `H[T_{k}/√(1-s²)] = -U_{k-1}`.
//! Where `u` has vanished the flux takes its limit `±1/2`, so the discrete
//! mass drops at rate `F(b) - F(a) = 1`.
//!
//! Time stepping is SSP-RK3 with central differences, and the grid is
//! periodically shrunk onto `{u > ε_supp · max u}`.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::chebyshev::{gauss_chebyshev_angles, quadrature_size};
use crate::densities::ClosedFormFamily;
use crate::error::{Error, Result};
use crate::interval::SupportInterval;

/// Relative size below which `Hu` counts as zero where `u` vanishes.
const SIGN_FLOOR: f64 = 1e-9;

/// Smallest admissible number of grid intervals.
pub const MIN_INTERVALS: usize = 16;

/// Time step below which the solver gives up.
pub const MIN_DT: f64 = 1e-12;

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Number of grid intervals.
    pub n: usize,
    /// Highest Chebyshev mode used for `Hu`.
    pub modes: usize,
    pub cfl: f64,
    /// Density at or below which the flux takes its limiting value.
    pub eps_flux: f64,
    /// Support threshold relative to `max u`.
    pub eps_supp: f64,
    /// Support width at which a run stops.
    pub delta_stop: f64,
    /// Steps between support remaps.
    pub remap_stride: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            n: 512,
            modes: 128,
            cfl: 0.4,
            eps_flux: 1e-10,
            eps_supp: 1e-6,
            delta_stop: 1e-3,
            remap_stride: 16,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::RejectedInput(msg));
        if self.n < MIN_INTERVALS {
            return bad(format!("n = {} is below {MIN_INTERVALS}", self.n));
        }
        if self.modes < 1 {
            return bad("at least one Hilbert mode is required".into());
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return bad(format!("cfl = {} is outside (0, 0.5]", self.cfl));
        }
        if !(self.eps_flux > 0.0 && self.eps_flux <= self.eps_supp) {
            return bad(format!(
                "need 0 < eps_flux ≤ eps_supp, got {} and {}",
                self.eps_flux, self.eps_supp
            ));
        }
        if !(self.delta_stop > 0.0) {
            return bad(format!("delta_stop = {} must be positive", self.delta_stop));
        }
        if self.remap_stride == 0 {
            return bad("remap_stride must be at least 1".into());
        }
        Ok(())
    }
}

/// Density samples on `N + 1` uniform nodes spanning the support.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeState {
    t: f64,
    support: SupportInterval,
    values: Vec<f64>,
}

impl PdeState {
    /// Validates `values ≥ 0`, at least `MIN_INTERVALS + 1` nodes and
    /// endpoint values at most `1e-6 · max u`.
    pub fn new(t: f64, support: SupportInterval, values: Vec<f64>) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::RejectedInput(format!("time {t} is not finite")));
        }
        if values.len() < MIN_INTERVALS + 1 {
            return Err(Error::RejectedInput(format!(
                "{} nodes; at least {} are required",
                values.len(),
                MIN_INTERVALS + 1
            )));
        }
        if let Some(j) = values.iter().position(|u| !u.is_finite() || *u < 0.0) {
            return Err(Error::RejectedInput(format!("value {j} is negative or not finite")));
        }
        let peak = values.iter().copied().fold(0.0, f64::max);
        let edge = values[0].max(values[values.len() - 1]);
        if edge > 1e-6 * peak {
            return Err(Error::RejectedInput(format!(
                "endpoint value {edge} does not vanish relative to max {peak}"
            )));
        }
        Ok(Self { t, support, values })
    }

    /// Sample `f` on `n + 1` uniform nodes.
    pub fn from_fn<F>(t: f64, support: SupportInterval, n: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let values = uniform_grid(support, n).into_iter().map(f).collect();
        Self::new(t, support, values)
    }

    /// Semicircle or Marchenko-Pastur density at time `t` on `n + 1` nodes
    /// over its exact support.
    pub fn from_family(family: &ClosedFormFamily, t: f64, n: usize) -> Result<Self> {
        if matches!(family, ClosedFormFamily::Arcsine { .. }) {
            return Err(Error::Domain(
                "the arcsine density is unbounded at its edges; use PdeState::arcsine_regularized".into(),
            ));
        }
        let support = family.support(t)?;
        let mut values: Vec<f64> =
            uniform_grid(support, n).into_iter().map(|x| family.density_raw(t, x)).collect();
        values[0] = 0.0;
        values[n] = 0.0;
        Self::new(t, support, values)
    }

    /// `min(c/√(1-x²), cap)` on `(-1, 1)` with zero endpoints.
    pub fn arcsine_regularized(c: f64, n: usize, cap: f64) -> Result<Self> {
        if !(c > 0.0 && cap > 0.0) {
            return Err(Error::RejectedInput("arcsine scale and cap must be positive".into()));
        }
        let support = SupportInterval::unit();
        let mut values: Vec<f64> = uniform_grid(support, n)
            .into_iter()
            .map(|x| {
                let r = 1.0 - x * x;
                if r > 0.0 { (c / r.sqrt()).min(cap) } else { 0.0 }
            })
            .collect();
        values[0] = 0.0;
        values[n] = 0.0;
        Self::new(0.0, support, values)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn support(&self) -> SupportInterval {
        self.support
    }

    /// Number of grid intervals `N`.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dx(&self) -> f64 {
        self.support.width() / self.intervals() as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.support, self.intervals())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `|u(x) - u(-x)|` about the support center.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n).map(|j| (self.values[j] - self.values[n - 1 - j]).abs()).fold(0.0, f64::max)
    }
}

fn uniform_grid(support: SupportInterval, n: usize) -> Vec<f64> {
    let (a, w) = (support.a(), support.width());
    (0..=n)
        .map(|j| if j == n { support.b() } else { a + w * j as f64 / n as f64 })
        .collect()
}

/// Trapezoid-rule mass.
pub fn total_mass(state: &PdeState) -> f64 {
    let v = &state.values;
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    state.dx() * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

/// Four-point Lagrange interpolation of uniform data at `x`.
fn cubic_at(a: f64, dx: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len() - 1;
    let r = (x - a) / dx;
    let j = (r.floor() as isize).clamp(1, n as isize - 2) as usize;
    let p = r - j as f64;
    let (f0, f1, f2, f3) = (values[j - 1], values[j], values[j + 1], values[j + 2]);
    -p * (p - 1.0) * (p - 2.0) / 6.0 * f0
        + (p + 1.0) * (p - 1.0) * (p - 2.0) / 2.0 * f1
        - (p + 1.0) * p * (p - 2.0) / 2.0 * f2
        + (p + 1.0) * p * (p - 1.0) / 6.0 * f3
}

/// Precomputed Gauss-Chebyshev nodes and `cos(kθ_j)` table.
struct SpectralPlan {
    modes: usize,
    nodes: Vec<f64>,
    cos: Vec<f64>,
}

impl SpectralPlan {
    fn new(modes: usize) -> Self {
        let m = quadrature_size(modes);
        let angles = gauss_chebyshev_angles(m);
        let nodes = angles.iter().map(|t| t.cos()).collect();
        let mut cos = Vec::with_capacity((modes + 1) * m);
        for k in 0..=modes {
            cos.extend(angles.iter().map(|t| (k as f64 * t).cos()));
        }
        Self { modes, nodes, cos }
    }

    /// `Hu` and `F` at every grid node.
    fn flux(&self, state: &PdeState, eps_flux: f64, step: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = self.nodes.len();
        let support = state.support;
        let dx = state.dx();
        let n = state.intervals();
        // interpolate u√(1-s²), which stays smooth at square-root edges; its
        // edge values are the limits extrapolated from the interior
        let mut weighted: Vec<f64> = state
            .values
            .iter()
            .enumerate()
            .map(|(j, u)| {
                let s = -1.0 + 2.0 * j as f64 / n as f64;
                u * (1.0 - s * s).max(0.0).sqrt()
            })
            .collect();
        let w = &weighted;
        let (lo, hi) = (
            2.0 * w[1] - w[2],
            2.0 * w[n - 1] - w[n - 2],
        );
        weighted[0] = lo.max(0.0);
        weighted[n] = hi.max(0.0);
        let g: Vec<f64> = self
            .nodes
            .iter()
            .map(|&s| cubic_at(support.a(), dx, &weighted, support.from_unit(s)))
            .collect();
        // Hu = -Σ_{k≥1} a_k U_{k-1} on the mapped interval
        let mut b = vec![0.0; self.modes];
        for (k, bk) in b.iter_mut().enumerate() {
            let row = &self.cos[(k + 1) * m..(k + 2) * m];
            let sum: f64 = g.iter().zip(row).map(|(x, c)| x * c).sum();
            *bk = -2.0 * sum / m as f64;
        }
        // below this, Hu at a vacuum node is roundoff and carries no sign
        let floor = SIGN_FLOOR * g.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let grid = state.grid();
        let mut hu = Vec::with_capacity(grid.len());
        let mut flux = Vec::with_capacity(grid.len());
        for (x, &u) in grid.iter().zip(&state.values) {
            let s = support.to_unit(*x).clamp(-1.0, 1.0);
            let h = clenshaw_u(&b, s);
            let f = if u > eps_flux {
                (h / u).atan() / PI
            } else if h.abs() > floor {
                0.5 * sign(h)
            } else {
                0.0
            };
            if !h.is_finite() || !f.is_finite() {
                return Err(Error::Breakdown { step, msg: format!("non-finite flux at x = {x}") });
            }
            hu.push(h);
            flux.push(f);
        }
        Ok((hu, flux))
    }
}

fn sign(h: f64) -> f64 {
    if h > 0.0 {
        1.0
    } else if h < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn clenshaw_u(b: &[f64], s: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in b.iter().rev() {
        let b0 = c + 2.0 * s * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Flux `F_j = (1/π) arctan(Hu(x_j)/u_j)`, with `F_j = sign(Hu)/2` where
/// `u_j ≤ eps_flux` (zero if `Hu` is at roundoff level there).
pub fn flux_field(state: &PdeState, params: &SolverParams) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(SpectralPlan::new(params.modes).flux(state, params.eps_flux, 0)?.1)
}

/// `Hu` at the grid nodes.
pub fn hilbert_field(state: &PdeState, params: &SolverParams) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(SpectralPlan::new(params.modes).flux(state, params.eps_flux, 0)?.0)
}

/// `-∂_x F` with central differences, one-sided at the ends.
fn rhs(flux: &[f64], dx: f64) -> Vec<f64> {
    let n = flux.len() - 1;
    let mut out = Vec::with_capacity(n + 1);
    out.push(-(flux[1] - flux[0]) / dx);
    for j in 1..n {
        out.push(-(flux[j + 1] - flux[j - 1]) / (2.0 * dx));
    }
    out.push(-(flux[n] - flux[n - 1]) / dx);
    out
}

/// Largest linearized wave speed: the local advection speed
/// `|Hu|/(π(u² + Hu²))` plus the coefficient `u/(π(u² + Hu²))` of the
/// nonlocal part, floored at 1.
fn wave_speed(values: &[f64], hu: &[f64], eps_flux: f64) -> f64 {
    values
        .iter()
        .zip(hu)
        .filter(|(u, _)| **u > eps_flux)
        .map(|(u, h)| (h.abs() + u) / (PI * (u * u + h * h)))
        .fold(1.0, f64::max)
}

struct Stepper {
    params: SolverParams,
    plan: SpectralPlan,
    steps: usize,
}

impl Stepper {
    fn new(params: SolverParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, plan: SpectralPlan::new(params.modes), steps: 0 })
    }

    fn stage(&self, state: &PdeState, base: &[f64], wb: f64, dt: f64, flux: &[f64]) -> Vec<f64> {
        let r = rhs(flux, state.dx());
        base.iter()
            .zip(&state.values)
            .zip(&r)
            .map(|((b, u), r)| (wb * b + (1.0 - wb) * (u + dt * r)).max(0.0))
            .collect()
    }

    fn with_values(state: &PdeState, t: f64, values: Vec<f64>) -> PdeState {
        PdeState { t, support: state.support, values }
    }

    /// One SSP-RK3 step of at most `max_dt`.
    fn step(&mut self, state: &PdeState, max_dt: f64) -> Result<PdeState> {
        if state.support.width() <= self.params.delta_stop {
            return Err(Error::Domain(format!(
                "support width {} is at or below delta_stop",
                state.support.width()
            )));
        }
        let eps = self.params.eps_flux;
        let step = self.steps;
        let (hu, f0) = self.plan.flux(state, eps, step)?;
        let speed = wave_speed(&state.values, &hu, eps);
        let dt = (self.params.cfl * state.dx() / speed).min(max_dt);
        if !(dt >= MIN_DT) {
            return Err(Error::Stagnation { step, dt });
        }
        let u0 = &state.values;
        let u1 = Self::with_values(state, state.t, self.stage(state, u0, 0.0, dt, &f0));
        let (_, f1) = self.plan.flux(&u1, eps, step)?;
        let u2 = Self::with_values(state, state.t, self.stage(&u1, u0, 0.75, dt, &f1));
        let (_, f2) = self.plan.flux(&u2, eps, step)?;
        let mut values = self.stage(&u2, u0, 1.0 / 3.0, dt, &f2);
        let n = values.len() - 1;
        values[0] = 0.0;
        values[n] = 0.0;
        self.steps += 1;
        let mut next = Self::with_values(state, state.t + dt, values);
        if self.steps % self.params.remap_stride == 0 {
            next = remap(&next, self.params.eps_supp);
        }
        Ok(next)
    }
}

/// Shrink the grid onto `{u > eps_supp · max u}` padded by two cells,
/// transferring values by cubic interpolation. Never grows the support.
fn remap(state: &PdeState, eps_supp: f64) -> PdeState {
    let v = &state.values;
    let n = v.len() - 1;
    let peak = v.iter().copied().fold(0.0, f64::max);
    let thr = eps_supp * peak;
    let (Some(lo), Some(hi)) = (v.iter().position(|u| *u > thr), v.iter().rposition(|u| *u > thr))
    else {
        return state.clone();
    };
    let lo = lo.saturating_sub(2);
    let hi = (hi + 2).min(n);
    if lo == 0 && hi == n {
        return state.clone();
    }
    let grid = state.grid();
    let Ok(support) = SupportInterval::new(grid[lo], grid[hi]) else {
        return state.clone();
    };
    let (a, dx) = (state.support.a(), state.dx());
    let mut values: Vec<f64> =
        uniform_grid(support, n).into_iter().map(|x| cubic_at(a, dx, v, x).max(0.0)).collect();
    values[0] = 0.0;
    values[n] = 0.0;
    PdeState { t: state.t, support, values }
}

/// One SSP-RK3 step with the CFL time step.
pub fn step(state: &PdeState, params: &SolverParams) -> Result<PdeState> {
    Stepper::new(*params)?.step(state, f64::INFINITY)
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    /// Reached the requested end time.
    #[serde(rename = "reached-t-end")]
    EndTime { t: f64 },
    /// The support width fell to `delta_stop` (or the mass vanished).
    SupportCollapse { t: f64, width: f64 },
}

/// Snapshots, mass history and termination reason of a run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<PdeState>,
    /// `(t, mass)` after every step, starting with the initial state.
    pub mass: Vec<(f64, f64)>,
    pub termination: Termination,
    pub steps: usize,
    pub params: SolverParams,
}

impl Trajectory {
    pub fn final_state(&self) -> &PdeState {
        self.snapshots.last().expect("a trajectory holds at least the initial state")
    }

    /// Snapshot whose time equals `t` to within `1e-12`.
    pub fn at(&self, t: f64) -> Option<&PdeState> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-12)
    }

    /// Mass interpolated linearly in `t` from the per-step history.
    pub fn mass_at(&self, t: f64) -> Option<f64> {
        let i = self.mass.iter().position(|&(s, _)| s >= t)?;
        if i == 0 {
            return (self.mass[0].0 == t).then_some(self.mass[0].1);
        }
        let ((t0, m0), (t1, m1)) = (self.mass[i - 1], self.mass[i]);
        Some(m0 + (m1 - m0) * (t - t0) / (t1 - t0))
    }

    /// Rows `t,x,u` for every snapshot.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "u"]).map_err(crate::poly_dynamics::csv_err)?;
        for s in &self.snapshots {
            for (x, u) in s.grid().iter().zip(&s.values) {
                w.write_record(&[format!("{:.16e}", s.t), format!("{x:.16e}"), format!("{u:.16e}")])
                    .map_err(crate::poly_dynamics::csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Parameters, termination reason and mass history as JSON.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params,
            "termination": self.termination,
            "steps": self.steps,
            "snapshot_times": self.snapshots.iter().map(|s| s.t).collect::<Vec<_>>(),
            "mass": self.mass.iter().map(|&(t, m)| [t, m]).collect::<Vec<_>>(),
        })
    }
}

/// Integrate from `initial` to `t_end`, landing exactly on each of
/// `snapshot_times` inside `(initial.t, t_end]`. The initial and final
/// states are always recorded.
pub fn run(initial: &PdeState, t_end: f64, snapshot_times: &[f64], params: &SolverParams) -> Result<Trajectory> {
    if !(t_end >= initial.t) {
        return Err(Error::RejectedInput(format!("t_end = {t_end} precedes the initial time {}", initial.t)));
    }
    let mut stepper = Stepper::new(*params)?;
    let mut targets: Vec<f64> =
        snapshot_times.iter().copied().filter(|&t| t > initial.t && t < t_end).collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let mut snapshots = vec![initial.clone()];
    let mut mass = vec![(initial.t, total_mass(initial))];
    let mut state = initial.clone();
    let mut termination = Termination::EndTime { t: t_end };
    'outer: for &target in &targets {
        while state.t < target {
            let width = state.support.width();
            let peak = state.values.iter().copied().fold(0.0, f64::max);
            if width <= params.delta_stop || peak == 0.0 {
                termination = Termination::SupportCollapse { t: state.t, width };
                break 'outer;
            }
            let remaining = target - state.t;
            state = stepper.step(&state, remaining)?;
            if target - state.t <= 1e-14 * target.abs().max(1.0) {
                state.t = target;
            }
            mass.push((state.t, total_mass(&state)));
        }
        if snapshots.last().map(|s| s.t) != Some(state.t) {
            snapshots.push(state.clone());
        }
    }
    if let Termination::SupportCollapse { .. } = termination {
        if snapshots.last().map(|s| s.t) != Some(state.t) {
            snapshots.push(state.clone());
        }
    }
    Ok(Trajectory { snapshots, mass, termination, steps: stepper.steps, params: *params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn semicircle(n: usize) -> PdeState {
        PdeState::from_family(&ClosedFormFamily::semicircle(1.0).unwrap(), 0.0, n).unwrap()
    }

    #[test]
    fn mass_examples() {
        assert!((total_mass(&semicircle(512)) - 1.0).abs() < 1e-4);
        let mp = PdeState::from_family(&ClosedFormFamily::marchenko_pastur(1.0).unwrap(), 0.0, 512).unwrap();
        assert!((total_mass(&mp) - 1.0).abs() < 1e-3);
        let zero = PdeState::new(0.0, SupportInterval::unit(), vec![0.0; 33]).unwrap();
        assert_eq!(total_mass(&zero), 0.0);
    }

    #[test]
    fn state_validation() {
        let s = SupportInterval::unit();
        assert!(PdeState::new(0.0, s, vec![0.0; 10]).is_err());
        let mut v = vec![1.0; 33];
        assert!(PdeState::new(0.0, s, v.clone()).is_err());
        v[0] = 0.0;
        v[32] = 0.0;
        assert!(PdeState::new(0.0, s, v.clone()).is_ok());
        v[5] = -1e-3;
        assert!(PdeState::new(0.0, s, v).is_err());
        assert!(PdeState::from_family(&ClosedFormFamily::arcsine_probability(), 0.0, 64).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(SolverParams::default().validate().is_ok());
        let p = SolverParams { cfl: 0.6, ..Default::default() };
        assert!(p.validate().is_err());
        let p = SolverParams { eps_flux: 1e-3, eps_supp: 1e-6, ..Default::default() };
        assert!(p.validate().is_err());
        let p = SolverParams { n: 8, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn cubic_reproduces_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let xs: Vec<f64> = (0..=10).map(|j| j as f64 * 0.1).collect();
        let v: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        for x in [0.0, 0.03, 0.47, 0.91, 1.0] {
            assert!((cubic_at(0.0, 0.1, &v, x) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn semicircle_flux_is_arcsin_over_pi() {
        let s = semicircle(512);
        let f = flux_field(&s, &SolverParams::default()).unwrap();
        let grid = s.grid();
        for (j, (&x, &fj)) in grid.iter().zip(&f).enumerate() {
            if j == 0 || j == 512 {
                assert_eq!(fj, if j == 0 { -0.5 } else { 0.5 });
            } else {
                // cubic sampling of the square-root edge limits accuracy there
                let tol = if x.abs() < 0.9 { 5e-5 } else { 1e-3 };
                assert!((fj - x.asin() / PI).abs() < tol, "x = {x}: {fj}");
            }
        }
        assert!(f[256].abs() < 1e-12);
    }

    #[test]
    fn uniform_profile_flux_vanishes_at_center() {
        let s = PdeState::from_fn(0.0, SupportInterval::new(-2.0, 2.0).unwrap(), 64, |x| {
            if x.abs() < 2.0 { 1.0 } else { 0.0 }
        })
        .unwrap();
        let f = flux_field(&s, &SolverParams::default()).unwrap();
        assert!(f[32].abs() < 1e-12);
        assert!(f[16] < 0.0 && f[48] > 0.0);
    }

    #[test]
    fn one_step_loses_mass_at_unit_rate_and_stays_symmetric() {
        let s = semicircle(512);
        let next = step(&s, &SolverParams::default()).unwrap();
        let dt = next.time();
        let lost = total_mass(&s) - total_mass(&next);
        assert!((lost / dt - 1.0).abs() < 0.05, "rate {}", lost / dt);
        assert!(next.asymmetry() < 1e-10);
        assert!(next.values().iter().all(|u| *u >= 0.0));
    }

    #[test]
    fn trivial_run_returns_initial_state() {
        let s = semicircle(64);
        let tr = run(&s, 0.0, &[], &SolverParams { n: 64, ..Default::default() }).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.snapshots[0], s);
        assert_eq!(tr.steps, 0);
        assert!(run(&s, -1.0, &[], &SolverParams::default()).is_err());
    }

    #[test]
    fn remap_never_grows_support() {
        let s = semicircle(128);
        let r = remap(&s, 1e-6);
        assert!(r.support().a() >= s.support().a() && r.support().b() <= s.support().b());
        let mut v = s.values().to_vec();
        for u in v.iter_mut().take(40) {
            *u = 0.0;
        }
        let shrunk = remap(&PdeState::new(0.0, s.support(), v).unwrap(), 1e-6);
        assert!(shrunk.support().a() > s.support().a());
        assert_eq!(shrunk.values()[0], 0.0);
    }
}
