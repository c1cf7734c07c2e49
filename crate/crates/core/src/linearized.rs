//! Linearization around the stationary arcsine law.
//!
//! Perturbing `u = π⁻¹(1-x²)^{-1/2}` by `w` gives `w_t + (√(1-x²) Hw)_x = 0`
//! on `(-1, 1)`. With `v = w √(1-x²) = Σ a_k T_k` the shift
//! `H[T_k/√(1-x²)] = U_{k-1}` and `∂_x(√(1-x²) U_{k-1}) = -k T_k/√(1-x²)`
//! decouple the modes:
//!
//! ```text
//! a_k(t) = a_k(0) e^{kt}   (k ≥ 1),      a_0 constant.
//! ```
//!
//! The shift above is taken with the orientation that yields growth. Under
//! the `(x - y)` kernel fixed in [`crate::chebyshev`] the image of
//! `T_k/√(1-x²)` is `-U_{k-1}`, and the same computation gives `e^{-kt}`;
//! the two models are time reversals of one another.
//!
//! [`direct_check`] rebuilds the modal rates from the operator in physical
//! space (without the Chebyshev differential equation) and integrates them
//! with RK4.

use crate::chebyshev::{gauss_chebyshev_nodes, project_samples, project_weighted, ChebSeries, Kind};
use crate::error::{Error, Result};
use crate::interval::SupportInterval;

/// Largest admissible `k·t` before `e^{kt}` is reported as overflow.
pub const MAX_EXPONENT: f64 = 700.0;

/// Size of the Chebyshev-extrema grid used for sup-norms.
pub const SUP_GRID: usize = 2048;

/// Step of the RK4 integration in [`direct_check`].
pub const RK4_STEP: f64 = 1e-4;

/// Modal coefficients `a_k(t)` of `v(t, ·) = w(t, ·)√(1-x²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedState {
    t: f64,
    modal: ChebSeries,
}

impl LinearizedState {
    pub fn new(t: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::RejectedInput(format!("time {t} is not finite")));
        }
        Ok(Self { t, modal: ChebSeries::on_unit(Kind::First, coeffs)? })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn coeffs(&self) -> &[f64] {
        self.modal.coeffs()
    }

    pub fn modal(&self) -> &ChebSeries {
        &self.modal
    }

    /// `|a_0|`; nonzero means `w(0)√(1-x²)` is not mean-zero and the
    /// constant mode rides along unchanged.
    pub fn mean_violation(&self) -> f64 {
        self.coeffs()[0].abs()
    }

    pub fn violates_mean_zero(&self, tol: f64) -> bool {
        self.mean_violation() > tol
    }

    /// `v(t, x)`.
    pub fn eval_v(&self, x: f64) -> Result<f64> {
        self.modal.eval(x)
    }

    /// `max |v(t, ·)|` over the Chebyshev extrema `cos(jπ/(M-1))`.
    pub fn sup_norm(&self) -> f64 {
        let m = SUP_GRID;
        (0..m)
            .map(|j| {
                let x = (j as f64 * std::f64::consts::PI / (m - 1) as f64).cos();
                self.modal.eval_unit(x).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Coefficients as JSON `[a_0, a_1, ...]`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self.coeffs()).expect("finite coefficients serialize")
    }

    pub fn from_json(t: f64, json: &str) -> Result<Self> {
        let coeffs: Vec<f64> = serde_json::from_str(json)
            .map_err(|e| Error::RejectedInput(format!("modal coefficients: {e}")))?;
        Self::new(t, coeffs)
    }
}

/// Modal coefficients of `v(0, ·) = w0 · √(1-x²)` over `modes + 1` modes.
pub fn project_initial<F>(w0: F, modes: usize) -> Result<LinearizedState>
where
    F: Fn(f64) -> f64,
{
    let series = project_weighted(|x| w0(x) * (1.0 - x * x).sqrt(), modes, SupportInterval::unit())?;
    Ok(LinearizedState { t: 0.0, modal: series })
}

/// Advance by `dt`: `a_k ← a_k e^{k dt}`, `a_0` unchanged. Negative `dt`
/// runs the flow backwards, which damps high modes.
pub fn evolve(state: &LinearizedState, dt: f64) -> Result<LinearizedState> {
    if !dt.is_finite() {
        return Err(Error::RejectedInput(format!("time step {dt} is not finite")));
    }
    let mut coeffs = state.coeffs().to_vec();
    for (k, a) in coeffs.iter_mut().enumerate().skip(1) {
        let exponent = k as f64 * dt;
        if *a != 0.0 && exponent > MAX_EXPONENT {
            return Err(Error::GrowthOverflow { mode: k, t: state.t + dt });
        }
        *a *= exponent.exp();
    }
    LinearizedState::new(state.t + dt, coeffs)
}

/// `w(t, x) = v(t, x)/√(1-x²)` for `|x| < 1 - 1e-9`.
pub fn eval_w(state: &LinearizedState, x: f64) -> Result<f64> {
    if !(x.abs() < 1.0 - 1e-9) {
        return Err(Error::Domain(format!("w is singular at x = {x}")));
    }
    Ok(state.eval_v(x)? / (1.0 - x * x).sqrt())
}

/// Least-squares slope of `ln ‖v(t, ·)‖_∞` against `t` over `samples`
/// equally spaced times in `[0, horizon]`.
pub fn growth_exponent(state0: &LinearizedState, horizon: f64, samples: usize) -> Result<f64> {
    if !(horizon > 0.0) || samples < 2 {
        return Err(Error::Domain("growth fit needs a positive horizon and two samples".into()));
    }
    if state0.coeffs().iter().all(|&a| a == 0.0) {
        return Err(Error::UndefinedExponent);
    }
    let mut pts = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = horizon * i as f64 / (samples - 1) as f64;
        let norm = evolve(state0, t)?.sup_norm();
        if norm <= 0.0 {
            return Err(Error::UndefinedExponent);
        }
        pts.push((t, norm.ln()));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|(t, l)| (t - tm) * (l - lm)).sum();
    let var: f64 = pts.iter().map(|(t, _)| (t - tm) * (t - tm)).sum();
    Ok(cov / var)
}

/// `U_n(x)` and `U_n'(x)` for all `n ≤ max` by the joint recurrence.
fn u_with_derivative(max: usize, x: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(max + 1);
    out.push((1.0, 0.0));
    if max >= 1 {
        out.push((2.0 * x, 2.0));
    }
    for n in 1..max {
        let (u, du) = out[n];
        let (up, dup) = out[n - 1];
        out.push((2.0 * x * u - up, 2.0 * u + 2.0 * x * du - dup));
    }
    out
}

/// Matrix `A` of the modal system `da/dt = A a` obtained by applying
/// `v ↦ -√(1-x²) ∂_x(√(1-x²) Σ a_k U_{k-1})` to each `T_k` in physical
/// space and projecting back. Row `j`, column `k`.
pub fn generator_matrix(modes: usize) -> Result<Vec<Vec<f64>>> {
    let m = 2 * modes + 3;
    let nodes = gauss_chebyshev_nodes(m);
    let tables: Vec<Vec<(f64, f64)>> = nodes.iter().map(|&x| u_with_derivative(modes, x)).collect();
    let mut a = vec![vec![0.0; modes + 1]; modes + 1];
    for k in 1..=modes {
        // -(√(1-x²)·d/dx[√(1-x²) U_{k-1}]) = x U_{k-1} - (1-x²) U'_{k-1}
        let samples: Vec<f64> = nodes
            .iter()
            .zip(&tables)
            .map(|(&x, tab)| {
                let (u, du) = tab[k - 1];
                x * u - (1.0 - x * x) * du
            })
            .collect();
        let image = project_samples(&samples, modes, SupportInterval::unit())?;
        for (j, &c) in image.coeffs().iter().enumerate() {
            a[j][k] = c;
        }
    }
    Ok(a)
}

/// Diagonal of [`generator_matrix`].
pub fn modal_rates(modes: usize) -> Result<Vec<f64>> {
    let a = generator_matrix(modes)?;
    Ok((0..=modes).map(|k| a[k][k]).collect())
}

/// RK4 integration of the modal system with rates from
/// [`modal_rates`], compared against [`evolve`]. Returns
/// `max_k |a_k^{RK4}(t) - a_k(0)e^{kt}| / max(1, |a_k(0)e^{kt}|)`.
pub fn direct_check(state0: &LinearizedState, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("direct check needs t ≥ 0, got {t}")));
    }
    let modes = state0.coeffs().len() - 1;
    let rates = modal_rates(modes)?;
    let exact = evolve(state0, t)?;
    let steps = (t / RK4_STEP).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut worst: f64 = 0.0;
    for (k, (&a0, &rate)) in state0.coeffs().iter().zip(&rates).enumerate() {
        let mut y = a0;
        for _ in 0..steps {
            let k1 = rate * y;
            let k2 = rate * (y + 0.5 * h * k1);
            let k3 = rate * (y + 0.5 * h * k2);
            let k4 = rate * (y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let want = exact.coeffs()[k];
        worst = worst.max((y - want).abs() / want.abs().max(1.0));
    }
    Ok(worst)
}
