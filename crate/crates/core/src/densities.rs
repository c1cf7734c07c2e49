//! Closed-form solutions of the transport equation.
//!
//! * arcsine: `u = c / √(1-x²)` on `(-1, 1)`, stationary;
//! * semicircle: `u = (2/π) √((T-t) - x²)`, vanishing at `t = T`;
//! * Marchenko-Pastur: `u_c(t, x) = v((c+t)/(1-t), x/(1-t))` with
//!   `v(c, y) = √((y₊-y)(y-y₋)) / (2πy)` and `y± = (√(c+1) ± 1)²`,
//!   vanishing at `t = 1`.
//!
//! Every family is parametrised on its support by `x = m - ℓ cos θ`,
//! `θ ∈ [0, π]`, in which all three cumulative distribution functions have
//! closed forms. Quantiles are found by bisection in `θ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::interval::SupportInterval;
use crate::poly_dynamics::RootConfiguration;

/// Absolute tolerance in `x` for [`ClosedFormFamily::quantile`].
pub const QUANTILE_TOL: f64 = 1e-12;

/// Probability normalization of the arcsine law.
pub const ARCSINE_PROBABILITY: f64 = 1.0 / PI;

/// Parameters of one of the three explicit solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ClosedFormFamily {
    Arcsine { c: f64 },
    Semicircle { vanish_time: f64 },
    MarchenkoPastur { c: f64 },
}

impl ClosedFormFamily {
    pub fn arcsine(c: f64) -> Result<Self> {
        Self::Arcsine { c }.validated()
    }

    /// The arcsine law with unit mass.
    pub fn arcsine_probability() -> Self {
        Self::Arcsine { c: ARCSINE_PROBABILITY }
    }

    pub fn semicircle(vanish_time: f64) -> Result<Self> {
        Self::Semicircle { vanish_time }.validated()
    }

    pub fn marchenko_pastur(c: f64) -> Result<Self> {
        Self::MarchenkoPastur { c }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::Arcsine { c } => c.is_finite() && c > 0.0,
            Self::Semicircle { vanish_time } => vanish_time.is_finite() && vanish_time > 0.0,
            Self::MarchenkoPastur { c } => c.is_finite() && c >= 0.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Domain(format!("invalid family parameters {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Arcsine { .. } => "arcsine",
            Self::Semicircle { .. } => "semicircle",
            Self::MarchenkoPastur { .. } => "marchenko-pastur",
        }
    }

    /// End of the validity window (exclusive), `None` if unbounded.
    pub fn final_time(&self) -> Option<f64> {
        match *self {
            Self::Arcsine { .. } => None,
            Self::Semicircle { vanish_time } => Some(vanish_time),
            Self::MarchenkoPastur { .. } => Some(1.0),
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        self.validated()?;
        let ok = match self.final_time() {
            None => t.is_finite(),
            Some(end) => t.is_finite() && (0.0..end).contains(&t),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "t = {t} is outside the validity window of the {} solution",
                self.name()
            )))
        }
    }

    /// Center `m` and half-width `ℓ` of the support at time `t`, without
    /// validity checks. The formulas continue analytically to slightly
    /// negative `t`, which the finite-difference residuals rely on.
    fn geometry(&self, t: f64) -> (f64, f64) {
        match *self {
            Self::Arcsine { .. } => (0.0, 1.0),
            Self::Semicircle { vanish_time } => (0.0, (vanish_time - t).sqrt()),
            Self::MarchenkoPastur { c } => {
                let cp = mp_parameter(c, t);
                let scale = 1.0 - t;
                (scale * (cp + 2.0), scale * 2.0 * (cp + 1.0).sqrt())
            }
        }
    }

    /// Density without validity checks.
    pub(crate) fn density_raw(&self, t: f64, x: f64) -> f64 {
        match *self {
            Self::Arcsine { c } => {
                if x.abs() < 1.0 {
                    c / (1.0 - x * x).sqrt()
                } else {
                    0.0
                }
            }
            Self::Semicircle { vanish_time } => {
                (2.0 / PI) * (vanish_time - t - x * x).max(0.0).sqrt()
            }
            Self::MarchenkoPastur { c } => {
                let y = x / (1.0 - t);
                mp_density(mp_parameter(c, t), y)
            }
        }
    }

    /// Hilbert transform on the open support, without checks.
    pub(crate) fn hilbert_raw(&self, t: f64, x: f64) -> f64 {
        match *self {
            Self::Arcsine { .. } => 0.0,
            Self::Semicircle { .. } => 2.0 * x / PI,
            Self::MarchenkoPastur { c } => (x - (c + t)) / (2.0 * PI * x),
        }
    }

    /// `(1/π) arctan(Hu/u)` on the open support, without checks.
    pub(crate) fn flux_raw(&self, t: f64, x: f64) -> f64 {
        let u = self.density_raw(t, x);
        let h = self.hilbert_raw(t, x);
        (h / u).atan() / PI
    }

    /// Density `u(t, x)`; zero outside the open support.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.density_raw(t, x))
    }

    pub fn support(&self, t: f64) -> Result<SupportInterval> {
        self.check_time(t)?;
        let (m, l) = self.geometry(t);
        SupportInterval::new(m - l, m + l)
    }

    /// `Hu(t, x)` for `x` strictly inside the support.
    pub fn hilbert(&self, t: f64, x: f64) -> Result<f64> {
        self.require_interior(t, x)?;
        Ok(self.hilbert_raw(t, x))
    }

    /// Flux `(1/π) arctan(Hu/u)` for `x` strictly inside the support.
    pub fn flux(&self, t: f64, x: f64) -> Result<f64> {
        self.require_interior(t, x)?;
        Ok(self.flux_raw(t, x))
    }

    fn require_interior(&self, t: f64, x: f64) -> Result<()> {
        let s = self.support(t)?;
        if s.contains_open(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "x = {x} is not inside the open support ({}, {})",
                s.a(),
                s.b()
            )))
        }
    }

    /// Total mass: `cπ`, `T - t` and `1 - t` respectively.
    pub fn mass(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.mass_raw(t))
    }

    fn mass_raw(&self, t: f64) -> f64 {
        match *self {
            Self::Arcsine { c } => c * PI,
            Self::Semicircle { vanish_time } => vanish_time - t,
            Self::MarchenkoPastur { .. } => 1.0 - t,
        }
    }

    /// Unnormalized CDF in the angle variable `x = m - ℓ cos θ`.
    fn cdf_angle(&self, t: f64, theta: f64) -> f64 {
        match *self {
            Self::Arcsine { c } => c * theta,
            Self::Semicircle { vanish_time } => {
                let s = vanish_time - t;
                s / PI * (theta - theta.sin() * theta.cos())
            }
            Self::MarchenkoPastur { c } => {
                let cp = mp_parameter(c, t);
                let l = 2.0 * (cp + 1.0).sqrt();
                let m = cp + 2.0;
                // ψ is the image of θ under the map that straightens the
                // 1/y factor of the density
                let psi = (cp * theta.sin()).atan2(m * theta.cos() - l);
                let psi = if psi < 0.0 { psi + 2.0 * PI } else { psi };
                (1.0 - t) * (l * theta.sin() + m * theta - cp * psi) / (2.0 * PI)
            }
        }
    }

    fn angle_of(&self, t: f64, x: f64) -> f64 {
        let (m, l) = self.geometry(t);
        ((m - x) / l).clamp(-1.0, 1.0).acos()
    }

    /// Unnormalized CDF `∫_{-∞}^x u(t, y) dy`.
    pub fn cdf(&self, t: f64, x: f64) -> Result<f64> {
        self.check_time(t)?;
        let (m, l) = self.geometry(t);
        Ok(if x <= m - l {
            0.0
        } else if x >= m + l {
            self.mass_raw(t)
        } else {
            self.cdf_angle(t, self.angle_of(t, x))
        })
    }

    /// `x` with `CDF(x) = q · mass`.
    pub fn quantile(&self, t: f64, q: f64) -> Result<f64> {
        self.check_time(t)?;
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("quantile level {q} is outside [0, 1]")));
        }
        let (m, l) = self.geometry(t);
        if let Self::Arcsine { .. } = self {
            return Ok(-(PI * q).cos());
        }
        let target = q * self.mass_raw(t);
        let (mut lo, mut hi) = (0.0, PI);
        // bisection in θ; |dx/dθ| ≤ ℓ
        while l * (hi - lo) > QUANTILE_TOL && hi - lo > 4.0 * f64::EPSILON {
            let mid = 0.5 * (lo + hi);
            if self.cdf_angle(t, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(m - l * (0.5 * (lo + hi)).cos())
    }

    /// Deterministic sample at the quantiles `(i - 1/2)/n`, `i = 1..n`.
    pub fn sample_roots(&self, t: f64, n: usize) -> Result<RootConfiguration> {
        if n < 2 {
            return Err(Error::Domain(format!("need at least two roots, got {n}")));
        }
        let roots = (0..n)
            .map(|i| self.quantile(t, (i as f64 + 0.5) / n as f64))
            .collect::<Result<Vec<_>>>()?;
        RootConfiguration::new(roots).map_err(|e| Error::Construction(format!("quantile sample: {e}")))
    }

    /// Location and height of the density maximum; `None` for the arcsine
    /// law, which is unbounded at both edges.
    pub fn peak(&self, t: f64) -> Result<Option<(f64, f64)>> {
        self.check_time(t)?;
        Ok(match *self {
            Self::Arcsine { .. } => None,
            Self::Semicircle { vanish_time } => Some((0.0, 2.0 / PI * (vanish_time - t).sqrt())),
            Self::MarchenkoPastur { c } => {
                let cp = mp_parameter(c, t);
                if cp == 0.0 {
                    None
                } else {
                    // maximiser of √((y₊-y)(y-y₋))/y is 2y₊y₋/(y₊+y₋)
                    let y = cp * cp / (cp + 2.0);
                    Some(((1.0 - t) * y, mp_density(cp, y)))
                }
            }
        })
    }

    /// `∂_t u + ∂_x F` at `(t, x)` with both derivatives taken by fourth-order
    /// central differences of step `h` on the analytic fields.
    pub fn transport_residual(&self, t: f64, x: f64, h: f64) -> Result<f64> {
        self.require_interior(t, x)?;
        let d4 = |f: &dyn Fn(f64) -> f64, z: f64| {
            (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h)
        };
        let du_dt = d4(&|s| self.density_raw(s, x), t);
        let df_dx = d4(&|y| self.flux_raw(t, y), x);
        Ok(du_dt + df_dx)
    }
}

/// `c' = (c + t)/(1 - t)`.
fn mp_parameter(c: f64, t: f64) -> f64 {
    (c + t) / (1.0 - t)
}

/// Marchenko-Pastur density `v(c, y)`.
pub fn mp_density(c: f64, y: f64) -> f64 {
    let s = (c + 1.0).sqrt();
    let (lo, hi) = ((s - 1.0).powi(2), (s + 1.0).powi(2));
    if y <= lo || y >= hi || y <= 0.0 {
        return 0.0;
    }
    ((hi - y) * (y - lo)).max(0.0).sqrt() / (2.0 * PI * y)
}

/// Support endpoints `(y₋, y₊)` of `v(c, ·)`.
pub fn mp_edges(c: f64) -> (f64, f64) {
    let s = (c + 1.0).sqrt();
    ((s - 1.0).powi(2), (s + 1.0).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    /// `∫ f` over `[a, b]` after `x = m - ℓ cos θ`, which absorbs square-root
    /// edges; independent of the closed-form CDFs.
    fn angle_quadrature(f: impl Fn(f64) -> f64, a: f64, b: f64, upto: f64) -> f64 {
        let (m, l) = (0.5 * (a + b), 0.5 * (b - a));
        let theta_end = ((m - upto) / l).clamp(-1.0, 1.0).acos();
        let gl = GaussLegendre::new(200);
        let pieces = 16;
        (0..pieces)
            .map(|i| {
                let t0 = theta_end * i as f64 / pieces as f64;
                let t1 = theta_end * (i + 1) as f64 / pieces as f64;
                gl.integrate(t0, t1, |th| f(m - l * th.cos()) * l * th.sin())
            })
            .sum()
    }

    fn semi(t: f64) -> ClosedFormFamily {
        ClosedFormFamily::semicircle(t).unwrap()
    }

    fn mp(c: f64) -> ClosedFormFamily {
        ClosedFormFamily::marchenko_pastur(c).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((semi(1.0).eval(0.0, 0.0).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert_eq!(semi(1.0).eval(0.75, 0.6).unwrap(), 0.0);
        let s = mp(0.0).support(0.0).unwrap();
        assert!(s.a().abs() < 1e-15 && (s.b() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn endpoints_evaluate_to_zero() {
        let f = semi(1.0);
        let s = f.support(0.3).unwrap();
        assert_eq!(f.eval(0.3, s.a()).unwrap(), 0.0);
        assert_eq!(f.eval(0.3, s.b()).unwrap(), 0.0);
        let a = ClosedFormFamily::arcsine_probability();
        assert_eq!(a.eval(0.0, 1.0).unwrap(), 0.0);
        let g = mp(1.0);
        let s = g.support(0.2).unwrap();
        assert_eq!(g.eval(0.2, s.a()).unwrap(), 0.0);
        assert_eq!(g.eval(0.2, s.b()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_times_outside_window() {
        assert!(matches!(semi(1.0).eval(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(semi(1.0).eval(-0.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(mp(1.0).mass(1.0), Err(Error::Domain(_))));
        assert!(ClosedFormFamily::arcsine_probability().eval(12.0, 0.1).is_ok());
        assert!(ClosedFormFamily::semicircle(0.0).is_err());
        assert!(ClosedFormFamily::marchenko_pastur(-0.5).is_err());
        assert!(ClosedFormFamily::arcsine(0.0).is_err());
    }

    #[test]
    fn support_examples() {
        let s = semi(1.0).support(0.36).unwrap();
        assert!((s.a() + 0.8).abs() < 1e-15 && (s.b() - 0.8).abs() < 1e-15);
        let s = ClosedFormFamily::arcsine_probability().support(3.0).unwrap();
        assert_eq!((s.a(), s.b()), (-1.0, 1.0));
        let s = mp(1.0).support(0.0).unwrap();
        let r = 2f64.sqrt();
        assert!((s.a() - (r - 1.0).powi(2)).abs() < 1e-14);
        assert!((s.b() - (r + 1.0).powi(2)).abs() < 1e-14);
        assert!((s.a() - 0.17157).abs() < 1e-5 && (s.b() - 5.82843).abs() < 1e-5);
        // time-dependent MP support is the dilated v-support
        let s = mp(1.0).support(0.5).unwrap();
        assert!((s.a() - 0.5).abs() < 1e-14 && (s.b() - 4.5).abs() < 1e-14);
    }

    #[test]
    fn hilbert_examples() {
        let a = ClosedFormFamily::arcsine_probability();
        assert_eq!(a.hilbert(0.0, 0.5).unwrap(), 0.0);
        assert!((semi(1.0).hilbert(0.0, 0.3).unwrap() - 0.6 / PI).abs() < 1e-15);
        assert_eq!(mp(1.0).hilbert(0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(semi(1.0).hilbert(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn mass_examples_against_quadrature() {
        assert_eq!(semi(1.0).mass(0.25).unwrap(), 0.75);
        assert_eq!(mp(2.0).mass(0.0).unwrap(), 1.0);
        assert!((ClosedFormFamily::arcsine_probability().mass(0.0).unwrap() - 1.0).abs() < 1e-15);

        let cases = [
            (semi(1.0), 0.25),
            (semi(2.5), 1.1),
            (mp(2.0), 0.0),
            (mp(1.0), 0.5),
            (mp(0.0), 0.3),
            (mp(15.0), 0.9),
            (ClosedFormFamily::arcsine(0.7).unwrap(), 0.0),
        ];
        for (f, t) in cases {
            let s = f.support(t).unwrap();
            let q = angle_quadrature(|x| f.density_raw(t, x), s.a(), s.b(), s.b());
            assert!((q - f.mass(t).unwrap()).abs() < 1e-10, "{f:?} t={t}: {q}");
        }
    }

    #[test]
    fn cdf_matches_quadrature() {
        for (f, t) in [(semi(1.0), 0.1), (mp(1.0), 0.0), (mp(0.0), 0.0), (mp(15.0), 0.5), (mp(0.3), 0.7)] {
            let s = f.support(t).unwrap();
            for i in 1..10 {
                let x = s.a() + s.width() * i as f64 / 10.0;
                let q = angle_quadrature(|y| f.density_raw(t, y), s.a(), s.b(), x);
                let c = f.cdf(t, x).unwrap();
                // at the hard edge of c = 0 the oracle loses digits to 1 - cos θ
                let tol = if f == mp(0.0) { 1e-9 } else { 1e-12 };
                assert!((q - c).abs() < tol, "{f:?} t={t} x={x}: {q} vs {c}");
            }
            assert_eq!(f.cdf(t, s.a() - 1.0).unwrap(), 0.0);
            assert_eq!(f.cdf(t, s.b() + 1.0).unwrap(), f.mass(t).unwrap());
        }
    }

    #[test]
    fn quantile_examples() {
        let a = ClosedFormFamily::arcsine_probability();
        assert!(a.quantile(0.0, 0.5).unwrap().abs() < 1e-15);
        assert!(semi(1.0).quantile(0.0, 0.5).unwrap().abs() < 1e-12);
        // bisection against the quadrature CDF, independent of the
        // closed-form CDF: ≈ -0.40397
        let oracle = {
            let (mut lo, mut hi) = (-1.0, 0.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let c = angle_quadrature(|y| semi(1.0).density_raw(0.0, y), -1.0, 1.0, mid);
                if c < 0.25 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let q = semi(1.0).quantile(0.0, 0.25).unwrap();
        assert!((q - oracle).abs() < 1e-11, "{q} vs {oracle}");
        assert!((q + 0.40397).abs() < 1e-5);
        assert!(a.quantile(0.0, 1.5).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for (f, t) in [(semi(1.0), 0.4), (mp(1.0), 0.2), (mp(15.0), 0.0), (mp(0.0), 0.0)] {
            let mass = f.mass(t).unwrap();
            for i in 0..=20 {
                let q = i as f64 / 20.0;
                let x = f.quantile(t, q).unwrap();
                assert!((f.cdf(t, x).unwrap() / mass - q).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sample_examples() {
        let a = ClosedFormFamily::arcsine_probability();
        let r = a.sample_roots(0.0, 2).unwrap();
        let h = 0.5 * 2f64.sqrt();
        assert!((r.roots()[0] + h).abs() < 1e-15 && (r.roots()[1] - h).abs() < 1e-15);
        let r = semi(1.0).sample_roots(0.0, 3).unwrap();
        assert!(r.roots()[1].abs() < 1e-12);
        for f in [a, semi(1.0), mp(1.0), mp(0.0)] {
            let r = f.sample_roots(0.0, 5).unwrap();
            assert!(r.roots().windows(2).all(|w| w[0] < w[1]));
            let s = f.support(0.0).unwrap();
            assert!(r.roots().iter().all(|&x| s.contains(x)));
        }
        assert!(semi(1.0).sample_roots(0.0, 1).is_err());
    }

    #[test]
    fn peaks() {
        let (x, u) = semi(1.0).peak(0.6).unwrap().unwrap();
        assert_eq!(x, 0.0);
        assert!((u - 2.0 / PI * 0.4f64.sqrt()).abs() < 1e-15);
        let f = mp(1.0);
        let (x, u) = f.peak(0.2).unwrap().unwrap();
        for dx in [-1e-4, 1e-4] {
            assert!(f.eval(0.2, x + dx).unwrap() < u);
        }
        assert!(ClosedFormFamily::arcsine_probability().peak(0.0).unwrap().is_none());
        assert!(mp(0.0).peak(0.0).unwrap().is_none());
    }

    #[test]
    fn semicircle_flux_derivative_matches_closed_form() {
        // (1/π) ∂_x arctan(x/√(s-x²)) = 1/(π√(s-x²))
        let f = semi(1.0);
        for &x in &[-0.7, -0.2, 0.0, 0.45, 0.8] {
            let h = 1e-4;
            let v = |dx: f64| f.flux_raw(0.3, x + dx);
            let d = (-v(2.0 * h) + 8.0 * v(h) - 8.0 * v(-h) + v(-2.0 * h)) / (12.0 * h);
            let want = 1.0 / (PI * (0.7 - x * x).sqrt());
            assert!((d - want).abs() < 1e-8 * want, "x = {x}: {d} vs {want}");
        }
    }

    #[test]
    fn mp_flux_derivative_matches_closed_form() {
        // (c+t+x) / (2πx √(2(2+c-t)x - (c+t)² - x²))
        for (c, t) in [(1.0, 0.0), (1.0, 0.5), (15.0, 0.2)] {
            let f = mp(c);
            let s = f.support(t).unwrap();
            for i in 1..10 {
                let x = s.a() + s.width() * i as f64 / 10.0;
                let h = 1e-5 * s.width();
                let d = (f.flux_raw(t, x + h) - f.flux_raw(t, x - h)) / (2.0 * h);
                let want = (c + t + x)
                    / (2.0 * PI * x * (2.0 * (2.0 + c - t) * x - (c + t).powi(2) - x * x).sqrt());
                assert!((d - want).abs() < 1e-6 * want.abs().max(1.0), "c={c} t={t} x={x}");
            }
        }
    }
}
