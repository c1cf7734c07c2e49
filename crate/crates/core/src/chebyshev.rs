//! Chebyshev series on an interval and the finite Hilbert transform.
//!
//! The Hilbert transform is fixed once for the whole crate as
//!
//! ```text
//! Hf(x) = (1/π) p.v. ∫ f(y) / (x - y) dy
//! ```
//!
//! Under this kernel the two shift identities read
//!
//! ```text
//! H[ T_k(y) / √(1-y²) ](x) = -U_{k-1}(x)      (k ≥ 1, and 0 for k = 0)
//! H[ √(1-y²) U_{k-1}(y) ](x) = T_k(x)         (k ≥ 1)
//! ```
//!
//! The second one gives `H[√(1-y²)](x) = x`, hence `Hu = 2x/π` for the
//! semicircle `u = (2/π)√(1-x²)`. Both signs are pinned by direct
//! principal-value quadrature in the tests.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::interval::SupportInterval;

/// Above this degree `T_k` and `U_k` are evaluated in trigonometric form.
pub const RECURRENCE_MAX_DEGREE: usize = 64;

/// Default number of modes.
pub const DEFAULT_MODES: usize = 256;

/// Basis of a [`ChebSeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// `T_k`
    First,
    /// `U_k`
    Second,
}

/// `Σ_k coeffs[k] · P_k(s(x))` where `P` is `T` or `U` and `s` maps the
/// interval affinely onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    kind: Kind,
    coeffs: Vec<f64>,
    interval: SupportInterval,
}

impl ChebSeries {
    pub fn new(kind: Kind, coeffs: Vec<f64>, interval: SupportInterval) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::RejectedInput("series needs at least one coefficient".into()));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::RejectedInput(format!("coefficient {k} is not finite")));
        }
        Ok(Self { kind, coeffs, interval })
    }

    /// Series on `[-1, 1]`.
    pub fn on_unit(kind: Kind, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(kind, coeffs, SupportInterval::unit())
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn interval(&self) -> SupportInterval {
        self.interval
    }

    /// Highest mode index `K` (the series holds `K + 1` coefficients).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Evaluate at `x` in the series interval.
    pub fn eval(&self, x: f64) -> Result<f64> {
        eval_series(self, x)
    }

    /// Evaluate at a point `s` of the reference interval, skipping the
    /// affine map and the domain check.
    pub fn eval_unit(&self, s: f64) -> f64 {
        match self.kind {
            Kind::First => clenshaw_first(&self.coeffs, s),
            Kind::Second => clenshaw_second(&self.coeffs, s),
        }
    }
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// `T_k(x)`.
pub fn eval_t(k: usize, x: f64) -> f64 {
    let x = clamp_unit(x);
    match k {
        0 => 1.0,
        1 => x,
        _ if k <= RECURRENCE_MAX_DEGREE => {
            let (mut prev, mut cur) = (1.0, x);
            for _ in 1..k {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
        _ => (k as f64 * x.acos()).cos(),
    }
}

/// `U_k(x)`.
pub fn eval_u(k: usize, x: f64) -> f64 {
    let x = clamp_unit(x);
    let recurrence = |k: usize| {
        let (mut prev, mut cur) = (1.0, 2.0 * x);
        for _ in 1..k {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    };
    match k {
        0 => 1.0,
        1 => 2.0 * x,
        _ if k <= RECURRENCE_MAX_DEGREE => recurrence(k),
        _ => {
            let theta = x.acos();
            let s = theta.sin();
            if s < 1e-6 {
                // sin((k+1)θ)/sin θ loses accuracy next to ±1
                recurrence(k)
            } else {
                ((k as f64 + 1.0) * theta).sin() / s
            }
        }
    }
}

fn clenshaw_first(a: &[f64], s: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ak in a.iter().skip(1).rev() {
        let b0 = ak + 2.0 * s * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    a[0] + s * b1 - b2
}

fn clenshaw_second(a: &[f64], s: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ak in a.iter().rev() {
        let b0 = ak + 2.0 * s * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Value of the expansion at `x`.
pub fn eval_series(series: &ChebSeries, x: f64) -> Result<f64> {
    let iv = series.interval;
    let s = iv.to_unit(x);
    if !s.is_finite() || s.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "x = {x} lies outside [{}, {}]",
            iv.a(),
            iv.b()
        )));
    }
    Ok(series.eval_unit(clamp_unit(s)))
}

/// Angles `θ_j = (2j+1)π/(2M)` of the `M`-point Gauss-Chebyshev rule.
pub fn gauss_chebyshev_angles(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| (2 * j + 1) as f64 * PI / (2 * m) as f64)
        .collect()
}

/// Nodes `cos θ_j` of the `M`-point Gauss-Chebyshev rule, descending.
pub fn gauss_chebyshev_nodes(m: usize) -> Vec<f64> {
    gauss_chebyshev_angles(m).into_iter().map(f64::cos).collect()
}

/// Quadrature size used for a projection onto `modes + 1` coefficients.
pub fn quadrature_size(modes: usize) -> usize {
    2 * modes + 1
}

/// First-kind coefficients from samples of `g` at the nodes returned by
/// [`gauss_chebyshev_nodes`]`(samples.len())`.
///
/// `a_0 = (1/π)∫ g w`, `a_k = (2/π)∫ g T_k w` with `w = (1-x²)^{-1/2}`.
pub fn project_samples(samples: &[f64], modes: usize, interval: SupportInterval) -> Result<ChebSeries> {
    let m = samples.len();
    if m < modes + 1 {
        return Err(Error::RejectedInput(format!(
            "{m} quadrature nodes cannot resolve {} modes",
            modes + 1
        )));
    }
    if let Some(j) = samples.iter().position(|g| !g.is_finite()) {
        return Err(Error::RejectedInput(format!("sample {j} is not finite")));
    }
    let angles = gauss_chebyshev_angles(m);
    let mut coeffs = vec![0.0; modes + 1];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let kf = k as f64;
        let sum: f64 = samples
            .iter()
            .zip(&angles)
            .map(|(g, th)| g * (kf * th).cos())
            .sum();
        *c = if k == 0 { sum / m as f64 } else { 2.0 * sum / m as f64 };
    }
    ChebSeries::new(Kind::First, coeffs, interval)
}

/// Project `g` (a function on the interval) onto `modes + 1` first-kind
/// modes with a `2·modes + 1` point Gauss-Chebyshev rule.
pub fn project_weighted<F>(g: F, modes: usize, interval: SupportInterval) -> Result<ChebSeries>
where
    F: Fn(f64) -> f64,
{
    let samples: Vec<f64> = gauss_chebyshev_nodes(quadrature_size(modes))
        .into_iter()
        .map(|s| g(interval.from_unit(s)))
        .collect();
    project_samples(&samples, modes, interval)
}

/// `Hf` for `f = g / √(1-x²)` where `series` holds the first-kind
/// coefficients of `g`. Returns the second-kind series `b_j = -a_{j+1}`;
/// the constant mode is annihilated.
pub fn finite_hilbert_weighted(series: &ChebSeries) -> Result<ChebSeries> {
    if series.kind != Kind::First {
        return Err(Error::Domain("expected a first-kind series".into()));
    }
    let coeffs = if series.coeffs.len() == 1 {
        vec![0.0]
    } else {
        series.coeffs[1..].iter().map(|a| -a).collect()
    };
    ChebSeries::new(Kind::Second, coeffs, series.interval)
}

/// `Hf` for `f = √(1-x²) · h` where `series` holds the second-kind
/// coefficients of `h`. Returns the first-kind series `c_n = b_{n-1}`,
/// `c_0 = 0`.
pub fn finite_hilbert_sqrtweight(series: &ChebSeries) -> Result<ChebSeries> {
    if series.kind != Kind::Second {
        return Err(Error::Domain("expected a second-kind series".into()));
    }
    let mut coeffs = Vec::with_capacity(series.coeffs.len() + 1);
    coeffs.push(0.0);
    coeffs.extend_from_slice(&series.coeffs);
    ChebSeries::new(Kind::First, coeffs, series.interval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    fn unit(kind: Kind, c: &[f64]) -> ChebSeries {
        ChebSeries::on_unit(kind, c.to_vec()).unwrap()
    }

    #[test]
    fn low_degree_values() {
        assert_eq!(eval_t(1, 0.3), 0.3);
        assert_eq!(eval_t(0, -0.7), 1.0);
        assert!((eval_t(3, 0.5) + 1.0).abs() < 1e-15);
        assert_eq!(eval_u(1, 0.25), 0.5);
        assert_eq!(eval_u(0, 0.9), 1.0);
        assert!(eval_u(2, 0.5).abs() < 1e-15);
    }

    #[test]
    fn recurrence_and_trigonometric_forms_agree() {
        for &x in &[-1.0, -0.999, -0.41, 0.0, 0.123, 0.77, 0.9999, 1.0] {
            for k in 40..=RECURRENCE_MAX_DEGREE {
                let t_trig = (k as f64 * f64::acos(x)).cos();
                assert!((eval_t(k, x) - t_trig).abs() < 1e-10, "T_{k}({x})");
                let th = f64::acos(x);
                if th.sin() > 1e-3 {
                    let u_trig = ((k as f64 + 1.0) * th).sin() / th.sin();
                    assert!((eval_u(k, x) - u_trig).abs() < 1e-10, "U_{k}({x})");
                }
            }
        }
        // endpoints for large k
        assert!((eval_u(100, 1.0) - 101.0).abs() < 1e-9);
        assert!((eval_u(101, -1.0) + 102.0).abs() < 1e-9);
        assert!((eval_t(1000, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clamps_slightly_outside_unit_interval() {
        assert_eq!(eval_t(5, 1.0 + 1e-13), 1.0);
    }

    #[test]
    fn projection_examples() {
        let iv = SupportInterval::unit();
        let s = project_weighted(|x| eval_t(2, x), 8, iv).unwrap();
        for (k, a) in s.coeffs().iter().enumerate() {
            let want = if k == 2 { 1.0 } else { 0.0 };
            assert!((a - want).abs() < 1e-12, "a_{k} = {a}");
        }
        let s = project_weighted(|_| 1.0, 4, iv).unwrap();
        assert!((s.coeffs()[0] - 1.0).abs() < 1e-14);
        assert!(s.coeffs()[1..].iter().all(|a| a.abs() < 1e-14));
        let s = project_weighted(|x| x * x * x, 8, iv).unwrap();
        for (k, a) in s.coeffs().iter().enumerate() {
            let want = match k {
                1 => 0.75,
                3 => 0.25,
                _ => 0.0,
            };
            assert!((a - want).abs() < 1e-12, "a_{k} = {a}");
        }
    }

    #[test]
    fn projection_matches_legendre_quadrature() {
        // a_k = (2/π)∫ g(cos θ) cos kθ dθ, evaluated by an unrelated rule
        let g = |x: f64| (1.3 * x).exp() * (2.0 + x).recip();
        let s = project_weighted(g, 24, SupportInterval::unit()).unwrap();
        let gl = GaussLegendre::new(80);
        for k in 0..=24 {
            let norm = if k == 0 { 1.0 / PI } else { 2.0 / PI };
            let want = norm * gl.integrate(0.0, PI, |th| g(th.cos()) * (k as f64 * th).cos());
            assert!((s.coeffs()[k] - want).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn rejects_non_finite_samples() {
        let r = project_weighted(|x| if x > 0.5 { f64::NAN } else { x }, 4, SupportInterval::unit());
        assert!(matches!(r, Err(Error::RejectedInput(_))));
    }

    #[test]
    fn projection_on_shifted_interval() {
        let iv = SupportInterval::new(2.0, 6.0).unwrap();
        let s = project_weighted(|x| x * x, 6, iv).unwrap();
        for &x in &[2.0, 3.3, 4.0, 5.9, 6.0] {
            assert!((s.eval(x).unwrap() - x * x).abs() < 1e-12);
        }
        assert!(matches!(s.eval(6.5), Err(Error::Domain(_))));
    }

    #[test]
    fn weighted_transform_examples() {
        let h = finite_hilbert_weighted(&unit(Kind::First, &[5.0, 0.0, 0.0])).unwrap();
        assert_eq!(h.kind(), Kind::Second);
        assert!(h.coeffs().iter().all(|&b| b == 0.0));

        let h = finite_hilbert_weighted(&unit(Kind::First, &[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(h.coeffs(), &[-1.0, -0.0]);

        let h = finite_hilbert_weighted(&unit(Kind::First, &[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(h.coeffs(), &[-0.0, -0.0, -1.0]);

        let h = finite_hilbert_weighted(&unit(Kind::First, &[3.0])).unwrap();
        assert_eq!(h.coeffs(), &[0.0]);

        assert!(finite_hilbert_weighted(&unit(Kind::Second, &[1.0])).is_err());
    }

    #[test]
    fn sqrtweight_transform_examples() {
        let h = finite_hilbert_sqrtweight(&unit(Kind::Second, &[1.0, 0.0])).unwrap();
        assert_eq!(h.kind(), Kind::First);
        assert_eq!(h.coeffs(), &[0.0, 1.0, 0.0]);
        let h = finite_hilbert_sqrtweight(&unit(Kind::Second, &[0.0, 1.0])).unwrap();
        assert_eq!(h.coeffs(), &[0.0, 0.0, 1.0]);
        let h = finite_hilbert_sqrtweight(&unit(Kind::Second, &[0.0, 0.0])).unwrap();
        assert!(h.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn shift_recovers_nonconstant_modes() {
        let a = [0.7, -1.25, 3.5, 0.0, 1e-9, -2.0];
        let h = finite_hilbert_weighted(&unit(Kind::First, &a)).unwrap();
        for (k, &ak) in a.iter().enumerate().skip(1) {
            assert_eq!(-h.coeffs()[k - 1], ak);
        }
    }

    #[test]
    fn eval_series_examples() {
        let t = unit(Kind::First, &[1.0, 2.0]);
        assert_eq!(t.eval(0.5).unwrap(), 2.0);
        let u = unit(Kind::Second, &[1.0, 1.0]);
        assert_eq!(u.eval(0.0).unwrap(), 1.0);
        let cube = unit(Kind::First, &[0.0, 0.75, 0.0, 0.25]);
        assert!((cube.eval(0.2).unwrap() - 0.008).abs() < 1e-15);
    }

    #[test]
    fn short_series_match_direct_evaluation() {
        let c = [0.3, -1.7, 2.2];
        let t = unit(Kind::First, &c);
        let u = unit(Kind::Second, &c);
        for i in 0..=20 {
            let x = -1.0 + 0.1 * i as f64;
            let direct_t: f64 = (0..3).map(|k| c[k] * eval_t(k, x)).sum();
            let direct_u: f64 = (0..3).map(|k| c[k] * eval_u(k, x)).sum();
            assert!((t.eval(x).unwrap() - direct_t).abs() < 1e-14);
            assert!((u.eval(x).unwrap() - direct_u).abs() < 1e-14);
        }
    }

    /// `(1/π) p.v.∫ g(y)/((x-y)√(1-y²)) dy` computed as the regular integral
    /// of the divided difference; the singular remainder `g(x)·H[w](x)`
    /// vanishes on (-1, 1).
    fn pv_weighted_oracle(g: impl Fn(f64) -> f64, x: f64) -> f64 {
        let m = 400;
        let gx = g(x);
        gauss_chebyshev_nodes(m)
            .into_iter()
            .map(|y| (g(y) - gx) / (x - y))
            .sum::<f64>()
            / m as f64
    }

    #[test]
    fn weighted_transform_sign_against_principal_value() {
        let a = [0.0, 1.0, -0.5, 0.25, 0.0, 0.125];
        let series = unit(Kind::First, &a);
        let h = finite_hilbert_weighted(&series).unwrap();
        for &x in &[-0.83, -0.31, 0.07, 0.52, 0.91] {
            let want = pv_weighted_oracle(|y| series.eval_unit(y), x);
            assert!((h.eval(x).unwrap() - want).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn sqrtweight_transform_sign_against_principal_value() {
        // H[√(1-y²) q](x) = (1/π)∫ √(1-y²)(q(y)-q(x))/(x-y) dy + x q(x),
        // using H[√(1-y²)](x) = x; the regular part uses second-kind nodes.
        let b = [0.5, -0.25, 1.0];
        let q = unit(Kind::Second, &b);
        let h = finite_hilbert_sqrtweight(&q).unwrap();
        let m = 400;
        for &x in &[-0.77, -0.2, 0.33, 0.88] {
            let qx = q.eval_unit(x);
            let regular: f64 = (1..=m)
                .map(|j| {
                    let th = j as f64 * PI / (m + 1) as f64;
                    let y = th.cos();
                    let w = th.sin().powi(2) / (m + 1) as f64;
                    w * (q.eval_unit(y) - qx) / (x - y)
                })
                .sum();
            let want = regular + x * qx;
            assert!((h.eval(x).unwrap() - want).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn hilbert_of_sqrt_is_identity_by_direct_quadrature() {
        // pins H[√(1-y²)](x) = x without using the identity itself:
        // singularity subtraction in θ, y = cos θ
        let gl = GaussLegendre::new(400);
        for &x in &[-0.6_f64, 0.25, 0.7] {
            let phi = x.acos();
            let sp = phi.sin();
            let f = |th: f64| {
                let s = th.sin();
                s * s / (x - th.cos()) - sp / (th - phi)
            };
            let regular = gl.integrate(0.0, phi, f) + gl.integrate(phi, PI, f);
            let singular = sp * ((PI - phi) / phi).ln();
            let hx = (regular + singular) / PI;
            assert!((hx - x).abs() < 1e-9, "x = {x}: {hx}");
        }
    }
}
