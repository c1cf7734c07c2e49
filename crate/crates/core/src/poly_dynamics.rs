//! Exact roots of `p^{(k)}` for a real-rooted polynomial `p`.
//!
//! The roots of `p'` are the zeros of `p'/p = Σ 1/(x - x_i)`, one in each
//! gap between consecutive roots. In a gap `(x_i, x_{i+1})` of width `g`
//! we write `x = x_i + gφ` and solve
//!
//! ```text
//! h(φ) = 1 - 2φ + g·R(x)·φ(1-φ) = 0,     R(x) = Σ_{j ∉ {i, i+1}} 1/(x - x_j)
//! ```
//!
//! which is `gφ(1-φ)·p'/p` with both poles cleared. `h(0) = 1`, `h(1) = -1`,
//! so `[0, 1]` is always a valid bracket; Newton steps that leave the
//! bracket fall back to bisection.
//!
//! One derivative costs `O(n)` per gap and `O(n²)` overall. Gaps are solved
//! independently and in parallel; results do not depend on scheduling.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::densities::ClosedFormFamily;
use crate::error::{Error, Result};

/// Gaps below this (relative) width are treated as pinched.
pub const PINCH_TOL: f64 = 1e-14;

/// Newton convergence: `|Δx| ≤ STEP_TOL · max(1, |x|)`.
pub const STEP_TOL: f64 = 1e-13;

const MAX_ITERATIONS: usize = 200;

/// Strictly increasing, finite real roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RootConfiguration {
    roots: Vec<f64>,
}

impl RootConfiguration {
    pub fn new(roots: Vec<f64>) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::RejectedInput("a configuration needs at least one root".into()));
        }
        if let Some(i) = roots.iter().position(|x| !x.is_finite()) {
            return Err(Error::RejectedInput(format!("root {i} is not finite")));
        }
        if let Some(i) = roots.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::RejectedInput(format!(
                "roots are not strictly increasing at index {i}: {} then {}",
                roots[i],
                roots[i + 1]
            )));
        }
        Ok(Self { roots })
    }

    /// Sorts the input first; duplicates are still rejected.
    pub fn from_unsorted(mut roots: Vec<f64>) -> Result<Self> {
        if roots.iter().any(|x| x.is_nan()) {
            return Err(Error::RejectedInput("NaN root".into()));
        }
        roots.sort_by(f64::total_cmp);
        Self::new(roots)
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        self.roots.iter().sum::<f64>() / self.roots.len() as f64
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.roots
    }

    /// One-column CSV, header `x`, ascending, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x"]).map_err(csv_err)?;
        for x in &self.roots {
            w.write_record([format!("{x:.16e}")]).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(csv_err)?.clone();
        if headers.len() != 1 || headers.get(0).map(str::trim) != Some("x") {
            return Err(Error::RejectedInput(format!("expected header `x`, found {headers:?}")));
        }
        let mut roots = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let field = rec.get(0).unwrap_or("").trim();
            let x: f64 = field
                .parse()
                .map_err(|_| Error::RejectedInput(format!("row {}: cannot parse `{field}`", line + 1)))?;
            roots.push(x);
        }
        Self::new(roots)
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::RejectedInput(format!("csv: {e}"))
}

/// `k` derivatives with a snapshot every `snapshot_stride` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DifferentiationSchedule {
    pub k: usize,
    pub snapshot_stride: usize,
}

impl DifferentiationSchedule {
    pub fn new(k: usize, snapshot_stride: usize) -> Result<Self> {
        if snapshot_stride == 0 {
            return Err(Error::Domain("snapshot stride must be at least 1".into()));
        }
        Ok(Self { k, snapshot_stride })
    }

    /// Steps at which snapshots are recorded: 0, the stride multiples and `k`.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let mut steps: Vec<usize> = (0..=self.k).step_by(self.snapshot_stride).collect();
        if steps.last() != Some(&self.k) {
            steps.push(self.k);
        }
        steps
    }
}

/// Whether gap solves fan out to the rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// `p'(x)/p(x) = Σ 1/(x - x_i)`, summed from the nearest root outward.
pub fn log_derivative(config: &RootConfiguration, x: f64) -> Result<f64> {
    let roots = &config.roots;
    let split = roots.partition_point(|&r| r < x);
    if roots.get(split) == Some(&x) {
        return Err(Error::Pole(x));
    }
    let (mut left, mut right) = (split, split);
    let mut sum = 0.0;
    while left > 0 || right < roots.len() {
        let take_left = match (left > 0, right < roots.len()) {
            (true, true) => x - roots[left - 1] <= roots[right] - x,
            (l, _) => l,
        };
        if take_left {
            left -= 1;
            sum += 1.0 / (x - roots[left]);
        } else {
            sum += 1.0 / (x - roots[right]);
            right += 1;
        }
    }
    Ok(sum)
}

/// `(Σ 1/(x-x_j), Σ 1/(x-x_j)²)` over a slice, four lanes wide.
#[inline]
fn field_sums(xs: &[f64], x: f64) -> (f64, f64) {
    let mut s1 = [0.0f64; 4];
    let mut s2 = [0.0f64; 4];
    let chunks = xs.chunks_exact(4);
    let rem = chunks.remainder();
    for c in chunks {
        for l in 0..4 {
            let r = 1.0 / (x - c[l]);
            s1[l] += r;
            s2[l] += r * r;
        }
    }
    let mut t1 = (s1[0] + s1[1]) + (s1[2] + s1[3]);
    let mut t2 = (s2[0] + s2[1]) + (s2[2] + s2[3]);
    for &xj in rem {
        let r = 1.0 / (x - xj);
        t1 += r;
        t2 += r * r;
    }
    (t1, t2)
}

/// Root of `p'` in gap `i`, returned with its fraction `φ` of the gap.
fn solve_gap(roots: &[f64], i: usize, guess: f64) -> (f64, f64) {
    let (xl, xr) = (roots[i], roots[i + 1]);
    let g = xr - xl;
    if g < PINCH_TOL * xl.abs().max(1.0) {
        return (0.5 * (xl + xr), 0.5);
    }
    let (left, right) = (&roots[..i], &roots[i + 2..]);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut phi = if guess > 0.0 && guess < 1.0 { guess } else { 0.5 };
    for _ in 0..MAX_ITERATIONS {
        let x = xl + g * phi;
        let (a1, a2) = field_sums(left, x);
        let (b1, b2) = field_sums(right, x);
        let r = a1 + b1;
        let dr = -(a2 + b2);
        let w = phi * (1.0 - phi);
        let h = 1.0 - 2.0 * phi + g * r * w;
        if h == 0.0 {
            return (x, phi);
        }
        if h > 0.0 {
            lo = phi;
        } else {
            hi = phi;
        }
        let dh = -2.0 + g * r * (1.0 - 2.0 * phi) + g * g * dr * w;
        let newton = h / dh;
        if dh < 0.0 && (newton * g).abs() <= STEP_TOL * x.abs().max(1.0) {
            return (xl + g * (phi - newton), phi - newton);
        }
        let mut next = phi - newton;
        if !(dh < 0.0 && next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - phi) * g;
        phi = next;
        let x_new = xl + g * phi;
        if step.abs() <= STEP_TOL * x_new.abs().max(1.0) || (hi - lo) * g <= f64::EPSILON * x_new.abs().max(1.0) {
            return (x_new, phi);
        }
    }
    (xl + g * phi, phi)
}

fn differentiate_with_guesses(
    config: &RootConfiguration,
    guesses: Option<&[f64]>,
    exec: Execution,
) -> Result<(RootConfiguration, Vec<f64>)> {
    let n = config.roots.len();
    if n < 2 {
        return Err(Error::EmptyResult);
    }
    let roots = &config.roots;
    let guess = |i: usize| guesses.and_then(|g| g.get(i).copied()).unwrap_or(0.5);
    let solved: Vec<(f64, f64)> = match exec {
        Execution::Sequential => (0..n - 1).map(|i| solve_gap(roots, i, guess(i))).collect(),
        Execution::Parallel => (0..n - 1)
            .into_par_iter()
            .with_min_len(16)
            .map(|i| solve_gap(roots, i, guess(i)))
            .collect(),
    };
    let (mut new_roots, fractions): (Vec<f64>, Vec<f64>) = solved.into_iter().unzip();
    // strict interlacing can only fail through rounding in a pinched gap
    for (i, y) in new_roots.iter_mut().enumerate() {
        *y = y.clamp(roots[i], roots[i + 1]);
    }
    let out = RootConfiguration::new(new_roots)
        .map_err(|e| Error::Construction(format!("derivative roots: {e}")))?;
    Ok((out, fractions))
}

/// Roots of `p'`: one zero of the log-derivative in each gap.
pub fn differentiate_once(config: &RootConfiguration) -> Result<RootConfiguration> {
    differentiate_with_guesses(config, None, Execution::Parallel).map(|(c, _)| c)
}

/// [`differentiate_once`] with an explicit execution mode.
pub fn differentiate_once_with(config: &RootConfiguration, exec: Execution) -> Result<RootConfiguration> {
    differentiate_with_guesses(config, None, exec).map(|(c, _)| c)
}

/// Snapshots `(step, roots of p^{(step)})` along `schedule`.
pub fn differentiate_k(
    config: &RootConfiguration,
    schedule: DifferentiationSchedule,
) -> Result<Vec<(usize, RootConfiguration)>> {
    differentiate_k_with(config, schedule, Execution::Parallel)
}

/// [`differentiate_k`] with an explicit execution mode. Each step is warm
/// started from the gap fractions of the previous step.
pub fn differentiate_k_with(
    config: &RootConfiguration,
    schedule: DifferentiationSchedule,
    exec: Execution,
) -> Result<Vec<(usize, RootConfiguration)>> {
    if schedule.snapshot_stride == 0 {
        return Err(Error::Domain("snapshot stride must be at least 1".into()));
    }
    if schedule.k >= config.len() {
        return Err(Error::Domain(format!(
            "cannot take {} derivatives of a degree-{} polynomial",
            schedule.k,
            config.len()
        )));
    }
    let mut snapshots = vec![(0, config.clone())];
    let mut current = config.clone();
    let mut fractions: Option<Vec<f64>> = None;
    for step in 1..=schedule.k {
        let (next, fr) = differentiate_with_guesses(&current, fractions.as_deref(), exec)?;
        current = next;
        fractions = Some(fr);
        if step % schedule.snapshot_stride == 0 || step == schedule.k {
            snapshots.push((step, current.clone()));
        }
    }
    Ok(snapshots)
}

/// Smallest gap between consecutive roots.
pub fn min_gap(config: &RootConfiguration) -> Result<f64> {
    if config.len() < 2 {
        return Err(Error::Domain("min gap needs at least two roots".into()));
    }
    Ok(config
        .roots
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min))
}

/// Right-continuous step CDF `F(x) = #{x_i ≤ x} / n` of a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    points: Vec<f64>,
}

impl EmpiricalCdf {
    /// `points` must be sorted ascending; ties are allowed.
    pub fn from_sorted(points: Vec<f64>) -> Result<Self> {
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::RejectedInput("empirical CDF points must be finite".into()));
        }
        if points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::RejectedInput("empirical CDF points must be sorted".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `F(x)`.
    pub fn value(&self, x: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.partition_point(|&p| p <= x) as f64 / self.points.len() as f64
    }

    /// `F(x⁻)`.
    pub fn left_value(&self, x: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.partition_point(|&p| p < x) as f64 / self.points.len() as f64
    }
}

pub fn empirical_cdf(config: &RootConfiguration) -> EmpiricalCdf {
    EmpiricalCdf { points: config.roots.clone() }
}

/// One interior root `y` and the displacement of the derivative roots
/// around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSample {
    pub root: f64,
    /// Width of the gap to the right of `y`.
    pub gap: f64,
    /// `-(1/nπ) arctan(Hu₀(y)/u₀(y))`.
    pub predicted_shift: f64,
    /// Signed distance from `y` to the nearest root of the derivative.
    pub actual_shift: f64,
    /// Lattice prediction for the offset of the derivative root from the
    /// midpoint of the gap right of `y`: `gap · arctan(Hu₀/u₀) / π`.
    pub predicted_offset: f64,
    /// Measured offset of that root from the gap midpoint.
    pub actual_offset: f64,
}

/// Compares the local root displacement under one derivative with the
/// mean-field prediction from the density, over the inner 80% of roots.
pub fn microscopic_shift_diagnostic(
    config: &RootConfiguration,
    family: &ClosedFormFamily,
    t: f64,
) -> Result<Vec<ShiftSample>> {
    let n = config.len();
    if n < 100 {
        return Err(Error::Domain(format!("shift diagnostic needs n ≥ 100, got {n}")));
    }
    let support = family.support(t)?;
    let derivative = differentiate_once(config)?;
    let (x, y) = (config.roots(), derivative.roots());
    let nf = n as f64;
    let mut out = Vec::with_capacity(n);
    for i in n / 10..n - n / 10 {
        let root = x[i];
        if !support.contains_open(root) || i + 1 >= n {
            continue;
        }
        let u = family.eval(t, root)?;
        let hu = family.hilbert(t, root)?;
        let angle = (hu / u).atan();
        let nearest = [i.checked_sub(1).map(|j| y[j]), y.get(i).copied()]
            .into_iter()
            .flatten()
            .min_by(|a, b| (a - root).abs().total_cmp(&(b - root).abs()))
            .expect("interior root has a neighbouring derivative root");
        let gap = x[i + 1] - x[i];
        out.push(ShiftSample {
            root,
            gap,
            predicted_shift: -angle / (nf * PI),
            actual_shift: nearest - root,
            predicted_offset: gap * angle / PI,
            actual_offset: y[i] - 0.5 * (x[i] + x[i + 1]),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(r: &[f64]) -> RootConfiguration {
        RootConfiguration::new(r.to_vec()).unwrap()
    }

    #[test]
    fn rejects_invalid_configurations() {
        assert!(RootConfiguration::new(vec![]).is_err());
        assert!(RootConfiguration::new(vec![0.0, 0.0]).is_err());
        assert!(RootConfiguration::new(vec![1.0, 0.0]).is_err());
        assert!(RootConfiguration::new(vec![0.0, f64::INFINITY]).is_err());
        assert_eq!(RootConfiguration::from_unsorted(vec![2.0, -1.0]).unwrap().roots(), &[-1.0, 2.0]);
    }

    #[test]
    fn log_derivative_examples() {
        assert_eq!(log_derivative(&cfg(&[-1.0, 1.0]), 0.0).unwrap(), 0.0);
        assert_eq!(log_derivative(&cfg(&[0.0]), 2.0).unwrap(), 0.5);
        let v = log_derivative(&cfg(&[-1.0, 0.0, 1.0]), 2.0).unwrap();
        assert!((v - 11.0 / 6.0).abs() < 1e-15);
        assert!(matches!(log_derivative(&cfg(&[-1.0, 0.0]), 0.0), Err(Error::Pole(_))));
    }

    #[test]
    fn differentiate_once_examples() {
        let d = differentiate_once(&cfg(&[-1.0, 0.0, 1.0])).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((d.roots()[0] + r).abs() < 1e-14 && (d.roots()[1] - r).abs() < 1e-14);

        let d = differentiate_once(&cfg(&[0.0, 2.0])).unwrap();
        assert_eq!(d.roots(), &[1.0]);

        // p = x³ - 4x² + 3x, p' = 3x² - 8x + 3
        let d = differentiate_once(&cfg(&[0.0, 1.0, 3.0])).unwrap();
        let s = 28f64.sqrt();
        assert!((d.roots()[0] - (8.0 - s) / 6.0).abs() < 1e-14);
        assert!((d.roots()[1] - (8.0 + s) / 6.0).abs() < 1e-14);
        assert!((d.roots()[0] - 0.45142).abs() < 1e-5 && (d.roots()[1] - 2.21525).abs() < 1e-5);

        assert!(matches!(differentiate_once(&cfg(&[3.0])), Err(Error::EmptyResult)));
    }

    #[test]
    fn roots_are_zeros_of_log_derivative() {
        let c = cfg(&[-2.0, -1.9, -0.3, 0.0, 0.01, 1.5, 4.0, 4.5]);
        let d = differentiate_once(&c).unwrap();
        for (i, &y) in d.roots().iter().enumerate() {
            let g = c.roots()[i + 1] - c.roots()[i];
            // residual scaled by the local pole strength
            let s = log_derivative(&c, y).unwrap();
            assert!((s * g).abs() < 1e-9, "gap {i}: {s}");
        }
    }

    #[test]
    fn pinched_gap_takes_the_midpoint() {
        let x = 1.0;
        let c = cfg(&[0.0, x, x + 1e-15, 2.0]);
        let d = differentiate_once(&c).unwrap();
        assert!(d.roots()[1] >= x && d.roots()[1] <= x + 1e-15);
    }

    #[test]
    fn three_roots_twice_gives_centroid() {
        let c = cfg(&[-0.4, 0.1, 0.6]);
        let snaps = differentiate_k(&c, DifferentiationSchedule::new(2, 1).unwrap()).unwrap();
        let last = &snaps.last().unwrap().1;
        assert_eq!(last.len(), 1);
        assert!((last.roots()[0] - 0.1).abs() < 1e-14);
        let c = cfg(&[-3.0, 0.5, 7.0]);
        let snaps = differentiate_k(&c, DifferentiationSchedule::new(2, 1).unwrap()).unwrap();
        assert!((snaps.last().unwrap().1.roots()[0] - 1.5).abs() < 1e-13);
    }

    #[test]
    fn zero_derivatives_is_identity() {
        let c = cfg(&[0.0, 1.0, 5.0]);
        let snaps = differentiate_k(&c, DifferentiationSchedule::new(0, 3).unwrap()).unwrap();
        assert_eq!(snaps, vec![(0, c)]);
    }

    #[test]
    fn schedule_validation_and_snapshot_steps() {
        let c = cfg(&[0.0, 1.0, 5.0]);
        assert!(differentiate_k(&c, DifferentiationSchedule { k: 3, snapshot_stride: 1 }).is_err());
        assert!(DifferentiationSchedule::new(2, 0).is_err());
        assert_eq!(DifferentiationSchedule::new(10, 5).unwrap().snapshot_steps(), vec![0, 5, 10]);
        assert_eq!(DifferentiationSchedule::new(7, 3).unwrap().snapshot_steps(), vec![0, 3, 6, 7]);
    }

    #[test]
    fn min_gap_examples() {
        assert_eq!(min_gap(&cfg(&[0.0, 1.0, 3.0])).unwrap(), 1.0);
        assert_eq!(min_gap(&cfg(&[-1.0, -0.5, 0.5, 1.0])).unwrap(), 0.5);
        let n = 11;
        let pts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        assert!((min_gap(&cfg(&pts)).unwrap() - 0.1).abs() < 1e-15);
        assert!(min_gap(&cfg(&[1.0])).is_err());
    }

    #[test]
    fn empirical_cdf_examples() {
        let f = empirical_cdf(&cfg(&[0.0]));
        assert_eq!(f.value(-1.0), 0.0);
        assert_eq!(f.value(0.0), 1.0);
        assert_eq!(f.left_value(0.0), 0.0);
        assert_eq!(empirical_cdf(&cfg(&[-1.0, 1.0])).value(0.0), 0.5);
    }

    #[test]
    fn csv_round_trip() {
        let c = cfg(&[-1.0 / 3.0, 0.1, 2.0f64.sqrt()]);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x\n"));
        assert_eq!(RootConfiguration::read_csv(buf.as_slice()).unwrap(), c);
        assert!(RootConfiguration::read_csv("y\n1\n".as_bytes()).is_err());
        assert!(RootConfiguration::read_csv("x\n2\n1\n".as_bytes()).is_err());
    }

    #[test]
    fn shift_diagnostic_requires_enough_roots() {
        let f = ClosedFormFamily::semicircle(1.0).unwrap();
        let c = f.sample_roots(0.0, 50).unwrap();
        assert!(microscopic_shift_diagnostic(&c, &f, 0.0).is_err());
    }
}
