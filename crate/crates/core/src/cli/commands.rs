//! The five experiment modes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::config::{ExperimentConfig, Side};
use super::{Failure, ResultExt};
use crate::densities::ClosedFormFamily;
use crate::error::Error;
use crate::linearized::{self, LinearizedState};
use crate::metrics::{l1_density_error, ComparisonReport, FamilyMeasure, GridMeasure, Measure};
use crate::pde_solver::{self, PdeState, Trajectory};
use crate::poly_dynamics::{self, empirical_cdf, DifferentiationSchedule, RootConfiguration};

/// Default number of points per closed-form profile.
pub const PROFILE_POINTS: usize = 1000;

/// Default cap of the regularized arcsine data.
pub const ARCSINE_CAP: f64 = 1e3;

type Outcome = std::result::Result<Vec<PathBuf>, Failure>;

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Config(Error::Io(e)))
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> std::result::Result<(), Failure>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| Failure::Config(crate::poly_dynamics::csv_err(e));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt)).map_err(io)?;
    }
    w.flush().map_err(|e| Failure::Config(Error::Io(e)))
}

fn write_json(path: &Path, value: &Value) -> std::result::Result<(), Failure> {
    let mut w = create(path)?;
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|e| Failure::Config(Error::Io(e)))
}

fn snapshot_times(cfg: &ExperimentConfig) -> Vec<f64> {
    if cfg.times.is_empty() {
        vec![cfg.t0]
    } else {
        cfg.times.clone()
    }
}

/// Closed-form profile at `t`: uniform nodes from edge to edge (cell
/// midpoints for the arcsine law) with the peak location inserted.
pub fn profile_grid(family: &ClosedFormFamily, t: f64, points: usize) -> crate::Result<Vec<f64>> {
    let s = family.support(t)?;
    let mut xs: Vec<f64> = if matches!(family, ClosedFormFamily::Arcsine { .. }) {
        (0..points).map(|j| s.a() + s.width() * (j as f64 + 0.5) / points as f64).collect()
    } else {
        (0..points)
            .map(|j| if j + 1 == points { s.b() } else { s.a() + s.width() * j as f64 / (points - 1) as f64 })
            .collect()
    };
    if let Some((x, _)) = family.peak(t)? {
        if !xs.contains(&x) {
            let at = xs.partition_point(|&y| y < x);
            xs.insert(at, x);
        }
    }
    Ok(xs)
}

pub fn cmd_exact(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let family = cfg.family().config()?;
    let points = cfg.points.unwrap_or(PROFILE_POINTS);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for t in snapshot_times(cfg) {
        let xs = profile_grid(&family, t, points).oracle()?;
        for &x in &xs {
            rows.push(vec![t, x, family.eval(t, x).oracle()?]);
        }
        let s = family.support(t).oracle()?;
        summary.push(json!({
            "t": t,
            "support": [s.a(), s.b()],
            "mass": family.mass(t).oracle()?,
            "peak": family.peak(t).oracle()?.map(|(x, u)| [x, u]),
        }));
    }
    let csv_path = out.join("profiles.csv");
    write_rows(&csv_path, &["t", "x", "u"], rows)?;
    let json_path = out.join("summary.json");
    write_json(&json_path, &json!({ "family": family, "snapshots": summary }))?;
    Ok(vec![csv_path, json_path])
}

/// Closed-form time reached after `step` derivatives of `n` roots sampled
/// at `t0`.
fn poly_time(family: &ClosedFormFamily, t0: f64, n: usize, step: usize) -> crate::Result<f64> {
    Ok(t0 + step as f64 * family.mass(t0)? / n as f64)
}

pub fn cmd_poly(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let family = cfg.family().config()?;
    let (n, k) = (cfg.n.unwrap_or(0), cfg.k.unwrap_or(0));
    let stride = cfg.stride.unwrap_or(k.max(1));
    let schedule = DifferentiationSchedule::new(k, stride).config()?;
    let initial = family.sample_roots(cfg.t0, n).oracle()?;
    let snapshots = poly_dynamics::differentiate_k(&initial, schedule).oracle()?;
    let mut files = Vec::new();
    let mut summary = Vec::new();
    for (step, roots) in &snapshots {
        let path = out.join(format!("roots_{step:06}.csv"));
        write_rows(&path, &["x"], roots.roots().iter().map(|&x| vec![x]))?;
        files.push(path);
        let t = poly_time(&family, cfg.t0, n, *step).oracle()?;
        let cdf = empirical_cdf(roots);
        let distances = match FamilyMeasure::new(family, t) {
            Ok(exact) => Some((
                crate::metrics::ks_distance(&cdf, &exact).oracle()?,
                crate::metrics::wasserstein1(&cdf, &exact).oracle()?,
            )),
            Err(_) => None,
        };
        let r = roots.roots();
        summary.push(json!({
            "step": step,
            "t": t,
            "roots": r.len(),
            "mean": roots.mean(),
            "min": r[0],
            "max": r[r.len() - 1],
            "ks": distances.map(|d| d.0),
            "wasserstein1": distances.map(|d| d.1),
        }));
    }
    let path = out.join("cdf_summary.json");
    write_json(&path, &json!({ "family": family, "n": n, "k": k, "stride": stride, "snapshots": summary }))?;
    files.push(path);
    Ok(files)
}

fn pde_initial(cfg: &ExperimentConfig, family: &ClosedFormFamily) -> std::result::Result<PdeState, Failure> {
    let n = cfg.solver_params().n;
    match family {
        ClosedFormFamily::Arcsine { c } => PdeState::arcsine_regularized(*c, n, cfg.cap.unwrap_or(ARCSINE_CAP)),
        _ => PdeState::from_family(family, cfg.t0, n),
    }
    .config()
}

fn pde_trajectory(cfg: &ExperimentConfig, family: &ClosedFormFamily, t_end: f64) -> std::result::Result<Trajectory, Failure> {
    let initial = pde_initial(cfg, family)?;
    pde_solver::run(&initial, t_end, &cfg.times, &cfg.solver_params()).solver()
}

pub fn cmd_pde(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let family = cfg.family().config()?;
    let t_end = cfg.t_end.unwrap_or(cfg.t0);
    let tr = pde_trajectory(cfg, &family, t_end)?;
    let profiles = out.join("profiles.csv");
    let mut file = create(&profiles)?;
    tr.write_csv(&mut file).map_err(Failure::Config)?;
    file.flush().map_err(|e| Failure::Config(Error::Io(e)))?;
    let mass = out.join("mass.csv");
    write_rows(&mass, &["t", "mass"], tr.mass.iter().map(|&(t, m)| vec![t, m]))?;
    let meta = out.join("run.json");
    let mut doc = tr.metadata_json();
    doc["family"] = json!(family);
    write_json(&meta, &doc)?;
    Ok(vec![profiles, mass, meta])
}

pub fn cmd_linearized(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let coeffs = cfg.coefficients.clone().unwrap_or_default();
    let state0 = LinearizedState::new(0.0, coeffs).config()?;
    let points = cfg.points.unwrap_or(PROFILE_POINTS);
    let xs: Vec<f64> = (0..points).map(|j| -1.0 + 2.0 * (j as f64 + 0.5) / points as f64).collect();
    let mut rows = Vec::new();
    let mut snaps = Vec::new();
    for t in snapshot_times(cfg) {
        let s = linearized::evolve(&state0, t).oracle()?;
        for &x in &xs {
            rows.push(vec![t, x, linearized::eval_w(&s, x).oracle()?]);
        }
        snaps.push(json!({ "t": t, "coefficients": s.coeffs(), "sup_norm": s.sup_norm() }));
    }
    let horizon = cfg.horizon.unwrap_or(1.0);
    let growth = match linearized::growth_exponent(&state0, horizon, 31) {
        Ok(d) => Some(d),
        Err(Error::UndefinedExponent) => None,
        Err(e) => return Err(Failure::Oracle(e)),
    };
    let check = linearized::direct_check(&state0, horizon.min(1.0)).oracle()?;
    let csv_path = out.join("profiles.csv");
    write_rows(&csv_path, &["t", "x", "u"], rows)?;
    let json_path = out.join("linearized.json");
    write_json(
        &json_path,
        &json!({
            "mean_violation": state0.mean_violation(),
            "growth_exponent": growth,
            "horizon": horizon,
            "direct_check": check,
            "snapshots": snaps,
        }),
    )?;
    Ok(vec![csv_path, json_path])
}

/// A comparison side evaluated at the requested times.
enum Produced {
    Exact,
    Pde(Trajectory),
    Poly(Vec<(f64, RootConfiguration)>),
}

fn produce(cfg: &ExperimentConfig, family: &ClosedFormFamily, side: Side) -> std::result::Result<Produced, Failure> {
    let t_max = cfg.times.iter().copied().fold(cfg.t0, f64::max);
    match side {
        Side::Exact => Ok(Produced::Exact),
        Side::Pde => Ok(Produced::Pde(pde_trajectory(cfg, family, t_max)?)),
        Side::Poly => {
            let n = cfg.n.unwrap_or(0);
            let per_step = family.mass(cfg.t0).config()? / n as f64;
            let mut steps = Vec::with_capacity(cfg.times.len());
            for &t in &cfg.times {
                let s = (t - cfg.t0) / per_step;
                let r = s.round();
                if (s - r).abs() > 1e-9 * s.abs().max(1.0) {
                    return Err(Failure::Config(Error::Config(format!(
                        "time {t} does not fall on the derivative grid of spacing {per_step}"
                    ))));
                }
                steps.push(r as usize);
            }
            let k = steps.iter().copied().max().unwrap_or(0);
            if k >= n {
                return Err(Failure::Config(Error::Config(format!("time grid needs {k} derivatives of {n} roots"))));
            }
            let initial = family.sample_roots(cfg.t0, n).oracle()?;
            let schedule = DifferentiationSchedule::new(k, 1).config()?;
            let all = poly_dynamics::differentiate_k(&initial, schedule).oracle()?;
            Ok(Produced::Poly(
                cfg.times.iter().zip(&steps).map(|(&t, &s)| (t, all[s].1.clone())).collect(),
            ))
        }
    }
}

enum Frozen {
    Exact(FamilyMeasure),
    Grid(GridMeasure, PdeState),
    Roots(crate::poly_dynamics::EmpiricalCdf, usize),
}

impl Frozen {
    fn measure(&self) -> &dyn Measure {
        match self {
            Self::Exact(m) => m,
            Self::Grid(m, _) => m,
            Self::Roots(m, _) => m,
        }
    }

    fn size(&self) -> Option<usize> {
        match self {
            Self::Exact(_) => None,
            Self::Grid(_, s) => Some(s.intervals()),
            Self::Roots(_, n) => Some(*n),
        }
    }
}

fn freeze(p: &Produced, family: &ClosedFormFamily, t: f64) -> std::result::Result<Frozen, Failure> {
    match p {
        Produced::Exact => Ok(Frozen::Exact(FamilyMeasure::new(*family, t).oracle()?)),
        Produced::Pde(tr) => {
            let state = tr.at(t).ok_or_else(|| {
                Failure::Solver(Error::Domain(format!("the solver stopped before t = {t}: {:?}", tr.termination)))
            })?;
            Ok(Frozen::Grid(GridMeasure::from_state(state).oracle()?, state.clone()))
        }
        Produced::Poly(snaps) => {
            let (_, roots) = snaps.iter().find(|(s, _)| *s == t).expect("poly snapshots cover every time");
            Ok(Frozen::Roots(empirical_cdf(roots), roots.len()))
        }
    }
}

pub fn cmd_compare(cfg: &ExperimentConfig, out: &Path) -> Outcome {
    let family = cfg.family().config()?;
    let (Some(left), Some(right)) = (cfg.left, cfg.right) else {
        return Err(Failure::Config(Error::Config("compare mode needs left and right".into())));
    };
    let a = produce(cfg, &family, left)?;
    let b = produce(cfg, &family, right)?;
    let mut reports = Vec::new();
    for &t in &cfg.times {
        let (fa, fb) = (freeze(&a, &family, t)?, freeze(&b, &family, t)?);
        let l1 = match (&fa, &fb) {
            (Frozen::Grid(_, s), Frozen::Exact(_)) | (Frozen::Exact(_), Frozen::Grid(_, s)) => {
                Some(l1_density_error(s, &family, t).oracle()?)
            }
            _ => None,
        };
        let size = fa.size().or(fb.size()).unwrap_or(cfg.points.unwrap_or(PROFILE_POINTS));
        let report = ComparisonReport::new(fa.measure(), fb.measure(), size, l1).oracle()?;
        reports.push(json!({ "t": t, "report": report }));
    }
    let path = out.join("compare.json");
    write_json(&path, &json!({ "family": family, "left": left, "right": right, "reports": reports }))?;
    Ok(vec![path])
}
