//! Flat TOML experiment configuration with `ROOTFLOW_*` overrides.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::densities::ClosedFormFamily;
use crate::error::{Error, Result};
use crate::pde_solver::SolverParams;

/// Prefix of environment variables that override config keys.
pub const ENV_PREFIX: &str = "ROOTFLOW_";

/// Environment variables that belong to the command line, not the config.
const FLAG_VARS: [&str; 4] = ["CONFIG", "OUT", "THREADS", "SEED"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Pde,
    Poly,
    Linearized,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Arcsine,
    Semicircle,
    MarchenkoPastur,
}

/// One side of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Exact,
    Pde,
    Poly,
}

/// Every key a config file may set. Unset keys fall back to library
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default = "default_family")]
    pub family: FamilyKind,
    /// Arcsine scale or Marchenko-Pastur parameter.
    pub c: Option<f64>,
    /// Semicircle vanishing time `T`.
    pub vanish_time: Option<f64>,
    /// Initial time of the closed form used as data.
    #[serde(default)]
    pub t0: f64,
    /// Snapshot times.
    #[serde(default)]
    pub times: Vec<f64>,
    /// Points per closed-form profile.
    pub points: Option<usize>,

    /// Number of roots.
    pub n: Option<usize>,
    /// Number of derivatives.
    pub k: Option<usize>,
    /// Derivatives between root snapshots.
    pub stride: Option<usize>,

    pub t_end: Option<f64>,
    /// Grid intervals of the solver.
    pub grid: Option<usize>,
    pub modes: Option<usize>,
    pub cfl: Option<f64>,
    pub eps_flux: Option<f64>,
    pub eps_supp: Option<f64>,
    pub delta_stop: Option<f64>,
    pub remap_stride: Option<usize>,
    /// Cap of the regularized arcsine data.
    pub cap: Option<f64>,

    /// Initial modal coefficients `a_0, a_1, ...`.
    pub coefficients: Option<Vec<f64>>,
    /// Time horizon of the growth fit.
    pub horizon: Option<f64>,

    pub left: Option<Side>,
    pub right: Option<Side>,
}

fn default_family() -> FamilyKind {
    FamilyKind::Semicircle
}

impl ExperimentConfig {
    /// A config with only `mode` set.
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            family: default_family(),
            c: None,
            vanish_time: None,
            t0: 0.0,
            times: Vec::new(),
            points: None,
            n: None,
            k: None,
            stride: None,
            t_end: None,
            grid: None,
            modes: None,
            cfl: None,
            eps_flux: None,
            eps_supp: None,
            delta_stop: None,
            remap_stride: None,
            cap: None,
            coefficients: None,
            horizon: None,
            left: None,
            right: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read `path`, then apply `ROOTFLOW_<KEY>` overrides from `vars`.
    pub fn load<I>(path: &Path, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut table: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        apply_overrides(&mut table, vars)?;
        Self::from_table(table)
    }

    pub fn family(&self) -> Result<ClosedFormFamily> {
        match self.family {
            FamilyKind::Arcsine => match self.c {
                Some(c) => ClosedFormFamily::arcsine(c),
                None => Ok(ClosedFormFamily::arcsine_probability()),
            },
            FamilyKind::Semicircle => ClosedFormFamily::semicircle(self.vanish_time.unwrap_or(1.0)),
            FamilyKind::MarchenkoPastur => ClosedFormFamily::marchenko_pastur(self.c.unwrap_or(1.0)),
        }
        .map_err(|e| Error::Config(format!("family: {e}")))
    }

    pub fn solver_params(&self) -> SolverParams {
        let d = SolverParams::default();
        SolverParams {
            n: self.grid.unwrap_or(d.n),
            modes: self.modes.unwrap_or(d.modes),
            cfl: self.cfl.unwrap_or(d.cfl),
            eps_flux: self.eps_flux.unwrap_or(d.eps_flux),
            eps_supp: self.eps_supp.unwrap_or(d.eps_supp),
            delta_stop: self.delta_stop.unwrap_or(d.delta_stop),
            remap_stride: self.remap_stride.unwrap_or(d.remap_stride),
        }
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let family = self.family()?;
        if self.times.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("times must be strictly increasing".into());
        }
        // linearized times live on the perturbation's own clock
        if self.mode != Mode::Linearized {
            for &t in self.times.iter().chain([self.t0].iter()) {
                family.check_time(t).map_err(|e| Error::Config(format!("time {t}: {e}")))?;
            }
        }
        if self.times.iter().any(|&t| t < self.t0) {
            return bad("snapshot times precede t0".into());
        }
        if self.points.is_some_and(|p| p < 2) {
            return bad("points must be at least 2".into());
        }
        match self.mode {
            Mode::Exact => {}
            Mode::Poly => {
                let (n, k) = (self.n.unwrap_or(0), self.k.unwrap_or(0));
                if n < 2 {
                    return bad("poly mode needs n ≥ 2".into());
                }
                if k >= n {
                    return bad(format!("k = {k} must be below n = {n}"));
                }
                if self.stride == Some(0) {
                    return bad("stride must be at least 1".into());
                }
            }
            Mode::Pde => {
                self.solver_params().validate().map_err(|e| Error::Config(e.to_string()))?;
                match self.t_end {
                    Some(t) if t >= self.t0 => {}
                    _ => return bad("pde mode needs t_end ≥ t0".into()),
                }
            }
            Mode::Linearized => {
                if self.coefficients.as_ref().is_none_or(|c| c.is_empty()) {
                    return bad("linearized mode needs a nonempty coefficients list".into());
                }
                if self.times.iter().any(|t| !t.is_finite()) {
                    return bad("times must be finite".into());
                }
            }
            Mode::Compare => {
                let (Some(l), Some(r)) = (self.left, self.right) else {
                    return bad("compare mode needs left and right".into());
                };
                if self.times.is_empty() {
                    return bad("compare mode needs snapshot times".into());
                }
                if [l, r].contains(&Side::Poly) && self.n.unwrap_or(0) < 2 {
                    return bad("poly side needs n ≥ 2".into());
                }
                if [l, r].contains(&Side::Pde) {
                    self.solver_params().validate().map_err(|e| Error::Config(e.to_string()))?;
                }
            }
        }
        Ok(())
    }
}

/// Overwrite `key` with the TOML value of `ROOTFLOW_KEY`. Values that do
/// not parse as TOML are taken as strings.
fn apply_overrides<I>(table: &mut toml::Table, vars: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            let key = k.strip_prefix(ENV_PREFIX)?;
            (!FLAG_VARS.contains(&key)).then(|| (key.to_ascii_lowercase(), v))
        })
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or(toml::Value::String(raw));
        table.insert(key, value);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::from_toml_str("mode = \"exact\"\ntimes = [0.0, 0.5]").unwrap();
        assert_eq!(c.mode, Mode::Exact);
        assert_eq!(c.family, FamilyKind::Semicircle);
        assert_eq!(c.times, vec![0.0, 0.5]);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "mode = \"nope\"",
            "mode = \"exact\"\nunknown = 1",
            "mode = \"exact\"\ntimes = [0.5, 0.2]",
            "mode = \"exact\"\ntimes = [1.5]",
            "mode = \"poly\"\nn = 10\nk = 10",
            "mode = \"pde\"",
            "mode = \"pde\"\nt_end = 0.5\ncfl = 0.9",
            "mode = \"compare\"\nleft = \"exact\"",
            "mode = \"exact\"\nfamily = \"semicircle\"\nvanish_time = -1.0",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml_str(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn env_overrides_replace_keys() {
        let mut table: toml::Table = "mode = \"poly\"\nn = 10\nk = 2".parse().unwrap();
        let vars = vec![
            ("ROOTFLOW_N".to_string(), "40".to_string()),
            ("ROOTFLOW_FAMILY".to_string(), "marchenko-pastur".to_string()),
            ("ROOTFLOW_OUT".to_string(), "ignored".to_string()),
            ("OTHER".to_string(), "1".to_string()),
        ];
        apply_overrides(&mut table, vars).unwrap();
        let c = ExperimentConfig::from_table(table).unwrap();
        assert_eq!(c.n, Some(40));
        assert_eq!(c.family, FamilyKind::MarchenkoPastur);
    }

    #[test]
    fn solver_params_fall_back_to_defaults() {
        let c = ExperimentConfig::from_toml_str("mode = \"pde\"\nt_end = 0.1\ngrid = 64").unwrap();
        let p = c.solver_params();
        assert_eq!(p.n, 64);
        assert_eq!(p.modes, SolverParams::default().modes);
    }
}
