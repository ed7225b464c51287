//! Run configuration read from TOML.
//!
//! ```toml
//! seed = 0
//! tolerance = 1e-3
//! output = "out"
//!
//! [model]
//! name = "example2"
//!
//! [scheme]
//! kind = "eps-neighborhood"
//! eps = 0.1
//! tau = 1e-3
//! x0 = [0.0]
//!
//! [sweep]
//! eps = [0.2, 0.1, 0.05]
//! tau = [1e-2, 1e-3, 1e-4]
//! ```
//!
//! An inline model replaces `name` by a separable polynomial:
//!
//! ```toml
//! [model.polynomial]
//! static_coeffs = [[6.0, -1.0, 1.0, 0.0, -1.0, 0.0, 0.3]]
//! time_coeffs = [[1.0, 0.0, -1.0]]
//! lower = [-3.0]
//! upper = [3.0]
//! horizon = 2.0
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimize::MinimizeOptions;
use crate::model::{by_name, DomainBox, Dissipation, EnergyModel, NeighborhoodNorm, SchemeKind, SeparablePolynomial, CATALOG};
use crate::schemes::{LimitOptions, SchemeConfig};
use crate::verify::{VerifyOptions, BALANCE_TOL};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub polynomial: Option<PolynomialConfig>,
}

/// `E(t,x) = sum_i P_i(x_i) + t Q_i(x_i)`, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialConfig {
    pub static_coeffs: Vec<Vec<f64>>,
    pub time_coeffs: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub horizon: f64,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: usize,
}

fn default_lambda_grid() -> usize {
    crate::model::LAMBDA_GRID
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    #[serde(default)]
    pub eps: f64,
    pub tau: f64,
    /// Defaults to the origin.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Viscous scheme only; defaults to `eps / tau`.
    #[serde(default)]
    pub viscosity_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub eps: Vec<f64>,
    pub tau: Vec<f64>,
    /// Spacing of the comparison grid on `[0, T]`.
    #[serde(default = "default_sample_step")]
    pub sample_step: f64,
    #[serde(default)]
    pub limit: Option<LimitTuning>,
}

fn default_sample_step() -> f64 {
    0.01
}

/// Overrides of the limit driver's detection thresholds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitTuning {
    pub tolerance: Option<f64>,
    pub jump_threshold: Option<f64>,
    pub jump_speed: Option<f64>,
    pub max_jump_shift: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandscapeSection {
    /// Times at which `x -> E(t,x) + Psi(x - x0)` is tabulated.
    pub times: Vec<f64>,
    /// Points per axis of the state grid.
    pub points: usize,
    /// Points of the time axis of the residual grid.
    pub time_points: usize,
    /// Step of the three overlay runs.
    pub tau: f64,
    /// Radius of the epsilon run of the overlay.
    pub eps: f64,
    /// Viscosity ratio of the viscous run of the overlay.
    pub viscosity_ratio: f64,
}

impl Default for LandscapeSection {
    fn default() -> Self {
        LandscapeSection {
            times: vec![1.0 / 6.0, 1.0],
            points: 601,
            time_points: 201,
            tau: 1e-3,
            eps: 0.01,
            viscosity_ratio: 2.0,
        }
    }
}

/// A complete run configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelConfig,
    /// Defaults to `Psi = sum |v_i|`.
    #[serde(default)]
    pub dissipation: Option<Dissipation>,
    #[serde(default)]
    pub norm: NeighborhoodNorm,
    #[serde(default)]
    pub scheme: Option<SchemeSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub landscape: LandscapeSection,
    #[serde(default)]
    pub minimize: MinimizeOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Balance tolerance.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_tolerance() -> f64 {
    BALANCE_TOL
}

impl RunConfig {
    /// Minimal configuration for a catalog model; everything else defaulted.
    pub fn for_catalog(name: &str) -> Self {
        RunConfig {
            model: ModelConfig {
                name: Some(name.to_string()),
                polynomial: None,
            },
            dissipation: None,
            norm: NeighborhoodNorm::L2,
            scheme: None,
            sweep: None,
            landscape: LandscapeSection::default(),
            minimize: MinimizeOptions::default(),
            verify: VerifyOptions::default(),
            output: default_output(),
            tolerance: default_tolerance(),
            seed: 0,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Structural checks that do not need the model.
    pub fn validate(&self) -> Result<()> {
        match (&self.model.name, &self.model.polynomial) {
            (None, None) => return Err(Error::Config("model: give either `name` or `polynomial`".into())),
            (Some(_), Some(_)) => {
                return Err(Error::Config("model: `name` and `polynomial` are mutually exclusive".into()))
            }
            (Some(name), None) if !CATALOG.contains(&name.as_str()) => {
                return Err(Error::Config(format!(
                    "model: unknown catalog name {name:?} (known: {})",
                    CATALOG.join(", ")
                )))
            }
            _ => {}
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if let Some(s) = &self.scheme {
            if !(s.tau > 0.0 && s.tau.is_finite()) {
                return Err(Error::Config(format!("scheme.tau must be positive, got {}", s.tau)));
            }
        }
        if let Some(sw) = &self.sweep {
            decreasing(&sw.tau, "sweep.tau")?;
            if !sw.eps.is_empty() {
                decreasing(&sw.eps, "sweep.eps")?;
            }
            if !(sw.sample_step > 0.0) {
                return Err(Error::Config("sweep.sample_step must be positive".into()));
            }
        }
        let l = &self.landscape;
        if l.points < 2 || l.time_points < 2 || !(l.tau > 0.0) || !(l.eps > 0.0) || !(l.viscosity_ratio > 0.0) {
            return Err(Error::Config("landscape: grid sizes must be >= 2 and step parameters positive".into()));
        }
        self.minimize.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_model(&self) -> Result<EnergyModel> {
        if let Some(name) = &self.model.name {
            return by_name(name).map_err(|e| Error::Config(e.to_string()));
        }
        let p = self.model.polynomial.as_ref().expect("validated");
        let energy = SeparablePolynomial::new(p.static_coeffs.clone(), p.time_coeffs.clone())?;
        let domain = DomainBox::new(p.lower.clone(), p.upper.clone())?;
        EnergyModel::new("polynomial", Arc::new(energy), p.horizon, domain, p.lambda_grid)
    }

    pub fn build_dissipation(&self, dim: usize) -> Result<Dissipation> {
        let d = self
            .dissipation
            .clone()
            .unwrap_or_else(|| Dissipation::WeightedL1 { weights: vec![1.0; dim] });
        // Re-run the constructors' range checks on deserialized values.
        let d = match d {
            Dissipation::WeightedL1 { weights } => Dissipation::weighted_l1(weights)?,
            Dissipation::ScaledL2 { rho } => Dissipation::scaled_l2(rho)?,
            other => other,
        };
        d.check_dim(dim)?;
        Ok(d)
    }

    pub fn build_norm(&self) -> Result<NeighborhoodNorm> {
        match self.norm {
            NeighborhoodNorm::L2 => Ok(NeighborhoodNorm::L2),
            NeighborhoodNorm::Lp { p } => NeighborhoodNorm::lp(p),
        }
    }

    fn x0(&self, dim: usize) -> Vec<f64> {
        self.scheme
            .as_ref()
            .and_then(|s| s.x0.clone())
            .unwrap_or_else(|| vec![0.0; dim])
    }

    fn minimize_opts(&self) -> MinimizeOptions {
        MinimizeOptions {
            seed: self.seed,
            ..self.minimize.clone()
        }
    }

    /// Scheme kind and single-run parameters from `[scheme]`.
    pub fn scheme_config(&self, dim: usize) -> Result<(SchemeKind, SchemeConfig)> {
        let s = self
            .scheme
            .as_ref()
            .ok_or_else(|| Error::Config("missing [scheme] section".into()))?;
        let mut cfg = SchemeConfig::new(s.eps, s.tau, self.x0(dim));
        if let Some(e) = s.viscosity_ratio {
            cfg = cfg.with_viscosity(e);
        }
        cfg.minimize_opts = self.minimize_opts();
        Ok((s.kind, cfg))
    }

    /// Limit-driver options for `[sweep]`, sharing `x0` and minimizer
    /// settings with `[scheme]`.
    pub fn limit_options(&self, dim: usize) -> Result<LimitOptions> {
        let sw = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
        let mut opts = LimitOptions::with_x0(self.x0(dim));
        opts.base.minimize_opts = self.minimize_opts();
        if let Some(t) = &sw.limit {
            if let Some(v) = t.tolerance {
                opts.tolerance = v;
            }
            if let Some(v) = t.jump_threshold {
                opts.jump_threshold = v;
            }
            if let Some(v) = t.jump_speed {
                opts.jump_speed = v;
            }
            if let Some(v) = t.max_jump_shift {
                opts.max_jump_shift = v;
            }
        }
        Ok(opts)
    }

    /// Uniform comparison grid `0, h, 2h, ..., T`.
    pub fn sample_grid(&self, horizon: f64) -> Vec<f64> {
        let h = self.sweep.as_ref().map_or(default_sample_step(), |s| s.sample_step);
        let n = (horizon / h + 1e-9).floor() as usize;
        let mut grid: Vec<f64> = (0..=n).map(|i| (i as f64 * h).min(horizon)).collect();
        if horizon - grid[n] > 1e-12 {
            grid.push(horizon);
        }
        grid
    }
}

fn decreasing(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("{what} must not be empty")));
    }
    if v.iter().any(|x| !(*x > 0.0 && x.is_finite())) || v.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config(format!("{what} must be positive and strictly decreasing, got {v:?}")));
    }
    Ok(())
}
