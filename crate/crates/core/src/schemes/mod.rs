//! The four incremental constructions and the limit driver.
//!
//! All uniform schemes use the partition `t_i = i tau`, `i = 0..=N` with
//! `N = floor(T / tau)`, and the piecewise-constant interpolant
//! `x(t) = x_{i-1}` on `[t_{i-1}, t_i)`.

mod limit;

pub use limit::{detect_jumps, refine_limit, JumpWindow, LevelDiagnostics, LimitDiagnostics, LimitOptions};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sub, State};
use crate::minimize::{minimize_global_anchored, minimize_in_ball, MinimizeOptions};
use crate::model::{DiscreteTrajectory, Dissipation, EnergyModel, NeighborhoodNorm};

pub use crate::model::SchemeKind;

/// Slack for "`x0` is already a minimizer" at `t = 0`.
const INITIAL_STABILITY_TOL: f64 = 1e-9;

/// Parameters of a single scheme run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    /// Neighborhood radius. Ignored by the energetic scheme.
    pub eps: f64,
    pub tau: f64,
    pub x0: State,
    /// `e` of the viscous scheme, conventionally `eps / tau`.
    #[serde(default)]
    pub viscosity_ratio: f64,
    #[serde(default)]
    pub minimize_opts: MinimizeOptions,
}

impl SchemeConfig {
    pub fn new(eps: f64, tau: f64, x0: State) -> Self {
        SchemeConfig {
            eps,
            tau,
            x0,
            viscosity_ratio: if tau > 0.0 { eps / tau } else { 0.0 },
            minimize_opts: MinimizeOptions::default(),
        }
    }

    pub fn with_viscosity(mut self, e: f64) -> Self {
        self.viscosity_ratio = e;
        self
    }

    fn validate(&self, model: &EnergyModel, needs_eps: bool) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Argument(format!("tau must be positive, got {}", self.tau)));
        }
        if needs_eps && !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::Argument(format!("eps must be positive, got {}", self.eps)));
        }
        if self.x0.len() != model.dim() {
            return Err(Error::Argument(format!(
                "x0 has dimension {} but the model has dimension {}",
                self.x0.len(),
                model.dim()
            )));
        }
        if !model.domain.contains(&self.x0, 1e-12) {
            return Err(Error::Argument(format!("x0 = {:?} lies outside the model domain", self.x0)));
        }
        self.minimize_opts.validate()
    }
}

/// Nodes `t_i = i tau` of the uniform partition of `[0, T]`.
pub fn time_grid(horizon: f64, tau: f64) -> Vec<f64> {
    let n = (horizon / tau + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * tau).collect()
}

fn check_inputs(model: &EnergyModel, dissipation: &Dissipation) -> Result<()> {
    dissipation.check_dim(model.dim())
}

/// Epsilon-neighborhood scheme: `x_i` minimizes `E(t_i, .) + Psi(. - x_{i-1})`
/// over the closed `eps`-ball around `x_{i-1}`.
pub fn solve_eps_neighborhood(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    cfg: &SchemeConfig,
) -> Result<DiscreteTrajectory> {
    check_inputs(model, dissipation)?;
    cfg.validate(model, true)?;
    if cfg.tau > cfg.eps {
        return Err(Error::Argument(format!(
            "the epsilon scheme needs tau <= eps, got tau = {} and eps = {}",
            cfg.tau, cfg.eps
        )));
    }
    check_initial_stability(model, dissipation, norm, cfg)?;

    let times = time_grid(model.horizon, cfg.tau);
    let mut states = Vec::with_capacity(times.len());
    states.push(cfg.x0.clone());
    for &t in &times[1..] {
        let prev = states.last().expect("x0 pushed");
        let f = |x: &[f64]| model.energy(t, x) + dissipation.psi(&sub(x, prev));
        let next = minimize_in_ball(f, prev, cfg.eps, norm, &cfg.minimize_opts)?;
        states.push(next);
    }
    debug!("eps-neighborhood run: eps={}, tau={}, {} nodes", cfg.eps, cfg.tau, times.len());
    Ok(DiscreteTrajectory {
        times,
        states,
        scheme: SchemeKind::EpsNeighborhood,
        eps: cfg.eps,
        tau: cfg.tau,
        viscosity: 0.0,
    })
}

/// Errors unless `x0` minimizes `E(0, .) + Psi(. - x0)` on the `eps`-ball.
fn check_initial_stability(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    cfg: &SchemeConfig,
) -> Result<()> {
    let x0 = &cfg.x0;
    let f = |x: &[f64]| model.energy(0.0, x) + dissipation.psi(&sub(x, x0));
    let best = minimize_in_ball(&f, x0, cfg.eps, norm, &cfg.minimize_opts)?;
    let drop = f(x0) - f(&best);
    if drop > INITIAL_STABILITY_TOL {
        return Err(Error::InitialInstability { drop, witness: best });
    }
    Ok(())
}

/// Energetic scheme: global minimization of `E(t_i, .) + Psi(. - x_{i-1})`
/// over the domain box.
pub fn solve_energetic(model: &EnergyModel, dissipation: &Dissipation, cfg: &SchemeConfig) -> Result<DiscreteTrajectory> {
    check_inputs(model, dissipation)?;
    cfg.validate(model, false)?;
    let times = time_grid(model.horizon, cfg.tau);
    let mut states = Vec::with_capacity(times.len());
    states.push(cfg.x0.clone());
    for &t in &times[1..] {
        let prev = states.last().expect("x0 pushed");
        let f = |x: &[f64]| model.energy(t, x) + dissipation.psi(&sub(x, prev));
        let next = minimize_global_anchored(f, &model.domain, prev, &cfg.minimize_opts)?;
        states.push(next);
    }
    debug!("energetic run: tau={}, {} nodes", cfg.tau, times.len());
    Ok(DiscreteTrajectory {
        times,
        states,
        scheme: SchemeKind::Energetic,
        eps: 0.0,
        tau: cfg.tau,
        viscosity: 0.0,
    })
}

/// Viscous scheme: global minimization of
/// `E(t_i, .) + Psi(. - x_{i-1}) + e ||. - x_{i-1}||^2`.
pub fn solve_viscous(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    cfg: &SchemeConfig,
) -> Result<DiscreteTrajectory> {
    check_inputs(model, dissipation)?;
    cfg.validate(model, false)?;
    let e = cfg.viscosity_ratio;
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::Argument(format!("viscosity ratio must be positive, got {e}")));
    }
    let times = time_grid(model.horizon, cfg.tau);
    let mut states = Vec::with_capacity(times.len());
    states.push(cfg.x0.clone());
    for &t in &times[1..] {
        let prev = states.last().expect("x0 pushed");
        let f = |x: &[f64]| {
            let d = sub(x, prev);
            let n = norm.norm(&d);
            model.energy(t, x) + dissipation.psi(&d) + e * n * n
        };
        let next = minimize_global_anchored(f, &model.domain, prev, &cfg.minimize_opts)?;
        states.push(next);
    }
    debug!("viscous run: e={e}, tau={}, {} nodes", cfg.tau, times.len());
    Ok(DiscreteTrajectory {
        times,
        states,
        scheme: SchemeKind::Viscous,
        eps: cfg.eps,
        tau: cfg.tau,
        viscosity: e,
    })
}

/// Arc-length scheme with `eps = tau`: `x_j` minimizes
/// `E(t_{j-1}, .) + Psi(. - x_{j-1})` on the `eps`-ball and the clock
/// advances by `tau - ||x_j - x_{j-1}||`. Nodes past `T` are dropped.
pub fn solve_efendiev_mielke(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    cfg: &SchemeConfig,
) -> Result<DiscreteTrajectory> {
    check_inputs(model, dissipation)?;
    cfg.validate(model, true)?;
    if (cfg.eps - cfg.tau).abs() > 1e-12 * cfg.tau.max(1e-300) {
        return Err(Error::Argument(format!(
            "the arc-length scheme needs eps = tau, got eps = {} and tau = {}",
            cfg.eps, cfg.tau
        )));
    }
    let tau = cfg.tau;
    let horizon = model.horizon;
    let slack = 1e-9 * tau;
    // Time advances by tau unless the state moves; every frozen step moves
    // by tau in norm, so the walk is bounded by the domain diameter.
    let diameter = norm.norm(&sub(&model.domain.upper, &model.domain.lower));
    let max_steps = (4.0 * horizon / tau + 8.0 * diameter / tau) as usize + 16;

    let mut times = vec![0.0];
    let mut states = vec![cfg.x0.clone()];
    let mut t = 0.0_f64;
    for _ in 0..max_steps {
        let prev = states.last().expect("x0 pushed");
        let f = |x: &[f64]| model.energy(t, x) + dissipation.psi(&sub(x, prev));
        let next = minimize_in_ball(f, prev, cfg.eps, norm, &cfg.minimize_opts)?;
        let step = norm.norm(&sub(&next, prev)).min(tau);
        let t_next = t + (tau - step);
        if t_next > horizon + slack {
            break;
        }
        t = t_next;
        times.push(t);
        states.push(next);
        if t >= horizon - slack {
            break;
        }
    }
    if t < horizon - tau - slack {
        return Err(Error::Numeric(format!(
            "arc-length scheme stalled at t = {t} after {max_steps} steps"
        )));
    }
    debug!("arc-length run: tau={tau}, {} nodes", times.len());
    Ok(DiscreteTrajectory {
        times,
        states,
        scheme: SchemeKind::EfendievMielke,
        eps: cfg.eps,
        tau,
        viscosity: 0.0,
    })
}

/// Runs the scheme named by `kind`.
pub fn solve(
    kind: SchemeKind,
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    cfg: &SchemeConfig,
) -> Result<DiscreteTrajectory> {
    match kind {
        SchemeKind::EpsNeighborhood => solve_eps_neighborhood(model, dissipation, norm, cfg),
        SchemeKind::Energetic => solve_energetic(model, dissipation, cfg),
        SchemeKind::Viscous => solve_viscous(model, dissipation, norm, cfg),
        SchemeKind::EfendievMielke => solve_efendiev_mielke(model, dissipation, norm, cfg),
    }
}
