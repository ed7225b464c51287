//! Two-level limit driver: `tau -> 0` at fixed `eps`, then `eps -> 0`.
//!
//! Subsequence extraction is replaced by a Cauchy test on a fixed sample
//! grid: the last two levels of each sequence must agree to `tolerance`
//! away from their jump windows, have the same number of jumps, and place
//! matching jumps within `max_jump_shift` of each other.

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve, SchemeConfig, SchemeKind};
use crate::dissipation::diss_psi_discrete;
use crate::error::{Error, Result};
use crate::linalg::{sub, State};
use crate::model::{BVTrajectory, DiscreteTrajectory, Dissipation, EnergyModel, JumpRecord, NeighborhoodNorm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimitOptions {
    /// Cauchy tolerance on the masked sup-distance.
    pub tolerance: f64,
    /// Minimal displacement of a jump; defaults to ten times the tolerance.
    pub jump_threshold: f64,
    /// Displacement per unit time above which motion counts as a jump.
    pub jump_speed: f64,
    /// Largest admissible jump-time shift between the last two levels.
    pub max_jump_shift: f64,
    /// Geometric refinement points added on each side of a jump.
    pub refine_points: usize,
    /// Initial state and minimizer settings shared by all runs.
    pub base: SchemeConfig,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            tolerance: 1e-4,
            jump_threshold: 1e-3,
            jump_speed: 2.0,
            max_jump_shift: 1e-2,
            refine_points: 8,
            base: SchemeConfig::new(0.0, 1.0, vec![0.0]),
        }
    }
}

impl LimitOptions {
    pub fn with_x0(x0: State) -> Self {
        LimitOptions {
            base: SchemeConfig::new(0.0, 1.0, x0),
            ..Default::default()
        }
    }
}

/// A cluster of fast node steps in one discrete run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpWindow {
    /// Time of the first node that has moved.
    pub t: f64,
    /// Time of the last node of the cluster.
    pub t_end: f64,
    /// Index of the last node before the cluster.
    pub before: usize,
    /// Index of the last node of the cluster.
    pub after: usize,
}

/// Cauchy data of one sequence of runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagnostics {
    /// Fixed `eps` of the level (0 when the scheme has none).
    pub eps: f64,
    /// Decreasing `tau` values.
    pub parameter_sequence: Vec<f64>,
    /// Masked sup-distance between successive runs.
    pub sup_distances: Vec<f64>,
    pub jump_counts: Vec<usize>,
    /// Largest shift of matched jump times between successive runs
    /// (infinite if the counts differ).
    pub jump_shifts: Vec<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitDiagnostics {
    pub scheme: Option<SchemeKind>,
    pub tolerance: f64,
    pub max_jump_shift: f64,
    pub tau_levels: Vec<LevelDiagnostics>,
    /// Decreasing `eps` values of the outer limit (empty for single-level
    /// schemes).
    pub parameter_sequence: Vec<f64>,
    pub sup_distances: Vec<f64>,
    pub jump_counts: Vec<usize>,
    pub jump_shifts: Vec<f64>,
    pub converged: bool,
}

impl LimitDiagnostics {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} limit, tolerance {:e}: ",
            self.scheme.map_or("unknown", SchemeKind::tag),
            self.tolerance
        );
        for lvl in &self.tau_levels {
            s.push_str(&format!(
                "[eps={} tau={:?} sup={:?} jumps={:?} shifts={:?} {}] ",
                lvl.eps,
                lvl.parameter_sequence,
                lvl.sup_distances,
                lvl.jump_counts,
                lvl.jump_shifts,
                if lvl.converged { "ok" } else { "FAILED" }
            ));
        }
        if !self.parameter_sequence.is_empty() {
            s.push_str(&format!(
                "eps={:?} sup={:?} jumps={:?} shifts={:?}",
                self.parameter_sequence, self.sup_distances, self.jump_counts, self.jump_shifts
            ));
        }
        s
    }
}

/// Groups nodes into macro steps spanning at least `tau / 2` of time (this
/// merges the frozen-clock steps of the arc-length scheme) and returns the
/// maximal runs of fast macro steps: displacement above `threshold` and
/// above `speed` times the elapsed time.
pub fn detect_jumps(traj: &DiscreteTrajectory, norm: &NeighborhoodNorm, threshold: f64, speed: f64) -> Vec<JumpWindow> {
    let n = traj.len();
    let half = 0.5 * traj.tau;
    let mut windows: Vec<JumpWindow> = Vec::new();
    let mut a = 0;
    let mut open: Option<JumpWindow> = None;
    while a + 1 < n {
        let mut b = a + 1;
        while b + 1 < n && traj.times[b] - traj.times[a] < half {
            b += 1;
        }
        let dx = norm.norm(&sub(&traj.states[b], &traj.states[a]));
        let dt = traj.times[b] - traj.times[a];
        let fast = dx > threshold && dx > speed * dt;
        match (&mut open, fast) {
            (Some(w), true) => {
                w.after = b;
                w.t_end = traj.times[b];
            }
            (None, true) => {
                open = Some(JumpWindow {
                    t: traj.times[a + 1],
                    t_end: traj.times[b],
                    before: a,
                    after: b,
                });
            }
            (Some(_), false) => windows.push(open.take().expect("open window")),
            (None, false) => {}
        }
        a = b;
    }
    if let Some(w) = open {
        windows.push(w);
    }
    windows
}

struct Run {
    traj: DiscreteTrajectory,
    jumps: Vec<JumpWindow>,
}

impl Run {
    /// Value of the run at `s`. Arc-length runs are read as the polygon
    /// through the graph points `(t_i, x_i)`, which tracks a smooth branch
    /// to second order; the uniform schemes use their piecewise-constant
    /// interpolant.
    fn sample(&self, s: f64) -> State {
        let traj = &self.traj;
        let i = traj.index_at(s);
        if traj.scheme == SchemeKind::EfendievMielke && i + 1 < traj.len() {
            let (t0, t1) = (traj.times[i], traj.times[i + 1]);
            if t1 > t0 && s > t0 {
                return crate::linalg::lerp(&traj.states[i], &traj.states[i + 1], (s - t0) / (t1 - t0));
            }
        }
        traj.states[i].clone()
    }
}

fn masked_sup_distance(a: &Run, b: &Run, grid: &[f64], norm: &NeighborhoodNorm, pad: f64) -> f64 {
    let mut masks: Vec<(f64, f64)> = Vec::new();
    for (ja, jb) in a.jumps.iter().zip(&b.jumps) {
        masks.push((ja.t.min(jb.t) - pad, ja.t_end.max(jb.t_end) + pad));
    }
    // Unmatched jumps are masked individually; their count mismatch is
    // reported separately.
    let matched = a.jumps.len().min(b.jumps.len());
    for j in a.jumps.iter().skip(matched).chain(b.jumps.iter().skip(matched)) {
        masks.push((j.t - pad, j.t_end + pad));
    }
    grid.iter()
        .filter(|&&s| !masks.iter().any(|(lo, hi)| s >= *lo && s <= *hi))
        .map(|&s| norm.norm(&sub(&a.sample(s), &b.sample(s))))
        .fold(0.0, f64::max)
}

fn jump_shift(a: &Run, b: &Run) -> f64 {
    if a.jumps.len() != b.jumps.len() {
        return f64::INFINITY;
    }
    a.jumps
        .iter()
        .zip(&b.jumps)
        .map(|(x, y)| (x.t - y.t).abs())
        .fold(0.0, f64::max)
}

/// Cauchy statistics over successive runs; returns `(sup, counts, shifts,
/// converged)`.
fn cauchy(runs: &[Run], grid: &[f64], norm: &NeighborhoodNorm, opts: &LimitOptions) -> (Vec<f64>, Vec<usize>, Vec<f64>, bool) {
    let mut sup = Vec::new();
    let mut shifts = Vec::new();
    let counts = runs.iter().map(|r| r.jumps.len()).collect();
    for w in runs.windows(2) {
        let pad = 2.0 * w[0].traj.tau.max(w[1].traj.tau);
        sup.push(masked_sup_distance(&w[0], &w[1], grid, norm, pad));
        shifts.push(jump_shift(&w[0], &w[1]));
    }
    let converged = match (sup.last(), shifts.last()) {
        (Some(d), Some(s)) => *d <= opts.tolerance && *s <= opts.max_jump_shift,
        // A single run cannot be tested.
        _ => false,
    };
    (sup, counts, shifts, converged)
}

fn run_level(
    kind: SchemeKind,
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    eps: f64,
    taus: &[f64],
    opts: &LimitOptions,
) -> Result<Vec<Run>> {
    let results: Vec<Result<Run>> = taus
        .par_iter()
        .map(|&tau| {
            let mut cfg = opts.base.clone();
            cfg.tau = tau;
            cfg.eps = match kind {
                SchemeKind::EfendievMielke => tau,
                SchemeKind::Energetic => 0.0,
                _ => eps,
            };
            cfg.viscosity_ratio = eps / tau;
            let traj = solve(kind, model, dissipation, norm, &cfg)?;
            let jumps = detect_jumps(&traj, norm, opts.jump_threshold, opts.jump_speed);
            Ok(Run { traj, jumps })
        })
        .collect();
    results.into_iter().collect()
}

fn strictly_decreasing(seq: &[f64], what: &str) -> Result<()> {
    if seq.is_empty() || seq.iter().any(|v| !(*v > 0.0)) || seq.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Argument(format!(
            "{what} sequence must be positive and strictly decreasing, got {seq:?}"
        )));
    }
    Ok(())
}

/// Runs `kind` over the parameter ladders and assembles the limit as a
/// BV trajectory sampled on `sample_grid`.
///
/// The energetic scheme ignores `eps_sequence`; the arc-length scheme uses
/// `eps = tau` and a single ladder; the viscous scheme uses `e = eps / tau`.
/// Jumps of the limit are those of the finest converged run, localized to
/// one time step.
pub fn refine_limit(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    kind: SchemeKind,
    eps_sequence: &[f64],
    tau_sequence: &[f64],
    sample_grid: &[f64],
    opts: &LimitOptions,
) -> Result<(BVTrajectory, LimitDiagnostics)> {
    strictly_decreasing(tau_sequence, "tau")?;
    let single = matches!(kind, SchemeKind::Energetic | SchemeKind::EfendievMielke);
    let eps_levels: Vec<f64> = if single {
        vec![0.0]
    } else {
        strictly_decreasing(eps_sequence, "eps")?;
        eps_sequence.to_vec()
    };
    if sample_grid.windows(2).any(|w| !(w[1] > w[0]))
        || sample_grid.iter().any(|s| *s < 0.0 || *s > model.horizon + 1e-12)
    {
        return Err(Error::Argument("sample grid must be increasing and inside [0, T]".into()));
    }

    let mut diag = LimitDiagnostics {
        scheme: Some(kind),
        tolerance: opts.tolerance,
        max_jump_shift: opts.max_jump_shift,
        ..Default::default()
    };
    let mut finest: Vec<Run> = Vec::new();
    for &eps in &eps_levels {
        let mut runs = run_level(kind, model, dissipation, norm, eps, tau_sequence, opts)?;
        let (sup, counts, shifts, converged) = cauchy(&runs, sample_grid, norm, opts);
        info!("{kind} eps={eps}: sup distances {sup:?}, jumps {counts:?}, converged {converged}");
        diag.tau_levels.push(LevelDiagnostics {
            eps,
            parameter_sequence: tau_sequence.to_vec(),
            sup_distances: sup,
            jump_counts: counts,
            jump_shifts: shifts,
            converged,
        });
        finest.push(runs.pop().expect("non-empty tau sequence"));
    }
    let tau_ok = diag.tau_levels.iter().all(|l| l.converged);
    diag.converged = if single {
        tau_ok
    } else {
        diag.parameter_sequence = eps_levels.clone();
        let (sup, counts, shifts, converged) = cauchy(&finest, sample_grid, norm, opts);
        diag.sup_distances = sup;
        diag.jump_counts = counts;
        diag.jump_shifts = shifts;
        tau_ok && (converged || finest.len() == 1)
    };
    if !diag.converged {
        return Err(Error::NonConvergence(Box::new(diag)));
    }
    let limit = finest.pop().expect("at least one level");
    let bv = assemble(&limit, sample_grid, dissipation, opts)?;
    Ok((bv, diag))
}

/// Converts a run into a BV trajectory: grid samples outside jump windows,
/// geometric refinement towards each jump, and one record per window.
fn assemble(run: &Run, grid: &[f64], dissipation: &Dissipation, opts: &LimitOptions) -> Result<BVTrajectory> {
    let traj = &run.traj;
    let tau = traj.tau;
    let inside = |s: f64| {
        run.jumps
            .iter()
            .any(|w| s >= w.t - 1e-12 && s <= w.t_end + 1e-12)
    };
    let mut samples: Vec<(f64, State)> = grid
        .iter()
        .filter(|&&s| !inside(s))
        .map(|&s| (s, run.sample(s)))
        .collect();
    let mut jumps = Vec::with_capacity(run.jumps.len());
    for w in &run.jumps {
        let left = traj.states[w.before].clone();
        let right = traj.states[w.after].clone();
        let at = traj.value_at(w.t).to_vec();
        // Refinement points: the last pre-jump node, then geometrically
        // spaced times on both sides.
        samples.push((traj.times[w.before], left.clone()));
        if w.t_end > w.t + 1e-12 {
            samples.push((w.t_end, right.clone()));
        }
        let mut h = tau;
        for _ in 0..opts.refine_points {
            for s in [w.t - h, w.t_end + h] {
                if s > 0.0 && s < traj.end() && !inside(s) {
                    samples.push((s, run.sample(s)));
                }
            }
            h *= 2.0;
        }
        jumps.push(JumpRecord {
            t: w.t,
            left,
            at,
            right,
            transition_left: None,
            transition_right: None,
        });
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    samples.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 * a.0.abs().max(1.0));
    let var_bound = diss_psi_discrete(traj, dissipation, traj.start(), traj.end())?;
    BVTrajectory::new(samples, jumps, var_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_example2;

    fn grid(step: f64, horizon: f64) -> Vec<f64> {
        let n = (horizon / step).round() as usize;
        (0..=n).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn energetic_limit_jumps_at_one_sixth() {
        let m = make_example2();
        let (bv, diag) = refine_limit(
            &m,
            &Dissipation::abs(),
            &NeighborhoodNorm::L2,
            SchemeKind::Energetic,
            &[],
            &[1e-2, 1e-3, 1e-4],
            &grid(0.01, 2.0),
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(diag.converged);
        assert_eq!(bv.jumps.len(), 1);
        assert!((bv.jumps[0].t - 1.0 / 6.0).abs() < 1e-3);
        assert_eq!(bv.jumps[0].left, vec![0.0]);
    }

    #[test]
    fn jump_detection_ignores_slow_motion() {
        let traj = DiscreteTrajectory {
            times: (0..=100).map(|i| i as f64 * 0.01).collect(),
            states: (0..=100).map(|i| vec![0.15 * i as f64 * 0.01]).collect(),
            scheme: SchemeKind::Energetic,
            eps: 0.0,
            tau: 0.01,
            viscosity: 0.0,
        };
        assert!(detect_jumps(&traj, &NeighborhoodNorm::L2, 1e-3, 2.0).is_empty());
    }

    #[test]
    fn single_run_does_not_converge() {
        let m = make_example2();
        let err = refine_limit(
            &m,
            &Dissipation::abs(),
            &NeighborhoodNorm::L2,
            SchemeKind::Energetic,
            &[],
            &[1e-2],
            &grid(0.1, 2.0),
            &LimitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)));
    }

    #[test]
    fn rejects_increasing_sequences() {
        let m = make_example2();
        let err = refine_limit(
            &m,
            &Dissipation::abs(),
            &NeighborhoodNorm::L2,
            SchemeKind::EpsNeighborhood,
            &[0.1, 0.2],
            &[1e-2, 1e-3],
            &grid(0.1, 2.0),
            &LimitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }
}
