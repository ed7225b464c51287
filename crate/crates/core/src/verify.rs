//! Numerical certificates for stability conditions, energy bounds and
//! energy-dissipation balances. Every check reports a signed residual;
//! `residual <= tolerance` means satisfied unless stated otherwise.

use serde::{Deserialize, Serialize};

use crate::dissipation::{delta_new, diss_new, diss_psi_discrete, DEFAULT_KNOTS};
use crate::error::{Error, Result};
use crate::linalg::{dot, scale, sub, State};
use crate::minimize::{descend_projected, minimize_global_anchored, MinimizeOptions, Region};
use crate::model::{BVTrajectory, DiscreteTrajectory, Dissipation, EnergyModel, NeighborhoodNorm, SchemeKind};
use crate::quadrature::{gauss_legendre5, integrate_adaptive};
use crate::sampling::{halton, sphere_directions};
use crate::schemes::detect_jumps;

/// Tolerance of the new balance at desk-scale discretization.
pub const BALANCE_TOL: f64 = 1e-3;
/// Tolerance of the integral bound.
pub const INTEGRAL_BOUND_TOL: f64 = 1e-7;
/// Tolerance of the KKT identity on moving steps.
pub const KKT_TOL: f64 = 1e-5;
/// Slack for stability residuals of scheme outputs.
pub const STABILITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityKind {
    WeakLocal,
    EpsLocal,
    Global,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub kind: StabilityKind,
    pub t: f64,
    /// Sampled residual; `<= 0` means satisfied.
    pub residual: f64,
    /// Exact residual when a closed form exists (same sign convention).
    pub exact_residual: Option<f64>,
    /// Worst direction (weak-local) or competitor point (eps, global).
    pub witness: State,
}

impl StabilityReport {
    /// The exact residual if available, otherwise the sampled one.
    pub fn effective_residual(&self) -> f64 {
        self.exact_residual.unwrap_or(self.residual)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.effective_residual() <= tol
    }
}

/// `max_v <-grad E(t,x), v> - Psi(v)` over unit directions; for the built-in
/// potentials also the exact membership residual of `-grad E` in the stable
/// set (`max_i |E_{x_i}| - c_i` for weighted-l1, `||grad E|| - rho` for
/// scaled-l2).
pub fn check_weak_local_stability(
    model: &EnergyModel,
    dissipation: &Dissipation,
    t: f64,
    x: &[f64],
    directions: usize,
) -> Result<StabilityReport> {
    let dim = model.dim();
    if directions < 2 * dim {
        return Err(Error::Argument(format!(
            "weak-local check needs at least {} directions, got {directions}",
            2 * dim
        )));
    }
    let g = model.grad_energy(t, x);
    let minus_g = scale(&g, -1.0);
    let mut residual = f64::NEG_INFINITY;
    let mut witness = vec![0.0; dim];
    for v in sphere_directions(dim, directions) {
        let r = dot(&minus_g, &v) - dissipation.psi(&v);
        if r > residual {
            residual = r;
            witness = v;
        }
    }
    let exact_residual = match dissipation {
        Dissipation::Custom { .. } => None,
        _ => Some(dissipation.stability_margin(&minus_g)),
    };
    Ok(StabilityReport {
        kind: StabilityKind::WeakLocal,
        t,
        residual,
        exact_residual,
        witness,
    })
}

/// `max_{||z - x|| <= eps} E(t,x) - E(t,z) - Psi(z - x)` over quasi-random
/// interior points, boundary samples and a descent polish from the worst
/// sample. The candidate `z = x` makes the residual non-negative; a value
/// within tolerance of zero means `x` is `eps`-stable.
pub fn check_eps_stability(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    t: f64,
    x: &[f64],
    eps: f64,
    samples: usize,
) -> Result<StabilityReport> {
    let dim = model.dim();
    if samples < 100 * dim {
        return Err(Error::Argument(format!(
            "eps check needs at least {} samples, got {samples}",
            100 * dim
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("eps must be positive, got {eps}")));
    }
    let ex = model.energy(t, x);
    let gain = |z: &[f64]| ex - model.energy(t, z) - dissipation.psi(&sub(z, x));
    let mut candidates: Vec<State> = vec![x.to_vec()];
    if dim == 1 {
        for k in 0..samples {
            let u = -1.0 + 2.0 * k as f64 / (samples - 1) as f64;
            candidates.push(vec![x[0] + eps * u]);
        }
    } else {
        let boundary = samples / 4;
        for d in sphere_directions(dim, boundary) {
            let s = eps / norm.norm(&d);
            candidates.push(x.iter().zip(&d).map(|(a, v)| a + s * v).collect());
        }
        let mut k = 1u64;
        while candidates.len() < samples + 1 {
            let u = halton(k, dim);
            k += 1;
            let z: State = x.iter().zip(&u).map(|(a, v)| a + eps * (2.0 * v - 1.0)).collect();
            if norm.norm(&sub(&z, x)) <= eps {
                candidates.push(z);
            }
        }
    }
    let mut best = x.to_vec();
    let mut residual = 0.0;
    for z in candidates {
        let r = gain(&z);
        if r > residual {
            residual = r;
            best = z;
        }
    }
    let region = Region::Ball { center: x, radius: eps, norm };
    let opts = MinimizeOptions {
        refine_iterations: 500,
        tolerance: 1e-12,
        ..MinimizeOptions::default()
    };
    let polished = descend_projected(|z: &[f64]| -gain(z), &best, region, &opts)?;
    let r = gain(&polished);
    if r > residual {
        residual = r;
        best = polished;
    }
    Ok(StabilityReport {
        kind: StabilityKind::EpsLocal,
        t,
        residual,
        exact_residual: None,
        witness: best,
    })
}

/// `max_z E(t,x) - E(t,z) - Psi(z - x)` over the global search stencil of
/// the domain box (non-negative; near zero means globally stable).
pub fn check_global_stability(
    model: &EnergyModel,
    dissipation: &Dissipation,
    t: f64,
    x: &[f64],
    opts: &MinimizeOptions,
) -> Result<StabilityReport> {
    let f = |z: &[f64]| model.energy(t, z) + dissipation.psi(&sub(z, x));
    let z = minimize_global_anchored(f, &model.domain, x, opts)?;
    let residual = model.energy(t, x) - f(&z);
    Ok(StabilityReport {
        kind: StabilityKind::Global,
        t,
        residual,
        exact_residual: None,
        witness: z,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBoundsReport {
    /// `max_n E(t_n, x_n) - E(0, x_0) e^{lambda t_n}`.
    pub max_violation_current: f64,
    /// `max_n E(0, x_n) - E(0, x_0) e^{2 lambda t_n}`.
    pub max_violation_initial: f64,
    pub worst_index: usize,
    pub passed: bool,
}

/// Gronwall bounds along a run.
pub fn check_discrete_bounds(model: &EnergyModel, traj: &DiscreteTrajectory) -> DiscreteBoundsReport {
    let e0 = model.energy(0.0, &traj.states[0]);
    let slack = 1e-9 * e0.max(1.0);
    let lambda = model.lambda;
    let mut cur = f64::NEG_INFINITY;
    let mut init = f64::NEG_INFINITY;
    let mut worst = (f64::NEG_INFINITY, 0);
    for (n, (&t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
        let a = model.energy(t, x) - e0 * (lambda * t).exp();
        let b = model.energy(0.0, x) - e0 * (2.0 * lambda * t).exp();
        cur = cur.max(a);
        init = init.max(b);
        if a.max(b) > worst.0 {
            worst = (a.max(b), n);
        }
    }
    DiscreteBoundsReport {
        max_violation_current: cur,
        max_violation_initial: init,
        worst_index: worst.1,
        passed: worst.0 <= slack,
    }
}

/// Energy-dissipation bookkeeping over `[s, t]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub s: f64,
    pub t: f64,
    /// `E(t, u(t)) - E(s, u(s))`.
    pub lhs: f64,
    /// `int_s^t d_t E(r, u(r)) dr`.
    pub work: f64,
    pub diss_psi: f64,
    pub diss_new: f64,
    /// `lhs - work + diss_psi`; the integral bound needs `<= 0`.
    pub residual_upper: f64,
    /// `lhs - work + diss_new`; the lower bound needs `>= 0`.
    pub residual_lower: f64,
    pub tolerance: f64,
    /// `|residual_lower| <= tolerance`.
    pub balanced: bool,
    pub jumps: Vec<JumpBalance>,
}

impl BalanceReport {
    /// Whether the classical balance `lhs - work + diss_psi = 0` holds.
    pub fn classical_balanced(&self) -> bool {
        self.residual_upper.abs() <= self.tolerance
    }
}

/// Two-sided decomposition at a jump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpBalance {
    pub t: f64,
    /// `E(t, u(t+)) - E(t, u(t-))`.
    pub energy_jump: f64,
    pub delta_left: f64,
    pub delta_right: f64,
    pub psi_jump: f64,
    /// `energy_jump + delta_left + delta_right` (zero when balanced).
    pub decomposition_residual: f64,
    /// `delta_left - (E(t,u(t-)) - E(t,u(t)))` (`<= 0` required).
    pub upper_bound_left: f64,
    /// `delta_right - (E(t,u(t)) - E(t,u(t+)))` (`<= 0` required).
    pub upper_bound_right: f64,
}

impl JumpBalance {
    /// `Delta_new - Psi` at this jump: the amount by which the classical
    /// balance misses.
    pub fn classical_gap(&self) -> f64 {
        self.delta_left + self.delta_right - self.psi_jump
    }
}

/// The integral bound on the piecewise-constant interpolant of a run.
pub fn check_integral_bound(
    model: &EnergyModel,
    dissipation: &Dissipation,
    traj: &DiscreteTrajectory,
    s: f64,
    t: f64,
) -> Result<BalanceReport> {
    if !(0.0 <= s && s <= t && t <= traj.end() + 1e-12) {
        return Err(Error::Argument(format!("bad interval [{s}, {t}]")));
    }
    let first = traj.index_at(s);
    let last = traj.index_at(t);
    let mut work = 0.0;
    let mut left = s;
    for k in first..=last {
        let right = if k < last { traj.times[k + 1] } else { t };
        if right > left {
            work += gauss_legendre5(|r| model.dt_energy(r, &traj.states[k]), left, right);
        }
        left = right.max(left);
    }
    let lhs = model.energy(t, traj.value_at(t)) - model.energy(s, traj.value_at(s));
    let dpsi = diss_psi_discrete(traj, dissipation, s, t)?;
    let residual = lhs - work + dpsi;
    Ok(BalanceReport {
        s,
        t,
        lhs,
        work,
        diss_psi: dpsi,
        diss_new: dpsi,
        residual_upper: residual,
        residual_lower: residual,
        tolerance: INTEGRAL_BOUND_TOL,
        balanced: residual.abs() <= INTEGRAL_BOUND_TOL,
        jumps: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `(step index, residual)` for every moving step.
    pub residuals: Vec<(usize, f64)>,
    pub max_residual: f64,
    pub worst_index: Option<usize>,
}

/// `|<-grad E(t_i,x_i), dx> - Psi(dx) - dual_gap(grad E) ||dx|||` on every
/// step with `x_i != x_{i-1}`; stationary steps are skipped.
pub fn check_kkt_identity(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    traj: &DiscreteTrajectory,
) -> KktReport {
    let mut residuals = Vec::new();
    for i in 1..traj.len() {
        let dx = sub(&traj.states[i], &traj.states[i - 1]);
        let len = norm.norm(&dx);
        if len == 0.0 {
            continue;
        }
        let g = model.grad_energy(traj.times[i], &traj.states[i]);
        let r = -dot(&g, &dx) - dissipation.psi(&dx) - dissipation.dual_gap(&g, norm) * len;
        residuals.push((i, r.abs()));
    }
    let worst = residuals.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1));
    KktReport {
        max_residual: worst.map_or(0.0, |w| w.1),
        worst_index: worst.map(|w| w.0),
        residuals,
    }
}

/// `int_s^t d_t E(r, u(r)) dr` on a BV trajectory, integrating each affine
/// piece between consecutive nodes with one-sided limits at its ends.
pub fn work_integral(model: &EnergyModel, traj: &BVTrajectory, s: f64, t: f64) -> Result<f64> {
    let nodes = traj.nodes_in(s, t);
    let mut work = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let ua = traj.right_limit(a);
        let ub = traj.left_limit(b);
        let f = |r: f64| model.dt_energy(r, &crate::linalg::lerp(&ua, &ub, (r - a) / (b - a)));
        let scale = (b - a) * (1.0 + f(a).abs());
        work += integrate_adaptive(f, a, b, 1e-13 * scale.max(1e-300))?;
    }
    Ok(work)
}

/// The new energy-dissipation balance on `[s, t]` together with the jump
/// decomposition and the upper bound of each half-jump cost by its energy
/// drop.
pub fn check_new_balance(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    traj: &BVTrajectory,
    s: f64,
    t: f64,
) -> Result<BalanceReport> {
    let lhs = model.energy(t, &traj.value_at(t)) - model.energy(s, &traj.value_at(s));
    let work = work_integral(model, traj, s, t)?;
    let diss = diss_new(model, dissipation, norm, traj, s, t)?;
    let mut jumps = Vec::new();
    for j in &traj.jumps {
        if j.t <= s || j.t >= t {
            continue;
        }
        let cost = diss.jump_costs.iter().find(|c| c.t == j.t);
        let (dl, dr) = match cost {
            Some(c) => (c.delta_left.unwrap_or(0.0), c.delta_right.unwrap_or(0.0)),
            None => (
                delta_new(model, dissipation, norm, j.t, &j.left, &j.at, DEFAULT_KNOTS)?.0,
                delta_new(model, dissipation, norm, j.t, &j.at, &j.right, DEFAULT_KNOTS)?.0,
            ),
        };
        let e_minus = model.energy(j.t, &j.left);
        let e_at = model.energy(j.t, &j.at);
        let e_plus = model.energy(j.t, &j.right);
        jumps.push(JumpBalance {
            t: j.t,
            energy_jump: e_plus - e_minus,
            delta_left: dl,
            delta_right: dr,
            psi_jump: dissipation.psi(&sub(&j.at, &j.left)) + dissipation.psi(&sub(&j.right, &j.at)),
            decomposition_residual: e_plus - e_minus + dl + dr,
            upper_bound_left: dl - (e_minus - e_at),
            upper_bound_right: dr - (e_at - e_plus),
        });
    }
    let residual_upper = lhs - work + diss.diss_psi;
    let residual_lower = lhs - work + diss.diss_new;
    Ok(BalanceReport {
        s,
        t,
        lhs,
        work,
        diss_psi: diss.diss_psi,
        diss_new: diss.diss_new,
        residual_upper,
        residual_lower,
        tolerance: BALANCE_TOL,
        balanced: residual_lower.abs() <= BALANCE_TOL,
        jumps,
    })
}

/// Weak-local stability at every sample time farther than `skip_radius`
/// from a jump.
pub fn check_weak_local_along(
    model: &EnergyModel,
    dissipation: &Dissipation,
    traj: &BVTrajectory,
    directions: usize,
    skip_radius: f64,
) -> Result<Vec<StabilityReport>> {
    traj.sample_times
        .iter()
        .filter(|&&r| !traj.near_jump(r, skip_radius))
        .map(|&r| check_weak_local_stability(model, dissipation, r, &traj.value_at(r), directions))
        .collect()
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub witness: Option<String>,
}

impl CheckOutcome {
    fn upper(name: &str, residual: f64, tolerance: f64, witness: Option<String>) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scheme: SchemeKind,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

/// Settings of [`verify_trajectory`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Check stability at every `stride`-th node.
    pub stride: usize,
    pub eps_samples: usize,
    pub directions: usize,
    pub stability_tol: f64,
    pub minimize: MinimizeOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            stride: 10,
            eps_samples: 400,
            directions: 64,
            stability_tol: STABILITY_TOL,
            minimize: MinimizeOptions::default(),
        }
    }
}

/// The checks that apply to a stored run of the given scheme: discrete
/// bounds always; integral bound and one-step descent for the uniform
/// schemes; eps-stability and KKT for the epsilon scheme (outside jump
/// windows); global stability for the energetic scheme.
pub fn verify_trajectory(
    model: &EnergyModel,
    dissipation: &Dissipation,
    norm: &NeighborhoodNorm,
    traj: &DiscreteTrajectory,
    opts: &VerifyOptions,
) -> Result<VerifyReport> {
    traj.validate(Some(norm))?;
    let mut checks = Vec::new();
    let bounds = check_discrete_bounds(model, traj);
    checks.push(CheckOutcome::upper(
        "discrete-bound",
        bounds.max_violation_current.max(bounds.max_violation_initial),
        1e-9 * model.energy(0.0, &traj.states[0]).max(1.0),
        Some(format!("node {}", bounds.worst_index)),
    ));

    if traj.scheme != SchemeKind::EfendievMielke {
        let ib = check_integral_bound(model, dissipation, traj, 0.0, traj.end())?;
        checks.push(CheckOutcome::upper("integral-bound", ib.residual_upper, INTEGRAL_BOUND_TOL, None));

        let mut worst = (f64::NEG_INFINITY, 0);
        for i in 1..traj.len() {
            let (t, x, prev) = (traj.times[i], &traj.states[i], &traj.states[i - 1]);
            let mut r = model.energy(t, x) + dissipation.psi(&sub(x, prev)) - model.energy(t, prev);
            if traj.scheme == SchemeKind::Viscous {
                let n = norm.norm(&sub(x, prev));
                r += traj.viscosity * n * n;
            }
            if r > worst.0 {
                worst = (r, i);
            }
        }
        checks.push(CheckOutcome::upper(
            "one-step-descent",
            worst.0.max(0.0),
            STABILITY_TOL,
            Some(format!("node {}", worst.1)),
        ));
    }

    match traj.scheme {
        SchemeKind::EpsNeighborhood => {
            let kkt = check_kkt_identity(model, dissipation, norm, traj);
            checks.push(CheckOutcome::upper(
                "kkt-identity",
                kkt.max_residual,
                KKT_TOL,
                kkt.worst_index.map(|i| format!("node {i}")),
            ));
            let windows = detect_jumps(traj, norm, 1e-3, 2.0);
            let mut worst: Option<StabilityReport> = None;
            for i in (0..traj.len()).step_by(opts.stride.max(1)) {
                let t = traj.times[i];
                if windows.iter().any(|w| t >= w.t - 1e-12 && t <= w.t_end + 1e-12) {
                    continue;
                }
                let r = check_eps_stability(model, dissipation, norm, t, &traj.states[i], traj.eps, opts.eps_samples.max(100 * model.dim()))?;
                if worst.as_ref().map_or(true, |w| r.residual > w.residual) {
                    worst = Some(r);
                }
            }
            if let Some(w) = worst {
                checks.push(CheckOutcome::upper(
                    "eps-stability",
                    w.residual,
                    opts.stability_tol,
                    Some(format!("t = {}, z = {:?}", w.t, w.witness)),
                ));
            }
        }
        SchemeKind::Energetic => {
            let mut worst: Option<StabilityReport> = None;
            for i in (0..traj.len()).step_by(opts.stride.max(1)) {
                let r = check_global_stability(model, dissipation, traj.times[i], &traj.states[i], &opts.minimize)?;
                if worst.as_ref().map_or(true, |w| r.residual > w.residual) {
                    worst = Some(r);
                }
            }
            if let Some(w) = worst {
                checks.push(CheckOutcome::upper(
                    "global-stability",
                    w.residual,
                    opts.stability_tol,
                    Some(format!("t = {}, z = {:?}", w.t, w.witness)),
                ));
            }
        }
        _ => {}
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        scheme: traj.scheme,
        checks,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example2_reference, make_example2};

    fn psi() -> Dissipation {
        Dissipation::abs()
    }

    fn ex2_grad(t: f64, x: f64) -> f64 {
        2.0 * x - 4.0 * x.powi(3) + 1.8 * x.powi(5) - 2.0 * t * x - 1.0
    }

    #[test]
    fn weak_local_residuals_on_benchmark() {
        let m = make_example2();
        let r = check_weak_local_stability(&m, &psi(), 1.5, &[0.0], 8).unwrap();
        assert!(r.exact_residual.unwrap().abs() < 1e-15);
        let r = check_weak_local_stability(&m, &psi(), 1.5, &[0.5], 8).unwrap();
        assert!((ex2_grad(1.5, 0.5) + 1.94375).abs() < 1e-12);
        assert!((r.exact_residual.unwrap() - 0.94375).abs() < 1e-12);
        assert!((r.residual - 0.94375).abs() < 1e-12);
        for t in [1.0 / 6.0, 1.0, 2.0] {
            let y = example2_reference(t);
            assert!((ex2_grad(t, y) + 1.0).abs() < 1e-12);
            let r = check_weak_local_stability(&m, &psi(), t, &[y], 8).unwrap();
            assert!(r.effective_residual() <= 1e-7);
        }
        assert!(check_weak_local_stability(&m, &psi(), 1.0, &[0.0], 1).is_err());
    }

    #[test]
    fn eps_residual_matches_scan_oracle() {
        let m = make_example2();
        let (t, eps) = (1.5, 0.1);
        let r = check_eps_stability(&m, &psi(), &NeighborhoodNorm::L2, t, &[0.0], eps, 200).unwrap();
        let n = 100_000;
        let e0 = m.energy(t, &[0.0]);
        let oracle = (0..=n)
            .map(|k| {
                let z = -eps + 2.0 * eps * k as f64 / n as f64;
                e0 - m.energy(t, &[z]) - z.abs()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(oracle > 0.0);
        assert!((r.residual - oracle).abs() < 1e-9, "{} vs {oracle}", r.residual);
    }

    #[test]
    fn global_stability_sign_change() {
        let m = make_example2();
        let opts = MinimizeOptions::default();
        assert!(check_global_stability(&m, &psi(), 0.5, &[0.0], &opts).unwrap().residual > 0.0);
        assert!(check_global_stability(&m, &psi(), 0.1, &[0.0], &opts).unwrap().residual <= 0.0);
    }

    #[test]
    fn discrete_bounds_flag_inflated_state() {
        let m = make_example2();
        let mut tr = DiscreteTrajectory {
            times: vec![0.0, 0.5, 1.0],
            states: vec![vec![0.0], vec![0.0], vec![0.0]],
            scheme: SchemeKind::EpsNeighborhood,
            eps: 0.1,
            tau: 0.5,
            viscosity: 0.0,
        };
        let ok = check_discrete_bounds(&m, &tr);
        assert!(ok.passed);
        tr.states[1] = vec![2.9];
        let bad = check_discrete_bounds(&m, &tr);
        assert!(!bad.passed && bad.worst_index == 1);
    }

    #[test]
    fn integral_bound_is_exact_on_constant_run() {
        let m = make_example2();
        let tr = DiscreteTrajectory {
            times: vec![0.0, 0.5, 1.0],
            states: vec![vec![0.3]; 3],
            scheme: SchemeKind::Energetic,
            eps: 0.0,
            tau: 0.5,
            viscosity: 0.0,
        };
        let r = check_integral_bound(&m, &psi(), &tr, 0.2, 0.9).unwrap();
        assert!(r.residual_upper.abs() < 1e-14);
    }

    #[test]
    fn continuous_balance_reduces_to_chain_rule() {
        // u(t) = y(t) on [1, 2] is a continuous BV solution piece.
        let m = make_example2();
        let samples: Vec<(f64, State)> = (0..=1000)
            .map(|k| {
                let t = 1.0 + k as f64 / 1000.0;
                (t, vec![example2_reference(t)])
            })
            .collect();
        let var = example2_reference(2.0) - example2_reference(1.0);
        let bv = BVTrajectory::continuous(samples, var).unwrap();
        let r = check_new_balance(&m, &psi(), &NeighborhoodNorm::L2, &bv, 1.0, 2.0).unwrap();
        assert!(r.balanced && r.residual_lower.abs() < 1e-5, "{}", r.residual_lower);
        assert_eq!(r.diss_new, r.diss_psi);
    }
}
