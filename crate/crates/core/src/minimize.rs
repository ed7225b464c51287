//! Deterministic, derivative-free minimization oracles.
//!
//! Every search is a scan of a fixed stencil (grid plus boundary samples)
//! followed by local polishing from the best few stencil points: golden
//! section in one dimension, projected compass search otherwise. The
//! incremental schemes only ever compare objective values, so no gradient
//! information is needed and kinks of `Psi` are harmless.

use serde::{Deserialize, Serialize};

use crate::error::{finite, Error, Result};
use crate::linalg::{dist2, State};
use crate::model::{DomainBox, NeighborhoodNorm};
use crate::sampling::{halton, sphere_directions};

/// Number of stencil points polished locally.
const POLISH_STARTS: usize = 5;

/// Upper bound on the coarse grid size in higher dimensions.
const MAX_GRID_POINTS: usize = 1 << 17;

/// Relative value difference treated as floating-point noise.
const ROUNDOFF: f64 = 1e-13;

/// Golden-section bracket width (relative) at which polishing stops.
const GOLDEN_WIDTH: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    pub coarse_points_per_axis: usize,
    /// Poll cap for compass search.
    pub refine_iterations: usize,
    pub step_shrink: f64,
    /// Values closer than this count as ties; also the compass stop step.
    pub tolerance: f64,
    /// Offsets the quasi-random interior samples used in dimension >= 2.
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            coarse_points_per_axis: 64,
            refine_iterations: 200,
            step_shrink: 0.5,
            tolerance: 1e-10,
            seed: 0,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_points_per_axis < 3 {
            return Err(Error::Argument(format!(
                "coarse_points_per_axis must be >= 3, got {}",
                self.coarse_points_per_axis
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Argument(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(Error::Argument(format!(
                "step_shrink must lie in (0,1), got {}",
                self.step_shrink
            )));
        }
        Ok(())
    }
}

/// Feasible set of a local search.
#[derive(Clone, Copy, Debug)]
pub enum Region<'a> {
    Ball {
        center: &'a [f64],
        radius: f64,
        norm: &'a NeighborhoodNorm,
    },
    Box(&'a DomainBox),
}

impl Region<'_> {
    fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } => center.len(),
            Region::Box(b) => b.dim(),
        }
    }

    /// Radial projection onto the ball, clamping onto the box.
    pub fn project(&self, x: &mut [f64]) {
        match self {
            Region::Ball { center, radius, norm } => {
                let d: Vec<f64> = x.iter().zip(center.iter()).map(|(a, c)| a - c).collect();
                let n = norm.norm(&d);
                if n > *radius {
                    let s = radius / n;
                    for (xi, (di, ci)) in x.iter_mut().zip(d.iter().zip(center.iter())) {
                        *xi = ci + s * di;
                    }
                }
            }
            Region::Box(b) => b.clamp(x),
        }
    }

    /// Characteristic length used for initial compass steps.
    fn scale(&self) -> f64 {
        match self {
            Region::Ball { radius, .. } => 2.0 * radius,
            Region::Box(b) => b
                .lower
                .iter()
                .zip(&b.upper)
                .map(|(l, u)| u - l)
                .fold(0.0, f64::max),
        }
    }

    /// Interval for one-dimensional searches.
    fn interval(&self) -> (f64, f64) {
        match self {
            Region::Ball { center, radius, .. } => (center[0] - radius, center[0] + radius),
            Region::Box(b) => (b.lower[0], b.upper[0]),
        }
    }
}

/// An evaluated point.
#[derive(Clone, Debug)]
struct Point {
    x: State,
    f: f64,
}

struct Evaluator<'f, F> {
    f: &'f F,
}

impl<F: Fn(&[f64]) -> f64> Evaluator<'_, F> {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        finite((self.f)(x), x)
    }

    fn point(&self, x: State) -> Result<Point> {
        let f = self.eval(&x)?;
        Ok(Point { x, f })
    }
}

/// Minimizes `objective` over the closed ball `||x - center|| <= radius`.
///
/// The center is always a candidate, so the returned value never exceeds
/// `objective(center)`. Near-ties between separated minimizers are broken
/// towards the center.
pub fn minimize_in_ball<F>(
    objective: F,
    center: &[f64],
    radius: f64,
    norm: &NeighborhoodNorm,
    opts: &MinimizeOptions,
) -> Result<State>
where
    F: Fn(&[f64]) -> f64,
{
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Argument(format!("ball radius must be positive, got {radius}")));
    }
    let region = Region::Ball { center, radius, norm };
    search(&objective, region, center, opts).map(|p| p.x)
}

/// Minimizes `objective` over the box. Ties are broken towards the box
/// center.
pub fn minimize_global<F>(objective: F, domain: &DomainBox, opts: &MinimizeOptions) -> Result<State>
where
    F: Fn(&[f64]) -> f64,
{
    let center: State = domain
        .lower
        .iter()
        .zip(&domain.upper)
        .map(|(l, u)| 0.5 * (l + u))
        .collect();
    search(&objective, Region::Box(domain), &center, opts).map(|p| p.x)
}

/// Global minimization over the box with an extra candidate `anchor`
/// (typically the previous state) that is always evaluated and wins ties.
pub fn minimize_global_anchored<F>(
    objective: F,
    domain: &DomainBox,
    anchor: &[f64],
    opts: &MinimizeOptions,
) -> Result<State>
where
    F: Fn(&[f64]) -> f64,
{
    search(&objective, Region::Box(domain), anchor, opts).map(|p| p.x)
}

/// Projected compass descent from a feasible `start`. Objective values of
/// the iterates are non-increasing.
pub fn descend_projected<F>(objective: F, start: &[f64], region: Region<'_>, opts: &MinimizeOptions) -> Result<State>
where
    F: Fn(&[f64]) -> f64,
{
    opts.validate()?;
    let ev = Evaluator { f: &objective };
    let p = ev.point(start.to_vec())?;
    let step = region.scale() / opts.coarse_points_per_axis as f64;
    compass(&ev, p, region, step, opts).map(|p| p.x)
}

fn search<F>(objective: &F, region: Region<'_>, anchor: &[f64], opts: &MinimizeOptions) -> Result<Point>
where
    F: Fn(&[f64]) -> f64,
{
    opts.validate()?;
    if anchor.len() != region.dim() {
        return Err(Error::Argument(format!(
            "anchor has dimension {} but the search region has dimension {}",
            anchor.len(),
            region.dim()
        )));
    }
    let ev = Evaluator { f: objective };
    let anchor_pt = ev.point(anchor.to_vec())?;
    let (candidates, merge_radius) = if region.dim() == 1 {
        search_1d(&ev, region, opts)?
    } else {
        search_nd(&ev, region, opts)?
    };
    // The objective varies over a ball by O(radius) (Psi is 1-homogeneous),
    // so the tie threshold shrinks with small balls; otherwise genuine
    // decreases of order radius^2 would be mistaken for ties.
    let tie = match region {
        Region::Ball { radius, .. } => opts.tolerance * radius.min(1.0),
        Region::Box(_) => opts.tolerance,
    };
    Ok(pick(anchor_pt, candidates, merge_radius, tie))
}

/// Chooses the lowest candidate; among near-ties that are separated from
/// it by more than `merge_radius`, the one closest to the anchor wins. An
/// anchor matching the best value up to round-off always wins, so polished
/// points a few ulps away from a kink never displace it.
fn pick(anchor: Point, mut candidates: Vec<Point>, merge_radius: f64, tol: f64) -> Point {
    candidates.push(anchor.clone());
    let best = candidates
        .iter()
        .min_by(|a, b| a.f.total_cmp(&b.f))
        .expect("at least the anchor")
        .clone();
    if anchor.f <= best.f + ROUNDOFF * best.f.abs().max(1.0) {
        return anchor;
    }
    let nearest = candidates
        .iter()
        .filter(|c| c.f <= best.f + tol)
        .min_by(|a, b| dist2(&a.x, &anchor.x).total_cmp(&dist2(&b.x, &anchor.x)))
        .expect("best is a tie of itself")
        .clone();
    if dist2(&nearest.x, &best.x) <= merge_radius {
        best
    } else {
        nearest
    }
}

/// Dense scan plus golden-section polish of the lowest discrete local
/// minima. Returns the polished candidates and the scan spacing.
fn search_1d<F: Fn(&[f64]) -> f64>(
    ev: &Evaluator<'_, F>,
    region: Region<'_>,
    opts: &MinimizeOptions,
) -> Result<(Vec<Point>, f64)> {
    let (a, b) = region.interval();
    let n = 4 * opts.coarse_points_per_axis;
    let h = (b - a) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { b } else { a + h * i as f64 })
        .collect();
    let mut fs = Vec::with_capacity(n);
    for &x in &xs {
        fs.push(ev.eval(&[x])?);
    }
    let mut minima: Vec<usize> = (0..n)
        .filter(|&k| (k == 0 || fs[k] <= fs[k - 1]) && (k + 1 == n || fs[k] <= fs[k + 1]))
        .collect();
    minima.sort_by(|&i, &j| fs[i].total_cmp(&fs[j]));
    minima.truncate(POLISH_STARTS);

    let mut out = Vec::with_capacity(2 * minima.len());
    for k in minima {
        out.push(Point { x: vec![xs[k]], f: fs[k] });
        let lo = if k == 0 { xs[0] } else { xs[k - 1] };
        let hi = if k + 1 == n { xs[n - 1] } else { xs[k + 1] };
        out.push(golden(ev, lo, hi)?);
    }
    Ok((out, 1.5 * h))
}

/// Golden-section search on `[lo, hi]`; the bracket ends are candidates
/// too, so boundary minimizers are returned exactly.
fn golden<F: Fn(&[f64]) -> f64>(ev: &Evaluator<'_, F>, mut lo: f64, mut hi: f64) -> Result<Point> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (a0, b0) = (lo, hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = ev.eval(&[x1])?;
    let mut f2 = ev.eval(&[x2])?;
    while hi - lo > GOLDEN_WIDTH * lo.abs().max(hi.abs()).max(1.0) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = ev.eval(&[x1])?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = ev.eval(&[x2])?;
        }
    }
    let mut best = if f1 <= f2 { Point { x: vec![x1], f: f1 } } else { Point { x: vec![x2], f: f2 } };
    for end in [a0, b0] {
        if (end - best.x[0]).abs() <= 4.0 * GOLDEN_WIDTH * end.abs().max(1.0) {
            let fe = ev.eval(&[end])?;
            if fe <= best.f {
                best = Point { x: vec![end], f: fe };
            }
        }
    }
    Ok(best)
}

/// Grid (restricted to the region) + boundary samples + quasi-random
/// interior points, then compass search from the best few.
fn search_nd<F: Fn(&[f64]) -> f64>(
    ev: &Evaluator<'_, F>,
    region: Region<'_>,
    opts: &MinimizeOptions,
) -> Result<(Vec<Point>, f64)> {
    let dim = region.dim();
    let mut per_axis = opts.coarse_points_per_axis;
    while per_axis > 3 && per_axis.saturating_pow(dim as u32) > MAX_GRID_POINTS {
        per_axis /= 2;
    }
    let mut samples: Vec<State> = Vec::new();
    match region {
        Region::Ball { center, radius, norm } => {
            let bbox = DomainBox {
                lower: center.iter().map(|c| c - radius).collect(),
                upper: center.iter().map(|c| c + radius).collect(),
            };
            for x in bbox.grid(per_axis) {
                if norm.norm(&crate::linalg::sub(&x, center)) <= radius {
                    samples.push(x);
                }
            }
            let boundary = (8 * per_axis).max(2 * dim);
            for d in sphere_directions(dim, boundary) {
                let s = radius / norm.norm(&d);
                samples.push(center.iter().zip(&d).map(|(c, v)| c + s * v).collect());
            }
            for k in 0..per_axis as u64 {
                let u = halton(opts.seed + k + 1, dim);
                let mut x: State = center.iter().zip(&u).map(|(c, v)| c + radius * (2.0 * v - 1.0)).collect();
                region.project(&mut x);
                samples.push(x);
            }
        }
        Region::Box(b) => {
            samples.extend(b.grid(per_axis));
            for k in 0..per_axis as u64 {
                let u = halton(opts.seed + k + 1, dim);
                samples.push(
                    (0..dim)
                        .map(|i| b.lower[i] + (b.upper[i] - b.lower[i]) * u[i])
                        .collect(),
                );
            }
        }
    }
    let mut pts = Vec::with_capacity(samples.len());
    for x in samples {
        pts.push(ev.point(x)?);
    }
    pts.sort_by(|a, b| a.f.total_cmp(&b.f));

    let spacing = region.scale() / (per_axis - 1) as f64;
    // Distinct starts: skip stencil points adjacent to an already chosen one.
    let mut starts: Vec<Point> = Vec::new();
    for p in pts {
        if starts.len() == POLISH_STARTS {
            break;
        }
        if starts.iter().all(|s| dist2(&s.x, &p.x) > 1.5 * spacing) {
            starts.push(p);
        }
    }
    let mut out = Vec::with_capacity(2 * starts.len());
    for s in starts {
        let polished = compass(ev, s.clone(), region, spacing, opts)?;
        out.push(s);
        out.push(polished);
    }
    Ok((out, 1.5 * spacing))
}

fn compass_directions(dim: usize) -> Vec<State> {
    let mut dirs = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            dirs.push(e);
        }
    }
    if dim <= 4 {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..dim {
            for j in i + 1..dim {
                for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut e = vec![0.0; dim];
                    e[i] = si * r;
                    e[j] = sj * r;
                    dirs.push(e);
                }
            }
        }
    }
    dirs
}

fn compass<F: Fn(&[f64]) -> f64>(
    ev: &Evaluator<'_, F>,
    start: Point,
    region: Region<'_>,
    initial_step: f64,
    opts: &MinimizeOptions,
) -> Result<Point> {
    let dirs = compass_directions(start.x.len());
    let mut cur = start;
    let mut step = initial_step;
    for _ in 0..opts.refine_iterations {
        if step < opts.tolerance {
            break;
        }
        let mut improved = None;
        for d in &dirs {
            let mut trial: State = cur.x.iter().zip(d).map(|(x, v)| x + step * v).collect();
            region.project(&mut trial);
            let f = ev.eval(&trial)?;
            if f < cur.f && improved.as_ref().map_or(true, |p: &Point| f < p.f) {
                improved = Some(Point { x: trial, f });
            }
        }
        match improved {
            Some(p) => cur = p,
            None => step *= opts.step_shrink,
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example2_reference, make_example2, Dissipation};

    fn opts() -> MinimizeOptions {
        MinimizeOptions::default()
    }

    fn example2_functional(t: f64, x0: f64) -> impl Fn(&[f64]) -> f64 {
        let m = make_example2();
        let psi = Dissipation::abs();
        move |x: &[f64]| m.energy(t, x) + psi.psi(&[x[0] - x0])
    }

    #[test]
    fn quadratic_in_ball_stays_at_center() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let x = minimize_in_ball(f, &[0.0, 0.0], 1.0, &NeighborhoodNorm::L2, &opts()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn example2_zero_is_eps_stable_before_escape() {
        let x = minimize_in_ball(example2_functional(0.5, 0.0), &[0.0], 0.5, &NeighborhoodNorm::L2, &opts()).unwrap();
        assert_eq!(x, vec![0.0]);
    }

    #[test]
    fn example2_ball_search_finds_branch() {
        // The unconstrained branch point y(1.5) ~ 1.565 lies outside
        // [0.4, 1.4], so the minimizer is the right end of the ball.
        let f = example2_functional(1.5, 0.9);
        let x = minimize_in_ball(&f, &[0.9], 0.5, &NeighborhoodNorm::L2, &opts()).unwrap();
        // Oracle: dense scan of [0.4, 1.4].
        let n = 1_000_000;
        let (mut bx, mut bf) = (0.0, f64::INFINITY);
        for i in 0..=n {
            let z = 0.4 + i as f64 / n as f64;
            let v = f(&[z]);
            if v < bf {
                bf = v;
                bx = z;
            }
        }
        assert!((x[0] - bx).abs() < 2e-6, "{} vs {bx}", x[0]);
        assert!(f(&x) <= bf + 1e-12);
        assert!(example2_reference(1.5) > 1.4);
        assert!((x[0] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn global_quadratic() {
        let d = DomainBox::cube(1, -1.0, 1.0);
        let x = minimize_global(|x: &[f64]| (x[0] - 0.3).powi(2), &d, &opts()).unwrap();
        assert!((x[0] - 0.3).abs() < 1e-8);
    }

    #[test]
    fn global_example2_around_energetic_jump() {
        let m = make_example2();
        let after = 1.0 / 6.0 + 0.01;
        let x = minimize_global(example2_functional(after, 0.0), &m.domain, &opts()).unwrap();
        assert!((x[0] - example2_reference(after)).abs() < 1e-7);
        let before = 1.0 / 6.0 - 0.01;
        let x = minimize_global(example2_functional(before, 0.0), &m.domain, &opts()).unwrap();
        assert!(x[0].abs() < 1e-9);
    }

    #[test]
    fn exact_tie_prefers_anchor() {
        let m = make_example2();
        let t = 1.0 / 6.0;
        let x = minimize_global_anchored(example2_functional(t, 0.0), &m.domain, &[0.0], &opts()).unwrap();
        assert_eq!(x, vec![0.0]);
    }

    #[test]
    fn descent_linear_objective_in_ball() {
        let g = [0.6, -0.8];
        let f = |x: &[f64]| g[0] * x[0] + g[1] * x[1];
        let region = Region::Ball {
            center: &[0.0, 0.0],
            radius: 1.0,
            norm: &NeighborhoodNorm::L2,
        };
        let o = MinimizeOptions {
            refine_iterations: 5000,
            tolerance: 1e-12,
            ..opts()
        };
        let x = descend_projected(f, &[0.0, 0.0], region, &o).unwrap();
        assert!((x[0] + 0.6).abs() < 1e-6 && (x[1] - 0.8).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn descent_from_minimizer_stays() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2);
        let d = DomainBox::cube(2, -5.0, 5.0);
        let x = descend_projected(f, &[1.0, -2.0], Region::Box(&d), &opts()).unwrap();
        assert_eq!(x, vec![1.0, -2.0]);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let d = DomainBox::cube(1, -1.0, 1.0);
        let err = minimize_global(|x: &[f64]| if x[0] > 0.5 { f64::NAN } else { 0.0 }, &d, &opts()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn bad_options_rejected() {
        let o = MinimizeOptions {
            coarse_points_per_axis: 2,
            ..opts()
        };
        assert!(o.validate().is_err());
    }
}
