use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lerp, State};

/// Which incremental construction produced a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Minimization of `E + Psi` over the closed epsilon-ball.
    EpsNeighborhood,
    /// Global minimization of `E + Psi` over the domain box.
    Energetic,
    /// Global minimization of `E + Psi + e ||.||^2`.
    Viscous,
    /// Arc-length clock: `t_j = t_{j-1} + tau - ||x_j - x_{j-1}||`.
    EfendievMielke,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::EpsNeighborhood,
        SchemeKind::Energetic,
        SchemeKind::Viscous,
        SchemeKind::EfendievMielke,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SchemeKind::EpsNeighborhood => "eps-neighborhood",
            SchemeKind::Energetic => "energetic",
            SchemeKind::Viscous => "viscous",
            SchemeKind::EfendievMielke => "efendiev-mielke",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag() == tag)
            .ok_or_else(|| Error::Config(format!("unknown scheme {tag:?}")))
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Output of an incremental scheme: one state per node of the time
/// partition. The interpolant is piecewise constant, `x(t) = x_{i-1}` on
/// `[t_{i-1}, t_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub scheme: SchemeKind,
    /// Neighborhood radius, 0 when the scheme has none.
    pub eps: f64,
    pub tau: f64,
    /// Viscosity ratio `e = eps / tau` for the viscous scheme, 0 otherwise.
    #[serde(default)]
    pub viscosity: f64,
}

/// Slack used when locating a time among partition nodes.
fn time_slack(t: f64) -> f64 {
    1e-12 * t.abs().max(1.0)
}

impl DiscreteTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }

    /// Index of the node whose state the interpolant takes at `t`: the last
    /// node with `t_j <= t`. Times before the first node map to node 0.
    pub fn index_at(&self, t: f64) -> usize {
        let slack = time_slack(t);
        let k = self.times.partition_point(|&tj| tj <= t + slack);
        k.saturating_sub(1)
    }

    pub fn value_at(&self, t: f64) -> &[f64] {
        &self.states[self.index_at(t)]
    }

    /// Checks lengths, time monotonicity and (for the epsilon scheme) step
    /// feasibility in the supplied norm.
    pub fn validate(&self, norm: Option<&crate::model::NeighborhoodNorm>) -> Result<()> {
        if self.times.len() != self.states.len() || self.times.is_empty() {
            return Err(Error::Format(format!(
                "trajectory has {} times and {} states",
                self.times.len(),
                self.states.len()
            )));
        }
        let dim = self.dim();
        if self.states.iter().any(|s| s.len() != dim) {
            return Err(Error::Format("trajectory states have inconsistent dimensions".into()));
        }
        let strictly = self.scheme != SchemeKind::EfendievMielke;
        for w in self.times.windows(2) {
            if w[1] < w[0] || (strictly && w[1] == w[0]) {
                return Err(Error::Format(format!("times not increasing at {} -> {}", w[0], w[1])));
            }
        }
        if let (SchemeKind::EpsNeighborhood, Some(norm)) = (self.scheme, norm) {
            for (i, w) in self.states.windows(2).enumerate() {
                let step = norm.norm(&crate::linalg::sub(&w[1], &w[0]));
                if step > self.eps + 1e-12 {
                    return Err(Error::Format(format!(
                        "step {} has length {step} > eps = {}",
                        i + 1,
                        self.eps
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A path `gamma(s_j)`, `s_j = j / K`, interpolated linearly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionPath {
    pub knots: Vec<State>,
    /// Quadrature value of the jump-cost integrand along the path.
    pub cost: f64,
}

impl TransitionPath {
    /// The straight segment from `a` to `b` with `interior` interior knots.
    pub fn straight(a: &[f64], b: &[f64], interior: usize) -> Self {
        let k = interior + 1;
        let mut knots: Vec<State> = (0..=k).map(|j| lerp(a, b, j as f64 / k as f64)).collect();
        knots[k] = b.to_vec();
        TransitionPath { knots, cost: f64::NAN }
    }

    pub fn segments(&self) -> usize {
        self.knots.len().saturating_sub(1)
    }

    pub fn start(&self) -> &[f64] {
        &self.knots[0]
    }

    pub fn end(&self) -> &[f64] {
        self.knots.last().expect("path has knots")
    }
}

/// A jump of a BV trajectory: `u(t-)`, `u(t)`, `u(t+)` and, when computed,
/// the optimal transitions `u(t-) -> u(t)` and `u(t) -> u(t+)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub t: f64,
    pub left: State,
    pub at: State,
    pub right: State,
    #[serde(default)]
    pub transition_left: Option<TransitionPath>,
    #[serde(default)]
    pub transition_right: Option<TransitionPath>,
}

/// Sampled BV function with explicit jumps. Between samples that are not
/// separated by a jump the function is interpolated linearly, using the
/// one-sided limits at jump times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BVTrajectory {
    pub sample_times: Vec<f64>,
    pub values: Vec<State>,
    pub jumps: Vec<JumpRecord>,
    /// Total Psi-variation recorded by the producer (an upper bound for the
    /// variation of the sampled function).
    pub var_bound: f64,
}

impl BVTrajectory {
    /// Builds a trajectory, inserting jump times into the samples (with the
    /// value `u(t)` of the record) and checking the invariants.
    pub fn new(samples: Vec<(f64, State)>, mut jumps: Vec<JumpRecord>, var_bound: f64) -> Result<Self> {
        let mut samples = samples;
        jumps.sort_by(|a, b| a.t.total_cmp(&b.t));
        for j in &jumps {
            samples.retain(|(t, _)| (t - j.t).abs() > time_slack(j.t));
            samples.push((j.t, j.at.clone()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.is_empty() {
            return Err(Error::Argument("BV trajectory needs at least one sample".into()));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Argument(format!("duplicate sample time {}", w[0].0)));
            }
        }
        let (sample_times, values) = samples.into_iter().unzip();
        let traj = BVTrajectory {
            sample_times,
            values,
            jumps,
            var_bound,
        };
        Ok(traj)
    }

    /// A trajectory without jumps.
    pub fn continuous(samples: Vec<(f64, State)>, var_bound: f64) -> Result<Self> {
        Self::new(samples, Vec::new(), var_bound)
    }

    pub fn start(&self) -> f64 {
        self.sample_times[0]
    }

    pub fn end(&self) -> f64 {
        *self.sample_times.last().expect("non-empty")
    }

    pub fn jump_at(&self, t: f64) -> Option<&JumpRecord> {
        self.jumps.iter().find(|j| (j.t - t).abs() <= time_slack(t))
    }

    /// Whether a jump occurs in `[t - radius, t + radius]`.
    pub fn near_jump(&self, t: f64, radius: f64) -> bool {
        self.jumps.iter().any(|j| (j.t - t).abs() <= radius)
    }

    fn sample_left(&self, k: usize) -> &[f64] {
        match self.jump_at(self.sample_times[k]) {
            Some(j) => &j.left,
            None => &self.values[k],
        }
    }

    fn sample_right(&self, k: usize) -> &[f64] {
        match self.jump_at(self.sample_times[k]) {
            Some(j) => &j.right,
            None => &self.values[k],
        }
    }

    /// `u(t)`.
    pub fn value_at(&self, t: f64) -> State {
        if let Some(j) = self.jump_at(t) {
            return j.at.clone();
        }
        let n = self.sample_times.len();
        let slack = time_slack(t);
        if t <= self.sample_times[0] + slack {
            return self.values[0].clone();
        }
        if t >= self.sample_times[n - 1] - slack {
            return self.values[n - 1].clone();
        }
        let k = self.sample_times.partition_point(|&s| s <= t) - 1;
        let (a, b) = (self.sample_times[k], self.sample_times[k + 1]);
        if (t - a).abs() <= slack {
            return self.values[k].clone();
        }
        if (t - b).abs() <= slack {
            return self.values[k + 1].clone();
        }
        lerp(self.sample_right(k), self.sample_left(k + 1), (t - a) / (b - a))
    }

    /// `u(t-)`.
    pub fn left_limit(&self, t: f64) -> State {
        match self.jump_at(t) {
            Some(j) => j.left.clone(),
            None => self.value_at(t),
        }
    }

    /// `u(t+)`.
    pub fn right_limit(&self, t: f64) -> State {
        match self.jump_at(t) {
            Some(j) => j.right.clone(),
            None => self.value_at(t),
        }
    }

    /// Evaluation nodes for integrals over `[s, t]`: `s`, every sample
    /// strictly inside, and `t`. The function is affine between
    /// consecutive nodes once one-sided limits are used at the ends.
    pub fn nodes_in(&self, s: f64, t: f64) -> Vec<f64> {
        let mut nodes = vec![s];
        for &r in &self.sample_times {
            if r > s + time_slack(s) && r < t - time_slack(t) {
                nodes.push(r);
            }
        }
        if t > s {
            nodes.push(t);
        }
        nodes
    }
}
