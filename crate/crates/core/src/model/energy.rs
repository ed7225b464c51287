use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A time-dependent C^1 energy `E(t, x)` with its partial derivatives.
pub trait Energy: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, t: f64, x: &[f64]) -> f64;
    /// `d/dt E(t, x)`.
    fn dt(&self, t: f64, x: &[f64]) -> f64;
    /// `grad_x E(t, x)` written into `out`.
    fn grad_into(&self, t: f64, x: &[f64], out: &mut [f64]);

    fn grad(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.grad_into(t, x, &mut g);
        g
    }
}

/// Axis-aligned box `prod [lo_i, hi_i]` in state space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidModel("domain bounds have mismatched dimensions".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidModel(format!(
                "domain box needs lower < upper on every axis, got {lower:?} / {upper:?}"
            )));
        }
        Ok(DomainBox { lower, upper })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        DomainBox {
            lower: vec![lo; dim],
            upper: vec![hi; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    /// Uniform grid with `n` points per axis, in lexicographic order.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        let d = self.dim();
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|k| linspace(self.lower[k], self.upper[k], n))
            .collect();
        let total = n.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            out.push((0..d).map(|k| axes[k][idx[k]]).collect());
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// An energy together with the data every scheme and check needs: the
/// Gronwall constant `lambda` with `|d_t E| <= lambda E`, the horizon `T`
/// and the search box.
#[derive(Clone)]
pub struct EnergyModel {
    pub name: String,
    pub energy: Arc<dyn Energy>,
    pub lambda: f64,
    pub horizon: f64,
    pub domain: DomainBox,
}

impl fmt::Debug for EnergyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnergyModel")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("lambda", &self.lambda)
            .field("horizon", &self.horizon)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Safety factor applied to the sampled `max |d_t E| / E`.
pub const LAMBDA_SAFETY: f64 = 1.1;

/// Grid resolution used by the catalog constructors for `estimate_lambda`.
pub const LAMBDA_GRID: usize = 256;

impl EnergyModel {
    /// Builds a model and estimates `lambda` on a `grid_per_axis` grid.
    pub fn new(
        name: impl Into<String>,
        energy: Arc<dyn Energy>,
        horizon: f64,
        domain: DomainBox,
        grid_per_axis: usize,
    ) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidModel(format!("horizon must be positive, got {horizon}")));
        }
        if domain.dim() != energy.dim() {
            return Err(Error::InvalidModel(format!(
                "domain has dimension {} but the energy has dimension {}",
                domain.dim(),
                energy.dim()
            )));
        }
        let mut model = EnergyModel {
            name: name.into(),
            energy,
            lambda: 0.0,
            horizon,
            domain,
        };
        model.lambda = estimate_lambda(&model, grid_per_axis)?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.energy.dim()
    }

    #[inline]
    pub fn energy(&self, t: f64, x: &[f64]) -> f64 {
        self.energy.value(t, x)
    }

    #[inline]
    pub fn dt_energy(&self, t: f64, x: &[f64]) -> f64 {
        self.energy.dt(t, x)
    }

    #[inline]
    pub fn grad_energy(&self, t: f64, x: &[f64]) -> Vec<f64> {
        self.energy.grad(t, x)
    }
}

/// `max |d_t E| / E` over a `(time x domain)` grid with `grid_per_axis`
/// points per axis, inflated by [`LAMBDA_SAFETY`].
pub fn estimate_lambda(model: &EnergyModel, grid_per_axis: usize) -> Result<f64> {
    if grid_per_axis < 8 {
        return Err(Error::Argument(format!(
            "estimate_lambda needs at least 8 points per axis, got {grid_per_axis}"
        )));
    }
    // Keep the total grid size bounded in higher dimensions.
    let d = model.dim() as u32 + 1;
    let mut n = grid_per_axis;
    while n > 8 && (n as u64).pow(d) > 20_000_000 {
        n /= 2;
    }
    let times = linspace(0.0, model.horizon, n);
    let points = model.domain.grid(n);
    let mut ratio = 0.0_f64;
    for &t in &times {
        for x in &points {
            let e = model.energy(t, x);
            if !(e > 0.0) {
                return Err(Error::InvalidModel(format!(
                    "energy must be positive on the verification grid, got {e} at t={t}, x={x:?}"
                )));
            }
            ratio = ratio.max(model.dt_energy(t, x).abs() / e);
        }
    }
    Ok(LAMBDA_SAFETY * ratio)
}
