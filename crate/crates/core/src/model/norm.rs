use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The norm `||.||` defining the neighborhood of the epsilon scheme and the
/// viscous part of the jump cost, together with its dual `||.||_*`.
///
/// Only norms whose unit ball has a C^1 boundary are admitted: the
/// Euclidean norm and `l^p` with `1 < p < inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NeighborhoodNorm {
    L2,
    Lp { p: f64 },
}

impl Default for NeighborhoodNorm {
    fn default() -> Self {
        NeighborhoodNorm::L2
    }
}

impl NeighborhoodNorm {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Argument(format!(
                "l^p neighborhood norm needs 1 < p < inf, got {p}"
            )));
        }
        Ok(NeighborhoodNorm::Lp { p })
    }

    /// Exponent of the primal norm.
    pub fn exponent(&self) -> f64 {
        match self {
            NeighborhoodNorm::L2 => 2.0,
            NeighborhoodNorm::Lp { p } => *p,
        }
    }

    /// Exponent `q` of the dual norm, `1/p + 1/q = 1`.
    pub fn dual_exponent(&self) -> f64 {
        let p = self.exponent();
        p / (p - 1.0)
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        match self {
            NeighborhoodNorm::L2 => crate::linalg::norm2(v),
            NeighborhoodNorm::Lp { p } => lp_norm(v, *p),
        }
    }

    pub fn dual_norm(&self, xi: &[f64]) -> f64 {
        match self {
            NeighborhoodNorm::L2 => crate::linalg::norm2(xi),
            NeighborhoodNorm::Lp { .. } => lp_norm(xi, self.dual_exponent()),
        }
    }

    /// A unit vector `v` with `<xi, v> = ||xi||_*` (the dual-norm maximizer).
    pub fn dual_maximizer(&self, xi: &[f64]) -> Vec<f64> {
        let q = self.dual_exponent();
        let raw: Vec<f64> = xi
            .iter()
            .map(|&x| x.signum() * x.abs().powf(q - 1.0))
            .collect();
        let n = self.norm(&raw);
        if n == 0.0 {
            return vec![0.0; xi.len()];
        }
        raw.iter().map(|x| x / n).collect()
    }
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    let m = crate::linalg::max_abs(v);
    if m == 0.0 {
        return 0.0;
    }
    // Scaled to avoid overflow for large p.
    m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}
