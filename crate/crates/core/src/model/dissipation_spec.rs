//! The dissipation potential `Psi`, its stable set `dPsi(0)` and the dual
//! gap `xi -> min_{z in dPsi(0)} ||xi + z||_*` that weights the viscous part
//! of the jump cost.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::norm::NeighborhoodNorm;
use crate::error::{Error, Result};
use crate::linalg::{dot, scale};
use crate::sampling::sphere_directions;

/// Which dual norm the closed-form box distance is measured in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DualKind {
    /// Dual of the Euclidean neighborhood norm.
    L2,
    /// Dual `l^q` of an `l^p` neighborhood norm.
    Lq(f64),
    /// Dual of the `l^inf` ball (not admissible as a neighborhood norm, but
    /// the closed form is still useful).
    L1,
}

impl DualKind {
    pub fn of(norm: &NeighborhoodNorm) -> Self {
        match norm {
            NeighborhoodNorm::L2 => DualKind::L2,
            NeighborhoodNorm::Lp { .. } => DualKind::Lq(norm.dual_exponent()),
        }
    }
}

/// Distance in the chosen dual norm from `xi` to the box `prod [-c_i, c_i]`,
/// which is `dPsi(0)` for `Psi(v) = sum c_i |v_i|`.
///
/// The box is symmetric, so this equals `min_z ||xi + z||_*` as well.
pub fn dual_gap_weighted_l1(xi: &[f64], weights: &[f64], dual: DualKind) -> f64 {
    let excess = xi
        .iter()
        .zip(weights)
        .map(|(x, c)| (x.abs() - c).max(0.0));
    match dual {
        DualKind::L2 => excess.map(|e| e * e).sum::<f64>().sqrt(),
        DualKind::L1 => excess.sum(),
        DualKind::Lq(q) => {
            let e: Vec<f64> = excess.collect();
            let m = e.iter().fold(0.0_f64, |m, x| m.max(*x));
            if m == 0.0 {
                0.0
            } else {
                m * e.iter().map(|x| (x / m).powf(q)).sum::<f64>().powf(1.0 / q)
            }
        }
    }
}

/// User-supplied dissipation potential. Must be convex, positively
/// 1-homogeneous and positive away from the origin; none of this is checked
/// here beyond the sampled property tests.
pub type PsiFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The dissipation functional `Psi`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dissipation {
    /// `Psi(v) = sum_i c_i |v_i|`, stable set the box `prod [-c_i, c_i]`.
    WeightedL1 { weights: Vec<f64> },
    /// `Psi(v) = rho ||v||_2`, stable set the Euclidean ball of radius `rho`.
    ScaledL2 { rho: f64 },
    /// Generic potential. Its dual gap is approximated numerically.
    #[serde(skip)]
    Custom { name: String, psi: PsiFn },
}

impl fmt::Debug for Dissipation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dissipation::WeightedL1 { weights } => {
                f.debug_struct("WeightedL1").field("weights", weights).finish()
            }
            Dissipation::ScaledL2 { rho } => f.debug_struct("ScaledL2").field("rho", rho).finish(),
            Dissipation::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

/// Directions sampled by the numeric dual gap before the ascent polish.
const CUSTOM_GAP_DIRECTIONS: usize = 720;

impl Dissipation {
    /// `Psi(v) = |v|` in one dimension.
    pub fn abs() -> Self {
        Dissipation::WeightedL1 { weights: vec![1.0] }
    }

    pub fn weighted_l1(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::Argument(format!(
                "weighted-l1 dissipation needs positive finite weights, got {weights:?}"
            )));
        }
        Ok(Dissipation::WeightedL1 { weights })
    }

    pub fn scaled_l2(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Argument(format!("scaled-l2 dissipation needs rho > 0, got {rho}")));
        }
        Ok(Dissipation::ScaledL2 { rho })
    }

    pub fn custom(name: impl Into<String>, psi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Dissipation::Custom {
            name: name.into(),
            psi: Arc::new(psi),
        }
    }

    /// Checks that the dissipation is usable in dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Dissipation::WeightedL1 { weights } if weights.len() != dim => Err(Error::Argument(format!(
                "weighted-l1 dissipation has {} weights but the state has dimension {dim}",
                weights.len()
            ))),
            _ => Ok(()),
        }
    }

    pub fn psi(&self, v: &[f64]) -> f64 {
        match self {
            Dissipation::WeightedL1 { weights } => {
                v.iter().zip(weights).map(|(x, c)| c * x.abs()).sum()
            }
            Dissipation::ScaledL2 { rho } => rho * crate::linalg::norm2(v),
            Dissipation::Custom { psi, .. } => psi(v),
        }
    }

    /// `min_{z in dPsi(0)} ||xi + z||_*`, i.e. the dual-norm distance from
    /// `-xi` to the stable set.
    ///
    /// Closed forms are used for weighted-l1 (any admissible norm) and for
    /// scaled-l2 paired with the Euclidean norm. All other pairings go
    /// through the support-function identity
    /// `dist_*(p, K) = max_{||v|| <= 1} <p, v> - Psi(v)`, whose concave
    /// maximization is done by direction sampling plus a projected ascent
    /// polish; the result is then approximate.
    pub fn dual_gap(&self, xi: &[f64], norm: &NeighborhoodNorm) -> f64 {
        match (self, norm) {
            (Dissipation::WeightedL1 { weights }, _) => {
                dual_gap_weighted_l1(xi, weights, DualKind::of(norm))
            }
            (Dissipation::ScaledL2 { rho }, NeighborhoodNorm::L2) => {
                (crate::linalg::norm2(xi) - rho).max(0.0)
            }
            _ => self.numeric_dual_gap(xi, norm),
        }
    }

    /// `xi in dPsi(0)`, i.e. `<xi, v> <= Psi(v)` for all `v`, up to `tol`.
    pub fn stable_contains(&self, xi: &[f64], tol: f64) -> bool {
        self.stability_margin(xi) <= tol
    }

    /// `max_{||v||_2 = 1} <xi, v> - Psi(v)`, exact for the built-in
    /// potentials: negative inside the stable set, zero on its boundary,
    /// positive outside.
    ///
    /// For weighted-l1 the returned quantity is the componentwise
    /// membership residual `max_i |xi_i| - c_i`, which has the same sign.
    pub fn stability_margin(&self, xi: &[f64]) -> f64 {
        match self {
            Dissipation::WeightedL1 { weights } => xi
                .iter()
                .zip(weights)
                .map(|(x, c)| x.abs() - c)
                .fold(f64::NEG_INFINITY, f64::max),
            Dissipation::ScaledL2 { rho } => crate::linalg::norm2(xi) - rho,
            Dissipation::Custom { .. } => {
                let dim = xi.len();
                sphere_directions(dim, CUSTOM_GAP_DIRECTIONS)
                    .iter()
                    .map(|v| dot(xi, v) - self.psi(v))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    fn numeric_dual_gap(&self, xi: &[f64], norm: &NeighborhoodNorm) -> f64 {
        let dim = xi.len();
        let p: Vec<f64> = xi.iter().map(|x| -x).collect();
        let phi = |v: &[f64]| dot(&p, v) - self.psi(v);
        // Unit directions in the neighborhood norm.
        let mut best = 0.0_f64;
        let mut best_v = vec![0.0; dim];
        for d in sphere_directions(dim, CUSTOM_GAP_DIRECTIONS) {
            let n = norm.norm(&d);
            let v = scale(&d, 1.0 / n);
            let val = phi(&v);
            if val > best {
                best = val;
                best_v = v;
            }
        }
        if best <= 0.0 {
            return 0.0;
        }
        // Projected compass ascent on the unit ball; phi is concave, so any
        // stationary point is the global maximum.
        let mut step = 0.05;
        let mut v = best_v;
        while step > 1e-12 {
            let mut improved = false;
            for k in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut w = v.clone();
                    w[k] += sign * step;
                    let n = norm.norm(&w);
                    if n > 1.0 {
                        w = scale(&w, 1.0 / n);
                    }
                    let val = phi(&w);
                    if val > best {
                        best = val;
                        v = w;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_l1_closed_form_examples() {
        assert_eq!(dual_gap_weighted_l1(&[0.5, -0.2], &[1.0, 0.3], DualKind::L2), 0.0);
        assert_eq!(dual_gap_weighted_l1(&[1.5], &[1.0], DualKind::L2), 0.5);
        assert_eq!(dual_gap_weighted_l1(&[-1.5], &[1.0], DualKind::L2), 0.5);
        let g = dual_gap_weighted_l1(&[2.0, -3.0], &[1.0, 1.0], DualKind::L1);
        assert!((g - 3.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_l1_grid_oracle_2d() {
        // Brute-force min over a 2001^2 grid of the box of ||xi + z||_2.
        let weights = [0.7, 0.4];
        for xi in [[1.3, -0.9], [0.2, 1.1], [-2.0, 0.1]] {
            let n = 2001;
            let mut best = f64::INFINITY;
            for i in 0..n {
                let z0 = -weights[0] + 2.0 * weights[0] * i as f64 / (n - 1) as f64;
                for j in 0..n {
                    let z1 = -weights[1] + 2.0 * weights[1] * j as f64 / (n - 1) as f64;
                    let d = ((xi[0] + z0).powi(2) + (xi[1] + z1).powi(2)).sqrt();
                    best = best.min(d);
                }
            }
            let gap = dual_gap_weighted_l1(&xi, &weights, DualKind::L2);
            assert!((gap - best).abs() < 2e-3, "xi={xi:?}: {gap} vs {best}");
        }
    }

    #[test]
    fn custom_route_matches_closed_forms() {
        let norm = NeighborhoodNorm::L2;
        let l1 = Dissipation::weighted_l1(vec![0.5, 1.0]).unwrap();
        let custom = Dissipation::custom("wl1", |v: &[f64]| 0.5 * v[0].abs() + v[1].abs());
        for xi in [[0.2, 0.3], [1.2, -0.4], [-0.9, 2.5]] {
            let exact = l1.dual_gap(&xi, &norm);
            let approx = custom.dual_gap(&xi, &norm);
            assert!((exact - approx).abs() < 1e-7, "{xi:?}: {exact} vs {approx}");
        }
        let l2 = Dissipation::scaled_l2(0.8).unwrap();
        let custom = Dissipation::custom("l2", |v: &[f64]| 0.8 * crate::linalg::norm2(v));
        for xi in [[0.1, 0.3], [1.2, -0.4]] {
            assert!((l2.dual_gap(&xi, &norm) - custom.dual_gap(&xi, &norm)).abs() < 1e-7);
        }
    }

    #[test]
    fn scaled_l2_with_lp_norm_uses_numeric_route() {
        // With p = 2 the l^p route must reproduce the Euclidean closed form.
        let d = Dissipation::scaled_l2(0.5).unwrap();
        let lp2 = NeighborhoodNorm::Lp { p: 2.0 };
        let xi = [1.0, -1.0];
        let closed = (2f64.sqrt() - 0.5).max(0.0);
        assert!((d.dual_gap(&xi, &lp2) - closed).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Dissipation::weighted_l1(vec![1.0, 0.0]).is_err());
        assert!(Dissipation::scaled_l2(-1.0).is_err());
        assert!(Dissipation::abs().check_dim(2).is_err());
    }
}
