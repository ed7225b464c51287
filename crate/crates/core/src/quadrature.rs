//! One-dimensional quadrature rules.

use crate::error::{Error, Result};

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]` to
/// absolute tolerance `tol`. `a > b` is allowed and flips the sign.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate_adaptive(f, b, a, tol).map(|v| -v);
    }
    const MAX_INTERVALS: usize = 20_000;
    // A single rule can miss a narrow bump entirely (K and G then agree by
    // accident), so start from a uniform partition.
    const INITIAL_PANELS: usize = 32;
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut intervals = Vec::with_capacity(INITIAL_PANELS);
    for k in 0..INITIAL_PANELS {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == INITIAL_PANELS { b } else { a + (k + 1) as f64 * width };
        let (v, e) = gk15(&mut f, lo, hi);
        intervals.push((lo, hi, v, e));
    }
    let mut total: f64 = intervals.iter().map(|i| i.2).sum();
    let mut err: f64 = intervals.iter().map(|i| i.3).sum();
    while err > tol {
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error estimate {err:e}"
            )));
        }
        let (k, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v0, _) = intervals.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // Interval exhausted in floating point; accept what we have.
            break;
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - v0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        // Re-summed rather than updated: subtracting large early estimates
        // leaves round-off that can hide the true remaining error.
        err = intervals.iter().map(|i| i.3).sum();
    }
    if !total.is_finite() {
        return Err(Error::Numeric(format!("quadrature on [{a}, {b}] produced {total}")));
    }
    // Re-sum to shed the accumulated update error.
    Ok(intervals.iter().map(|i| i.2).sum())
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss-Legendre rule on `[a, b]` (exact for degree 9).
pub fn gauss_legendre5<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS)
        .map(|(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

/// Composite trapezoid rule with `m` panels.
pub fn trapezoid<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, m: usize) -> f64 {
    let m = m.max(1);
    let h = (b - a) / m as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for k in 1..m {
        s += f(a + h * k as f64);
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_integrates_kink() {
        let v = integrate_adaptive(|x: f64| (x - 0.3).abs(), -1.0, 1.0, 1e-13).unwrap();
        assert!((v - (0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7)).abs() < 1e-12);
        let w = integrate_adaptive(|x: f64| (x - 0.3).abs(), 1.0, -1.0, 1e-13).unwrap();
        assert_eq!(v, -w);
    }

    #[test]
    fn gauss_legendre_exact_for_degree_nine() {
        let v = gauss_legendre5(|x: f64| x.powi(9) + x.powi(8), 0.0, 2.0);
        let exact = 2f64.powi(10) / 10.0 + 2f64.powi(9) / 9.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn trapezoid_linear_is_exact() {
        assert!((trapezoid(|x| 3.0 * x + 1.0, 0.0, 2.0, 3) - 8.0).abs() < 1e-14);
    }
}
