//! Deterministic low-discrepancy point sets used by the minimizers and the
//! stability verifiers.

use std::f64::consts::PI;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `index` in `base` (van der Corput sequence).
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % b) as f64;
        index /= b;
        f *= inv;
    }
    r
}

/// The `index`-th point of the Halton sequence in `[0,1)^dim`.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "halton: dimension {dim} unsupported");
    (0..dim).map(|k| radical_inverse(index, PRIMES[k])).collect()
}

/// Unit directions (Euclidean) covering the sphere: the `±` coordinate
/// axes first, then `count` quasi-random directions.
///
/// In `d = 1` only `±1` exist; in `d = 2` the quasi-random part is a
/// uniform angular grid. Higher dimensions map Halton points through the
/// inverse normal CDF approximation and normalize.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * dim + count);
    for k in 0..dim {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[k] = sign;
            dirs.push(v);
        }
    }
    match dim {
        0 | 1 => {}
        2 => {
            for j in 0..count {
                let a = 2.0 * PI * (j as f64 + 0.5) / count as f64;
                dirs.push(vec![a.cos(), a.sin()]);
            }
        }
        _ => {
            for j in 0..count {
                let u = halton(j as u64 + 1, dim);
                let v: Vec<f64> = u.iter().map(|&p| probit(p.clamp(1e-9, 1.0 - 1e-9))).collect();
                let n = crate::linalg::norm2(&v);
                if n > 1e-12 {
                    dirs.push(v.iter().map(|x| x / n).collect());
                }
            }
        }
    }
    dirs
}

/// Rational approximation of the standard normal quantile (Acklam).
fn probit(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let plow = 0.02425;
    if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -probit(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn directions_are_unit_and_include_axes() {
        for dim in 1..=4 {
            let dirs = sphere_directions(dim, 50);
            assert!(dirs.len() >= 2 * dim);
            for v in &dirs {
                assert!((crate::linalg::norm2(v) - 1.0).abs() < 1e-12);
            }
            assert_eq!(dirs[0][0], 1.0);
            assert_eq!(dirs[1][0], -1.0);
        }
    }
}
