//! Small dense-vector helpers. States live in `Vec<f64>`; the dimensions
//! handled here are tiny, so nothing fancier is needed.

pub type State = Vec<f64>;

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> State {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> State {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> State {
    a.iter().map(|x| x * s).collect()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `a + s * (b - a)`.
#[inline]
pub fn lerp(a: &[f64], b: &[f64], s: f64) -> State {
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

/// Euclidean distance between two states.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
