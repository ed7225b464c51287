//! Where does x = 0 lose stability? Global stability fails at t = 1/6,
//! eps-stability near 1 - eps^2 + 0.3 eps^4. Weak local stability never
//! fails: -dE/dx(t, 0) = 1 sits on the boundary of the stable set for all t.

use rateind::minimize::MinimizeOptions;
use rateind::model::{make_example2, Dissipation, NeighborhoodNorm};
use rateind::verify::{check_eps_stability, check_global_stability, check_weak_local_stability};

fn first_failure(mut residual: impl FnMut(f64) -> rateind::Result<f64>) -> rateind::Result<f64> {
    let (mut lo, mut hi) = (0.0, 2.0);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if residual(mid)? > 1e-9 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let (psi, norm) = (Dissipation::abs(), NeighborhoodNorm::L2);
    let opts = MinimizeOptions::default();
    let global = first_failure(|t| Ok(check_global_stability(&model, &psi, t, &[0.0], &opts)?.residual))?;
    println!("global stability of 0 fails from t = {global:.6}");
    for eps in [0.2, 0.1, 0.05] {
        let t = first_failure(|t| Ok(check_eps_stability(&model, &psi, &norm, t, &[0.0], eps, 400)?.residual))?;
        println!("eps = {eps}: eps-stability fails from t = {t:.6} (1 - eps^2 + 0.3 eps^4 = {:.6})", 1.0 - eps * eps + 0.3 * eps.powi(4));
    }
    for t in [0.5, 1.0, 1.5] {
        let r = check_weak_local_stability(&model, &psi, t, &[0.0], 8)?;
        println!("weak-local residual of 0 at t = {t}: {:+.3e}", r.effective_residual());
    }
    Ok(())
}
