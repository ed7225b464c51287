//! Vanishing-viscosity scheme. With a strong quadratic penalty (e >= 2)
//! the state never leaves 0, even after 0 has stopped being a local
//! minimizer of E(t,.) + |.| at t = 1.

use rateind::model::{make_example2, Dissipation, NeighborhoodNorm};
use rateind::schemes::{solve_viscous, SchemeConfig};
use rateind::verify::check_weak_local_stability;

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let psi = Dissipation::abs();
    for e in [0.5, 2.0, 10.0] {
        let cfg = SchemeConfig::new(0.0, 1e-3, vec![0.0]).with_viscosity(e);
        let run = solve_viscous(&model, &psi, &NeighborhoodNorm::L2, &cfg)?;
        let max = run.states.iter().map(|x| x[0].abs()).fold(0.0, f64::max);
        println!("e = {e:>4}: max |x| = {max:.3e}, x(2) = {:.6}", run.states.last().unwrap()[0]);
    }
    // Only the first-order condition survives: -dE/dx(t, 0) = 1 lies on the
    // boundary of the stable set [-1, 1].
    let r = check_weak_local_stability(&model, &psi, 1.5, &[0.0], 8)?;
    println!("weak-local residual of 0 at t = 1.5: {:+.3e}", r.effective_residual());
    Ok(())
}
