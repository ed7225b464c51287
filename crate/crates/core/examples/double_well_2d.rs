//! Two-dimensional coupled double well with Psi = |v_1| + |v_2|: compares
//! the energetic and epsilon-neighborhood runs and checks the KKT identity.

use rateind::model::{make_double_well_2d, Dissipation, NeighborhoodNorm};
use rateind::schemes::{solve_energetic, solve_eps_neighborhood, SchemeConfig};
use rateind::verify::check_kkt_identity;

fn main() -> rateind::Result<()> {
    let model = make_double_well_2d();
    let psi = Dissipation::weighted_l1(vec![1.0, 1.0])?;
    let norm = NeighborhoodNorm::L2;
    let cfg = SchemeConfig::new(0.1, 1e-2, vec![-1.0, -1.0]);
    let eps = solve_eps_neighborhood(&model, &psi, &norm, &cfg)?;
    let glob = solve_energetic(&model, &psi, &cfg)?;
    for i in (0..eps.len()).step_by(20) {
        println!(
            "t = {:.2}  eps: ({:+.4}, {:+.4})  energetic: ({:+.4}, {:+.4})",
            eps.times[i], eps.states[i][0], eps.states[i][1], glob.states[i][0], glob.states[i][1]
        );
    }
    let kkt = check_kkt_identity(&model, &psi, &norm, &eps);
    println!("KKT residual over {} moving steps: {:.2e}", kkt.residuals.len(), kkt.max_residual);
    Ok(())
}
