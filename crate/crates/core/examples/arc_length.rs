//! Arc-length scheme with eps = tau: the clock freezes while the state
//! moves, so the jump at t = 1 is resolved as a path in state space.

use rateind::model::{make_example2, Dissipation, NeighborhoodNorm};
use rateind::schemes::{detect_jumps, solve_efendiev_mielke, SchemeConfig};

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let norm = NeighborhoodNorm::L2;
    for tau in [1e-2, 1e-3, 1e-4] {
        let run = solve_efendiev_mielke(&model, &Dissipation::abs(), &norm, &SchemeConfig::new(tau, tau, vec![0.0]))?;
        let frozen = run.times.windows(2).filter(|w| w[1] == w[0]).count();
        let jumps = detect_jumps(&run, &norm, 1e-3, 2.0);
        println!(
            "tau = {tau:e}: {} nodes, {frozen} frozen-clock steps, jump at t = {:.5}",
            run.len(),
            jumps.first().map_or(f64::NAN, |j| j.t)
        );
    }
    Ok(())
}
