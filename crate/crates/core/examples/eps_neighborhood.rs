//! Epsilon-neighborhood scheme on the sextic benchmark: the state stays at
//! 0 until just before t = 1, climbs in steps of length eps and then
//! follows the upper branch.

use rateind::model::{example2_reference, make_example2, Dissipation, NeighborhoodNorm};
use rateind::schemes::{solve_eps_neighborhood, SchemeConfig};

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let cfg = SchemeConfig::new(0.1, 1e-3, vec![0.0]);
    let run = solve_eps_neighborhood(&model, &Dissipation::abs(), &NeighborhoodNorm::L2, &cfg)?;
    let first_move = run.states.iter().position(|x| x[0] != 0.0).expect("the state leaves 0");
    println!("left 0 at t = {:.4}", run.times[first_move]);
    for i in first_move..first_move + 18 {
        println!("  t = {:.4}  x = {:.6}", run.times[i], run.states[i][0]);
    }
    let end = run.states.last().unwrap()[0];
    println!("x(2) = {end:.6}, y(2) = {:.6}", example2_reference(2.0));
    Ok(())
}
