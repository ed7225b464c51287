//! Energetic (global minimization) scheme: the state jumps to the upper
//! well as soon as it becomes the global minimizer, at t = 1/6.

use rateind::model::{make_example2, Dissipation};
use rateind::schemes::{solve_energetic, SchemeConfig};

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let run = solve_energetic(&model, &Dissipation::abs(), &SchemeConfig::new(0.0, 1e-3, vec![0.0]))?;
    let jump = run.states.iter().position(|x| x[0] > 0.5).expect("the run jumps");
    println!(
        "jump between t = {:.4} (x = {:.6}) and t = {:.4} (x = {:.6})",
        run.times[jump - 1],
        run.states[jump - 1][0],
        run.times[jump],
        run.states[jump][0]
    );
    println!("sqrt(5/3) = {:.6}", (5.0f64 / 3.0).sqrt());
    Ok(())
}
