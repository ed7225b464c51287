//! Two-level limit of the epsilon-neighborhood scheme on the sextic
//! benchmark: the limit stays at 0 until the local escape time and then
//! jumps onto the upper branch.

use rateind::model::{example2_reference, make_example2, Dissipation, NeighborhoodNorm, SchemeKind};
use rateind::schemes::{refine_limit, LimitOptions};

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
    let (bv, diag) = refine_limit(
        &model,
        &Dissipation::abs(),
        &NeighborhoodNorm::L2,
        SchemeKind::EpsNeighborhood,
        &[0.2, 0.1, 0.05],
        &[1e-2, 1e-3, 1e-4],
        &grid,
        &LimitOptions::with_x0(vec![0.0]),
    )?;
    println!("{}", diag.summary());
    for j in &bv.jumps {
        println!(
            "jump at t = {:.5}: {:.6} -> {:.6} (upper branch y(t) = {:.6})",
            j.t,
            j.left[0],
            j.right[0],
            example2_reference(j.t)
        );
    }
    println!("u(2) = {:.6}, y(2) = {:.6}", bv.value_at(2.0)[0], example2_reference(2.0));
    Ok(())
}
