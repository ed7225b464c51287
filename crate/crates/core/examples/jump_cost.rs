//! The jump cost Delta_new: Psi plus the viscous penalty for crossing
//! regions where -dE/dx leaves the stable set.

use rateind::dissipation::{delta_new, optimize_path, DEFAULT_KNOTS};
use rateind::model::{make_example2, Dissipation, NeighborhoodNorm};

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let (psi, norm) = (Dissipation::abs(), NeighborhoodNorm::L2);
    let y = (5.0f64 / 3.0).sqrt();
    let (quad, _) = delta_new(&model, &psi, &norm, 1.0 / 6.0, &[0.0], &[y], DEFAULT_KNOTS)?;
    let (path, best) = optimize_path(&model, &psi, &norm, 1.0 / 6.0, &[0.0], &[y], DEFAULT_KNOTS)?;
    println!("t = 1/6, 0 -> sqrt(5/3): Psi = {y:.7}, Delta_new = {quad:.7} (path optimizer {path:.7})");
    println!("excess over Psi: {:.7}", quad - y);
    let monotone = best.knots.windows(2).all(|w| w[1][0] >= w[0][0] - 1e-12);
    println!("optimized path: {} knots, monotone: {monotone}", best.knots.len());

    let target = 2.0 * 5.0f64.sqrt() / 3.0;
    let (at_one, _) = delta_new(&model, &psi, &norm, 1.0, &[0.0], &[target], DEFAULT_KNOTS)?;
    let drop = model.energy(1.0, &[0.0]) - model.energy(1.0, &[target]);
    println!("t = 1, 0 -> 2 sqrt5/3: Delta_new = {at_one:.7}, energy drop = {drop:.7}");
    Ok(())
}
