//! Energy-dissipation bookkeeping of two limits: the energetic limit
//! satisfies the classical balance but not the new one; the
//! epsilon-neighborhood limit satisfies the new balance but not the
//! classical one.

use rateind::model::{make_example2, Dissipation, NeighborhoodNorm, SchemeKind};
use rateind::schemes::{refine_limit, LimitOptions};
use rateind::verify::check_new_balance;

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let (psi, norm) = (Dissipation::abs(), NeighborhoodNorm::L2);
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
    let opts = LimitOptions::with_x0(vec![0.0]);
    let runs = [
        (SchemeKind::Energetic, vec![], vec![1e-2, 1e-3, 1e-4]),
        (SchemeKind::EpsNeighborhood, vec![0.04, 0.02, 0.01], vec![1e-3, 1e-4, 1e-5]),
    ];
    for (kind, eps, tau) in runs {
        let (bv, _) = refine_limit(&model, &psi, &norm, kind, &eps, &tau, &grid, &opts)?;
        let b = check_new_balance(&model, &psi, &norm, &bv, 0.0, 2.0)?;
        println!("{kind}:");
        println!("  classical residual {:+.6}   new residual {:+.6}", b.residual_upper, b.residual_lower);
        for j in &b.jumps {
            println!(
                "  jump at t = {:.4}: energy drop {:.6}, Psi {:.6}, Delta_new {:.6}",
                j.t,
                -j.energy_jump,
                j.psi_jump,
                j.delta_left + j.delta_right
            );
        }
    }
    Ok(())
}
