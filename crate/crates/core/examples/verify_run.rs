//! Runs the verification suite on stored runs of each scheme.

use rateind::model::{make_example2, Dissipation, NeighborhoodNorm, SchemeKind};
use rateind::schemes::{solve, SchemeConfig};
use rateind::verify::{verify_trajectory, VerifyOptions};

fn main() -> rateind::Result<()> {
    let model = make_example2();
    let (psi, norm) = (Dissipation::abs(), NeighborhoodNorm::L2);
    for kind in SchemeKind::ALL {
        let eps = if kind == SchemeKind::EfendievMielke { 1e-2 } else { 0.1 };
        let run = solve(kind, &model, &psi, &norm, &SchemeConfig::new(eps, 1e-2, vec![0.0]))?;
        let report = verify_trajectory(&model, &psi, &norm, &run, &VerifyOptions::default())?;
        println!("{kind}: {}", if report.passed { "all checks pass" } else { "FAILED" });
        for c in &report.checks {
            println!("  {:<18} residual {:+.3e} <= {:.1e}: {}", c.name, c.residual, c.tolerance, c.passed);
        }
    }
    Ok(())
}
