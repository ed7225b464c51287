//! A user-defined model from a TOML snippet: a tilted quartic with a
//! linear-in-time load, solved by the epsilon scheme.

use rateind::config::RunConfig;
use rateind::schemes::solve;

const CONFIG: &str = r#"
[model.polynomial]
# E(t, x) = 5 + x^4 - 2 x^2 - t x
static_coeffs = [[5.0, 0.0, -2.0, 0.0, 1.0]]
time_coeffs = [[0.0, -1.0]]
lower = [-2.5]
upper = [2.5]
horizon = 3.0

[dissipation]
kind = "weighted-l1"
weights = [0.5]

[scheme]
kind = "eps-neighborhood"
eps = 0.05
tau = 1e-3
x0 = [-1.0]
"#;

fn main() -> rateind::Result<()> {
    let cfg = RunConfig::parse(CONFIG)?;
    let model = cfg.build_model()?;
    let psi = cfg.build_dissipation(model.dim())?;
    let norm = cfg.build_norm()?;
    let (kind, sc) = cfg.scheme_config(model.dim())?;
    println!("lambda = {:.4}", model.lambda);
    let run = solve(kind, &model, &psi, &norm, &sc)?;
    for i in (0..run.len()).step_by(250) {
        println!("t = {:.2}  x = {:+.5}", run.times[i], run.states[i][0]);
    }
    Ok(())
}
