//! Plot-ready data: E(t,.) + |.| at t = 1/6 and t = 1, the weak-local
//! stability region in the (t, x) plane and three solution curves, written
//! to `target/landscape`.

use std::path::PathBuf;

use rateind::cli::run_landscape;
use rateind::config::RunConfig;

fn main() -> rateind::Result<()> {
    let mut cfg = RunConfig::for_catalog("example2");
    cfg.output = PathBuf::from("target/landscape");
    let outcome = run_landscape(&cfg)?;
    for f in outcome.files {
        println!("{}", f.display());
    }
    Ok(())
}
