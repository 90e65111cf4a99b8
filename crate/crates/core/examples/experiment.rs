//! Run a bundled experiment end to end and print its verdicts.
//!
//! cargo run --release --example experiment -- [checkerboard_trapping|obstacles_weak_star|percolation_p07] [OUT_DIR]

use frontlab::experiment::{run_experiment, ExperimentConfig};

fn main() -> frontlab::Result<()> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "checkerboard_trapping".into());
    let out = std::env::args()
        .nth(2)
        .unwrap_or_else(|| format!("example-out/{name}"));
    let cfg = ExperimentConfig::load(&name)?;
    let outcome = run_experiment(&cfg, &out)?;
    println!("{} -> {}", outcome.name, outcome.out_dir.display());
    println!("u0 weight {:.3}", outcome.report.theta.0);
    for (check, ok) in outcome.verdicts() {
        println!("  {check:<50} {}", if ok { "holds" } else { "fails" });
    }
    Ok(())
}
