//! Ensemble estimate of the averaged metric along a fan of directions, with
//! its confidence intervals and the half-δ diagnostic.
//!
//! cargo run --release --example averaged_metric -- [OUT_DIR]

use frontlab::averaging::{estimate_mbar, AveragingOptions};
use frontlab::env_media::gen_site_percolation;

fn main() -> frontlab::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "example-out".into());
    std::fs::create_dir_all(&out)?;
    let ensemble: Vec<_> = (0..8)
        .map(|s| gen_site_percolation(0.7, 640, 0.125, 500 + s))
        .collect::<frontlab::Result<_>>()?;
    let opts = AveragingOptions {
        directions: 16,
        t_grid: vec![8.0, 16.0, 32.0],
        ..AveragingOptions::default()
    };
    let avg = estimate_mbar(&ensemble, &opts)?;
    println!("{} samples, delta = {:.3}", avg.samples, avg.delta);
    println!("{:>8} {:>8} {:>8}", "angle", "mbar1", "ci");
    for k in 0..avg.directions.len() {
        println!(
            "{:>8.3} {:>8.3} {:>8.3}",
            avg.angles[k], avg.mbar1[k], avg.ci[k]
        );
    }
    if let Some(stable) = avg.delta_stable() {
        let n = stable.iter().filter(|&&s| s).count();
        println!(
            "{n}/{} directions agree at delta/2 within 2 ci",
            stable.len()
        );
    }
    avg.write_csv(format!("{out}/mbar.csv"))?;
    Ok(())
}
