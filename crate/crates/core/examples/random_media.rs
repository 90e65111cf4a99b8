//! Generate each medium, print its basic statistics and write one of them as
//! an FHL1 grid with a CSV sidecar.
//!
//! cargo run --release --example random_media -- [OUT_DIR]

use frontlab::env_media::{
    gen_checkerboard, gen_isolated_obstacles, gen_poisson_cloud, gen_site_percolation,
    translate_sample, RadiusLaw,
};
use frontlab::grid::ScalarGrid;

fn main() -> frontlab::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "example-out".into());
    std::fs::create_dir_all(&out)?;

    let media = [
        gen_site_percolation(0.7, 256, 0.125, 42)?,
        gen_isolated_obstacles(0.5, 0.35, 256, 0.125, 42)?,
        gen_poisson_cloud(0.3, RadiusLaw::Fixed(0.6), 32.0, 0.125, 42)?,
        gen_checkerboard(1.0, 256, 0.125)?,
    ];
    println!(
        "{:<20} {:>8} {:>8} {:>8} {:>10}",
        "medium", "min a", "max a", "open", "max slope"
    );
    for env in &media {
        let open =
            env.a_field.iter().filter(|&&a| a > 0.0).count() as f64 / env.a_field.len() as f64;
        let lo = env.a_field.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = env
            .a_field
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{:<20} {:>8.3} {:>8.3} {:>8.3} {:>10.4}",
            env.kind.name(),
            lo,
            hi,
            open,
            env.max_adjacent_slope()
        );
    }

    // lattice translations act exactly on the torus
    let env = &media[0];
    let shifted = translate_sample(env, (8, 16))?;
    let back = translate_sample(&shifted, (-8, -16))?;
    assert_eq!(back.a_field, env.a_field);

    let grid = format!("{out}/percolation.fhl1");
    env.write(&grid, format!("{out}/percolation.csv"))?;
    let read = ScalarGrid::read_fhl1(&grid)?;
    assert_eq!(read.values, env.a_field);
    println!("wrote and re-read {grid}");
    Ok(())
}
