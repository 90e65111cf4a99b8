//! The oscillatory front on a percolation medium next to the homogenized
//! front, computed both by finite differences and by the Hopf–Lax formula.
//!
//! cargo run --release --example front_evolution -- [OUT_DIR]

use frontlab::effective::EffectiveHamiltonian;
use frontlab::env_media::gen_site_percolation;
use frontlab::evolution::{
    solve_effective_fd, solve_effective_hopflax, solve_oscillatory, Boundary, EvolutionConfig,
    InitialData, XGrid,
};

fn main() -> frontlab::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "example-out".into());
    std::fs::create_dir_all(&out)?;
    let eps = 0.125;
    let env = gen_site_percolation(0.7, 256, 0.125, 11)?;
    let grid = XGrid::for_env(&env.shape, eps)?;
    let u0 = InitialData::Cone {
        center: [0.0, 0.0],
        slope: 1.0,
    };
    let cfg = EvolutionConfig {
        t_final: 0.5,
        snapshots: 2,
        boundary: Boundary::Extrapolate,
        ..EvolutionConfig::default()
    };
    let traj = solve_oscillatory(&env, &u0.sample(&grid), eps, &cfg)?;
    println!("oscillatory: {} steps, dt = {:.2e}", traj.steps, traj.dt);
    let ueps = traj.final_state();
    ueps.write_fhl1(format!("{out}/u_eps.fhl1"))?;
    ueps.write_contour_csv(format!("{out}/u_eps_contour.csv"))?;

    // an isotropic stand-in for the percolation Hamiltonian
    let h = EffectiveHamiltonian::isotropic(0.39, 128)?;
    let fd = solve_effective_fd(&h, &u0.sample(&grid), &cfg)?;
    let exact = solve_effective_hopflax(&h, &u0, &grid, cfg.t_final)?;
    let gap = fd
        .final_state()
        .values
        .iter()
        .zip(&exact.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "effective FD vs Hopf-Lax: max difference {gap:.4} (h = {:.4})",
        grid.h()
    );
    exact.write_contour_csv(format!("{out}/u_bar_contour.csv"))?;
    Ok(())
}
