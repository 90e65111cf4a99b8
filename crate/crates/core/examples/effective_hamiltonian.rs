//! Effective Hamiltonian by duality: from a metric profile to H̄, the Wulff
//! polygon, the subgradient direction and the way back.
//!
//! cargo run --release --example effective_hamiltonian -- [OUT_DIR]

use frontlab::averaging::fan;
use frontlab::effective::{
    effective_from_profile, mbar_from_effective, subgradient_direction, verify_convex_homogeneous,
    HamiltonianKind,
};

fn main() -> frontlab::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "example-out".into());
    std::fs::create_dir_all(&out)?;
    // an anisotropic profile: fast along e1, slow along e2
    let dirs: Vec<[f64; 2]> = fan(64).into_iter().map(|d| d.1).collect();
    let mbar: Vec<f64> = dirs
        .iter()
        .map(|y| (4.0 * y[0] * y[0] + 9.0 * y[1] * y[1]).sqrt())
        .collect();
    let h = effective_from_profile(None, HamiltonianKind::Convex, dirs.clone(), mbar.clone())?;
    for p in [[1.0, 0.0], [0.0, 1.0], [0.6, 0.8]] {
        let s = subgradient_direction(&h, p)?;
        println!(
            "H({:.1}, {:.1}) = {:.4}; supporting direction ({:.3}, {:.3})",
            p[0],
            p[1],
            h.eval(p),
            s.direction[0],
            s.direction[1]
        );
    }
    let report = verify_convex_homogeneous(&h, 1000, 3);
    println!("convex and 1-homogeneous: {}", report.holds());

    let back = mbar_from_effective(&h, &dirs, 1.0)?;
    let err = back
        .values
        .iter()
        .zip(&mbar)
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    println!("round trip relative error: {err:.2e}");

    h.write_polygon_csv(format!("{out}/wulff.csv"))?;
    h.write_grid_csv(format!("{out}/hbar_grid.csv"), 1.0, 41)?;
    Ok(())
}
