//! Point-source travel times on the spanning cluster with both solvers, the
//! structural checks of the resulting metric, and the exact scaling in mu.
//!
//! cargo run --release --example travel_time -- [OUT_DIR]

use frontlab::env_media::gen_site_percolation;
use frontlab::metric::{
    solve_metric, verify_metric_properties, Method, SolverOptions, VerifyOptions,
};
use frontlab::topology::{central_cell, label_components, Sign};

fn main() -> frontlab::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "example-out".into());
    std::fs::create_dir_all(&out)?;
    let env = gen_site_percolation(0.7, 256, 0.125, 7)?;
    let lab = label_components(&env);
    let comp = lab
        .largest_spanning(Sign::Positive)
        .expect("spanning cluster");
    let interior: Vec<usize> = comp
        .cells
        .iter()
        .copied()
        .filter(|&i| env.a_field[i] > 0.2)
        .collect();
    let z = central_cell(&env.shape, interior.iter().copied()).expect("nonempty interior");
    let y = interior[interior.len() / 4];
    let opts = SolverOptions::default();

    for method in [Method::Dijkstra8, Method::Fmm] {
        let fz = solve_metric(method, &env, &lab, comp.id, z, 1.0, &opts)?;
        let fy = solve_metric(method, &env, &lab, comp.id, y, 1.0, &opts)?;
        let rep =
            verify_metric_properties(&fz, &fy, &env, &lab, 0.1, 0.05, &VerifyOptions::default())?;
        println!(
            "{:<9} m(y,z) = {:.3}  symmetry {:.1e}  triangle {:.1e}  neighbor Lipschitz ok: {}  residual {:.3}",
            method.as_str(),
            fz.value(y),
            rep.symmetry_defect,
            rep.triangle_defect,
            rep.lipschitz_ok(),
            rep.pde_residual
        );
        if method == Method::Fmm {
            fz.write_fhl1(format!("{out}/travel_time_fmm.fhl1"))?;
        }
    }

    let f1 = solve_metric(Method::Fmm, &env, &lab, comp.id, z, 1.0, &opts)?;
    let f3 = f1.rescaled(3.0);
    println!("m_3(y) / m_1(y) = {:.12}", f3.value(y) / f1.value(y));
    Ok(())
}
