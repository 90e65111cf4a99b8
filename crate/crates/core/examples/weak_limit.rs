//! Weak-* convergence on a small obstacle ensemble: pairings of u^eps - ū
//! with the Gaussian test bank for decreasing eps.
//!
//! cargo run --release --example weak_limit

use frontlab::averaging::{estimate_mbar, AveragingOptions};
use frontlab::convergence::{
    test_function_bank, weak_star_test, LabOptions, LimitBlend, DEFAULT_EPSILONS,
};
use frontlab::effective::effective_from_mbar;
use frontlab::env_media::gen_isolated_obstacles;
use frontlab::evolution::InitialData;
use frontlab::topology::{label_components, Sign};

fn main() -> frontlab::Result<()> {
    let ensemble: Vec<_> = (0..6)
        .map(|s| gen_isolated_obstacles(0.5, 0.35, 384, 0.125, 900 + s))
        .collect::<frontlab::Result<_>>()?;
    let avg = estimate_mbar(&ensemble, &AveragingOptions::default())?;
    let h = effective_from_mbar(&avg, Sign::Positive, None)?;
    let labs: Vec<_> = ensemble.iter().map(label_components).collect();
    let blend = LimitBlend::from_ensemble(&labs, &[h], 0.01)?;
    println!(
        "u0 weight {:.3}, open-cluster weight {:.3}",
        blend.u0_weight, blend.parts[0].0
    );

    let u0 = InitialData::Cone {
        center: [0.0, 0.0],
        slope: 1.0,
    };
    let rep = weak_star_test(
        &ensemble,
        &blend,
        &u0,
        &DEFAULT_EPSILONS,
        &test_function_bank(),
        &LabOptions::default(),
    )?;
    for (e, row) in rep.mean_abs.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.2e}")).collect();
        println!("eps {:<6} {}", rep.epsilons[e], cells.join(" "));
    }
    println!("decreasing per test function: {:?}", rep.decreasing());
    Ok(())
}
