//! Component decomposition of a percolation sample: spanning cluster, volume
//! fractions, δ-interiors and the gaps of a ray outside the δ-interior.
//!
//! cargo run --release --example components

use frontlab::env_media::{gen_checkerboard, gen_site_percolation};
use frontlab::topology::{
    delta_sublevel, estimate_theta, label_components, ray_gap_statistics, Sign,
};

fn main() -> frontlab::Result<()> {
    let env = gen_site_percolation(0.7, 512, 0.125, 42)?;
    let lab = label_components(&env);
    let th = estimate_theta(&lab);
    let span = lab
        .largest_spanning(Sign::Positive)
        .expect("p = 0.7 percolates");
    println!(
        "{} components; spanning open cluster #{} holds {:.3} of the box; theta0 = {:.3}",
        lab.components.len(),
        span.id,
        th.theta[&span.id],
        th.theta0
    );
    println!(
        "connectivity threshold delta0 of the cluster: {:.3}",
        span.delta0
    );

    for delta in [0.05, 0.1, 0.2] {
        let sub = delta_sublevel(&lab, &env, delta)?;
        let c = sub.component(span.id).expect("ids are preserved");
        println!(
            "delta {delta:>4}: {:>6} cells in {} piece(s)",
            c.cells.len(),
            c.pieces
        );
    }

    let gaps = ray_gap_statistics(&lab, &env, [1.0, 0.0], 0.1)?;
    let ratios = gaps.ratios();
    println!(
        "ray along e1: {} gaps, last ratios {:?}, open tail: {:?}",
        gaps.gaps.len(),
        &ratios[ratios.len().saturating_sub(3)..],
        gaps.open_tail
    );

    let board = label_components(&gen_checkerboard(1.0, 128, 0.125)?);
    println!(
        "checkerboard: {} components, any spanning: {}",
        board.components.len(),
        board.has_spanning()
    );
    Ok(())
}
