//! The discounted cell problem `w + a(x/eps)|p + Dw| = 0` at several scales,
//! compared with `-H̄(p)` on the δ-interior of the spanning cluster.
//!
//! cargo run --release --example stationary_problem

use frontlab::convergence::stationary_test;
use frontlab::effective::EffectiveHamiltonian;
use frontlab::env_media::gen_site_percolation;
use frontlab::topology::label_components;

fn main() -> frontlab::Result<()> {
    let env = gen_site_percolation(0.7, 384, 0.125, 5)?;
    let lab = label_components(&env);
    let h = EffectiveHamiltonian::isotropic(0.39, 128)?;
    let rep = stationary_test(&env, &lab, &h, &[[1.0, 0.0]], &[0.25, 0.125], 0.1, 1.0, 0.5)?;
    for r in &rep.rows {
        println!(
            "eps {:<6} sup |w + H| = {:.3}  mean = {:.3}  bound holds: {}  ({} iterations)",
            r.eps, r.sup_error, r.mean_error, r.bound_holds, r.iterations
        );
    }
    Ok(())
}
