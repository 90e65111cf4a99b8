use std::collections::BinaryHeap;

use super::{prepare, HeapEntry, Method, SolverOptions, TravelTimeField};
use crate::env_media::EnvironmentSample;
use crate::error::Result;
use crate::ray::supercover;
use crate::topology::ComponentLabeling;

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Far,
    Trial,
    Known,
}

/// First-order upwind update for `|Dm| = slowness` from the smallest known
/// horizontal and vertical neighbors.
fn upwind(ux: f64, uy: f64, step: f64) -> f64 {
    let (lo, hi) = if ux <= uy { (ux, uy) } else { (uy, ux) };
    if hi.is_infinite() || hi - lo >= step {
        return lo + step;
    }
    0.5 * (lo + hi + (2.0 * step * step - (hi - lo) * (hi - lo)).sqrt())
}

/// Fast marching for `|Dm| = 1/|a|` restricted to the component (then scaled
/// by `mu`). Cells near the source whose straight segment to the source stays
/// in the domain are initialized with the segment travel time.
pub fn solve_metric_fmm(
    env: &EnvironmentSample,
    labeling: &ComponentLabeling,
    component_id: u32,
    source: usize,
    mu: f64,
    opts: &SolverOptions,
) -> Result<TravelTimeField> {
    let dom = prepare(env, labeling, component_id, source, mu, opts)?;
    let shape = env.shape;
    let h = shape.h;
    let mut u = vec![f64::INFINITY; shape.len()];
    let mut state = vec![State::Far; shape.len()];
    let mut heap = BinaryHeap::new();

    let zc = shape.center(source);
    let (zr, zcol) = shape.coords(source);
    let span = opts.source_radius_cells.max(0.0).floor() as isize;
    for dr in -span..=span {
        for dc in -span..=span {
            let Some(i) = shape.offset(zr as isize + dr, zcol as isize + dc) else {
                continue;
            };
            if !dom.active[i] || ((dr * dr + dc * dc) as f64).sqrt() > opts.source_radius_cells {
                continue;
            }
            let p = shape.center(i);
            let len = (p[0] - zc[0]).hypot(p[1] - zc[1]);
            if len == 0.0 {
                u[i] = 0.0;
            } else {
                let dir = [(p[0] - zc[0]) / len, (p[1] - zc[1]) / len];
                if !supercover(&shape, zc, dir, len)
                    .iter()
                    .all(|s| dom.active[s.cell])
                {
                    continue;
                }
                u[i] = 0.5 * len * (1.0 / dom.speed[i] + 1.0 / dom.speed[source]);
            }
            state[i] = State::Known;
        }
    }
    let relax =
        |cell: usize, u: &mut [f64], state: &mut [State], heap: &mut BinaryHeap<HeapEntry>| {
            for j in shape.neighbors4(cell) {
                if !dom.active[j] || state[j] == State::Known {
                    continue;
                }
                let (r, c) = shape.coords(j);
                let (r, c) = (r as isize, c as isize);
                let known = |k: Option<usize>| match k {
                    Some(k) if state[k] == State::Known => u[k],
                    _ => f64::INFINITY,
                };
                let ux = known(shape.offset(r, c - 1)).min(known(shape.offset(r, c + 1)));
                let uy = known(shape.offset(r - 1, c)).min(known(shape.offset(r + 1, c)));
                let cand = upwind(ux, uy, h / dom.speed[j]);
                if cand < u[j] {
                    u[j] = cand;
                    state[j] = State::Trial;
                    heap.push(HeapEntry {
                        value: cand,
                        cell: j,
                    });
                }
            }
        };
    let seeds: Vec<usize> = (0..shape.len())
        .filter(|&i| state[i] == State::Known)
        .collect();
    for &i in &seeds {
        relax(i, &mut u, &mut state, &mut heap);
    }
    while let Some(HeapEntry { value, cell }) = heap.pop() {
        if state[cell] == State::Known || value > u[cell] {
            continue;
        }
        state[cell] = State::Known;
        relax(cell, &mut u, &mut state, &mut heap);
    }

    Ok(TravelTimeField {
        shape,
        component_id,
        source,
        mu,
        values: u.into_iter().map(|v| mu * v).collect(),
        method: Method::Fmm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridShape;
    use crate::topology::label_components;

    #[test]
    fn upwind_update_cases() {
        assert_eq!(upwind(1.0, f64::INFINITY, 0.5), 1.5);
        assert_eq!(upwind(1.0, 3.0, 0.5), 1.5);
        // symmetric case: 2 (u - 1)^2 = 1
        assert!((upwind(1.0, 1.0, 1.0) - (1.0 + 0.5f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn cone_error_shrinks_with_refinement() {
        let mut errors = Vec::new();
        for n in [64usize, 128] {
            let env =
                EnvironmentSample::constant(GridShape::square(n, 1.0 / n as f64).unwrap(), 1.0)
                    .unwrap();
            let lab = label_components(&env);
            let z = env.shape.index(n / 2, n / 2);
            let f = solve_metric_fmm(&env, &lab, 1, z, 1.0, &SolverOptions::default()).unwrap();
            let zc = env.shape.center(z);
            let err = (0..env.shape.len())
                .map(|i| {
                    let p = env.shape.center(i);
                    (f.value(i) - (p[0] - zc[0]).hypot(p[1] - zc[1])).abs()
                })
                .fold(0.0, f64::max);
            errors.push(err);
        }
        assert!(errors[1] < errors[0]);
    }

    fn cone_relative_error(n: usize) -> f64 {
        let env = EnvironmentSample::constant(GridShape::square(n, 1.0 / n as f64).unwrap(), 1.0)
            .unwrap();
        let lab = label_components(&env);
        let z = env.shape.index(n / 2, n / 2);
        let f = solve_metric_fmm(&env, &lab, 1, z, 1.0, &SolverOptions::default()).unwrap();
        let zc = env.shape.center(z);
        (0..env.shape.len())
            .filter(|&i| i != z)
            .map(|i| {
                let p = env.shape.center(i);
                let exact = (p[0] - zc[0]).hypot(p[1] - zc[1]);
                (f.value(i) - exact).abs() / exact
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn cone_relative_error_at_256() {
        let err = cone_relative_error(256);
        assert!(err <= 0.03, "relative cone error {err}");
    }

    /// `a(x) = x` on `(0, 1]`: the travel time from `1/2` is `|log y - log 1/2|`.
    #[test]
    fn ramp_matches_log_oracle() {
        let n = 1024;
        let shape = GridShape::new(1, n, 1.0 / n as f64).unwrap();
        let a: Vec<f64> = (0..n).map(|i| shape.center(i)[0]).collect();
        let env = EnvironmentSample::from_field(shape, a, 1.0, "ramp").unwrap();
        let lab = label_components(&env);
        let z = shape.cell_at([0.5, 0.5 / n as f64]).unwrap();
        let f = solve_metric_fmm(&env, &lab, 1, z, 1.0, &SolverOptions::default()).unwrap();
        let zx = shape.center(z)[0];
        for i in 0..n {
            let y = shape.center(i)[0];
            if !(0.05..=1.0).contains(&y) || i == z {
                continue;
            }
            let exact = (y.ln() - zx.ln()).abs();
            assert!(
                (f.value(i) - exact).abs() <= 0.02 * exact,
                "y={y} m={} exact={exact}",
                f.value(i)
            );
        }
    }
}
