use std::collections::BinaryHeap;

use super::{prepare, HeapEntry, Method, SolverOptions, TravelTimeField};
use crate::env_media::EnvironmentSample;
use crate::error::Result;
use crate::topology::ComponentLabeling;

const NEIGHBORS8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Shortest paths on the 8-neighbor graph of the component, edge cost
/// `mu |e| / a_mid` with `a_mid` the mean speed of the two endpoints.
/// Diagonal edges need at least one of the two shared 4-neighbors in the
/// domain, so paths never squeeze through a corner of the zero set.
pub fn solve_metric_dijkstra(
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
    let diag = h * std::f64::consts::SQRT_2;
    let mut dist = vec![f64::INFINITY; shape.len()];
    let mut done = vec![false; shape.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        value: 0.0,
        cell: source,
    });

    while let Some(HeapEntry { value, cell }) = heap.pop() {
        if done[cell] {
            continue;
        }
        done[cell] = true;
        let (r, c) = shape.coords(cell);
        let (r, c) = (r as isize, c as isize);
        for (dr, dc) in NEIGHBORS8 {
            let Some(j) = shape.offset(r + dr, c + dc) else {
                continue;
            };
            if !dom.active[j] || done[j] {
                continue;
            }
            let len = if dr != 0 && dc != 0 {
                let side_a = shape.offset(r + dr, c).is_some_and(|k| dom.active[k]);
                let side_b = shape.offset(r, c + dc).is_some_and(|k| dom.active[k]);
                if !(side_a || side_b) {
                    continue;
                }
                diag
            } else {
                h
            };
            let cost = len / (0.5 * (dom.speed[cell] + dom.speed[j]));
            let cand = value + cost;
            if cand < dist[j] {
                dist[j] = cand;
                heap.push(HeapEntry {
                    value: cand,
                    cell: j,
                });
            }
        }
    }

    Ok(TravelTimeField {
        shape,
        component_id,
        source,
        mu,
        values: dist.into_iter().map(|d| mu * d).collect(),
        method: Method::Dijkstra8,
    })
}
