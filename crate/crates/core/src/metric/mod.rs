//! Point-source travel times on one component: the maximal subsolution of
//! `|a| |Dm| = mu` vanishing at the source, realized as a minimal travel time.
//!
//! Both solvers compute the `mu = 1` field and multiply by `mu` at the end, so
//! `m_mu = mu * m_1` holds bit for bit. Negative components are solved with
//! speed `|a|`; sign conventions are restored by callers.

mod dijkstra;
mod fmm;
mod verify;

use std::path::Path;

pub use dijkstra::solve_metric_dijkstra;
pub use fmm::solve_metric_fmm;
pub use verify::{verify_metric_properties, MetricReport, VerifyOptions};

use crate::env_media::EnvironmentSample;
use crate::error::{Error, Result};
use crate::grid::{GridShape, ScalarGrid};
use crate::topology::ComponentLabeling;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dijkstra8,
    Fmm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dijkstra8 => "dijkstra8",
            Method::Fmm => "fmm",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Cells with `|a| <= delta_floor` are removed from the graph.
    pub delta_floor: f64,
    /// FMM only: cells within this many cells of the source are initialized
    /// with the straight-line travel time (trapezoidal slowness).
    pub source_radius_cells: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            delta_floor: 1e-6,
            source_radius_cells: 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TravelTimeField {
    pub shape: GridShape,
    pub component_id: u32,
    pub source: usize,
    pub mu: f64,
    /// Travel time per cell; `+inf` outside the component or when unreachable.
    pub values: Vec<f64>,
    pub method: Method,
}

impl TravelTimeField {
    #[inline]
    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn is_reachable(&self, cell: usize) -> bool {
        self.values[cell].is_finite()
    }

    pub fn source_position(&self) -> [f64; 2] {
        self.shape.center(self.source)
    }

    /// Same field at another level, `m_mu' = (mu'/mu) m_mu`.
    pub fn rescaled(&self, mu: f64) -> TravelTimeField {
        let ratio = mu / self.mu;
        TravelTimeField {
            values: self.values.iter().map(|v| v * ratio).collect(),
            mu,
            ..self.clone()
        }
    }

    pub fn to_grid(&self) -> ScalarGrid {
        ScalarGrid {
            shape: self.shape,
            values: self.values.clone(),
        }
    }

    pub fn write_fhl1(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_grid().write_fhl1(path)
    }
}

/// Cells a solve may use, and their (positive) speed `|a|`.
pub(crate) struct SolveDomain {
    pub active: Vec<bool>,
    pub speed: Vec<f64>,
}

pub(crate) fn prepare(
    env: &EnvironmentSample,
    labeling: &ComponentLabeling,
    component_id: u32,
    source: usize,
    mu: f64,
    opts: &SolverOptions,
) -> Result<SolveDomain> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    if labeling.shape != env.shape {
        return Err(Error::Parameter(
            "labeling and environment grids differ".into(),
        ));
    }
    if source >= env.shape.len() {
        return Err(Error::Domain(format!(
            "source cell {source} outside the grid"
        )));
    }
    if env.a_field[source] == 0.0 {
        return Err(Error::Domain(format!(
            "source cell {source} lies on the zero set"
        )));
    }
    if labeling.labels[source] != component_id {
        return Err(Error::Domain(format!(
            "source cell {source} is not in component {component_id}"
        )));
    }
    let speed: Vec<f64> = env.a_field.iter().map(|a| a.abs()).collect();
    if speed[source] <= opts.delta_floor {
        return Err(Error::Domain(format!(
            "source speed {} below the floor",
            speed[source]
        )));
    }
    let active = (0..env.shape.len())
        .map(|i| labeling.labels[i] == component_id && speed[i] > opts.delta_floor)
        .collect();
    Ok(SolveDomain { active, speed })
}

/// Solve with the requested method.
pub fn solve_metric(
    method: Method,
    env: &EnvironmentSample,
    labeling: &ComponentLabeling,
    component_id: u32,
    source: usize,
    mu: f64,
    opts: &SolverOptions,
) -> Result<TravelTimeField> {
    match method {
        Method::Dijkstra8 => solve_metric_dijkstra(env, labeling, component_id, source, mu, opts),
        Method::Fmm => solve_metric_fmm(env, labeling, component_id, source, mu, opts),
    }
}

/// Min-heap entry ordered by value, then by cell index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct HeapEntry {
    pub value: f64,
    pub cell: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_media::gen_site_percolation;
    use crate::topology::{label_components, Sign};

    fn constant_env(n: usize, h: f64, c: f64) -> (EnvironmentSample, ComponentLabeling) {
        let env = EnvironmentSample::constant(GridShape::square(n, h).unwrap(), c).unwrap();
        let lab = label_components(&env);
        (env, lab)
    }

    #[test]
    fn axis_path_is_exact() {
        let (env, lab) = constant_env(21, 1.0, 0.25);
        let z = env.shape.index(0, 0);
        for method in [Method::Dijkstra8, Method::Fmm] {
            let f = solve_metric(method, &env, &lab, 1, z, 1.0, &SolverOptions::default()).unwrap();
            assert_eq!(f.value(z), 0.0);
            let y = env.shape.index(0, 10);
            assert!(
                (f.value(y) - 10.0 / 0.25).abs() < 1e-9,
                "{method:?} {}",
                f.value(y)
            );
        }
    }

    #[test]
    fn mu_linearity_is_exact() {
        let env = gen_site_percolation(0.7, 64, 0.125, 5).unwrap();
        let lab = label_components(&env);
        let comp = lab.largest_spanning(Sign::Positive).unwrap();
        let z = crate::topology::central_cell(
            &env.shape,
            comp.cells.iter().copied().filter(|&i| env.a_field[i] > 0.1),
        )
        .unwrap();
        for method in [Method::Dijkstra8, Method::Fmm] {
            let one = solve_metric(
                method,
                &env,
                &lab,
                comp.id,
                z,
                1.0,
                &SolverOptions::default(),
            )
            .unwrap();
            for mu in [0.5, 2.0, 3.0] {
                let f = solve_metric(
                    method,
                    &env,
                    &lab,
                    comp.id,
                    z,
                    mu,
                    &SolverOptions::default(),
                )
                .unwrap();
                for (a, b) in f.values.iter().zip(&one.values) {
                    if b.is_finite() {
                        assert!((a - mu * b).abs() <= 1e-12 * a.abs().max(1.0));
                        if mu > 1.0 {
                            assert!(*a >= *b);
                        }
                    } else {
                        assert!(a.is_infinite());
                    }
                }
            }
        }
    }

    #[test]
    fn other_components_are_unreachable() {
        let env = gen_site_percolation(0.5, 64, 0.125, 2).unwrap();
        let lab = label_components(&env);
        let comp = &lab.components[0];
        let z = comp.cells[comp.cells.len() / 2];
        for method in [Method::Dijkstra8, Method::Fmm] {
            let f = solve_metric(
                method,
                &env,
                &lab,
                comp.id,
                z,
                1.0,
                &SolverOptions::default(),
            )
            .unwrap();
            for i in 0..env.shape.len() {
                if lab.labels[i] != comp.id {
                    assert!(f.value(i).is_infinite());
                } else {
                    assert!(f.value(i) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn zero_cell_source_is_a_domain_error() {
        let env = gen_site_percolation(0.5, 32, 0.125, 2).unwrap();
        let lab = label_components(&env);
        let z = (0..env.shape.len())
            .find(|&i| env.a_field[i] == 0.0)
            .unwrap();
        let r = solve_metric_dijkstra(&env, &lab, 1, z, 1.0, &SolverOptions::default());
        assert!(matches!(r, Err(Error::Domain(_))));
        let r = solve_metric_fmm(&env, &lab, 1, z, 1.0, &SolverOptions::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
