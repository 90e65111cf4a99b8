//! Front evolution: the oscillatory equation `u_t + a(x/eps)|Du| = 0`, the
//! stationary cell problem `w + a(x/eps)|p + Dw| = 0`, and the effective
//! equation `u_t + H̄(Du) = 0` by finite differences and by Hopf–Lax.
//!
//! The oscillatory grid is the environment grid scaled by `eps` and centered
//! at the origin, so one environment cell is `eps h_env` wide in `x`.

use std::path::Path;

use rayon::prelude::*;

use crate::effective::{EffectiveHamiltonian, HamiltonianKind};
use crate::env_media::EnvironmentSample;
use crate::error::{Error, Result};
use crate::grid::{bilinear, GridShape, ScalarGrid};

/// Largest admissible CFL number.
pub const MAX_CFL: f64 = 0.45;
/// Environment cells per unit cube below which the oscillatory solve warns.
pub const MIN_CELLS_PER_CUBE: f64 = 8.0;

/// Cell-centered grid in `x` with an explicit lower-left corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XGrid {
    pub shape: GridShape,
    pub origin: [f64; 2],
}

impl XGrid {
    /// `n x n` cells covering `[-r, r]^2`.
    pub fn centered(n: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Parameter(format!(
                "half width must be positive, got {r}"
            )));
        }
        Ok(Self {
            shape: GridShape::square(n, 2.0 * r / n as f64)?,
            origin: [-r, -r],
        })
    }

    /// The environment grid scaled by `eps`, centered at the origin.
    pub fn for_env(env: &GridShape, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, 1], got {eps}"
            )));
        }
        let shape = GridShape::new(env.rows, env.cols, env.h * eps)?;
        Ok(Self {
            shape,
            origin: [-shape.width() / 2.0, -shape.height() / 2.0],
        })
    }

    #[inline]
    pub fn point(&self, i: usize) -> [f64; 2] {
        let c = self.shape.center(i);
        [self.origin[0] + c[0], self.origin[1] + c[1]]
    }

    pub fn h(&self) -> f64 {
        self.shape.h
    }

    /// Bilinear value of `values` at `x`, with the query clamped to the box
    /// of cell centers (constant extension outside).
    pub fn sample(&self, values: &[f64], x: [f64; 2]) -> f64 {
        let s = self.shape;
        let lo = 0.5 * s.h;
        let px = (x[0] - self.origin[0]).clamp(lo, s.width() - lo);
        let py = (x[1] - self.origin[1]).clamp(lo, s.height() - lo);
        // nudge off the last center so the stencil stays in the box
        let px = px.min(s.width() - lo - 1e-12 * s.width()).max(lo);
        let py = py.min(s.height() - lo - 1e-12 * s.height()).max(lo);
        match bilinear(&s, values, [px, py], |_| true) {
            Some(v) => v,
            None => {
                let i = s.cell_at([px, py]).expect("clamped point lies in the box");
                values[i]
            }
        }
    }
}

/// Values on an `x` grid at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: XGrid,
    pub values: Vec<f64>,
    pub t: f64,
    pub epsilon: Option<f64>,
    /// CFL number of the solve that produced it (`0` for exact formulas).
    pub cfl: f64,
}

impl GridFunction {
    pub fn new(grid: XGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.shape.len() {
            return Err(Error::Parameter(format!(
                "{} values for a {}-cell grid",
                values.len(),
                grid.shape.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("grid function must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            t: 0.0,
            epsilon: None,
            cfl: 0.0,
        })
    }

    pub fn from_fn(grid: XGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self {
            values: (0..grid.shape.len()).map(|i| f(grid.point(i))).collect(),
            grid,
            t: 0.0,
            epsilon: None,
            cfl: 0.0,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_fhl1(&self, path: impl AsRef<Path>) -> Result<()> {
        ScalarGrid::new(self.grid.shape, self.values.clone())?.write_fhl1(path)
    }

    /// Zero level set by marching squares on the cell centers.
    pub fn zero_contour(&self) -> Vec<[f64; 4]> {
        let s = self.grid.shape;
        let mut segs = Vec::new();
        if s.rows < 2 || s.cols < 2 {
            return segs;
        }
        for r in 0..s.rows - 1 {
            for c in 0..s.cols - 1 {
                // corners counterclockwise from lower-left
                let idx = [
                    s.index(r, c),
                    s.index(r, c + 1),
                    s.index(r + 1, c + 1),
                    s.index(r + 1, c),
                ];
                let v: Vec<f64> = idx.iter().map(|&i| self.values[i]).collect();
                let p: Vec<[f64; 2]> = idx.iter().map(|&i| self.grid.point(i)).collect();
                let mut cross = Vec::with_capacity(4);
                for k in 0..4 {
                    let (a, b) = (v[k], v[(k + 1) % 4]);
                    if (a < 0.0) != (b < 0.0) {
                        let w = a / (a - b);
                        let (pa, pb) = (p[k], p[(k + 1) % 4]);
                        cross.push([pa[0] + w * (pb[0] - pa[0]), pa[1] + w * (pb[1] - pa[1])]);
                    }
                }
                if cross.len() == 2 {
                    segs.push([cross[0][0], cross[0][1], cross[1][0], cross[1][1]]);
                } else if cross.len() == 4 {
                    // saddle: pair by the value at the cell center
                    let mid = 0.25 * v.iter().sum::<f64>();
                    let (a, b) = if (mid < 0.0) == (v[0] < 0.0) {
                        ((0, 3), (1, 2))
                    } else {
                        ((0, 1), (2, 3))
                    };
                    for (i, j) in [a, b] {
                        segs.push([cross[i][0], cross[i][1], cross[j][0], cross[j][1]]);
                    }
                }
            }
        }
        segs
    }

    /// CSV `x1,y1,x2,y2` of the zero contour.
    pub fn write_contour_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x1", "y1", "x2", "y2"])?;
        for s in self.zero_contour() {
            w.write_record(s.map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Constant ghost cells (zero normal derivative).
    Extrapolate,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionConfig {
    pub cfl: f64,
    pub boundary: Boundary,
    pub t_final: f64,
    /// Number of equally spaced snapshots in `(0, t_final]`, the last one at
    /// `t_final`.
    pub snapshots: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            cfl: MAX_CFL,
            boundary: Boundary::Periodic,
            t_final: 0.5,
            snapshots: 1,
        }
    }
}

impl EvolutionConfig {
    fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            return Err(Error::Configuration(format!(
                "cfl must lie in (0, {MAX_CFL}], got {}",
                self.cfl
            )));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Configuration(format!(
                "final time must be nonnegative, got {}",
                self.t_final
            )));
        }
        if self.snapshots == 0 {
            return Err(Error::Configuration("need at least one snapshot".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// States at `k t_final / snapshots`, `k = 1..=snapshots`.
    pub snapshots: Vec<GridFunction>,
    pub dt: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &GridFunction {
        self.snapshots
            .last()
            .expect("a trajectory has at least one snapshot")
    }
}

/// Initial data menu.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData {
    /// `slope |x - center|`.
    Cone { center: [f64; 2], slope: f64 },
    /// `height (1 - exp(-|x - center|^2 / width^2))`, radially increasing.
    Bump {
        center: [f64; 2],
        width: f64,
        height: f64,
    },
    /// `p · x`.
    Plane { p: [f64; 2] },
}

impl InitialData {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match *self {
            InitialData::Cone { center, slope } => {
                slope * (x[0] - center[0]).hypot(x[1] - center[1])
            }
            InitialData::Bump {
                center,
                width,
                height,
            } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                height * (1.0 - (-r2 / (width * width)).exp())
            }
            InitialData::Plane { p } => p[0] * x[0] + p[1] * x[1],
        }
    }

    /// Profile `f` with `u0(x) = f(|x - center|)` for radial data.
    fn radial(&self, r: f64) -> f64 {
        match *self {
            InitialData::Cone { slope, .. } => slope * r,
            InitialData::Bump { width, height, .. } => {
                height * (1.0 - (-(r * r) / (width * width)).exp())
            }
            InitialData::Plane { .. } => unreachable!("plane data is not radial"),
        }
    }

    pub fn sample(&self, grid: &XGrid) -> GridFunction {
        GridFunction::from_fn(*grid, |x| self.eval(x))
    }
}

/// Godunov gradient norm for an expanding front (`a > 0`).
#[inline]
fn grad_expand(dxm: f64, dxp: f64, dym: f64, dyp: f64) -> f64 {
    let gx = dxm.max(0.0).powi(2).max(dxp.min(0.0).powi(2));
    let gy = dym.max(0.0).powi(2).max(dyp.min(0.0).powi(2));
    (gx + gy).sqrt()
}

/// Godunov gradient norm for a contracting front (`a < 0`).
#[inline]
fn grad_contract(dxm: f64, dxp: f64, dym: f64, dyp: f64) -> f64 {
    let gx = dxm.min(0.0).powi(2).max(dxp.max(0.0).powi(2));
    let gy = dym.min(0.0).powi(2).max(dyp.max(0.0).powi(2));
    (gx + gy).sqrt()
}

/// One-sided differences `(D-x, D+x, D-y, D+y)` at every cell.
fn differences<'a>(
    shape: &GridShape,
    u: &'a [f64],
    bc: Boundary,
) -> impl Fn(usize) -> [f64; 4] + Sync + 'a {
    let s = *shape;
    move |i| {
        let (r, c) = s.coords(i);
        let at = |rr: isize, cc: isize| -> f64 {
            match bc {
                Boundary::Periodic => {
                    let rr = rr.rem_euclid(s.rows as isize) as usize;
                    let cc = cc.rem_euclid(s.cols as isize) as usize;
                    u[s.index(rr, cc)]
                }
                Boundary::Extrapolate => {
                    let rr = rr.clamp(0, s.rows as isize - 1) as usize;
                    let cc = cc.clamp(0, s.cols as isize - 1) as usize;
                    u[s.index(rr, cc)]
                }
            }
        };
        let (r, c) = (r as isize, c as isize);
        let ui = u[i];
        [
            (ui - at(r, c - 1)) / s.h,
            (at(r, c + 1) - ui) / s.h,
            (ui - at(r - 1, c)) / s.h,
            (at(r + 1, c) - ui) / s.h,
        ]
    }
}

/// Explicit steps `u <- u - dt H(i, D)` with snapshot bookkeeping.
fn march(
    u0: &GridFunction,
    cfg: &EvolutionConfig,
    max_speed: f64,
    eps: Option<f64>,
    ham: impl Fn(usize, [f64; 4]) -> f64 + Sync,
) -> Result<Trajectory> {
    cfg.validate()?;
    let shape = u0.grid.shape;
    let h = shape.h;
    let mut per_snap = 1usize;
    let mut dt = 0.0;
    if max_speed > 0.0 && cfg.t_final > 0.0 {
        let dt_max = cfg.cfl * h / (std::f64::consts::SQRT_2 * max_speed);
        let interval = cfg.t_final / cfg.snapshots as f64;
        per_snap = (interval / dt_max).ceil().max(1.0) as usize;
        dt = interval / per_snap as f64;
    }
    let mut u = u0.values.clone();
    let mut snapshots = Vec::with_capacity(cfg.snapshots);
    let mut steps = 0usize;
    for k in 1..=cfg.snapshots {
        if dt > 0.0 {
            for _ in 0..per_snap {
                let next: Vec<f64> = {
                    let d = differences(&shape, &u, cfg.boundary);
                    (0..u.len())
                        .into_par_iter()
                        .map(|i| u[i] - dt * ham(i, d(i)))
                        .collect()
                };
                u = next;
                steps += 1;
            }
        }
        snapshots.push(GridFunction {
            grid: u0.grid,
            values: u.clone(),
            t: cfg.t_final * k as f64 / cfg.snapshots as f64,
            epsilon: eps,
            cfl: if max_speed > 0.0 {
                dt * std::f64::consts::SQRT_2 * max_speed / h
            } else {
                0.0
            },
        });
    }
    Ok(Trajectory {
        snapshots,
        dt,
        steps,
        warnings: Vec::new(),
    })
}

fn check_env_grid(env: &EnvironmentSample, u0: &GridFunction, eps: f64) -> Result<Vec<String>> {
    let expect = XGrid::for_env(&env.shape, eps)?;
    if u0.grid.shape.rows != expect.shape.rows
        || u0.grid.shape.cols != expect.shape.cols
        || (u0.grid.shape.h - expect.shape.h).abs() > 1e-12 * expect.shape.h
    {
        return Err(Error::Parameter(
            "initial data must live on the environment grid scaled by epsilon".into(),
        ));
    }
    let mut warnings = Vec::new();
    let per_cube = 1.0 / env.shape.h;
    if per_cube < MIN_CELLS_PER_CUBE {
        warnings.push(format!(
            "under-resolved: {per_cube} cells per eps-cube, at least {MIN_CELLS_PER_CUBE} recommended"
        ));
    }
    Ok(warnings)
}

/// `u_t + a(x/eps)|Du| = 0` with sign-aware Godunov upwinding; cells with
/// `a = 0` never change.
pub fn solve_oscillatory(
    env: &EnvironmentSample,
    u0: &GridFunction,
    eps: f64,
    cfg: &EvolutionConfig,
) -> Result<Trajectory> {
    let warnings = check_env_grid(env, u0, eps)?;
    let a = &env.a_field;
    let mut traj = march(
        u0,
        cfg,
        env.max_abs_velocity(),
        Some(eps),
        |i, [dxm, dxp, dym, dyp]| {
            let ai = a[i];
            if ai > 0.0 {
                ai * grad_expand(dxm, dxp, dym, dyp)
            } else if ai < 0.0 {
                ai * grad_contract(dxm, dxp, dym, dyp)
            } else {
                0.0
            }
        },
    )?;
    traj.warnings = warnings;
    Ok(traj)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub boundary: Boundary,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200_000,
            boundary: Boundary::Periodic,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationarySolution {
    pub w: GridFunction,
    pub iterations: usize,
    /// `max |w + a G(p + Dw)|` at the last iterate.
    pub residual: f64,
    /// `‖a‖_∞ |p|`.
    pub bound: f64,
}

impl StationarySolution {
    pub fn bound_holds(&self) -> bool {
        self.w.values.iter().all(|w| w.abs() <= self.bound)
    }
}

/// `w + a(x/eps)|p + Dw| = 0` by monotone pseudo-time iteration
/// `w <- w - tau (w + a G)` with `tau (1 + sqrt2 |a| / h) = 1`.
pub fn solve_stationary(
    env: &EnvironmentSample,
    p: [f64; 2],
    eps: f64,
    opts: &StationaryOptions,
) -> Result<StationarySolution> {
    let grid = XGrid::for_env(&env.shape, eps)?;
    let shape = grid.shape;
    let amax = env.max_abs_velocity();
    let bound = amax * p[0].hypot(p[1]);
    let a = &env.a_field;
    let tau = 1.0 / (1.0 + std::f64::consts::SQRT_2 * amax / shape.h);
    let mut w = vec![0.0; shape.len()];
    let mut residual = f64::INFINITY;
    for it in 0..opts.max_iterations {
        let res: Vec<f64> = {
            let d = differences(&shape, &w, opts.boundary);
            (0..w.len())
                .into_par_iter()
                .map(|i| {
                    let [dxm, dxp, dym, dyp] = d(i);
                    let (dxm, dxp, dym, dyp) = (p[0] + dxm, p[0] + dxp, p[1] + dym, p[1] + dyp);
                    let ai = a[i];
                    let ham = if ai > 0.0 {
                        ai * grad_expand(dxm, dxp, dym, dyp)
                    } else if ai < 0.0 {
                        ai * grad_contract(dxm, dxp, dym, dyp)
                    } else {
                        0.0
                    };
                    w[i] + ham
                })
                .collect()
        };
        residual = res.iter().fold(0.0, |m, r| m.max(r.abs()));
        if residual < opts.tolerance {
            let mut wf = GridFunction::new(grid, w)?;
            wf.epsilon = Some(eps);
            return Ok(StationarySolution {
                w: wf,
                iterations: it,
                residual,
                bound,
            });
        }
        for (wi, ri) in w.iter_mut().zip(&res) {
            *wi -= tau * ri;
        }
    }
    Err(Error::Numerical(format!(
        "stationary iteration did not reach {} in {} iterations (residual {residual})",
        opts.tolerance, opts.max_iterations
    )))
}

/// Monotone scheme for `u_t + H̄(Du) = 0`: the max (convex) or min (concave)
/// over Wulff vertices of upwinded transport terms.
pub fn solve_effective_fd(
    h: &EffectiveHamiltonian,
    u0: &GridFunction,
    cfg: &EvolutionConfig,
) -> Result<Trajectory> {
    let (verts, sign): (Vec<[f64; 2]>, f64) = match h.kind {
        HamiltonianKind::Zero => (Vec::new(), 1.0),
        HamiltonianKind::Convex => (h.wulff.vertices.clone(), 1.0),
        HamiltonianKind::Concave => (
            h.wulff.vertices.iter().map(|v| [-v[0], -v[1]]).collect(),
            -1.0,
        ),
    };
    let max_speed = verts.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
    march(u0, cfg, max_speed, None, |_, [dxm, dxp, dym, dyp]| {
        let mut best = if sign > 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        for w in &verts {
            let tx = w[0] * if w[0] > 0.0 { dxm } else { dxp };
            let ty = w[1] * if w[1] > 0.0 { dym } else { dyp };
            let term = tx + ty;
            best = if sign > 0.0 {
                best.max(term)
            } else {
                best.min(term)
            };
        }
        if verts.is_empty() {
            0.0
        } else {
            best
        }
    })
}

/// Distance from `q` to the convex polygon `hull` (counterclockwise); zero
/// inside.
fn distance_to_polygon(q: [f64; 2], hull: &[[f64; 2]]) -> f64 {
    let seg = |a: [f64; 2], b: [f64; 2]| {
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len2 = dx * dx + dy * dy;
        let s = if len2 > 0.0 {
            (((q[0] - a[0]) * dx + (q[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (q[0] - a[0] - s * dx).hypot(q[1] - a[1] - s * dy)
    };
    match hull.len() {
        0 => f64::INFINITY,
        1 => seg(hull[0], hull[0]),
        2 => seg(hull[0], hull[1]),
        k => {
            let inside = (0..k).all(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % k]);
                (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]) >= 0.0
            });
            if inside {
                0.0
            } else {
                (0..k)
                    .map(|i| seg(hull[i], hull[(i + 1) % k]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Exact Hopf–Lax solution for radial and plane data:
/// `min {u0(x - t v) : v in K}` (convex) or `max {u0(x + t v) : v in K}`
/// (concave).
pub fn solve_effective_hopflax(
    h: &EffectiveHamiltonian,
    u0: &InitialData,
    grid: &XGrid,
    t: f64,
) -> Result<GridFunction> {
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let hull: Vec<[f64; 2]> = h.wulff.hull.iter().map(|v| [t * v[0], t * v[1]]).collect();
    let verts = hull.clone();
    let mut out = GridFunction::from_fn(*grid, |x| {
        if t == 0.0 || h.kind == HamiltonianKind::Zero {
            return u0.eval(x);
        }
        match *u0 {
            InitialData::Plane { p } => u0.eval(x) - t * h.eval(p),
            InitialData::Cone { center, .. } | InitialData::Bump { center, .. } => {
                let q = [x[0] - center[0], x[1] - center[1]];
                let r = match h.kind {
                    HamiltonianKind::Convex => distance_to_polygon(q, &hull),
                    // farthest point of q + tK from the origin
                    _ => verts
                        .iter()
                        .map(|v| (q[0] + v[0]).hypot(q[1] + v[1]))
                        .fold(0.0, f64::max),
                };
                u0.radial(r)
            }
        }
    });
    out.t = t;
    Ok(out)
}

/// Hopf–Lax on a grid function by sampling `tK` on `rings` scaled copies of
/// its boundary, `per_edge` points per edge, plus the origin.
pub fn hopflax_grid(
    h: &EffectiveHamiltonian,
    u0: &GridFunction,
    t: f64,
    rings: usize,
    per_edge: usize,
) -> Result<GridFunction> {
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    if h.kind == HamiltonianKind::Zero || t == 0.0 {
        let mut out = u0.clone();
        out.t = u0.t + t;
        return Ok(out);
    }
    let hull = &h.wulff.hull;
    let mut pts = vec![[0.0, 0.0]];
    let rings = rings.max(1);
    let per_edge = per_edge.max(1);
    for k in 1..=rings {
        let s = t * k as f64 / rings as f64;
        for i in 0..hull.len() {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            for j in 0..per_edge {
                let w = j as f64 / per_edge as f64;
                pts.push([
                    s * (a[0] + w * (b[0] - a[0])),
                    s * (a[1] + w * (b[1] - a[1])),
                ]);
            }
        }
    }
    let convex = h.kind == HamiltonianKind::Convex;
    let grid = u0.grid;
    let values = (0..grid.shape.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let it = pts.iter().map(|v| {
                if convex {
                    grid.sample(&u0.values, [x[0] - v[0], x[1] - v[1]])
                } else {
                    grid.sample(&u0.values, [x[0] + v[0], x[1] + v[1]])
                }
            });
            if convex {
                it.fold(f64::INFINITY, f64::min)
            } else {
                it.fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect();
    Ok(GridFunction {
        grid,
        values,
        t: u0.t + t,
        epsilon: None,
        cfl: 0.0,
    })
}
