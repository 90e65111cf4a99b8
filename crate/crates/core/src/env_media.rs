//! Stationary random media on a finite periodic box and the signed,
//! capped-distance velocity built from them.
//!
//! Every generator first produces a phase mask (`true` = obstacle, the closed
//! set `F`), then derives the velocity from the exact Euclidean distance `D`
//! between a cell center and the nearest center of the opposite phase:
//!
//! ```text
//! a = +min(max(D - h, 0), 1/2)   outside the obstacles
//! a = -min(max(D - h, 0), 1/2)   inside the obstacles
//! ```
//!
//! The `- h` shift puts every cell that touches the other phase on the zero
//! set and keeps `a` 1-Lipschitz across the interface. Distances are taken on
//! the torus so that lattice translations act exactly.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::distance::distance_to_sites;
use crate::error::{Error, Result};
use crate::grid::{GridShape, ScalarGrid};

/// Cap applied to the distance function.
pub const VELOCITY_CAP: f64 = 0.5;

/// Expected Poisson point counts above this are refused.
pub const MAX_POISSON_POINTS: f64 = 1e7;

const LATTICE_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum RadiusLaw {
    Fixed(f64),
    /// i.i.d. uniform radii on `[min, max]`.
    Uniform {
        min: f64,
        max: f64,
    },
}

impl RadiusLaw {
    pub fn max_radius(&self) -> f64 {
        match *self {
            RadiusLaw::Fixed(r) => r,
            RadiusLaw::Uniform { max, .. } => max,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            RadiusLaw::Fixed(r) => r,
            RadiusLaw::Uniform { min, max } => min + (max - min) * rng.random::<f64>(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MediumKind {
    /// Unit cubes painted open with probability `p`.
    SitePercolation { p: f64 },
    /// Union of balls centered on a Poisson point process.
    PoissonCloud { intensity: f64, radius: RadiusLaw },
    /// Alternating open/obstacle squares of side `period`.
    Checkerboard { period: f64 },
    /// Unit cubes that are empty with probability `p`, otherwise hold a
    /// centered ball of the given radius.
    IsolatedObstacles { p: f64, radius: f64 },
    /// Externally supplied velocity (test fields, 1D oracles).
    Custom { name: String },
}

impl MediumKind {
    pub fn name(&self) -> &str {
        match self {
            MediumKind::SitePercolation { .. } => "site_percolation",
            MediumKind::PoissonCloud { .. } => "poisson_cloud",
            MediumKind::Checkerboard { .. } => "checkerboard",
            MediumKind::IsolatedObstacles { .. } => "isolated_obstacles",
            MediumKind::Custom { .. } => "custom",
        }
    }

    fn parameters(&self) -> Vec<(&'static str, String)> {
        match self {
            MediumKind::SitePercolation { p } => vec![("p", p.to_string())],
            MediumKind::PoissonCloud { intensity, radius } => {
                let mut v = vec![("intensity", intensity.to_string())];
                match radius {
                    RadiusLaw::Fixed(r) => v.push(("radius", r.to_string())),
                    RadiusLaw::Uniform { min, max } => {
                        v.push(("radius_min", min.to_string()));
                        v.push(("radius_max", max.to_string()));
                    }
                }
                v
            }
            MediumKind::Checkerboard { period } => vec![("period", period.to_string())],
            MediumKind::IsolatedObstacles { p, radius } => {
                vec![("p", p.to_string()), ("radius", radius.to_string())]
            }
            MediumKind::Custom { name } => vec![("name", name.clone())],
        }
    }
}

/// One realization of the random environment.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentSample {
    pub shape: GridShape,
    pub seed: u64,
    pub kind: MediumKind,
    /// `true` on cells of the obstacle set.
    pub obstacle_mask: Vec<bool>,
    pub a_field: Vec<f64>,
    pub lipschitz_l: f64,
    /// Number of Poisson points drawn, when applicable.
    pub point_count: Option<usize>,
}

impl EnvironmentSample {
    /// Wraps an arbitrary velocity; the obstacle set is `{a < 0}`.
    pub fn from_field(
        shape: GridShape,
        a_field: Vec<f64>,
        lipschitz_l: f64,
        name: &str,
    ) -> Result<Self> {
        if a_field.len() != shape.len() {
            return Err(Error::Parameter(format!(
                "velocity has {} values for a {}-cell grid",
                a_field.len(),
                shape.len()
            )));
        }
        if a_field.iter().any(|a| !a.is_finite()) {
            return Err(Error::Parameter("velocity must be finite".into()));
        }
        Ok(Self {
            shape,
            seed: 0,
            kind: MediumKind::Custom {
                name: name.to_string(),
            },
            obstacle_mask: a_field.iter().map(|&a| a < 0.0).collect(),
            a_field,
            lipschitz_l,
            point_count: None,
        })
    }

    /// Constant velocity `c` on the whole box.
    pub fn constant(shape: GridShape, c: f64) -> Result<Self> {
        Self::from_field(shape, vec![c; shape.len()], 1.0, "constant")
    }

    pub fn velocity(&self) -> ScalarGrid {
        ScalarGrid {
            shape: self.shape,
            values: self.a_field.clone(),
        }
    }

    pub fn max_abs_velocity(&self) -> f64 {
        self.a_field.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// Translation period of the medium, in cells.
    pub fn lattice_cells(&self) -> usize {
        let unit = match self.kind {
            MediumKind::SitePercolation { .. } | MediumKind::IsolatedObstacles { .. } => 1.0,
            MediumKind::Checkerboard { period } => 2.0 * period,
            MediumKind::PoissonCloud { .. } | MediumKind::Custom { .. } => return 1,
        };
        (unit / self.shape.h).round() as usize
    }

    /// Largest `|a(x) - a(y)| / |x - y|` over 4- and diagonal-neighbor pairs
    /// inside the box.
    pub fn max_adjacent_slope(&self) -> f64 {
        let s = &self.shape;
        let mut worst = 0.0f64;
        for r in 0..s.rows {
            for c in 0..s.cols {
                let i = s.index(r, c);
                for (dr, dc) in [(0isize, 1isize), (1, 0), (1, 1), (1, -1)] {
                    if let Some(j) = s.offset(r as isize + dr, c as isize + dc) {
                        let len = s.h * ((dr * dr + dc * dc) as f64).sqrt();
                        worst = worst.max((self.a_field[i] - self.a_field[j]).abs() / len);
                    }
                }
            }
        }
        worst
    }

    /// Whether `{a > 0}` and `{a < 0}` are both nonempty.
    pub fn changes_sign(&self) -> bool {
        self.a_field.iter().any(|&a| a > 0.0) && self.a_field.iter().any(|&a| a < 0.0)
    }

    /// Rectangular crop; `origin` is the top-left cell `(row, col)`.
    pub fn window(&self, origin: (usize, usize), rows: usize, cols: usize) -> Result<Self> {
        if origin.0 + rows > self.shape.rows || origin.1 + cols > self.shape.cols {
            return Err(Error::Parameter("window exceeds the box".into()));
        }
        let shape = GridShape::new(rows, cols, self.shape.h)?;
        let mut a_field = Vec::with_capacity(shape.len());
        let mut obstacle_mask = Vec::with_capacity(shape.len());
        for r in 0..rows {
            for c in 0..cols {
                let i = self.shape.index(origin.0 + r, origin.1 + c);
                a_field.push(self.a_field[i]);
                obstacle_mask.push(self.obstacle_mask[i]);
            }
        }
        Ok(Self {
            shape,
            seed: self.seed,
            kind: self.kind.clone(),
            obstacle_mask,
            a_field,
            lipschitz_l: self.lipschitz_l,
            point_count: None,
        })
    }

    /// Centered square crop with `cells` cells per side.
    pub fn central_window(&self, cells: usize) -> Result<Self> {
        if cells > self.shape.rows || cells > self.shape.cols {
            return Err(Error::Parameter("window exceeds the box".into()));
        }
        let r0 = (self.shape.rows - cells) / 2;
        let c0 = (self.shape.cols - cells) / 2;
        self.window((r0, c0), cells, cells)
    }

    /// Writes the velocity as FHL1 plus a `key,value` CSV sidecar.
    pub fn write(&self, grid_path: impl AsRef<Path>, meta_path: impl AsRef<Path>) -> Result<()> {
        self.velocity().write_fhl1(grid_path)?;
        let mut w = csv::Writer::from_path(meta_path)?;
        w.write_record(["key", "value"])?;
        w.write_record(["seed", &self.seed.to_string()])?;
        w.write_record(["kind", self.kind.name()])?;
        for (k, v) in self.kind.parameters() {
            w.write_record([k, v.as_str()])?;
        }
        w.write_record(["rows", &self.shape.rows.to_string()])?;
        w.write_record(["cols", &self.shape.cols.to_string()])?;
        w.write_record(["cell_h", &self.shape.h.to_string()])?;
        w.write_record(["lipschitz_l", &self.lipschitz_l.to_string()])?;
        if let Some(n) = self.point_count {
            w.write_record(["point_count", &n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Cells per length unit; errors unless `1/h` is (numerically) an integer.
fn cells_per_unit(cell_h: f64) -> Result<usize> {
    if !(cell_h > 0.0 && cell_h <= 1.0) {
        return Err(Error::Parameter(format!(
            "cell size {cell_h} must lie in (0, 1]"
        )));
    }
    let m = (1.0 / cell_h).round();
    if ((1.0 / cell_h) - m).abs() > LATTICE_EPS * m {
        return Err(Error::Parameter(format!(
            "1/cell_h must be an integer, got {}",
            1.0 / cell_h
        )));
    }
    Ok(m as usize)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Independent uniform draw keyed by `(seed, cube)`. Cube coordinates are
/// taken relative to the box center, so concentric boxes with the same seed
/// share their central cubes.
fn keyed_uniform(seed: u64, rel_row: i64, rel_col: i64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = ((rel_row as u32 as u64) << 32) | (rel_col as u32 as u64);
    rng.set_stream(key);
    rng.random::<f64>()
}

/// Open/closed state of every unit cube of an `n x n` cube lattice.
pub fn draw_open_cubes(n_cubes: usize, p: f64, seed: u64) -> Vec<bool> {
    let half = (n_cubes / 2) as i64;
    let mut open = Vec::with_capacity(n_cubes * n_cubes);
    for i in 0..n_cubes as i64 {
        for j in 0..n_cubes as i64 {
            open.push(keyed_uniform(seed, i - half, j - half) < p);
        }
    }
    open
}

/// Signed, capped velocity from an obstacle mask on the torus.
pub fn velocity_from_mask(shape: &GridShape, obstacle: &[bool]) -> Vec<f64> {
    let horizon = VELOCITY_CAP + 2.0 * shape.h;
    let open: Vec<bool> = obstacle.iter().map(|&b| !b).collect();
    let to_obstacle = distance_to_sites(shape, obstacle, horizon, true);
    let to_open = distance_to_sites(shape, &open, horizon, true);
    obstacle
        .iter()
        .enumerate()
        .map(|(i, &closed)| {
            let d = if closed { to_open[i] } else { to_obstacle[i] };
            let mag = (d - shape.h).clamp(0.0, VELOCITY_CAP);
            if closed {
                -mag
            } else {
                mag
            }
        })
        .collect()
}

fn assemble(
    shape: GridShape,
    seed: u64,
    kind: MediumKind,
    obstacle_mask: Vec<bool>,
) -> EnvironmentSample {
    let a_field = velocity_from_mask(&shape, &obstacle_mask);
    EnvironmentSample {
        shape,
        seed,
        kind,
        obstacle_mask,
        a_field,
        lipschitz_l: 1.0,
        point_count: None,
    }
}

/// Bernoulli site percolation on unit cubes; `grid_size` counts cells per side.
pub fn gen_site_percolation(
    p: f64,
    grid_size: usize,
    cell_h: f64,
    seed: u64,
) -> Result<EnvironmentSample> {
    check_probability(p)?;
    if grid_size < 2 {
        return Err(Error::Parameter("grid_size must be at least 2".into()));
    }
    let m = cells_per_unit(cell_h)?;
    if !grid_size.is_multiple_of(m) {
        return Err(Error::Parameter(format!(
            "grid_size {grid_size} is not a whole number of unit cubes ({m} cells each)"
        )));
    }
    let n_cubes = grid_size / m;
    let open = draw_open_cubes(n_cubes, p, seed);
    let shape = GridShape::square(grid_size, cell_h)?;
    let mask = (0..shape.len())
        .map(|i| {
            let (r, c) = shape.coords(i);
            !open[(r / m) * n_cubes + c / m]
        })
        .collect();
    Ok(assemble(
        shape,
        seed,
        MediumKind::SitePercolation { p },
        mask,
    ))
}

/// Unit cubes that are empty with probability `p`, otherwise contain a closed
/// ball of radius `radius < 1/2` at the cube center.
pub fn gen_isolated_obstacles(
    p: f64,
    radius: f64,
    grid_size: usize,
    cell_h: f64,
    seed: u64,
) -> Result<EnvironmentSample> {
    check_probability(p)?;
    if !(radius > 0.0 && radius < 0.5) {
        return Err(Error::Parameter(format!(
            "ball radius {radius} must lie in (0, 1/2)"
        )));
    }
    let m = cells_per_unit(cell_h)?;
    if grid_size < 2 || !grid_size.is_multiple_of(m) {
        return Err(Error::Parameter(format!(
            "grid_size {grid_size} is not a whole number of unit cubes ({m} cells each)"
        )));
    }
    let n_cubes = grid_size / m;
    let open = draw_open_cubes(n_cubes, p, seed);
    let shape = GridShape::square(grid_size, cell_h)?;
    let mask = (0..shape.len())
        .map(|i| {
            let (r, c) = shape.coords(i);
            if open[(r / m) * n_cubes + c / m] {
                return false;
            }
            let [x, y] = shape.center(i);
            let cx = (c / m) as f64 + 0.5;
            let cy = (r / m) as f64 + 0.5;
            (x - cx).hypot(y - cy) <= radius
        })
        .collect();
    Ok(assemble(
        shape,
        seed,
        MediumKind::IsolatedObstacles { p, radius },
        mask,
    ))
}

/// Union of balls `B_r(x_i)` with `x_i` a Poisson process of the given
/// intensity on the periodic box `[0, box_size)^2`.
pub fn gen_poisson_cloud(
    intensity: f64,
    radius: RadiusLaw,
    box_size: f64,
    cell_h: f64,
    seed: u64,
) -> Result<EnvironmentSample> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(Error::Parameter(format!(
            "intensity {intensity} must be positive"
        )));
    }
    if !(box_size > 0.0 && cell_h > 0.0) {
        return Err(Error::Parameter(
            "box and cell size must be positive".into(),
        ));
    }
    let r_max = radius.max_radius();
    let r_min = match radius {
        RadiusLaw::Fixed(r) => r,
        RadiusLaw::Uniform { min, .. } => min,
    };
    if !(r_min > 0.0 && r_max < box_size / 4.0 && r_min <= r_max) {
        return Err(Error::Parameter(format!(
            "radius law must lie in (0, box_size/4) = (0, {})",
            box_size / 4.0
        )));
    }
    let expected = intensity * box_size * box_size;
    if expected > MAX_POISSON_POINTS {
        return Err(Error::Resource(format!(
            "expected {expected:.3e} Poisson points"
        )));
    }
    let n = (box_size / cell_h).round() as usize;
    if n < 2 || ((n as f64) * cell_h - box_size).abs() > LATTICE_EPS * box_size {
        return Err(Error::Parameter(
            "box_size must be a whole number of cells".into(),
        ));
    }
    let shape = GridShape::square(n, cell_h)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = Poisson::new(expected)
        .map_err(|e| Error::Parameter(e.to_string()))?
        .sample(&mut rng) as usize;
    let mut mask = vec![false; shape.len()];
    for _ in 0..count {
        let cx = box_size * rng.random::<f64>();
        let cy = box_size * rng.random::<f64>();
        let r = radius.sample(&mut rng);
        stamp_periodic_ball(&shape, &mut mask, [cx, cy], r);
    }
    let mut env = assemble(
        shape,
        seed,
        MediumKind::PoissonCloud { intensity, radius },
        mask,
    );
    env.point_count = Some(count);
    Ok(env)
}

/// Marks every cell whose center lies in the closed ball (periodic metric).
pub fn stamp_periodic_ball(shape: &GridShape, mask: &mut [bool], center: [f64; 2], r: f64) {
    let h = shape.h;
    let span = (r / h).ceil() as isize + 1;
    let c0 = (center[0] / h - 0.5).round() as isize;
    let r0 = (center[1] / h - 0.5).round() as isize;
    let (lx, ly) = (shape.width(), shape.height());
    for dr in -span..=span {
        for dc in -span..=span {
            let rr = (r0 + dr).rem_euclid(shape.rows as isize) as usize;
            let cc = (c0 + dc).rem_euclid(shape.cols as isize) as usize;
            let [x, y] = shape.center(shape.index(rr, cc));
            let mut dx = (x - center[0]).abs();
            let mut dy = (y - center[1]).abs();
            dx = dx.min(lx - dx);
            dy = dy.min(ly - dy);
            if dx.hypot(dy) <= r {
                mask[shape.index(rr, cc)] = true;
            }
        }
    }
}

/// Periodic checkerboard; the square containing the origin is open.
pub fn gen_checkerboard(period: f64, grid_size: usize, cell_h: f64) -> Result<EnvironmentSample> {
    if !(period > 0.0) {
        return Err(Error::Parameter(format!(
            "period {period} must be positive"
        )));
    }
    let per_cells = period / cell_h;
    let k = per_cells.round();
    if k < 1.0 || (per_cells - k).abs() > LATTICE_EPS * k {
        return Err(Error::Parameter(
            "period must be a whole number of cells".into(),
        ));
    }
    let k = k as usize;
    if !grid_size.is_multiple_of(2 * k) {
        return Err(Error::Parameter(format!(
            "box of {grid_size} cells is not a whole number of checkerboard periods ({} cells)",
            2 * k
        )));
    }
    let shape = GridShape::square(grid_size, cell_h)?;
    let mask = (0..shape.len())
        .map(|i| {
            let (r, c) = shape.coords(i);
            (r / k + c / k) % 2 == 1
        })
        .collect();
    Ok(assemble(
        shape,
        0,
        MediumKind::Checkerboard { period },
        mask,
    ))
}

/// Continuum checkerboard velocity `±min(dist(x, grid lines), 1/2)`.
pub fn checkerboard_velocity(x: [f64; 2], period: f64) -> f64 {
    let fx = x[0] / period;
    let fy = x[1] / period;
    let dist_lines = period * (fx - fx.round()).abs().min((fy - fy.round()).abs());
    let mag = dist_lines.min(VELOCITY_CAP);
    let parity = (fx.floor() as i64 + fy.floor() as i64).rem_euclid(2);
    if parity == 0 {
        mag
    } else {
        -mag
    }
}

/// Periodic lattice shift: the returned field satisfies `a'(x) = a(x + z)`.
pub fn translate_sample(env: &EnvironmentSample, z: (isize, isize)) -> Result<EnvironmentSample> {
    let lattice = env.lattice_cells() as isize;
    if z.0 % lattice != 0 || z.1 % lattice != 0 {
        return Err(Error::Parameter(format!(
            "shift {z:?} is not a multiple of the {lattice}-cell lattice"
        )));
    }
    let s = env.shape;
    let mut out = env.clone();
    for r in 0..s.rows {
        for c in 0..s.cols {
            let sr = (r as isize + z.0).rem_euclid(s.rows as isize) as usize;
            let sc = (c as isize + z.1).rem_euclid(s.cols as isize) as usize;
            let (dst, src) = (s.index(r, c), s.index(sr, sc));
            out.a_field[dst] = env.a_field[src];
            out.obstacle_mask[dst] = env.obstacle_mask[src];
        }
    }
    Ok(out)
}
