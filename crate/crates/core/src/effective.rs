//! Effective Hamiltonian by convex duality.
//!
//! With `m̄_mu = mu m̄₁`, the inf-formula for `H̄` reduces to a support
//! function: `H̄(p) = max_d p · v_d` where `v_d = y_d / m̄₁(y_d)` are the
//! vertices of the Wulff set `K = {m̄₁ <= 1}` sampled along the fan.
//! Going back, `m̄_mu(y) = sup {y · q : H̄(q) <= mu} = mu gauge_K(y)`, which
//! is evaluated on the convex hull of the vertices.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::averaging::AveragedMetric;
use crate::error::{Error, Result};
use crate::metric::TravelTimeField;
use crate::topology::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HamiltonianKind {
    /// Unbounded component of `{a > 0}`: convex, nonnegative.
    Convex,
    /// Unbounded component of `{a < 0}`: concave, nonpositive.
    Concave,
    /// Bounded component: `H̄ = 0`.
    Zero,
}

impl HamiltonianKind {
    pub fn as_str(self) -> &'static str {
        match self {
            HamiltonianKind::Convex => "convex",
            HamiltonianKind::Concave => "concave",
            HamiltonianKind::Zero => "zero",
        }
    }
}

/// Polygonal Wulff set.
#[derive(Clone, Debug, PartialEq)]
pub struct WulffSet {
    /// `y_d / m̄₁(y_d)` in fan order.
    pub vertices: Vec<[f64; 2]>,
    /// Convex hull of the vertices, counterclockwise, no collinear points.
    pub hull: Vec<[f64; 2]>,
}

impl WulffSet {
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        let hull = convex_hull(&vertices);
        Self { vertices, hull }
    }

    /// Support function `max_v p · v` over the vertices.
    pub fn support(&self, p: [f64; 2]) -> f64 {
        self.vertices
            .iter()
            .map(|v| p[0] * v[0] + p[1] * v[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Polar description of the hull: edge normals `n` and offsets `c` with
    /// `K = {x : n · x <= c}`.
    fn halfplanes(&self) -> Vec<([f64; 2], f64)> {
        let k = self.hull.len();
        (0..k)
            .map(|i| {
                let a = self.hull[i];
                let b = self.hull[(i + 1) % k];
                let n = [b[1] - a[1], a[0] - b[0]];
                (n, n[0] * a[0] + n[1] * a[1])
            })
            .collect()
    }

    /// Minkowski gauge `inf {s > 0 : y in s K}`; `+inf` outside the cone of
    /// `K` when the origin is on its boundary.
    pub fn gauge(&self, y: [f64; 2]) -> f64 {
        if self.hull.len() < 3 {
            return if y == [0.0, 0.0] { 0.0 } else { f64::INFINITY };
        }
        let mut g: f64 = 0.0;
        for (n, c) in self.halfplanes() {
            let ny = n[0] * y[0] + n[1] * y[1];
            if c > 0.0 {
                g = g.max(ny / c);
            } else if ny > 0.0 {
                return f64::INFINITY;
            }
        }
        g
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveHamiltonian {
    pub component_id: Option<u32>,
    pub kind: HamiltonianKind,
    /// Fan directions and the level-one metric they came from (empty for the
    /// zero branch).
    pub directions: Vec<[f64; 2]>,
    pub mbar1: Vec<f64>,
    pub wulff: WulffSet,
}

impl EffectiveHamiltonian {
    /// `H̄ = 0`, used for bounded components.
    pub fn zero(component_id: Option<u32>) -> Self {
        Self {
            component_id,
            kind: HamiltonianKind::Zero,
            directions: Vec::new(),
            mbar1: Vec::new(),
            wulff: WulffSet::new(Vec::new()),
        }
    }

    /// Isotropic `H̄(p) = c |p|`, sampled on `n` fan directions.
    pub fn isotropic(c: f64, n: usize) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Parameter(format!("speed must be positive, got {c}")));
        }
        let dirs: Vec<[f64; 2]> = crate::averaging::fan(n).into_iter().map(|d| d.1).collect();
        let m = vec![1.0 / c; n];
        effective_from_profile(None, HamiltonianKind::Convex, dirs, m)
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match self.kind {
            HamiltonianKind::Zero => 0.0,
            HamiltonianKind::Convex => self.wulff.support(p),
            HamiltonianKind::Concave => -self.wulff.support(p),
        }
    }

    /// Largest `|H̄(p)| / |p|`.
    pub fn max_speed(&self) -> f64 {
        self.wulff
            .vertices
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }

    /// CSV `angle,mbar1,wulff_x,wulff_y`.
    pub fn write_profile_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["angle", "mbar1", "wulff_x", "wulff_y"])?;
        for ((d, m), v) in self
            .directions
            .iter()
            .zip(&self.mbar1)
            .zip(&self.wulff.vertices)
        {
            w.write_record([
                d[1].atan2(d[0]).to_string(),
                m.to_string(),
                v[0].to_string(),
                v[1].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// CSV `px,py,hbar` on the square `[-r, r]^2` with `n` points per side.
    pub fn write_grid_csv(&self, path: impl AsRef<Path>, r: f64, n: usize) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["px", "py", "hbar"])?;
        let step = if n > 1 { 2.0 * r / (n - 1) as f64 } else { 0.0 };
        for i in 0..n {
            for j in 0..n {
                let p = [-r + j as f64 * step, -r + i as f64 * step];
                w.write_record([p[0].to_string(), p[1].to_string(), self.eval(p).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Closed hull polygon `x,y` for plotting.
    pub fn write_polygon_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x", "y"])?;
        for v in self.wulff.hull.iter().chain(self.wulff.hull.first()) {
            w.write_record([v[0].to_string(), v[1].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Effective Hamiltonian from a per-direction level-one metric.
pub fn effective_from_profile(
    component_id: Option<u32>,
    kind: HamiltonianKind,
    directions: Vec<[f64; 2]>,
    mbar1: Vec<f64>,
) -> Result<EffectiveHamiltonian> {
    if directions.len() != mbar1.len() || directions.is_empty() {
        return Err(Error::Data("profile needs one value per direction".into()));
    }
    if let Some((d, m)) = mbar1
        .iter()
        .enumerate()
        .find(|(_, m)| !(**m > 0.0 && m.is_finite()))
    {
        return Err(Error::Data(format!(
            "mbar1 must be positive and finite, direction {d} has {m}"
        )));
    }
    let vertices = directions
        .iter()
        .zip(&mbar1)
        .map(|(y, m)| [y[0] / m, y[1] / m])
        .collect();
    Ok(EffectiveHamiltonian {
        component_id,
        kind,
        directions,
        mbar1,
        wulff: WulffSet::new(vertices),
    })
}

/// `H̄(p) = max_d (p · y_d) / m̄₁(y_d)`; a negative phase gives the
/// reflected, concave Hamiltonian.
pub fn effective_from_mbar(
    avg: &AveragedMetric,
    sign: Sign,
    component_id: Option<u32>,
) -> Result<EffectiveHamiltonian> {
    let kind = match sign {
        Sign::Positive => HamiltonianKind::Convex,
        Sign::Negative => HamiltonianKind::Concave,
    };
    effective_from_profile(
        component_id,
        kind,
        avg.directions.clone(),
        avg.mbar1.clone(),
    )
}

/// `m̄_mu` recovered from `H̄` along the given directions.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricProfile {
    pub directions: Vec<[f64; 2]>,
    pub mu: f64,
    /// `+inf` where the sublevel set of `H̄` is unbounded in that direction.
    pub values: Vec<f64>,
}

impl MetricProfile {
    pub fn unbounded(&self) -> bool {
        self.values.iter().any(|v| v.is_infinite())
    }
}

/// `m̄_mu(y) = sup {y · q : |H̄(q)| <= mu} = mu gauge_K(y)` over the polar
/// polygon (for the concave case the level is taken on `|H̄|`).
pub fn mbar_from_effective(
    h: &EffectiveHamiltonian,
    directions: &[[f64; 2]],
    mu: f64,
) -> Result<MetricProfile> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    let values = directions
        .iter()
        .map(|&y| match h.kind {
            HamiltonianKind::Zero => f64::INFINITY,
            _ => mu * h.wulff.gauge(y),
        })
        .collect();
    Ok(MetricProfile {
        directions: directions.to_vec(),
        mu,
        values,
    })
}

/// Maximizing fan direction for `p` with its optimality certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subgradient {
    pub index: usize,
    pub direction: [f64; 2],
    /// `|H̄(p)|`.
    pub level: f64,
    /// `|p · y* - m̄_level(y*)|`.
    pub equality_defect: f64,
    /// `max_d p · y_d - m̄_level(y_d)` (nonpositive when certified).
    pub max_violation: f64,
}

/// Direction `y*` maximizing `p · y / m̄₁(y)` over the fan; ties go to the
/// lowest index.
pub fn subgradient_direction(h: &EffectiveHamiltonian, p: [f64; 2]) -> Result<Subgradient> {
    let level = h.eval(p).abs();
    if h.kind == HamiltonianKind::Zero || !(level > 0.0) {
        return Err(Error::Domain(format!(
            "H̄(p) = 0 at p = {p:?}; subgradient undefined"
        )));
    }
    let sign = if h.kind == HamiltonianKind::Concave {
        -1.0
    } else {
        1.0
    };
    let score =
        |d: usize| sign * (p[0] * h.directions[d][0] + p[1] * h.directions[d][1]) / h.mbar1[d];
    let mut best = 0;
    for d in 1..h.directions.len() {
        if score(d) > score(best) {
            best = d;
        }
    }
    let y = h.directions[best];
    let py = |y: [f64; 2]| sign * (p[0] * y[0] + p[1] * y[1]);
    let max_violation = (0..h.directions.len())
        .map(|d| py(h.directions[d]) - level * h.mbar1[d])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Subgradient {
        index: best,
        direction: y,
        level,
        equality_defect: (py(y) - level * h.mbar1[best]).abs(),
        max_violation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexityReport {
    pub h_at_zero: f64,
    /// Largest `|H̄(2p) - 2 H̄(p)|`.
    pub homogeneity_defect: f64,
    /// Largest `H̄((p+q)/2) - (H̄(p)+H̄(q))/2` (convex) or its negative
    /// (concave), relative to `max(|H̄(p)|, |H̄(q)|, 1)`.
    pub midpoint_defect: f64,
    /// Sign constraint `H̄ >= 0` (convex) or `H̄ <= 0` (concave) on all samples.
    pub sign_ok: bool,
    pub pairs: usize,
}

impl ConvexityReport {
    /// All invariants hold up to a few ulps.
    pub fn holds(&self) -> bool {
        self.h_at_zero == 0.0
            && self.homogeneity_defect == 0.0
            && self.midpoint_defect <= 4.0 * f64::EPSILON
            && self.sign_ok
    }
}

/// Checks `H̄(0) = 0`, homogeneity with `λ = 2`, midpoint convexity and the
/// sign on `pairs` random pairs in `[-1, 1]^2`.
pub fn verify_convex_homogeneous(
    h: &EffectiveHamiltonian,
    pairs: usize,
    seed: u64,
) -> ConvexityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sign = if h.kind == HamiltonianKind::Concave {
        -1.0
    } else {
        1.0
    };
    let mut hom: f64 = 0.0;
    let mut mid = f64::NEG_INFINITY;
    let mut sign_ok = true;
    for _ in 0..pairs {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let q = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let (hp, hq) = (h.eval(p), h.eval(q));
        hom = hom.max((h.eval([2.0 * p[0], 2.0 * p[1]]) - 2.0 * hp).abs());
        let m = h.eval([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
        let scale = hp.abs().max(hq.abs()).max(1.0);
        mid = mid.max(sign * (m - 0.5 * (hp + hq)) / scale);
        sign_ok &= sign * hp >= 0.0 && sign * hq >= 0.0;
    }
    ConvexityReport {
        h_at_zero: h.eval([0.0, 0.0]),
        homogeneity_defect: hom,
        midpoint_defect: mid,
        sign_ok,
        pairs,
    }
}

/// `min (m_mu(y, z) - p · (y - z)) / |y - z|` over reachable cells with
/// `|y - z| >= far_radius`. `m_mu` is the level-one field scaled by `mu`.
pub fn sublinearity_statistic(
    field: &TravelTimeField,
    mu: f64,
    p: [f64; 2],
    far_radius: f64,
) -> f64 {
    let z = field.source_position();
    let scale = mu / field.mu;
    let mut stat = f64::INFINITY;
    for (i, &m) in field.values.iter().enumerate() {
        if !m.is_finite() {
            continue;
        }
        let y = field.shape.center(i);
        let d = [y[0] - z[0], y[1] - z[1]];
        let r = d[0].hypot(d[1]);
        if r < far_radius {
            continue;
        }
        stat = stat.min((scale * m - p[0] * d[0] - p[1] * d[1]) / r);
    }
    stat
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_duality() {
        let h = EffectiveHamiltonian::isotropic(0.5, 64).unwrap();
        for th in [0.0f64, 0.3, 1.0, 2.5] {
            let p = [th.cos() * 3.0, th.sin() * 3.0];
            // the 64-gon support function is within cos(pi/64) of the disk's
            let v = h.eval(p);
            assert!(v <= 1.5 + 1e-12 && v >= 1.5 * (std::f64::consts::PI / 64.0).cos() - 1e-12);
        }
        let prof = mbar_from_effective(&h, &h.directions, 1.0).unwrap();
        for v in &prof.values {
            assert_relative_eq!(*v, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
            [0.5, 0.0],
        ];
        let hull = convex_hull(&pts);
        assert_eq!(hull, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
    }

    #[test]
    fn zero_branch() {
        let h = EffectiveHamiltonian::zero(Some(3));
        assert_eq!(h.eval([1.0, -2.0]), 0.0);
        let prof = mbar_from_effective(&h, &[[1.0, 0.0]], 1.0).unwrap();
        assert!(prof.unbounded());
        assert!(subgradient_direction(&h, [1.0, 0.0]).is_err());
    }

    #[test]
    fn nonpositive_profile_is_a_data_error() {
        let dirs = vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];
        assert!(matches!(
            effective_from_profile(None, HamiltonianKind::Convex, dirs, vec![1.0, 0.0, 1.0]),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn isotropic_subgradient_is_aligned() {
        let h = EffectiveHamiltonian::isotropic(0.5, 64).unwrap();
        let th = 2.0 * std::f64::consts::PI * 5.0 / 64.0;
        let p = [th.cos(), th.sin()];
        let s = subgradient_direction(&h, p).unwrap();
        assert_eq!(s.index, 5);
        assert!(s.max_violation <= 1e-12 && s.equality_defect <= 1e-12);
        // exact tie between the first two directions goes to index 0
        let dirs = vec![[0.0, 1.0], [1.0, 0.0], [0.0, -1.0], [-1.0, 0.0]];
        let sq = effective_from_profile(None, HamiltonianKind::Convex, dirs, vec![2.0; 4]).unwrap();
        assert_eq!(subgradient_direction(&sq, [1.0, 1.0]).unwrap().index, 0);
    }

    #[test]
    fn concave_reflection() {
        let h = EffectiveHamiltonian::isotropic(0.5, 32).unwrap();
        let c = EffectiveHamiltonian {
            kind: HamiltonianKind::Concave,
            ..h.clone()
        };
        assert_eq!(c.eval([0.3, 0.4]), -h.eval([0.3, 0.4]));
        assert!(verify_convex_homogeneous(&c, 100, 1).holds());
    }
}
