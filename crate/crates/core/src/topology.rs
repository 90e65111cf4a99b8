//! Connected components of `{a > 0}` and `{a < 0}`, their δ-interiors,
//! spanning detection, volume fractions and gap statistics along rays.
//!
//! Both phases use 4-connectivity: open squares of a checkerboard touch only
//! at corners, which lie on the zero set.

use std::collections::BTreeMap;
use std::path::Path;

use petgraph::unionfind::UnionFind;

use crate::env_media::EnvironmentSample;
use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::ray::{exit_parameter, supercover};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(a: f64) -> Option<Sign> {
        if a > 0.0 {
            Some(Sign::Positive)
        } else if a < 0.0 {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    /// 1-based id; label `0` is reserved for the zero set.
    pub id: u32,
    pub sign: Sign,
    pub cells: Vec<usize>,
    /// Touches two opposite faces of the box.
    pub spanning: bool,
    /// Largest δ such that every `U^δ'` with `δ' < δ` is 4-connected.
    pub delta0: f64,
    /// Number of 4-connected pieces of the retained cells.
    pub pieces: usize,
}

impl Component {
    pub fn is_connected(&self) -> bool {
        self.pieces <= 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentLabeling {
    pub shape: GridShape,
    /// Component id per cell, `0` where the cell is not retained.
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
    /// Threshold used for the retained cells (`0` for the full labeling).
    pub delta: f64,
}

impl ComponentLabeling {
    pub fn component(&self, id: u32) -> Option<&Component> {
        id.checked_sub(1)
            .and_then(|k| self.components.get(k as usize))
    }

    #[inline]
    pub fn label(&self, cell: usize) -> u32 {
        self.labels[cell]
    }

    /// Largest spanning component of the given sign.
    pub fn largest_spanning(&self, sign: Sign) -> Option<&Component> {
        self.components
            .iter()
            .filter(|c| c.sign == sign && c.spanning)
            .max_by_key(|c| (c.cells.len(), std::cmp::Reverse(c.id)))
    }

    pub fn has_spanning(&self) -> bool {
        self.components.iter().any(|c| c.spanning)
    }

    /// Component table `id,sign,size,spanning,delta0,pieces`.
    pub fn write_component_table(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["id", "sign", "size", "spanning", "delta0", "pieces"])?;
        for c in &self.components {
            w.write_record([
                c.id.to_string(),
                c.sign.as_str().to_string(),
                c.cells.len().to_string(),
                c.spanning.to_string(),
                c.delta0.to_string(),
                c.pieces.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn spans(shape: &GridShape, cells: &[usize]) -> bool {
    let (mut top, mut bottom, mut left, mut right) = (false, false, false, false);
    for &i in cells {
        let (r, c) = shape.coords(i);
        top |= r == 0;
        bottom |= r + 1 == shape.rows;
        left |= c == 0;
        right |= c + 1 == shape.cols;
    }
    (top && bottom) || (left && right)
}

/// Groups `cells` (all sharing one predicate) into 4-connected pieces.
fn count_pieces(
    shape: &GridShape,
    keep: &[bool],
    cells: &[usize],
    uf: &mut UnionFind<usize>,
) -> usize {
    let mut unions = 0;
    for &i in cells {
        let (r, c) = shape.coords(i);
        for j in [
            shape.offset(r as isize, c as isize + 1),
            shape.offset(r as isize + 1, c as isize),
        ]
        .into_iter()
        .flatten()
        {
            if keep[j] && uf.union(i, j) {
                unions += 1;
            }
        }
    }
    cells.len() - unions
}

/// δ0 of a component: scan levels of `|a|` from the top and remember the
/// lowest level at which the super-level set is still disconnected.
fn connectivity_threshold(
    shape: &GridShape,
    abs_a: &[f64],
    cells: &[usize],
    uf: &mut UnionFind<usize>,
) -> f64 {
    let mut order: Vec<usize> = cells.to_vec();
    order.sort_by(|&x, &y| abs_a[y].total_cmp(&abs_a[x]).then(x.cmp(&y)));
    let mut active = vec![false; 0];
    active.resize(shape.len(), false);
    let mut members = 0usize;
    let mut unions = 0usize;
    let mut levels: Vec<(f64, bool)> = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let level = abs_a[order[k]];
        let mut end = k;
        while end < order.len() && abs_a[order[end]] == level {
            active[order[end]] = true;
            end += 1;
        }
        for &i in &order[k..end] {
            members += 1;
            for j in shape.neighbors4(i) {
                if active[j] && uf.union(i, j) {
                    unions += 1;
                }
            }
        }
        levels.push((level, members - unions > 1));
        k = end;
    }
    match levels.iter().rposition(|&(_, split)| split) {
        None => levels.first().map_or(0.0, |l| l.0),
        Some(last) => levels.get(last + 1).map_or(0.0, |l| l.0),
    }
}

/// Union-find labeling of both phases with 4-connectivity.
pub fn label_components(env: &EnvironmentSample) -> ComponentLabeling {
    let shape = env.shape;
    let n = shape.len();
    let signs: Vec<Option<Sign>> = env.a_field.iter().map(|&a| Sign::of(a)).collect();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        let Some(s) = signs[i] else { continue };
        let (r, c) = shape.coords(i);
        for j in [
            shape.offset(r as isize, c as isize + 1),
            shape.offset(r as isize + 1, c as isize),
        ]
        .into_iter()
        .flatten()
        {
            if signs[j] == Some(s) {
                uf.union(i, j);
            }
        }
    }

    let mut root_to_id: BTreeMap<usize, u32> = BTreeMap::new();
    let mut labels = vec![0u32; n];
    let mut components: Vec<Component> = Vec::new();
    for i in 0..n {
        let Some(sign) = signs[i] else { continue };
        let root = uf.find(i);
        let id = *root_to_id.entry(root).or_insert_with(|| {
            components.push(Component {
                id: components.len() as u32 + 1,
                sign,
                cells: Vec::new(),
                spanning: false,
                delta0: 0.0,
                pieces: 1,
            });
            components.len() as u32
        });
        labels[i] = id;
        components[id as usize - 1].cells.push(i);
    }

    let abs_a: Vec<f64> = env.a_field.iter().map(|a| a.abs()).collect();
    let mut uf = UnionFind::new(n);
    for comp in &mut components {
        comp.spanning = spans(&shape, &comp.cells);
        comp.delta0 = connectivity_threshold(&shape, &abs_a, &comp.cells, &mut uf);
    }
    ComponentLabeling {
        shape,
        labels,
        components,
        delta: 0.0,
    }
}

/// Restriction of every component to `U^δ = {|a| > δ}`; component ids are
/// preserved and `pieces` records whether each restriction stays connected.
pub fn delta_sublevel(
    labeling: &ComponentLabeling,
    env: &EnvironmentSample,
    delta: f64,
) -> Result<ComponentLabeling> {
    if !(delta >= 0.0) {
        return Err(Error::Parameter(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    let shape = labeling.shape;
    let mut labels = vec![0u32; shape.len()];
    let mut components = Vec::with_capacity(labeling.components.len());
    let mut uf = UnionFind::new(shape.len());
    let mut keep = vec![false; shape.len()];
    for comp in &labeling.components {
        let cells: Vec<usize> = comp
            .cells
            .iter()
            .copied()
            .filter(|&i| env.a_field[i].abs() > delta)
            .collect();
        for &i in &cells {
            labels[i] = comp.id;
            keep[i] = true;
        }
        let pieces = count_pieces(&shape, &keep, &cells, &mut uf);
        for &i in &cells {
            keep[i] = false;
        }
        components.push(Component {
            id: comp.id,
            sign: comp.sign,
            spanning: spans(&shape, &cells),
            delta0: comp.delta0,
            pieces,
            cells,
        });
    }
    Ok(ComponentLabeling {
        shape,
        labels,
        components,
        delta,
    })
}

/// Volume fractions from exact cell counts.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeFractions {
    pub total_cells: usize,
    pub zero_cells: usize,
    pub counts: BTreeMap<u32, usize>,
    pub theta0: f64,
    pub theta: BTreeMap<u32, f64>,
}

impl VolumeFractions {
    /// `theta0 + Σ theta_i`, computed from integer counts (exactly `1.0`).
    pub fn total(&self) -> f64 {
        (self.zero_cells + self.counts.values().sum::<usize>()) as f64 / self.total_cells as f64
    }

    pub fn counts_consistent(&self) -> bool {
        self.zero_cells + self.counts.values().sum::<usize>() == self.total_cells
    }
}

pub fn estimate_theta(labeling: &ComponentLabeling) -> VolumeFractions {
    let total = labeling.shape.len();
    let counts: BTreeMap<u32, usize> = labeling
        .components
        .iter()
        .map(|c| (c.id, c.cells.len()))
        .collect();
    let zero = total - counts.values().sum::<usize>();
    let theta = counts
        .iter()
        .map(|(&id, &n)| (id, n as f64 / total as f64))
        .collect();
    VolumeFractions {
        total_cells: total,
        zero_cells: zero,
        counts,
        theta0: zero as f64 / total as f64,
        theta,
    }
}

/// Maximal excursions of a ray outside the δ-interior of one component.
#[derive(Clone, Debug, PartialEq)]
pub struct GapStatistics {
    pub component_id: u32,
    pub origin: [f64; 2],
    pub direction: [f64; 2],
    pub delta: f64,
    /// Closed gaps `(s_j, t_j)`, disjoint and increasing.
    pub gaps: Vec<(f64, f64)>,
    /// Start of a final excursion that never re-enters before the box edge.
    pub open_tail: Option<f64>,
    pub ray_length: f64,
}

impl GapStatistics {
    pub fn ratios(&self) -> Vec<f64> {
        self.gaps
            .iter()
            .map(|&(s, t)| if t > 0.0 { s / t } else { 1.0 })
            .collect()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.gaps.iter().map(|&(s, t)| t - s).collect()
    }

    /// Gap condition plausibility: no unbounded excursion and the last ratios
    /// approach one.
    pub fn gap_condition_plausible(&self, tol: f64) -> bool {
        if self.open_tail.is_some() {
            return false;
        }
        let r = self.ratios();
        let tail = &r[r.len() / 2..];
        tail.iter().all(|&x| x >= 1.0 - tol)
    }

    /// Gap table `j,s,t,ratio`.
    pub fn write_table(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["j", "s", "t", "ratio"])?;
        for (j, (&(s, t), ratio)) in self.gaps.iter().zip(self.ratios()).enumerate() {
            w.write_record([
                (j + 1).to_string(),
                s.to_string(),
                t.to_string(),
                ratio.to_string(),
            ])?;
        }
        if let Some(s) = self.open_tail {
            w.write_record([
                (self.gaps.len() + 1).to_string(),
                s.to_string(),
                "inf".into(),
                "0".into(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Gaps of the supercover of `origin + t dir` (up to the box edge) outside
/// `{label == component, |a| > delta}`.
pub fn ray_gaps(
    labeling: &ComponentLabeling,
    env: &EnvironmentSample,
    component_id: u32,
    origin: [f64; 2],
    direction: [f64; 2],
    delta: f64,
) -> Result<GapStatistics> {
    let norm = direction[0].hypot(direction[1]);
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Parameter(format!(
            "direction must be a unit vector, |d| = {norm}"
        )));
    }
    if labeling.component(component_id).is_none() {
        return Err(Error::Parameter(format!(
            "unknown component {component_id}"
        )));
    }
    let shape = labeling.shape;
    let length = exit_parameter(&shape, origin, direction);
    let inside =
        |cell: usize| labeling.labels[cell] == component_id && env.a_field[cell].abs() > delta;
    let mut gaps = Vec::new();
    let mut open: Option<f64> = None;
    for seg in supercover(&shape, origin, direction, length) {
        match (inside(seg.cell), open) {
            (false, None) => open = Some(seg.t_in),
            (true, Some(s)) => {
                gaps.push((s, seg.t_in));
                open = None;
            }
            _ => {}
        }
    }
    Ok(GapStatistics {
        component_id,
        origin,
        direction,
        delta,
        gaps,
        open_tail: open,
        ray_length: length,
    })
}

/// Cell of `cells` nearest to the box center (ties: lowest index).
pub fn central_cell(shape: &GridShape, cells: impl IntoIterator<Item = usize>) -> Option<usize> {
    let center = [shape.width() / 2.0, shape.height() / 2.0];
    cells.into_iter().min_by(|&x, &y| {
        let dx = shape.center(x);
        let dy = shape.center(y);
        let ex = (dx[0] - center[0]).hypot(dx[1] - center[1]);
        let ey = (dy[0] - center[0]).hypot(dy[1] - center[1]);
        ex.total_cmp(&ey).then(x.cmp(&y))
    })
}

/// Gap statistics along a ray from the most central δ-interior cell of the
/// largest spanning positive component.
pub fn ray_gap_statistics(
    labeling: &ComponentLabeling,
    env: &EnvironmentSample,
    direction: [f64; 2],
    delta: f64,
) -> Result<GapStatistics> {
    let comp = labeling
        .largest_spanning(Sign::Positive)
        .ok_or_else(|| Error::Structural("no spanning positive component".into()))?;
    let start = central_cell(
        &labeling.shape,
        comp.cells
            .iter()
            .copied()
            .filter(|&i| env.a_field[i].abs() > delta),
    )
    .ok_or_else(|| Error::Structural("spanning component has an empty delta-interior".into()))?;
    ray_gaps(
        labeling,
        env,
        comp.id,
        labeling.shape.center(start),
        direction,
        delta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_media::{gen_checkerboard, gen_site_percolation};
    use std::collections::VecDeque;

    fn single_block_env() -> EnvironmentSample {
        // one closed 1x1 cube in a 4x4 open box, 8 cells per unit
        let shape = GridShape::square(32, 0.125).unwrap();
        let mask: Vec<bool> = (0..shape.len())
            .map(|i| {
                let (r, c) = shape.coords(i);
                (8..16).contains(&r) && (8..16).contains(&c)
            })
            .collect();
        let a = crate::env_media::velocity_from_mask(&shape, &mask);
        let mut env = EnvironmentSample::from_field(shape, a, 1.0, "block").unwrap();
        env.obstacle_mask = mask;
        env
    }

    /// Independent face-to-face reachability by BFS.
    fn bfs_spans(env: &EnvironmentSample, keep: impl Fn(usize) -> bool) -> bool {
        let s = env.shape;
        let mut seen = vec![false; s.len()];
        let mut q = VecDeque::new();
        for r in 0..s.rows {
            let i = s.index(r, 0);
            if keep(i) {
                seen[i] = true;
                q.push_back(i);
            }
        }
        while let Some(i) = q.pop_front() {
            if s.coords(i).1 + 1 == s.cols {
                return true;
            }
            for j in s.neighbors4(i) {
                if !seen[j] && keep(j) {
                    seen[j] = true;
                    q.push_back(j);
                }
            }
        }
        false
    }

    #[test]
    fn labels_partition_the_grid() {
        let env = gen_site_percolation(0.6, 96, 0.125, 4).unwrap();
        let lab = label_components(&env);
        let mut seen = vec![0usize; env.shape.len()];
        for c in &lab.components {
            for &i in &c.cells {
                seen[i] += 1;
                assert_eq!(lab.labels[i], c.id);
                assert_eq!(Sign::of(env.a_field[i]), Some(c.sign));
            }
        }
        for i in 0..env.shape.len() {
            assert_eq!(seen[i] == 0, env.a_field[i] == 0.0);
            assert!(seen[i] <= 1);
        }
    }

    #[test]
    fn single_block_has_one_component_per_sign() {
        let env = single_block_env();
        let lab = label_components(&env);
        let pos = lab
            .components
            .iter()
            .filter(|c| c.sign == Sign::Positive)
            .count();
        let neg: Vec<_> = lab
            .components
            .iter()
            .filter(|c| c.sign == Sign::Negative)
            .collect();
        assert_eq!((pos, neg.len()), (1, 1));
        assert!(!neg[0].spanning);
    }

    #[test]
    fn checkerboard_components_are_all_bounded() {
        let env = gen_checkerboard(1.0, 64, 0.125).unwrap();
        let lab = label_components(&env);
        assert_eq!(lab.components.len(), 64);
        assert!(lab.components.iter().all(|c| !c.spanning));
        assert!(matches!(
            ray_gap_statistics(&lab, &env, [1.0, 0.0], 0.05),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn percolation_spanning_matches_bfs_oracle() {
        let env = gen_site_percolation(0.7, 64 * 4, 0.25, 42).unwrap();
        let lab = label_components(&env);
        let comp = lab
            .largest_spanning(Sign::Positive)
            .expect("spanning cluster");
        let oracle = bfs_spans(&env, |i| env.a_field[i] > 0.0);
        assert!(oracle && comp.spanning);
        let sub = delta_sublevel(&lab, &env, 0.1).unwrap();
        let restricted = sub.component(comp.id).unwrap();
        assert!(restricted.spanning);
        assert!(bfs_spans(&env, |i| sub.labels[i] == comp.id));
    }

    #[test]
    fn sublevel_edge_cases() {
        let env = gen_site_percolation(0.6, 64, 0.125, 8).unwrap();
        let lab = label_components(&env);
        let zero = delta_sublevel(&lab, &env, 0.0).unwrap();
        assert_eq!(zero.labels, lab.labels);
        let capped = delta_sublevel(&lab, &env, 0.5).unwrap();
        assert!(capped.labels.iter().all(|&l| l == 0));
        assert!(delta_sublevel(&lab, &env, -1.0).is_err());
    }

    #[test]
    fn delta0_is_a_connectivity_threshold() {
        let env = gen_site_percolation(0.65, 96, 0.125, 13).unwrap();
        let lab = label_components(&env);
        for comp in lab.components.iter().filter(|c| c.cells.len() > 20) {
            let below = delta_sublevel(&lab, &env, comp.delta0 * 0.999).unwrap();
            assert!(below.component(comp.id).unwrap().is_connected());
            for frac in [0.25, 0.5, 0.75] {
                let sub = delta_sublevel(&lab, &env, comp.delta0 * frac).unwrap();
                assert!(sub.component(comp.id).unwrap().is_connected());
            }
        }
    }

    #[test]
    fn theta_sums_to_one() {
        let env = gen_site_percolation(0.7, 64, 0.125, 1).unwrap();
        let theta = estimate_theta(&label_components(&env));
        assert!(theta.counts_consistent());
        assert_eq!(theta.total(), 1.0);
        let open = gen_site_percolation(1.0, 32, 0.25, 0).unwrap();
        let t = estimate_theta(&label_components(&open));
        assert_eq!(t.theta.len(), 1);
        assert_eq!(t.theta0, 0.0);
        let cb = estimate_theta(&label_components(
            &gen_checkerboard(1.0, 64, 0.125).unwrap(),
        ));
        let lab = label_components(&gen_checkerboard(1.0, 64, 0.125).unwrap());
        let (mut pos, mut neg) = (0.0, 0.0);
        for c in &lab.components {
            match c.sign {
                Sign::Positive => pos += cb.theta[&c.id],
                Sign::Negative => neg += cb.theta[&c.id],
            }
        }
        assert_eq!(pos, neg);
    }

    #[test]
    fn open_medium_has_no_gaps() {
        let env = gen_site_percolation(1.0, 64, 0.25, 0).unwrap();
        let lab = label_components(&env);
        let g = ray_gap_statistics(&lab, &env, [0.6, 0.8], 0.05).unwrap();
        assert!(g.gaps.is_empty() && g.open_tail.is_none());
        assert!(g.gap_condition_plausible(0.1));
    }

    #[test]
    fn checkerboard_square_is_left_for_good() {
        let env = gen_checkerboard(1.0, 64, 0.125).unwrap();
        let lab = label_components(&env);
        let id = lab.label(env.shape.cell_at([0.5, 0.5]).unwrap());
        let g = ray_gaps(&lab, &env, id, [0.5, 0.5], [1.0, 0.0], 0.05).unwrap();
        assert!(g.gaps.is_empty());
        let s = g.open_tail.expect("unbounded excursion");
        assert!((s - (0.5 - 0.05 - 0.125)).abs() < 0.13);
        assert!(!g.gap_condition_plausible(0.1));
    }

    #[test]
    fn gaps_are_disjoint_and_increasing() {
        let env = gen_site_percolation(0.7, 256, 0.25, 3).unwrap();
        let lab = label_components(&env);
        for k in 0..16 {
            let theta = k as f64 * std::f64::consts::PI / 8.0;
            let g = ray_gap_statistics(&lab, &env, crate::ray::unit(theta), 0.05).unwrap();
            let mut last = -1.0;
            for &(s, t) in &g.gaps {
                assert!(s <= t && s >= last);
                last = t;
            }
        }
    }
}
