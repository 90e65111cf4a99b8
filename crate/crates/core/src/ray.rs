//! Supercover traversal of a ray through a cell grid.

use crate::grid::GridShape;

/// One cell crossed by the ray, with the parameter interval it occupies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySegment {
    pub cell: usize,
    pub t_in: f64,
    pub t_out: f64,
}

const CORNER_EPS: f64 = 1e-12;

/// Every cell met by `origin + t * dir`, `t in [0, t_max]`, in order of
/// increasing `t`. `dir` must be a unit vector. When the ray passes exactly
/// through a cell corner both side cells are reported with a zero-length
/// interval. Traversal stops at `t_max` or at the box edge.
pub fn supercover(
    shape: &GridShape,
    origin: [f64; 2],
    dir: [f64; 2],
    t_max: f64,
) -> Vec<RaySegment> {
    let mut out = Vec::new();
    let Some(start) = shape.cell_at(origin) else {
        return out;
    };
    let h = shape.h;
    let (r0, c0) = shape.coords(start);
    let (mut r, mut c) = (r0 as isize, c0 as isize);
    let step_c: isize = if dir[0] > 0.0 { 1 } else { -1 };
    let step_r: isize = if dir[1] > 0.0 { 1 } else { -1 };
    let next_boundary = |pos: f64, cell: isize, step: isize, d: f64| -> f64 {
        if d == 0.0 {
            return f64::INFINITY;
        }
        let edge = if step > 0 {
            (cell + 1) as f64 * h
        } else {
            cell as f64 * h
        };
        ((edge - pos) / d).max(0.0)
    };
    let mut t_next_c = next_boundary(origin[0], c, step_c, dir[0]);
    let mut t_next_r = next_boundary(origin[1], r, step_r, dir[1]);
    let dt_c = if dir[0] == 0.0 {
        f64::INFINITY
    } else {
        h / dir[0].abs()
    };
    let dt_r = if dir[1] == 0.0 {
        f64::INFINITY
    } else {
        h / dir[1].abs()
    };
    let mut t = 0.0;

    while let Some(cell) = shape.offset(r, c) {
        let t_exit = t_next_c.min(t_next_r).min(t_max);
        out.push(RaySegment {
            cell,
            t_in: t,
            t_out: t_exit,
        });
        if t_exit >= t_max {
            break;
        }
        t = t_exit;
        let corner = (t_next_c - t_next_r).abs() <= CORNER_EPS * (1.0 + t);
        if corner {
            for (rr, cc) in [(r, c + step_c), (r + step_r, c)] {
                if let Some(side) = shape.offset(rr, cc) {
                    out.push(RaySegment {
                        cell: side,
                        t_in: t,
                        t_out: t,
                    });
                }
            }
            c += step_c;
            r += step_r;
            t_next_c += dt_c;
            t_next_r += dt_r;
        } else if t_next_c < t_next_r {
            c += step_c;
            t_next_c += dt_c;
        } else {
            r += step_r;
            t_next_r += dt_r;
        }
    }
    out
}

/// Largest `t` such that `origin + t * dir` stays inside the box.
pub fn exit_parameter(shape: &GridShape, origin: [f64; 2], dir: [f64; 2]) -> f64 {
    let bound = |pos: f64, d: f64, len: f64| {
        if d > 0.0 {
            (len - pos) / d
        } else if d < 0.0 {
            -pos / d
        } else {
            f64::INFINITY
        }
    };
    bound(origin[0], dir[0], shape.width()).min(bound(origin[1], dir[1], shape.height()))
}

/// Unit vector at angle `theta` (radians, counter-clockwise from `+x`).
pub fn unit(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}
