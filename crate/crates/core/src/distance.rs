//! Exact Euclidean distance transform (Felzenszwalb–Huttenlocher lower
//! envelope of parabolas), with optional periodic wrap.

use crate::grid::GridShape;

const FAR: f64 = 1e20;

/// Squared distance (in cell units) from every sample to the nearest zero of
/// `f`, where `f` holds `0` at sites and `FAR` elsewhere.
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let parabola = |q: usize| f[q] + (q * q) as f64;
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s = (parabola(q) - parabola(v[k])) / (2.0 * (q - v[k]) as f64);
        while s <= z[k] {
            k -= 1;
            s = (parabola(q) - parabola(v[k])) / (2.0 * (q - v[k]) as f64);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Euclidean distance (physical units) from each cell center to the nearest
/// center of a cell flagged in `sites`. Cells farther than `horizon` (or with
/// no site at all) receive a value `>= horizon`.
///
/// With `periodic = true` the box is treated as a torus; only a band of
/// `horizon / h + 2` wrapped cells is materialized, which is exact for all
/// distances below `horizon`.
pub fn distance_to_sites(
    shape: &GridShape,
    sites: &[bool],
    horizon: f64,
    periodic: bool,
) -> Vec<f64> {
    assert_eq!(sites.len(), shape.len());
    let pad = if periodic {
        (horizon / shape.h).ceil() as usize + 2
    } else {
        0
    };
    let rows = shape.rows + 2 * pad;
    let cols = shape.cols + 2 * pad;
    let wrap = |i: isize, n: usize| i.rem_euclid(n as isize) as usize;

    let mut grid = vec![FAR; rows * cols];
    for r in 0..rows {
        let sr = wrap(r as isize - pad as isize, shape.rows);
        for c in 0..cols {
            let sc = wrap(c as isize - pad as isize, shape.cols);
            if sites[shape.index(sr, sc)] {
                grid[r * cols + c] = 0.0;
            }
        }
    }

    let n = rows.max(cols);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for c in 0..cols {
        for r in 0..rows {
            f[r] = grid[r * cols + c];
        }
        edt_1d(&f[..rows], &mut out[..rows], &mut v, &mut z);
        for r in 0..rows {
            grid[r * cols + c] = out[r];
        }
    }
    for r in 0..rows {
        let row = &mut grid[r * cols..(r + 1) * cols];
        f[..cols].copy_from_slice(row);
        edt_1d(&f[..cols], &mut out[..cols], &mut v, &mut z);
        row.copy_from_slice(&out[..cols]);
    }

    let mut dist = Vec::with_capacity(shape.len());
    for r in 0..shape.rows {
        for c in 0..shape.cols {
            let sq = grid[(r + pad) * cols + (c + pad)];
            dist.push(if sq >= FAR * 0.5 {
                f64::INFINITY
            } else {
                sq.sqrt() * shape.h
            });
        }
    }
    dist
}
