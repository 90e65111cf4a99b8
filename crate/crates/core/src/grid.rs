//! Uniform cell-centered grids and the FHL1 binary grid format.
//!
//! Cell `(r, c)` covers `[c h, (c+1) h] x [r h, (r+1) h]`; its center is at
//! `x = (c + 1/2) h`, `y = (r + 1/2) h`. Values are stored row-major.
//!
//! FHL1 layout: magic `b"FHL1"`, little-endian `u32` rows, `u32` cols,
//! `f64` cell size, then `rows * cols` little-endian `f64` values.
//! Infinite values are written as IEEE infinities.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const FHL1_MAGIC: &[u8; 4] = b"FHL1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
    pub h: f64,
}

impl GridShape {
    pub fn new(rows: usize, cols: usize, h: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Parameter(format!("empty grid {rows}x{cols}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!(
                "cell size must be positive, got {h}"
            )));
        }
        Ok(Self { rows, cols, h })
    }

    pub fn square(n: usize, h: f64) -> Result<Self> {
        Self::new(n, n, h)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.cols, idx % self.cols)
    }

    /// Physical position `[x, y]` of a cell center.
    #[inline]
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (r, c) = self.coords(idx);
        [(c as f64 + 0.5) * self.h, (r as f64 + 0.5) * self.h]
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.h
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.h
    }

    /// Cell containing a physical point, `None` outside the box.
    pub fn cell_at(&self, p: [f64; 2]) -> Option<usize> {
        if !(p[0] >= 0.0 && p[1] >= 0.0) {
            return None;
        }
        let c = (p[0] / self.h).floor() as usize;
        let r = (p[1] / self.h).floor() as usize;
        (r < self.rows && c < self.cols).then(|| self.index(r, c))
    }

    /// 4-neighbors of a cell, without wrapping.
    pub fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (r, c) = self.coords(idx);
        let (r, c) = (r as isize, c as isize);
        [(-1, 0), (1, 0), (0, -1), (0, 1)]
            .into_iter()
            .filter_map(move |(dr, dc)| self.offset(r + dr, c + dc))
    }

    #[inline]
    pub fn offset(&self, r: isize, c: isize) -> Option<usize> {
        (r >= 0 && c >= 0 && (r as usize) < self.rows && (c as usize) < self.cols)
            .then(|| self.index(r as usize, c as usize))
    }

    /// Whether a cell lies on the outer frame of the box.
    pub fn on_frame(&self, idx: usize) -> bool {
        let (r, c) = self.coords(idx);
        r == 0 || c == 0 || r + 1 == self.rows || c + 1 == self.cols
    }
}

/// A scalar field sampled at cell centers.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarGrid {
    pub shape: GridShape,
    pub values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::Parameter(format!(
                "grid {}x{} needs {} values, got {}",
                shape.rows,
                shape.cols,
                shape.len(),
                values.len()
            )));
        }
        Ok(Self { shape, values })
    }

    pub fn filled(shape: GridShape, value: f64) -> Self {
        Self {
            shape,
            values: vec![value; shape.len()],
        }
    }

    pub fn from_fn(shape: GridShape, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..shape.len()).map(|i| f(shape.center(i))).collect();
        Self { shape, values }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[self.shape.index(r, c)]
    }

    pub fn write_fhl1(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_fhl1_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_fhl1_to(&self, w: &mut impl Write) -> Result<()> {
        let rows = u32::try_from(self.shape.rows)
            .map_err(|_| Error::Format("row count exceeds u32".into()))?;
        let cols = u32::try_from(self.shape.cols)
            .map_err(|_| Error::Format("column count exceeds u32".into()))?;
        w.write_all(FHL1_MAGIC)?;
        w.write_all(&rows.to_le_bytes())?;
        w.write_all(&cols.to_le_bytes())?;
        w.write_all(&self.shape.h.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_fhl1(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_fhl1_from(&mut BufReader::new(File::open(path)?))
    }

    pub fn read_fhl1_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != FHL1_MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let rows = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)?;
        let cols = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let h = f64::from_le_bytes(b8);
        let shape = GridShape::new(rows, cols, h).map_err(|e| Error::Format(e.to_string()))?;
        let mut values = Vec::with_capacity(shape.len().min(1 << 20));
        for _ in 0..shape.len() {
            r.read_exact(&mut b8)?;
            values.push(f64::from_le_bytes(b8));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after grid payload".into()));
        }
        Ok(Self { shape, values })
    }
}

/// Bilinear interpolation of cell-centered `values` at `p`, using only the
/// four surrounding centers. Returns `None` when the stencil leaves the box or
/// when `usable` rejects one of the four cells.
pub fn bilinear(
    shape: &GridShape,
    values: &[f64],
    p: [f64; 2],
    usable: impl Fn(usize) -> bool,
) -> Option<f64> {
    let gx = p[0] / shape.h - 0.5;
    let gy = p[1] / shape.h - 0.5;
    let c0 = gx.floor();
    let r0 = gy.floor();
    let fx = gx - c0;
    let fy = gy - r0;
    let (c0, r0) = (c0 as isize, r0 as isize);
    let i00 = shape.offset(r0, c0)?;
    let i01 = shape.offset(r0, c0 + 1)?;
    let i10 = shape.offset(r0 + 1, c0)?;
    let i11 = shape.offset(r0 + 1, c0 + 1)?;
    if ![i00, i01, i10, i11].into_iter().all(&usable) {
        return None;
    }
    let top = values[i00] * (1.0 - fx) + values[i01] * fx;
    let bottom = values[i10] * (1.0 - fx) + values[i11] * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fhl1_layout_is_bit_exact() {
        let shape = GridShape::new(1, 2, 0.5).unwrap();
        let g = ScalarGrid::new(shape, vec![1.0, f64::INFINITY]).unwrap();
        let mut buf = Vec::new();
        g.write_fhl1_to(&mut buf).unwrap();
        let mut expected = b"FHL1".to_vec();
        expected.extend(1u32.to_le_bytes());
        expected.extend(2u32.to_le_bytes());
        expected.extend(0.5f64.to_le_bytes());
        expected.extend(1.0f64.to_le_bytes());
        expected.extend(f64::INFINITY.to_le_bytes());
        assert_eq!(buf, expected);
        let back = ScalarGrid::read_fhl1_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn fhl1_rejects_bad_magic_and_truncation() {
        let mut bad = b"FHL2".to_vec();
        bad.extend([0u8; 16]);
        assert!(matches!(
            ScalarGrid::read_fhl1_from(&mut bad.as_slice()),
            Err(Error::Format(_))
        ));
        let shape = GridShape::new(2, 2, 1.0).unwrap();
        let mut buf = Vec::new();
        ScalarGrid::filled(shape, 3.0)
            .write_fhl1_to(&mut buf)
            .unwrap();
        buf.truncate(buf.len() - 3);
        assert!(ScalarGrid::read_fhl1_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn bilinear_reproduces_affine_functions() {
        let shape = GridShape::new(8, 8, 0.25).unwrap();
        let g = ScalarGrid::from_fn(shape, |p| 2.0 * p[0] - 3.0 * p[1] + 1.0);
        let p = [0.9, 1.1];
        let v = bilinear(&shape, &g.values, p, |_| true).unwrap();
        assert!((v - (2.0 * 0.9 - 3.3 + 1.0)).abs() < 1e-12);
        assert!(bilinear(&shape, &g.values, [0.05, 1.0], |_| true).is_none());
    }

    #[test]
    fn cell_lookup() {
        let shape = GridShape::new(4, 5, 0.5).unwrap();
        assert_eq!(shape.cell_at([0.1, 0.1]), Some(0));
        assert_eq!(shape.cell_at([2.4, 1.9]), Some(shape.index(3, 4)));
        assert_eq!(shape.cell_at([2.6, 0.0]), None);
        assert_eq!(shape.cell_at([-0.1, 0.0]), None);
        assert_eq!(shape.neighbors4(0).count(), 2);
        assert_eq!(shape.neighbors4(shape.index(1, 1)).count(), 4);
    }
}
