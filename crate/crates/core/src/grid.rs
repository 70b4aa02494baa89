//! Structured axis-aligned box grids.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// A uniform cell-centered grid on an axis-aligned box in 1, 2 or 3
/// dimensions. Scalars live at cell centers; velocity components live on the
/// faces normal to their axis (MAC staggering).
///
/// Axes at or beyond `dim` are padded with a single cell of unit length so
/// kernels can always loop over three nested ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    cells: [usize; 3],
    lengths: [f64; 3],
}

impl GridSpec {
    /// Minimum cell count per active axis.
    pub const MIN_CELLS: usize = 4;

    pub fn new(cells: &[usize], lengths: &[f64]) -> Result<Self> {
        let dim = cells.len();
        if !(1..=3).contains(&dim) {
            return Err(CoreError::InvalidGrid {
                context: format!("dim = {dim}, expected 1, 2 or 3"),
            });
        }
        if lengths.len() != dim {
            return Err(CoreError::InvalidGrid {
                context: format!("{} lengths for {} axes", lengths.len(), dim),
            });
        }
        let mut c = [1usize; 3];
        let mut l = [1.0f64; 3];
        for a in 0..dim {
            if cells[a] < Self::MIN_CELLS {
                return Err(CoreError::InvalidGrid {
                    context: format!("axis {a}: {} cells, need at least {}", cells[a], Self::MIN_CELLS),
                });
            }
            if !(lengths[a].is_finite() && lengths[a] > 0.0) {
                return Err(CoreError::InvalidGrid {
                    context: format!("axis {a}: length {} must be positive", lengths[a]),
                });
            }
            c[a] = cells[a];
            l[a] = lengths[a];
        }
        Ok(Self { dim, cells: c, lengths: l })
    }

    /// Unit box with the same cell count on every axis.
    pub fn unit_box(dim: usize, n: usize) -> Result<Self> {
        let cells = vec![n; dim];
        let lengths = vec![1.0; dim];
        Self::new(&cells, &lengths)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cell count along `axis` (1 for padded axes).
    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    /// Grid spacing `h = L / N` along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.cells[axis] as f64
    }

    /// Total number of cells.
    pub fn cell_count(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    /// Box volume.
    pub fn volume(&self) -> f64 {
        self.lengths[0] * self.lengths[1] * self.lengths[2]
    }

    /// Volume of one cell (padded axes contribute a factor of one).
    pub fn cell_volume(&self) -> f64 {
        self.spacing(0) * self.spacing(1) * self.spacing(2)
    }

    /// Flat-index stride along `axis` for cell-centered data
    /// (`index = i + nx * (j + ny * k)`).
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.cells[0],
            _ => self.cells[0] * self.cells[1],
        }
    }

    /// Decompose a flat cell index into (i, j, k).
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.cells[0];
        let ny = self.cells[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.cells[0] * (j + self.cells[1] * k)
    }

    /// Physical coordinates of the center of cell (i, j, k).
    pub fn cell_center(&self, coords: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..3 {
            x[a] = (coords[a] as f64 + 0.5) * self.spacing(a);
        }
        x
    }

    /// Cell dimensions of the face array for components normal to `axis`:
    /// same as the cell grid but with one extra layer along `axis`.
    pub fn face_dims(&self, axis: usize) -> [usize; 3] {
        let mut d = self.cells;
        d[axis] += 1;
        d
    }

    /// Number of faces normal to `axis`.
    pub fn face_count(&self, axis: usize) -> usize {
        let d = self.face_dims(axis);
        d[0] * d[1] * d[2]
    }

    /// Flat face index for faces normal to `axis`.
    pub fn face_flat(&self, axis: usize, i: usize, j: usize, k: usize) -> usize {
        let d = self.face_dims(axis);
        i + d[0] * (j + d[1] * k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_basics() {
        let g = GridSpec::unit_box(3, 16).unwrap();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.cell_count(), 4096);
        assert_eq!(g.volume(), 1.0);
        assert!((g.cell_volume() - 1.0 / 4096.0).abs() < 1e-18);
        assert_eq!(g.spacing(0), 1.0 / 16.0);
    }

    #[test]
    fn rejects_tiny_axes() {
        assert!(GridSpec::new(&[3], &[1.0]).is_err());
        assert!(GridSpec::new(&[8, 2], &[1.0, 1.0]).is_err());
        assert!(GridSpec::new(&[8], &[0.0]).is_err());
        assert!(GridSpec::new(&[8], &[-1.0]).is_err());
    }

    #[test]
    fn padded_axes_are_trivial() {
        let g = GridSpec::new(&[8, 4], &[2.0, 1.0]).unwrap();
        assert_eq!(g.cells(2), 1);
        assert_eq!(g.length(2), 1.0);
        assert_eq!(g.cell_count(), 32);
        assert_eq!(g.volume(), 2.0);
    }

    #[test]
    fn face_layout() {
        let g = GridSpec::new(&[8, 4], &[1.0, 1.0]).unwrap();
        assert_eq!(g.face_count(0), 9 * 4);
        assert_eq!(g.face_count(1), 8 * 5);
        assert_eq!(g.face_flat(0, 8, 3, 0), 8 + 9 * 3);
    }

    #[test]
    fn flat_and_coords_roundtrip() {
        let g = GridSpec::unit_box(3, 8).unwrap();
        for idx in [0usize, 17, 300, 511] {
            let [i, j, k] = g.coords(idx);
            assert_eq!(g.flat(i, j, k), idx);
        }
    }
}
