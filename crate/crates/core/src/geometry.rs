//! Square pixel array geometry.
//!
//! The camera is a `2M x 2M` array of square pixels of width `d` covering
//! `[-L, L]^2` with `L = M d`. Pixel `(i, j)` (both 1-based) is centered at
//!
//! ```text
//! x_i = -L + (i - 1/2) d
//! y_j =  L - (j - 1/2) d
//! ```
//!
//! so `(1, 1)` is the top-left pixel and `(2M, 2M)` the bottom-right one.
//! Pixels are enumerated by the cumulative index `nu = 2M (i - 1) + j`, which
//! runs over `1..=N` with `N = 4 M^2`. Per-pixel vectors throughout the crate
//! are stored at slot `nu - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Immutable description of the detector's pixel layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelGrid {
    half_count: usize,
    pixel_size: f64,
}

/// Closed interval bounds of one pixel, `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelBounds {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl PixelGrid {
    /// Builds a grid with `2M x 2M` pixels of width `pixel_size`.
    pub fn new(half_count: usize, pixel_size: f64) -> Result<Self> {
        if half_count == 0 {
            return Err(invalid("quarter-side pixel count M must be at least 1"));
        }
        if !(pixel_size > 0.0 && pixel_size.is_finite()) {
            return Err(invalid(format!("pixel size must be positive, got {pixel_size}")));
        }
        Ok(Self {
            half_count,
            pixel_size,
        })
    }

    /// Convenience constructor from the number of pixels along one side (`2M`).
    pub fn with_side(side: usize, pixel_size: f64) -> Result<Self> {
        if side == 0 || !side.is_multiple_of(2) {
            return Err(invalid(format!("pixels per side must be a positive even number, got {side}")));
        }
        Self::new(side / 2, pixel_size)
    }

    /// `M`.
    pub fn half_count(&self) -> usize {
        self.half_count
    }

    /// Pixels along one side, `2M`.
    pub fn side(&self) -> usize {
        2 * self.half_count
    }

    /// Total pixel count `N = 4 M^2`.
    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Pixel width `d`.
    pub fn pixel_size(&self) -> f64 {
        self.pixel_size
    }

    /// Half-width of the camera, `L = M d`.
    pub fn half_width(&self) -> f64 {
        self.half_count as f64 * self.pixel_size
    }

    /// x coordinate of column `i` (1-based).
    pub fn x_center(&self, i: usize) -> f64 {
        -self.half_width() + (i as f64 - 0.5) * self.pixel_size
    }

    /// y coordinate of row `j` (1-based).
    pub fn y_center(&self, j: usize) -> f64 {
        self.half_width() - (j as f64 - 0.5) * self.pixel_size
    }

    pub fn center(&self, i: usize, j: usize) -> Result<(f64, f64)> {
        self.check_ij(i, j)?;
        Ok((self.x_center(i), self.y_center(j)))
    }

    /// Cumulative index `nu = 2M (i - 1) + j`.
    pub fn cumulative_index(&self, i: usize, j: usize) -> Result<usize> {
        self.check_ij(i, j)?;
        Ok(self.side() * (i - 1) + j)
    }

    /// Inverse of [`cumulative_index`](Self::cumulative_index).
    pub fn pixel_of(&self, nu: usize) -> Result<(usize, usize)> {
        if nu == 0 || nu > self.len() {
            return Err(invalid(format!("cumulative index {nu} outside 1..={}", self.len())));
        }
        let side = self.side();
        Ok(((nu - 1) / side + 1, (nu - 1) % side + 1))
    }

    /// Center of the pixel with cumulative index `nu`.
    pub fn center_of(&self, nu: usize) -> Result<(f64, f64)> {
        let (i, j) = self.pixel_of(nu)?;
        Ok((self.x_center(i), self.y_center(j)))
    }

    /// All pixel centers in slot order (`nu - 1`).
    pub fn centers(&self) -> Vec<(f64, f64)> {
        let side = self.side();
        let mut out = Vec::with_capacity(self.len());
        for i in 1..=side {
            let x = self.x_center(i);
            for j in 1..=side {
                out.push((x, self.y_center(j)));
            }
        }
        out
    }

    /// Support of the pixel with cumulative index `nu`.
    pub fn bounds_of(&self, nu: usize) -> Result<PixelBounds> {
        let (x, y) = self.center_of(nu)?;
        let h = 0.5 * self.pixel_size;
        Ok(PixelBounds {
            x0: x - h,
            x1: x + h,
            y0: y - h,
            y1: y + h,
        })
    }

    /// Column edges `-L, -L + d, ..., L` (length `2M + 1`).
    pub fn column_edges(&self) -> Vec<f64> {
        let l = self.half_width();
        (0..=self.side())
            .map(|k| -l + k as f64 * self.pixel_size)
            .collect()
    }

    fn check_ij(&self, i: usize, j: usize) -> Result<()> {
        let side = self.side();
        if i == 0 || j == 0 || i > side || j > side {
            return Err(invalid(format!("pixel ({i}, {j}) outside 1..={side}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ten_by_ten() {
        let g = PixelGrid::new(5, 1.0).unwrap();
        assert_eq!(g.side(), 10);
        assert_eq!(g.len(), 100);
        assert_eq!(g.half_width(), 5.0);
        assert_eq!(g.center(1, 1).unwrap(), (-4.5, 4.5));
        assert_eq!(g.center(10, 10).unwrap(), (4.5, -4.5));
    }

    #[test]
    fn smallest_grid() {
        let g = PixelGrid::new(1, 2.0).unwrap();
        let mut c = g.centers();
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(c, vec![(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(PixelGrid::new(0, 1.0).is_err());
        assert!(PixelGrid::new(2, 0.0).is_err());
        assert!(PixelGrid::new(2, -1.0).is_err());
        assert!(PixelGrid::new(2, f64::NAN).is_err());
        assert!(PixelGrid::with_side(3, 1.0).is_err());
    }

    #[test]
    fn cumulative_index_examples() {
        let g = PixelGrid::new(5, 1.0).unwrap();
        assert_eq!(g.cumulative_index(1, 1).unwrap(), 1);
        assert_eq!(g.cumulative_index(2, 3).unwrap(), 13);
        assert_eq!(g.cumulative_index(10, 10).unwrap(), 100);
        assert_eq!(g.pixel_of(100).unwrap(), (10, 10));
        assert!(g.cumulative_index(0, 1).is_err());
        assert!(g.cumulative_index(11, 1).is_err());
        assert!(g.pixel_of(0).is_err());
        assert!(g.pixel_of(101).is_err());
    }

    #[test]
    fn centers_follow_slot_order() {
        let g = PixelGrid::new(3, 0.5).unwrap();
        for (slot, c) in g.centers().into_iter().enumerate() {
            assert_eq!(g.center_of(slot + 1).unwrap(), c);
        }
    }

    proptest! {
        #[test]
        fn index_round_trips(m in 1usize..20, a in 0usize..10_000, b in 0usize..10_000) {
            let g = PixelGrid::new(m, 1.0).unwrap();
            let i = a % g.side() + 1;
            let j = b % g.side() + 1;
            let nu = g.cumulative_index(i, j).unwrap();
            prop_assert!(nu >= 1 && nu <= g.len());
            prop_assert_eq!(g.pixel_of(nu).unwrap(), (i, j));
        }

        #[test]
        fn tiling_and_mirror_symmetry(m in 1usize..16, d_num in 1u32..64) {
            // Dyadic pixel sizes keep every coordinate exactly representable.
            let d = d_num as f64 / 8.0;
            let g = PixelGrid::new(m, d).unwrap();
            let l = g.half_width();

            // Area: N d^2 = (2L)^2 exactly.
            prop_assert_eq!(g.len() as f64 * d * d, (2.0 * l) * (2.0 * l));

            let edges = g.column_edges();
            prop_assert_eq!(edges[0], -l);
            prop_assert_eq!(*edges.last().unwrap(), l);
            for nu in 1..=g.len() {
                let b = g.bounds_of(nu).unwrap();
                prop_assert!(b.x0 >= -l && b.x1 <= l && b.y0 >= -l && b.y1 <= l);
            }

            let centers = g.centers();
            let sx: f64 = centers.iter().map(|c| c.0).sum();
            let sy: f64 = centers.iter().map(|c| c.1).sum();
            prop_assert_eq!(sx, 0.0);
            prop_assert_eq!(sy, 0.0);
        }
    }
}
