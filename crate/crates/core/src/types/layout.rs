use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element spacing of the 600 mm, 20 x 20 prototype.
pub const DEFAULT_PITCH: f64 = 0.030;

/// Regular `n_x` x `n_y` patch grid centered on the origin, normal along +z.
///
/// Elements are indexed row-major with row 0 at minimum y:
/// `m = row * n_x + col`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureLayout {
    n_x: usize,
    n_y: usize,
    pitch: f64,
}

impl ApertureLayout {
    pub fn new(n_x: usize, n_y: usize, pitch: f64) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::validation("layout", format!("element counts must be >= 1, got {n_x} x {n_y}")));
        }
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::validation("layout", format!("pitch must be positive, got {pitch}")));
        }
        Ok(Self { n_x, n_y, pitch })
    }

    /// The 20 x 20 prototype at 30 mm pitch.
    pub fn prototype() -> Self {
        Self { n_x: 20, n_y: 20, pitch: DEFAULT_PITCH }
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        self.n_x as f64 * self.pitch
    }

    pub fn height(&self) -> f64 {
        self.n_y as f64 * self.pitch
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.n_y && col < self.n_x);
        row * self.n_x + col
    }

    pub fn row_col(&self, m: usize) -> (usize, usize) {
        (m / self.n_x, m % self.n_x)
    }

    pub fn x(&self, col: usize) -> f64 {
        (col as f64 - (self.n_x as f64 - 1.0) / 2.0) * self.pitch
    }

    pub fn y(&self, row: usize) -> f64 {
        (row as f64 - (self.n_y as f64 - 1.0) / 2.0) * self.pitch
    }

    /// Center of element `m` in the aperture plane.
    pub fn position(&self, m: usize) -> (f64, f64) {
        let (row, col) = self.row_col(m);
        (self.x(col), self.y(row))
    }

    pub fn positions(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |m| self.position(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_element_sits_at_origin() {
        let l = ApertureLayout::new(1, 1, 0.03).unwrap();
        assert_eq!(l.position(0), (0.0, 0.0));
    }

    #[test]
    fn prototype_extent() {
        let l = ApertureLayout::new(20, 20, 0.03).unwrap();
        assert_abs_diff_eq!(l.x(0), -0.285, epsilon = 1e-12);
        assert_abs_diff_eq!(l.x(19), 0.285, epsilon = 1e-12);
        assert_abs_diff_eq!(l.width(), 0.600, epsilon = 1e-12);
    }

    #[test]
    fn pair_is_symmetric() {
        let l = ApertureLayout::new(2, 1, 0.03).unwrap();
        assert_abs_diff_eq!(l.position(0).0, -0.015, epsilon = 1e-15);
        assert_abs_diff_eq!(l.position(1).0, 0.015, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(ApertureLayout::new(0, 3, 0.03).is_err());
        assert!(ApertureLayout::new(3, 0, 0.03).is_err());
        assert!(ApertureLayout::new(3, 3, 0.0).is_err());
        assert!(ApertureLayout::new(3, 3, -1.0).is_err());
    }

    #[test]
    fn row_zero_is_minimum_y() {
        let l = ApertureLayout::new(3, 4, 0.01).unwrap();
        let (_, y0) = l.position(l.index(0, 1));
        let (_, y3) = l.position(l.index(3, 1));
        assert!(y0 < y3);
        assert_eq!(l.row_col(l.index(2, 1)), (2, 1));
    }

    #[test]
    fn every_element_has_a_point_mirror() {
        for (nx, ny) in [(1, 1), (2, 3), (5, 4), (20, 20)] {
            let l = ApertureLayout::new(nx, ny, 0.03).unwrap();
            for (x, y) in l.positions() {
                assert!(l.positions().any(|(a, b)| (a + x).abs() < 1e-12 && (b + y).abs() < 1e-12));
            }
        }
    }
}
