use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular grid on a plane parallel to the aperture at height `z`.
///
/// Sample `(row, col)` sits at `x = center_x + (col - (cols-1)/2) * spacing`,
/// `y = center_y + (row - (rows-1)/2) * spacing`; row 0 is minimum y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneGrid {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
    pub z: f64,
    #[serde(default)]
    pub center_x: f64,
    #[serde(default)]
    pub center_y: f64,
}

impl PlaneGrid {
    pub fn new(rows: usize, cols: usize, spacing: f64, z: f64) -> Result<Self> {
        let grid = Self { rows, cols, spacing, z, center_x: 0.0, center_y: 0.0 };
        grid.validate()?;
        Ok(grid)
    }

    pub fn centered_at(mut self, x: f64, y: f64) -> Self {
        self.center_x = x;
        self.center_y = y;
        self
    }

    /// Grid covering at least `width` x `width` meters with the given spacing.
    pub fn covering(width: f64, spacing: f64, z: f64) -> Result<Self> {
        let n = (width / spacing).round() as usize + 1;
        Self::new(n, n, spacing, z)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::validation("plane grid", "grid needs at least one sample"));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::validation("plane grid", format!("spacing must be positive, got {}", self.spacing)));
        }
        if !(self.z.is_finite() && self.z > 0.0) {
            return Err(Error::validation("plane grid", format!("z_plane must be positive, got {}", self.z)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, col: usize) -> f64 {
        self.center_x + (col as f64 - (self.cols as f64 - 1.0) / 2.0) * self.spacing
    }

    pub fn y(&self, row: usize) -> f64 {
        self.center_y + (row as f64 - (self.rows as f64 - 1.0) / 2.0) * self.spacing
    }

    /// Point `k` in row-major order.
    pub fn point(&self, k: usize) -> [f64; 3] {
        [self.x(k % self.cols), self.y(k / self.cols), self.z]
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.spacing
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.spacing
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn congruent(&self, other: &PlaneGrid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        self.rows == other.rows
            && self.cols == other.cols
            && close(self.spacing, other.spacing)
            && close(self.z, other.z)
            && close(self.center_x, other.center_x)
            && close(self.center_y, other.center_y)
    }
}

/// Complex field sampled on a [`PlaneGrid`]; `values[[row, col]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMap {
    grid: PlaneGrid,
    values: Array2<Complex64>,
}

impl FieldMap {
    pub fn new(grid: PlaneGrid, values: Array2<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.dim() != (grid.rows, grid.cols) {
            return Err(Error::GridMismatch(format!(
                "{:?} samples for a {} x {} grid",
                values.dim(),
                grid.rows,
                grid.cols
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: PlaneGrid) -> Result<Self> {
        Self::new(grid, Array2::zeros((grid.rows, grid.cols)))
    }

    pub fn grid(&self) -> &PlaneGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn magnitude(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm())
    }

    /// Sum of |E|^2 times the cell area.
    pub fn total_power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    /// CSV with columns `x,y,re,im` (meters), one row per sample, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# z_plane_m={}\nx,y,re,im\n", self.grid.z);
        for ((r, c), v) in self.values.indexed_iter() {
            let _ = writeln!(out, "{},{},{},{}", self.grid.x(c), self.grid.y(r), v.re, v.im);
        }
        out
    }

    /// Parse the CSV written by [`FieldMap::to_csv`].
    ///
    /// The plane height comes from a `# z_plane_m=` comment or from `z_plane`.
    /// Samples may appear in any order but must fill a uniform square-cell grid.
    pub fn from_csv(text: &str, z_plane: Option<f64>) -> Result<Self> {
        let mut z = z_plane;
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("z_plane_m=") {
                    if z.is_none() {
                        z = Some(v.trim().parse().map_err(|_| Error::parse(i + 1, "bad z_plane_m"))?);
                    }
                }
                continue;
            }
            if line.starts_with(|c: char| c.is_ascii_alphabetic()) {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
            if cols.len() != 4 {
                return Err(Error::parse(i + 1, format!("expected 4 columns, found {}", cols.len())));
            }
            samples.push(cols);
        }
        let z = z.ok_or_else(|| Error::validation("field map", "plane height missing"))?;
        if samples.is_empty() {
            return Err(Error::validation("field map", "no samples"));
        }

        let xs = distinct_sorted(samples.iter().map(|s| s[0]));
        let ys = distinct_sorted(samples.iter().map(|s| s[1]));
        let dx = uniform_step(&xs, "x")?;
        let dy = uniform_step(&ys, "y")?;
        let spacing = match (dx, dy) {
            (Some(a), Some(b)) if ((a - b) / a).abs() > 1e-6 => {
                return Err(Error::NonUniformGrid(format!("x spacing {a} differs from y spacing {b}")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => 1.0,
        };
        if samples.len() != xs.len() * ys.len() {
            return Err(Error::NonUniformGrid(format!(
                "{} samples do not fill a {} x {} grid",
                samples.len(),
                ys.len(),
                xs.len()
            )));
        }
        let grid = PlaneGrid {
            rows: ys.len(),
            cols: xs.len(),
            spacing,
            z,
            center_x: 0.5 * (xs[0] + xs[xs.len() - 1]),
            center_y: 0.5 * (ys[0] + ys[ys.len() - 1]),
        };
        grid.validate()?;
        let mut values = Array2::from_elem((grid.rows, grid.cols), None);
        for s in &samples {
            let c = ((s[0] - xs[0]) / spacing).round() as usize;
            let r = ((s[1] - ys[0]) / spacing).round() as usize;
            if values[[r, c]].replace(Complex64::new(s[2], s[3])).is_some() {
                return Err(Error::NonUniformGrid(format!("duplicate sample at ({}, {})", s[0], s[1])));
            }
        }
        let values = values.mapv(|v| v.expect("grid filled"));
        Self::new(grid, values)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = FieldMapDocument {
            grid: self.grid,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FieldMapDocument = serde_json::from_str(text)?;
        let values = Array2::from_shape_vec(
            (doc.grid.rows, doc.grid.cols),
            doc.values.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        )
        .map_err(|e| Error::GridMismatch(e.to_string()))?;
        Self::new(doc.grid, values)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldMapDocument {
    grid: PlaneGrid,
    /// Row-major `[re, im]` pairs.
    values: Vec<[f64; 2]>,
}

fn distinct_sorted(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = it.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
    v
}

fn uniform_step(coords: &[f64], axis: &str) -> Result<Option<f64>> {
    if coords.len() < 2 {
        return Ok(None);
    }
    let step = (coords[coords.len() - 1] - coords[0]) / (coords.len() - 1) as f64;
    for w in coords.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-6 * step {
            return Err(Error::NonUniformGrid(format!("{axis} steps vary ({} vs {step})", w[1] - w[0])));
        }
    }
    Ok(Some(step))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_map() -> FieldMap {
        let grid = PlaneGrid::new(3, 4, 0.01, 0.2).unwrap().centered_at(0.05, -0.02);
        let values = Array2::from_shape_fn((3, 4), |(r, c)| Complex64::new(r as f64, -(c as f64) * 0.5));
        FieldMap::new(grid, values).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let m = sample_map();
        let back = FieldMap::from_csv(&m.to_csv(), None).unwrap();
        assert!(back.grid().congruent(m.grid()));
        for (a, b) in back.values().iter().zip(m.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let m = sample_map();
        assert_eq!(FieldMap::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn csv_rejects_irregular_points() {
        let text = "x,y,re,im\n0,0,1,0\n0.01,0,1,0\n0.03,0,1,0\n";
        assert!(matches!(FieldMap::from_csv(text, Some(1.0)), Err(Error::NonUniformGrid(_))));
        let holes = "x,y,re,im\n0,0,1,0\n0.01,0,1,0\n0,0.01,1,0\n";
        assert!(matches!(FieldMap::from_csv(holes, Some(1.0)), Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn power_is_area_weighted() {
        let grid = PlaneGrid::new(2, 2, 0.1, 1.0).unwrap();
        let m = FieldMap::new(grid, Array2::from_elem((2, 2), Complex64::new(3.0, 4.0))).unwrap();
        assert!((m.total_power() - 4.0 * 25.0 * 0.01).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_plane() {
        assert!(PlaneGrid::new(2, 2, 0.01, 0.0).is_err());
        assert!(PlaneGrid::new(2, 2, 0.0, 1.0).is_err());
    }
}
