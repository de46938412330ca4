use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular direction-cosine grid centered on broadside.
///
/// Sample `(j, i)` (row `j` along v, column `i` along u) sits at
/// `u = (i - (n_u-1)/2) * du`, `v = (j - (n_v-1)/2) * dv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvGrid {
    pub n_u: usize,
    pub n_v: usize,
    pub du: f64,
    pub dv: f64,
}

impl Default for UvGrid {
    fn default() -> Self {
        Self::square(201).expect("valid default grid")
    }
}

impl UvGrid {
    /// `n` x `n` samples spanning [-1, 1] on both axes.
    pub fn square(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::validation("uv grid", format!("need at least 2 samples per axis, got {n}")));
        }
        let d = 2.0 / (n - 1) as f64;
        Ok(Self { n_u: n, n_v: n, du: d, dv: d })
    }

    /// Square grid whose step is at most half the aperture's resolution,
    /// `lambda / (2 D)` with `D` the larger side; always an odd sample count
    /// so broadside is a sample.
    pub fn aperture_matched(width: f64, height: f64, wavelength: f64) -> Result<Self> {
        let d = width.max(height);
        if !(d > 0.0 && wavelength > 0.0) {
            return Err(Error::validation("uv grid", "aperture and wavelength must be positive"));
        }
        let mut intervals = (2.0 / (wavelength / (2.0 * d))).ceil() as usize;
        intervals += intervals % 2;
        Self::square(intervals + 1)
    }

    pub fn u(&self, i: usize) -> f64 {
        (i as f64 - (self.n_u as f64 - 1.0) / 2.0) * self.du
    }

    pub fn v(&self, j: usize) -> f64 {
        (j as f64 - (self.n_v as f64 - 1.0) / 2.0) * self.dv
    }

    pub fn is_visible(&self, j: usize, i: usize) -> bool {
        let (u, v) = (self.u(i), self.v(j));
        u * u + v * v <= 1.0
    }

    /// Nearest sample to a direction, clamped to the grid.
    pub fn nearest(&self, u: f64, v: f64) -> (usize, usize) {
        let idx = |x: f64, d: f64, n: usize| {
            let i = (x / d + (n as f64 - 1.0) / 2.0).round();
            i.clamp(0.0, n as f64 - 1.0) as usize
        };
        (idx(v, self.dv, self.n_v), idx(u, self.du, self.n_u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// |E| as computed.
    Raw,
    /// 20 log10(|E| / |E|max); the peak is exactly 0 dB.
    PeakDb,
    /// Directive gain in dBi.
    Directivity,
}

/// A local maximum of a far-field pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub u: f64,
    pub v: f64,
    /// Level relative to the pattern peak, dB.
    pub level_db: f64,
}

/// Complex far field over a [`UvGrid`]; `values[[j, i]]` with `j` along v.
///
/// Samples outside the unit disk are invisible and held at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    grid: UvGrid,
    values: Array2<Complex64>,
}

impl FarFieldPattern {
    pub fn new(grid: UvGrid, mut values: Array2<Complex64>) -> Result<Self> {
        if values.dim() != (grid.n_v, grid.n_u) {
            return Err(Error::GridMismatch(format!("{:?} samples for a {} x {} uv grid", values.dim(), grid.n_v, grid.n_u)));
        }
        for ((j, i), v) in values.indexed_iter_mut() {
            if !grid.is_visible(j, i) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &UvGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn power(&self) -> Array2<f64> {
        self.values.mapv(|v| v.norm_sqr())
    }

    /// Strongest visible sample as `(u, v, |E|)`; ties resolve to the first in row-major order.
    pub fn peak(&self) -> (f64, f64, f64) {
        let (j, i) = self.peak_index();
        (self.grid.u(i), self.grid.v(j), self.values[[j, i]].norm())
    }

    pub fn peak_index(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut best_p = -1.0;
        for ((j, i), v) in self.values.indexed_iter() {
            let p = v.norm_sqr();
            if p > best_p && self.grid.is_visible(j, i) {
                best_p = p;
                best = (j, i);
            }
        }
        best
    }

    /// Peak-normalized level in dB; invisible samples map to `-inf`.
    pub fn db(&self) -> Array2<f64> {
        let peak = self.peak().2;
        Array2::from_shape_fn(self.values.dim(), |(j, i)| {
            if self.grid.is_visible(j, i) {
                20.0 * (self.values[[j, i]].norm() / peak).log10()
            } else {
                f64::NEG_INFINITY
            }
        })
    }

    pub fn levels(&self, norm: Normalization) -> Result<Array2<f64>> {
        match norm {
            Normalization::Raw => Ok(self.values.mapv(|v| v.norm())),
            Normalization::PeakDb => Ok(self.db()),
            Normalization::Directivity => {
                let report = crate::field::directivity(self)?;
                let peak_db = report.dbi;
                Ok(self.db().mapv(|d| d + peak_db))
            }
        }
    }

    /// Level at the sample nearest `(u, v)`, dB relative to peak.
    pub fn level_db_at(&self, u: f64, v: f64) -> f64 {
        let (j, i) = self.grid.nearest(u, v);
        20.0 * (self.values[[j, i]].norm() / self.peak().2).log10()
    }

    /// Visible local maxima (8-neighbourhood) above `floor_db`, strongest first.
    pub fn lobes(&self, floor_db: f64) -> Vec<Lobe> {
        let p = self.power();
        let peak = self.peak().2.powi(2);
        if peak == 0.0 {
            return Vec::new();
        }
        let (nv, nu) = p.dim();
        let mut out = Vec::new();
        for j in 0..nv {
            for i in 0..nu {
                if !self.grid.is_visible(j, i) {
                    continue;
                }
                let here = p[[j, i]];
                let level = 10.0 * (here / peak).log10();
                if level < floor_db {
                    continue;
                }
                let mut is_max = true;
                'nb: for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        if dj == 0 && di == 0 {
                            continue;
                        }
                        let (jj, ii) = (j as i64 + dj, i as i64 + di);
                        if jj < 0 || ii < 0 || jj >= nv as i64 || ii >= nu as i64 {
                            continue;
                        }
                        let other = p[[jj as usize, ii as usize]];
                        // plateaus keep only their first sample in scan order
                        let earlier = (dj, di) < (0, 0);
                        if other > here || (earlier && other == here) {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
                if is_max {
                    out.push(Lobe { u: self.grid.u(i), v: self.grid.v(j), level_db: level });
                }
            }
        }
        out.sort_by(|a, b| b.level_db.total_cmp(&a.level_db));
        out
    }

    /// Visible samples as `u,v,db` CSV (peak-normalized).
    pub fn to_csv(&self) -> String {
        let db = self.db();
        let mut out = String::from("u,v,db\n");
        for ((j, i), d) in db.indexed_iter() {
            if self.grid.is_visible(j, i) {
                let _ = writeln!(out, "{:.6},{:.6},{:.6}", self.grid.u(i), self.grid.v(j), d.max(-300.0));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aperture_matched_prototype_grid() {
        let g = UvGrid::aperture_matched(0.6, 0.6, 0.057652).unwrap();
        assert_eq!(g.n_u, 43);
        assert!(g.du <= 0.057652 / 1.2);
    }

    #[test]
    fn default_grid_spacing() {
        let g = UvGrid::default();
        assert_eq!(g.n_u, 201);
        assert!((g.u(0) + 1.0).abs() < 1e-12);
        assert!((g.u(200) - 1.0).abs() < 1e-12);
        assert!((g.u(150) - 0.5).abs() < 1e-12);
        assert_eq!(g.nearest(0.5, 0.0), (100, 150));
        assert!(UvGrid::square(1).is_err());
    }

    #[test]
    fn invisible_samples_are_zeroed_and_peak_is_zero_db() {
        let g = UvGrid::square(5).unwrap();
        let p = FarFieldPattern::new(g, Array2::from_elem((5, 5), Complex64::new(2.0, 0.0))).unwrap();
        assert_eq!(p.values()[[0, 0]], Complex64::new(0.0, 0.0));
        let db = p.db();
        let max = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, 0.0);
        assert_eq!(db[[0, 0]], f64::NEG_INFINITY);
    }
}
