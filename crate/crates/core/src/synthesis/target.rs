use std::fmt::Write as _;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{element_contributions, PropagationContext};
use crate::types::{ApertureLayout, Excitation, FieldMap, PlaneGrid};

/// Desired field magnitude on a target plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskTarget {
    pub grid: PlaneGrid,
    /// `[row, col]`, same orientation as [`FieldMap`] (row 0 at the lowest y).
    pub magnitude: Array2<f64>,
}

impl MaskTarget {
    pub fn new(grid: PlaneGrid, magnitude: Array2<f64>) -> Result<Self> {
        let mask = Self { grid, magnitude };
        mask.validate()?;
        Ok(mask)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.magnitude.dim() != (self.grid.rows, self.grid.cols) {
            return Err(Error::GridMismatch(format!(
                "mask is {:?} but its grid is {}x{}",
                self.magnitude.dim(),
                self.grid.rows,
                self.grid.cols
            )));
        }
        if self.magnitude.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::validation("mask", "magnitudes must be finite and non-negative"));
        }
        Ok(())
    }

    /// Sum of T^2 times the cell area, as [`FieldMap::total_power`].
    pub fn total_power(&self) -> f64 {
        self.magnitude.iter().map(|m| m * m).sum::<f64>() * self.grid.cell_area()
    }

    /// Rescale so `total_power` equals `power`. An all-zero mask is returned unchanged.
    pub fn normalized_to_power(&self, power: f64) -> Self {
        let current = self.total_power();
        let mut out = self.clone();
        if current > 0.0 {
            let s = (power / current).sqrt();
            out.magnitude.mapv_inplace(|m| m * s);
        }
        out
    }

    /// Rescale to the total power of a reference field on the same plane.
    pub fn normalized_to_field(&self, reference: &FieldMap) -> Result<Self> {
        if !self.grid.congruent(reference.grid()) {
            return Err(Error::GridMismatch("reference field and mask lie on different grids".into()));
        }
        Ok(self.normalized_to_power(reference.total_power()))
    }

    /// Grayscale PGM (`P2` or `P5`), image top at the largest y, centred on the axis.
    /// Pixel values are scaled by `maxval` to `[0, 1]`.
    pub fn from_pgm(bytes: &[u8], spacing: f64, z: f64) -> Result<Self> {
        let (magic, rest) = bytes.split_at(bytes.len().min(2));
        let binary = match magic {
            b"P2" => false,
            b"P5" => true,
            _ => return Err(Error::parse(1, "not a P2/P5 PGM file")),
        };
        let mut pos = 0;
        let mut header = [0usize; 3];
        for slot in header.iter_mut() {
            let tok = next_token(rest, &mut pos).ok_or_else(|| Error::parse(1, "truncated PGM header"))?;
            *slot = tok.parse().map_err(|_| Error::parse(1, format!("bad PGM header field {tok:?}")))?;
        }
        let [cols, rows, maxval] = header;
        if cols == 0 || rows == 0 || maxval == 0 || maxval > 255 {
            return Err(Error::parse(1, "PGM needs non-zero size and maxval in 1..=255"));
        }
        let mut pixels = Vec::with_capacity(rows * cols);
        if binary {
            // exactly one whitespace byte separates the header from the raster
            let start = pos + 1;
            let data = rest.get(start..start + rows * cols).ok_or_else(|| Error::parse(1, "truncated PGM raster"))?;
            pixels.extend(data.iter().map(|&b| b as f64));
        } else {
            for _ in 0..rows * cols {
                let tok = next_token(rest, &mut pos).ok_or_else(|| Error::parse(1, "truncated PGM raster"))?;
                let v: usize = tok.parse().map_err(|_| Error::parse(1, format!("bad pixel {tok:?}")))?;
                pixels.push(v as f64);
            }
        }
        let image = Array2::from_shape_vec((rows, cols), pixels).expect("raster length checked");
        Self::from_image(image.mapv(|p| p / maxval as f64), spacing, z)
    }

    /// Comma-separated magnitude rows, first line at the largest y.
    pub fn from_csv(text: &str, spacing: f64, z: f64) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
            if rows.first().is_some_and(|r| r.len() != row.len()) {
                return Err(Error::parse(i + 1, "ragged mask row"));
            }
            rows.push(row);
        }
        let (n_rows, n_cols) = (rows.len(), rows.first().map_or(0, Vec::len));
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::parse(1, "empty mask"));
        }
        let image = Array2::from_shape_vec((n_rows, n_cols), rows.concat()).expect("row lengths checked");
        Self::from_image(image, spacing, z)
    }

    fn from_image(image: Array2<f64>, spacing: f64, z: f64) -> Result<Self> {
        let (rows, cols) = image.dim();
        let grid = PlaneGrid::new(rows, cols, spacing, z)?;
        let magnitude = Array2::from_shape_fn((rows, cols), |(r, c)| image[[rows - 1 - r, c]]);
        Self::new(grid, magnitude)
    }

    /// Binary PGM (`P5`) of a magnitude array scaled to its own maximum.
    pub fn magnitude_to_pgm(magnitude: &Array2<f64>) -> Vec<u8> {
        let (rows, cols) = magnitude.dim();
        let peak = magnitude.iter().cloned().fold(0.0, f64::max);
        let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
        for r in (0..rows).rev() {
            for c in 0..cols {
                let v = if peak > 0.0 { magnitude[[r, c]] / peak } else { 0.0 };
                out.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in (0..self.grid.rows).rev() {
            let row: Vec<String> = (0..self.grid.cols).map(|c| self.magnitude[[r, c]].to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a str> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        None
    } else {
        std::str::from_utf8(&bytes[start..*pos]).ok()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    /// Steer the reflected beam towards `(theta, phi)`, radians.
    FarFieldBeam { theta: f64, phi: f64 },
    PlaneMask(MaskTarget),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: TargetKind,
    #[serde(default)]
    pub weighting: Weighting,
}

impl TargetSpec {
    pub fn beam(theta: f64, phi: f64) -> Result<Self> {
        let t = Self { kind: TargetKind::FarFieldBeam { theta, phi }, weighting: Weighting::Uniform };
        t.validate()?;
        Ok(t)
    }

    pub fn mask(mask: MaskTarget) -> Result<Self> {
        mask.validate()?;
        Ok(Self { kind: TargetKind::PlaneMask(mask), weighting: Weighting::Uniform })
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            TargetKind::FarFieldBeam { theta, phi } => {
                if !(theta.is_finite() && phi.is_finite() && (0.0..std::f64::consts::FRAC_PI_2).contains(theta)) {
                    return Err(Error::validation("beam target", format!("theta must lie in [0, pi/2), got {theta}")));
                }
                Ok(())
            }
            TargetKind::PlaneMask(mask) => mask.validate(),
        }
    }

    /// Reduce the target to a plane mask.
    ///
    /// A beam becomes a single point on a plane ten aperture widths away,
    /// in the beam direction, asking for more field than the aperture can
    /// deliver there; minimizing the error then maximizes the field at that point.
    pub fn compile(&self, ctx: &PropagationContext, exc: &Excitation, layout: &ApertureLayout) -> Result<MaskTarget> {
        self.validate()?;
        match &self.kind {
            TargetKind::PlaneMask(mask) => Ok(mask.clone()),
            TargetKind::FarFieldBeam { theta, phi } => {
                let z = 10.0 * layout.width().max(layout.height());
                let (x, y) = (z * theta.tan() * phi.cos(), z * theta.tan() * phi.sin());
                let grid = PlaneGrid::new(1, 1, ctx.wavelength(), z)?.centered_at(x, y);
                let contribs = element_contributions(ctx, exc, layout, &grid)?;
                // |E| <= sum_m |c_m| for |R| <= 1
                let bound: f64 = contribs.values().iter().map(|c| c.norm()).sum();
                MaskTarget::new(grid, Array2::from_elem((1, 1), 2.0 * bound + 1.0))
            }
        }
    }
}
