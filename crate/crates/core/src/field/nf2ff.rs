use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::PropagationContext;
use crate::error::{Error, Result};
use crate::types::{FarFieldPattern, FieldMap, UvGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nf2ffOptions {
    /// Coarsest acceptable direction-cosine step; the map is zero-padded
    /// until the transform bins are at least this fine.
    pub max_step: f64,
    /// Fraction of each map edge rolled off with a raised cosine; `None` = no window.
    pub edge_taper: Option<f64>,
}

impl Default for Nf2ffOptions {
    fn default() -> Self {
        Self { max_step: 0.01, edge_taper: None }
    }
}

/// Far field from a planar near-field map by the plane-wave spectrum.
///
/// The spectrum `S(k_x, k_y) = sum E(x, y) e^{j (k_x x + k_y y)} dx dy` is
/// evaluated with a zero-padded 2-D FFT and mapped to `u = k_x / k0`,
/// `v = k_y / k0`; the far field is `cos(theta) S`. The output grid is the
/// FFT's native one, cropped to the unit square, with invisible samples zeroed.
pub fn nf2ff(map: &FieldMap, ctx: &PropagationContext, opts: &Nf2ffOptions) -> Result<FarFieldPattern> {
    let grid = map.grid();
    let d = grid.spacing;
    let lambda = ctx.wavelength();
    if d > lambda / 2.0 {
        return Err(Error::Aliasing { spacing: d, limit: lambda / 2.0 });
    }
    if !(opts.max_step.is_finite() && opts.max_step > 0.0) {
        return Err(Error::validation("nf2ff", "max_step must be positive"));
    }
    if let Some(t) = opts.edge_taper {
        if !(0.0..=0.5).contains(&t) {
            return Err(Error::validation("nf2ff", format!("edge taper fraction must lie in [0, 0.5], got {t}")));
        }
    }

    let needed = (lambda / (d * opts.max_step)).ceil() as usize;
    let mut n = needed.max(grid.rows).max(grid.cols);
    if n.is_multiple_of(2) {
        n += 1;
    }
    let step = lambda / (n as f64 * d);
    let half = ((1.0 / step).floor() as usize).min((n - 1) / 2);
    let out_n = 2 * half + 1;

    let wx = taper(grid.cols, opts.edge_taper);
    let wy = taper(grid.rows, opts.edge_taper);
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    for ((r, c), v) in map.values().indexed_iter() {
        buf[r * n + c] = v * (wx[c] * wy[r]);
    }

    // e^{+j 2 pi p q / N} is rustfft's (unnormalized) inverse kernel
    let fft = FftPlanner::new().plan_fft_inverse(n);
    for row in buf.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            column[r] = buf[r * n + c];
        }
        fft.process(&mut column);
        for r in 0..n {
            buf[r * n + c] = column[r];
        }
    }

    let k0 = ctx.k0();
    let (x0, y0) = (grid.x(0), grid.y(0));
    let bin = |p: i64| p.rem_euclid(n as i64) as usize;
    let out_grid = UvGrid { n_u: out_n, n_v: out_n, du: step, dv: step };
    let values = Array2::from_shape_fn((out_n, out_n), |(j, i)| {
        let (pu, pv) = (i as i64 - half as i64, j as i64 - half as i64);
        let (u, v) = (pu as f64 * step, pv as f64 * step);
        let rho2 = u * u + v * v;
        if rho2 > 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = buf[bin(pv) * n + bin(pu)];
        // the FFT indexes samples from the first one; restore the true origin
        let shift = Complex64::from_polar(1.0, k0 * (u * x0 + v * y0));
        s * shift * (d * d * (1.0 - rho2).sqrt())
    });
    FarFieldPattern::new(out_grid, values)
}

fn taper(n: usize, fraction: Option<f64>) -> Vec<f64> {
    let mut w = vec![1.0; n];
    let Some(f) = fraction else { return w };
    let edge = (f * n as f64).round() as usize;
    if edge == 0 {
        return w;
    }
    for i in 0..edge.min(n) {
        let g = 0.5 * (1.0 - (PI * (i as f64 + 0.5) / edge as f64).cos());
        w[i] *= g;
        w[n - 1 - i] *= g;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Spreading;
    use crate::types::PlaneGrid;

    fn ctx() -> PropagationContext {
        PropagationContext::new(5.2e9, Spreading::Spherical).unwrap()
    }

    #[test]
    fn zero_map_gives_zero_pattern() {
        let grid = PlaneGrid::new(16, 16, 0.01, 0.01).unwrap();
        let p = nf2ff(&FieldMap::zeros(grid).unwrap(), &ctx(), &Nf2ffOptions::default()).unwrap();
        assert!(p.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn coarse_map_aliases() {
        let grid = PlaneGrid::new(8, 8, 0.03, 0.01).unwrap();
        assert!(matches!(
            nf2ff(&FieldMap::zeros(grid).unwrap(), &ctx(), &Nf2ffOptions::default()),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn rect_aperture_first_null() {
        // 30 x 30 samples of 10 mm inside a 90 x 90 map
        let grid = PlaneGrid::new(90, 90, 0.01, 0.01).unwrap();
        let mut map = FieldMap::zeros(grid).unwrap();
        for r in 30..60 {
            for c in 30..60 {
                map.values_mut()[[r, c]] = Complex64::new(1.0, 0.0);
            }
        }
        let opts = Nf2ffOptions { max_step: 0.005, edge_taper: None };
        let p = nf2ff(&map, &ctx(), &opts).unwrap();
        let g = *p.grid();
        let centre = (g.n_v - 1) / 2;
        let power = p.power();
        let mut first_null = None;
        for i in centre + 1..g.n_u - 1 {
            let (a, b, c) = (power[[centre, i - 1]], power[[centre, i]], power[[centre, i + 1]]);
            if b <= a && b <= c {
                first_null = Some(g.u(i));
                break;
            }
        }
        let expected = ctx().wavelength() / 0.30;
        let got = first_null.expect("null found");
        assert!((got - expected).abs() <= g.du, "null at {got}, expected {expected}");
    }

    #[test]
    fn taper_is_symmetric_and_bounded() {
        let w = taper(20, Some(0.2));
        for i in 0..20 {
            assert!((w[i] - w[19 - i]).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&w[i]));
        }
        assert_eq!(w[10], 1.0);
    }
}
