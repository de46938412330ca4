use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FarFieldPattern, UvGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectivityReport {
    /// 10 log10(D).
    pub dbi: f64,
    pub linear: f64,
    pub peak_u: f64,
    pub peak_v: f64,
}

/// Peak directivity over the forward hemisphere,
/// `D = 4 pi |E_peak|^2 / integral |E|^2 dOmega` with
/// `dOmega = du dv / sqrt(1 - u^2 - v^2)`.
pub fn directivity(pattern: &FarFieldPattern) -> Result<DirectivityReport> {
    let (j, i) = pattern.peak_index();
    let grid = *pattern.grid();
    let (linear, _) = gain_at(pattern, j, i)?;
    check_lobe_sampling(pattern, j, i)?;
    Ok(DirectivityReport { dbi: 10.0 * linear.log10(), linear, peak_u: grid.u(i), peak_v: grid.v(j) })
}

/// Directive gain towards the sample nearest `(u, v)`, dBi.
pub fn directive_gain_db(pattern: &FarFieldPattern, u: f64, v: f64) -> Result<f64> {
    let (j, i) = pattern.grid().nearest(u, v);
    let (linear, _) = gain_at(pattern, j, i)?;
    Ok(10.0 * linear.log10())
}

fn gain_at(pattern: &FarFieldPattern, j: usize, i: usize) -> Result<(f64, f64)> {
    let weights = solid_angle_weights(pattern.grid());
    let power = pattern.power();
    let radiated: f64 = weights.iter().zip(power.iter()).map(|(w, p)| w * p).sum();
    if !(radiated > 0.0) {
        return Err(Error::UndefinedDirectivity);
    }
    Ok((4.0 * PI * power[[j, i]] / radiated, radiated))
}

/// The main lobe must span at least three half-power samples along each axis.
fn check_lobe_sampling(pattern: &FarFieldPattern, j: usize, i: usize) -> Result<()> {
    let power = pattern.power();
    let half = 0.5 * power[[j, i]];
    let (nv, nu) = power.dim();
    let run = |get: &dyn Fn(usize) -> f64, centre: usize, n: usize| {
        let mut count = 1;
        let mut k = centre;
        while k > 0 && get(k - 1) >= half {
            k -= 1;
            count += 1;
        }
        k = centre;
        while k + 1 < n && get(k + 1) >= half {
            k += 1;
            count += 1;
        }
        count
    };
    let along_u = run(&|k| power[[j, k]], i, nu);
    let along_v = run(&|k| power[[k, i]], j, nv);
    if along_u < 3 {
        return Err(Error::UndersampledLobe { axis: 'u', samples: along_u });
    }
    if along_v < 3 {
        return Err(Error::UndersampledLobe { axis: 'v', samples: along_v });
    }
    Ok(())
}

/// Solid angle represented by each visible uv sample.
///
/// Each cell's solid angle is integrated exactly in v
/// (`integral dv / sqrt(a^2 - v^2) = asin(v / a)`) and by piecewise
/// Gauss-Legendre in u. Slivers of the disk that fall in cells whose
/// centers are invisible are credited to the nearest visible sample, so the
/// weights sum to the full hemisphere, 2 pi.
pub fn solid_angle_weights(grid: &UvGrid) -> Array2<f64> {
    let (nv, nu) = (grid.n_v, grid.n_u);
    let mut w = Array2::<f64>::zeros((nv, nu));
    let mut orphans = Vec::new();
    for j in 0..nv {
        let (v0, v1) = (grid.v(j) - 0.5 * grid.dv, grid.v(j) + 0.5 * grid.dv);
        for i in 0..nu {
            let (u0, u1) = (grid.u(i) - 0.5 * grid.du, grid.u(i) + 0.5 * grid.du);
            let omega = cell_solid_angle(u0, u1, v0, v1);
            if omega == 0.0 {
                continue;
            }
            if grid.is_visible(j, i) {
                w[[j, i]] += omega;
            } else {
                orphans.push((j, i, omega));
            }
        }
    }
    for (j, i, omega) in orphans {
        if let Some((jj, ii)) = nearest_visible(grid, j, i) {
            w[[jj, ii]] += omega;
        }
    }
    w
}

fn nearest_visible(grid: &UvGrid, j: usize, i: usize) -> Option<(usize, usize)> {
    let mut best = None;
    let mut best_d = f64::INFINITY;
    for reach in 1..=3i64 {
        for dj in -reach..=reach {
            for di in -reach..=reach {
                let (jj, ii) = (j as i64 + dj, i as i64 + di);
                if jj < 0 || ii < 0 || jj >= grid.n_v as i64 || ii >= grid.n_u as i64 {
                    continue;
                }
                let (jj, ii) = (jj as usize, ii as usize);
                if !grid.is_visible(jj, ii) {
                    continue;
                }
                let d = (grid.u(ii) - grid.u(i)).powi(2) + (grid.v(jj) - grid.v(j)).powi(2);
                if d < best_d {
                    best_d = d;
                    best = Some((jj, ii));
                }
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

fn cell_solid_angle(u0: f64, u1: f64, v0: f64, v1: f64) -> f64 {
    let (a, b) = (u0.max(-1.0), u1.min(1.0));
    if a >= b || v0 >= 1.0 || v1 <= -1.0 {
        return 0.0;
    }
    // integrand kinks where a cell edge meets the unit circle
    let mut cuts = vec![a, b];
    for v in [v0, v1] {
        if v.abs() < 1.0 {
            let c = (1.0 - v * v).sqrt();
            for x in [-c, c] {
                if x > a && x < b {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.total_cmp(y));
    let inner = |u: f64| {
        let s = (1.0 - u * u).max(0.0).sqrt();
        if s == 0.0 {
            return 0.0;
        }
        (v1 / s).clamp(-1.0, 1.0).asin() - (v0 / s).clamp(-1.0, 1.0).asin()
    };
    cuts.windows(2).map(|seg| gauss_legendre(&inner, seg[0], seg[1])).sum()
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Gauss-Legendre after the substitution `u = mid + half (3t - t^3) / 2`,
/// which flattens the square-root behaviour the integrand has at the cuts.
fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS)
        .map(|(t, w)| {
            let u = mid + half * 0.5 * (3.0 * t - t * t * t);
            w * f(u) * 1.5 * (1.0 - t * t)
        })
        .sum::<f64>()
        * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn weights_cover_the_hemisphere() {
        for n in [41, 101, 201] {
            let total: f64 = solid_angle_weights(&UvGrid::square(n).unwrap()).sum();
            assert!((total - 2.0 * PI).abs() < 1e-4, "n = {n}: {total}");
        }
    }

    #[test]
    fn uniform_hemisphere_is_three_dbi() {
        let grid = UvGrid::default();
        let p = FarFieldPattern::new(grid, Array2::from_elem((grid.n_v, grid.n_u), Complex64::new(1.0, 0.0))).unwrap();
        // the flat pattern has no lobe to check, so read the gain at broadside
        let g = directive_gain_db(&p, 0.0, 0.0).unwrap();
        assert!((g - 10.0 * 2f64.log10()).abs() < 1e-3, "{g}");
    }

    #[test]
    fn cosine_power_pattern_is_four() {
        // |E|^2 = cos(theta) radiates pi, so D = 4
        let grid = UvGrid::default();
        let vals = Array2::from_shape_fn((grid.n_v, grid.n_u), |(j, i)| {
            let c2 = 1.0 - grid.u(i).powi(2) - grid.v(j).powi(2);
            Complex64::new(c2.max(0.0).powf(0.25), 0.0)
        });
        let d = directivity(&FarFieldPattern::new(grid, vals).unwrap()).unwrap();
        // cell-centre sampling of the steep rim costs a few hundredths of a dB
        assert!((d.dbi - 10.0 * 4f64.log10()).abs() < 0.05, "{}", d.dbi);
        assert_eq!((d.peak_u, d.peak_v), (0.0, 0.0));
    }

    #[test]
    fn zero_pattern_is_an_error() {
        let grid = UvGrid::square(11).unwrap();
        let p = FarFieldPattern::new(grid, Array2::zeros((11, 11))).unwrap();
        assert!(matches!(directivity(&p), Err(Error::UndefinedDirectivity)));
    }

    #[test]
    fn single_sample_spike_is_undersampled() {
        let grid = UvGrid::square(11).unwrap();
        let mut vals = Array2::zeros((11, 11));
        vals[[5, 5]] = Complex64::new(1.0, 0.0);
        let p = FarFieldPattern::new(grid, vals).unwrap();
        assert!(matches!(directivity(&p), Err(Error::UndersampledLobe { .. })));
    }
}
