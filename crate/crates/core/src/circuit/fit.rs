use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{diode_impedance, ImpedanceNormalization, ImpedanceSpectrum, VaractorParams};
use crate::error::{Error, Result};

/// The three quantities the fit matches at the load resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFeatures {
    /// Frequency of maximum Re(z), Hz.
    pub f_res: f64,
    /// Maximum of Re(z).
    pub peak_re: f64,
    /// d Im(z) / df at the resonance, per Hz.
    pub im_slope: f64,
}

impl ResonanceFeatures {
    fn as_array(&self) -> [f64; 3] {
        [self.f_res, self.peak_re, self.im_slope]
    }

    /// Per-feature error relative to `reference`.
    pub fn relative_error(&self, reference: &ResonanceFeatures) -> ResonanceFeatures {
        let [a, b, c] = self.as_array();
        let [x, y, z] = reference.as_array();
        ResonanceFeatures { f_res: (a - x) / x.abs(), peak_re: (b - y) / y.abs(), im_slope: (c - z) / z.abs() }
    }
}

/// Locate the resonance of a spectrum.
///
/// The maximum of Re(z) is taken on the samples (the lowest frequency wins a
/// tie), then refined with the parabola through it and its two neighbours.
/// The Im slope is the central difference across those neighbours.
pub fn resonance_features(spec: &ImpedanceSpectrum) -> Result<ResonanceFeatures> {
    let (f, z) = (spec.freqs(), spec.z());
    let mut best = 0;
    for k in 1..z.len() {
        if z[k].re > z[best].re {
            best = k;
        }
    }
    if best == 0 || best + 1 >= z.len() {
        return Err(Error::ResonanceNotBracketed);
    }
    let (x0, x1, x2) = (f[best - 1], f[best], f[best + 1]);
    let (y0, y1, y2) = (z[best - 1].re, z[best].re, z[best + 1].re);
    // Newton form of the interpolating parabola, shifted to x1 for conditioning
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    let (f_res, peak_re) = if a < 0.0 {
        // slope at x1 of the parabola
        let s1 = d01 + a * (x1 - x0);
        let dx = -s1 / (2.0 * a);
        (x1 + dx, y1 + s1 * dx + a * dx * dx)
    } else {
        (x1, y1)
    };
    let im_slope = (z[best + 1].im - z[best - 1].im) / (x2 - x0);
    Ok(ResonanceFeatures { f_res, peak_re, im_slope })
}

/// Lumped stand-in for the full-wave unit cell: the patch as a parallel
/// R-L-C resonator loaded by two identical diodes, each coupled to the
/// patch through an ideal transformer of admittance ratio `coupling`.
///
/// `Y = 1/R_p + j w C_p + 1/(j w L_p) + 2 coupling / Z_d` and `z = 1 / (Y Z0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchLoadSurrogate {
    pub r_p: f64,
    pub l_p: f64,
    pub c_p: f64,
    pub coupling: f64,
    pub normalization: ImpedanceNormalization,
}

impl Default for PatchLoadSurrogate {
    /// Tuned so the unbiased diode state resonates at 4.2 GHz.
    fn default() -> Self {
        Self {
            r_p: 3000.0,
            l_p: 1.938_145_623_780_506e-9,
            c_p: 0.5e-12,
            coupling: 0.05,
            normalization: ImpedanceNormalization::default(),
        }
    }
}

impl PatchLoadSurrogate {
    /// Normalized load impedance at `f`.
    pub fn impedance(&self, diode: &VaractorParams, f: f64) -> Result<Complex64> {
        let zd = diode_impedance(diode, f)?;
        let w = TAU * f;
        let j = Complex64::i();
        let y = 1.0 / self.r_p + j * (w * self.c_p) + 1.0 / (j * (w * self.l_p)) + 2.0 * self.coupling / zd;
        Ok(1.0 / (y * self.normalization.z0(f)))
    }

    pub fn spectrum(&self, diode: &VaractorParams, freqs: &[f64]) -> Result<ImpedanceSpectrum> {
        ImpedanceSpectrum::sample(freqs, |f| self.impedance(diode, f))
    }

    /// 3 to 5 GHz in 0.5 MHz steps.
    pub fn design_band() -> Vec<f64> {
        (0..=4000).map(|k| 3.0e9 + 0.5e6 * k as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Cap on simplex updates.
    pub max_iterations: usize,
    /// Size of the starting simplex, as a fraction of each parameter.
    pub initial_step: f64,
    /// Stop once the simplex is this small in log-parameter space.
    pub min_step: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { max_iterations: 500, initial_step: 0.1, min_step: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: VaractorParams,
    pub measured: ResonanceFeatures,
    pub fitted: Option<ResonanceFeatures>,
    /// Per-feature relative residual of the fitted model.
    pub residuals: Option<ResonanceFeatures>,
    pub objective: f64,
    /// Best objective after every iteration, starting with the initial guess.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl FitReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fit `C_d` and `R_d` so that `model` reproduces the measured resonance.
///
/// `L_d`, `C_par` and the bias are taken from `init` and never changed. The
/// objective is the sum of squared relative feature errors, minimized by
/// Nelder-Mead over `(ln C_d, ln R_d)`. One iteration is one simplex update;
/// the fit has converged once every vertex lies within `min_step` of the best
/// in both log coordinates.
pub fn fit_varactor(
    measured: &ImpedanceSpectrum,
    model: impl Fn(&VaractorParams) -> Result<ImpedanceSpectrum>,
    init: VaractorParams,
    config: &FitConfig,
) -> Result<FitReport> {
    init.validate()?;
    if !(config.initial_step > 0.0 && config.min_step > 0.0) {
        return Err(Error::validation("fit config", "steps must be positive"));
    }
    let target = resonance_features(measured)?;
    let r0 = init.r_d.max(0.1);
    let params = |x: &[f64; 2]| init.with_cr(init.c_d * x[0].exp(), r0 * x[1].exp());
    let objective = |x: &[f64; 2]| -> (f64, Option<ResonanceFeatures>) {
        match model(&params(x)).and_then(|s| resonance_features(&s)) {
            Ok(fe) => {
                let e = fe.relative_error(&target);
                let v = e.f_res.powi(2) + e.peak_re.powi(2) + e.im_slope.powi(2);
                (if v.is_finite() { v } else { f64::INFINITY }, Some(fe))
            }
            Err(_) => (f64::INFINITY, None),
        }
    };

    let h = (1.0 + config.initial_step).ln();
    let mut simplex: Vec<([f64; 2], f64, Option<ResonanceFeatures>)> = [[0.0, 0.0], [h, 0.0], [0.0, h]]
        .into_iter()
        .map(|x| {
            let (f, fe) = objective(&x);
            (x, f, fe)
        })
        .collect();
    let mut history = vec![simplex[0].1];
    let mut iterations = 0;
    let mut converged = false;
    let lerp = |a: &[f64; 2], b: &[f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if iterations > 0 {
            history.push(simplex[0].1);
        }
        let spread = simplex[1..]
            .iter()
            .flat_map(|v| [(v.0[0] - simplex[0].0[0]).abs(), (v.0[1] - simplex[0].0[1]).abs()])
            .fold(0.0, f64::max);
        if spread < config.min_step && simplex[0].1.is_finite() {
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }
        iterations += 1;
        let centroid = lerp(&simplex[0].0, &simplex[1].0, 0.5);
        let worst = simplex[2].0;
        let reflect = lerp(&centroid, &worst, -1.0);
        let (fr, fer) = objective(&reflect);
        if fr < simplex[0].1 {
            let expand = lerp(&centroid, &worst, -2.0);
            let (fe, fee) = objective(&expand);
            simplex[2] = if fe < fr { (expand, fe, fee) } else { (reflect, fr, fer) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflect, fr, fer);
        } else {
            let toward = if fr < simplex[2].1 { reflect } else { worst };
            let contract = lerp(&centroid, &toward, 0.5);
            let (fc, fec) = objective(&contract);
            if fc < simplex[2].1.min(fr) {
                simplex[2] = (contract, fc, fec);
            } else {
                for k in 1..3 {
                    let x = lerp(&simplex[0].0, &simplex[k].0, 0.5);
                    let (f, fe) = objective(&x);
                    simplex[k] = (x, f, fe);
                }
            }
        }
    }

    let (best_x, best_obj, best_feats) = simplex[0];
    let best = params(&best_x);
    let report = FitReport {
        params: best,
        measured: target,
        fitted: best_feats,
        residuals: best_feats.map(|f| f.relative_error(&target)),
        objective: best_obj,
        history,
        iterations,
        converged,
    };
    if converged {
        Ok(report)
    } else {
        Err(Error::FitNotConverged { iterations, best: Box::new(report) })
    }
}
