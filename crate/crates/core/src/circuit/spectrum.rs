use std::fmt::Write as _;

use num_complex::Complex64;

use super::{gamma_to_impedance, impedance_to_gamma, ImpedanceNormalization};
use crate::error::{Error, Result};

/// Normalized impedance `z = Z / Z0` against frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceSpectrum {
    freqs: Vec<f64>,
    z: Vec<Complex64>,
}

impl ImpedanceSpectrum {
    pub fn new(freqs: Vec<f64>, z: Vec<Complex64>) -> Result<Self> {
        if freqs.len() != z.len() {
            return Err(Error::validation("spectrum", format!("{} frequencies but {} samples", freqs.len(), z.len())));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("spectrum", "frequencies must be strictly increasing"));
        }
        if let Some((f, v)) = freqs.iter().zip(&z).find(|(_, v)| v.re < -1e-9) {
            return Err(Error::validation("spectrum", format!("active sample Re(z) = {} at {f} Hz", v.re)));
        }
        Ok(Self { freqs, z })
    }

    /// Convert a one-port reflection spectrum.
    pub fn from_gamma(freqs: Vec<f64>, gamma: &[Complex64]) -> Result<Self> {
        let z = gamma.iter().map(|g| gamma_to_impedance(*g)).collect::<Result<Vec<_>>>()?;
        Self::new(freqs, z)
    }

    /// Sample `z(f)` from a closure on a frequency list.
    pub fn sample(freqs: &[f64], mut z: impl FnMut(f64) -> Result<Complex64>) -> Result<Self> {
        let values = freqs.iter().map(|&f| z(f)).collect::<Result<Vec<_>>>()?;
        Self::new(freqs.to_vec(), values)
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn gamma(&self) -> Result<Vec<Complex64>> {
        self.z.iter().map(|z| impedance_to_gamma(*z)).collect()
    }

    /// Renormalize from a constant `Z0` to another reference.
    pub fn renormalized(&self, from_z0: f64, to: &ImpedanceNormalization) -> Self {
        let z = self.freqs.iter().zip(&self.z).map(|(&f, z)| z * from_z0 / to.z0(f)).collect();
        Self { freqs: self.freqs.clone(), z }
    }

    /// Touchstone-style one-port text: `# Hz S RI R 1` then `freq re(gamma) im(gamma)`.
    pub fn to_touchstone(&self) -> Result<String> {
        let mut out = String::from("! one-port reflection, normalized\n# Hz S RI R 1\n");
        for (f, g) in self.freqs.iter().zip(self.gamma()?) {
            let _ = writeln!(out, "{f} {:.15e} {:.15e}", g.re, g.im);
        }
        Ok(out)
    }

    /// Parse one-port Touchstone (`RI`, `MA` or `DB` formats, any frequency unit).
    pub fn from_touchstone(text: &str) -> Result<Self> {
        let mut scale = 1e9; // Touchstone default unit is GHz
        let mut format = "MA".to_string();
        let (mut freqs, mut gamma) = (Vec::new(), Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('!').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(opts) = line.strip_prefix('#') {
                for tok in opts.split_whitespace() {
                    match tok.to_ascii_uppercase().as_str() {
                        "HZ" => scale = 1.0,
                        "KHZ" => scale = 1e3,
                        "MHZ" => scale = 1e6,
                        "GHZ" => scale = 1e9,
                        f @ ("RI" | "MA" | "DB") => format = f.to_string(),
                        _ => {}
                    }
                }
                continue;
            }
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e: std::num::ParseFloatError| Error::parse(i + 1, e.to_string()))?;
            if nums.len() != 3 {
                return Err(Error::parse(i + 1, format!("one-port rows need 3 numbers, found {}", nums.len())));
            }
            let g = match format.as_str() {
                "RI" => Complex64::new(nums[1], nums[2]),
                "MA" => Complex64::from_polar(nums[1], nums[2].to_radians()),
                _ => Complex64::from_polar(10f64.powf(nums[1] / 20.0), nums[2].to_radians()),
            };
            freqs.push(nums[0] * scale);
            gamma.push(g);
        }
        Self::from_gamma(freqs, &gamma)
    }

    /// CSV `freq_hz,re_z,im_z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,re_z,im_z\n");
        for (f, z) in self.freqs.iter().zip(&self.z) {
            let _ = writeln!(out, "{f},{:.15e},{:.15e}", z.re, z.im);
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (mut freqs, mut z) = (Vec::new(), Vec::new());
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(|c: char| c.is_ascii_alphabetic()) {
                continue;
            }
            let nums: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e: std::num::ParseFloatError| Error::parse(i + 1, e.to_string()))?;
            if nums.len() != 3 {
                return Err(Error::parse(i + 1, format!("expected 3 columns, found {}", nums.len())));
            }
            freqs.push(nums[0]);
            z.push(Complex64::new(nums[1], nums[2]));
        }
        Self::new(freqs, z)
    }
}
