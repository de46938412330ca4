use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lead inductance, independent of bias.
pub const LEAD_INDUCTANCE: f64 = 0.2e-9;
/// Parasitic shunt capacitance, independent of bias.
pub const PARASITIC_CAPACITANCE: f64 = 30e-15;
/// Minimum C_d difference between the two states for stable switching.
pub const MIN_STATE_SEPARATION: f64 = 0.5e-12;

/// Series R-L-C varactor with a parallel parasitic capacitance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaractorParams {
    /// Junction capacitance C_d(U), farads.
    pub c_d: f64,
    /// Series resistance R_d(U), ohms.
    pub r_d: f64,
    /// Lead inductance L_d, henries.
    pub l_d: f64,
    /// Parasitic capacitance C_par, farads.
    pub c_par: f64,
    /// Bias voltage U, volts.
    pub bias: f64,
}

impl VaractorParams {
    pub fn new(c_d: f64, r_d: f64, l_d: f64, c_par: f64, bias: f64) -> Result<Self> {
        let p = Self { c_d, r_d, l_d, c_par, bias };
        p.validate()?;
        Ok(p)
    }

    /// Extracted values at U = 0 V.
    pub fn unbiased() -> Self {
        Self { c_d: 2.1e-12, r_d: 7.5, l_d: LEAD_INDUCTANCE, c_par: PARASITIC_CAPACITANCE, bias: 0.0 }
    }

    /// Extracted values at U = 3.2 V.
    pub fn biased() -> Self {
        Self { c_d: 0.87e-12, r_d: 7.1, l_d: LEAD_INDUCTANCE, c_par: PARASITIC_CAPACITANCE, bias: 3.2 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.c_d > 0.0 && self.r_d >= 0.0 && self.l_d >= 0.0 && self.c_par >= 0.0;
        if !ok || ![self.c_d, self.r_d, self.l_d, self.c_par, self.bias].iter().all(|v| v.is_finite()) {
            return Err(Error::validation(
                "varactor",
                format!("need C_d > 0 and R_d, L_d, C_par >= 0; got {self:?}"),
            ));
        }
        Ok(())
    }

    pub fn with_cr(self, c_d: f64, r_d: f64) -> Self {
        Self { c_d, r_d, ..self }
    }
}

/// Impedance of the varactor network in ohms.
///
/// `Z_s = R_d + j w L_d + 1/(j w C_d)` in parallel with `1/(j w C_par)`;
/// `C_par = 0` leaves the series branch alone.
pub fn diode_impedance(p: &VaractorParams, f: f64) -> Result<Complex64> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::validation("frequency", format!("must be positive, got {f}")));
    }
    p.validate()?;
    let w = TAU * f;
    let j = Complex64::i();
    let series = p.r_d + j * (w * p.l_d) + 1.0 / (j * (w * p.c_d));
    if p.c_par == 0.0 {
        return Ok(series);
    }
    // Z_s || Z_p written as admittances to avoid the Z_s Z_p product
    let shunt = j * (w * p.c_par);
    Ok(1.0 / (1.0 / series + shunt))
}

/// Series resonance of the bare R-L-C branch.
pub fn series_resonance(p: &VaractorParams) -> f64 {
    1.0 / (TAU * (p.l_d * p.c_d).sqrt())
}

/// `|C_d(a) - C_d(b)|`.
pub fn state_separation(a: &VaractorParams, b: &VaractorParams) -> f64 {
    (a.c_d - b.c_d).abs()
}
