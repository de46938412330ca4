use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Source illuminating the aperture.
///
/// Plane-wave angles give the direction the wave arrives *from*, in the
/// spherical system whose polar axis is the aperture normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Excitation {
    PlaneWave {
        theta: f64,
        phi: f64,
        amplitude: f64,
        /// Phase of the incident field at the origin, radians.
        phase_ref: f64,
    },
    PointSource {
        position: [f64; 3],
        /// Field magnitude at 1 m from the source.
        amplitude: f64,
    },
}

impl Excitation {
    pub fn plane_wave(theta: f64, phi: f64) -> Result<Self> {
        let e = Excitation::PlaneWave { theta, phi, amplitude: 1.0, phase_ref: 0.0 };
        e.validate()?;
        Ok(e)
    }

    pub fn normal_incidence() -> Self {
        Excitation::PlaneWave { theta: 0.0, phi: 0.0, amplitude: 1.0, phase_ref: 0.0 }
    }

    pub fn point_source(position: [f64; 3], amplitude: f64) -> Result<Self> {
        let e = Excitation::PointSource { position, amplitude };
        e.validate()?;
        Ok(e)
    }

    /// Plane wave arriving in the xz plane at a signed angle of incidence.
    ///
    /// Positive `theta_inc` places the source on the -x side, so a uniform
    /// aperture reflects specularly towards `+theta_inc`.
    pub fn in_plane_incidence(theta_inc: f64) -> Result<Self> {
        let phi = if theta_inc > 0.0 { std::f64::consts::PI } else { 0.0 };
        Self::plane_wave(theta_inc.abs(), phi)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Excitation::PlaneWave { theta, phi, amplitude, phase_ref } => {
                if !(0.0..FRAC_PI_2).contains(&theta) {
                    return Err(Error::validation("excitation", format!("theta_inc must lie in [0, pi/2), got {theta}")));
                }
                if !(phi.is_finite() && amplitude.is_finite() && phase_ref.is_finite()) {
                    return Err(Error::validation("excitation", "non-finite plane-wave parameter"));
                }
            }
            Excitation::PointSource { position, amplitude } => {
                if !(position[2] > 0.0) || position.iter().any(|p| !p.is_finite()) {
                    return Err(Error::validation("excitation", "point source must sit in front of the aperture (z > 0)"));
                }
                if !amplitude.is_finite() {
                    return Err(Error::validation("excitation", "non-finite point-source amplitude"));
                }
            }
        }
        Ok(())
    }

    /// The same source with its complex amplitude multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        match *self {
            Excitation::PlaneWave { theta, phi, amplitude, phase_ref } => Excitation::PlaneWave {
                theta,
                phi,
                amplitude: amplitude * c.norm(),
                phase_ref: phase_ref + c.arg(),
            },
            // a point source has no phase reference; only real scaling applies
            Excitation::PointSource { position, amplitude } => {
                Excitation::PointSource { position, amplitude: amplitude * c.re }
            }
        }
    }
}
