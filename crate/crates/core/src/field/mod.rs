//! Forward scattering model of a phase-coded patch array.
//!
//! Every element re-radiates the local incident field multiplied by its
//! complex reflection coefficient, with a Huygens element pattern
//! `F(theta) = cos^2(theta / 2)`. The same model drives the target-plane
//! synthesis ([`reflected_field_on_plane`]), the far-field pattern
//! ([`far_field_direct`]) and, through a sampled near-field map, the
//! plane-wave-spectrum transform ([`nf2ff`]).
//!
//! All sums run over elements in index order so results are bitwise
//! reproducible.

mod directivity;
mod far;
mod incident;
mod nf2ff;
mod plane;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use directivity::{directive_gain_db, directivity, solid_angle_weights, DirectivityReport};
pub use far::far_field_direct;
pub use incident::{incident_field, incident_phase};
pub use nf2ff::{nf2ff, Nf2ffOptions};
pub use plane::{element_contributions, field_from_contributions, reflected_field_on_plane, ElementContributions};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Amplitude law applied to each element's re-radiated field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spreading {
    /// No 1/r decay: the target-plane sum exactly as the coding model writes it.
    #[default]
    PaperLiteral,
    /// Each contribution additionally decays as 1/r.
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationContext {
    frequency: f64,
    wavelength: f64,
    k0: f64,
    pub spreading: Spreading,
}

impl PropagationContext {
    pub fn new(frequency: f64, spreading: Spreading) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::validation("propagation context", format!("frequency must be positive, got {frequency}")));
        }
        let wavelength = SPEED_OF_LIGHT / frequency;
        Ok(Self { frequency, wavelength, k0: TAU / wavelength, spreading })
    }

    pub fn with_spreading(mut self, spreading: Spreading) -> Self {
        self.spreading = spreading;
        self
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }
}

impl Default for PropagationContext {
    /// 5.2 GHz, literal spreading.
    fn default() -> Self {
        Self::new(crate::types::DEFAULT_DESIGN_FREQUENCY, Spreading::PaperLiteral).expect("valid default")
    }
}

/// Huygens element pattern `cos^2(theta/2) = (1 + cos theta) / 2`.
pub fn element_pattern(theta: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::validation("polar angle", format!("theta must lie in [0, pi], got {theta}")));
    }
    Ok(0.5 * (1.0 + theta.cos()))
}

/// Euclidean distance; symmetric in its arguments.
pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}
