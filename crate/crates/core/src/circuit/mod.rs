//! Varactor equivalent circuit, reflection/impedance conversion and
//! extraction of (C_d, R_d) from impedance spectra.

mod fit;
mod spectrum;
mod varactor;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use fit::{fit_varactor, resonance_features, FitConfig, FitReport, PatchLoadSurrogate, ResonanceFeatures};
pub use spectrum::ImpedanceSpectrum;
pub use varactor::{
    diode_impedance, series_resonance, state_separation, VaractorParams, LEAD_INDUCTANCE, MIN_STATE_SEPARATION,
    PARASITIC_CAPACITANCE,
};

use crate::error::{Error, Result};
use crate::field::SPEED_OF_LIGHT;

/// Free-space wave impedance, ohms.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730_313_668;

/// Broad wall of WR229 waveguide, metres.
pub const WR229_BROAD_WALL: f64 = 0.058_17;

/// `z = (1 + gamma) / (1 - gamma)`.
pub fn gamma_to_impedance(gamma: Complex64) -> Result<Complex64> {
    let den = 1.0 - gamma;
    if den.norm() == 0.0 {
        return Err(Error::InfiniteImpedance);
    }
    Ok((1.0 + gamma) / den)
}

/// `gamma = (z - 1) / (z + 1)`.
pub fn impedance_to_gamma(z: Complex64) -> Result<Complex64> {
    let den = z + 1.0;
    if den.norm() == 0.0 {
        return Err(Error::InfiniteReflection);
    }
    Ok((z - 1.0) / den)
}

/// Reference impedance used to normalize load impedances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImpedanceNormalization {
    /// Frequency-independent `Z0`, ohms.
    Constant { z0: f64 },
    /// TE10 wave impedance `eta / sqrt(1 - (fc / f)^2)` of a rectangular
    /// guide with broad wall `a` (cutoff `c / 2a`).
    Te10 { broad_wall: f64 },
}

impl Default for ImpedanceNormalization {
    fn default() -> Self {
        ImpedanceNormalization::Constant { z0: FREE_SPACE_IMPEDANCE }
    }
}

impl ImpedanceNormalization {
    pub fn wr229() -> Self {
        ImpedanceNormalization::Te10 { broad_wall: WR229_BROAD_WALL }
    }

    pub fn cutoff(&self) -> Option<f64> {
        match self {
            ImpedanceNormalization::Constant { .. } => None,
            ImpedanceNormalization::Te10 { broad_wall } => Some(SPEED_OF_LIGHT / (2.0 * broad_wall)),
        }
    }

    /// Reference impedance at `f`. Below cutoff the TE10 impedance is
    /// imaginary; the magnitude is returned as `f64::INFINITY` there.
    pub fn z0(&self, f: f64) -> f64 {
        match self {
            ImpedanceNormalization::Constant { z0 } => *z0,
            ImpedanceNormalization::Te10 { .. } => {
                let fc = self.cutoff().unwrap_or(0.0);
                let r = 1.0 - (fc / f).powi(2);
                if r <= 0.0 {
                    f64::INFINITY
                } else {
                    FREE_SPACE_IMPEDANCE / r.sqrt()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_reflection_values() {
        let z = |g: f64| gamma_to_impedance(Complex64::new(g, 0.0)).unwrap();
        assert!((z(0.0) - 1.0).norm() < 1e-15);
        assert!(z(-1.0).norm() < 1e-15);
        assert!((z(0.5) - 3.0).norm() < 1e-15);
    }

    #[test]
    fn open_and_anti_matched_are_errors() {
        assert!(matches!(gamma_to_impedance(Complex64::new(1.0, 0.0)), Err(Error::InfiniteImpedance)));
        assert!(matches!(impedance_to_gamma(Complex64::new(-1.0, 0.0)), Err(Error::InfiniteReflection)));
    }

    #[test]
    fn wr229_cutoff() {
        let fc = ImpedanceNormalization::wr229().cutoff().unwrap();
        assert!((fc - 2.577e9).abs() < 1e6, "{fc}");
        assert_eq!(ImpedanceNormalization::default().z0(4.2e9), FREE_SPACE_IMPEDANCE);
        assert!(ImpedanceNormalization::wr229().z0(4.2e9) > FREE_SPACE_IMPEDANCE);
        assert_eq!(ImpedanceNormalization::wr229().z0(2e9), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn conversion_round_trip(r in 0.0f64..0.999, a in -std::f64::consts::PI..std::f64::consts::PI) {
            let g = Complex64::from_polar(r, a);
            let back = impedance_to_gamma(gamma_to_impedance(g).unwrap()).unwrap();
            prop_assert!((back - g).norm() < 1e-12);
        }
    }
}
