use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::State;

/// Measured reflection magnitude at 5.2 GHz (-4.7 dB).
pub const DEFAULT_REFLECTION_MAGNITUDE: f64 = 0.58;
pub const DEFAULT_DESIGN_FREQUENCY: f64 = 5.2e9;
pub const DEFAULT_V0: f64 = 0.0;
pub const DEFAULT_V1: f64 = 3.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    /// |R|, in [0, 1].
    pub magnitude: f64,
    /// Reflection phase in radians.
    pub phase: f64,
    /// Bias that realizes this state, volts.
    pub drive_voltage: f64,
}

/// Complex reflection and drive voltage of each 1-bit state at the design frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCellStateTable {
    pub frequency: f64,
    pub s0: CellState,
    pub s1: CellState,
}

impl Default for UnitCellStateTable {
    fn default() -> Self {
        Self::with_magnitude(DEFAULT_REFLECTION_MAGNITUDE)
    }
}

impl UnitCellStateTable {
    pub fn new(frequency: f64, s0: CellState, s1: CellState) -> Result<Self> {
        let table = Self { frequency, s0, s1 };
        table.validate()?;
        Ok(table)
    }

    /// Default phases (-pi/2, +pi/2) and voltages with a common |R|.
    pub fn with_magnitude(magnitude: f64) -> Self {
        Self {
            frequency: DEFAULT_DESIGN_FREQUENCY,
            s0: CellState { magnitude, phase: -FRAC_PI_2, drive_voltage: DEFAULT_V0 },
            s1: CellState { magnitude, phase: FRAC_PI_2, drive_voltage: DEFAULT_V1 },
        }
    }

    pub fn lossless() -> Self {
        Self::with_magnitude(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::validation("state table", "frequency must be positive"));
        }
        for (name, s) in [("S0", &self.s0), ("S1", &self.s1)] {
            if !(0.0..=1.0).contains(&s.magnitude) {
                return Err(Error::validation("state table", format!("|R| of {name} must lie in [0, 1], got {}", s.magnitude)));
            }
            if !s.phase.is_finite() || !s.drive_voltage.is_finite() {
                return Err(Error::validation("state table", format!("{name} has a non-finite entry")));
            }
        }
        if self.s0.drive_voltage == self.s1.drive_voltage {
            return Err(Error::validation("state table", "the two states need distinct drive voltages"));
        }
        Ok(())
    }

    pub fn state(&self, state: State) -> &CellState {
        match state {
            State::S0 => &self.s0,
            State::S1 => &self.s1,
        }
    }

    pub fn reflection(&self, state: State) -> Complex64 {
        let s = self.state(state);
        Complex64::from_polar(s.magnitude, s.phase)
    }

    pub fn phase(&self, state: State) -> f64 {
        self.state(state).phase
    }

    pub fn voltage(&self, state: State) -> f64 {
        self.state(state).drive_voltage
    }

    /// phase(S1) - phase(S0) wrapped to (-pi, pi].
    pub fn phase_difference(&self) -> f64 {
        wrap_phase(self.s1.phase - self.s0.phase)
    }

    /// Exact match against the configured drive voltages.
    pub fn state_for_voltage(&self, volts: f64) -> Result<State> {
        if volts == self.s0.drive_voltage {
            Ok(State::S0)
        } else if volts == self.s1.drive_voltage {
            Ok(State::S1)
        } else {
            Err(Error::UnknownVoltage(volts))
        }
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase - TAU * ((phase + PI) / TAU).floor();
    // `w` lies in [-pi, pi); move the lower edge onto +pi
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matches_prototype_constants() {
        let t = UnitCellStateTable::default();
        assert_eq!(t.s0.magnitude, 0.58);
        assert_eq!(t.s1.magnitude, 0.58);
        assert_eq!(t.frequency, 5.2e9);
        assert_eq!(t.voltage(State::S0), 0.0);
        assert_eq!(t.voltage(State::S1), 3.2);
        assert_eq!(t.phase_difference(), PI);
        t.validate().unwrap();
    }

    #[test]
    fn wrap_edges() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(0.5 - TAU) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn magnitude_must_be_passive() {
        let mut t = UnitCellStateTable::default();
        t.s1.magnitude = 1.2;
        assert!(t.validate().is_err());
        let ok = UnitCellStateTable::new(5.2e9, t.s0, CellState { magnitude: 1.0, ..t.s1 });
        assert!(ok.is_ok());
    }

    #[test]
    fn voltage_lookup_is_exact() {
        let t = UnitCellStateTable::default();
        assert_eq!(t.state_for_voltage(0.0).unwrap(), State::S0);
        assert_eq!(t.state_for_voltage(3.2).unwrap(), State::S1);
        assert!(matches!(t.state_for_voltage(2.8), Err(Error::UnknownVoltage(_))));
    }
}
