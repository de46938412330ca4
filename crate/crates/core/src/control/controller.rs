use serde::{Deserialize, Serialize};

use super::codec::{decode_frame, ControlFrame, DecodeError, ModulatedWaveform, DEFAULT_TOLERANCE};
use crate::error::Result;
use crate::types::{State, UnitCellStateTable};

pub const PATCHES_PER_BLOCK: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerState {
    #[default]
    Idle,
    Receiving,
    Applying,
}

/// What a controller did with one received transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StepOutcome {
    Applied,
    AddressMismatch,
    DecodeFailed { error: DecodeError },
}

/// Firmware of one 2x2-patch block: listens for frames carrying its own
/// address and sets the four drive voltages from the payload bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockController {
    address: u8,
    v0: f64,
    v1: f64,
    outputs: [f64; PATCHES_PER_BLOCK],
    state: ControllerState,
    errors: u64,
    tolerance: f64,
}

impl BlockController {
    /// Powers up with every output at the S1 drive voltage.
    pub fn new(address: u8, table: &UnitCellStateTable) -> Result<Self> {
        ControlFrame::new(address, 0)?;
        let (v0, v1) = (table.voltage(State::S0), table.voltage(State::S1));
        Ok(Self { address, v0, v1, outputs: [v1; PATCHES_PER_BLOCK], state: ControllerState::Idle, errors: 0, tolerance: DEFAULT_TOLERANCE })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn address(&self) -> u8 {
        self.address
    }

    /// Drive voltages of patches 0..3.
    pub fn outputs(&self) -> [f64; PATCHES_PER_BLOCK] {
        self.outputs
    }

    pub fn state(&self) -> ControllerState {
        self.state
    }

    /// Frames that failed to decode.
    pub fn error_count(&self) -> u64 {
        self.errors
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Demodulate and act on one transmission.
    pub fn step(&mut self, w: &ModulatedWaveform) -> StepOutcome {
        self.state = ControllerState::Receiving;
        let decoded = decode_frame(w, self.tolerance);
        self.receive(decoded)
    }

    /// Act on an already demodulated transmission.
    pub fn receive(&mut self, decoded: std::result::Result<ControlFrame, DecodeError>) -> StepOutcome {
        let outcome = match decoded {
            Err(error) => {
                self.errors += 1;
                StepOutcome::DecodeFailed { error }
            }
            Ok(f) if f.address() != self.address => StepOutcome::AddressMismatch,
            Ok(f) => {
                self.state = ControllerState::Applying;
                for (i, out) in self.outputs.iter_mut().enumerate() {
                    *out = if (f.payload() >> i) & 1 == 1 { self.v1 } else { self.v0 };
                }
                StepOutcome::Applied
            }
        };
        self.state = ControllerState::Idle;
        outcome
    }
}

/// Functional form of [`BlockController::step`].
pub fn controller_step(c: &BlockController, w: &ModulatedWaveform) -> BlockController {
    let mut next = c.clone();
    next.step(w);
    next
}

pub fn voltage_to_state(v: f64, table: &UnitCellStateTable) -> Result<State> {
    table.state_for_voltage(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::encode_frame;
    use crate::error::Error;

    fn controller(addr: u8) -> BlockController {
        BlockController::new(addr, &UnitCellStateTable::default()).unwrap()
    }

    #[test]
    fn payload_bits_map_to_patches() {
        let c = controller(7);
        let next = controller_step(&c, &encode_frame(&ControlFrame::new(7, 0b1010).unwrap()));
        assert_eq!(next.outputs(), [0.0, 3.2, 0.0, 3.2]);
        assert_eq!(next.state(), ControllerState::Idle);
        // the input controller is untouched
        assert_eq!(c.outputs(), [3.2; 4]);
    }

    #[test]
    fn foreign_address_is_ignored() {
        let mut c = controller(7);
        let out = c.step(&encode_frame(&ControlFrame::new(8, 0).unwrap()));
        assert_eq!(out, StepOutcome::AddressMismatch);
        assert_eq!(c.outputs(), [3.2; 4]);
        assert_eq!(c.error_count(), 0);
    }

    #[test]
    fn corrupted_frame_counts_an_error() {
        let mut c = controller(7);
        let w = encode_frame(&ControlFrame::new(7, 0).unwrap()).truncated(20);
        assert!(matches!(c.step(&w), StepOutcome::DecodeFailed { .. }));
        assert_eq!(c.outputs(), [3.2; 4]);
        assert_eq!(c.error_count(), 1);
    }

    #[test]
    fn drive_voltages_map_to_states() {
        let t = UnitCellStateTable::default();
        assert_eq!(voltage_to_state(0.0, &t).unwrap(), State::S0);
        assert_eq!(voltage_to_state(3.2, &t).unwrap(), State::S1);
        assert!(matches!(voltage_to_state(2.8, &t), Err(Error::UnknownVoltage(_))));
    }
}
