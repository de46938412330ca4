//! Addressed infrared control plane: a NEC-style frame codec, the per-block
//! controller and a broadcast-channel simulator for whole arrays.

mod codec;
mod controller;
mod fabric;

pub use codec::{
    decode_frame, encode_frame, ControlFrame, DecodeError, ModulatedWaveform, BIT_BURST_US, CARRIER_HZ,
    DEFAULT_TOLERANCE, FRAME_SEGMENTS, LEADER_BURST_US, LEADER_GAP_US, MAX_ADDRESS, ONE_GAP_US, TRAILER_US,
    WORD_BITS, ZERO_GAP_US,
};
pub use controller::{controller_step, voltage_to_state, BlockController, ControllerState, StepOutcome, PATCHES_PER_BLOCK};
pub use fabric::{BlockDelivery, ChannelEvent, ChannelModel, FrameEvent, RisArrayFabric, TransmissionReport, MAX_BLOCKS};
