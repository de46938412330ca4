use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codec::{decode_frame, encode_frame, ControlFrame, ModulatedWaveform, FRAME_SEGMENTS, ONE_GAP_US, ZERO_GAP_US};
use super::controller::{voltage_to_state, BlockController, StepOutcome, PATCHES_PER_BLOCK};
use crate::error::{Error, Result};
use crate::types::{PhasePattern, State, UnitCellStateTable};

pub const MAX_BLOCKS: usize = 128;

/// Address and payload bits; a corruption flips one of these.
const DATA_BITS: usize = 11;

/// One-way broadcast light channel. Each transmitted frame independently
/// is lost (nobody hears it), corrupted (one data bit flipped) or clean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub loss: f64,
    pub corruption: f64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn lossless() -> Self {
        Self { loss: 0.0, corruption: 0.0, seed: 0 }
    }

    pub fn new(loss: f64, corruption: f64, seed: u64) -> Result<Self> {
        let c = Self { loss, corruption, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let p = |v: f64| (0.0..=1.0).contains(&v);
        if !(p(self.loss) && p(self.corruption) && self.loss + self.corruption <= 1.0) {
            return Err(Error::validation(
                "channel",
                format!("loss {} and corruption {} must be probabilities summing to <= 1", self.loss, self.corruption),
            ));
        }
        Ok(())
    }
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self::lossless()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelEvent {
    Clean,
    Lost,
    Corrupted { bit: usize },
}

/// One transmitted frame as seen by the addressed block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEvent {
    pub seq: usize,
    pub round: usize,
    pub block: usize,
    pub address: u8,
    pub payload: u8,
    pub channel: ChannelEvent,
    /// Outcome at the addressed controller; `None` when the frame was lost.
    pub outcome: Option<StepOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDelivery {
    pub block: usize,
    pub address: u8,
    pub attempts: usize,
    pub delivered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionReport {
    pub frames_sent: usize,
    pub rounds: usize,
    pub blocks: Vec<BlockDelivery>,
}

impl TransmissionReport {
    pub fn delivered(&self) -> usize {
        self.blocks.iter().filter(|b| b.delivered).count()
    }

    pub fn undelivered(&self) -> usize {
        self.blocks.len() - self.delivered()
    }
}

/// A rectangular array of 2x2-patch blocks, each with its own controller,
/// sharing one broadcast IR channel.
///
/// Block `b` sits at block row `b / blocks_x`, block column `b % blocks_x`;
/// patch `i` of a block is at local (row, col) = `(i / 2, i % 2)`.
#[derive(Debug, Clone)]
pub struct RisArrayFabric {
    blocks_x: usize,
    blocks_y: usize,
    table: UnitCellStateTable,
    controllers: Vec<BlockController>,
    channel: ChannelModel,
    rng: ChaCha8Rng,
    transcript: Vec<FrameEvent>,
}

impl RisArrayFabric {
    /// Fabric for an `n_x` x `n_y` patch aperture with addresses `0..blocks`
    /// in block order.
    pub fn new(n_x: usize, n_y: usize, table: &UnitCellStateTable, channel: ChannelModel) -> Result<Self> {
        if n_x == 0 || n_y == 0 || !n_x.is_multiple_of(2) || !n_y.is_multiple_of(2) {
            return Err(Error::validation("fabric", format!("patch counts must be even and positive, got {n_x} x {n_y}")));
        }
        let blocks = (n_x / 2) * (n_y / 2);
        if blocks > MAX_BLOCKS {
            return Err(Error::AddressSpaceOverflow { blocks });
        }
        Self::with_addresses(n_x, n_y, table, channel, (0..blocks as u8).collect())
    }

    pub fn with_addresses(
        n_x: usize,
        n_y: usize,
        table: &UnitCellStateTable,
        channel: ChannelModel,
        addresses: Vec<u8>,
    ) -> Result<Self> {
        if n_x == 0 || n_y == 0 || !n_x.is_multiple_of(2) || !n_y.is_multiple_of(2) {
            return Err(Error::validation("fabric", format!("patch counts must be even and positive, got {n_x} x {n_y}")));
        }
        let (blocks_x, blocks_y) = (n_x / 2, n_y / 2);
        let blocks = blocks_x * blocks_y;
        if blocks > MAX_BLOCKS {
            return Err(Error::AddressSpaceOverflow { blocks });
        }
        if addresses.len() != blocks {
            return Err(Error::validation("fabric", format!("{} addresses for {blocks} blocks", addresses.len())));
        }
        let mut seen = [false; MAX_BLOCKS];
        for &a in &addresses {
            if a as usize >= MAX_BLOCKS || seen[a as usize] {
                return Err(Error::validation("fabric", format!("address {a} is out of range or repeated")));
            }
            seen[a as usize] = true;
        }
        table.validate()?;
        channel.validate()?;
        let controllers = addresses.iter().map(|&a| BlockController::new(a, table)).collect::<Result<_>>()?;
        Ok(Self {
            blocks_x,
            blocks_y,
            table: *table,
            controllers,
            channel,
            rng: ChaCha8Rng::seed_from_u64(channel.seed),
            transcript: Vec::new(),
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.controllers.len()
    }

    pub fn n_x(&self) -> usize {
        2 * self.blocks_x
    }

    pub fn n_y(&self) -> usize {
        2 * self.blocks_y
    }

    pub fn controllers(&self) -> &[BlockController] {
        &self.controllers
    }

    pub fn address(&self, block: usize) -> u8 {
        self.controllers[block].address()
    }

    pub fn transcript(&self) -> &[FrameEvent] {
        &self.transcript
    }

    /// Patch (row, col) of patch `i` in block `b`.
    pub fn patch_position(&self, block: usize, i: usize) -> (usize, usize) {
        let (br, bc) = (block / self.blocks_x, block % self.blocks_x);
        (2 * br + i / 2, 2 * bc + i % 2)
    }

    /// The frame that sets block `block` to its part of `pattern`.
    pub fn frame_for_block(&self, pattern: &PhasePattern, block: usize) -> Result<ControlFrame> {
        let mut payload = 0u8;
        for i in 0..PATCHES_PER_BLOCK {
            let (r, c) = self.patch_position(block, i);
            payload |= pattern.at(r, c).bit() << i;
        }
        ControlFrame::new(self.address(block), payload)
    }

    /// Elementwise states currently driven by the controllers.
    pub fn pattern_view(&self) -> PhasePattern {
        let mut states = vec![State::S1; self.n_x() * self.n_y()];
        for (b, c) in self.controllers.iter().enumerate() {
            for (i, &v) in c.outputs().iter().enumerate() {
                let (r, col) = self.patch_position(b, i);
                // outputs only ever hold one of the table's two voltages
                states[r * self.n_x() + col] = voltage_to_state(v, &self.table).expect("controller voltage in table");
            }
        }
        PhasePattern::from_states(self.n_x(), self.n_y(), states).expect("fabric shape is valid")
    }

    /// Broadcast one waveform: every controller hears the same signal.
    pub fn broadcast(&mut self, w: &ModulatedWaveform) -> Vec<StepOutcome> {
        let tol = self.controllers.first().map_or(0.25, |c| c.tolerance());
        let decoded = decode_frame(w, tol);
        self.controllers.iter_mut().map(|c| c.receive(decoded)).collect()
    }

    fn corrupt(w: &ModulatedWaveform, bit: usize) -> ModulatedWaveform {
        let mut s = w.segments().to_vec();
        let gap = 3 + 2 * bit;
        debug_assert!(gap < FRAME_SEGMENTS);
        s[gap] = if s[gap] == ZERO_GAP_US { ONE_GAP_US } else { ZERO_GAP_US };
        ModulatedWaveform::new(s).expect("durations stay positive")
    }

    /// Send one frame per block, then `retransmissions` further rounds of
    /// every frame. Failures are silent at the controllers and recorded in
    /// the transcript.
    pub fn apply_pattern(&mut self, pattern: &PhasePattern, retransmissions: usize) -> Result<TransmissionReport> {
        if pattern.n_x() != self.n_x() || pattern.n_y() != self.n_y() {
            return Err(Error::GridMismatch(format!(
                "pattern is {} x {}, fabric is {} x {}",
                pattern.n_x(),
                pattern.n_y(),
                self.n_x(),
                self.n_y()
            )));
        }
        let frames: Vec<ControlFrame> =
            (0..self.n_blocks()).map(|b| self.frame_for_block(pattern, b)).collect::<Result<_>>()?;
        let waveforms: Vec<ModulatedWaveform> = frames.iter().map(encode_frame).collect();
        let mut blocks: Vec<BlockDelivery> = (0..self.n_blocks())
            .map(|b| BlockDelivery { block: b, address: self.address(b), attempts: 0, delivered: false })
            .collect();
        let mut frames_sent = 0;
        for round in 0..=retransmissions {
            for (b, (f, w)) in frames.iter().zip(&waveforms).enumerate() {
                let u: f64 = self.rng.random();
                let channel = if u < self.channel.loss {
                    ChannelEvent::Lost
                } else if u < self.channel.loss + self.channel.corruption {
                    ChannelEvent::Corrupted { bit: self.rng.random_range(0..DATA_BITS) }
                } else {
                    ChannelEvent::Clean
                };
                let outcome = match channel {
                    ChannelEvent::Lost => None,
                    ChannelEvent::Clean => Some(self.broadcast(w)[b]),
                    ChannelEvent::Corrupted { bit } => Some(self.broadcast(&Self::corrupt(w, bit))[b]),
                };
                blocks[b].attempts += 1;
                if outcome == Some(StepOutcome::Applied) {
                    blocks[b].delivered = true;
                }
                self.transcript.push(FrameEvent {
                    seq: frames_sent,
                    round,
                    block: b,
                    address: f.address(),
                    payload: f.payload(),
                    channel,
                    outcome,
                });
                frames_sent += 1;
            }
        }
        Ok(TransmissionReport { frames_sent, rounds: retransmissions + 1, blocks })
    }

    /// Transcript as JSON lines.
    pub fn transcript_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.transcript {
            let _ = writeln!(out, "{}", serde_json::to_string(e)?);
        }
        Ok(out)
    }
}
