use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

pub const CARRIER_HZ: f64 = 38_000.0;
pub const LEADER_BURST_US: u32 = 9000;
pub const LEADER_GAP_US: u32 = 4500;
pub const BIT_BURST_US: u32 = 560;
pub const ZERO_GAP_US: u32 = 560;
pub const ONE_GAP_US: u32 = 1690;
pub const TRAILER_US: u32 = 560;
pub const WORD_BITS: usize = 16;
pub const DEFAULT_TOLERANCE: f64 = 0.25;
pub const MAX_ADDRESS: u8 = 127;

/// Leader pair, 16 burst/gap pairs and the trailing burst.
pub const FRAME_SEGMENTS: usize = 2 + 2 * WORD_BITS + 1;

/// One addressed command: 7-bit block address and one state bit per patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlFrame {
    address: u8,
    payload: u8,
}

impl ControlFrame {
    pub fn new(address: u8, payload: u8) -> Result<Self> {
        if address > MAX_ADDRESS {
            return Err(Error::validation("frame", format!("address {address} exceeds {MAX_ADDRESS}")));
        }
        if payload > 0x0f {
            return Err(Error::validation("frame", format!("payload {payload:#x} exceeds 4 bits")));
        }
        Ok(Self { address, payload })
    }

    pub fn address(&self) -> u8 {
        self.address
    }

    /// Bit `i` is the state of patch `i` of the block.
    pub fn payload(&self) -> u8 {
        self.payload
    }

    /// Number of set address and payload bits, mod 32.
    pub fn checksum(&self) -> u8 {
        ((self.address.count_ones() + self.payload.count_ones()) % 32) as u8
    }

    /// `address(7) | payload(4) | checksum(5)`, transmitted MSB first.
    pub fn word(&self) -> u16 {
        (self.address as u16) << 9 | (self.payload as u16) << 5 | self.checksum() as u16
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecodeError {
    #[error("malformed leader")]
    MalformedLeader,
    #[error("bit timing violation at segment {segment}")]
    BitTimingViolation { segment: usize },
    #[error("checksum mismatch: received {received:05b}, computed {computed:05b}")]
    ChecksumMismatch { received: u8, computed: u8 },
    #[error("tolerance must lie in [0, 0.5)")]
    InvalidTolerance,
}

/// Envelope of a 38 kHz IR transmission: burst and gap durations in
/// microseconds, alternating and starting with a burst.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulatedWaveform {
    segments: Vec<u32>,
}

impl ModulatedWaveform {
    pub fn new(segments: Vec<u32>) -> Result<Self> {
        if segments.contains(&0) {
            return Err(Error::validation("waveform", "durations must be positive"));
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[u32] {
        &self.segments
    }

    pub fn carrier_hz(&self) -> f64 {
        CARRIER_HZ
    }

    pub fn duration_us(&self) -> u64 {
        self.segments.iter().map(|&d| d as u64).sum()
    }

    /// First `n` segments.
    pub fn truncated(&self, n: usize) -> Self {
        Self { segments: self.segments[..n.min(self.segments.len())].to_vec() }
    }

    /// One signed duration per line: positive = burst, negative = gap.
    pub fn to_text(&self) -> String {
        let mut out = format!("# carrier_hz={CARRIER_HZ}\n");
        for (i, d) in self.segments.iter().enumerate() {
            let sign = if i % 2 == 0 { "+" } else { "-" };
            let _ = writeln!(out, "{sign}{d}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: i64 = line.parse().map_err(|_| Error::parse(i + 1, format!("bad duration {line:?}")))?;
            let burst = segments.len() % 2 == 0;
            if v == 0 || (v > 0) != burst {
                return Err(Error::parse(i + 1, "bursts (+) and gaps (-) must alternate, starting with a burst"));
            }
            let d = u32::try_from(v.unsigned_abs()).map_err(|_| Error::parse(i + 1, "duration out of range"))?;
            segments.push(d);
        }
        Self::new(segments)
    }
}

pub fn encode_frame(frame: &ControlFrame) -> ModulatedWaveform {
    let word = frame.word();
    let mut segments = Vec::with_capacity(FRAME_SEGMENTS);
    segments.extend([LEADER_BURST_US, LEADER_GAP_US]);
    for bit in (0..WORD_BITS).rev() {
        segments.push(BIT_BURST_US);
        segments.push(if (word >> bit) & 1 == 1 { ONE_GAP_US } else { ZERO_GAP_US });
    }
    segments.push(TRAILER_US);
    ModulatedWaveform { segments }
}

fn within(d: u32, nominal: u32, tol: f64) -> bool {
    (d as f64 - nominal as f64).abs() <= tol * nominal as f64
}

/// Classify each duration against its nominal value within `±tolerance`
/// (a fraction) and check leader, bit count and checksum.
pub fn decode_frame(w: &ModulatedWaveform, tolerance: f64) -> std::result::Result<ControlFrame, DecodeError> {
    if !(0.0..0.5).contains(&tolerance) {
        return Err(DecodeError::InvalidTolerance);
    }
    let s = &w.segments;
    if s.len() < 2 || !within(s[0], LEADER_BURST_US, tolerance) || !within(s[1], LEADER_GAP_US, tolerance) {
        return Err(DecodeError::MalformedLeader);
    }
    let mut word: u16 = 0;
    for bit in 0..WORD_BITS {
        let (b, g) = (2 + 2 * bit, 3 + 2 * bit);
        match s.get(b) {
            Some(&d) if within(d, BIT_BURST_US, tolerance) => {}
            _ => return Err(DecodeError::BitTimingViolation { segment: b }),
        }
        let value = match s.get(g) {
            Some(&d) if within(d, ZERO_GAP_US, tolerance) => 0,
            Some(&d) if within(d, ONE_GAP_US, tolerance) => 1,
            _ => return Err(DecodeError::BitTimingViolation { segment: g }),
        };
        word = word << 1 | value;
    }
    let trailer = FRAME_SEGMENTS - 1;
    match s.get(trailer) {
        Some(&d) if within(d, TRAILER_US, tolerance) => {}
        _ => return Err(DecodeError::BitTimingViolation { segment: trailer }),
    }
    if s.len() > FRAME_SEGMENTS {
        return Err(DecodeError::BitTimingViolation { segment: FRAME_SEGMENTS });
    }
    let frame = ControlFrame { address: (word >> 9) as u8 & 0x7f, payload: (word >> 5) as u8 & 0x0f };
    let received = (word & 0x1f) as u8;
    if received != frame.checksum() {
        return Err(DecodeError::ChecksumMismatch { received, computed: frame.checksum() });
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_frame_has_sixteen_short_pairs() {
        let w = encode_frame(&ControlFrame::new(0, 0).unwrap());
        let s = w.segments();
        assert_eq!(s.len(), FRAME_SEGMENTS);
        assert_eq!(&s[..2], &[9000, 4500]);
        assert!(s[2..34].iter().all(|&d| d == 560));
        assert_eq!(s[34], 560);
    }

    #[test]
    fn full_frame_gaps_and_checksum() {
        let f = ControlFrame::new(127, 15).unwrap();
        assert_eq!(f.checksum(), 11);
        let gaps: Vec<u32> = encode_frame(&f).segments()[3..34].iter().step_by(2).copied().collect();
        assert!(gaps[..11].iter().all(|&g| g == ONE_GAP_US));
        let check: Vec<u32> = gaps[11..].to_vec();
        assert_eq!(check, vec![560, 1690, 560, 1690, 1690]);
    }

    #[test]
    fn rejects_out_of_range_fields() {
        assert!(ControlFrame::new(128, 0).is_err());
        assert!(ControlFrame::new(0, 16).is_err());
    }

    #[test]
    fn stale_checksum_is_detected() {
        let f = ControlFrame::new(42, 0b0110).unwrap();
        let mut seg = encode_frame(&f).segments().to_vec();
        // payload bit 0 is word bit 5, the 11th transmitted bit
        let gap = 3 + 2 * 10;
        seg[gap] = if seg[gap] == ZERO_GAP_US { ONE_GAP_US } else { ZERO_GAP_US };
        let w = ModulatedWaveform::new(seg).unwrap();
        assert!(matches!(decode_frame(&w, DEFAULT_TOLERANCE), Err(DecodeError::ChecksumMismatch { .. })));
    }

    #[test]
    fn truncation_errors_depend_on_cut() {
        let w = encode_frame(&ControlFrame::new(5, 9).unwrap());
        assert_eq!(decode_frame(&w.truncated(1), DEFAULT_TOLERANCE), Err(DecodeError::MalformedLeader));
        for cut in 2..FRAME_SEGMENTS {
            assert!(matches!(
                decode_frame(&w.truncated(cut), DEFAULT_TOLERANCE),
                Err(DecodeError::BitTimingViolation { segment }) if segment == cut
            ));
        }
        let mut longer = w.segments().to_vec();
        longer.extend([560, 560]);
        assert!(matches!(
            decode_frame(&ModulatedWaveform::new(longer).unwrap(), DEFAULT_TOLERANCE),
            Err(DecodeError::BitTimingViolation { .. })
        ));
    }

    #[test]
    fn bad_leader_and_tolerance() {
        let mut seg = encode_frame(&ControlFrame::new(1, 1).unwrap()).segments().to_vec();
        seg[1] = 2250;
        assert_eq!(decode_frame(&ModulatedWaveform::new(seg).unwrap(), 0.25), Err(DecodeError::MalformedLeader));
        let w = encode_frame(&ControlFrame::new(1, 1).unwrap());
        assert_eq!(decode_frame(&w, 0.5), Err(DecodeError::InvalidTolerance));
        assert_eq!(decode_frame(&w, -0.1), Err(DecodeError::InvalidTolerance));
        assert!(decode_frame(&w, 0.0).is_ok());
    }

    #[test]
    fn text_round_trip_and_sign_checks() {
        let w = encode_frame(&ControlFrame::new(99, 3).unwrap());
        assert_eq!(ModulatedWaveform::from_text(&w.to_text()).unwrap(), w);
        assert!(ModulatedWaveform::from_text("+9000\n+4500\n").is_err());
        assert!(ModulatedWaveform::from_text("-9000\n").is_err());
        assert!(ModulatedWaveform::from_text("+0\n").is_err());
        assert!(ModulatedWaveform::new(vec![1, 0]).is_err());
    }
}
