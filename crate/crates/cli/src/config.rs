use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use ris_core::field::{PropagationContext, Spreading};
use ris_core::synthesis::MaskTarget;
use ris_core::{ApertureLayout, CellState, Excitation, State, UnitCellStateTable};

#[derive(Debug, Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpreadingName {
    /// No 1/r decay, as in the target-plane sum.
    #[default]
    Paper,
    /// Adds the 1/r spherical spreading factor.
    Spherical,
}

impl From<SpreadingName> for Spreading {
    fn from(s: SpreadingName) -> Self {
        match s {
            SpreadingName::Paper => Spreading::PaperLiteral,
            SpreadingName::Spherical => Spreading::Spherical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub n_x: usize,
    pub n_y: usize,
    pub pitch_mm: f64,
    pub frequency_ghz: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { n_x: 20, n_y: 20, pitch_mm: 30.0, frequency_ghz: 5.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellConfig {
    pub magnitude: f64,
    pub phase0_deg: f64,
    pub phase1_deg: f64,
    pub v0_volts: f64,
    pub v1_volts: f64,
}

impl Default for CellConfig {
    fn default() -> Self {
        Self { magnitude: 0.58, phase0_deg: -90.0, phase1_deg: 90.0, v0_volts: 0.0, v1_volts: 3.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExcitationConfig {
    PlaneWave {
        #[serde(default)]
        theta_deg: f64,
        #[serde(default)]
        phi_deg: f64,
    },
    PointSource {
        x_mm: f64,
        y_mm: f64,
        z_mm: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for ExcitationConfig {
    fn default() -> Self {
        ExcitationConfig::PlaneWave { theta_deg: 0.0, phi_deg: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteerMethod {
    /// Closed-form nearest-state code.
    #[default]
    Quantized,
    /// Greedy flips against a distant single-point target.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    Steer {
        theta_ref_deg: f64,
        #[serde(default)]
        phi_ref_deg: f64,
        #[serde(default)]
        method: SteerMethod,
    },
    SteerPair {
        theta_inc_deg: f64,
        theta_ref_deg: f64,
    },
    Hologram {
        /// PGM or CSV, relative to the config file.
        mask_path: PathBuf,
        #[serde(default = "ten")]
        mask_spacing_mm: f64,
        z_plane_mm: f64,
    },
    Uniform {
        state: char,
    },
}

fn ten() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    /// Stall window in units of full sweeps (M proposals).
    pub stall_sweeps: usize,
    pub cap_sweeps: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self { stall_sweeps: 50, cap_sweeps: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateConfig {
    pub uv_res: usize,
    /// Defaults to the hologram plane, else 700 mm.
    pub plane_z_mm: Option<f64>,
    pub plane_spacing_mm: f64,
    /// Side of the square evaluation plane; defaults to the hologram mask or the aperture.
    pub plane_size_mm: Option<f64>,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self { uv_res: 201, plane_z_mm: None, plane_spacing_mm: 10.0, plane_size_mm: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FabricConfig {
    pub loss: f64,
    pub corruption: f64,
    pub channel_seed: u64,
    pub retransmissions: usize,
}

impl Default for FabricConfig {
    fn default() -> Self {
        Self { loss: 0.0, corruption: 0.0, channel_seed: 0, retransmissions: 0 }
    }
}

/// One run: array, unit cell, source, task and per-command options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "one_u64")]
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub spreading: SpreadingName,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub cell: CellConfig,
    #[serde(default)]
    pub excitation: ExcitationConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
    #[serde(default)]
    pub fabric: FabricConfig,
    /// SHA-256 of the config text.
    #[serde(skip)]
    pub source_hash: String,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn one_u64() -> u64 {
    1
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> anyhow::Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.source_hash = sha256_hex(text.as_bytes());
        cfg.base_dir = base_dir.to_path_buf();
        if let TaskConfig::Hologram { mask_path, .. } = &mut cfg.task {
            *mask_path = base_dir.join(&*mask_path);
            if !mask_path.is_file() {
                return Err(bad(format!("mask file {} does not exist", mask_path.display())));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.layout()?;
        self.table()?;
        self.context()?;
        self.excitation()?;
        if let TaskConfig::Uniform { state } = self.task {
            State::from_char(state).ok_or_else(|| bad(format!("uniform state must be '0' or '1', got {state:?}")))?;
        }
        if self.optimizer.stall_sweeps == 0 || self.optimizer.cap_sweeps < self.optimizer.stall_sweeps {
            return Err(bad("optimizer needs 1 <= stall_sweeps <= cap_sweeps"));
        }
        if self.evaluate.uv_res < 3 {
            return Err(bad("uv_res must be at least 3"));
        }
        if !(self.evaluate.plane_spacing_mm > 0.0) {
            return Err(bad("plane_spacing_mm must be positive"));
        }
        Ok(())
    }

    pub fn layout(&self) -> anyhow::Result<ApertureLayout> {
        Ok(ApertureLayout::new(self.array.n_x, self.array.n_y, self.array.pitch_mm * 1e-3)?)
    }

    pub fn table(&self) -> anyhow::Result<UnitCellStateTable> {
        let c = &self.cell;
        let state = |deg: f64, v: f64| CellState { magnitude: c.magnitude, phase: deg.to_radians(), drive_voltage: v };
        Ok(UnitCellStateTable::new(
            self.array.frequency_ghz * 1e9,
            state(c.phase0_deg, c.v0_volts),
            state(c.phase1_deg, c.v1_volts),
        )?)
    }

    pub fn context(&self) -> anyhow::Result<PropagationContext> {
        Ok(PropagationContext::new(self.array.frequency_ghz * 1e9, self.spreading.into())?)
    }

    /// The source illuminating the aperture. A steer-pair task fixes its
    /// own in-plane incidence.
    pub fn excitation(&self) -> anyhow::Result<Excitation> {
        if let TaskConfig::SteerPair { theta_inc_deg, .. } = self.task {
            return Ok(Excitation::in_plane_incidence(theta_inc_deg.to_radians())?);
        }
        Ok(match self.excitation {
            ExcitationConfig::PlaneWave { theta_deg, phi_deg } => {
                Excitation::plane_wave(theta_deg.to_radians(), phi_deg.to_radians())?
            }
            ExcitationConfig::PointSource { x_mm, y_mm, z_mm, amplitude } => {
                Excitation::point_source([x_mm * 1e-3, y_mm * 1e-3, z_mm * 1e-3], amplitude)?
            }
        })
    }

    pub fn mask(&self) -> anyhow::Result<Option<MaskTarget>> {
        let TaskConfig::Hologram { mask_path, mask_spacing_mm, z_plane_mm } = &self.task else {
            return Ok(None);
        };
        let (d, z) = (mask_spacing_mm * 1e-3, z_plane_mm * 1e-3);
        let is_csv = mask_path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let mask = if is_csv {
            MaskTarget::from_csv(&std::fs::read_to_string(mask_path)?, d, z)?
        } else {
            MaskTarget::from_pgm(&std::fs::read(mask_path)?, d, z)?
        };
        Ok(Some(mask))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_prototype_defaults() {
        let cfg = RunConfig::from_toml("[task]\nkind = \"uniform\"\nstate = \"1\"\n", Path::new(".")).unwrap();
        assert_eq!(cfg.layout().unwrap(), ApertureLayout::prototype());
        assert_eq!(cfg.table().unwrap(), UnitCellStateTable::default());
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.source_hash.len(), 64);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let base = Path::new(".");
        assert!(RunConfig::from_toml("[task]\nkind = \"uniform\"\nstate = \"1\"\npitch = 3\n", base).is_err());
        assert!(RunConfig::from_toml("[array]\npitch = 30\n[task]\nkind = \"uniform\"\nstate = \"1\"\n", base).is_err());
        assert!(RunConfig::from_toml("[task]\nkind = \"uniform\"\nstate = \"2\"\n", base).is_err());
        assert!(RunConfig::from_toml("[task]\nkind = \"hologram\"\nmask_path = \"nope.pgm\"\nz_plane_mm = 700\n", base).is_err());
        assert!(RunConfig::from_toml("seed = 3\n", base).is_err());
    }
}
