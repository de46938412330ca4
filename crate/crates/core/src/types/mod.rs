//! Value types shared across the field, synthesis and control modules.

mod cell;
mod excitation;
mod far_field;
mod field_map;
mod layout;
mod pattern;

pub use cell::{wrap_phase, CellState, UnitCellStateTable, DEFAULT_DESIGN_FREQUENCY, DEFAULT_REFLECTION_MAGNITUDE, DEFAULT_V0, DEFAULT_V1};
pub use excitation::Excitation;
pub use far_field::{FarFieldPattern, Lobe, Normalization, UvGrid};
pub use field_map::{FieldMap, PlaneGrid};
pub use layout::{ApertureLayout, DEFAULT_PITCH};
pub use pattern::{state_phase, PhasePattern, State};
