use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ApertureLayout, UnitCellStateTable};

/// One of the two reflection states of a 1-bit unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    S0,
    S1,
}

impl State {
    pub fn flipped(self) -> Self {
        match self {
            State::S0 => State::S1,
            State::S1 => State::S0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            State::S0 => '0',
            State::S1 => '1',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(State::S0),
            '1' => Some(State::S1),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            State::S0 => 0,
            State::S1 => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 0 {
            State::S0
        } else {
            State::S1
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Binary state of every element, stored row-major (row 0 = minimum y).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasePattern {
    n_x: usize,
    n_y: usize,
    states: Vec<State>,
}

impl PhasePattern {
    pub fn uniform(layout: &ApertureLayout, state: State) -> Self {
        Self { n_x: layout.n_x(), n_y: layout.n_y(), states: vec![state; layout.len()] }
    }

    pub fn from_states(n_x: usize, n_y: usize, states: Vec<State>) -> Result<Self> {
        if n_x == 0 || n_y == 0 || states.len() != n_x * n_y {
            return Err(Error::validation(
                "pattern",
                format!("{} states do not fill a {n_x} x {n_y} grid", states.len()),
            ));
        }
        Ok(Self { n_x, n_y, states })
    }

    /// Pattern whose element `m` takes bit `m mod 64` of `bits` (LSB = element 0).
    pub fn from_bits(layout: &ApertureLayout, bits: u64) -> Self {
        let states = (0..layout.len()).map(|m| State::from_bit(((bits >> (m % 64)) & 1) as u8)).collect();
        Self { n_x: layout.n_x(), n_y: layout.n_y(), states }
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn get(&self, m: usize) -> Result<State> {
        self.states.get(m).copied().ok_or(Error::IndexOutOfRange { index: m, len: self.states.len() })
    }

    pub fn at(&self, row: usize, col: usize) -> State {
        self.states[row * self.n_x + col]
    }

    pub fn set(&mut self, m: usize, state: State) {
        self.states[m] = state;
    }

    pub fn flip(&mut self, m: usize) {
        self.states[m] = self.states[m].flipped();
    }

    pub fn count(&self, state: State) -> usize {
        self.states.iter().filter(|&&s| s == state).count()
    }

    pub fn check_layout(&self, layout: &ApertureLayout) -> Result<()> {
        if self.n_x != layout.n_x() || self.n_y != layout.n_y() {
            return Err(Error::GridMismatch(format!(
                "pattern is {} x {} but layout is {} x {}",
                self.n_x,
                self.n_y,
                layout.n_x(),
                layout.n_y()
            )));
        }
        Ok(())
    }

    pub fn rows(&self) -> Vec<String> {
        self.states.chunks(self.n_x).map(|row| row.iter().map(|s| s.as_char()).collect()).collect()
    }

    /// `n_y` lines of `n_x` characters from `{0,1}`, row 0 first.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() + self.n_y);
        for row in self.rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    /// Inverse of [`PhasePattern::to_text`]; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Self::from_rows(&lines)
    }

    fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let n_y = rows.len();
        if n_y == 0 {
            return Err(Error::parse(1, "empty pattern"));
        }
        let n_x = rows[0].as_ref().chars().count();
        let mut states = Vec::with_capacity(n_x * n_y);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() != n_x {
                return Err(Error::parse(i + 1, format!("expected {n_x} columns, found {}", row.chars().count())));
            }
            for c in row.chars() {
                states.push(State::from_char(c).ok_or_else(|| Error::parse(i + 1, format!("invalid state symbol {c:?}")))?);
            }
        }
        Self::from_states(n_x, n_y, states)
    }

    pub fn to_json(&self, layout: &ApertureLayout) -> Result<String> {
        self.check_layout(layout)?;
        let doc = PatternDocument { layout: *layout, rows: self.rows() };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<(Self, ApertureLayout)> {
        let doc: PatternDocument = serde_json::from_str(text)?;
        let layout = ApertureLayout::new(doc.layout.n_x(), doc.layout.n_y(), doc.layout.pitch())?;
        let pattern = Self::from_rows(&doc.rows)?;
        pattern.check_layout(&layout)?;
        Ok((pattern, layout))
    }
}

#[derive(Serialize, Deserialize)]
struct PatternDocument {
    layout: ApertureLayout,
    rows: Vec<String>,
}

/// Reflection phase of element `m` under `table`.
pub fn state_phase(pattern: &PhasePattern, table: &UnitCellStateTable, m: usize) -> Result<f64> {
    Ok(table.phase(pattern.get(m)?))
}
