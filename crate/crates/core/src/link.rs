//! Radar-range link budget for a single horn → RIS → horn path.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::directivity;
use crate::types::FarFieldPattern;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkScenario {
    #[serde(default)]
    pub name: String,
    /// Horn 1 to RIS, m.
    pub r1: f64,
    /// RIS to horn 2, m.
    pub r2: f64,
    pub g_t_db: f64,
    pub g_r_db: f64,
    /// Return loss of each horn, dB (e.g. -20).
    pub s11_db: f64,
    pub s22_db: f64,
    pub theta_inc: f64,
    pub theta_ref: f64,
    pub l_x: f64,
    pub l_y: f64,
    pub wavelength: f64,
    /// RIS gain, dB; `None` when it has not been supplied or computed.
    pub g_ris_db: Option<f64>,
}

impl LinkScenario {
    pub fn validate(&self) -> Result<()> {
        let pos = [("r1", self.r1), ("r2", self.r2), ("l_x", self.l_x), ("l_y", self.l_y), ("wavelength", self.wavelength)];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation("link scenario", format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("s11_db", self.s11_db), ("s22_db", self.s22_db)] {
            if !(v.is_finite() && v <= 0.0) {
                return Err(Error::validation("link scenario", format!("{name} must be <= 0 dB, got {v}")));
            }
        }
        if !(self.theta_inc.abs() <= PI / 2.0 && self.theta_ref.abs() <= PI / 2.0) {
            return Err(Error::validation("link scenario", "angles must lie within +-90 deg"));
        }
        if ![self.g_t_db, self.g_r_db].iter().all(|g| g.is_finite()) {
            return Err(Error::validation("link scenario", "horn gains must be finite"));
        }
        Ok(())
    }

    /// `2 max(L_x, L_y)^2 / lambda`.
    pub fn far_field_distance(&self) -> f64 {
        2.0 * self.l_x.max(self.l_y).powi(2) / self.wavelength
    }

    pub fn far_field_warnings(&self) -> Vec<String> {
        let d = self.far_field_distance();
        [("R1", self.r1), ("R2", self.r2)]
            .into_iter()
            .filter(|(_, r)| *r < d)
            .map(|(n, r)| format!("{n} = {r} m is inside the far-field distance {d:.3} m"))
            .collect()
    }

    /// Swap the roles of the two horns.
    pub fn reversed(&self) -> Self {
        Self {
            r1: self.r2,
            r2: self.r1,
            g_t_db: self.g_r_db,
            g_r_db: self.g_t_db,
            s11_db: self.s22_db,
            s22_db: self.s11_db,
            ..self.clone()
        }
    }
}

/// `P_r / P_t` in dB:
/// `lambda^2 L_x L_y cos(theta_inc) (1-|S11|^2)(1-|S22|^2) / ((4 pi)^3 R1^2 R2^2) * G_t G_r G_RIS`.
pub fn received_power_ratio(s: &LinkScenario) -> Result<f64> {
    s.validate()?;
    let g_ris = s.g_ris_db.ok_or(Error::MissingGain)?;
    let mag = |db: f64| 10f64.powf(db / 20.0);
    let mismatch = (1.0 - mag(s.s11_db).powi(2)) * (1.0 - mag(s.s22_db).powi(2));
    let geometry = s.wavelength.powi(2) * s.l_x * s.l_y * s.theta_inc.cos()
        / ((4.0 * PI).powi(3) * s.r1.powi(2) * s.r2.powi(2));
    let ratio = geometry * mismatch * db_to_linear(s.g_t_db + s.g_r_db + g_ris);
    Ok(linear_to_db(ratio))
}

/// `|S21| = sqrt(P_r / P_t)`, linear.
pub fn s21_magnitude(s: &LinkScenario) -> Result<f64> {
    Ok(db_to_linear(received_power_ratio(s)?).sqrt())
}

/// Peak directivity plus reflection efficiency (negative for loss), dB.
pub fn ris_gain(pattern: &FarFieldPattern, efficiency_db: f64) -> Result<f64> {
    Ok(directivity(pattern)?.dbi + efficiency_db)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub name: String,
    pub ratio_db: Option<f64>,
    pub s21: Option<f64>,
    pub far_field_distance: f64,
    pub warnings: Vec<String>,
    /// Why no budget could be computed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTable {
    pub rows: Vec<ScenarioRow>,
}

impl ScenarioTable {
    /// `ratio_i - ratio_j` in dB, when both rows were computed.
    pub fn delta_db(&self, i: usize, j: usize) -> Option<f64> {
        Some(self.rows[i].ratio_db? - self.rows[j].ratio_db?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,pr_over_pt_db,s21,s21_db,delta_vs_first_db,far_field_m,flags\n");
        for (i, r) in self.rows.iter().enumerate() {
            let f = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
            let mut flags: Vec<String> = r.warnings.clone();
            flags.extend(r.error.clone());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.4},\"{}\"",
                r.name,
                f(r.ratio_db),
                r.s21.map_or(String::new(), |v| format!("{v:.9e}")),
                f(r.ratio_db.map(|d| d / 2.0)),
                f(self.delta_db(i, 0)),
                r.far_field_distance,
                flags.join("; ").replace('"', "'")
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(8);
        let mut out = format!("{:<width$}  {:>10}  {:>12}  {:>9}  flags\n", "scenario", "Pr/Pt dB", "|S21|", "delta dB");
        for (i, r) in self.rows.iter().enumerate() {
            let ratio = r.ratio_db.map_or("-".into(), |v| format!("{v:.3}"));
            let s21 = r.s21.map_or("-".into(), |v| format!("{v:.6e}"));
            let delta = self.delta_db(i, 0).map_or("-".into(), |v| format!("{v:+.3}"));
            let mut flags = Vec::new();
            if !r.warnings.is_empty() {
                flags.push("near-field".to_string());
            }
            if let Some(e) = &r.error {
                flags.push(e.clone());
            }
            let _ = writeln!(out, "{:<width$}  {ratio:>10}  {s21:>12}  {delta:>9}  {}", r.name, flags.join(", "));
        }
        out
    }
}

/// Evaluate every scenario; a row that cannot be computed is flagged
/// rather than failing the table.
pub fn scenario_table(scenarios: &[LinkScenario]) -> Result<ScenarioTable> {
    if scenarios.is_empty() {
        return Err(Error::validation("scenario table", "need at least one scenario"));
    }
    let rows = scenarios
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let name = if s.name.is_empty() { format!("scenario{}", i + 1) } else { s.name.clone() };
            let (ratio_db, error) = match received_power_ratio(s) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ScenarioRow {
                name,
                ratio_db,
                s21: ratio_db.map(|d| db_to_linear(d).sqrt()),
                far_field_distance: s.far_field_distance(),
                warnings: s.far_field_warnings(),
                error,
            }
        })
        .collect();
    Ok(ScenarioTable { rows })
}

/// Scenario as written in a config file, units in the key names. The RIS
/// gain is either given directly or as directivity plus efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    #[serde(default)]
    pub name: String,
    pub r1_m: f64,
    pub r2_m: f64,
    pub g_t_db: f64,
    pub g_r_db: f64,
    pub s11_db: f64,
    pub s22_db: f64,
    #[serde(default)]
    pub theta_inc_deg: f64,
    #[serde(default)]
    pub theta_ref_deg: f64,
    pub l_x_mm: f64,
    pub l_y_mm: f64,
    pub wavelength_mm: f64,
    pub g_ris_db: Option<f64>,
    pub directivity_dbi: Option<f64>,
    pub efficiency_db: Option<f64>,
}

impl ScenarioEntry {
    pub fn to_scenario(&self) -> LinkScenario {
        let g_ris_db = self.g_ris_db.or(self.directivity_dbi.map(|d| d + self.efficiency_db.unwrap_or(0.0)));
        LinkScenario {
            name: self.name.clone(),
            r1: self.r1_m,
            r2: self.r2_m,
            g_t_db: self.g_t_db,
            g_r_db: self.g_r_db,
            s11_db: self.s11_db,
            s22_db: self.s22_db,
            theta_inc: self.theta_inc_deg.to_radians(),
            theta_ref: self.theta_ref_deg.to_radians(),
            l_x: self.l_x_mm * 1e-3,
            l_y: self.l_y_mm * 1e-3,
            wavelength: self.wavelength_mm * 1e-3,
            g_ris_db,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub scenario: Vec<ScenarioEntry>,
}

pub fn scenarios_from_toml(text: &str) -> Result<Vec<LinkScenario>> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| Error::validation("scenario config", e.to_string()))?;
    Ok(file.scenario.iter().map(ScenarioEntry::to_scenario).collect())
}
