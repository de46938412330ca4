use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::json;

use ris_core::circuit::{fit_varactor, FitConfig, ImpedanceSpectrum, PatchLoadSurrogate, VaractorParams};
use ris_core::control::{encode_frame, ChannelModel, RisArrayFabric};
use ris_core::field::{directivity, element_contributions, far_field_direct, field_from_contributions};
use ris_core::link::{scenario_table, scenarios_from_toml};
use ris_core::synthesis::{
    greedy_flip_optimize, normalized_cross_correlation, optimize_with_contributions, pattern_from_incidence_pair,
    quantized_steering_code, OptimizationTrace, OptimizerConfig, TargetSpec,
};
use ris_core::{ApertureLayout, PhasePattern, PlaneGrid, State, UvGrid};

use crate::config::{sha256_hex, RunConfig, SteerMethod, TaskConfig};

/// Identifies what produced an output file.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool_version: &'static str,
    pub core_version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub spreading: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pattern_sha256: Option<String>,
}

impl Provenance {
    pub fn new(cfg: &RunConfig, pattern: Option<&PhasePattern>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            core_version: ris_core::VERSION,
            config_sha256: cfg.source_hash.clone(),
            seed: cfg.seed,
            spreading: format!("{:?}", cfg.spreading).to_lowercase(),
            pattern_sha256: pattern.map(pattern_sha256),
        }
    }

    /// `# key=value` lines for text outputs.
    pub fn header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# tool_version={}", self.tool_version);
        let _ = writeln!(out, "# core_version={}", self.core_version);
        let _ = writeln!(out, "# config_sha256={}", self.config_sha256);
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# spreading={}", self.spreading);
        if let Some(p) = &self.pattern_sha256 {
            let _ = writeln!(out, "# pattern_sha256={p}");
        }
        out
    }
}

/// Hash of the canonical text form, independent of any file header.
pub fn pattern_sha256(p: &PhasePattern) -> String {
    sha256_hex(p.to_text().as_bytes())
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Reads `.json` pattern documents or plain `0`/`1` text.
pub fn read_pattern(path: &Path, layout: &ApertureLayout) -> anyhow::Result<PhasePattern> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pattern = if path.extension().is_some_and(|e| e == "json") {
        PhasePattern::from_json(&text)?.0
    } else {
        PhasePattern::from_text(&text)?
    };
    pattern.check_layout(layout)?;
    Ok(pattern)
}

pub struct Synthesis {
    pub pattern: PhasePattern,
    pub method: &'static str,
    pub trace: Option<OptimizationTrace>,
}

pub fn optimizer_config(cfg: &RunConfig, layout: &ApertureLayout) -> OptimizerConfig {
    let m = layout.len();
    OptimizerConfig {
        seed: cfg.seed,
        stall_window: cfg.optimizer.stall_sweeps * m,
        max_proposals: cfg.optimizer.cap_sweeps * m,
        initial: None,
    }
}

/// Produce the configured task's pattern in memory.
pub fn synthesize(cfg: &RunConfig) -> anyhow::Result<Synthesis> {
    let (ctx, layout, table, exc) = (cfg.context()?, cfg.layout()?, cfg.table()?, cfg.excitation()?);
    Ok(match &cfg.task {
        TaskConfig::Uniform { state } => Synthesis {
            pattern: PhasePattern::uniform(&layout, State::from_char(*state).expect("validated")),
            method: "uniform",
            trace: None,
        },
        TaskConfig::SteerPair { theta_inc_deg, theta_ref_deg } => Synthesis {
            pattern: pattern_from_incidence_pair(&ctx, &layout, &table, theta_inc_deg.to_radians(), theta_ref_deg.to_radians())?,
            method: "quantized",
            trace: None,
        },
        TaskConfig::Steer { theta_ref_deg, phi_ref_deg, method: SteerMethod::Quantized } => Synthesis {
            pattern: quantized_steering_code(&ctx, &layout, &table, &exc, theta_ref_deg.to_radians(), phi_ref_deg.to_radians())?,
            method: "quantized",
            trace: None,
        },
        TaskConfig::Steer { theta_ref_deg, phi_ref_deg, method: SteerMethod::Greedy } => {
            let target = TargetSpec::beam(theta_ref_deg.to_radians(), phi_ref_deg.to_radians())?;
            let (pattern, trace) =
                greedy_flip_optimize(&ctx, &exc, &layout, &table, &target, &optimizer_config(cfg, &layout))?;
            Synthesis { pattern, method: "greedy", trace: Some(trace) }
        }
        TaskConfig::Hologram { .. } => {
            let mask = cfg.mask()?.expect("hologram task has a mask");
            let contributions = element_contributions(&ctx, &exc, &layout, &mask.grid)?;
            let reference = field_from_contributions(&contributions, &PhasePattern::uniform(&layout, State::S1), &table)?;
            let mask = mask.normalized_to_field(&reference)?;
            let (pattern, trace) =
                optimize_with_contributions(&contributions, &layout, &mask, &table, &optimizer_config(cfg, &layout))?;
            Synthesis { pattern, method: "greedy", trace: Some(trace) }
        }
    })
}

pub fn cmd_synthesize(cfg: &RunConfig, out: &Path) -> anyhow::Result<serde_json::Value> {
    let layout = cfg.layout()?;
    let s = synthesize(cfg)?;
    let prov = Provenance::new(cfg, Some(&s.pattern));
    write(out, "pattern.txt", prov.header() + &s.pattern.to_text())?;
    write(out, "pattern.json", s.pattern.to_json(&layout)? + "\n")?;
    let mut summary = json!({
        "provenance": prov,
        "method": s.method,
        "n_x": layout.n_x(),
        "n_y": layout.n_y(),
        "count_s0": s.pattern.count(State::S0),
        "count_s1": s.pattern.count(State::S1),
    });
    if let Some(trace) = &s.trace {
        write(out, "trace.csv", trace.to_csv())?;
        summary["optimizer"] = json!({
            "proposals": trace.proposals,
            "accepted": trace.accepted_count(),
            "stop_reason": trace.stop,
            "final_objective": trace.final_objective,
        });
    }
    write(out, "synthesis.json", to_json(&summary)?)?;
    Ok(summary)
}

/// Pattern from `--pattern`, else synthesized from the config.
fn pattern_for(cfg: &RunConfig, path: Option<&Path>) -> anyhow::Result<PhasePattern> {
    match path {
        Some(p) => read_pattern(p, &cfg.layout()?),
        None => Ok(synthesize(cfg)?.pattern),
    }
}

/// Evaluation plane: the hologram mask grid unless overridden, else an
/// aperture-sized plane at 700 mm.
pub fn evaluation_plane(cfg: &RunConfig) -> anyhow::Result<PlaneGrid> {
    let e = &cfg.evaluate;
    let mask = cfg.mask()?;
    if let (Some(m), None, None) = (&mask, e.plane_z_mm, e.plane_size_mm) {
        return Ok(m.grid);
    }
    let z = e.plane_z_mm.map(|z| z * 1e-3).or(mask.as_ref().map(|m| m.grid.z)).unwrap_or(0.7);
    let width = match e.plane_size_mm {
        Some(w) => w * 1e-3,
        None => {
            let layout = cfg.layout()?;
            layout.width().max(layout.height())
        }
    };
    Ok(PlaneGrid::covering(width, e.plane_spacing_mm * 1e-3, z)?)
}

pub fn cmd_evaluate(cfg: &RunConfig, pattern_path: Option<&Path>, out: &Path) -> anyhow::Result<serde_json::Value> {
    let (ctx, layout, table, exc) = (cfg.context()?, cfg.layout()?, cfg.table()?, cfg.excitation()?);
    let pattern = pattern_for(cfg, pattern_path)?;
    let prov = Provenance::new(cfg, Some(&pattern));

    let grid = UvGrid::square(cfg.evaluate.uv_res)?;
    let ff = far_field_direct(&ctx, &exc, &layout, &pattern, &table, &grid)?;
    write(out, "far_field.csv", prov.header() + &ff.to_csv())?;
    let directivity = match directivity(&ff) {
        Ok(d) => json!({ "dbi": d.dbi, "peak_u": d.peak_u, "peak_v": d.peak_v }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let lobes: Vec<_> = ff.lobes(-10.0).into_iter().take(4).collect();

    let plane = evaluation_plane(cfg)?;
    let contributions = element_contributions(&ctx, &exc, &layout, &plane)?;
    let map = field_from_contributions(&contributions, &pattern, &table)?;
    write(out, "field_map.csv", prov.header() + &map.to_csv())?;
    let mut report = json!({
        "provenance": prov,
        "uv_res": cfg.evaluate.uv_res,
        "directivity": directivity,
        "lobes": lobes,
        "plane": { "z_m": plane.z, "rows": plane.rows, "cols": plane.cols, "spacing_m": plane.spacing },
        "plane_power": map.total_power(),
    });
    if let Some(mask) = cfg.mask()? {
        if mask.grid.congruent(&plane) {
            report["mask_ncc"] = json!(normalized_cross_correlation(&map.magnitude(), &mask.magnitude)?);
        }
    }
    write(out, "report.json", to_json(&report)?)?;
    Ok(report)
}

pub fn cmd_control_replay(cfg: &RunConfig, pattern_path: Option<&Path>, out: &Path) -> anyhow::Result<serde_json::Value> {
    let (layout, table) = (cfg.layout()?, cfg.table()?);
    let pattern = pattern_for(cfg, pattern_path)?;
    let f = &cfg.fabric;
    let channel = ChannelModel::new(f.loss, f.corruption, f.channel_seed)?;
    let mut fabric = RisArrayFabric::new(layout.n_x(), layout.n_y(), &table, channel)?;
    let report = fabric.apply_pattern(&pattern, f.retransmissions)?;
    let applied = fabric.pattern_view();
    let prov = Provenance::new(cfg, Some(&applied));

    write(out, "transcript.jsonl", fabric.transcript_jsonl()?)?;
    let first = fabric.frame_for_block(&pattern, 0)?;
    write(out, "frame0_waveform.txt", encode_frame(&first).to_text())?;
    write(out, "fabric_pattern.txt", prov.header() + &applied.to_text())?;
    let mismatched = pattern.states().iter().zip(applied.states()).filter(|(a, b)| a != b).count();
    let summary = json!({
        "provenance": prov,
        "input_pattern_sha256": pattern_sha256(&pattern),
        "blocks": fabric.n_blocks(),
        "frames_sent": report.frames_sent,
        "rounds": report.rounds,
        "delivered": report.delivered(),
        "undelivered": report.undelivered(),
        "mismatched_elements": mismatched,
        "exact": mismatched == 0,
    });
    write(out, "replay.json", to_json(&summary)?)?;
    Ok(summary)
}

pub fn cmd_link(scenario_path: &Path, out: &Path) -> anyhow::Result<String> {
    let text = fs::read_to_string(scenario_path).with_context(|| format!("reading {}", scenario_path.display()))?;
    let scenarios = scenarios_from_toml(&text)?;
    let table = scenario_table(&scenarios)?;
    let header = format!("# config_sha256={}\n", sha256_hex(text.as_bytes()));
    write(out, "link.csv", header.clone() + &table.to_csv())?;
    let rendered = table.to_text();
    write(out, "link.txt", header + &rendered)?;
    Ok(rendered)
}

#[derive(Debug, Clone, Copy)]
pub struct FitArgs {
    pub init_c_pf: f64,
    pub init_r_ohm: f64,
    pub max_iterations: usize,
}

pub fn read_spectrum(path: &Path) -> anyhow::Result<ImpedanceSpectrum> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    Ok(if csv { ImpedanceSpectrum::from_csv(&text)? } else { ImpedanceSpectrum::from_touchstone(&text)? })
}

/// Fits the surrogate cell to a measured spectrum. The best report is
/// written even when the fit does not converge.
pub fn cmd_fit_varactor(measured: &Path, args: FitArgs, out: &Path) -> anyhow::Result<serde_json::Value> {
    let spectrum = read_spectrum(measured)?;
    let model = PatchLoadSurrogate::default();
    let freqs = spectrum.freqs().to_vec();
    let init = VaractorParams::unbiased().with_cr(args.init_c_pf * 1e-12, args.init_r_ohm);
    let config = FitConfig { max_iterations: args.max_iterations, ..FitConfig::default() };
    let source = sha256_hex(&fs::read(measured)?);
    let result = fit_varactor(&spectrum, |p| model.spectrum(p, &freqs), init, &config);
    let report = match &result {
        Ok(r) => r.clone(),
        Err(ris_core::Error::FitNotConverged { best, .. }) => (**best).clone(),
        Err(_) => return Err(result.unwrap_err().into()),
    };
    let doc = json!({
        "measured_sha256": source,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "c_d_pf": report.params.c_d * 1e12,
        "r_d_ohm": report.params.r_d,
        "report": report,
    });
    write(out, "fit_report.json", to_json(&doc)?)?;
    result?;
    Ok(doc)
}
