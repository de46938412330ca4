//! Library side of the `ris` binary: config loading, the subcommands and
//! the mapping from errors to exit codes.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig, SpreadingName};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ris", version, about = "Design, evaluate and drive a 1-bit reconfigurable reflecting surface")]
pub struct Cli {
    /// Run config (TOML); for `link`, the scenario file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub spreading: Option<SpreadingName>,
    /// Samples per axis of the uv grid.
    #[arg(long, global = true)]
    pub uv_res: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the phase pattern for the configured task.
    Synthesize,
    /// Far field, directivity and target-plane map of a pattern.
    Evaluate {
        /// Pattern to evaluate; synthesized from the config when absent.
        #[arg(long)]
        pattern: Option<PathBuf>,
    },
    /// Push a pattern through the simulated IR control fabric.
    ControlReplay {
        #[arg(long)]
        pattern: Option<PathBuf>,
    },
    /// Link-budget table for a scenario file.
    Link,
    /// Fit C_d and R_d of the varactor to a measured spectrum.
    FitVaractor {
        /// Touchstone one-port (.s1p) or `freq_hz,re_z,im_z` CSV.
        #[arg(long)]
        measured: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        init_c_pf: f64,
        #[arg(long, default_value_t = 5.0)]
        init_r_ohm: f64,
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
    },
}

impl Cli {
    fn config_path(&self) -> anyhow::Result<&Path> {
        self.config.as_deref().ok_or_else(|| ConfigError("--config is required for this command".into()).into())
    }

    /// Load the run config and apply command-line overrides.
    pub fn run_config(&self) -> anyhow::Result<RunConfig> {
        let path = self.config_path()?;
        let mut cfg = RunConfig::load(path)?;
        if let Some(out) = &cfg.out_dir {
            cfg.out_dir = Some(cfg.base_dir.join(out));
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(s) = self.spreading {
            cfg.spreading = s;
        }
        if let Some(n) = self.uv_res {
            cfg.evaluate.uv_res = n;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Run one command, printing a short summary to stdout.
pub fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Synthesize => {
            let cfg = cli.run_config()?;
            let summary = commands::cmd_synthesize(&cfg, &cfg.out_dir())?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Evaluate { pattern } => {
            let cfg = cli.run_config()?;
            let report = commands::cmd_evaluate(&cfg, pattern.as_deref(), &cfg.out_dir())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::ControlReplay { pattern } => {
            let cfg = cli.run_config()?;
            let summary = commands::cmd_control_replay(&cfg, pattern.as_deref(), &cfg.out_dir())?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Link => {
            print!("{}", commands::cmd_link(cli.config_path()?, &cli.out_dir())?);
        }
        Command::FitVaractor { measured, init_c_pf, init_r_ohm, max_iterations } => {
            let args = commands::FitArgs { init_c_pf: *init_c_pf, init_r_ohm: *init_r_ohm, max_iterations: *max_iterations };
            let doc = commands::cmd_fit_varactor(measured, args, &cli.out_dir())?;
            println!("C_d = {:.4} pF, R_d = {:.4} ohm", doc["c_d_pf"].as_f64().unwrap_or(f64::NAN), doc["r_d_ohm"].as_f64().unwrap_or(f64::NAN));
        }
    }
    Ok(())
}

/// 2 for bad input, 3 for numerical failures.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use ris_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Aliasing { .. }
                | E::NonUniformGrid(_)
                | E::UndefinedDirectivity
                | E::UndersampledLobe { .. }
                | E::InfiniteImpedance
                | E::InfiniteReflection
                | E::ResonanceNotBracketed
                | E::FitNotConverged { .. } => EXIT_NUMERIC,
                _ => EXIT_VALIDATION,
            };
        }
        if cause.is::<ConfigError>() || cause.is::<std::io::Error>() || cause.is::<toml::de::Error>() {
            return EXIT_VALIDATION;
        }
        if cause.is::<serde_json::Error>() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_VALIDATION
}
