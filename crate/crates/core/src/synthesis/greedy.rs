use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MaskTarget, TargetSpec};
use crate::error::{Error, Result};
use crate::field::{element_contributions, ElementContributions, PropagationContext};
use crate::types::{ApertureLayout, Excitation, PhasePattern, State, UnitCellStateTable};

/// Relative margin a candidate must beat the stored objective by.
pub const TIE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub seed: u64,
    /// Consecutive rejected proposals that end the run.
    pub stall_window: usize,
    /// Hard cap on proposals.
    pub max_proposals: usize,
    /// Starting pattern; all S1 when absent.
    pub initial: Option<PhasePattern>,
}

impl OptimizerConfig {
    /// Stall window of 50 sweeps' worth of proposals, hard cap of 500.
    pub fn for_layout(layout: &ApertureLayout, seed: u64) -> Self {
        let m = layout.len();
        Self { seed, stall_window: 50 * m, max_proposals: 500 * m, initial: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stall_window == 0 || self.max_proposals < self.stall_window {
            return Err(Error::validation(
                "optimizer config",
                format!("need 1 <= stall window ({}) <= hard cap ({})", self.stall_window, self.max_proposals),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stalled,
    HardCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// 1-based proposal counter.
    pub proposal: usize,
    pub element: usize,
    pub accepted: bool,
    /// Stored objective after the accept/revert decision.
    pub objective: f64,
    /// Objective the flipped pattern would have had.
    pub candidate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub initial_objective: f64,
    pub steps: Vec<TraceStep>,
    pub final_objective: f64,
    pub proposals: usize,
    pub stop: StopReason,
}

impl OptimizationTrace {
    pub fn accepted(&self) -> impl Iterator<Item = &TraceStep> {
        self.steps.iter().filter(|s| s.accepted)
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted().count()
    }

    /// Objective after each accepted flip, preceded by the starting value.
    pub fn accepted_objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_objective).chain(self.accepted().map(|s| s.objective)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("proposal,element,accepted,objective\n");
        for s in &self.steps {
            let _ = writeln!(out, "{},{},{},{:.17e}", s.proposal, s.element, u8::from(s.accepted), s.objective);
        }
        out
    }
}

/// Greedy single-flip descent on the mask error.
///
/// Each proposal flips one uniformly drawn element. The field update is
/// incremental, `E_k += c_mk (R_new - R_old)`, so a proposal costs `O(K)`.
/// A flip is kept only if the objective strictly decreases.
pub fn greedy_flip_optimize(
    ctx: &PropagationContext,
    exc: &Excitation,
    layout: &ApertureLayout,
    table: &UnitCellStateTable,
    target: &TargetSpec,
    cfg: &OptimizerConfig,
) -> Result<(PhasePattern, OptimizationTrace)> {
    let mask = target.compile(ctx, exc, layout)?;
    let contributions = element_contributions(ctx, exc, layout, &mask.grid)?;
    optimize_with_contributions(&contributions, layout, &mask, table, cfg)
}

/// As [`greedy_flip_optimize`], reusing precomputed element contributions.
pub fn optimize_with_contributions(
    contributions: &ElementContributions,
    layout: &ApertureLayout,
    mask: &MaskTarget,
    table: &UnitCellStateTable,
    cfg: &OptimizerConfig,
) -> Result<(PhasePattern, OptimizationTrace)> {
    cfg.validate()?;
    table.validate()?;
    mask.validate()?;
    if !contributions.grid().congruent(&mask.grid) {
        return Err(Error::GridMismatch("contributions and mask lie on different grids".into()));
    }
    let m_count = contributions.n_elements();
    if m_count != layout.len() {
        return Err(Error::GridMismatch(format!("{m_count} contribution rows for {} elements", layout.len())));
    }
    let mut pattern = match &cfg.initial {
        Some(p) => {
            p.check_layout(layout)?;
            p.clone()
        }
        None => PhasePattern::uniform(layout, State::S1),
    };

    let target: Vec<f64> = mask.magnitude.iter().copied().collect();
    let k = target.len() as f64;
    let mut field = vec![Complex64::new(0.0, 0.0); target.len()];
    for (m, &state) in pattern.states().iter().enumerate() {
        let r = table.reflection(state);
        for (e, c) in field.iter_mut().zip(contributions.row(m)) {
            *e += c * r;
        }
    }
    let sq_err = |f: &[Complex64]| f.iter().zip(&target).map(|(e, t)| (e.norm() - t).powi(2)).sum::<f64>() / k;
    let mut current = sq_err(&field);
    let initial_objective = current;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut steps = Vec::new();
    let mut since_accept = 0;
    let mut proposals = 0;
    let mut candidate = vec![Complex64::new(0.0, 0.0); field.len()];
    let stop = loop {
        if proposals >= cfg.max_proposals {
            break StopReason::HardCap;
        }
        proposals += 1;
        let m = rng.random_range(0..m_count);
        let old = pattern.states()[m];
        let delta = table.reflection(old.flipped()) - table.reflection(old);
        for ((c, e), w) in candidate.iter_mut().zip(&field).zip(contributions.row(m)) {
            *c = e + w * delta;
        }
        let cand_obj = sq_err(&candidate);
        // a mathematically exact tie can round either way; don't count it as progress
        let accepted = cand_obj < current - TIE_GUARD * current;
        if accepted {
            pattern.flip(m);
            std::mem::swap(&mut field, &mut candidate);
            current = cand_obj;
            since_accept = 0;
        } else {
            since_accept += 1;
        }
        steps.push(TraceStep { proposal: proposals, element: m, accepted, objective: current, candidate: cand_obj });
        if since_accept >= cfg.stall_window {
            break StopReason::Stalled;
        }
    };

    let trace = OptimizationTrace { initial_objective, steps, final_objective: current, proposals, stop };
    Ok((pattern, trace))
}
