use crate::error::{Error, Result};
use crate::field::{incident_phase, PropagationContext};
use crate::types::{wrap_phase, ApertureLayout, Excitation, PhasePattern, State, UnitCellStateTable};

/// Phase distances closer than this count as a tie.
const TIE_TOLERANCE: f64 = 1e-9;

/// 1-bit code steering the reflection of `exc` towards `(theta_ref, phi_ref)`.
///
/// Each element takes the state whose phase is nearest, on the circle, to
/// the ideal compensation `-Phi_inc - k0 (x u + y v)`; ties go to S0.
pub fn quantized_steering_code(
    ctx: &PropagationContext,
    layout: &ApertureLayout,
    table: &UnitCellStateTable,
    exc: &Excitation,
    theta_ref: f64,
    phi_ref: f64,
) -> Result<PhasePattern> {
    if !(theta_ref.is_finite() && phi_ref.is_finite() && (0.0..std::f64::consts::FRAC_PI_2).contains(&theta_ref)) {
        return Err(Error::validation("steering angle", format!("theta_ref must lie in [0, pi/2), got {theta_ref}")));
    }
    let (u, v) = (theta_ref.sin() * phi_ref.cos(), theta_ref.sin() * phi_ref.sin());
    code_for_direction(ctx, layout, table, exc, u, v)
}

/// Code for the in-plane pair of a source at `theta_inc` and a receiver at
/// `theta_ref`, both signed angles in the xz plane (see
/// [`Excitation::in_plane_incidence`] for the sign convention).
pub fn pattern_from_incidence_pair(
    ctx: &PropagationContext,
    layout: &ApertureLayout,
    table: &UnitCellStateTable,
    theta_inc: f64,
    theta_ref: f64,
) -> Result<PhasePattern> {
    let exc = Excitation::in_plane_incidence(theta_inc)?;
    if !(theta_ref.is_finite() && theta_ref.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::validation("steering angle", format!("|theta_ref| must be below pi/2, got {theta_ref}")));
    }
    code_for_direction(ctx, layout, table, &exc, theta_ref.sin(), 0.0)
}

fn code_for_direction(
    ctx: &PropagationContext,
    layout: &ApertureLayout,
    table: &UnitCellStateTable,
    exc: &Excitation,
    u: f64,
    v: f64,
) -> Result<PhasePattern> {
    exc.validate()?;
    table.validate()?;
    let k0 = ctx.k0();
    let inc = incident_phase(ctx, exc, layout);
    let (p0, p1) = (table.phase(State::S0), table.phase(State::S1));
    let states = layout
        .positions()
        .zip(inc)
        .map(|((x, y), phi_inc)| {
            let ideal = -phi_inc - k0 * (x * u + y * v);
            let d0 = wrap_phase(ideal - p0).abs();
            let d1 = wrap_phase(ideal - p1).abs();
            if d1 < d0 - TIE_TOLERANCE {
                State::S1
            } else {
                State::S0
            }
        })
        .collect();
    PhasePattern::from_states(layout.n_x(), layout.n_y(), states)
}

/// Mean run length between state changes along a row, in metres.
/// Returns `None` if no row has a transition.
pub fn stripe_period(pattern: &PhasePattern, pitch: f64) -> Option<f64> {
    let mut starts = Vec::new();
    for r in 0..pattern.n_y() {
        let edges: Vec<usize> = (1..pattern.n_x()).filter(|&c| pattern.at(r, c) != pattern.at(r, c - 1)).collect();
        if edges.len() >= 2 {
            starts.push((edges[edges.len() - 1] - edges[0]) as f64 / (edges.len() - 1) as f64);
        }
    }
    if starts.is_empty() {
        return None;
    }
    // two transitions per period
    Some(2.0 * pitch * starts.iter().sum::<f64>() / starts.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PropagationContext {
        PropagationContext::default()
    }

    #[test]
    fn broadside_normal_incidence_is_all_ties() {
        let layout = ApertureLayout::prototype();
        let table = UnitCellStateTable::default();
        let p = quantized_steering_code(&ctx(), &layout, &table, &Excitation::normal_incidence(), 0.0, 0.0).unwrap();
        assert_eq!(p.count(State::S0), layout.len());
    }

    #[test]
    fn thirty_degree_stripes() {
        let layout = ApertureLayout::prototype();
        let table = UnitCellStateTable::default();
        let p = quantized_steering_code(&ctx(), &layout, &table, &Excitation::normal_incidence(), 30f64.to_radians(), 0.0)
            .unwrap();
        // columns are uniform: stripes run along y
        for c in 0..layout.n_x() {
            assert!((1..layout.n_y()).all(|r| p.at(r, c) == p.at(0, c)));
        }
        let period = stripe_period(&p, layout.pitch()).unwrap();
        let expected = ctx().wavelength() / 0.5;
        assert!((expected - 0.1153).abs() < 1e-4);
        assert!((period - expected).abs() < layout.pitch(), "{period}");
    }

    #[test]
    fn normal_source_pair_reduces_to_plain_steering() {
        let layout = ApertureLayout::prototype();
        let table = UnitCellStateTable::default();
        let t = 45f64.to_radians();
        let a = pattern_from_incidence_pair(&ctx(), &layout, &table, 0.0, t).unwrap();
        let b = quantized_steering_code(&ctx(), &layout, &table, &Excitation::normal_incidence(), t, 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn specular_pair_is_uniform() {
        let layout = ApertureLayout::prototype();
        let t = 30f64.to_radians();
        let p = pattern_from_incidence_pair(&ctx(), &layout, &UnitCellStateTable::default(), t, t).unwrap();
        assert!(p.count(State::S0) == layout.len() || p.count(State::S1) == layout.len());
    }

    #[test]
    fn oblique_pair_stripe_period() {
        let layout = ApertureLayout::prototype();
        let p = pattern_from_incidence_pair(
            &ctx(),
            &layout,
            &UnitCellStateTable::default(),
            -15f64.to_radians(),
            30f64.to_radians(),
        )
        .unwrap();
        let expected = ctx().wavelength() / (0.5 + 15f64.to_radians().sin());
        assert!((expected - 0.0760).abs() < 2e-4, "{expected}");
        let period = stripe_period(&p, layout.pitch()).unwrap();
        assert!((period - expected).abs() < layout.pitch(), "{period}");
    }

    #[test]
    fn rejects_invisible_direction() {
        let layout = ApertureLayout::prototype();
        let table = UnitCellStateTable::default();
        let exc = Excitation::normal_incidence();
        assert!(quantized_steering_code(&ctx(), &layout, &table, &exc, std::f64::consts::FRAC_PI_2, 0.0).is_err());
        assert!(pattern_from_incidence_pair(&ctx(), &layout, &table, 0.0, -2.0).is_err());
    }
}
