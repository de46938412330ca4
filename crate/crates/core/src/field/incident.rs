use num_complex::Complex64;

use super::{distance, PropagationContext};
use crate::types::{ApertureLayout, Excitation};

/// Incident phase at each element center.
///
/// Plane wave: `k0 (x cos(phi) sin(theta) + y sin(phi) sin(theta))`.
/// Point source: `-k0 |r_source - r_m|`.
pub fn incident_phase(ctx: &PropagationContext, exc: &Excitation, layout: &ApertureLayout) -> Vec<f64> {
    let k0 = ctx.k0();
    match *exc {
        Excitation::PlaneWave { theta, phi, .. } => {
            let (su, sv) = (phi.cos() * theta.sin(), phi.sin() * theta.sin());
            layout.positions().map(|(x, y)| k0 * (x * su + y * sv)).collect()
        }
        Excitation::PointSource { position, .. } => {
            layout.positions().map(|(x, y)| -k0 * distance(position, [x, y, 0.0])).collect()
        }
    }
}

/// Complex incident field `E_inc^m e^{j Phi_inc^m}` at each element.
///
/// Point sources decay as `amplitude / distance`.
pub fn incident_field(ctx: &PropagationContext, exc: &Excitation, layout: &ApertureLayout) -> Vec<Complex64> {
    let phases = incident_phase(ctx, exc, layout);
    match *exc {
        Excitation::PlaneWave { amplitude, phase_ref, .. } => {
            phases.into_iter().map(|p| Complex64::from_polar(amplitude, p + phase_ref)).collect()
        }
        Excitation::PointSource { position, amplitude } => layout
            .positions()
            .zip(phases)
            .map(|((x, y), p)| Complex64::from_polar(amplitude / distance(position, [x, y, 0.0]), p))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Spreading;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn normal_incidence_is_flat() {
        let ctx = PropagationContext::default();
        let layout = ApertureLayout::prototype();
        assert!(incident_phase(&ctx, &Excitation::normal_incidence(), &layout).iter().all(|&p| p == 0.0));
    }

    #[test]
    fn half_wavelength_offset_at_thirty_degrees() {
        let ctx = PropagationContext::default();
        // two elements at x = +-lambda/2 with pitch lambda
        let layout = ApertureLayout::new(2, 1, ctx.wavelength()).unwrap();
        let exc = Excitation::plane_wave(30f64.to_radians(), 0.0).unwrap();
        let phase = incident_phase(&ctx, &exc, &layout);
        assert!((phase[1] - FRAC_PI_2).abs() < 1e-12);
        assert!((phase[0] + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn on_axis_point_source_is_symmetric() {
        let ctx = PropagationContext::new(5.2e9, Spreading::Spherical).unwrap();
        let layout = ApertureLayout::new(2, 2, 0.03).unwrap();
        let exc = Excitation::point_source([0.0, 0.0, 1.0], 1.0).unwrap();
        let field = incident_field(&ctx, &exc, &layout);
        for f in &field[1..] {
            assert!((f - field[0]).norm() < 1e-15);
        }
        let d = (1.0f64 + 2.0 * 0.015f64.powi(2)).sqrt();
        assert!((field[0].norm() - 1.0 / d).abs() < 1e-15);
    }
}
