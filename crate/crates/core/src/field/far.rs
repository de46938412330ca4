use ndarray::Array2;
use num_complex::Complex64;

use super::{incident_field, PropagationContext};
use crate::error::Result;
use crate::types::{ApertureLayout, Excitation, FarFieldPattern, PhasePattern, UnitCellStateTable, UvGrid};

/// Far-field pattern by direct summation,
/// `E(u, v) = F(theta) sum_m a_m e^{j k0 (x_m u + y_m v)}` with
/// `a_m = E_inc^m e^{j Phi_inc^m} R_m`.
///
/// The double sum factorizes over rows and columns of the layout.
pub fn far_field_direct(
    ctx: &PropagationContext,
    exc: &Excitation,
    layout: &ApertureLayout,
    pattern: &PhasePattern,
    table: &UnitCellStateTable,
    grid: &UvGrid,
) -> Result<FarFieldPattern> {
    exc.validate()?;
    pattern.check_layout(layout)?;
    let k0 = ctx.k0();
    let inc = incident_field(ctx, exc, layout);
    let (nx, ny) = (layout.n_x(), layout.n_y());
    let weights = Array2::from_shape_fn((ny, nx), |(r, c)| {
        let m = layout.index(r, c);
        inc[m] * table.reflection(pattern.states()[m])
    });

    // column sums: partial[r, i] = sum_c a[r, c] e^{j k0 x_c u_i}
    let col_phase = Array2::from_shape_fn((nx, grid.n_u), |(c, i)| Complex64::from_polar(1.0, k0 * layout.x(c) * grid.u(i)));
    let partial = weights.dot(&col_phase);
    let row_phase = Array2::from_shape_fn((grid.n_v, ny), |(j, r)| Complex64::from_polar(1.0, k0 * layout.y(r) * grid.v(j)));
    let mut values = row_phase.dot(&partial);

    for ((j, i), val) in values.indexed_iter_mut() {
        let (u, v) = (grid.u(i), grid.v(j));
        let rho2 = u * u + v * v;
        if rho2 <= 1.0 {
            let cos_theta = (1.0 - rho2).sqrt();
            *val *= 0.5 * (1.0 + cos_theta);
        }
    }
    FarFieldPattern::new(*grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::element_pattern;
    use crate::types::State;

    #[test]
    fn uniform_aperture_peaks_at_broadside() {
        let layout = ApertureLayout::new(8, 8, 0.03).unwrap();
        let p = far_field_direct(
            &PropagationContext::default(),
            &Excitation::normal_incidence(),
            &layout,
            &PhasePattern::uniform(&layout, State::S1),
            &UnitCellStateTable::default(),
            &UvGrid::square(101).unwrap(),
        )
        .unwrap();
        let (u, v, _) = p.peak();
        assert_eq!((u, v), (0.0, 0.0));
    }

    #[test]
    fn single_element_follows_element_pattern() {
        let layout = ApertureLayout::new(1, 1, 0.03).unwrap();
        let grid = UvGrid::square(41).unwrap();
        let p = far_field_direct(
            &PropagationContext::default(),
            &Excitation::normal_incidence(),
            &layout,
            &PhasePattern::uniform(&layout, State::S0),
            &UnitCellStateTable::lossless(),
            &grid,
        )
        .unwrap();
        for ((j, i), v) in p.values().indexed_iter() {
            if grid.is_visible(j, i) {
                let s = (grid.u(i).powi(2) + grid.v(j).powi(2)).sqrt().min(1.0);
                let f = element_pattern(s.asin()).unwrap();
                assert!((v.norm() - f).abs() < 1e-12);
            }
        }
        // the element pattern alone has a single maximum
        assert_eq!(p.lobes(-60.0).len(), 1);
    }
}
