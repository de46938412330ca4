use ndarray::Array2;
use num_complex::Complex64;

use super::{distance, incident_field, PropagationContext, Spreading};
use crate::error::Result;
use crate::types::{ApertureLayout, Excitation, FieldMap, PhasePattern, PlaneGrid, UnitCellStateTable};

/// Field each element would put on every target point with a unit
/// reflection coefficient: `E_inc^m e^{j Phi_inc^m} e^{-j k0 r} (1 + z/r) / 2`
/// (times `1/r` under [`Spreading::Spherical`]).
///
/// Rows index elements, columns index grid points in row-major order. The
/// field of any pattern is `sum_m R(state_m) * row_m`, which is what lets the
/// optimizer update a single flipped element in `O(K)`.
#[derive(Debug, Clone)]
pub struct ElementContributions {
    grid: PlaneGrid,
    values: Array2<Complex64>,
}

impl ElementContributions {
    pub fn grid(&self) -> &PlaneGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn n_elements(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_points(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, m: usize) -> ndarray::ArrayView1<'_, Complex64> {
        self.values.row(m)
    }
}

pub fn element_contributions(
    ctx: &PropagationContext,
    exc: &Excitation,
    layout: &ApertureLayout,
    grid: &PlaneGrid,
) -> Result<ElementContributions> {
    exc.validate()?;
    grid.validate()?;
    let k0 = ctx.k0();
    let inc = incident_field(ctx, exc, layout);
    let points: Vec<[f64; 3]> = (0..grid.len()).map(|k| grid.point(k)).collect();
    let mut values = Array2::zeros((layout.len(), grid.len()));
    for (m, (x, y)) in layout.positions().enumerate() {
        let src = [x, y, 0.0];
        for (k, &p) in points.iter().enumerate() {
            let r = distance(src, p);
            let mut amp = 0.5 * (1.0 + grid.z / r);
            if ctx.spreading == Spreading::Spherical {
                amp /= r;
            }
            values[[m, k]] = inc[m] * Complex64::from_polar(amp, -k0 * r);
        }
    }
    Ok(ElementContributions { grid: *grid, values })
}

/// Sum precomputed contributions for a pattern, elements in index order.
pub fn field_from_contributions(
    contributions: &ElementContributions,
    pattern: &PhasePattern,
    table: &UnitCellStateTable,
) -> Result<FieldMap> {
    let grid = contributions.grid;
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (m, &state) in pattern.states().iter().enumerate() {
        let refl = table.reflection(state);
        for (a, c) in acc.iter_mut().zip(contributions.values.row(m)) {
            *a += c * refl;
        }
    }
    let values = Array2::from_shape_vec((grid.rows, grid.cols), acc).expect("grid-sized buffer");
    FieldMap::new(grid, values)
}

/// Reflected field on a plane parallel to the aperture.
pub fn reflected_field_on_plane(
    ctx: &PropagationContext,
    exc: &Excitation,
    layout: &ApertureLayout,
    pattern: &PhasePattern,
    table: &UnitCellStateTable,
    grid: &PlaneGrid,
) -> Result<FieldMap> {
    pattern.check_layout(layout)?;
    let contributions = element_contributions(ctx, exc, layout, grid)?;
    field_from_contributions(&contributions, pattern, table)
}
