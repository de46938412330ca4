use ndarray::Array2;

use super::MaskTarget;
use crate::error::{Error, Result};
use crate::types::FieldMap;

/// `(1/K) sum_k (|E_k| - T_k)^2`.
pub fn mse_objective(computed: &FieldMap, target: &MaskTarget) -> Result<f64> {
    if !computed.grid().congruent(&target.grid) {
        return Err(Error::GridMismatch("computed field and target mask lie on different grids".into()));
    }
    let k = target.magnitude.len() as f64;
    let sum: f64 = computed.values().iter().zip(target.magnitude.iter()).map(|(e, t)| (e.norm() - t).powi(2)).sum();
    Ok(sum / k)
}

/// Pearson correlation of two equally shaped arrays; 0 when either is constant.
pub fn normalized_cross_correlation(a: &Array2<f64>, b: &Array2<f64>) -> Result<f64> {
    if a.dim() != b.dim() || a.is_empty() {
        return Err(Error::GridMismatch(format!("cannot correlate {:?} with {:?}", a.dim(), b.dim())));
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.sum() / n, b.sum() / n);
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        let (dx, dy) = (x - ma, y - mb);
        ab += dx * dy;
        aa += dx * dx;
        bb += dy * dy;
    }
    if aa == 0.0 || bb == 0.0 {
        return Ok(0.0);
    }
    Ok(ab / (aa * bb).sqrt())
}
