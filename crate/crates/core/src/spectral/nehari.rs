use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::family::TruncationFamily;
use crate::spectral::svd::operator_norm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NehariReport {
    pub levels: Vec<u32>,
    /// Operator norms of the nested truncations: lower bounds for
    /// `dist(φ, H^∞)`.
    pub lower_bounds: Vec<f64>,
    pub nondecreasing: bool,
}

pub fn nehari_distance_lower(family: &dyn TruncationFamily, levels: &[u32]) -> Result<NehariReport> {
    let lower_bounds = levels.iter().map(|&l| operator_norm(&family.matrix(l)?)).collect::<Result<Vec<_>>>()?;
    // compressions can only lose norm; allow rounding in the last place
    let nondecreasing = lower_bounds.windows(2).all(|w| w[1] >= w[0] - 4.0 * f64::EPSILON * w[0].max(1.0));
    Ok(NehariReport { levels: levels.to_vec(), lower_bounds, nondecreasing })
}
