//! Farthest point sampling.

use crate::error::{Error, Result};
use crate::geom::Point;

/// Squared distances within this relative gap count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Greedy farthest point sampling seeded at index 0.
///
/// Each pick maximizes the distance to the already chosen set; ties go to the
/// lowest index, with rounding noise ignored.
pub fn farthest_point_sampling(positions: &[Point], count: usize) -> Result<Vec<usize>> {
    if count == 0 || count > positions.len() {
        return Err(Error::Argument(format!(
            "sample count {count} outside 1..={}",
            positions.len()
        )));
    }
    let mut picked = Vec::with_capacity(count);
    let mut min_d2 = vec![f64::INFINITY; positions.len()];
    let mut current = 0usize;
    picked.push(current);
    min_d2[current] = -1.0;
    while picked.len() < count {
        let anchor = positions[current];
        let mut best = usize::MAX;
        let mut best_d2 = -1.0f64;
        for (i, p) in positions.iter().enumerate() {
            if min_d2[i] < 0.0 {
                continue;
            }
            let d2 = (p - anchor).norm_squared();
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
            if min_d2[i] > best_d2 + TIE_TOLERANCE * best_d2.abs() {
                best_d2 = min_d2[i];
                best = i;
            }
        }
        current = best;
        min_d2[current] = -1.0;
        picked.push(current);
    }
    Ok(picked)
}
