use crate::{Error, Result};

/// Least-squares fit of `ln E_n = c + d·ln n`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SpacingFit {
    /// Exponent in `E_n ∝ n^d`.
    pub d: f64,
    pub r_squared: f64,
}

/// Fits the exponent `d` of `E_n ∝ n^d` from `(n, E_n)` levels.
///
/// The particle-in-a-box spectrum `E_n ∝ n²` gives `d = 2`. When every
/// `E_n` is equal the fit is exact and `r² = 1`.
pub fn spacing_exponent(levels: &[(u64, f64)]) -> Result<SpacingFit> {
    if levels.len() < 3 {
        return Err(Error::TooFewLevels(levels.len()));
    }
    for (index, &(n, e)) in levels.iter().enumerate() {
        if n == 0 || !(e > 0.0) || !e.is_finite() {
            return Err(Error::NonPositiveLevel { index });
        }
    }
    if levels.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument("level indices must be strictly increasing".into()));
    }
    let m = levels.len() as f64;
    let xs = levels.iter().map(|&(n, _)| libm::log(n as f64));
    let ys = levels.iter().map(|&(_, e)| libm::log(e));
    let mean_x = xs.clone().sum::<f64>() / m;
    let mean_y = ys.clone().sum::<f64>() / m;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.zip(ys) {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let d = sxy / sxx;
    let ss_res = syy - d * sxy;
    let r_squared = if syy > 0.0 { 1.0 - ss_res.max(0.0) / syy } else { 1.0 };
    Ok(SpacingFit { d, r_squared })
}
