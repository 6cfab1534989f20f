use num_bigint::BigUint;
use serde::Serialize;

use crate::permkit::Dims;
use crate::{Error, Result};

/// Beyond this many free cells only the logarithm is reported.
pub const EXACT_LIMIT: usize = 5000;

/// Residual key-space size `(N·M − Σ R_j·Z_j)!`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    pub free_cells: usize,
    /// Decimal digits of the exact factorial, when small enough.
    pub exact: Option<String>,
    pub log10: f64,
}

pub fn log10_factorial(n: usize) -> f64 {
    (2..=n).fold(0.0, |acc, k| acc + (k as f64).log10())
}

pub fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::from(1u32), |acc, k| acc * k)
}

/// `regions` lists `(R_j, Z_j)`: `R_j` regions of `Z_j` pixels each.
pub fn search_space_reduction(dims: Dims, regions: &[(usize, usize)]) -> Result<SearchSpace> {
    let fixed: usize = regions.iter().map(|&(r, z)| r * z).sum();
    let free_cells = dims
        .cells()
        .checked_sub(fixed)
        .ok_or_else(|| Error::invalid(format!("{fixed} fixed cells exceed {} cells", dims.cells())))?;
    Ok(SearchSpace {
        free_cells,
        exact: (free_cells <= EXACT_LIMIT).then(|| factorial(free_cells).to_string()),
        log10: log10_factorial(free_cells),
    })
}
