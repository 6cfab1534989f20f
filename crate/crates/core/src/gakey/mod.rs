//! Genetic-algorithm search for permutation keys driven by a
//! region-of-interest oracle.
//!
//! An [`Individual`] is a candidate decryption key whose cells carry a state:
//! once the oracle recognises the pixel a cell places, the cell is fixed and
//! no later crossover or mutation may move it. Fitness is the fixed fraction.

mod ga;
mod individual;
mod oracle;
mod space;

pub use ga::{evaluate, run_ga, GaConfig, GaOutcome, GenerationLog};
pub use individual::{crossover_at, crossover_one_point, fitness, mutate, Cell, Individual};
pub use oracle::{validate_regions, Region, RoiOracle, SyntheticOracle};
pub use space::{factorial, log10_factorial, search_space_reduction, SearchSpace, EXACT_LIMIT};
