//! Maximal-correlation transport cost: 1D quantile formulas and an exact
//! discrete solver.

pub mod cost;
pub mod discrete;
pub mod solver;

pub use cost::{
    dual_feasibility_gap, potential_pair_cost, quantile_correlation, quantile_correlation_estimate, Correlation,
    TAIL_REJECTION_RATIO,
};
pub use discrete::{Coupling, DiscreteMeasure};
pub use solver::{brute_force_cost, monotone_cost, MAX_ATOMS};
