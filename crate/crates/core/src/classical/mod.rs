//! Classical dynamics on the torus and the ergodic averages the spectral
//! statistics are compared against.

mod damping;
mod stats;
mod torus;

pub use damping::{DampingSymbol, FourierTerm, SymbolRange, A1_OUTER_PLATEAU};
pub use stats::{
    birkhoff_log_mean, default_geometric_mean, deviation_distribution, ehrenfest_constant,
    expansion_rate, fractal_exponent, geometric_mean, interpolate_rate, large_dev_params,
    rate_estimate, rate_table, rate_table_max_decrease, sample_point, BirkhoffStats,
    LargeDevParams, DEFAULT_EXPANSION_GRID, DEFAULT_GRID_1D, DEFAULT_GRID_2D,
};
pub use torus::{
    cat_apply, circle_distance, iterate, kick_apply, wrap_unit, ClassicalMap, LinearMap,
    TorusMap, TorusPoint,
};
