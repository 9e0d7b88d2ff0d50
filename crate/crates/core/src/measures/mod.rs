//! One-dimensional log-concave measures, quantile tables and profiles.

pub mod measure;
pub mod profile;
pub mod quantile;

pub use measure::{entropy, essential_continuity_check, moment_measure, normalize, LogConcaveMeasure, MeasureSidecar};
pub use profile::{
    derivative_product_integral, for_each_common_cell, measure_from_profile, measure_from_profile_with, profile,
    profile_with, Profile, DEFAULT_PROFILE_RESOLUTION,
};
pub use quantile::{QuantileMeasure, DEFAULT_QUANTILE_RESOLUTION};
