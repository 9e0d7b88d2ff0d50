//! Verifiers for the functional Santaló, entropy–transport and related
//! inequalities. Each returns a [`VerificationReport`].

pub mod correlation;
pub mod entropy_transport;
pub mod report;
pub mod santalo;
pub mod transform;
pub mod unconditional;
pub mod weighted;

pub use correlation::{chebyshev_pointwise_bound, correlation_check, CORRELATION_TOLERANCE};
pub use entropy_transport::{
    et_constant, et_deficit, et_deficit_with, profile_constant, profile_inequality_gap, profile_inequality_gap_with,
    ET_QUANTILE_RESOLUTION,
};
pub use report::{csv_summary, default_tolerance, VerificationReport, VerifyOptions};
pub use santalo::{
    basic_identity_residual, basic_identity_residual_with, et_chain_residual, moment_ordering_gap, santalo_constant,
    santalo_dual, santalo_product, santalo_product_with,
};
pub use transform::transform_check;
pub use unconditional::{truncation_radius, unconditional_verify, unconditional_verify_with, UnconditionalPotential};
pub use weighted::{phi, phi_primitive, weighted_product_gap};
