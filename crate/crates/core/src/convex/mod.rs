//! Convex functions on uniform grids: conjugates, infimal convolution and
//! Moreau–Yosida regularization.

pub mod box_grid;
pub mod conjugate;
pub mod grid;
pub mod infconv;

pub use box_grid::BoxGridFunction;
pub use conjugate::{conjugate_at, default_dual_range, legendre_transform, legendre_transform_with, TailMode};
pub use grid::{ConvexGridFunction, GridFunction, DEFAULT_CONVEXITY_TOL};
pub use infconv::{inf_convolution, inf_convolution_quadratic, moreau_yosida, young_gap};
