//! Grid-based mean-value machinery in the plane: masked lattices,
//! ellipsoid quadrature, the excess operator, a monotone Dirichlet
//! solver, and the inf/sup-convolution regularizations.
//!
//! Everything here works with the orbit-hull bodies of [`crate::rotinv`]
//! restricted to dimension two, where the rotation group is a circle and
//! the extreme points of the body discretize into finitely many matrices
//! Z = R diag(a) R^T.

pub mod convolve;
pub mod grid;
pub mod rule;
pub mod solve;

pub use convolve::{inf_convolution, mollify, sup_convolution};
pub use grid::{Grid2, GridFn, Mask};
pub use rule::{
    build_rule, build_stencils, pushforward_rule, EllipsoidRule, Stencil, StencilSet, ZFamily,
    DEFAULT_DENSITY,
};
pub use solve::{
    max_interior_excess, mv_excess, mv_excess_with, pullback_sqrt_z, solve_dirichlet, SolveReport,
};
