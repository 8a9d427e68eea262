//! Sublinear elliptic operators represented by convex bodies.
//!
//! A sublinear operator F on the symmetric matrices S(n) is the support
//! function of a unique compact convex body K: F(X) = max over Y in K of
//! tr(YX). This crate represents such operators by finite generator data,
//! computes their structural invariants, and solves 2D Dirichlet problems
//! through the ellipsoid mean-value characterization of viscosity
//! super/sub-solutions.
//!
//! Module map:
//!
//! - [`symmat`]: dense symmetric matrix kernel (Jacobi eigendecomposition,
//!   trace inner product, majorization, rearrangement inequality)
//! - [`convbody`]: convex bodies as generator hulls, support functions,
//!   Minkowski algebra, ellipticity classification, cone membership
//! - [`rotinv`]: rotationally invariant operators via the eigenvalue-map
//!   reduction to R^n, apertures, and the minimal dominative bound
//! - [`fundsol`]: radial fundamental solutions and residual verification
//! - [`mvsolve`]: 2D grids, ellipsoid quadrature, the mean-value Dirichlet
//!   solver, inf/sup convolutions, and mollification
//! - [`bodyspec`]: the JSON operator-specification format shared with the
//!   CLI
//! - [`sample`]: seeded sampling utilities for reproducible experiments

pub mod bodyspec;
pub mod convbody;
pub mod error;
pub mod fundsol;
pub mod mvsolve;
pub mod rotinv;
pub mod sample;
pub mod symmat;
pub mod tol;

pub use error::{Error, Result};
