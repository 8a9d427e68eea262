//! Mean-value excess and the Dirichlet iteration.
//!
//! The discrete operator at an interior node is
//!     S(u)(x) = max_Z avg_{E_Z(x, eps)} u  -  u(x),
//! the maximum taken over the rotation family of the body. Supersolutions
//! have S(u) <= 0 up to scheme error; the Dirichlet solver drives S(u) to
//! zero by Gauss-Seidel sweeps that update u(x) to the best average.
//! Every average has positive weights summing to one, so one update is
//! monotone in the surrounding values and the iteration started at the
//! minimum of the boundary data increases toward the fixed point.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rotinv::RotInvBody;
use crate::symmat::{self, SymMat};
use crate::tol;

use super::grid::{Grid2, GridFn, Mask};
use super::rule::{build_stencils, StencilSet, ZFamily, DEFAULT_DENSITY};

/// Iteration summary returned alongside the solution.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub sweeps: usize,
    pub final_update: f64,
    pub max_mv_excess: f64,
}

/// Dense per-member weight boxes sharing one bounding rectangle.
struct DenseKernel {
    lo_i: i32,
    lo_j: i32,
    w: usize,
    hgt: usize,
    mats: Vec<Vec<f64>>,
}

impl DenseKernel {
    fn from_set(set: &StencilSet) -> DenseKernel {
        let mut lo_i = 0i32;
        let mut hi_i = 0i32;
        let mut lo_j = 0i32;
        let mut hi_j = 0i32;
        for st in &set.stencils {
            for &(di, dj, _) in &st.taps {
                lo_i = lo_i.min(di);
                hi_i = hi_i.max(di);
                lo_j = lo_j.min(dj);
                hi_j = hi_j.max(dj);
            }
        }
        let w = (hi_i - lo_i + 1).max(1) as usize;
        let hgt = (hi_j - lo_j + 1).max(1) as usize;
        let mats = set
            .stencils
            .iter()
            .map(|st| {
                let mut m = vec![0.0f64; w * hgt];
                for &(di, dj, wt) in &st.taps {
                    m[(dj - lo_j) as usize * w + (di - lo_i) as usize] = wt;
                }
                m
            })
            .collect();
        DenseKernel {
            lo_i,
            lo_j,
            w,
            hgt,
            mats,
        }
    }

    /// Best average over the family at node (ix, iy); caller guarantees
    /// the box is in bounds.
    fn best_average(&self, values: &[f64], nx: usize, ix: usize, iy: usize) -> f64 {
        let base =
            (iy as i32 + self.lo_j) as usize * nx + (ix as i32 + self.lo_i) as usize;
        let mut best = f64::NEG_INFINITY;
        for m in &self.mats {
            let mut acc = 0.0;
            for r in 0..self.hgt {
                let start = base + r * nx;
                acc += dot4(&values[start..start + self.w], &m[r * self.w..(r + 1) * self.w]);
            }
            if acc > best {
                best = acc;
            }
        }
        best
    }

    fn in_bounds(&self, grid: &Grid2, ix: usize, iy: usize) -> bool {
        let (ix, iy) = (ix as i32, iy as i32);
        ix + self.lo_i >= 0
            && iy + self.lo_j >= 0
            && ix + self.lo_i + self.w as i32 - 1 < grid.nx() as i32
            && iy + self.lo_j + self.hgt as i32 - 1 < grid.ny() as i32
    }
}

fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (mut s0, mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut k = 0;
    while k + 4 <= n {
        s0 += a[k] * b[k];
        s1 += a[k + 1] * b[k + 1];
        s2 += a[k + 2] * b[k + 2];
        s3 += a[k + 3] * b[k + 3];
        k += 4;
    }
    let mut rest = 0.0;
    while k < n {
        rest += a[k] * b[k];
        k += 1;
    }
    (s0 + s1) + (s2 + s3) + rest
}

/// Distinct tap offsets used by any member of the set.
fn union_taps(set: &StencilSet) -> Vec<(i32, i32)> {
    let mut u = BTreeSet::new();
    for st in &set.stencils {
        for &(di, dj, _) in &st.taps {
            u.insert((di, dj));
        }
    }
    u.into_iter().collect()
}

fn check_node_containment(
    grid: &Grid2,
    taps: &[(i32, i32)],
    ix: usize,
    iy: usize,
) -> Result<()> {
    for &(di, dj) in taps {
        let jx = ix as i32 + di;
        let jy = iy as i32 + dj;
        let escaped = jx < 0
            || jy < 0
            || jx >= grid.nx() as i32
            || jy >= grid.ny() as i32
            || grid.mask_at(jx as usize, jy as usize) == Mask::Outside;
        if escaped {
            return Err(Error::Validation(format!(
                "averaging stencil leaves the band at node ({ix}, {iy}); \
                 widen the boundary band or shrink eps"
            )));
        }
    }
    Ok(())
}

/// Mean-value excess of u at one interior node, using prebuilt stencils.
pub fn mv_excess_with(u: &GridFn, node: (usize, usize), set: &StencilSet) -> Result<f64> {
    let grid = u.grid();
    let (ix, iy) = node;
    if ix >= grid.nx() || iy >= grid.ny() {
        return Err(Error::Validation(format!(
            "node ({ix}, {iy}) is outside the grid"
        )));
    }
    if grid.mask_at(ix, iy) != Mask::Interior {
        return Err(Error::Validation(format!(
            "mean-value excess needs an interior node, ({ix}, {iy}) is not"
        )));
    }
    let taps = union_taps(set);
    check_node_containment(grid, &taps, ix, iy)?;
    let values = u.values();
    let nx = grid.nx();
    let mut best = f64::NEG_INFINITY;
    for st in &set.stencils {
        let mut acc = 0.0;
        for &(di, dj, w) in &st.taps {
            let jx = (ix as i32 + di) as usize;
            let jy = (iy as i32 + dj) as usize;
            acc += w * values[jy * nx + jx];
        }
        if acc > best {
            best = acc;
        }
    }
    Ok(best - values[iy * nx + ix])
}

/// Mean-value excess of u at an interior node over the family of
/// ellipsoids E_Z(x0, eps).
pub fn mv_excess(u: &GridFn, node: (usize, usize), family: &ZFamily, eps: f64) -> Result<f64> {
    let set = build_stencils(family, eps, u.grid().h(), DEFAULT_DENSITY)?;
    mv_excess_with(u, node, &set)
}

/// Largest excess over all interior nodes.
pub fn max_interior_excess(u: &GridFn, set: &StencilSet) -> Result<f64> {
    let grid = u.grid();
    let taps = union_taps(set);
    let kernel = DenseKernel::from_set(set);
    let values = u.values();
    let nx = grid.nx();
    let mut worst = f64::NEG_INFINITY;
    for (ix, iy) in grid.nodes_with(Mask::Interior) {
        check_node_containment(grid, &taps, ix, iy)?;
        let excess = kernel.best_average(values, nx, ix, iy) - values[iy * nx + ix];
        if excess > worst {
            worst = excess;
        }
    }
    if worst == f64::NEG_INFINITY {
        return Err(Error::Validation("grid has no interior nodes".into()));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SweepOrder {
    Alternating,
    // Exercised by the order-independence test; production sweeps alternate.
    #[cfg_attr(not(test), allow(dead_code))]
    ForwardOnly,
}

/// Solves the Dirichlet problem on the grid carried by `boundary`: band
/// values are held fixed, interior values start at the band minimum and
/// are swept until the largest single update falls below `tol`.
pub fn solve_dirichlet(
    boundary: &GridFn,
    body: &RotInvBody,
    eps: f64,
    m_rotations: usize,
    tol: f64,
    max_sweeps: usize,
) -> Result<(GridFn, SolveReport)> {
    solve_dirichlet_ordered(
        boundary,
        body,
        eps,
        m_rotations,
        tol,
        max_sweeps,
        SweepOrder::Alternating,
    )
}

pub(crate) fn solve_dirichlet_ordered(
    boundary: &GridFn,
    body: &RotInvBody,
    eps: f64,
    m_rotations: usize,
    tol: f64,
    max_sweeps: usize,
    order: SweepOrder,
) -> Result<(GridFn, SolveReport)> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Validation(format!(
            "update tolerance must be positive, got {tol}"
        )));
    }
    if max_sweeps == 0 {
        return Err(Error::Validation("max_sweeps must be positive".into()));
    }
    let family = ZFamily::for_solver(body, m_rotations)?;
    let grid: Arc<Grid2> = boundary.grid().clone();
    let set = build_stencils(&family, eps, grid.h(), DEFAULT_DENSITY)?;
    let kernel = DenseKernel::from_set(&set);
    let taps = union_taps(&set);

    let interior = grid.nodes_with(Mask::Interior);
    let band = grid.nodes_with(Mask::BoundaryBand);
    if interior.is_empty() {
        return Err(Error::Validation("grid has no interior nodes".into()));
    }
    if band.is_empty() {
        return Err(Error::Validation("grid has no boundary band".into()));
    }
    for &(ix, iy) in &interior {
        if !kernel.in_bounds(&grid, ix, iy) {
            return Err(Error::Validation(format!(
                "averaging stencil leaves the grid at node ({ix}, {iy})"
            )));
        }
        check_node_containment(&grid, &taps, ix, iy)?;
    }

    let nx = grid.nx();
    let floor = band
        .iter()
        .map(|&(ix, iy)| boundary.value(ix, iy))
        .fold(f64::INFINITY, f64::min);
    let mut values = boundary.values().to_vec();
    for &(ix, iy) in &interior {
        values[iy * nx + ix] = floor;
    }

    let mut sweeps = 0usize;
    let mut final_update = f64::INFINITY;
    let mut converged = false;
    while sweeps < max_sweeps {
        let backward = order == SweepOrder::Alternating && sweeps % 2 == 1;
        let mut update: f64 = 0.0;
        let mut visit = |&(ix, iy): &(usize, usize)| {
            let best = kernel.best_average(&values, nx, ix, iy);
            let at = iy * nx + ix;
            let delta = (best - values[at]).abs();
            if delta > update {
                update = delta;
            }
            values[at] = best;
        };
        if backward {
            interior.iter().rev().for_each(&mut visit);
        } else {
            interior.iter().for_each(&mut visit);
        }
        sweeps += 1;
        final_update = update;
        if update < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "no convergence after {sweeps} sweeps, last update {final_update:.3e}"
        )));
    }

    let mut worst = f64::NEG_INFINITY;
    for &(ix, iy) in &interior {
        let excess = kernel.best_average(&values, nx, ix, iy) - values[iy * nx + ix];
        if excess > worst {
            worst = excess;
        }
    }

    let u = GridFn::from_values(grid, values)?;
    let report = SolveReport {
        sweeps,
        final_update,
        max_mv_excess: worst,
    };
    Ok((u, report))
}

/// Composes a field with the linear map sqrt(Z): x -> f(sqrt(Z) x).
/// If f is a supersolution for the body, the pullback is superharmonic
/// wherever tr(Z D^2 f) <= 0 propagates through the chain rule.
pub fn pullback_sqrt_z<F>(f: F, z: &SymMat) -> Result<impl Fn(&[f64]) -> f64>
where
    F: Fn(&[f64]) -> f64,
{
    let spec = symmat::eigh(z)?;
    if spec.eigenvalues()[0] < -tol::ELLIPTIC_EIG {
        return Err(Error::Validation(
            "pullback needs a positive semidefinite matrix".into(),
        ));
    }
    let n = z.n();
    let frame = spec.frame().to_vec();
    let roots: Vec<f64> = spec
        .eigenvalues()
        .iter()
        .map(|&e| e.max(0.0).sqrt())
        .collect();
    let mut s = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for (k, rk) in roots.iter().enumerate() {
                acc += frame[i * n + k] * rk * frame[j * n + k];
            }
            s[i * n + j] = acc;
        }
    }
    Ok(move |x: &[f64]| {
        assert_eq!(x.len(), n, "pullback argument has wrong dimension");
        let mut y = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += s[i * n + j] * x[j];
            }
            y[i] = acc;
        }
        f(&y)
    })
}
