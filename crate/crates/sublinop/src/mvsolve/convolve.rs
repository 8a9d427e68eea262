//! Quadratic inf/sup convolution and mollification on grid functions.
//!
//! The inf convolution u_e(x) = min_y { u(y) + |x-y|^2 / (2e) } runs over
//! all non-Outside nodes y. The squared distance splits per axis, so the
//! minimum factors into a column pass followed by a row pass; this is the
//! exact discrete minimum, not an approximation.

use crate::error::{Error, Result};

use super::grid::{GridFn, Mask};

fn quadratic_pass(
    input: &[f64],
    stride: usize,
    count: usize,
    offset: usize,
    len: usize,
    scale: f64,
    out: &mut [f64],
) {
    // out[i] = min_j input[offset + j*stride] + scale*(i-j)^2 over the
    // count entries of one line; +inf entries pass through untouched.
    for i in 0..len {
        let mut best = f64::INFINITY;
        for j in 0..count {
            let v = input[offset + j * stride];
            if v == f64::INFINITY {
                continue;
            }
            let d = i as f64 - j as f64;
            let cand = v + scale * d * d;
            if cand < best {
                best = cand;
            }
        }
        out[i] = best;
    }
}

fn inf_convolution_signed(u: &GridFn, eps_c: f64, sign: f64) -> Result<GridFn> {
    if !(eps_c.is_finite() && eps_c > 0.0) {
        return Err(Error::Validation(format!(
            "convolution parameter must be positive, got {eps_c}"
        )));
    }
    let grid = u.grid().clone();
    let (nx, ny) = (grid.nx(), grid.ny());
    let h = grid.h();
    let scale = h * h / (2.0 * eps_c);

    // Lift to +inf on Outside so those nodes never act as minimizers.
    let mut lifted = vec![f64::INFINITY; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            if grid.mask_at(ix, iy) != Mask::Outside {
                lifted[iy * nx + ix] = sign * u.value(ix, iy);
            }
        }
    }

    // Column pass: minimize over jy for every column ix.
    let mut mid = vec![f64::INFINITY; nx * ny];
    let mut line = vec![0.0f64; ny];
    for ix in 0..nx {
        quadratic_pass(&lifted, nx, ny, ix, ny, scale, &mut line);
        for iy in 0..ny {
            mid[iy * nx + ix] = line[iy];
        }
    }

    // Row pass: minimize over jx at every row iy.
    let mut vals = vec![0.0f64; nx * ny];
    let mut row = vec![0.0f64; nx];
    for iy in 0..ny {
        quadratic_pass(&mid, 1, nx, iy * nx, nx, scale, &mut row);
        for ix in 0..nx {
            vals[iy * nx + ix] = if grid.mask_at(ix, iy) == Mask::Outside {
                0.0
            } else {
                sign * row[ix]
            };
        }
    }
    GridFn::from_values(grid, vals)
}

/// inf_y { u(y) + |x-y|^2 / (2 eps_c) } over non-Outside nodes y.
pub fn inf_convolution(u: &GridFn, eps_c: f64) -> Result<GridFn> {
    inf_convolution_signed(u, eps_c, 1.0)
}

/// sup_y { u(y) - |x-y|^2 / (2 eps_c) }, the dual regularization.
pub fn sup_convolution(u: &GridFn, eps_c: f64) -> Result<GridFn> {
    inf_convolution_signed(u, eps_c, -1.0)
}

/// Convolution with the normalized bump exp(-1/(1-|y/r|^2)) truncated at
/// |y| = r. Interior nodes get the smoothed value; the boundary band
/// keeps the original data so Dirichlet conditions survive.
pub fn mollify(u: &GridFn, kernel_radius: f64) -> Result<GridFn> {
    let grid = u.grid().clone();
    let h = grid.h();
    if !(kernel_radius.is_finite() && kernel_radius >= 2.0 * h - 1e-12 * (1.0 + h)) {
        return Err(Error::Validation(format!(
            "mollifier radius {kernel_radius} must be at least 2h = {}",
            2.0 * h
        )));
    }
    let k = (kernel_radius / h).floor() as i32;
    let mut taps: Vec<(i32, i32, f64)> = Vec::new();
    let mut mass = 0.0;
    for dj in -k..=k {
        for di in -k..=k {
            let rr = ((di * di + dj * dj) as f64) * h * h / (kernel_radius * kernel_radius);
            if rr < 1.0 {
                let w = (-1.0 / (1.0 - rr)).exp();
                taps.push((di, dj, w));
                mass += w;
            }
        }
    }
    for t in taps.iter_mut() {
        t.2 /= mass;
    }

    let (nx, ny) = (grid.nx(), grid.ny());
    let mut vals = vec![0.0f64; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            match grid.mask_at(ix, iy) {
                Mask::Outside => {}
                Mask::BoundaryBand => vals[iy * nx + ix] = u.value(ix, iy),
                Mask::Interior => {
                    let mut acc = 0.0;
                    for &(di, dj, w) in &taps {
                        let jx = ix as i32 + di;
                        let jy = iy as i32 + dj;
                        let escaped = jx < 0
                            || jy < 0
                            || jx >= nx as i32
                            || jy >= ny as i32
                            || grid.mask_at(jx as usize, jy as usize) == Mask::Outside;
                        if escaped {
                            return Err(Error::Validation(format!(
                                "boundary band too thin for mollifier radius \
                                 {kernel_radius} at node ({ix}, {iy})"
                            )));
                        }
                        acc += w * u.value(jx as usize, jy as usize);
                    }
                    vals[iy * nx + ix] = acc;
                }
            }
        }
    }
    GridFn::from_values(grid, vals)
}
