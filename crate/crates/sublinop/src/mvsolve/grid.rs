//! Uniform 2D lattices with a three-way mask and grid functions on them.
//!
//! The mask splits nodes into Interior (unknowns: every node strictly
//! inside the domain), BoundaryBand (Dirichlet data on a collar of the
//! complement, wide enough to catch every quadrature stencil leaving the
//! interior) and Outside (never read). The collar spans band_cells * h
//! plus half a cell: a stencil tap sits within eps sqrt(Lambda) of its
//! center and its bilinear cell corners add at most sqrt(2) h, so with
//! band_cells = ceil(eps sqrt(Lambda) / h) + 1 every corner lands on
//! readable nodes.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mask {
    Interior,
    BoundaryBand,
    Outside,
}

impl Mask {
    pub fn as_str(self) -> &'static str {
        match self {
            Mask::Interior => "interior",
            Mask::BoundaryBand => "band",
            Mask::Outside => "outside",
        }
    }

    fn parse(s: &str) -> Result<Mask> {
        match s {
            "interior" => Ok(Mask::Interior),
            "band" => Ok(Mask::BoundaryBand),
            "outside" => Ok(Mask::Outside),
            other => Err(Error::Parse(format!("unknown mask label {other:?}"))),
        }
    }
}

/// Uniform lattice over a rectangle with per-node mask labels.
#[derive(Debug, Clone)]
pub struct Grid2 {
    origin: [f64; 2],
    h: f64,
    nx: usize,
    ny: usize,
    mask: Vec<Mask>,
}

impl Grid2 {
    /// Builds the mask from a signed distance (positive inside the
    /// domain): nodes with sd > 0 are Interior unknowns; the data collar
    /// covers sd in (-(band_cells + 1/2) h, 0].
    pub fn from_signed_distance(
        origin: [f64; 2],
        h: f64,
        nx: usize,
        ny: usize,
        band_cells: usize,
        sd: impl Fn(f64, f64) -> f64,
    ) -> Result<Grid2> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Validation(format!("grid spacing must be positive, got {h}")));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::Validation(format!(
                "grid needs at least 3x3 nodes, got {nx}x{ny}"
            )));
        }
        let collar = (band_cells as f64 + 0.5) * h;
        let mut mask = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let x = origin[0] + ix as f64 * h;
                let y = origin[1] + iy as f64 * h;
                let d = sd(x, y);
                mask.push(if d > 0.0 {
                    Mask::Interior
                } else if d > -collar {
                    Mask::BoundaryBand
                } else {
                    Mask::Outside
                });
            }
        }
        Ok(Grid2 { origin, h, nx, ny, mask })
    }

    /// Square domain [-half, half]^2 centered at the origin.
    pub fn square(half: f64, h: f64, band_cells: usize) -> Result<Grid2> {
        if !(half.is_finite() && half > 0.0) {
            return Err(Error::Validation(format!("square half-width must be positive, got {half}")));
        }
        let k = (half / h - 1e-12).ceil() as usize;
        let margin = band_cells + 2;
        let ext = k + margin;
        let n = 2 * ext + 1;
        let o = -(ext as f64) * h;
        Self::from_signed_distance([o, o], h, n, n, band_cells, |x, y| {
            (half - x.abs()).min(half - y.abs())
        })
    }

    /// Annulus r_in <= |x| <= r_out centered at the origin.
    pub fn annulus(r_in: f64, r_out: f64, h: f64, band_cells: usize) -> Result<Grid2> {
        if !(0.0 < r_in && r_in < r_out && r_out.is_finite()) {
            return Err(Error::Validation(format!(
                "annulus radii must satisfy 0 < r_in < r_out, got ({r_in}, {r_out})"
            )));
        }
        let k = (r_out / h - 1e-12).ceil() as usize;
        let margin = band_cells + 2;
        let ext = k + margin;
        let n = 2 * ext + 1;
        let o = -(ext as f64) * h;
        Self::from_signed_distance([o, o], h, n, n, band_cells, move |x, y| {
            let r = x.hypot(y);
            (r - r_in).min(r_out - r)
        })
    }

    /// Stencil reach in cells for quadrature radius eps over a body with
    /// largest eigenvalue lambda_max, plus one safety cell.
    pub fn band_cells_for(eps: f64, lambda_max: f64, h: f64) -> usize {
        (eps * lambda_max.sqrt() / h).ceil() as usize + 1
    }

    pub(crate) fn from_parts(
        origin: [f64; 2],
        h: f64,
        nx: usize,
        ny: usize,
        mask: Vec<Mask>,
    ) -> Result<Grid2> {
        if mask.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "mask length {} does not match {nx}x{ny}",
                mask.len()
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Validation(format!("grid spacing must be positive, got {h}")));
        }
        Ok(Grid2 { origin, h, nx, ny, mask })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.origin[0] + ix as f64 * self.h
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.origin[1] + iy as f64 * self.h
    }

    #[inline]
    pub fn mask_at(&self, ix: usize, iy: usize) -> Mask {
        self.mask[self.idx(ix, iy)]
    }

    pub fn mask(&self) -> &[Mask] {
        &self.mask
    }

    pub fn nodes_with(&self, want: Mask) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                if self.mask_at(ix, iy) == want {
                    out.push((ix, iy));
                }
            }
        }
        out
    }
}

/// Scalar field sampled on a grid; finite on Interior and BoundaryBand,
/// fixed 0.0 placeholder on Outside.
#[derive(Debug, Clone)]
pub struct GridFn {
    grid: Arc<Grid2>,
    values: Vec<f64>,
}

impl GridFn {
    pub fn from_fn(grid: Arc<Grid2>, f: impl Fn(f64, f64) -> f64) -> Result<GridFn> {
        let mut values = vec![0.0; grid.nx * grid.ny];
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                if grid.mask_at(ix, iy) != Mask::Outside {
                    let v = f(grid.x(ix), grid.y(iy));
                    if !v.is_finite() {
                        return Err(Error::Validation(format!(
                            "field value at ({}, {}) is not finite",
                            grid.x(ix),
                            grid.y(iy)
                        )));
                    }
                    values[grid.idx(ix, iy)] = v;
                }
            }
        }
        Ok(GridFn { grid, values })
    }

    pub fn constant(grid: Arc<Grid2>, c: f64) -> Result<GridFn> {
        Self::from_fn(grid, |_, _| c)
    }

    pub fn from_values(grid: Arc<Grid2>, values: Vec<f64>) -> Result<GridFn> {
        if values.len() != grid.nx * grid.ny {
            return Err(Error::DimensionMismatch(format!(
                "value count {} does not match grid {}x{}",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                if grid.mask_at(ix, iy) != Mask::Outside && !values[grid.idx(ix, iy)].is_finite() {
                    return Err(Error::Validation(
                        "grid function must be finite on non-outside nodes".into(),
                    ));
                }
            }
        }
        Ok(GridFn { grid, values })
    }

    pub fn grid(&self) -> &Arc<Grid2> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.idx(ix, iy)]
    }

    pub fn set_value(&mut self, ix: usize, iy: usize, v: f64) {
        let i = self.grid.idx(ix, iy);
        self.values[i] = v;
    }

    /// Writes `x,y,value,mask` rows, y-major, matching read_csv.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "x,y,value,mask")?;
        let g = &self.grid;
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let m = g.mask_at(ix, iy);
                let v = if m == Mask::Outside { 0.0 } else { self.value(ix, iy) };
                writeln!(out, "{},{},{},{}", g.x(ix), g.y(iy), v, m.as_str())?;
            }
        }
        Ok(())
    }

    /// Reads a full-lattice CSV produced by write_csv, reconstructing the
    /// grid from the coordinates.
    pub fn read_csv(reader: impl BufRead) -> Result<GridFn> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid CSV".into()))?
            .map_err(|e| Error::Parse(format!("read failure: {e}")))?;
        if header.trim() != "x,y,value,mask" {
            return Err(Error::Parse(format!(
                "expected header x,y,value,mask, got {header:?}"
            )));
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut values = Vec::new();
        let mut mask = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(format!("read failure: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.trim().split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Parse(format!(
                    "row {}: expected 4 fields, got {}",
                    lineno + 2,
                    parts.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad number {s:?}", lineno + 2)))
            };
            xs.push(parse(parts[0])?);
            ys.push(parse(parts[1])?);
            values.push(parse(parts[2])?);
            mask.push(Mask::parse(parts[3])?);
        }
        if xs.is_empty() {
            return Err(Error::Parse("grid CSV has no data rows".into()));
        }
        // y-major layout: the first run of constant y spans one row.
        let nx = ys.iter().take_while(|&&y| y == ys[0]).count();
        if nx < 2 || xs.len() % nx != 0 {
            return Err(Error::Parse("grid CSV rows do not form a lattice".into()));
        }
        let ny = xs.len() / nx;
        if ny < 2 {
            return Err(Error::Parse("grid CSV needs at least two rows".into()));
        }
        let h = xs[1] - xs[0];
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Parse(format!("inferred spacing {h} is not positive")));
        }
        let origin = [xs[0], ys[0]];
        let tol = 1e-9 * (1.0 + h);
        for iy in 0..ny {
            for ix in 0..nx {
                let k = iy * nx + ix;
                let ex = origin[0] + ix as f64 * h;
                let ey = origin[1] + iy as f64 * h;
                if (xs[k] - ex).abs() > tol || (ys[k] - ey).abs() > tol {
                    return Err(Error::Parse(format!(
                        "node ({ix}, {iy}) off-lattice: ({}, {})",
                        xs[k], ys[k]
                    )));
                }
            }
        }
        let grid = Arc::new(Grid2::from_parts(origin, h, nx, ny, mask)?);
        GridFn::from_values(grid, values)
    }
}
