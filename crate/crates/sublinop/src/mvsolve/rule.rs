//! Ellipsoid quadrature rules and the rotation discretization of a body.
//!
//! The average over the ellipsoid E_Z(x0, eps) = {x0 + eps sqrt(Z) c :
//! |c| < 1} is computed by pushing an equal-weight midpoint rule on the
//! unit disc through eps sqrt(Z). The midpoint set is symmetric under
//! negation and axis swap, so odd moments vanish identically; its second
//! moment is radially rescaled to match the continuum disc exactly, which
//! makes averages of quadratics exact up to rounding while keeping every
//! point strictly inside the disc.

use crate::error::{Error, Result};
use crate::rotinv::{RotInvBody, RotInvShape};
use crate::symmat::{self, SymMat};
use crate::tol;

/// Default lattice density across the unit-disc diameter.
pub const DEFAULT_DENSITY: usize = 41;

/// Equal-weight quadrature for one ellipsoid.
#[derive(Debug, Clone)]
pub struct EllipsoidRule {
    z: SymMat,
    eps: f64,
    nodes: Vec<[f64; 2]>,
    weight: f64,
}

impl EllipsoidRule {
    pub fn z(&self) -> &SymMat {
        &self.z
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Average of an analytic field over the ellipsoid centered at c.
    pub fn average_analytic(&self, center: [f64; 2], f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for d in &self.nodes {
            acc += f(center[0] + d[0], center[1] + d[1]);
        }
        acc * self.weight
    }
}

/// Midpoint lattice of the unit disc: density^2 candidate cells, centers
/// with |c| < 1 kept, second moment normalized to 1/4 per axis.
fn disc_points(density: usize) -> Result<Vec<[f64; 2]>> {
    if density < 2 {
        return Err(Error::Validation(format!(
            "quadrature density must be at least 2, got {density}"
        )));
    }
    let d = density as f64;
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for i in 0..density {
        // (2i+1-d)/d is exactly negation-symmetric in floating point.
        let cx = (2.0 * i as f64 + 1.0 - d) / d;
        for j in 0..density {
            let cy = (2.0 * j as f64 + 1.0 - d) / d;
            if cx * cx + cy * cy < 1.0 {
                pts.push([cx, cy]);
            }
        }
    }
    if pts.len() < tol::RULE_MIN_NODES {
        return Err(Error::Validation(format!(
            "density {density} yields only {} quadrature nodes, need at least {}",
            pts.len(),
            tol::RULE_MIN_NODES
        )));
    }
    let n = pts.len() as f64;
    let exx: f64 = pts.iter().map(|p| p[0] * p[0]).sum::<f64>() / n;
    let mut s = (0.25 / exx).sqrt();
    let rmax = pts
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .fold(0.0f64, f64::max);
    // Strict disc containment wins over exact moments if they conflict.
    s = s.min((1.0 - 1e-9) / rmax);
    for p in pts.iter_mut() {
        p[0] *= s;
        p[1] *= s;
    }
    Ok(pts)
}

/// 2x2 principal square root with eigenvalues clamped at zero, row-major.
fn sqrt_psd(z: &SymMat) -> Result<[f64; 4]> {
    let spec = symmat::eigh(z)?;
    let ev = spec.eigenvalues();
    let frame = spec.frame();
    let r = [ev[0].max(0.0).sqrt(), ev[1].max(0.0).sqrt()];
    let mut m = [0.0f64; 4];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = 0.0;
            for (k, rk) in r.iter().enumerate() {
                acc += frame[i * 2 + k] * rk * frame[j * 2 + k];
            }
            m[i * 2 + j] = acc;
        }
    }
    Ok(m)
}

fn map_rule(z: &SymMat, eps: f64, density: usize) -> Result<EllipsoidRule> {
    if z.n() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "quadrature rules are 2D, got dimension {}",
            z.n()
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Validation(format!("eps must be positive, got {eps}")));
    }
    let pts = disc_points(density)?;
    let s = sqrt_psd(z)?;
    let nodes: Vec<[f64; 2]> = pts
        .iter()
        .map(|c| {
            [
                eps * (s[0] * c[0] + s[1] * c[1]),
                eps * (s[2] * c[0] + s[3] * c[1]),
            ]
        })
        .collect();
    let weight = 1.0 / nodes.len() as f64;
    Ok(EllipsoidRule {
        z: z.clone(),
        eps,
        nodes,
        weight,
    })
}

/// Quadrature over E_Z(., eps) for positive definite Z.
pub fn build_rule(z: &SymMat, eps: f64, density: usize) -> Result<EllipsoidRule> {
    let spec = symmat::eigh(z)?;
    if spec.eigenvalues()[0] <= tol::RULE_PD_MIN {
        return Err(Error::Validation(
            "ellipsoid matrix must be positive definite".into(),
        ));
    }
    map_rule(z, eps, density)
}

/// Pushforward rule for positive semidefinite Z: the limit of the
/// ellipsoid averages as the small axes collapse. Used for testing
/// degenerate bodies; the solver requires the strict version.
pub fn pushforward_rule(z: &SymMat, eps: f64, density: usize) -> Result<EllipsoidRule> {
    let spec = symmat::eigh(z)?;
    if spec.eigenvalues()[0] < -tol::ELLIPTIC_EIG {
        return Err(Error::Validation(
            "ellipsoid matrix must be positive semidefinite".into(),
        ));
    }
    map_rule(z, eps, density)
}

/// Rotation discretization of an orbit-hull body: Z = R diag(a) R^T over
/// seeds a and angles k pi / m.
#[derive(Debug, Clone)]
pub struct ZFamily {
    members: Vec<SymMat>,
    strict: bool,
}

fn rotated(a0: f64, a1: f64, theta: f64) -> SymMat {
    let (s, c) = theta.sin_cos();
    let z11 = a0 * c * c + a1 * s * s;
    let z22 = a0 * s * s + a1 * c * c;
    let z12 = (a0 - a1) * s * c;
    SymMat::new(2, vec![z11, z12, z12, z22]).expect("2x2 entries are finite")
}

impl ZFamily {
    fn build(body: &RotInvBody, m: usize, strict: bool) -> Result<ZFamily> {
        if body.n() != 2 {
            return Err(Error::Validation(format!(
                "the grid scheme is 2D only, got dimension {}",
                body.n()
            )));
        }
        if m == 0 {
            return Err(Error::Validation("rotation count must be positive".into()));
        }
        let seeds = match body.shape() {
            RotInvShape::OrbitHull { orbit_generators } => orbit_generators,
            RotInvShape::Ball { .. } => {
                return Err(Error::Validation(
                    "the grid scheme needs an orbit-hull body".into(),
                ))
            }
        };
        let mut members = Vec::new();
        for a in seeds {
            let (a0, a1) = (a[0], a[1]);
            if strict {
                if a0 <= tol::ELLIPTIC_EIG {
                    return Err(Error::Validation(
                        "solving requires a uniformly elliptic body (all seed components positive)"
                            .into(),
                    ));
                }
            } else if a0 < -tol::ELLIPTIC_EIG {
                return Err(Error::Validation(
                    "averaging requires an elliptic body (no negative seed components)".into(),
                ));
            }
            let a0 = a0.max(0.0);
            let a1 = a1.max(0.0);
            if (a1 - a0).abs() <= 1e-14 * (1.0 + a1.abs()) {
                // Isotropic seed: all rotations coincide.
                members.push(rotated(a0, a1, 0.0));
            } else {
                for k in 0..m {
                    members.push(rotated(a0, a1, k as f64 * std::f64::consts::PI / m as f64));
                }
            }
        }
        Ok(ZFamily { members, strict })
    }

    /// Strictly positive definite family; rejects degenerate bodies.
    pub fn for_solver(body: &RotInvBody, m: usize) -> Result<ZFamily> {
        Self::build(body, m, true)
    }

    /// Positive semidefinite family for supersolution testing.
    pub fn for_testing(body: &RotInvBody, m: usize) -> Result<ZFamily> {
        Self::build(body, m, false)
    }

    pub fn members(&self) -> &[SymMat] {
        &self.members
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }
}

/// Bilinear interpolation taps of one ellipsoid rule on a lattice of
/// spacing h: cell offsets from the stencil center with merged weights.
/// The tap cloud is contracted so its second moment matches the rule.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub(crate) taps: Vec<(i32, i32, f64)>,
}

impl Stencil {
    pub fn taps(&self) -> &[(i32, i32, f64)] {
        &self.taps
    }
}

/// Stencils for every family member plus their common reach in cells.
#[derive(Debug, Clone)]
pub struct StencilSet {
    pub(crate) stencils: Vec<Stencil>,
    pub(crate) reach: i32,
    pub(crate) eps: f64,
}

impl StencilSet {
    pub fn stencils(&self) -> &[Stencil] {
        &self.stencils
    }

    pub fn reach(&self) -> i32 {
        self.reach
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

fn spread_raw(nodes: &[[f64; 2]], l: &[f64; 4], weight: f64, h: f64) -> Vec<(i32, i32, f64)> {
    let mut raw: Vec<(i32, i32, f64)> = Vec::with_capacity(nodes.len() * 4);
    for d in nodes {
        let x = l[0] * d[0] + l[1] * d[1];
        let y = l[2] * d[0] + l[3] * d[1];
        let fx = x / h;
        let fy = y / h;
        let bx = fx.floor();
        let by = fy.floor();
        let tx = fx - bx;
        let ty = fy - by;
        let (bx, by) = (bx as i32, by as i32);
        let corners = [
            (bx, by, weight * (1.0 - tx) * (1.0 - ty)),
            (bx + 1, by, weight * tx * (1.0 - ty)),
            (bx, by + 1, weight * (1.0 - tx) * ty),
            (bx + 1, by + 1, weight * tx * ty),
        ];
        for c in corners {
            if c.2 > 0.0 {
                raw.push(c);
            }
        }
    }
    raw
}

/// Second moment of a raw tap list, physical units, as [xx, xy, yy].
fn tap_moment(raw: &[(i32, i32, f64)], h: f64) -> [f64; 3] {
    let mut m = [0.0f64; 3];
    for &(di, dj, w) in raw {
        let x = di as f64 * h;
        let y = dj as f64 * h;
        m[0] += w * x * x;
        m[1] += w * x * y;
        m[2] += w * y * y;
    }
    m
}

/// Cholesky factor [l11, l21, l22] of [a b; b c], None if not PD.
fn chol2(m: &[f64; 3]) -> Option<[f64; 3]> {
    if !(m[0] > 0.0) {
        return None;
    }
    let l11 = m[0].sqrt();
    let l21 = m[1] / l11;
    let d = m[2] - l21 * l21;
    if !(d > 0.0) {
        return None;
    }
    Some([l11, l21, d.sqrt()])
}

fn eigmin2(m: &[f64; 3]) -> f64 {
    let half = 0.5 * (m[0] + m[2]);
    half - (0.25 * (m[0] - m[2]).powi(2) + m[1] * m[1]).sqrt()
}

fn tap_reach(raw: &[(i32, i32, f64)]) -> i32 {
    raw.iter()
        .map(|&(di, dj, _)| di.abs().max(dj.abs()))
        .max()
        .unwrap_or(0)
}

fn moment_err(m: &[f64; 3], t: &[f64; 3]) -> f64 {
    (m[0] - t[0])
        .abs()
        .max((m[1] - t[1]).abs())
        .max((m[2] - t[2]).abs())
}

fn stencil_for(rule: &EllipsoidRule, h: f64) -> Stencil {
    // Target: the moment the exact nodes carry. Bilinear spreading adds
    // sum w t(1-t) h^2 to each diagonal entry (first and cross moments
    // stay exact), which at coarse eps/h ratios dominates the scheme
    // error. Contract the node cloud with a lower-triangular map until
    // the taps reproduce the target; weights stay nonnegative, so
    // comparison arguments are unaffected.
    let mut t = [0.0f64; 3];
    for d in &rule.nodes {
        t[0] += d[0] * d[0];
        t[1] += d[0] * d[1];
        t[2] += d[1] * d[1];
    }
    for v in t.iter_mut() {
        *v *= rule.weight;
    }
    let mut l = [1.0f64, 0.0, 0.0, 1.0];
    let mut raw = spread_raw(&rule.nodes, &l, rule.weight, h);
    // A target axis thinner than the spreading noise cannot be matched;
    // keep the plain taps there (degenerate members only arise in tests).
    if eigmin2(&t) > 0.5 * h * h {
        let reach0 = tap_reach(&raw);
        let ct = chol2(&t).expect("eigmin check implies PD");
        let mut best_err = moment_err(&tap_moment(&raw, h), &t);
        let mut best = raw.clone();
        for _ in 0..12 {
            let m = tap_moment(&raw, h);
            let err = moment_err(&m, &t);
            if err < best_err && tap_reach(&raw) <= reach0 {
                best_err = err;
                best = raw.clone();
            }
            if err <= 1e-3 * h * h {
                break;
            }
            let Some(cm) = chol2(&m) else { break };
            // g = chol(T) chol(M)^{-1} maps the tap moment onto the target.
            let g11 = ct[0] / cm[0];
            let g21 = (ct[1] - g11 * cm[1]) / cm[2];
            let g22 = ct[2] / cm[2];
            l = [
                g11 * l[0],
                g11 * l[1],
                g21 * l[0] + g22 * l[2],
                g21 * l[1] + g22 * l[3],
            ];
            raw = spread_raw(&rule.nodes, &l, rule.weight, h);
        }
        raw = best;
    }
    raw.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    let mut taps: Vec<(i32, i32, f64)> = Vec::new();
    for (di, dj, w) in raw {
        match taps.last_mut() {
            Some(last) if last.0 == di && last.1 == dj => last.2 += w,
            _ => taps.push((di, dj, w)),
        }
    }
    Stencil { taps }
}

/// Builds the interpolation stencils of a family at spacing h.
pub fn build_stencils(family: &ZFamily, eps: f64, h: f64, density: usize) -> Result<StencilSet> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Validation(format!("spacing must be positive, got {h}")));
    }
    let mut stencils = Vec::with_capacity(family.members.len());
    let mut reach = 0i32;
    for z in &family.members {
        let rule = pushforward_rule(z, eps, density)?;
        let st = stencil_for(&rule, h);
        for &(di, dj, _) in &st.taps {
            reach = reach.max(di.abs()).max(dj.abs());
        }
        stencils.push(st);
    }
    Ok(StencilSet {
        stencils,
        reach,
        eps,
    })
}
