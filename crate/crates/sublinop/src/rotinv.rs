//! Rotationally invariant operators through the eigenvalue reduction.
//!
//! A rotationally invariant body in S(n) is determined by a
//! permutation-symmetric set in R^n: the set of eigenvalue vectors of its
//! members. This module stores that reduction directly. An `OrbitHull`
//! keeps one sorted seed per permutation orbit and never expands the n!
//! orbit; evaluation uses the rearrangement inequality instead. A `Ball`
//! is the full ball around the all-ones vector, covering the extremal
//! operator family.
//!
//! On top of evaluation the module computes the two aperture quantities
//! alpha and p, and the largest constant c with c*F_p <= F, which is the
//! sharpest dominative lower bound the body admits.

use crate::convbody::{EllipticityClass, EllipticityTag, GeneralBody};
use crate::error::{Error, Result};
use crate::symmat::{self, SpecVec, SymMat};
use crate::tol;
use itertools::Itertools;
use rand::Rng;

/// Shape of the reduced body in R^n.
#[derive(Debug, Clone)]
pub enum RotInvShape {
    /// Convex hull of the permutation orbits of the seed vectors.
    /// Seeds are stored sorted ascending, deduplicated, in lexicographic
    /// order.
    OrbitHull { orbit_generators: Vec<SpecVec> },
    /// Closed ball of radius delta around the all-ones vector.
    Ball { delta: f64 },
}

/// Rotationally invariant convex body in S(n).
#[derive(Debug, Clone)]
pub struct RotInvBody {
    n: usize,
    shape: RotInvShape,
}

/// Aperture data of an elliptic body: the solution-cone aperture alpha,
/// the dual exponent p, the dominative-bound constant c, and a vector in
/// the reduced body attaining alpha.
#[derive(Debug, Clone)]
pub struct ApertureReport {
    pub alpha: f64,
    pub p: f64,
    pub c: f64,
    pub argmin: SpecVec,
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=8).contains(&n) {
        return Err(Error::Validation(format!(
            "dimension must lie in [2, 8], got {n}"
        )));
    }
    Ok(())
}

/// Sorts each seed, removes near-duplicates, and orders the list
/// lexicographically so equal bodies get equal representations.
fn canonicalize_seeds(n: usize, seeds: Vec<Vec<f64>>) -> Result<Vec<SpecVec>> {
    if seeds.is_empty() {
        return Err(Error::Validation("orbit hull needs at least one seed".into()));
    }
    let mut sorted: Vec<Vec<f64>> = Vec::with_capacity(seeds.len());
    for s in seeds {
        if s.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "seed length {} does not match dimension {n}",
                s.len()
            )));
        }
        if !s.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("seed entries must be finite".into()));
        }
        sorted.push(symmat::sort_ascending(&s));
    }
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut out: Vec<SpecVec> = Vec::with_capacity(sorted.len());
    for s in sorted {
        let dup = out.last().is_some_and(|prev: &SpecVec| {
            prev.iter().zip(&s).all(|(a, b)| (a - b).abs() <= tol::DEDUP)
        });
        if !dup {
            out.push(SpecVec::new(s)?);
        }
    }
    Ok(out)
}

/// The dominative seed vector: (1,...,1,p-1) for finite p, (0,...,0,1)
/// at p = infinity, both sorted ascending.
fn p_vec(n: usize, p: f64) -> Vec<f64> {
    if p.is_infinite() {
        let mut v = vec![0.0; n];
        v[n - 1] = 1.0;
        v
    } else {
        let mut v = vec![1.0; n];
        v[n - 1] = p - 1.0;
        symmat::sort_ascending(&v)
    }
}

impl RotInvBody {
    pub fn orbit_hull(n: usize, seeds: Vec<Vec<f64>>) -> Result<Self> {
        check_n(n)?;
        Ok(Self {
            n,
            shape: RotInvShape::OrbitHull {
                orbit_generators: canonicalize_seeds(n, seeds)?,
            },
        })
    }

    pub fn ball(n: usize, delta: f64) -> Result<Self> {
        check_n(n)?;
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::Validation(format!(
                "ball radius must lie in [0, 1], got {delta}"
            )));
        }
        Ok(Self {
            n,
            shape: RotInvShape::Ball { delta },
        })
    }

    /// Pucci body with constants 0 <= lambda <= Lambda: the n+1 sorted
    /// step vectors (lambda,...,lambda,Lambda,...,Lambda). These are the
    /// cube vertices up to permutation.
    pub fn pucci(n: usize, lambda: f64, big_lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && big_lambda.is_finite() && 0.0 <= lambda && lambda <= big_lambda)
        {
            return Err(Error::Validation(format!(
                "Pucci constants need 0 <= lambda <= Lambda, got ({lambda}, {big_lambda})"
            )));
        }
        let mut seeds = Vec::with_capacity(n + 1);
        for rank in 0..=n {
            let mut v = vec![lambda; n];
            for item in v.iter_mut().skip(n - rank) {
                *item = big_lambda;
            }
            seeds.push(v);
        }
        Self::orbit_hull(n, seeds)
    }

    /// Dominative p-Laplacian body for p in [1, inf].
    pub fn dominative(n: usize, p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Validation(format!(
                "dominative exponent must lie in [1, inf], got {p}"
            )));
        }
        Self::orbit_hull(n, vec![p_vec(n, p)])
    }

    /// Single-orbit body generated by one eigenvalue vector.
    pub fn singleton(a: Vec<f64>) -> Result<Self> {
        let n = a.len();
        Self::orbit_hull(n, vec![a])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &RotInvShape {
        &self.shape
    }

    pub fn orbit_generators(&self) -> Option<&[SpecVec]> {
        match &self.shape {
            RotInvShape::OrbitHull { orbit_generators } => Some(orbit_generators),
            RotInvShape::Ball { .. } => None,
        }
    }
}

/// F(X) for a rotationally invariant body; only the eigenvalues of X
/// enter.
pub fn eval(body: &RotInvBody, x: &SymMat) -> Result<f64> {
    if x.n() != body.n {
        return Err(Error::DimensionMismatch(format!(
            "argument dimension {} does not match body dimension {}",
            x.n(),
            body.n
        )));
    }
    match &body.shape {
        RotInvShape::OrbitHull { orbit_generators } => {
            let spec = symmat::eigh(x)?;
            let ev = spec.eigenvalues();
            let mut best = f64::NEG_INFINITY;
            for a in orbit_generators {
                best = best.max(symmat::rearrangement_max(a, ev)?);
            }
            Ok(best)
        }
        RotInvShape::Ball { delta } => Ok(x.trace() + delta * symmat::frobenius_norm(x)),
    }
}

/// Pucci maximal value Lambda tr X+ - lambda tr X-.
pub fn pucci_eval(lambda: f64, big_lambda: f64, x: &SymMat) -> Result<f64> {
    if !(lambda.is_finite() && big_lambda.is_finite() && 0.0 <= lambda && lambda <= big_lambda) {
        return Err(Error::Validation(format!(
            "Pucci constants need 0 <= lambda <= Lambda, got ({lambda}, {big_lambda})"
        )));
    }
    let (plus, minus) = symmat::positive_part_trace(x)?;
    Ok(big_lambda * plus - lambda * minus)
}

/// a^T lambda(X) for a sorted ascending.
pub fn singleton_eval(a: &[f64], x: &SymMat) -> Result<f64> {
    if a.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Validation(
            "singleton generator must be sorted ascending".into(),
        ));
    }
    if a.len() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "generator length {} does not match dimension {}",
            a.len(),
            x.n()
        )));
    }
    let spec = symmat::eigh(x)?;
    Ok(a.iter().zip(spec.eigenvalues()).map(|(ai, li)| ai * li).sum())
}

/// Reduces a symmetric matrix body to its eigenvalue orbit hull.
///
/// The reduction is a bijection only on rotationally invariant bodies;
/// the flag is the caller's assertion that the generator list seeds one.
pub fn phi(k: &GeneralBody, assume_symmetric: bool) -> Result<RotInvBody> {
    if !assume_symmetric {
        return Err(Error::Validation(
            "phi requires the caller to assert the body is rotationally symmetric".into(),
        ));
    }
    let mut seeds = Vec::with_capacity(k.generators().len());
    for g in k.generators() {
        let spec = symmat::eigh(g)?;
        seeds.push(spec.eigenvalues().to_vec());
    }
    RotInvBody::orbit_hull(k.n(), seeds)
}

/// The diagonal-frame slice of the inverse reduction: all matrices
/// diag(P a) over permutations P and seeds a. Cone tests between
/// rotationally invariant bodies only see eigenvalue vectors, so the
/// slice is a faithful stand-in for the full orbit body there.
pub fn phi_inv_representative(body: &RotInvBody) -> Result<GeneralBody> {
    let gens = body.orbit_generators().ok_or_else(|| {
        Error::Validation("inverse reduction needs an orbit hull body".into())
    })?;
    let n = body.n;
    if n > 5 {
        return Err(Error::Validation(format!(
            "permutation expansion is limited to n <= 5, got {n}"
        )));
    }
    let mut seen: Vec<Vec<f64>> = Vec::new();
    for a in gens {
        for perm in (0..n).permutations(n) {
            let v: Vec<f64> = perm.iter().map(|&i| a[i]).collect();
            if !seen.iter().any(|w| w == &v) {
                seen.push(v);
            }
        }
    }
    let mats = seen
        .into_iter()
        .map(|v| SymMat::diag(&v))
        .collect::<Result<Vec<_>>>()?;
    GeneralBody::new(n, mats)
}

/// Minkowski combination of two orbit hulls with nonnegative
/// coefficients: pairwise sums of seeds. Sorted seeds sum to sorted
/// seeds, and the rearrangement pairing shows the support functions add.
pub fn minkowski(a: f64, body_a: &RotInvBody, b: f64, body_b: &RotInvBody) -> Result<RotInvBody> {
    if body_a.n != body_b.n {
        return Err(Error::DimensionMismatch(format!(
            "bodies have dimensions {} and {}",
            body_a.n, body_b.n
        )));
    }
    if !(a >= 0.0 && a.is_finite() && b >= 0.0 && b.is_finite()) {
        return Err(Error::Validation(
            "Minkowski coefficients must be finite and nonnegative".into(),
        ));
    }
    let (ga, gb) = match (body_a.orbit_generators(), body_b.orbit_generators()) {
        (Some(ga), Some(gb)) => (ga, gb),
        _ => {
            return Err(Error::Validation(
                "Minkowski combination is only defined for orbit hulls".into(),
            ))
        }
    };
    let mut seeds = Vec::with_capacity(ga.len() * gb.len());
    for sa in ga {
        for sb in gb {
            seeds.push(
                sa.iter()
                    .zip(sb.iter())
                    .map(|(x, y)| a * x + b * y)
                    .collect(),
            );
        }
    }
    RotInvBody::orbit_hull(body_a.n, seeds)
}

/// Ellipticity classification through the reduced body: the eigenvalues
/// occurring in the matrix body are exactly the seed components (orbit
/// hull) or the interval [1-delta, 1+delta] (ball).
pub fn classify_ellipticity(body: &RotInvBody) -> EllipticityClass {
    let (min_c, max_c) = match &body.shape {
        RotInvShape::OrbitHull { orbit_generators } => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for a in orbit_generators {
                lo = lo.min(a[0]);
                hi = hi.max(a[a.len() - 1]);
            }
            (lo, hi)
        }
        RotInvShape::Ball { delta } => (1.0 - delta, 1.0 + delta),
    };
    let tag = if min_c > tol::ELLIPTIC_EIG {
        EllipticityTag::UniformlyElliptic
    } else if min_c >= -tol::ELLIPTIC_EIG {
        EllipticityTag::DegenerateElliptic
    } else {
        EllipticityTag::NotElliptic
    };
    EllipticityClass {
        tag,
        lambda: min_c.max(0.0),
        capital_lambda: max_c.max(0.0),
    }
}

/// F(-I) < 0: the reduced body stays away from the origin. Minimum trace
/// over the body is the minimum seed sum (orbit hull) or n - delta*sqrt(n)
/// (ball).
pub fn nondegenerate(body: &RotInvBody) -> bool {
    let min_trace = match &body.shape {
        RotInvShape::OrbitHull { orbit_generators } => orbit_generators
            .iter()
            .map(|a| a.iter().sum::<f64>())
            .fold(f64::INFINITY, f64::min),
        RotInvShape::Ball { delta } => {
            let nf = body.n as f64;
            nf - delta * nf.sqrt()
        }
    };
    min_trace > tol::ELLIPTIC_EIG
}

/// Solution-cone aperture alpha, dual exponent p, bound constant c, and
/// an attaining vector.
///
/// For orbit hulls the ratio (sum y)/(max y) is quasi-concave on the
/// nonnegative orthant, so its minimum over the polytope sits at a vertex
/// and scanning seeds suffices. All-zero seeds carry no aperture
/// information and are skipped.
pub fn aperture(body: &RotInvBody) -> Result<ApertureReport> {
    let n = body.n;
    let (alpha, z) = match &body.shape {
        RotInvShape::OrbitHull { orbit_generators } => {
            let mut best = f64::INFINITY;
            let mut arg: Option<Vec<f64>> = None;
            for a in orbit_generators {
                if a[0] < -tol::ELLIPTIC_EIG {
                    return Err(Error::Validation(
                        "aperture requires an elliptic body".into(),
                    ));
                }
                let max = a[a.len() - 1];
                if max <= tol::ELLIPTIC_EIG {
                    continue;
                }
                let ratio = a.iter().sum::<f64>() / max;
                if ratio < best {
                    best = ratio;
                    arg = Some(a.to_vec());
                }
            }
            let arg = arg.ok_or_else(|| {
                Error::Validation("aperture of the zero body is undefined".into())
            })?;
            (best, arg)
        }
        RotInvShape::Ball { delta } => ball_aperture(n, *delta),
    };
    let (p, c) = if alpha <= 1.0 + tol::P_INFINITE_ALPHA {
        (f64::INFINITY, z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)))
    } else {
        let p = (n as f64 + alpha - 2.0) / (alpha - 1.0);
        let c = z.iter().sum::<f64>() / (n as f64 + p - 2.0);
        (p, c)
    };
    Ok(ApertureReport {
        alpha,
        p,
        c,
        argmin: SpecVec::new(symmat::sort_ascending(&z))?,
    })
}

/// Minimizes (sum y)/(max y) over the sphere of radius delta around the
/// all-ones vector: multi-start projected gradient descent with step
/// halving. Ties in the max component go to the lowest index.
fn ball_aperture(n: usize, delta: f64) -> (f64, Vec<f64>) {
    let nf = n as f64;
    if delta <= 0.0 {
        return (nf, vec![1.0; n]);
    }
    let objective = |u: &[f64]| -> (f64, Vec<f64>, usize) {
        let y: Vec<f64> = u.iter().map(|ui| 1.0 + delta * ui).collect();
        let mut mi = 0;
        for i in 1..n {
            if y[i] > y[mi] {
                mi = i;
            }
        }
        let f = y.iter().sum::<f64>() / y[mi];
        (f, y, mi)
    };

    let normalize = |v: &mut [f64]| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    };

    // Deterministic starts: one spike per coordinate plus seeded random
    // directions up to 32 total.
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(32);
    for i in 0..n {
        let mut u = vec![-1.0; n];
        u[i] = nf - 1.0;
        normalize(&mut u);
        starts.push(u);
    }
    let mut rng = crate::sample::rng(0xba11_a93a);
    while starts.len() < 32 {
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if u.iter().map(|x| x * x).sum::<f64>() < 1e-6 {
            continue;
        }
        normalize(&mut u);
        starts.push(u);
    }

    let mut best_f = f64::INFINITY;
    let mut best_y = vec![1.0; n];
    for mut u in starts {
        let (mut f, mut y, mut mi) = objective(&u);
        let mut step = 0.25;
        for _ in 0..20_000 {
            let s: f64 = y.iter().sum();
            let ym = y[mi];
            // Gradient of (sum y)/(max y) in u-coordinates on the smooth
            // stratum where the max index is fixed.
            let mut g: Vec<f64> = vec![delta / ym; n];
            g[mi] = delta * (ym - s) / (ym * ym);
            let gu: f64 = g.iter().zip(&u).map(|(a, b)| a * b).sum();
            for (gi, ui) in g.iter_mut().zip(&u) {
                *gi -= gu * ui;
            }
            if g.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-15 {
                break;
            }
            let mut trial: Vec<f64> = u
                .iter()
                .zip(&g)
                .map(|(ui, gi)| ui - step * gi)
                .collect();
            normalize(&mut trial);
            let (ft, yt, mit) = objective(&trial);
            if ft < f {
                u = trial;
                f = ft;
                y = yt;
                mi = mit;
                step = (step * 1.5).min(0.5);
            } else {
                step *= 0.5;
                if step < tol::BALL_STEP_MIN {
                    break;
                }
            }
        }
        if f < best_f {
            best_f = f;
            best_y = y;
        }
    }
    (best_f, best_y)
}

/// The sharpest dominative lower bound c F_p <= F the body admits.
///
/// Returns aperture's (c, p) after verifying the majorization c p-vec
/// against the attaining vector and spot-checking the operator
/// inequality on 100 sampled arguments; a failure of either check is an
/// internal inconsistency, not a property of the input.
pub fn minimal_dominative_bound(body: &RotInvBody) -> Result<(f64, f64)> {
    let report = aperture(body)?;
    let n = body.n;
    let cp: Vec<f64> = p_vec(n, report.p).iter().map(|v| report.c * v).collect();
    if !symmat::majorizes(&cp, &report.argmin)? {
        return Err(Error::Inconsistency(
            "scaled dominative seed fails majorization against the aperture argmin".into(),
        ));
    }
    let dom = RotInvBody::dominative(n, report.p)?;
    let mut rng = crate::sample::rng(0xd0b0_c0de);
    for _ in 0..100 {
        let x = crate::sample::sym_mat(&mut rng, n, 2.0);
        let lhs = report.c * eval(&dom, &x)?;
        let rhs = eval(body, &x)?;
        if lhs > rhs + 1e-9 {
            return Err(Error::Inconsistency(format!(
                "dominative bound violated: {lhs} > {rhs}"
            )));
        }
    }
    Ok((report.c, report.p))
}
