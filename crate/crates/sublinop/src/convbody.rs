//! Convex bodies in S(n) as finite generator hulls.
//!
//! A `GeneralBody` is the convex hull of an explicit list of symmetric
//! matrices. That V-representation is enough for everything the crate
//! needs: support-function evaluation is a finite maximum, Minkowski sums
//! are pairwise generator sums, ellipticity is read off generator spectra,
//! and body-cone membership reduces to nonnegative least squares.
//!
//! Redundant generators are kept; support functions of a hull ignore
//! redundancy, and pruning in dimension up to 36 buys nothing.

use crate::error::{Error, Result};
use crate::symmat::{self, SymMat};
use crate::tol;

/// Convex hull of a nonempty list of generators in S(n).
#[derive(Debug, Clone)]
pub struct GeneralBody {
    n: usize,
    generators: Vec<SymMat>,
}

/// Ellipticity classification of a body.
///
/// The hull of the generators consists of positive semidefinite (definite)
/// matrices iff every generator is positive semidefinite (definite), since
/// both properties cut out convex sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllipticityTag {
    NotElliptic,
    DegenerateElliptic,
    UniformlyElliptic,
}

/// Classification report with the ellipticity constants.
///
/// `lambda` / `capital_lambda` are the smallest and largest eigenvalue found
/// among the generators, clamped at 0; they are meaningful when the tag is
/// elliptic.
#[derive(Debug, Clone, Copy)]
pub struct EllipticityClass {
    pub tag: EllipticityTag,
    pub lambda: f64,
    pub capital_lambda: f64,
}

/// Outcome of a body-cone membership test.
#[derive(Debug, Clone)]
pub struct ConeMembershipReport {
    /// true iff residual <= tol::CONE_TOL * (1 + ||X||)
    pub inside: bool,
    /// Frobenius distance from X to the best conic combination found.
    pub residual: f64,
    /// Nonnegative witness coefficients, aligned with the generator list.
    pub weights: Vec<f64>,
}

impl GeneralBody {
    pub fn new(n: usize, generators: Vec<SymMat>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Validation("body needs at least one generator".into()));
        }
        for g in &generators {
            if g.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator dimension {} does not match body dimension {n}",
                    g.n()
                )));
            }
        }
        Ok(Self { n, generators })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[SymMat] {
        &self.generators
    }

    /// Support function F(X) = max over generators of <G, X>; equals the
    /// support function of the hull.
    pub fn support(&self, x: &SymMat) -> Result<f64> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "argument dimension {} does not match body dimension {}",
                x.n(),
                self.n
            )));
        }
        let mut best = f64::NEG_INFINITY;
        for g in &self.generators {
            best = best.max(symmat::inner(g, x)?);
        }
        Ok(best)
    }

    /// Generators negated; support(negate(A), X) == support(A, -X).
    pub fn negate(&self) -> GeneralBody {
        GeneralBody {
            n: self.n,
            generators: self.generators.iter().map(SymMat::neg).collect(),
        }
    }

    /// Classifies the hull by the extreme generator eigenvalues.
    pub fn classify_ellipticity(&self) -> EllipticityClass {
        let mut min_eig = f64::INFINITY;
        let mut max_eig = f64::NEG_INFINITY;
        for g in &self.generators {
            let s = symmat::eigh(g).expect("cyclic Jacobi converges for n <= 8");
            let ev = s.eigenvalues();
            min_eig = min_eig.min(ev[0]);
            max_eig = max_eig.max(ev[ev.len() - 1]);
        }
        let tag = if min_eig > tol::ELLIPTIC_EIG {
            EllipticityTag::UniformlyElliptic
        } else if min_eig >= -tol::ELLIPTIC_EIG {
            EllipticityTag::DegenerateElliptic
        } else {
            EllipticityTag::NotElliptic
        };
        EllipticityClass {
            tag,
            lambda: min_eig.max(0.0),
            capital_lambda: max_eig.max(0.0),
        }
    }

    /// Comparison-principle condition: F(-I) < 0, equivalently 0 not in K.
    ///
    /// F(-I) = -min over the hull of tr Y, and a linear function attains its
    /// minimum over a hull at a generator, so checking generator traces
    /// suffices.
    pub fn nondegenerate(&self) -> bool {
        let min_trace = self
            .generators
            .iter()
            .map(SymMat::trace)
            .fold(f64::INFINITY, f64::min);
        min_trace > tol::ELLIPTIC_EIG
    }

    /// Membership of X in the body cone {tZ | Z in K, t >= 0} via
    /// nonnegative least squares over the generators.
    pub fn cone_contains(&self, x: &SymMat) -> Result<ConeMembershipReport> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "argument dimension {} does not match body dimension {}",
                x.n(),
                self.n
            )));
        }
        let m = self.n * (self.n + 1) / 2;
        let k = self.generators.len();
        let mut columns = Vec::with_capacity(k);
        for g in &self.generators {
            columns.push(pack(g));
        }
        let b = pack(x);
        let weights = nnls(m, &columns, &b);
        let mut combo = vec![0.0; m];
        for (col, w) in columns.iter().zip(&weights) {
            for i in 0..m {
                combo[i] += w * col[i];
            }
        }
        let residual = b
            .iter()
            .zip(&combo)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt();
        let inside = residual <= tol::CONE_TOL * (1.0 + symmat::frobenius_norm(x));
        Ok(ConeMembershipReport {
            inside,
            residual,
            weights,
        })
    }

    /// Body-cone nesting C_{K_F} subset of C_{K_G}: a cone generated by a
    /// set lies in a convex cone iff every generator does.
    pub fn nested_cones(f: &GeneralBody, g: &GeneralBody) -> Result<bool> {
        Ok(Self::nesting_witness(f, g)?.is_none())
    }

    /// Like `nested_cones` but on failure returns the first offending
    /// generator index of F together with its conic residual in G.
    pub fn nesting_witness(f: &GeneralBody, g: &GeneralBody) -> Result<Option<(usize, f64)>> {
        if f.n != g.n {
            return Err(Error::DimensionMismatch(format!(
                "bodies have dimensions {} and {}",
                f.n, g.n
            )));
        }
        for (i, gen) in f.generators.iter().enumerate() {
            let report = g.cone_contains(gen)?;
            if !report.inside {
                return Ok(Some((i, report.residual)));
            }
        }
        Ok(None)
    }
}

/// Minkowski combination a*A + b*B for a, b >= 0: all pairwise generator
/// sums a*G_i + b*H_j. The support function of the result is the matching
/// combination of the support functions.
pub fn minkowski(a: f64, body_a: &GeneralBody, b: f64, body_b: &GeneralBody) -> Result<GeneralBody> {
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
    let mut generators = Vec::with_capacity(body_a.generators.len() * body_b.generators.len());
    for gi in &body_a.generators {
        for hj in &body_b.generators {
            generators.push(gi.scale(a).add(&hj.scale(b))?);
        }
    }
    GeneralBody::new(body_a.n, generators)
}

/// Packs a symmetric matrix into R^{n(n+1)/2} preserving the Frobenius
/// norm: diagonal entries as-is, off-diagonal entries scaled by sqrt(2).
fn pack(x: &SymMat) -> Vec<f64> {
    let n = x.n();
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    let root2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        v.push(x.get(i, i));
        for j in (i + 1)..n {
            v.push(root2 * x.get(i, j));
        }
    }
    v
}

/// Lawson-Hanson active-set nonnegative least squares:
/// minimize ||sum_i t_i col_i - b|| over t >= 0.
///
/// Terminates when the projected gradient norm falls below
/// tol::NNLS_PG * (1 + ||b||) or at the iteration cap; always returns the
/// best coefficients found (membership is judged by the residual).
fn nnls(m: usize, columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = columns.len();
    let mut t = vec![0.0f64; k];
    let mut passive = vec![false; k];
    let b_norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol_pg = tol::NNLS_PG * (1.0 + b_norm);
    let cap = 10 * (k + m) + 100;

    for _ in 0..cap {
        // Residual r = b - A t and dual w = A^T r.
        let mut r = b.to_vec();
        for (col, &ti) in columns.iter().zip(&t) {
            if ti != 0.0 {
                for i in 0..m {
                    r[i] -= ti * col[i];
                }
            }
        }
        let w: Vec<f64> = columns
            .iter()
            .map(|col| col.iter().zip(&r).map(|(c, ri)| c * ri).sum())
            .collect();

        let mut pg_sq = 0.0;
        for i in 0..k {
            let g = if passive[i] { w[i] } else { w[i].max(0.0) };
            pg_sq += g * g;
        }
        if pg_sq.sqrt() <= tol_pg {
            break;
        }

        // Most violating active coordinate enters the passive set.
        let mut j = usize::MAX;
        let mut wj = tol_pg;
        for i in 0..k {
            if !passive[i] && w[i] > wj {
                wj = w[i];
                j = i;
            }
        }
        if j == usize::MAX {
            break;
        }
        if passive.iter().filter(|&&p| p).count() >= m {
            // The passive span is already full-dimensional; the remaining
            // dual positivity is round-off.
            break;
        }
        passive[j] = true;

        // Inner loop: restore feasibility of the passive least-squares
        // solution.
        loop {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let sub: Vec<&[f64]> = idx.iter().map(|&i| columns[i].as_slice()).collect();
            let z = least_squares(m, &sub, b);
            if z.iter().all(|&zi| zi > 0.0) {
                for ti in t.iter_mut() {
                    *ti = 0.0;
                }
                for (pos, &i) in idx.iter().enumerate() {
                    t[i] = z[pos];
                }
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            let mut alpha = 1.0f64;
            for (pos, &i) in idx.iter().enumerate() {
                if z[pos] <= 0.0 {
                    let denom = t[i] - z[pos];
                    if denom > 0.0 {
                        alpha = alpha.min(t[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for (pos, &i) in idx.iter().enumerate() {
                t[i] += alpha * (z[pos] - t[i]);
            }
            let scale = t.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
            let mut removed = false;
            for (pos, &i) in idx.iter().enumerate() {
                if z[pos] <= 0.0 && t[i] <= 1e-14 * (1.0 + scale) {
                    t[i] = 0.0;
                    passive[i] = false;
                    removed = true;
                }
            }
            if !removed {
                // Guard against a stalled step.
                break;
            }
        }
    }
    t
}

/// Dense least squares min ||A z - b|| via Householder QR; tiny diagonal
/// pivots get a zero coefficient (near-dependent passive columns).
fn least_squares(m: usize, cols: &[&[f64]], b: &[f64]) -> Vec<f64> {
    let p = cols.len();
    // Column-major working copy.
    let mut a: Vec<f64> = Vec::with_capacity(m * p);
    for col in cols {
        a.extend_from_slice(col);
    }
    let mut rhs = b.to_vec();
    let max_col_norm = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);

    let steps = p.min(m);
    for col in 0..steps {
        // Householder vector for a[col.., col].
        let norm_x: f64 = (col..m).map(|i| a[col * m + i] * a[col * m + i]).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = a[col * m + col];
        let alpha = if x0 >= 0.0 { -norm_x } else { norm_x };
        let mut v: Vec<f64> = (col..m).map(|i| a[col * m + i]).collect();
        v[0] -= alpha;
        let v_norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if v_norm_sq == 0.0 {
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to the remaining columns and rhs.
        for c in col..p {
            let dot: f64 = (col..m).map(|i| v[i - col] * a[c * m + i]).sum();
            let f = 2.0 * dot / v_norm_sq;
            for i in col..m {
                a[c * m + i] -= f * v[i - col];
            }
        }
        let dot: f64 = (col..m).map(|i| v[i - col] * rhs[i]).sum();
        let f = 2.0 * dot / v_norm_sq;
        for i in col..m {
            rhs[i] -= f * v[i - col];
        }
    }

    // Back-substitution on the p x p upper triangle.
    let mut z = vec![0.0f64; p];
    let diag_floor = 1e-13 * (1.0 + max_col_norm);
    for col in (0..steps).rev() {
        let mut s = rhs[col];
        for c in (col + 1)..p {
            s -= a[c * m + col] * z[c];
        }
        let d = a[col * m + col];
        z[col] = if d.abs() <= diag_floor { 0.0 } else { s / d };
    }
    z
}
