//! Dense symmetric matrix/vector kernel.
//!
//! Provides the space S(n) for 2 <= n <= 8 and the spectral toolbox the rest
//! of the crate is built on:
//!
//! - `SymMat`: exactly symmetrized dense matrices, row-major
//! - `eigh`: cyclic Jacobi eigendecomposition with ascending eigenvalues
//! - the trace inner product and the Frobenius/operator norms
//! - majorization, the rearrangement maximum, and positive-part traces
//!
//! Everything is immutable after construction and all functions are pure.

use crate::error::{Error, Result};
use crate::tol;

/// Dense real symmetric n x n matrix, 2 <= n <= 8, row-major storage.
///
/// Construction symmetrizes the entries exactly (both mirror slots receive
/// the same averaged value) and rejects non-finite input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    n: usize,
    entries: Vec<f64>,
}

impl SymMat {
    /// Builds a matrix from row-major entries, symmetrizing exactly.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        let (m, _) = Self::symmetrize(n, entries)?;
        Ok(m)
    }

    /// Like `new`, but also reports the largest absolute asymmetry
    /// |a_ij - a_ji| found in the raw input.
    pub fn new_reporting_asymmetry(n: usize, entries: Vec<f64>) -> Result<(Self, f64)> {
        Self::symmetrize(n, entries)
    }

    fn symmetrize(n: usize, mut entries: Vec<f64>) -> Result<(Self, f64)> {
        if !(2..=8).contains(&n) {
            return Err(Error::Validation(format!(
                "matrix dimension must be in [2, 8], got {n}"
            )));
        }
        if entries.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::Validation("matrix entries must be finite".into()));
        }
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let a = entries[i * n + j];
                let b = entries[j * n + i];
                max_asym = max_asym.max((a - b).abs());
                let avg = 0.5 * (a + b);
                entries[i * n + j] = avg;
                entries[j * n + i] = avg;
            }
        }
        Ok((Self { n, entries }, max_asym))
    }

    /// The zero matrix.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n * n])
    }

    /// The identity matrix.
    pub fn identity(n: usize) -> Result<Self> {
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            e[i * n + i] = 1.0;
        }
        Self::new(n, e)
    }

    /// diag(d).
    pub fn diag(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            e[i * n + i] = d[i];
        }
        Self::new(n, e)
    }

    /// The rank-one matrix v v^T.
    pub fn outer(v: &[f64]) -> Result<Self> {
        let n = v.len();
        let mut e = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                e[i * n + j] = v[i] * v[j];
            }
        }
        Self::new(n, e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major entry access.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// The diagonal as a vector (diag X in the Schur majorization).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn add(&self, other: &SymMat) -> Result<SymMat> {
        check_same_n(self.n, other.n)?;
        let e = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        SymMat::new(self.n, e)
    }

    pub fn sub(&self, other: &SymMat) -> Result<SymMat> {
        check_same_n(self.n, other.n)?;
        let e = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        SymMat::new(self.n, e)
    }

    pub fn scale(&self, t: f64) -> SymMat {
        let e = self.entries.iter().map(|a| t * a).collect();
        // Scaling preserves symmetry and finiteness for finite t.
        SymMat::new(self.n, e).expect("scaling a valid matrix by a finite factor stays valid")
    }

    pub fn neg(&self) -> SymMat {
        self.scale(-1.0)
    }

    /// Q X Q^T for a square matrix Q given row-major (Q need not be
    /// orthogonal; the result is symmetrized exactly).
    pub fn conjugate(&self, q: &[f64]) -> Result<SymMat> {
        let n = self.n;
        if q.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "conjugating frame must be {n}x{n}"
            )));
        }
        let qx = mat_mul(n, q, &self.entries);
        let qt = transpose(n, q);
        let qxqt = mat_mul(n, &qx, &qt);
        SymMat::new(n, qxqt)
    }
}

/// Real vector of finite components (eigenvalue vectors, points of bodies
/// reduced to R^n).
#[derive(Debug, Clone, PartialEq)]
pub struct SpecVec {
    v: Vec<f64>,
}

impl SpecVec {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::Validation("vector must be nonempty".into()));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("vector components must be finite".into()));
        }
        Ok(Self { v })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }
}

impl std::ops::Deref for SpecVec {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.v
    }
}

/// Eigendecomposition X = frame * diag(eigenvalues) * frame^T with
/// eigenvalues ascending and the frame's columns the matching unit
/// eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: SpecVec,
    frame: Vec<f64>,
    n: usize,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    /// Row-major orthogonal matrix; column k is the eigenvector of
    /// eigenvalue k.
    pub fn frame(&self) -> &[f64] {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Reassembles frame * diag(eigenvalues) * frame^T.
    pub fn reconstruct(&self) -> SymMat {
        let n = self.n;
        let mut fd = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                fd[i * n + j] = self.frame[i * n + j] * self.eigenvalues[j];
            }
        }
        let ft = transpose(n, &self.frame);
        let m = mat_mul(n, &fd, &ft);
        SymMat::new(n, m).expect("reconstruction of a finite spectrum is finite")
    }
}

fn check_same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "operands have dimensions {a} and {b}"
        )));
    }
    Ok(())
}

pub(crate) fn mat_mul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub(crate) fn transpose(n: usize, a: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

/// Frobenius norm of the off-diagonal part.
fn off_diag_norm(n: usize, a: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps annihilate every off-diagonal pair (p, q) in a fixed order using
/// the numerically stable rotation
///
/// ```text
/// tau = (a_qq - a_pp) / (2 a_pq),  t = sign(tau) / (|tau| + sqrt(1 + tau^2)),
/// c = 1 / sqrt(1 + t^2),           s = t c,
/// ```
///
/// until the off-diagonal Frobenius norm falls below
/// `tol::EIGH_OFFDIAG_REL * ||X||_F`. Deterministic for identical input bits.
pub fn eigh(x: &SymMat) -> Result<Spectrum> {
    let n = x.n;
    let mut a = x.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = tol::EIGH_OFFDIAG_REL * frobenius_norm(x);

    let mut converged = off_diag_norm(n, &a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < tol::EIGH_MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[p * n + k] = a[k * n + p];
                        a[k * n + q] = s * akp + c * akq;
                        a[q * n + k] = a[k * n + q];
                    }
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off_diag_norm(n, &a) <= threshold;
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "Jacobi did not reach the off-diagonal threshold in {} sweeps",
            tol::EIGH_MAX_SWEEPS
        )));
    }

    // Sort ascending, carrying the eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut frame = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            frame[r * n + new_col] = v[r * n + old_col];
        }
    }
    Ok(Spectrum {
        eigenvalues: SpecVec::new(eigenvalues)?,
        frame,
        n,
    })
}

/// Trace inner product <X, Y> = tr(XY).
pub fn inner(x: &SymMat, y: &SymMat) -> Result<f64> {
    check_same_n(x.n, y.n)?;
    let n = x.n;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += x.entries[i * n + j] * y.entries[j * n + i];
        }
    }
    Ok(s)
}

/// sqrt(<X, X>), equal to sqrt(sum of squared eigenvalues).
pub fn frobenius_norm(x: &SymMat) -> f64 {
    x.entries.iter().map(|e| e * e).sum::<f64>().sqrt()
}

/// max(|lambda_1|, |lambda_n|).
pub fn operator_norm(x: &SymMat) -> f64 {
    let s = eigh(x).expect("cyclic Jacobi converges for n <= 8");
    let ev = s.eigenvalues();
    ev[0].abs().max(ev[ev.len() - 1].abs())
}

/// Ascending copy of x.
pub fn sort_ascending(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Majorization test: true iff x is majorized by y (x lies below y in the
/// partial-sum order with equal totals).
///
/// Tail sums of the ascending rearrangements are compared with the relative
/// slack `tol::MAJORIZE_REL * (1 + |sum y|)`, which survives eigenvalue
/// round-off.
pub fn majorizes(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let xs = sort_ascending(x);
    let ys = sort_ascending(y);
    let total_y: f64 = ys.iter().sum();
    let total_x: f64 = xs.iter().sum();
    let tol = tol::MAJORIZE_REL * (1.0 + total_y.abs());
    if (total_x - total_y).abs() > tol {
        return Ok(false);
    }
    let n = xs.len();
    let mut tail_x = 0.0;
    let mut tail_y = 0.0;
    // k runs from n down to 2; the k = 1 tail is the total handled above.
    for k in (1..n).rev() {
        tail_x += xs[k];
        tail_y += ys[k];
        if tail_x > tail_y + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// (x^)^T (y^): the maximum of x^T P y over permutations P, attained at the
/// sorted pairing.
pub fn rearrangement_max(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let xs = sort_ascending(x);
    let ys = sort_ascending(y);
    Ok(xs.iter().zip(&ys).map(|(a, b)| a * b).sum())
}

/// (tr X+, tr X-) from the spectral split X = X+ - X-.
pub fn positive_part_trace(x: &SymMat) -> Result<(f64, f64)> {
    let s = eigh(x)?;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for &ev in s.eigenvalues() {
        plus += ev.max(0.0);
        minus += (-ev).max(0.0);
    }
    Ok((plus, minus))
}
