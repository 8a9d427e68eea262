//! Radial fundamental solutions w_{n,p} and their verification.
//!
//! For p in [2, inf] the function
//!
//!   w(x) = -(p-1)/(p-n) |x|^((p-n)/(p-1)),   p != n, p < inf
//!   w(x) = -ln|x|,                           p = n
//!   w(x) = -|x|,                             p = inf
//!
//! has gradient -|x|^(-alpha) x and Hessian
//! |x|^(-alpha) ((alpha-1) xh xh^T - (I - xh xh^T)) with xh = x/|x|,
//! where alpha is dual to p through (alpha-1)(p-1) = n-1. Its Hessian
//! eigenvalues are |x|^(-alpha) (-1,...,-1,alpha-1), so any rotationally
//! invariant elliptic operator whose aperture exponent is p annihilates w
//! away from the origin.

use crate::error::{Error, Result};
use crate::rotinv::{self, RotInvBody};
use crate::symmat::SymMat;
use crate::tol;

/// The radial fundamental solution with parameters n and p.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalSolution {
    n: usize,
    p: f64,
}

/// Result of checking F(H w_{n,p}) = 0 on sampled points.
#[derive(Debug, Clone, Copy)]
pub struct FundsolReport {
    pub p: f64,
    pub alpha: f64,
    /// max |eval(body, hessian(w, x))| over the sampled annulus points.
    pub max_residual: f64,
    /// eval(body, diag(-1,...,-1,alpha-1)), the scale-free residual.
    pub lambda_alpha_value: f64,
}

impl FundamentalSolution {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if !(2..=8).contains(&n) {
            return Err(Error::Validation(format!(
                "dimension must lie in [2, 8], got {n}"
            )));
        }
        if p.is_nan() || p < 2.0 {
            return Err(Error::Validation(format!(
                "fundamental solutions require p in [2, inf], got {p}"
            )));
        }
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Dual homogeneity exponent: (alpha-1)(p-1) = n-1, alpha = 1 at
    /// p = inf.
    pub fn alpha(&self) -> f64 {
        if self.p.is_infinite() {
            1.0
        } else {
            1.0 + (self.n as f64 - 1.0) / (self.p - 1.0)
        }
    }

    fn log_branch(&self) -> bool {
        self.p.is_finite() && (self.p - self.n as f64).abs() <= tol::FUNDSOL_LOG_BRANCH
    }

    /// w(x); the pole value at x = 0 is +inf for p <= n and 0 for p > n.
    pub fn value(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        let nf = self.n as f64;
        if self.p.is_infinite() {
            return -r;
        }
        if self.log_branch() {
            return -r.ln();
        }
        if r == 0.0 {
            return if self.p < nf { f64::INFINITY } else { 0.0 };
        }
        -(self.p - 1.0) / (self.p - nf) * r.powf((self.p - nf) / (self.p - 1.0))
    }

    /// grad w(x) = -|x|^(-alpha) x.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::Validation(
                "gradient is undefined at the pole".into(),
            ));
        }
        let s = -r.powf(-self.alpha());
        Ok(x.iter().map(|xi| s * xi).collect())
    }

    /// H w(x) = |x|^(-alpha) (alpha xh xh^T - I).
    pub fn hessian(&self, x: &[f64]) -> Result<SymMat> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point has length {}, expected {}",
                x.len(),
                self.n
            )));
        }
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::Validation(
                "Hessian is undefined at the pole".into(),
            ));
        }
        let alpha = self.alpha();
        let xh: Vec<f64> = x.iter().map(|xi| xi / r).collect();
        let proj = SymMat::outer(&xh)?;
        let m = proj.scale(alpha).sub(&SymMat::identity(self.n)?)?;
        Ok(m.scale(r.powf(-alpha)))
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Checks that the fundamental solution matched to the body's aperture is
/// annihilated by the body: samples the annulus 0.1 <= |x| <= 10 and
/// reports the largest |F(H w)|, together with the scale-free value
/// F(Lambda_alpha).
pub fn verify_fundamental(body: &RotInvBody, samples: usize, seed: u64) -> Result<FundsolReport> {
    let report = rotinv::aperture(body)?;
    let n = body.n();
    let alpha = report.alpha;
    let w = FundamentalSolution::new(n, report.p)?;

    let mut lam = vec![-1.0; n];
    lam[n - 1] = alpha - 1.0;
    let lambda_alpha = SymMat::diag(&lam)?;
    let lambda_alpha_value = rotinv::eval(body, &lambda_alpha)?;

    let mut rng = crate::sample::rng(seed);
    let mut max_residual: f64 = 0.0;
    for _ in 0..samples {
        let x = crate::sample::annulus_point(&mut rng, n, 0.1, 10.0);
        let residual = rotinv::eval(body, &w.hessian(&x)?)?;
        max_residual = max_residual.max(residual.abs());
    }
    Ok(FundsolReport {
        p: report.p,
        alpha,
        max_residual,
        lambda_alpha_value,
    })
}
