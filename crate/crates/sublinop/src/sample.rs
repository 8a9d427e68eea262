//! Seeded sampling utilities for reproducible experiments.
//!
//! Random matrices, spectra, orthogonal frames, and annulus points used by
//! the self-verification routines and by the test suites. Everything is
//! driven by an explicit ChaCha generator so identical seeds give identical
//! streams.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::symmat::SymMat;

/// A seeded generator for deterministic experiments.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric matrix with entries uniform in [-scale, scale].
pub fn sym_mat<R: Rng>(rng: &mut R, n: usize, scale: f64) -> SymMat {
    let entries: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-scale..scale)).collect();
    SymMat::new(n, entries).expect("sampled entries are finite")
}

/// Random orthogonal matrix (row-major) built as a product of Jacobi plane
/// rotations with uniform angles.
pub fn orthogonal<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    // Two passes over every coordinate plane give good mixing.
    for _ in 0..2 {
        for p in 0..n {
            for r in (p + 1)..n {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                let (s, c) = theta.sin_cos();
                for k in 0..n {
                    let kp = q[k * n + p];
                    let kr = q[k * n + r];
                    q[k * n + p] = c * kp - s * kr;
                    q[k * n + r] = s * kp + c * kr;
                }
            }
        }
    }
    q
}

/// Random positive semidefinite matrix: a random spectrum in [0, scale]
/// conjugated by a random orthogonal frame.
pub fn psd_mat<R: Rng>(rng: &mut R, n: usize, scale: f64) -> SymMat {
    let spectrum: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..scale)).collect();
    spectrum_mat(rng, &spectrum)
}

/// Random symmetric matrix with the given spectrum (any order), conjugated
/// by a random orthogonal frame.
pub fn spectrum_mat<R: Rng>(rng: &mut R, spectrum: &[f64]) -> SymMat {
    let n = spectrum.len();
    let q = orthogonal(rng, n);
    SymMat::diag(spectrum)
        .expect("valid spectrum")
        .conjugate(&q)
        .expect("frame has matching dimension")
}

/// Uniform point in the annulus r_lo <= |x| <= r_hi in R^n (direction from
/// a normalized Gaussian-free scheme: a random orthogonal image of e_1).
pub fn annulus_point<R: Rng>(rng: &mut R, n: usize, r_lo: f64, r_hi: f64) -> Vec<f64> {
    let q = orthogonal(rng, n);
    let r = rng.gen_range(r_lo..r_hi);
    (0..n).map(|i| r * q[i * n]).collect()
}
