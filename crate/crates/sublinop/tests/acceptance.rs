//! Acceptance gate. One test per numbered criterion; each prints a single
//! `acceptance N: PASS` line with the measured figures, so a full run reads
//! as a scoreboard. Seeds are fixed and every tolerance is written out.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use sublinop::convbody::GeneralBody;
use sublinop::fundsol::{self, FundamentalSolution};
use sublinop::mvsolve::{
    build_stencils, inf_convolution, max_interior_excess, mollify, mv_excess_with,
    solve_dirichlet, Grid2, GridFn, Mask, ZFamily, DEFAULT_DENSITY,
};
use sublinop::rotinv::{self, RotInvBody};
use sublinop::sample;
use sublinop::symmat::{self, SymMat};

const SLACK: f64 = 1e-8;

/// Criterion 1: structural inequality suites. Schur majorization, spectral
/// subadditivity, the von Neumann trace bound, sublinearity of every body
/// kind, and rotational invariance, 1000 seeded trials per suite and
/// dimension, zero violations beyond 1e-8 slack, under 10 seconds.
#[test]
fn criterion_1_structural_inequality_suites() {
    let t = Instant::now();
    let mut rng = sample::rng(101);
    let mut violations = 0usize;

    for n in 2..=5usize {
        for _ in 0..1000 {
            let x = sample::sym_mat(&mut rng, n, 2.0);
            let y = sample::sym_mat(&mut rng, n, 2.0);
            let sx = symmat::eigh(&x).unwrap();
            let sy = symmat::eigh(&y).unwrap();

            // Schur: the diagonal is majorized by the spectrum.
            if !symmat::majorizes(&x.diagonal(), sx.eigenvalues()).unwrap() {
                violations += 1;
            }

            // Subadditivity of the spectrum map under majorization,
            // ascending eigenvalues added componentwise.
            let ssum = symmat::eigh(&x.add(&y).unwrap()).unwrap();
            let aligned: Vec<f64> = sx
                .eigenvalues()
                .iter()
                .zip(sy.eigenvalues())
                .map(|(a, b)| a + b)
                .collect();
            if !symmat::majorizes(ssum.eigenvalues(), &aligned).unwrap() {
                violations += 1;
            }

            // von Neumann: <X, Y> never beats the sorted pairing.
            let bound = symmat::rearrangement_max(sx.eigenvalues(), sy.eigenvalues()).unwrap();
            let ip = symmat::inner(&x, &y).unwrap();
            if ip > bound + SLACK * (1.0 + bound.abs()) {
                violations += 1;
            }
        }
    }

    for n in 2..=5usize {
        for _ in 0..1000 {
            let x = sample::sym_mat(&mut rng, n, 1.5);
            let y = sample::sym_mat(&mut rng, n, 1.5);
            let scale = rng.gen_range(0.0..3.0);
            let q = sample::orthogonal(&mut rng, n);

            let seed_a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let seed_b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let lam = rng.gen_range(0.0..1.5);
            let big = lam + rng.gen_range(0.0..2.0);
            let p = if rng.gen_bool(0.2) {
                f64::INFINITY
            } else {
                rng.gen_range(1.0..10.0)
            };
            let avec: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let delta = rng.gen_range(0.0..1.0);
            let bodies = [
                RotInvBody::orbit_hull(n, vec![seed_a, seed_b]).unwrap(),
                RotInvBody::pucci(n, lam, big).unwrap(),
                RotInvBody::dominative(n, p).unwrap(),
                RotInvBody::singleton(avec).unwrap(),
                RotInvBody::ball(n, delta).unwrap(),
            ];
            for body in &bodies {
                let fx = rotinv::eval(body, &x).unwrap();
                let fy = rotinv::eval(body, &y).unwrap();
                let fs = rotinv::eval(body, &x.add(&y).unwrap()).unwrap();
                let slack = SLACK * (1.0 + fx.abs() + fy.abs());
                if fs > fx + fy + slack {
                    violations += 1;
                }
                let ft = rotinv::eval(body, &x.scale(scale)).unwrap();
                if (ft - scale * fx).abs() > slack * (1.0 + scale) {
                    violations += 1;
                }
                let fq = rotinv::eval(body, &x.conjugate(&q).unwrap()).unwrap();
                if (fq - fx).abs() > slack {
                    violations += 1;
                }
            }

            // General bodies are sublinear too; rotational invariance is
            // not expected of them.
            let gens = vec![
                sample::sym_mat(&mut rng, n, 1.0),
                sample::sym_mat(&mut rng, n, 1.0),
                sample::sym_mat(&mut rng, n, 1.0),
            ];
            let general = GeneralBody::new(n, gens).unwrap();
            let fx = general.support(&x).unwrap();
            let fy = general.support(&y).unwrap();
            let fs = general.support(&x.add(&y).unwrap()).unwrap();
            if fs > fx + fy + SLACK * (1.0 + fx.abs() + fy.abs()) {
                violations += 1;
            }
            let ft = general.support(&x.scale(scale)).unwrap();
            if (ft - scale * fx).abs() > SLACK * (1.0 + scale) * (1.0 + fx.abs()) {
                violations += 1;
            }
        }
    }

    let secs = t.elapsed().as_secs_f64();
    assert_eq!(
        violations, 0,
        "acceptance 1: FAIL, {violations} structural violations"
    );
    assert!(
        secs < 10.0,
        "acceptance 1: FAIL, runtime {secs:.1}s exceeds 10s"
    );
    println!(
        "acceptance 1: PASS, 5 suites x 1000 trials x n in 2..=5, zero violations beyond 1e-8, {secs:.1}s"
    );
}

/// Criterion 2: closed-form regressions. Singleton(1,3,4) has p = 3, c = 2
/// and annihilates the Hessian of -ln|x| in three dimensions; Ball(delta)
/// apertures match their closed forms; aperture(K_p) returns p.
#[test]
fn criterion_2_closed_form_regressions() {
    let s134 = RotInvBody::singleton(vec![1.0, 3.0, 4.0]).unwrap();
    let ap = rotinv::aperture(&s134).unwrap();
    assert!(
        (ap.p - 3.0).abs() <= 1e-9,
        "acceptance 2: FAIL, singleton p = {}",
        ap.p
    );
    assert!(
        (ap.c - 2.0).abs() <= 1e-9,
        "acceptance 2: FAIL, singleton c = {}",
        ap.c
    );

    let w = FundamentalSolution::new(3, 3.0).unwrap();
    let mut rng = sample::rng(202);
    let mut worst_log = 0.0f64;
    for _ in 0..100 {
        let x = sample::annulus_point(&mut rng, 3, 0.2, 5.0);
        let hess = w.hessian(&x).unwrap();
        worst_log = worst_log.max(rotinv::eval(&s134, &hess).unwrap().abs());
    }
    assert!(
        worst_log <= 1e-9,
        "acceptance 2: FAIL, |F(H(-ln|x|))| reaches {worst_log:.2e}"
    );

    for &delta in &[0.1f64, 0.5, 0.9] {
        let ball = RotInvBody::ball(3, delta).unwrap();
        let r = rotinv::aperture(&ball).unwrap();
        let s = 3.0 - delta * delta;
        let root = (s / 2.0).sqrt();
        let c_expect = (s - delta * root) / 3.0;
        let p_expect = (s + 2.0 * delta * root) / (s - delta * root) + 1.0;
        assert!(
            (r.c - c_expect).abs() <= 1e-6,
            "acceptance 2: FAIL, ball delta {delta}: c {} vs {c_expect}",
            r.c
        );
        assert!(
            (r.p - p_expect).abs() <= 1e-6,
            "acceptance 2: FAIL, ball delta {delta}: p {} vs {p_expect}",
            r.p
        );
    }

    for n in [2usize, 3] {
        for &p in &[2.0, 3.0, 10.0, f64::INFINITY] {
            let got = rotinv::aperture(&RotInvBody::dominative(n, p).unwrap())
                .unwrap()
                .p;
            if p.is_infinite() {
                assert!(
                    got.is_infinite(),
                    "acceptance 2: FAIL, aperture(K_inf, n={n}) gave p = {got}"
                );
            } else {
                assert!(
                    (got - p).abs() <= 1e-9,
                    "acceptance 2: FAIL, aperture(K_{p}, n={n}) gave p = {got}"
                );
            }
        }
    }

    println!(
        "acceptance 2: PASS, singleton(1,3,4) p=3 c=2, log residual {worst_log:.1e}, ball closed forms within 1e-6, aperture(K_p)=p within 1e-9"
    );
}

/// Criterion 3: operator identities. Pucci closed form vs its orbit hull,
/// the dominative extreme-eigenvalue formula on both sides of p = 2, and
/// the Minkowski shift-and-scale decomposition of K_p, bit for bit.
#[test]
fn criterion_3_operator_identities() {
    let mut rng = sample::rng(303);

    let mut worst_pucci = 0.0f64;
    for i in 0..1000usize {
        let n = 2 + (i % 4);
        let x = sample::sym_mat(&mut rng, n, 2.0);
        let lam = rng.gen_range(0.0..1.5);
        let big = lam + rng.gen_range(0.0..2.0);
        let direct = rotinv::pucci_eval(lam, big, &x).unwrap();
        let body = RotInvBody::pucci(n, lam, big).unwrap();
        let via_body = rotinv::eval(&body, &x).unwrap();
        let gap = (direct - via_body).abs();
        assert!(
            gap <= 1e-9 * (1.0 + direct.abs()),
            "acceptance 3: FAIL, pucci gap {gap:.2e} at n={n}"
        );
        worst_pucci = worst_pucci.max(gap);
    }

    let mut worst_dom = 0.0f64;
    for i in 0..1000usize {
        let n = 2 + (i % 4);
        let x = sample::sym_mat(&mut rng, n, 2.0);
        let p = if i % 3 == 0 {
            rng.gen_range(1.0..2.0)
        } else {
            rng.gen_range(2.0..12.0)
        };
        let ev = symmat::eigh(&x).unwrap();
        let extreme = if p >= 2.0 {
            ev.eigenvalues()[n - 1]
        } else {
            ev.eigenvalues()[0]
        };
        let direct = (p - 2.0) * extreme + x.trace();
        let via_body = rotinv::eval(&RotInvBody::dominative(n, p).unwrap(), &x).unwrap();
        let gap = (direct - via_body).abs();
        assert!(
            gap <= 1e-9 * (1.0 + direct.abs()),
            "acceptance 3: FAIL, dominative gap {gap:.2e} at n={n}, p={p}"
        );
        worst_dom = worst_dom.max(gap);
    }

    for n in [2usize, 3, 4] {
        let ones = RotInvBody::orbit_hull(n, vec![vec![1.0; n]]).unwrap();
        let kinf = RotInvBody::dominative(n, f64::INFINITY).unwrap();
        for &p in &[2.0f64, 3.0, 4.0, 10.0] {
            let built = rotinv::minkowski(1.0, &ones, p - 2.0, &kinf).unwrap();
            let direct = RotInvBody::dominative(n, p).unwrap();
            for _ in 0..50 {
                let x = sample::sym_mat(&mut rng, n, 2.0);
                let a = rotinv::eval(&built, &x).unwrap();
                let b = rotinv::eval(&direct, &x).unwrap();
                assert!(
                    a == b,
                    "acceptance 3: FAIL, Minkowski eval {a} != dominative eval {b} at n={n}, p={p}"
                );
            }
        }
    }

    println!(
        "acceptance 3: PASS, pucci worst {worst_pucci:.1e}, dominative worst {worst_dom:.1e} (incl. p < 2), Minkowski K_p bitwise across n in 2..=4"
    );
}

/// Criterion 4: fundamental solutions. Every listed body annihilates its
/// own eigenvalue pattern Lambda_alpha and shows radial residual at most
/// 1e-8 across sampled radii, in under 5 seconds.
#[test]
fn criterion_4_fundamental_solutions() {
    let t = Instant::now();
    let mut bodies: Vec<(String, RotInvBody)> = Vec::new();
    for n in [2usize, 3] {
        for &p in &[2.0, 3.0, 7.0, f64::INFINITY] {
            bodies.push((
                format!("dominative(n={n}, p={p})"),
                RotInvBody::dominative(n, p).unwrap(),
            ));
        }
        for &p in &[3.0f64, 5.0] {
            bodies.push((
                format!("pucci(n={n}, 1, {})", p - 1.0),
                RotInvBody::pucci(n, 1.0, p - 1.0).unwrap(),
            ));
        }
        bodies.push((format!("ball(n={n}, 0.5)"), RotInvBody::ball(n, 0.5).unwrap()));
    }
    // The (1,3,4) flat body lives in dimension three only.
    bodies.push((
        "singleton(1,3,4)".into(),
        RotInvBody::singleton(vec![1.0, 3.0, 4.0]).unwrap(),
    ));

    let mut worst_val = 0.0f64;
    let mut worst_res = 0.0f64;
    for (name, body) in &bodies {
        let n = body.n();
        let alpha = rotinv::aperture(body).unwrap().alpha;
        let mut diag = vec![-1.0; n];
        diag[n - 1] = alpha - 1.0;
        let lam_alpha = SymMat::diag(&diag).unwrap();
        let v = rotinv::eval(body, &lam_alpha).unwrap();
        assert!(
            (-1e-8..=1e-8).contains(&v),
            "acceptance 4: FAIL, {name}: F(Lambda_alpha) = {v:.2e}"
        );
        let report = fundsol::verify_fundamental(body, 100, 404).unwrap();
        assert!(
            report.max_residual <= 1e-8,
            "acceptance 4: FAIL, {name}: radial residual {:.2e}",
            report.max_residual
        );
        worst_val = worst_val.max(v.abs());
        worst_res = worst_res.max(report.max_residual);
    }

    let secs = t.elapsed().as_secs_f64();
    assert!(
        secs < 5.0,
        "acceptance 4: FAIL, runtime {secs:.1}s exceeds 5s"
    );
    println!(
        "acceptance 4: PASS, {} bodies, |F(Lambda_alpha)| <= {:.1e}, radial residual <= {:.1e}, {:.1}s",
        bodies.len(),
        worst_val,
        worst_res,
        secs
    );
}

/// Criterion 5: the nesting chain (1/n)K_2, (1/(n+p-2))K_p, (1/(n+q-2))K_q,
/// K_inf holds on representative slices, and each strict reversal is
/// rejected with a positive residual witness.
#[test]
fn criterion_5_nesting_chain() {
    let slice = |n: usize, seed: Vec<f64>, denom: f64| -> GeneralBody {
        let scaled: Vec<f64> = seed.iter().map(|v| v / denom).collect();
        let body = RotInvBody::orbit_hull(n, vec![scaled]).unwrap();
        rotinv::phi_inv_representative(&body).unwrap()
    };

    let mut links = 0usize;
    let mut reversals = 0usize;
    for n in [2usize, 3] {
        let nf = n as f64;
        for &(p, q) in &[(2.0f64, 3.0f64), (3.0, 10.0)] {
            let mut seed_p = vec![1.0; n];
            seed_p[n - 1] = p - 1.0;
            let mut seed_q = vec![1.0; n];
            seed_q[n - 1] = q - 1.0;
            let mut seed_inf = vec![0.0; n];
            seed_inf[n - 1] = 1.0;

            let g2 = slice(n, vec![1.0; n], nf);
            let gp = slice(n, seed_p, nf + p - 2.0);
            let gq = slice(n, seed_q, nf + q - 2.0);
            let ginf = slice(n, seed_inf, 1.0);

            for (lo, hi) in [(&g2, &gp), (&gp, &gq), (&gq, &ginf)] {
                assert!(
                    GeneralBody::nested_cones(lo, hi).unwrap(),
                    "acceptance 5: FAIL, forward link broken at n={n}, (p,q)=({p},{q})"
                );
                links += 1;
            }

            // Strict reversals only: at p = 2 the first link is an equality
            // of bodies, so it reverses by construction.
            let mut backward = vec![
                GeneralBody::nesting_witness(&gq, &gp).unwrap(),
                GeneralBody::nesting_witness(&ginf, &gq).unwrap(),
            ];
            if p > 2.0 {
                backward.push(GeneralBody::nesting_witness(&gp, &g2).unwrap());
            }
            for witness in backward {
                let (idx, residual) =
                    witness.expect("acceptance 5: FAIL, a reversed pair was accepted");
                assert!(
                    residual > 0.0,
                    "acceptance 5: FAIL, reversed pair rejected generator {idx} without residual"
                );
                reversals += 1;
            }
        }
    }

    println!(
        "acceptance 5: PASS, {links} forward links verified, {reversals} reversed pairs rejected with positive residual"
    );
}

/// Criterion 6: mean-value quadratic exactness. The normalized excess of a
/// quadratic matches F(A)/(2(n+2)) within 5e-3 (1 + |A|) at eps in
/// {0.05, 0.025}, 32 rotations, rule density 41.
#[test]
fn criterion_6_mean_value_quadratic_exactness() {
    let bodies = [
        ("laplacian", RotInvBody::dominative(2, 2.0).unwrap()),
        ("pucci(1,3)", RotInvBody::pucci(2, 1.0, 3.0).unwrap()),
        ("dominative(4)", RotInvBody::dominative(2, 4.0).unwrap()),
    ];
    let mut worst_fraction = 0.0f64;
    for (name, body) in &bodies {
        let lam_max = rotinv::classify_ellipticity(body).capital_lambda;
        let family = ZFamily::for_solver(body, 32).unwrap();
        for &eps in &[0.05f64, 0.025] {
            let h = eps / 8.0;
            let band = Grid2::band_cells_for(eps, lam_max, h);
            let half = 1.3 * eps * lam_max.sqrt();
            let grid = Arc::new(Grid2::square(half, h, band).unwrap());
            let set = build_stencils(&family, eps, h, 41).unwrap();
            let center = (grid.nx() / 2, grid.ny() / 2);
            assert_eq!(grid.mask_at(center.0, center.1), Mask::Interior);

            let mut rng = sample::rng(606);
            for _ in 0..50 {
                let a = sample::sym_mat(&mut rng, 2, 1.0);
                let (a11, a12, a22) = (a.get(0, 0), a.get(0, 1), a.get(1, 1));
                let u = GridFn::from_fn(grid.clone(), move |x, y| {
                    0.5 * (a11 * x * x + 2.0 * a12 * x * y + a22 * y * y)
                })
                .unwrap();
                let excess = mv_excess_with(&u, center, &set).unwrap();
                let exact = rotinv::eval(body, &a).unwrap();
                let gap = (excess / (eps * eps) - exact / 8.0).abs();
                let budget = 5e-3 * (1.0 + symmat::frobenius_norm(&a));
                assert!(
                    gap <= budget,
                    "acceptance 6: FAIL, {name} at eps {eps}: gap {gap:.2e} over budget {budget:.2e}"
                );
                worst_fraction = worst_fraction.max(gap / budget);
            }
        }
    }
    println!(
        "acceptance 6: PASS, 50 quadratics x 3 bodies x eps in {{0.05, 0.025}}, worst gap at {:.0}% of budget",
        100.0 * worst_fraction
    );
}

/// Criterion 7: solver convergence. Dominative p = 3 on the annulus
/// [0.25, 1] with boundary data w_{2,3}; the relative interior error drops
/// monotonically across three (grid, eps) levels and ends below 5e-2, and
/// shifting the boundary data upward shifts the solution the same way.
#[test]
fn criterion_7_solver_convergence() {
    let t = Instant::now();
    let body = RotInvBody::dominative(2, 3.0).unwrap();
    let lambda_max = rotinv::classify_ellipticity(&body).capital_lambda;
    let w = FundamentalSolution::new(2, 3.0).unwrap();

    // h is sized so the self-padding annulus constructor lands near the
    // nominal node count; eps = factor * h throughout.
    let levels = [
        (64usize, 8.0f64, 1e-9f64, 4_000usize),
        (128, 4.0, 1e-7, 20_000),
        (256, 2.0, 3e-7, 60_000),
    ];
    let mut errors = Vec::new();
    for &(nominal, factor, tol, cap) in &levels {
        let band = (factor * lambda_max.sqrt()).ceil() as usize + 1;
        let h = 2.0 / (nominal as f64 - 2.0 * band as f64 - 2.0);
        let eps = factor * h;
        let grid = Arc::new(Grid2::annulus(0.25, 1.0, h, band).unwrap());
        let data = GridFn::from_fn(grid.clone(), |x, y| w.value(&[x, y])).unwrap();
        let (u, report) = solve_dirichlet(&data, &body, eps, 16, tol, cap).unwrap();

        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (ix, iy) in grid.nodes_with(Mask::Interior) {
            let exact = w.value(&[grid.x(ix), grid.y(iy)]);
            num = num.max((u.value(ix, iy) - exact).abs());
            den = den.max(exact.abs());
        }
        let rel = num / den;
        println!(
            "  level {}x{} (eps = {factor}h): rel Linf {rel:.3e}, {} sweeps, final update {:.1e}, excess {:.1e}",
            grid.nx(),
            grid.ny(),
            report.sweeps,
            report.final_update,
            report.max_mv_excess
        );
        errors.push(rel);
    }
    assert!(
        errors[1] < errors[0] && errors[2] < errors[1],
        "acceptance 7: FAIL, error sequence {errors:?} is not decreasing"
    );
    assert!(
        errors[2] < 5e-2,
        "acceptance 7: FAIL, finest relative error {:.3e} is not below 5e-2",
        errors[2]
    );

    // Comparison on the coarse level: data shifted up by a constant gives a
    // solution shifted up by the same constant, and never below the original.
    let (nominal, factor, _, _) = levels[0];
    let band = (factor * lambda_max.sqrt()).ceil() as usize + 1;
    let h = 2.0 / (nominal as f64 - 2.0 * band as f64 - 2.0);
    let eps = factor * h;
    let grid = Arc::new(Grid2::annulus(0.25, 1.0, h, band).unwrap());
    let data_lo = GridFn::from_fn(grid.clone(), |x, y| w.value(&[x, y])).unwrap();
    let data_hi = GridFn::from_fn(grid.clone(), |x, y| w.value(&[x, y]) + 0.3).unwrap();
    let (u_lo, _) = solve_dirichlet(&data_lo, &body, eps, 16, 1e-10, 8_000).unwrap();
    let (u_hi, _) = solve_dirichlet(&data_hi, &body, eps, 16, 1e-10, 8_000).unwrap();
    let mut max_shift_gap = 0.0f64;
    for (ix, iy) in grid.nodes_with(Mask::Interior) {
        let lo = u_lo.value(ix, iy);
        let hi = u_hi.value(ix, iy);
        assert!(
            lo <= hi + 1e-9,
            "acceptance 7: FAIL, comparison broken at node ({ix},{iy})"
        );
        max_shift_gap = max_shift_gap.max((hi - lo - 0.3).abs());
    }
    assert!(
        max_shift_gap <= 1e-5,
        "acceptance 7: FAIL, constant-shift gap {max_shift_gap:.2e}"
    );

    let secs = t.elapsed().as_secs_f64();
    println!(
        "acceptance 7: PASS, rel Linf {:.3e} -> {:.3e} -> {:.3e}, comparison shift gap {:.1e}, {:.0}s",
        errors[0], errors[1], errors[2], max_shift_gap, secs
    );
}

/// Criterion 8: regularization and superposition. Inf-convolutions sit
/// below u, grow as eps shrinks, and respect the 1/eps semiconcavity bound;
/// sums of shifted fundamental supersolutions and mollified supersolutions
/// keep their mean-value excess within tolerance.
#[test]
fn criterion_8_regularization_and_superposition() {
    // Inf-convolution facts on a wiggly field.
    let grid_a = Arc::new(Grid2::square(0.6, 0.05, 3).unwrap());
    let u = GridFn::from_fn(grid_a.clone(), |x, y| {
        (3.0 * x).sin() * (2.0 * y).cos() + 0.5 * x * x
    })
    .unwrap();
    let eps_big = 0.1;
    let eps_small = 0.05;
    let lo_big = inf_convolution(&u, eps_big).unwrap();
    let lo_small = inf_convolution(&u, eps_small).unwrap();
    for iy in 0..grid_a.ny() {
        for ix in 0..grid_a.nx() {
            if grid_a.mask_at(ix, iy) == Mask::Outside {
                continue;
            }
            assert!(
                lo_big.value(ix, iy) <= u.value(ix, iy) + 1e-12,
                "acceptance 8: FAIL, inf-convolution above u at ({ix},{iy})"
            );
            assert!(
                lo_small.value(ix, iy) >= lo_big.value(ix, iy) - 1e-12,
                "acceptance 8: FAIL, inf-convolution not monotone in eps at ({ix},{iy})"
            );
        }
    }
    let h = grid_a.h();
    let mut worst_d2 = f64::NEG_INFINITY;
    for iy in 0..grid_a.ny() {
        for ix in 0..grid_a.nx() {
            let inside = |dx: i32, dy: i32| {
                let jx = ix as i32 + dx;
                let jy = iy as i32 + dy;
                jx >= 0
                    && jy >= 0
                    && (jx as usize) < grid_a.nx()
                    && (jy as usize) < grid_a.ny()
                    && grid_a.mask_at(jx as usize, jy as usize) != Mask::Outside
            };
            if inside(-1, 0) && inside(0, 0) && inside(1, 0) {
                let d2 = (lo_big.value(ix + 1, iy) - 2.0 * lo_big.value(ix, iy)
                    + lo_big.value(ix - 1, iy))
                    / (h * h);
                worst_d2 = worst_d2.max(d2);
            }
            if inside(0, -1) && inside(0, 0) && inside(0, 1) {
                let d2 = (lo_big.value(ix, iy + 1) - 2.0 * lo_big.value(ix, iy)
                    + lo_big.value(ix, iy - 1))
                    / (h * h);
                worst_d2 = worst_d2.max(d2);
            }
        }
    }
    assert!(
        worst_d2 <= 1.0 / eps_big + 1e-9,
        "acceptance 8: FAIL, second difference {worst_d2:.4} exceeds 1/eps = {}",
        1.0 / eps_big
    );

    // Superposition: the sum of two shifted fundamental supersolutions
    // stays a discrete supersolution.
    let h = 0.05;
    let eps = 3.0 * h;
    let body = RotInvBody::dominative(2, 3.0).unwrap();
    let lam_max = rotinv::classify_ellipticity(&body).capital_lambda;
    let band = Grid2::band_cells_for(eps, lam_max, h);
    let grid = Arc::new(Grid2::square(0.8, h, band).unwrap());
    let family = ZFamily::for_solver(&body, 8).unwrap();
    let set = build_stencils(&family, eps, h, DEFAULT_DENSITY).unwrap();
    let w = FundamentalSolution::new(2, 3.0).unwrap();
    let sum = GridFn::from_fn(grid.clone(), |x, y| {
        w.value(&[x - 2.0, y - 0.3]) + w.value(&[x + 1.8, y + 0.5])
    })
    .unwrap();
    let worst_sum = max_interior_excess(&sum, &set).unwrap();
    assert!(
        worst_sum <= 1e-3,
        "acceptance 8: FAIL, superposition excess {worst_sum:.2e}"
    );

    // Mollification: smoothing a supersolution cannot raise its excess at
    // nodes whose averaging stencil sees only cleanly mollified values.
    let pole = GridFn::from_fn(grid.clone(), |x, y| w.value(&[x - 2.0, y])).unwrap();
    let interior = grid.nodes_with(Mask::Interior);
    let mut base_worst = f64::NEG_INFINITY;
    for &node in &interior {
        base_worst = base_worst.max(mv_excess_with(&pole, node, &set).unwrap());
    }
    assert!(
        base_worst <= 1e-3,
        "acceptance 8: FAIL, base excess {base_worst:.2e}"
    );
    let smooth = mollify(&pole, 2.5 * h).unwrap();
    let depth = (band as f64 + 1.45 * set.reach() as f64) * h;
    let mut deep = 0usize;
    let mut worst_moll = f64::NEG_INFINITY;
    for &(ix, iy) in &interior {
        let sd = (0.8 - grid.x(ix).abs()).min(0.8 - grid.y(iy).abs());
        if sd < depth {
            continue;
        }
        deep += 1;
        let e = mv_excess_with(&smooth, (ix, iy), &set).unwrap();
        assert!(
            e <= base_worst + 1e-12 && e <= 1e-3,
            "acceptance 8: FAIL, mollified excess {e:.2e} at ({ix},{iy})"
        );
        worst_moll = worst_moll.max(e);
    }
    assert!(deep > 10, "acceptance 8: FAIL, no deep nodes to check");

    println!(
        "acceptance 8: PASS, inf-convolution ordered and {:.2} <= 1/eps, superposition excess {:.1e}, mollified excess {:.1e} on {} deep nodes",
        worst_d2, worst_sum, worst_moll, deep
    );
}

/// Criterion 9: the non-degeneracy predicate. Pucci(0,1) is degenerate,
/// the uniformly elliptic test bodies are not, and on 200 random elliptic
/// bodies the predicate agrees with the sign of F(-I).
#[test]
fn criterion_9_nondegeneracy_predicate() {
    for n in [2usize, 3] {
        let half_pucci = RotInvBody::pucci(n, 0.0, 1.0).unwrap();
        assert!(
            !rotinv::nondegenerate(&half_pucci),
            "acceptance 9: FAIL, Pucci(0,1) reported nondegenerate at n={n}"
        );
    }

    let uniform = [
        RotInvBody::pucci(2, 1.0, 3.0).unwrap(),
        RotInvBody::pucci(3, 1.0, 2.0).unwrap(),
        RotInvBody::dominative(2, 2.0).unwrap(),
        RotInvBody::dominative(3, 10.0).unwrap(),
        RotInvBody::ball(3, 0.5).unwrap(),
        RotInvBody::singleton(vec![1.0, 3.0, 4.0]).unwrap(),
    ];
    for body in &uniform {
        assert!(
            rotinv::nondegenerate(body),
            "acceptance 9: FAIL, a uniformly elliptic body reported degenerate"
        );
    }

    // Random elliptic bodies with seed entries either exactly zero or at
    // least 0.1, so the trace test and the fixed predicate threshold can
    // never straddle each other.
    let mut rng = sample::rng(909);
    let mut degenerate_seen = 0usize;
    for i in 0..200usize {
        let n = 2 + (i % 4);
        let body = if i % 5 == 0 {
            RotInvBody::ball(n, rng.gen_range(0.0..1.0)).unwrap()
        } else {
            let k = 1 + (i % 3);
            let mut seeds: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            if rng.gen_bool(0.25) {
                                0.0
                            } else {
                                rng.gen_range(0.1..2.0)
                            }
                        })
                        .collect()
                })
                .collect();
            if rng.gen_bool(0.3) {
                seeds.push(vec![0.0; n]);
            }
            RotInvBody::orbit_hull(n, seeds).unwrap()
        };
        let predicate = rotinv::nondegenerate(&body);
        let neg_identity = SymMat::identity(n).unwrap().scale(-1.0);
        let by_sign = rotinv::eval(&body, &neg_identity).unwrap() < -1e-9;
        assert_eq!(
            predicate, by_sign,
            "acceptance 9: FAIL, predicate disagrees with sign of F(-I) on trial {i}"
        );
        if !predicate {
            degenerate_seen += 1;
        }
    }
    assert!(
        degenerate_seen > 10,
        "acceptance 9: FAIL, sample produced too few degenerate bodies"
    );

    println!(
        "acceptance 9: PASS, Pucci(0,1) degenerate, {} uniform bodies nondegenerate, 200 random bodies agree with sign of F(-I) ({degenerate_seen} degenerate)",
        uniform.len()
    );
}
