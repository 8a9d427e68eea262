//! `sublinop`: analyze sublinear elliptic operators given as convex-body
//! specs, evaluate them, test cone nesting, verify fundamental solutions,
//! solve 2D Dirichlet problems by mean-value iteration, and regularize
//! grid functions.
//!
//! Exit codes: 0 success, 2 parse/validation problems, 3 convergence
//! failures. All output is deterministic: identical invocations produce
//! byte-identical CSV and JSON.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use sublinop::bodyspec::{self, Body};
use sublinop::convbody::{EllipticityTag, GeneralBody};
use sublinop::fundsol::{self, FundamentalSolution};
use sublinop::mvsolve::{
    inf_convolution, mollify, solve_dirichlet, sup_convolution, Grid2, GridFn, Mask,
};
use sublinop::rotinv::{self, RotInvBody};
use sublinop::symmat::SymMat;
use sublinop::{Error, Result};

/// Hard sweep cap for `solve`; hitting it is reported as a convergence
/// failure with the final update size.
const MAX_SWEEPS: usize = 100_000;

#[derive(Parser)]
#[command(
    name = "sublinop",
    version,
    about = "Sublinear elliptic operators as convex bodies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an operator spec and report its rotational invariants.
    Analyze {
        /// JSON operator spec file.
        spec: PathBuf,
    },
    /// Evaluate F(X) for a row-major matrix.
    Eval {
        /// JSON operator spec file.
        spec: PathBuf,
        /// Row-major full matrix, comma separated, e.g. "2,0,0,-1".
        #[arg(long)]
        matrix: String,
    },
    /// Test whether the body cone of F nests inside the body cone of G.
    Nest {
        /// JSON spec of the inner operator F.
        spec_f: PathBuf,
        /// JSON spec of the outer operator G.
        spec_g: PathBuf,
    },
    /// Check F(Hw) = 0 for the operator's own fundamental solution.
    #[command(name = "fundsol-check")]
    FundsolCheck {
        /// JSON operator spec file (rotationally invariant kinds).
        spec: PathBuf,
        /// Number of sampled radii.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// RNG seed for the sample points.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Solve a 2D Dirichlet problem by damped mean-value iteration.
    Solve {
        /// JSON operator spec file (rotationally invariant, n = 2).
        spec: PathBuf,
        /// Domain shape; the square is the fixed box [-1,1]^2.
        #[arg(long, value_enum, default_value_t = DomainKind::Square)]
        domain: DomainKind,
        /// Inner radius (annulus only).
        #[arg(long, default_value_t = 0.25)]
        rin: f64,
        /// Outer radius (annulus only).
        #[arg(long, default_value_t = 1.0)]
        rout: f64,
        /// Nominal node count per side.
        #[arg(long, default_value_t = 65)]
        grid: usize,
        /// Ellipsoid radius of the averaging rule.
        #[arg(long)]
        eps: f64,
        /// Rotation count of the ellipsoid family.
        #[arg(long, default_value_t = 16)]
        rot: usize,
        /// Sweep update tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Dirichlet data: "fundsol", "affine:a,b,c", or a grid CSV path.
        #[arg(long)]
        boundary: String,
        /// Output CSV path for the solution.
        #[arg(long)]
        out: PathBuf,
    },
    /// Inf/sup convolution or mollification of a grid CSV.
    Convolve {
        /// Input grid CSV (as written by solve).
        #[arg(long = "in")]
        input: PathBuf,
        /// Transform to apply.
        #[arg(long, value_enum)]
        mode: ConvolveMode,
        /// Quadratic-penalty weight for inf/sup; kernel radius for mollify.
        #[arg(long)]
        eps: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainKind {
    Square,
    Annulus,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvolveMode {
    Inf,
    Sup,
    Mollify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::DimensionMismatch(_) | Error::Validation(_) | Error::Parse(_) => {
                    ExitCode::from(2)
                }
                Error::Convergence(_) | Error::Inconsistency(_) => ExitCode::from(3),
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    check_thread_env()?;
    match command {
        Command::Analyze { spec } => analyze(&spec),
        Command::Eval { spec, matrix } => eval(&spec, &matrix),
        Command::Nest { spec_f, spec_g } => nest(&spec_f, &spec_g),
        Command::FundsolCheck {
            spec,
            samples,
            seed,
        } => fundsol_check(&spec, samples, seed),
        Command::Solve {
            spec,
            domain,
            rin,
            rout,
            grid,
            eps,
            rot,
            tol,
            boundary,
            out,
        } => solve(&spec, domain, rin, rout, grid, eps, rot, tol, &boundary, &out),
        Command::Convolve {
            input,
            mode,
            eps,
            out,
        } => convolve(&input, mode, eps, &out),
    }
}

/// The sweep kernel is sequential, so any nonnegative cap is satisfiable;
/// the variable is still validated so misconfigured pipelines fail fast.
fn check_thread_env() -> Result<()> {
    match std::env::var("SUBLINOP_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(_) => Ok(()),
            Err(_) => Err(Error::Validation(format!(
                "SUBLINOP_THREADS must be a nonnegative integer (0 = auto), got {raw:?}"
            ))),
        },
    }
}

fn load_body(path: &Path) -> Result<Body> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Validation(format!("cannot read spec {}: {e}", path.display()))
    })?;
    bodyspec::compile(&bodyspec::parse(&text)?)
}

/// p rendered as a JSON number, or the string "inf" at the degenerate
/// aperture (JSON has no infinity literal).
fn p_to_json(p: f64) -> Value {
    if p.is_infinite() {
        Value::String("inf".into())
    } else {
        Value::from(p)
    }
}

fn print_json<T: Serialize>(report: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Inconsistency(format!("report serialization failed: {e}")))?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeReport {
    class: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(rename = "Lambda", skip_serializing_if = "Option::is_none")]
    big_lambda: Option<f64>,
    #[serde(rename = "F_minus_I", skip_serializing_if = "Option::is_none")]
    f_minus_i: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nondegenerate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    argmin: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    notice: Option<&'static str>,
}

fn analyze(spec: &Path) -> Result<()> {
    let body = load_body(spec)?;
    let cls = body.classify();
    let mut report = AnalyzeReport {
        class: match cls.tag {
            EllipticityTag::UniformlyElliptic => "uniform",
            EllipticityTag::DegenerateElliptic => "degenerate",
            EllipticityTag::NotElliptic => "not_elliptic",
        },
        lambda: None,
        big_lambda: None,
        f_minus_i: None,
        nondegenerate: None,
        alpha: None,
        p: None,
        c: None,
        argmin: None,
        notice: None,
    };
    if cls.tag == EllipticityTag::NotElliptic {
        report.notice = Some("body is not elliptic; constants and aperture are omitted");
        return print_json(&report);
    }
    report.lambda = Some(cls.lambda);
    report.big_lambda = Some(cls.capital_lambda);
    let neg_identity = SymMat::identity(body.n())?.scale(-1.0);
    report.f_minus_i = Some(body.eval(&neg_identity)?);
    report.nondegenerate = Some(body.nondegenerate());
    match body.as_rotinv() {
        Some(rb) => {
            let ap = rotinv::aperture(rb)?;
            report.alpha = Some(ap.alpha);
            report.p = Some(p_to_json(ap.p));
            report.c = Some(ap.c);
            report.argmin = Some(ap.argmin.as_slice().to_vec());
        }
        None => {
            report.notice =
                Some("alpha, p, c, argmin need rotational invariance; omitted for a general body");
        }
    }
    print_json(&report)
}

fn eval(spec: &Path, matrix: &str) -> Result<()> {
    let body = load_body(spec)?;
    let n = body.n();
    let entries = matrix
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("matrix entry {t:?} is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if entries.len() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "spec has n = {n}, so the matrix needs {} entries, got {}",
            n * n,
            entries.len()
        )));
    }
    let (x, asymmetry) = SymMat::new_reporting_asymmetry(n, entries)?;
    if asymmetry > 1e-12 {
        eprintln!("warning: matrix symmetrized, asymmetry {asymmetry:.3e}");
    }
    println!("{:.11e}", body.eval(&x)?);
    Ok(())
}

#[derive(Serialize)]
struct NestReport {
    nested: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    offending_generator: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
}

/// Rotationally invariant specs are expanded to a representative slice of
/// diagonal generators; general specs are used as given.
fn representative(body: &Body) -> Result<GeneralBody> {
    match body.as_rotinv() {
        Some(rb) => rotinv::phi_inv_representative(rb),
        None => match body {
            Body::General(g) => Ok(g.clone()),
            Body::RotInv(_) => unreachable!("as_rotinv covers the rotinv variant"),
        },
    }
}

fn nest(spec_f: &Path, spec_g: &Path) -> Result<()> {
    let f = representative(&load_body(spec_f)?)?;
    let g = representative(&load_body(spec_g)?)?;
    let report = match GeneralBody::nesting_witness(&f, &g)? {
        None => NestReport {
            nested: true,
            offending_generator: None,
            residual: None,
        },
        Some((index, residual)) => NestReport {
            nested: false,
            offending_generator: Some(index),
            residual: Some(residual),
        },
    };
    print_json(&report)
}

#[derive(Serialize)]
struct FundsolCheckReport {
    p: Value,
    alpha: f64,
    max_residual: f64,
    lambda_alpha_value: f64,
}

fn require_rotinv(body: &Body, op: &str) -> Result<RotInvBody> {
    body.as_rotinv().cloned().ok_or_else(|| {
        Error::Validation(format!(
            "{op} needs a rotationally invariant body (rotinv, pucci, dominative, singleton, ball)"
        ))
    })
}

fn fundsol_check(spec: &Path, samples: usize, seed: u64) -> Result<()> {
    let body = load_body(spec)?;
    let rb = require_rotinv(&body, "fundsol-check")?;
    let report = fundsol::verify_fundamental(&rb, samples, seed)?;
    print_json(&FundsolCheckReport {
        p: p_to_json(report.p),
        alpha: report.alpha,
        max_residual: report.max_residual,
        lambda_alpha_value: report.lambda_alpha_value,
    })
}

enum BoundaryData {
    Fundsol,
    Affine(f64, f64, f64),
    File(PathBuf),
}

fn parse_boundary(raw: &str) -> Result<BoundaryData> {
    if raw == "fundsol" {
        return Ok(BoundaryData::Fundsol);
    }
    if let Some(rest) = raw.strip_prefix("affine:") {
        let coeffs = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("affine coefficient {t:?} is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if coeffs.len() != 3 || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parse(format!(
                "affine boundary needs three finite coefficients a,b,c, got {rest:?}"
            )));
        }
        return Ok(BoundaryData::Affine(coeffs[0], coeffs[1], coeffs[2]));
    }
    Ok(BoundaryData::File(PathBuf::from(raw)))
}

/// Sizes h so the self-padding constructors land near `grid` nodes per
/// side: h and the band depth depend on each other, so iterate the pair.
fn grid_spacing(extent: f64, grid: usize, eps: f64, lambda_max: f64) -> Result<(f64, usize)> {
    let mut band = 1usize;
    let mut h = extent / grid as f64;
    for _ in 0..4 {
        let free = grid as f64 - 2.0 * band as f64 - 2.0;
        if free < 4.0 {
            return Err(Error::Validation(format!(
                "grid {grid} is too small for eps {eps}: the boundary band alone needs {band} cells per side"
            )));
        }
        h = extent / free;
        band = Grid2::band_cells_for(eps, lambda_max, h);
    }
    Ok((h, band))
}

#[allow(clippy::too_many_arguments)]
fn solve(
    spec: &Path,
    domain: DomainKind,
    rin: f64,
    rout: f64,
    grid: usize,
    eps: f64,
    rot: usize,
    tol: f64,
    boundary: &str,
    out: &Path,
) -> Result<()> {
    let body = load_body(spec)?;
    let rb = require_rotinv(&body, "solve")?;
    if body.n() != 2 {
        return Err(Error::Validation(format!(
            "the mean-value solver is two-dimensional, spec has n = {}",
            body.n()
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Validation(format!("eps must be positive, got {eps}")));
    }
    let data = match parse_boundary(boundary)? {
        BoundaryData::File(path) => {
            let file = fs::File::open(&path).map_err(|e| {
                Error::Validation(format!("cannot read boundary grid {}: {e}", path.display()))
            })?;
            GridFn::read_csv(BufReader::new(file))?
        }
        closed_form => {
            let extent = match domain {
                DomainKind::Square => 2.0,
                DomainKind::Annulus => {
                    if !(rin.is_finite() && rout.is_finite() && 0.0 < rin && rin < rout) {
                        return Err(Error::Validation(format!(
                            "annulus radii must satisfy 0 < rin < rout, got {rin}, {rout}"
                        )));
                    }
                    2.0 * rout
                }
            };
            let lambda_max = rotinv::classify_ellipticity(&rb).capital_lambda.max(1e-12);
            let (h, band) = grid_spacing(extent, grid, eps, lambda_max)?;
            let g = Arc::new(match domain {
                DomainKind::Square => Grid2::square(1.0, h, band)?,
                DomainKind::Annulus => Grid2::annulus(rin, rout, h, band)?,
            });
            match closed_form {
                BoundaryData::Fundsol => {
                    let p = rotinv::aperture(&rb)?.p;
                    let w = FundamentalSolution::new(2, p)?;
                    GridFn::from_fn(g, move |x, y| w.value(&[x, y]))?
                }
                BoundaryData::Affine(a, b, c) => GridFn::from_fn(g, move |x, y| a * x + b * y + c)?,
                BoundaryData::File(_) => unreachable!("file data handled above"),
            }
        }
    };
    let (solution, report) = solve_dirichlet(&data, &rb, eps, rot, tol, MAX_SWEEPS)?;
    write_grid_csv(&solution, out)?;
    print_json(&report)
}

fn write_grid_csv(field: &GridFn, out: &Path) -> Result<()> {
    let file = fs::File::create(out).map_err(|e| {
        Error::Validation(format!("cannot create output {}: {e}", out.display()))
    })?;
    let mut writer = BufWriter::new(file);
    field
        .write_csv(&mut writer)
        .and_then(|_| writer.flush())
        .map_err(|e| Error::Validation(format!("cannot write {}: {e}", out.display())))
}

#[derive(Serialize)]
struct ConvolveReport {
    mode: &'static str,
    eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    semiconcavity_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worst_second_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    within_bound: Option<bool>,
}

/// Worst signed axis second difference of `field` over nodes whose whole
/// three-point axis stencil stays on carried (non Outside) nodes.
fn worst_second_difference(field: &GridFn, sign: f64) -> f64 {
    let grid = field.grid();
    let h2 = grid.h() * grid.h();
    let carried = |ix: i64, iy: i64| {
        ix >= 0
            && iy >= 0
            && (ix as usize) < grid.nx()
            && (iy as usize) < grid.ny()
            && grid.mask_at(ix as usize, iy as usize) != Mask::Outside
    };
    let mut worst = f64::NEG_INFINITY;
    for iy in 0..grid.ny() {
        for ix in 0..grid.nx() {
            let (jx, jy) = (ix as i64, iy as i64);
            if carried(jx - 1, jy) && carried(jx, jy) && carried(jx + 1, jy) {
                let d2 = field.value(ix + 1, iy) - 2.0 * field.value(ix, iy)
                    + field.value(ix - 1, iy);
                worst = worst.max(sign * d2 / h2);
            }
            if carried(jx, jy - 1) && carried(jx, jy) && carried(jx, jy + 1) {
                let d2 = field.value(ix, iy + 1) - 2.0 * field.value(ix, iy)
                    + field.value(ix, iy - 1);
                worst = worst.max(sign * d2 / h2);
            }
        }
    }
    worst
}

fn convolve(input: &Path, mode: ConvolveMode, eps: f64, out: &Path) -> Result<()> {
    let file = fs::File::open(input).map_err(|e| {
        Error::Validation(format!("cannot read grid {}: {e}", input.display()))
    })?;
    let u = GridFn::read_csv(BufReader::new(file))?;
    let (name, transformed, check) = match mode {
        ConvolveMode::Inf => {
            let v = inf_convolution(&u, eps)?;
            let worst = worst_second_difference(&v, 1.0);
            (("inf"), v, Some(worst))
        }
        ConvolveMode::Sup => {
            let v = sup_convolution(&u, eps)?;
            let worst = worst_second_difference(&v, -1.0);
            (("sup"), v, Some(worst))
        }
        ConvolveMode::Mollify => (("mollify"), mollify(&u, eps)?, None),
    };
    write_grid_csv(&transformed, out)?;
    let report = match check {
        Some(worst) => {
            let bound = 1.0 / eps;
            ConvolveReport {
                mode: name,
                eps,
                semiconcavity_bound: Some(bound),
                worst_second_difference: Some(worst),
                within_bound: Some(worst <= bound + 1e-9),
            }
        }
        None => ConvolveReport {
            mode: name,
            eps,
            semiconcavity_bound: None,
            worst_second_difference: None,
            within_bound: None,
        },
    };
    print_json(&report)
}
