//! JSON operator specifications, shared between the library and the CLI.
//!
//! A spec names one body kind plus its data; `compile` turns it into the
//! matching runtime body. The dominative exponent accepts the string
//! "inf" since JSON has no infinity literal.

use serde::{Deserialize, Serialize};

use crate::convbody::{EllipticityClass, GeneralBody};
use crate::error::{Error, Result};
use crate::rotinv::{self, RotInvBody};
use crate::symmat::SymMat;

/// Dominative exponent: a finite number or the string "inf".
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PSpec {
    Number(f64),
    Word(String),
}

impl PSpec {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            PSpec::Number(v) => Ok(*v),
            PSpec::Word(w) if w == "inf" => Ok(f64::INFINITY),
            PSpec::Word(w) => Err(Error::Parse(format!(
                "p must be a number or \"inf\", got {w:?}"
            ))),
        }
    }

    pub fn from_value(p: f64) -> PSpec {
        if p.is_infinite() {
            PSpec::Word("inf".into())
        } else {
            PSpec::Number(p)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    General {
        n: usize,
        generators: Vec<Vec<f64>>,
    },
    RotInv {
        n: usize,
        orbit_generators: Vec<Vec<f64>>,
    },
    Pucci {
        n: usize,
        lambda: f64,
        #[serde(rename = "Lambda")]
        big_lambda: f64,
    },
    Dominative {
        n: usize,
        p: PSpec,
    },
    Singleton {
        n: usize,
        a: Vec<f64>,
    },
    Ball {
        n: usize,
        delta: f64,
    },
}

/// Compiled form: either a general generator list or a rotationally
/// invariant body with its structural toolbox.
#[derive(Debug, Clone)]
pub enum Body {
    General(GeneralBody),
    RotInv(RotInvBody),
}

impl Body {
    pub fn n(&self) -> usize {
        match self {
            Body::General(b) => b.n(),
            Body::RotInv(b) => b.n(),
        }
    }

    pub fn eval(&self, x: &SymMat) -> Result<f64> {
        match self {
            Body::General(b) => b.support(x),
            Body::RotInv(b) => rotinv::eval(b, x),
        }
    }

    pub fn classify(&self) -> EllipticityClass {
        match self {
            Body::General(b) => b.classify_ellipticity(),
            Body::RotInv(b) => rotinv::classify_ellipticity(b),
        }
    }

    pub fn nondegenerate(&self) -> bool {
        match self {
            Body::General(b) => b.nondegenerate(),
            Body::RotInv(b) => rotinv::nondegenerate(b),
        }
    }

    pub fn as_rotinv(&self) -> Option<&RotInvBody> {
        match self {
            Body::RotInv(b) => Some(b),
            Body::General(_) => None,
        }
    }
}

/// Parses a JSON body specification, reporting serde's line/column
/// diagnostics on failure.
pub fn parse(json: &str) -> Result<BodySpec> {
    serde_json::from_str(json).map_err(|e| Error::Parse(format!("body spec: {e}")))
}

pub fn to_json(spec: &BodySpec) -> String {
    serde_json::to_string(spec).expect("body specs always serialize")
}

pub fn compile(spec: &BodySpec) -> Result<Body> {
    match spec {
        BodySpec::General { n, generators } => {
            let mats = generators
                .iter()
                .map(|g| SymMat::new(*n, g.clone()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Body::General(GeneralBody::new(*n, mats)?))
        }
        BodySpec::RotInv {
            n,
            orbit_generators,
        } => Ok(Body::RotInv(RotInvBody::orbit_hull(
            *n,
            orbit_generators.clone(),
        )?)),
        BodySpec::Pucci {
            n,
            lambda,
            big_lambda,
        } => Ok(Body::RotInv(RotInvBody::pucci(*n, *lambda, *big_lambda)?)),
        BodySpec::Dominative { n, p } => {
            Ok(Body::RotInv(RotInvBody::dominative(*n, p.resolve()?)?))
        }
        BodySpec::Singleton { n, a } => {
            if a.len() != *n {
                return Err(Error::DimensionMismatch(format!(
                    "singleton spec: n = {n} but a has {} entries",
                    a.len()
                )));
            }
            Ok(Body::RotInv(RotInvBody::singleton(a.clone())?))
        }
        BodySpec::Ball { n, delta } => Ok(Body::RotInv(RotInvBody::ball(*n, *delta)?)),
    }
}
