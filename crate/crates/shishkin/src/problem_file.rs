//! JSON problem files and the built-in problem.
//!
//! ```json
//! {
//!   "eps": "2^-12",
//!   "beta": 1.0,
//!   "T": 1.0,
//!   "b": "1 + x^2 + t",
//!   "f": "exp(-x)",
//!   "gL": "0",
//!   "gR": "-t^2",
//!   "phi": "1 - x",
//!   "derivatives": { "gR_t": "-2*t", "phi_xx": "0" }
//! }
//! ```
//!
//! `eps` is a number or a `"2^-k"` literal; `beta` is optional.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use shishkin_core::expr::VarSet;
use shishkin_core::problem::{parse_field, Coefficients, Derivatives, ProblemSpec};

use crate::error::CliError;

/// Name accepted in place of a problem file path.
pub const BUILTIN: &str = "example23";

/// `eps` used for the built-in problem when none is given.
pub const BUILTIN_EPS: f64 = 1.0 / 4096.0;

/// Parses `"2^-k"` (any integer exponent) or a decimal literal.
pub fn parse_eps(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let value = match s.strip_prefix("2^") {
        Some(exp) => {
            let k: i32 = exp
                .trim_start_matches('(')
                .trim_end_matches(')')
                .parse()
                .map_err(|_| CliError::Config(format!("bad eps literal '{s}'")))?;
            2f64.powi(k)
        }
        None => s
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("bad eps literal '{s}'")))?,
    };
    if !(value > 0.0 && value.is_finite()) {
        return Err(CliError::Config(format!("eps must be positive, got '{s}'")));
    }
    Ok(value)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NumberOrLiteral {
    Number(f64),
    Literal(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    eps: NumberOrLiteral,
    beta: Option<f64>,
    #[serde(rename = "T", default = "unit")]
    t_final: f64,
    b: String,
    f: String,
    #[serde(rename = "gL")]
    gl: String,
    #[serde(rename = "gR")]
    gr: String,
    phi: String,
    #[serde(default)]
    derivatives: RawDerivatives,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDerivatives {
    #[serde(rename = "gL_t")]
    gl_t: Option<String>,
    #[serde(rename = "gL_tt")]
    gl_tt: Option<String>,
    #[serde(rename = "gR_t")]
    gr_t: Option<String>,
    #[serde(rename = "gR_tt")]
    gr_tt: Option<String>,
    phi_x: Option<String>,
    phi_xx: Option<String>,
    phi_xxxx: Option<String>,
    b_t: Option<String>,
    b_x: Option<String>,
    b_xx: Option<String>,
    b_xt: Option<String>,
    b_xxx: Option<String>,
    f_t: Option<String>,
    f_xx: Option<String>,
}

fn optional(
    field: &'static str,
    src: &Option<String>,
    vars: VarSet,
) -> Result<Option<shishkin_core::expr::Expression>, CliError> {
    src.as_deref()
        .map(|s| parse_field(field, s, vars))
        .transpose()
        .map_err(CliError::from)
}

impl RawDerivatives {
    fn parse(&self) -> Result<Derivatives, CliError> {
        let (t, x, xt) = (VarSet::T, VarSet::X, VarSet::XT);
        Ok(Derivatives {
            gl_t: optional("gL_t", &self.gl_t, t)?,
            gl_tt: optional("gL_tt", &self.gl_tt, t)?,
            gr_t: optional("gR_t", &self.gr_t, t)?,
            gr_tt: optional("gR_tt", &self.gr_tt, t)?,
            phi_x: optional("phi_x", &self.phi_x, x)?,
            phi_xx: optional("phi_xx", &self.phi_xx, x)?,
            phi_xxxx: optional("phi_xxxx", &self.phi_xxxx, x)?,
            b_t: optional("b_t", &self.b_t, xt)?,
            b_x: optional("b_x", &self.b_x, xt)?,
            b_xx: optional("b_xx", &self.b_xx, xt)?,
            b_xt: optional("b_xt", &self.b_xt, xt)?,
            b_xxx: optional("b_xxx", &self.b_xxx, xt)?,
            f_t: optional("f_t", &self.f_t, xt)?,
            f_xx: optional("f_xx", &self.f_xx, xt)?,
        })
    }
}

/// Parses a problem from JSON text.
pub fn problem_from_json(text: &str) -> Result<ProblemSpec, CliError> {
    let raw: RawProblem =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("problem file: {e}")))?;
    let eps = match &raw.eps {
        NumberOrLiteral::Number(v) => parse_eps(&v.to_string())?,
        NumberOrLiteral::Literal(s) => parse_eps(s)?,
    };
    let mut coeffs = Coefficients::parse(&raw.b, &raw.f, &raw.gl, &raw.gr, &raw.phi)?;
    coeffs.derivatives = raw.derivatives.parse()?;
    Ok(ProblemSpec::new(eps, raw.beta, raw.t_final, coeffs)?)
}

/// The built-in problem by name, or a JSON file.
pub fn load_problem(source: &str) -> Result<ProblemSpec, CliError> {
    if source == BUILTIN {
        return Ok(ProblemSpec::example23(BUILTIN_EPS)?);
    }
    let path = Path::new(source);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    problem_from_json(&text)
}

/// Applies `eps` and `beta` overrides.
pub fn with_overrides(
    p: ProblemSpec,
    eps: Option<f64>,
    beta: Option<f64>,
) -> Result<ProblemSpec, CliError> {
    let p = match eps {
        Some(eps) => p.with_eps(eps)?,
        None => p,
    };
    match beta {
        Some(beta) => Ok(ProblemSpec::new(
            p.eps(),
            Some(beta),
            p.t_final(),
            p.coefficients().clone(),
        )?),
        None => Ok(p),
    }
}
