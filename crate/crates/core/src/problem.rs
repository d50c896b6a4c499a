//! The continuous problem
//!
//! ```text
//! eps (u_t - u_xx) + b(x,t) u = f(x,t)   on (0,1) x (0,T]
//! u(0,t) = gL(t),  u(1,t) = gR(t),  u(x,0) = phi(x)
//! ```
//!
//! with a jump `phi(0+) != gL(0)` at the corner `(0,0)`. The jump is removed by
//! writing `u = A0 z0 + y`, which leaves a problem for `y` with continuous data.

use thiserror::Error;

use crate::expr::{EvalError, Expression, ParseError, VarSet};
use crate::specfun::{self, DomainError, SingularParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
    #[error("b must stay above beta = {beta}; sampled minimum is {min_b}")]
    BetaAboveCoefficient { beta: f64, min_b: f64 },
    #[error("b_x(0,0) must vanish, got {0}")]
    CornerGradient(f64),
    #[error("derivative `{0}` was not supplied")]
    MissingDerivative(&'static str),
    #[error("failed to parse `{field}`: {source}")]
    Parse {
        field: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Optional derivative expressions used by the amplitude and compatibility diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Derivatives {
    pub gl_t: Option<Expression>,
    pub gl_tt: Option<Expression>,
    pub gr_t: Option<Expression>,
    pub gr_tt: Option<Expression>,
    pub phi_x: Option<Expression>,
    pub phi_xx: Option<Expression>,
    pub phi_xxxx: Option<Expression>,
    pub b_t: Option<Expression>,
    pub b_x: Option<Expression>,
    pub b_xx: Option<Expression>,
    pub b_xt: Option<Expression>,
    pub b_xxx: Option<Expression>,
    pub f_t: Option<Expression>,
    pub f_xx: Option<Expression>,
}

/// Coefficient fields of the problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub b: Expression,
    pub f: Expression,
    pub gl: Expression,
    pub gr: Expression,
    pub phi: Expression,
    pub derivatives: Derivatives,
}

impl Coefficients {
    /// Parses the five data fields; `b` and `f` may use `x` and `t`, the boundary traces `t`,
    /// and `phi` only `x`.
    pub fn parse(b: &str, f: &str, gl: &str, gr: &str, phi: &str) -> Result<Self, ProblemError> {
        Ok(Coefficients {
            b: parse_field("b", b, VarSet::XT)?,
            f: parse_field("f", f, VarSet::XT)?,
            gl: parse_field("gL", gl, VarSet::T)?,
            gr: parse_field("gR", gr, VarSet::T)?,
            phi: parse_field("phi", phi, VarSet::X)?,
            derivatives: Derivatives::default(),
        })
    }
}

pub fn parse_field(
    field: &'static str,
    src: &str,
    vars: VarSet,
) -> Result<Expression, ProblemError> {
    Expression::parse(src, vars).map_err(|source| ProblemError::Parse { field, source })
}

/// Samples `b` on a `samples x samples` grid over `[0,1] x [0,T]` and returns the minimum.
pub fn sampled_min(b: &Expression, t_final: f64, samples: usize) -> Result<f64, EvalError> {
    let last = (samples - 1) as f64;
    let mut min = f64::INFINITY;
    for i in 0..samples {
        let x = i as f64 / last;
        for j in 0..samples {
            let t = t_final * j as f64 / last;
            min = min.min(b.eval(x, t)?);
        }
    }
    Ok(min)
}

/// `beta` used when none is given: 0.999 times the minimum of `b` on a 201 x 201 grid.
pub fn default_beta(b: &Expression, t_final: f64) -> Result<f64, EvalError> {
    Ok(0.999 * sampled_min(b, t_final, 201)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    eps: f64,
    beta: f64,
    t_final: f64,
    coeffs: Coefficients,
}

impl ProblemSpec {
    /// Validates and builds the problem. With `beta = None` the default sampling rule applies.
    ///
    /// `b >= beta` is required on a 101 x 101 sample grid; equality is allowed so that
    /// `beta = b(0,0)` can be pinned for problems whose minimum sits at the corner.
    pub fn new(
        eps: f64,
        beta: Option<f64>,
        t_final: f64,
        coeffs: Coefficients,
    ) -> Result<Self, ProblemError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(ProblemError::Parameter("eps must be positive"));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(ProblemError::Parameter("T must be positive"));
        }
        let beta = match beta {
            Some(beta) => beta,
            None => default_beta(&coeffs.b, t_final)?,
        };
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(ProblemError::Parameter("beta must be positive"));
        }
        let min_b = sampled_min(&coeffs.b, t_final, 101)?;
        if min_b < beta {
            return Err(ProblemError::BetaAboveCoefficient { beta, min_b });
        }
        if let Some(b_x) = &coeffs.derivatives.b_x {
            let g = b_x.eval(0.0, 0.0)?;
            if g.abs() > 1e-12 {
                return Err(ProblemError::CornerGradient(g));
            }
        }
        Ok(ProblemSpec {
            eps,
            beta,
            t_final,
            coeffs,
        })
    }

    /// The test problem with `b = 1 + x^2 + t`, `f = exp(-x)`, `phi = 1 - x`, `gL = 0`,
    /// `gR = -t^2` on `(0,1) x (0,1]`, with `beta = 1`.
    pub fn example23(eps: f64) -> Result<Self, ProblemError> {
        let mut coeffs = Coefficients::parse("1 + x^2 + t", "exp(-x)", "0", "-t^2", "1 - x")?;
        let xt = VarSet::XT;
        let d = &mut coeffs.derivatives;
        d.gl_t = Some(parse_field("gL'", "0", VarSet::T)?);
        d.gl_tt = Some(parse_field("gL''", "0", VarSet::T)?);
        d.gr_t = Some(parse_field("gR'", "-2*t", VarSet::T)?);
        d.gr_tt = Some(parse_field("gR''", "-2", VarSet::T)?);
        d.phi_x = Some(parse_field("phi'", "-1", VarSet::X)?);
        d.phi_xx = Some(parse_field("phi''", "0", VarSet::X)?);
        d.phi_xxxx = Some(parse_field("phi''''", "0", VarSet::X)?);
        d.b_t = Some(parse_field("b_t", "1", xt)?);
        d.b_x = Some(parse_field("b_x", "2*x", xt)?);
        d.b_xx = Some(parse_field("b_xx", "2", xt)?);
        d.b_xt = Some(parse_field("b_xt", "0", xt)?);
        d.b_xxx = Some(parse_field("b_xxx", "0", xt)?);
        d.f_t = Some(parse_field("f_t", "0", xt)?);
        d.f_xx = Some(parse_field("f_xx", "exp(-x)", xt)?);
        Self::new(eps, Some(1.0), 1.0, coeffs)
    }

    /// Same data with a different `eps`.
    pub fn with_eps(&self, eps: f64) -> Result<Self, ProblemError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(ProblemError::Parameter("eps must be positive"));
        }
        Ok(ProblemSpec {
            eps,
            ..self.clone()
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn b(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.coeffs.b.eval(x, t)
    }

    pub fn f(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.coeffs.f.eval(x, t)
    }

    pub fn gl(&self, t: f64) -> Result<f64, EvalError> {
        self.coeffs.gl.eval(0.0, t)
    }

    pub fn gr(&self, t: f64) -> Result<f64, EvalError> {
        self.coeffs.gr.eval(1.0, t)
    }

    pub fn phi(&self, x: f64) -> Result<f64, EvalError> {
        self.coeffs.phi.eval(x, 0.0)
    }

    pub fn b00(&self) -> Result<f64, EvalError> {
        self.b(0.0, 0.0)
    }

    /// Parameters of the corner functions `z_n`.
    pub fn singular_params(&self) -> Result<SingularParams, ProblemError> {
        Ok(SingularParams::new(self.eps, self.b00()?)?)
    }

    fn derivative(
        &self,
        name: &'static str,
        pick: impl Fn(&Derivatives) -> &Option<Expression>,
        x: f64,
        t: f64,
    ) -> Result<f64, ProblemError> {
        match pick(&self.coeffs.derivatives) {
            Some(e) => Ok(e.eval(x, t)?),
            None => Err(ProblemError::MissingDerivative(name)),
        }
    }
}

/// Strengths of the corner singular functions `z0`, `z1`, `z2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub a0: f64,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
}

impl Amplitudes {
    /// `a0` always; `a1`, `a2` when the needed derivatives are available.
    pub fn compute(p: &ProblemSpec) -> Result<Self, ProblemError> {
        let a0 = amplitude_a0(p)?;
        let a1 = optional(amplitude_a1(p, a0))?;
        let a2 = match a1 {
            Some(a1) => optional(amplitude_a2(p, a0, a1))?,
            None => None,
        };
        Ok(Amplitudes { a0, a1, a2 })
    }

    /// `(a0, eps a1, eps^2 a2)`, each expected to be O(1).
    pub fn scaled(&self, eps: f64) -> (f64, Option<f64>, Option<f64>) {
        (
            self.a0,
            self.a1.map(|a| eps * a),
            self.a2.map(|a| eps * eps * a),
        )
    }
}

fn optional(r: Result<f64, ProblemError>) -> Result<Option<f64>, ProblemError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(ProblemError::MissingDerivative(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Size of the corner jump, `A0 = gL(0) - phi(0+)`.
pub fn amplitude_a0(p: &ProblemSpec) -> Result<f64, ProblemError> {
    Ok(p.gl(0.0)? - p.phi(0.0)?)
}

/// `A1` restoring first-order compatibility at `(0,0)`:
/// `f(0,0) = eps (gL'(0) - A1 - phi''(0)) + b(0,0) (A0 + phi(0))`.
pub fn amplitude_a1(p: &ProblemSpec, a0: f64) -> Result<f64, ProblemError> {
    let gl_t = p.derivative("gL'", |d| &d.gl_t, 0.0, 0.0)?;
    let phi_xx = p.derivative("phi''", |d| &d.phi_xx, 0.0, 0.0)?;
    let b00 = p.b00()?;
    Ok(gl_t - phi_xx + (b00 * (a0 + p.phi(0.0)?) - p.f(0.0, 0.0)?) / p.eps)
}

/// `A2` restoring second-order compatibility at `(0,0)`; the identity is linear in `A2`
/// with coefficient `-2 eps`.
pub fn amplitude_a2(p: &ProblemSpec, a0: f64, a1: f64) -> Result<f64, ProblemError> {
    let eps = p.eps;
    let gl_t = p.derivative("gL'", |d| &d.gl_t, 0.0, 0.0)?;
    let gl_tt = p.derivative("gL''", |d| &d.gl_tt, 0.0, 0.0)?;
    let phi_xx = p.derivative("phi''", |d| &d.phi_xx, 0.0, 0.0)?;
    let phi_xxxx = p.derivative("phi''''", |d| &d.phi_xxxx, 0.0, 0.0)?;
    let b_t = p.derivative("b_t", |d| &d.b_t, 0.0, 0.0)?;
    let b_xx = p.derivative("b_xx", |d| &d.b_xx, 0.0, 0.0)?;
    let f_t = p.derivative("f_t", |d| &d.f_t, 0.0, 0.0)?;
    let f_xx = p.derivative("f_xx", |d| &d.f_xx, 0.0, 0.0)?;
    let b00 = p.b00()?;
    let phi0 = p.phi(0.0)?;
    let others = eps * (gl_tt - phi_xxxx) + (a1 + gl_t) * b00
        - 2.0 * a0 * (b_t + b_xx)
        - a0 * b00 * b00 / eps
        + b_t * (p.gl(0.0)? - a0)
        + b_xx * phi0
        + b00 * phi_xx;
    Ok((others - (f_t + f_xx)) / (2.0 * eps))
}

/// Relative tolerance for flagging a compatibility condition as satisfied.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

/// One corner identity `lhs = rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition {
    Evaluated {
        lhs: f64,
        rhs: f64,
    },
    /// A derivative needed by the condition was not supplied.
    Missing(&'static str),
}

impl Condition {
    fn from(r: Result<(f64, f64), ProblemError>) -> Result<Self, ProblemError> {
        match r {
            Ok((lhs, rhs)) => Ok(Condition::Evaluated { lhs, rhs }),
            Err(ProblemError::MissingDerivative(name)) => Ok(Condition::Missing(name)),
            Err(e) => Err(e),
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match *self {
            Condition::Evaluated { lhs, rhs } => Some(lhs - rhs),
            Condition::Missing(_) => None,
        }
    }

    /// `Some(|lhs - rhs| <= tol (1 + |rhs|))`, or `None` when it could not be evaluated.
    pub fn satisfied(&self) -> Option<bool> {
        match *self {
            Condition::Evaluated { lhs, rhs } => {
                Some((lhs - rhs).abs() <= COMPATIBILITY_TOL * (1.0 + rhs.abs()))
            }
            Condition::Missing(_) => None,
        }
    }
}

/// Compatibility conditions of orders zero to two at both bottom corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityReport {
    /// `phi(0+) = gL(0)`
    pub level0_left: Condition,
    /// `phi(1-) = gR(0)`
    pub level0_right: Condition,
    /// `eps (gL'(0) - phi''(0)) + b(0,0) phi(0) = f(0,0)`
    pub first_left: Condition,
    /// `eps (gR'(0) - phi''(1)) + b(1,0) gR(0) = f(1,0)`
    pub first_right: Condition,
    /// Second order at `(0,0)` in expanded form.
    pub second_left: Condition,
    /// Second order at `(1,0)`.
    pub second_right: Condition,
}

impl CompatibilityReport {
    pub fn conditions(&self) -> [(&'static str, Condition); 6] {
        [
            ("level0_left", self.level0_left),
            ("level0_right", self.level0_right),
            ("first_left", self.first_left),
            ("first_right", self.first_right),
            ("second_left", self.second_left),
            ("second_right", self.second_right),
        ]
    }
}

pub fn check_compatibility(p: &ProblemSpec) -> Result<CompatibilityReport, ProblemError> {
    let eps = p.eps;
    let level0_left = Condition::from(Ok((p.phi(0.0)?, p.gl(0.0)?)))?;
    let level0_right = Condition::from(Ok((p.phi(1.0)?, p.gr(0.0)?)))?;

    let first_left = Condition::from((|| {
        let gl_t = p.derivative("gL'", |d| &d.gl_t, 0.0, 0.0)?;
        let phi_xx = p.derivative("phi''", |d| &d.phi_xx, 0.0, 0.0)?;
        let lhs = eps * (gl_t - phi_xx) + p.b(0.0, 0.0)? * p.phi(0.0)?;
        Ok((lhs, p.f(0.0, 0.0)?))
    })())?;

    let first_right = Condition::from((|| {
        let gr_t = p.derivative("gR'", |d| &d.gr_t, 0.0, 0.0)?;
        let phi_xx = p.derivative("phi''", |d| &d.phi_xx, 1.0, 0.0)?;
        let lhs = eps * (gr_t - phi_xx) + p.b(1.0, 0.0)? * p.gr(0.0)?;
        Ok((lhs, p.f(1.0, 0.0)?))
    })())?;

    let second_left = Condition::from((|| {
        let lhs = p.derivative("f_t", |d| &d.f_t, 0.0, 0.0)?
            + p.derivative("f_xx", |d| &d.f_xx, 0.0, 0.0)?;
        let b00 = p.b(0.0, 0.0)?;
        let rhs = eps * p.derivative("gL''", |d| &d.gl_tt, 0.0, 0.0)?
            + b00 * p.derivative("gL'", |d| &d.gl_t, 0.0, 0.0)?
            + p.derivative("b_t", |d| &d.b_t, 0.0, 0.0)? * p.gl(0.0)?
            - eps * p.derivative("phi''''", |d| &d.phi_xxxx, 0.0, 0.0)?
            + 2.0
                * p.derivative("b_x", |d| &d.b_x, 0.0, 0.0)?
                * p.derivative("phi'", |d| &d.phi_x, 0.0, 0.0)?
            + p.derivative("b_xx", |d| &d.b_xx, 0.0, 0.0)? * p.phi(0.0)?
            + b00 * p.derivative("phi''", |d| &d.phi_xx, 0.0, 0.0)?;
        Ok((lhs, rhs))
    })())?;

    let second_right = Condition::from((|| {
        let b10 = p.b(1.0, 0.0)?;
        let lhs = eps
            * (p.derivative("gR''", |d| &d.gr_tt, 0.0, 0.0)?
                - p.derivative("phi''''", |d| &d.phi_xxxx, 1.0, 0.0)?)
            + b10
                * (p.derivative("gR'", |d| &d.gr_t, 0.0, 0.0)?
                    + p.derivative("phi''", |d| &d.phi_xx, 1.0, 0.0)?)
            + p.derivative("b_t", |d| &d.b_t, 1.0, 0.0)? * p.gr(0.0)?
            + 2.0
                * p.derivative("b_x", |d| &d.b_x, 1.0, 0.0)?
                * p.derivative("phi'", |d| &d.phi_x, 1.0, 0.0)?
            + p.derivative("b_xx", |d| &d.b_xx, 1.0, 0.0)? * p.phi(1.0)?;
        let rhs = p.derivative("f_t", |d| &d.f_t, 1.0, 0.0)?
            + p.derivative("f_xx", |d| &d.f_xx, 1.0, 0.0)?;
        Ok((lhs, rhs))
    })())?;

    Ok(CompatibilityReport {
        level0_left,
        level0_right,
        first_left,
        first_right,
        second_left,
        second_right,
    })
}

/// Data of the problem for `y = u - A0 z0`:
///
/// ```text
/// L y = f - A0 (b - b(0,0)) z0
/// y(0,t) = gL(t) - A0 exp(-b(0,0) t/eps),  y(1,t) = gR(t) - A0 z0(1,t),  y(x,0) = phi(x)
/// ```
#[derive(Debug, Clone, Copy)]
pub struct YProblem<'a> {
    problem: &'a ProblemSpec,
    a0: f64,
    params: SingularParams,
}

impl<'a> YProblem<'a> {
    pub fn new(problem: &'a ProblemSpec) -> Result<Self, ProblemError> {
        let a0 = amplitude_a0(problem)?;
        Self::with_amplitude(problem, a0)
    }

    pub fn with_amplitude(problem: &'a ProblemSpec, a0: f64) -> Result<Self, ProblemError> {
        Ok(YProblem {
            problem,
            a0,
            params: problem.singular_params()?,
        })
    }

    pub fn problem(&self) -> &'a ProblemSpec {
        self.problem
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn params(&self) -> &SingularParams {
        &self.params
    }

    /// Right-hand side given `b(x,t)` already evaluated.
    pub fn rhs_with_b(&self, x: f64, t: f64, b: f64) -> Result<f64, ProblemError> {
        let f = self.problem.f(x, t)?;
        if self.a0 == 0.0 {
            return Ok(f);
        }
        Ok(f - self.a0 * (b - self.params.b00()) * specfun::z0(x, t, &self.params)?)
    }

    pub fn rhs(&self, x: f64, t: f64) -> Result<f64, ProblemError> {
        self.rhs_with_b(x, t, self.problem.b(x, t)?)
    }

    pub fn left(&self, t: f64) -> Result<f64, ProblemError> {
        let z = specfun::z0(0.0, t, &self.params)?;
        Ok(self.problem.gl(t)? - self.a0 * z)
    }

    pub fn right(&self, t: f64) -> Result<f64, ProblemError> {
        let z = specfun::z0(1.0, t, &self.params)?;
        Ok(self.problem.gr(t)? - self.a0 * z)
    }

    pub fn initial(&self, x: f64) -> Result<f64, ProblemError> {
        Ok(self.problem.phi(x)?)
    }
}
