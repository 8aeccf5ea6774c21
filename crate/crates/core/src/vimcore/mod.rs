//! Variational iteration on fractional polynomials in `t`.
//!
//! For `cD_t^α u = u_xx + A u^p u_x` the correction functional with the
//! multiplier `-(t-τ)^(α-1)/Γ(α)` collapses to
//!
//! ```text
//! m = 1 (0 < α ≤ 1):  u_{n+1} = u_n - I^α R(u_n)
//! m = 2 (1 < α ≤ 2):  u_{n+1} = u_n - (α-1) I^α R(u_n)
//! R(u) = cD^α u - u_xx - A u^p u_x
//! ```
//!
//! starting from `u_0 = g` (m = 1) or `u_0 = g + t·h` (m = 2).

mod poly;

use thiserror::Error;

use crate::expr::{Expr, ExprError, NormalForm, Number, Rational};
use crate::fracops::{FracError, Lattice, LatticeExponent};

pub use poly::{FracPoly, DEFAULT_TERM_CAP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VimError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error("term cap exceeded: {size} monomials > cap {cap}")]
    TermCap { size: usize, cap: usize },
    #[error("fractional polynomials with different alpha ({left} vs {right})")]
    AlphaMismatch { left: f64, right: f64 },
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("series evaluated at negative time t = {t}")]
    NegativeTime { t: f64 },
    #[error("iterate u_{index}: {source}")]
    Iterate {
        index: usize,
        #[source]
        source: Box<VimError>,
    },
}

/// Regime of the fractional order: `m = ⌈α⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// 0 < α ≤ 1, one initial condition.
    Subdiffusive,
    /// 1 < α ≤ 2, position and velocity.
    Superdiffusive,
}

impl Regime {
    pub fn of(alpha: f64) -> Regime {
        if alpha <= 1.0 {
            Regime::Subdiffusive
        } else {
            Regime::Superdiffusive
        }
    }

    pub fn m(self) -> u32 {
        match self {
            Regime::Subdiffusive => 1,
            Regime::Superdiffusive => 2,
        }
    }
}

/// `cD_t^α u = u_xx + A u^p u_x`, `u(x,0) = g`, and `u_t(x,0) = h` when
/// α > 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    alpha: f64,
    a: f64,
    p: f64,
    g: Expr,
    h: Option<Expr>,
}

impl ProblemSpec {
    /// Validates `0 < α ≤ 2`, `p > 0`, finite `A`, and that `h` is given
    /// exactly when α > 1. A non-integer `p` is accepted here (the
    /// finite-difference solver handles it) but refused by [`vim_solve`].
    pub fn new(alpha: f64, a: f64, p: f64, g: Expr, h: Option<Expr>) -> Result<ProblemSpec, VimError> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(VimError::InvalidSpec(format!("alpha = {alpha} outside (0, 2]")));
        }
        if !a.is_finite() {
            return Err(VimError::InvalidSpec(format!("A = {a} is not finite")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(VimError::InvalidSpec(format!("p = {p} must be positive")));
        }
        match (Regime::of(alpha), &h) {
            (Regime::Subdiffusive, Some(_)) => {
                return Err(VimError::InvalidSpec(format!(
                    "initial velocity h given but alpha = {alpha} <= 1 takes only u(x,0)"
                )))
            }
            (Regime::Superdiffusive, None) => {
                return Err(VimError::InvalidSpec(format!(
                    "alpha = {alpha} > 1 needs the initial velocity h"
                )))
            }
            _ => {}
        }
        Ok(ProblemSpec { alpha, a, p, g, h })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn h(&self) -> Option<&Expr> {
        self.h.as_ref()
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.alpha)
    }

    /// `p` as the integer power used by the symbolic engine.
    pub fn integer_p(&self) -> Result<u32, VimError> {
        if self.p.fract() == 0.0 && self.p >= 1.0 && self.p <= u32::MAX as f64 {
            Ok(self.p as u32)
        } else {
            Err(VimError::InvalidSpec(format!(
                "p = {} is not a positive integer; u^p is not a fractional polynomial \
                 (only the finite-difference solver supports it)",
                self.p
            )))
        }
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.alpha).expect("validated alpha")
    }

    /// The factor in front of `I^α R`: 1 for m = 1, α-1 for m = 2 (exact
    /// when α is a detected rational).
    pub fn correction_factor(&self) -> Number {
        match self.regime() {
            Regime::Subdiffusive => Number::ONE,
            Regime::Superdiffusive => match self.lattice().rational_alpha() {
                Some((p, q)) => Number::Rational(Rational::new(p as i128 - q as i128, q as i128)),
                None => Number::Float(self.alpha - 1.0),
            },
        }
    }

    /// `u_0`: `g`, or `g + t·h` when α > 1.
    pub fn initial_iterate(&self) -> Result<FracPoly, VimError> {
        let lattice = self.lattice();
        let u0 = FracPoly::constant(lattice, NormalForm::from_expr(&self.g));
        match &self.h {
            Some(h) => {
                let velocity =
                    FracPoly::monomial(lattice, LatticeExponent::new(1, 0), NormalForm::from_expr(h))?;
                u0.add(&velocity)
            }
            None => Ok(u0),
        }
    }
}

/// `cD^α u - u_xx - A u^p u_x`.
pub fn residual(u: &FracPoly, spec: &ProblemSpec) -> Result<FracPoly, VimError> {
    let mut r = u.caputo_t()?.sub(&u.spatial_derivative(2)?)?;
    let a = Number::from_real(spec.a());
    if !a.is_zero() {
        let p = spec.integer_p()?;
        let nonlinear = u.power(p)?.multiply(&u.spatial_derivative(1)?)?;
        r = r.sub(&nonlinear.scale(a))?;
    }
    Ok(r)
}

/// One correction step.
pub fn vim_step(u: &FracPoly, spec: &ProblemSpec) -> Result<FracPoly, VimError> {
    let correction = residual(u, spec)?.rl_integral_t()?;
    u.sub(&correction.scale(spec.correction_factor()))
}

/// `[u_0, ..., u_n]`.
pub fn vim_solve(spec: &ProblemSpec, n_iter: usize) -> Result<Vec<FracPoly>, VimError> {
    vim_solve_with_cap(spec, n_iter, DEFAULT_TERM_CAP)
}

pub fn vim_solve_with_cap(spec: &ProblemSpec, n_iter: usize, cap: usize) -> Result<Vec<FracPoly>, VimError> {
    let wrap = |index: usize| move |e: VimError| VimError::Iterate { index, source: Box::new(e) };
    let u0 = spec.initial_iterate().map_err(wrap(0))?.with_cap(cap);
    let mut out = vec![u0];
    if n_iter > 0 {
        // fail before any work if the engine cannot represent u^p
        if spec.a() != 0.0 {
            spec.integer_p().map_err(wrap(1))?;
        }
    }
    for k in 0..n_iter {
        let next = vim_step(&out[k], spec).map_err(wrap(k + 1))?;
        out.push(next);
    }
    Ok(out)
}
