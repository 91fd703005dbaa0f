//! Explicit constants for the norm inequalities.
//!
//! Three layers: the dominance constant `max(1, v_n d^n)` controlling how
//! `Phi(f, s)` for one cap bounds another; per-space operator constants
//! (maximal and singular) at fixed Morrey parameters; and the reduction
//! constant that combines the two into a bound on the grand grand norm of
//! an operator image. `c0` and `c` scale the per-space constants and can be
//! calibrated from measured operator ratios; `big_c0` scales the dominance
//! side the same way.

use thiserror::Error;

use crate::grid::ball_measure;
use crate::norms::SpaceParams;
use crate::operators::OperatorKind;

#[derive(Debug, Error, PartialEq)]
pub enum ConstantError {
    #[error("p must exceed 1, got {p}")]
    BadP { p: f64 },
    #[error("lambda must lie in [0, 1), got {lambda}")]
    BadLambda { lambda: f64 },
    #[error("the singular integral constant is unbounded at p = 2")]
    ExponentTwo,
    #[error("constant scale factors must be positive and finite")]
    BadConfig,
    #[error("sigma = {sigma} is outside the admissible range ({lo}, {hi})")]
    SigmaOutOfRange { sigma: f64, lo: f64, hi: f64 },
}

/// Scale factors entering the constant formulas; all default to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantConfig {
    /// Scales the maximal operator constant.
    pub c0: f64,
    /// Scales the singular operator constant.
    pub c: f64,
    /// Scales the dominance side of the reduction constant.
    pub big_c0: f64,
}

impl Default for ConstantConfig {
    fn default() -> Self {
        ConstantConfig { c0: 1.0, c: 1.0, big_c0: 1.0 }
    }
}

impl ConstantConfig {
    fn validate(&self) -> Result<(), ConstantError> {
        for v in [self.c0, self.c, self.big_c0] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConstantError::BadConfig);
            }
        }
        Ok(())
    }
}

/// `max(1, v_n d^n)` for a domain of diameter `d` in dimension `n`: the
/// largest ball measure the sweeps can see, floored at one.
pub fn dominance_constant(dim: usize, diameter: f64) -> f64 {
    ball_measure(dim, diameter).max(1.0)
}

/// Maximal operator constant `2^(n lambda / p) c0 (p/(p-1))^(1/p) + 1` at
/// fixed Morrey parameters.
pub fn maximal_constant(p: f64, lambda: f64, dim: usize, c0: f64) -> Result<f64, ConstantError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(ConstantError::BadP { p });
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(ConstantError::BadLambda { lambda });
    }
    let n = dim as f64;
    Ok(2f64.powf(n * lambda / p) * c0 * (p / (p - 1.0)).powf(1.0 / p) + 1.0)
}

/// Singular operator constant at fixed Morrey parameters:
/// `c (p/(p-1) + p/(2-p) + (p-lambda+1)/(1-lambda))` below `p = 2` and
/// `c (p + p/(p-2) + (p-lambda+1)/(1-lambda))` above it; unbounded at two.
pub fn cz_constant(p: f64, lambda: f64, c: f64) -> Result<f64, ConstantError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(ConstantError::BadP { p });
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(ConstantError::BadLambda { lambda });
    }
    if p == 2.0 {
        return Err(ConstantError::ExponentTwo);
    }
    let tail = (p - lambda + 1.0) / (1.0 - lambda);
    let head = if p < 2.0 {
        p / (p - 1.0) + p / (2.0 - p)
    } else {
        p + p / (p - 2.0)
    };
    Ok(c * (head + tail))
}

/// Open interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// The open range of reduction anchors `sigma` for which every exponent
/// `p - eps`, `eps < sigma`, stays inside the operator constant's branch:
/// the whole of `(0, s_max)` for the maximal operator and for singular
/// operators below `p = 2`; capped at `p - 2` above it; empty at `p = 2`,
/// where exponents right below two make the constant blow up.
pub fn admissible_sigma(
    space: &SpaceParams,
    kind: OperatorKind,
) -> Result<Interval, ConstantError> {
    let s_max = space.s_max();
    match kind {
        OperatorKind::Maximal => Ok(Interval { lo: 0.0, hi: s_max }),
        OperatorKind::Singular(_) => {
            let p = space.p();
            if p == 2.0 {
                Err(ConstantError::ExponentTwo)
            } else if p < 2.0 {
                Ok(Interval { lo: 0.0, hi: s_max })
            } else {
                Ok(Interval { lo: 0.0, hi: (p - 2.0).min(s_max) })
            }
        }
    }
}

/// Reduction constant
/// `big_c0 * sigma^(-theta/(p-sigma)) * sup C(p-eps, lambda-alpha*eps)`
/// with the supremum taken over the provided sweep points below `sigma`
/// together with `sigma` itself (the closure of the open range).
pub fn reduction_constant(
    space: &SpaceParams,
    sigma: f64,
    kind: OperatorKind,
    cfg: &ConstantConfig,
    dim: usize,
    eps: &[f64],
) -> Result<f64, ConstantError> {
    cfg.validate()?;
    let range = admissible_sigma(space, kind)?;
    if !range.contains(sigma) {
        return Err(ConstantError::SigmaOutOfRange { sigma, lo: range.lo, hi: range.hi });
    }
    let (p, lambda, theta, alpha) = (space.p(), space.lambda(), space.theta(), space.alpha());
    let mut sup = 0.0f64;
    for &e in eps.iter().filter(|&&e| e > 0.0 && e < sigma).chain(std::iter::once(&sigma)) {
        let q = p - e;
        let lam = lambda - alpha * e;
        let c = match kind {
            OperatorKind::Maximal => maximal_constant(q, lam, dim, cfg.c0)?,
            OperatorKind::Singular(_) => cz_constant(q, lam, cfg.c)?,
        };
        sup = sup.max(c);
    }
    Ok(cfg.big_c0 * sigma.powf(-theta / (p - sigma)) * sup)
}
