//! Penalized objectives and their thresholds.
//!
//! `NegSquare` is `f − λ‖x‖²`, `SqrtDeficit` is `f + λ√(C − ‖x‖²)` and
//! `SquaredDeficit` is `f + λ(C − ‖x‖²)`, the square of the universal error
//! bound. On the hull the last two differ from `NegSquare` only through the
//! weight and a constant.

use serde::{Deserialize, Serialize};

use crate::cm_sets::{CmSetSpec, Point};
use crate::error::{Error, Result};
use crate::objectives::ProblemSpec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    #[default]
    NegSquare,
    SqrtDeficit,
    SquaredDeficit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub kind: PenaltyKind,
    pub lambda: f64,
}

impl PenaltyConfig {
    pub fn new(kind: PenaltyKind, lambda: f64) -> Result<Self> {
        let cfg = Self { kind, lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn neg_square(lambda: f64) -> Self {
        Self {
            kind: PenaltyKind::NegSquare,
            lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("penalty weight {} is not finite", self.lambda)));
        }
        if self.kind != PenaltyKind::NegSquare && self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{:?} needs a non-negative weight, got {}",
                self.kind, self.lambda
            )));
        }
        Ok(())
    }
}

/// Value and first-order information of a penalized objective.
#[derive(Clone, Debug, PartialEq)]
pub struct PenalizedEval {
    pub value: f64,
    /// `None` where the penalty has no (sub)gradient, i.e. `SqrtDeficit`
    /// with `‖x‖² ≥ C`.
    pub grad: Option<Point>,
    pub smooth: bool,
}

pub fn eval_penalized(prob: &ProblemSpec, spec: &CmSetSpec, cfg: &PenaltyConfig, x: &Point) -> Result<PenalizedEval> {
    cfg.validate()?;
    spec.check_point(x)?;
    let base = prob.eval(x)?;
    let lambda = cfg.lambda;
    let norm_sq = x.norm_squared();
    let c = spec.modulus_sq();
    let out = match cfg.kind {
        PenaltyKind::NegSquare => PenalizedEval {
            value: base.value - lambda * norm_sq,
            grad: Some(base.grad - x * (2.0 * lambda)),
            smooth: base.smooth,
        },
        PenaltyKind::SquaredDeficit => PenalizedEval {
            value: base.value + lambda * (c - norm_sq),
            grad: Some(base.grad - x * (2.0 * lambda)),
            smooth: base.smooth,
        },
        PenaltyKind::SqrtDeficit => {
            let deficit = c - norm_sq;
            if deficit <= 0.0 {
                PenalizedEval {
                    value: base.value,
                    grad: None,
                    smooth: false,
                }
            } else {
                let root = deficit.sqrt();
                PenalizedEval {
                    value: base.value + lambda * root,
                    grad: Some(base.grad - x * (lambda / root)),
                    smooth: base.smooth,
                }
            }
        }
    };
    if !out.value.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(out)
}

/// `L / 2`: any strictly larger `λ` makes `f − λ‖x‖²` strictly concave.
pub fn concavify_threshold(prob: &ProblemSpec) -> Result<f64> {
    prob.lipschitz_gradient().map(|l| l / 2.0).ok_or(Error::MissingLipschitz)
}

/// `K · ν`: any strictly larger `λ` gives exact penalization through the
/// error bound of `spec`.
pub fn exactness_threshold(prob: &ProblemSpec, spec: &CmSetSpec) -> Result<f64> {
    let nu = spec.nu().ok_or_else(|| Error::NoExactThreshold(spec.family.to_string()))?;
    Ok(prob.descriptors(spec).k * nu)
}
