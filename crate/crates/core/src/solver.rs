//! Projected (sub)gradient stages and the homotopy on the penalty weight.
//!
//! A stage runs `x ← Π_hull(x − η ∇F_λ(x))` at a fixed `λ`. The homotopy
//! runs stages for `λ_k = min(λ₀ γᵏ, λ_max)`, warm-starting each one from the
//! previous iterate, and rounds the final hull point onto the set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cm_sets::{CmSetSpec, Family, Point};
use crate::error::{Error, Result};
use crate::hull_projections::DykstraConfig;
use crate::objectives::ProblemSpec;
use crate::penalties::{concavify_threshold, eval_penalized, exactness_threshold, PenaltyConfig, PenaltyKind};
use crate::FEAS_TOL;

/// Standard deviation of the Gaussian perturbation used for start points.
pub const START_SCALE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Fixed Lipschitz step for smooth penalized objectives, diminishing
    /// steps with `c = R / K` otherwise.
    #[default]
    Auto,
    /// `η = 1 / (L + 2|λ|)`.
    FixedLipschitz,
    /// `η_l = c / √(l + 1)`.
    Diminishing(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub step_rule: StepRule,
    pub max_iters_per_stage: usize,
    /// A stage stops once an update moves the iterate by at most this much.
    pub stage_tol: f64,
    pub feas_tol: f64,
    #[serde(skip)]
    pub dykstra: DykstraConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_rule: StepRule::Auto,
            max_iters_per_stage: 500,
            stage_tol: 1e-10,
            feas_tol: FEAS_TOL,
            dykstra: DykstraConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.max_iters_per_stage == 0 || !positive(self.stage_tol) || !positive(self.feas_tol) {
            return Err(Error::InvalidArgument(format!(
                "solver budgets and tolerances must be positive: {self:?}"
            )));
        }
        if let StepRule::Diminishing(c) = self.step_rule {
            if !positive(c) {
                return Err(Error::InvalidArgument(format!("diminishing step scale must be positive, got {c}")));
            }
        }
        self.dykstra.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopySchedule {
    pub lambda0: f64,
    pub gamma: f64,
    pub lambda_max: f64,
    /// Run one convex stage at `λ = −(L/2 + 1)` before the schedule.
    #[serde(default)]
    pub warm_start_convex: bool,
    #[serde(default)]
    pub penalty: PenaltyKind,
}

impl HomotopySchedule {
    /// Default schedule: `λ₀ = max(10⁻³, 10⁻³ t)`, `γ = 1.5`, `λ_max = 3t`
    /// for the threshold `t` of [`relevant_threshold`]. When `t = 0` the
    /// ceiling is raised to `10 λ₀` so the schedule still has a few stages.
    pub fn defaults_for(prob: &ProblemSpec, spec: &CmSetSpec, penalty: PenaltyKind) -> Result<Self> {
        let t = relevant_threshold(prob, spec, penalty)?;
        let lambda0 = (1e-3f64).max(1e-3 * t);
        Ok(Self {
            lambda0,
            gamma: 1.5,
            lambda_max: (3.0 * t).max(10.0 * lambda0),
            warm_start_convex: false,
            penalty,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda0.is_finite()
            && self.lambda_max.is_finite()
            && self.gamma > 1.0
            && self.gamma.is_finite()
            && self.lambda0 > 0.0
            && self.lambda0 <= self.lambda_max;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "need 0 < lambda0 <= lambda_max and gamma > 1, got {self:?}"
            )));
        }
        Ok(())
    }

    /// The sequence `λ_k`, ending with the first value equal to `λ_max`.
    pub fn lambdas(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut lambda = self.lambda0;
        loop {
            let current = lambda.min(self.lambda_max);
            out.push(current);
            if current >= self.lambda_max {
                return out;
            }
            lambda *= self.gamma;
        }
    }
}

/// Penalty weight above which the penalized problem is equivalent to the
/// CM problem.
///
/// For `NegSquare` and `SquaredDeficit` this is the smaller of `L/2` and
/// `K ν` among those that exist. For `SqrtDeficit` it is `K`, scaled by
/// `5 r^{3/4}` when the set has a non-negative semi-orthogonal part.
pub fn relevant_threshold(prob: &ProblemSpec, spec: &CmSetSpec, penalty: PenaltyKind) -> Result<f64> {
    match penalty {
        PenaltyKind::NegSquare | PenaltyKind::SquaredDeficit => {
            let concave = concavify_threshold(prob).ok();
            let exact = exactness_threshold(prob, spec).ok();
            match (concave, exact) {
                (Some(a), Some(b)) => Ok(a.min(b)),
                (Some(a), None) => Ok(a),
                (None, Some(b)) => Ok(b),
                (None, None) => Err(Error::NoExactThreshold(spec.family.to_string())),
            }
        }
        PenaltyKind::SqrtDeficit => Ok(prob.descriptors(spec).k * sqrt_form_constant(spec)),
    }
}

fn sqrt_form_constant(spec: &CmSetSpec) -> f64 {
    match spec.family {
        Family::NonnegSemiOrthogonal => 5.0 * (spec.cols() as f64).powf(0.75),
        Family::Product => spec.factors.iter().map(sqrt_form_constant).fold(1.0, f64::max),
        _ => 1.0,
    }
}

/// Result of one projected (sub)gradient stage.
#[derive(Clone, Debug, PartialEq)]
pub struct StageOutcome {
    pub x: Point,
    pub iterations: usize,
    /// Penalized value at `x`.
    pub value: f64,
    /// Whether the iterate-change test fired before the budget ran out.
    pub converged: bool,
    /// Penalized value of every iterate, starting with `x0`.
    pub history: Vec<f64>,
}

/// Projected (sub)gradient method at a fixed penalty.
///
/// Smooth stages keep the last iterate; subgradient stages return the best
/// iterate seen. A `SqrtDeficit` stage stops early if it reaches the
/// modulus sphere, where the penalty has no gradient and the point is
/// already in the set.
pub fn pg_stage(
    prob: &ProblemSpec,
    spec: &CmSetSpec,
    pen: &PenaltyConfig,
    x0: &Point,
    scfg: &SolverConfig,
) -> Result<StageOutcome> {
    scfg.validate()?;
    pen.validate()?;
    spec.check_point(x0)?;
    let violation = spec.hull_violation(x0)?;
    if violation > 10.0 * scfg.feas_tol {
        return Err(Error::OutsideHull { violation });
    }

    let desc = prob.descriptors(spec);
    let smooth = prob.is_smooth() && pen.kind != PenaltyKind::SqrtDeficit;
    let fixed_step = match scfg.step_rule {
        StepRule::FixedLipschitz => {
            if pen.kind == PenaltyKind::SqrtDeficit {
                return Err(Error::InvalidArgument("the square-root penalty has no Lipschitz gradient".into()));
            }
            Some(desc.l.ok_or(Error::MissingLipschitz)?)
        }
        StepRule::Auto if smooth => desc.l,
        _ => None,
    }
    .map(|l| {
        let denom = l + 2.0 * pen.lambda.abs();
        if denom > 0.0 {
            1.0 / denom
        } else {
            1.0
        }
    });
    let radius = spec.modulus_sq().sqrt();
    let scale = match scfg.step_rule {
        StepRule::Diminishing(c) => c,
        _ => {
            // Lipschitz constant of F_λ on the hull.
            let k_pen = desc.k
                + match pen.kind {
                    PenaltyKind::SqrtDeficit => pen.lambda,
                    _ => 2.0 * pen.lambda.abs() * radius,
                };
            if k_pen > 0.0 {
                radius / k_pen
            } else {
                radius
            }
        }
    };

    let mut x = x0.clone();
    let mut current = eval_penalized(prob, spec, pen, &x)?;
    let mut history = vec![current.value];
    let mut best = (current.value, x.clone());
    let mut converged = false;
    let mut iterations = 0;
    while iterations < scfg.max_iters_per_stage {
        let Some(grad) = current.grad.take() else {
            converged = true;
            break;
        };
        let eta = fixed_step.unwrap_or_else(|| scale / ((iterations + 1) as f64).sqrt());
        let next = spec.project_hull_with(&(&x - grad * eta), &scfg.dykstra)?;
        let change = (&next - &x).norm();
        x = next;
        iterations += 1;
        current = eval_penalized(prob, spec, pen, &x)?;
        history.push(current.value);
        if current.value < best.0 {
            best = (current.value, x.clone());
        }
        if change <= scfg.stage_tol {
            converged = true;
            break;
        }
    }
    if fixed_step.is_none() && best.0 < current.value {
        x = best.1;
        current.value = best.0;
    }
    Ok(StageOutcome {
        x,
        iterations,
        value: current.value,
        converged,
        history,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub lambda: f64,
    pub iterations: usize,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The rounded point was unchanged over two consecutive stages and the
    /// hull point sat on the set.
    Stable,
    /// The schedule reached `λ_max`.
    LambdaMax,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub hull_point: Point,
    pub rounded: Point,
    pub f_hull: f64,
    pub f_rounded: f64,
    /// Distance from `hull_point` to the set (an upper bound when `exact_flag` is false).
    pub feas_residual: f64,
    pub exact_flag: bool,
    pub stage_trace: Vec<StageRecord>,
    pub stop: StopReason,
    pub lambda_final: f64,
}

impl SolveResult {
    /// Whether the final hull point lies on the set within `feas_tol`.
    pub fn converged(&self, feas_tol: f64) -> bool {
        self.feas_residual <= feas_tol
    }
}

/// Hull projection of a seeded Gaussian perturbation of `Π_hull(0)`.
pub fn default_start(spec: &CmSetSpec, seed: u64) -> Result<Point> {
    perturbed_start(spec, seed, START_SCALE)
}

pub fn perturbed_start(spec: &CmSetSpec, seed: u64, scale: f64) -> Result<Point> {
    let (rows, cols) = spec.shape();
    let center = spec.project_hull(&Point::zeros(rows, cols))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Point::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        scale * z
    });
    spec.project_hull(&(center + noise))
}

pub fn homotopy_solve(
    prob: &ProblemSpec,
    spec: &CmSetSpec,
    sched: &HomotopySchedule,
    scfg: &SolverConfig,
    x0: &Point,
) -> Result<SolveResult> {
    prob.validate(spec)?;
    sched.validate()?;
    scfg.validate()?;
    let mut x = x0.clone();
    let mut trace = Vec::new();

    if sched.warm_start_convex {
        if let Some(l) = prob.lipschitz_gradient() {
            let lambda = -(l / 2.0 + 1.0);
            let stage = pg_stage(prob, spec, &PenaltyConfig::neg_square(lambda), &x, scfg)?;
            trace.push(StageRecord {
                lambda,
                iterations: stage.iterations,
                value: stage.value,
            });
            x = stage.x;
        }
    }

    let mut previous: Option<Point> = None;
    let mut stop = StopReason::LambdaMax;
    let mut lambda_final = sched.lambda0;
    for lambda in sched.lambdas() {
        let pen = PenaltyConfig::new(sched.penalty, lambda)?;
        let stage = pg_stage(prob, spec, &pen, &x, scfg)?;
        trace.push(StageRecord {
            lambda,
            iterations: stage.iterations,
            value: stage.value,
        });
        x = stage.x;
        lambda_final = lambda;
        let rounded = spec.round_to_set(&x)?;
        let on_set = (&x - &rounded).amax() <= scfg.feas_tol;
        let repeated = previous
            .as_ref()
            .is_some_and(|p| (p - &rounded).amax() <= scfg.feas_tol);
        if repeated && on_set {
            stop = StopReason::Stable;
            break;
        }
        previous = Some(rounded);
    }

    let rounded = spec.round_to_set(&x)?;
    let dist = spec.distance_to_set(&x)?;
    Ok(SolveResult {
        f_hull: prob.value(&x)?,
        f_rounded: prob.value(&rounded)?,
        hull_point: x,
        rounded,
        feas_residual: dist.value,
        exact_flag: dist.exact,
        stage_trace: trace,
        stop,
        lambda_final,
    })
}

/// Homotopy solves from [`default_start`] for every seed, in seed order.
pub fn multi_start(
    prob: &ProblemSpec,
    spec: &CmSetSpec,
    sched: &HomotopySchedule,
    scfg: &SolverConfig,
    seeds: &[u64],
) -> Result<Vec<SolveResult>> {
    seeds
        .par_iter()
        .map(|&seed| homotopy_solve(prob, spec, sched, scfg, &default_start(spec, seed)?))
        .collect()
}

/// Index of the result with the lowest `f_rounded`; the first one wins ties.
pub fn best_index(results: &[SolveResult]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        match best {
            Some(b) if results[b].f_rounded <= r.f_rounded => {}
            _ => best = Some(i),
        }
    }
    best
}
