//! JSON formats for instances, solver configuration, points and reports.
//!
//! Matrices are written as arrays of rows. A point of a single-column shape
//! (vector, MPSK and product sets) may be written as a flat array.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cm_sets::{CmSetSpec, Point};
use crate::error::{Error, Result};
use crate::objectives::ProblemSpec;
use crate::penalties::PenaltyKind;
use crate::solver::{HomotopySchedule, SolveResult, SolverConfig, StageRecord, StopReason};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_v1() -> u32 {
    SCHEMA_VERSION
}

fn plus_one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveWire {
    Quadratic {
        y: Vec<f64>,
        h: Vec<Vec<f64>>,
    },
    QuadForm {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default = "plus_one")]
        sign: f64,
    },
    MaxAffine {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    TraceQuadratic {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
    },
    Constant {
        value: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default = "schema_v1")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub objective: ObjectiveWire,
    pub set: CmSetSpec,
}

/// A validated problem instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub id: String,
    pub problem: ProblemSpec,
    pub set: CmSetSpec,
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::InvalidArgument(format!(
            "ragged matrix: row {i} has {} entries, row 0 has {ncols}",
            row.len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ObjectiveWire {
    pub fn to_problem(&self) -> Result<ProblemSpec> {
        Ok(match self {
            ObjectiveWire::Quadratic { y, h } => ProblemSpec::Quadratic {
                y: DVector::from_column_slice(y),
                h: matrix_from_rows(h)?,
            },
            ObjectiveWire::QuadForm { a, b, sign } => ProblemSpec::QuadForm {
                a: matrix_from_rows(a)?,
                b: DVector::from_column_slice(b),
                sign: *sign,
            },
            ObjectiveWire::MaxAffine { a, b } => ProblemSpec::MaxAffine {
                a: matrix_from_rows(a)?,
                b: DVector::from_column_slice(b),
            },
            ObjectiveWire::TraceQuadratic { a, b, c } => ProblemSpec::TraceQuadratic {
                a: matrix_from_rows(a)?,
                b: matrix_from_rows(b)?,
                c: matrix_from_rows(c)?,
            },
            ObjectiveWire::Constant { value } => ProblemSpec::Constant { value: *value },
        })
    }

    pub fn from_problem(p: &ProblemSpec) -> Self {
        let vec = |v: &DVector<f64>| v.iter().copied().collect::<Vec<_>>();
        match p {
            ProblemSpec::Quadratic { y, h } => ObjectiveWire::Quadratic {
                y: vec(y),
                h: matrix_to_rows(h),
            },
            ProblemSpec::QuadForm { a, b, sign } => ObjectiveWire::QuadForm {
                a: matrix_to_rows(a),
                b: vec(b),
                sign: *sign,
            },
            ProblemSpec::MaxAffine { a, b } => ObjectiveWire::MaxAffine {
                a: matrix_to_rows(a),
                b: vec(b),
            },
            ProblemSpec::TraceQuadratic { a, b, c } => ObjectiveWire::TraceQuadratic {
                a: matrix_to_rows(a),
                b: matrix_to_rows(b),
                c: matrix_to_rows(c),
            },
            ProblemSpec::Constant { value } => ObjectiveWire::Constant { value: *value },
        }
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::InvalidArgument(format!("malformed JSON: {e}"))
}

pub fn parse_instance(text: &str, fallback_id: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(json_err)?;
    if file.schema != SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            file.schema
        )));
    }
    let problem = file.objective.to_problem()?;
    problem.validate(&file.set)?;
    Ok(Instance {
        id: file.id.unwrap_or_else(|| fallback_id.to_string()),
        problem,
        set: file.set,
    })
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    parse_instance(&text, stem)
}

impl Instance {
    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            schema: SCHEMA_VERSION,
            id: Some(self.id.clone()),
            objective: ObjectiveWire::from_problem(&self.problem),
            set: self.set.clone(),
        }
    }
}

/// Parses a point for `spec`: an array of rows, or a flat array when the
/// shape has a single column.
pub fn point_from_json(value: &Value, spec: &CmSetSpec) -> Result<Point> {
    let shape = spec.shape();
    let bad = || Error::InvalidArgument(format!("point must be a numeric array for shape {shape:?}"));
    let items = value.as_array().ok_or_else(bad)?;
    let point = if items.iter().all(Value::is_number) {
        let flat: Vec<f64> = items.iter().map(|v| v.as_f64().unwrap_or(f64::NAN)).collect();
        if shape.1 != 1 && !(shape.0 == 1 && flat.len() == shape.1) {
            return Err(Error::InvalidArgument(format!(
                "a {}×{} point must be given as an array of rows",
                shape.0, shape.1
            )));
        }
        if flat.len() != shape.0 * shape.1 {
            return Err(Error::DimensionMismatch {
                expected: shape,
                got: (flat.len(), 1),
            });
        }
        DMatrix::from_row_slice(shape.0, shape.1, &flat)
    } else {
        let rows: Vec<Vec<f64>> = serde_json::from_value(value.clone()).map_err(|_| bad())?;
        matrix_from_rows(&rows)?
    };
    spec.check_point(&point)?;
    if point.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("point has non-finite entries".into()));
    }
    Ok(point)
}

/// Flat array for single-column points, array of rows otherwise.
pub fn point_to_json(x: &Point) -> Value {
    if x.ncols() == 1 {
        Value::from(x.iter().copied().collect::<Vec<f64>>())
    } else {
        serde_json::to_value(matrix_to_rows(x)).expect("finite matrix serializes")
    }
}

/// Optional overrides of the default schedule and solver settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub lambda_max: Option<f64>,
    #[serde(default)]
    pub warm_start_convex: Option<bool>,
    #[serde(default)]
    pub penalty: Option<PenaltyKind>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(json_err)
    }

    /// Default schedule for the instance with the overrides applied.
    pub fn schedule(&self, inst: &Instance) -> Result<HomotopySchedule> {
        let mut s = HomotopySchedule::defaults_for(&inst.problem, &inst.set, self.penalty.unwrap_or_default())?;
        if let Some(v) = self.lambda0 {
            s.lambda0 = v;
        }
        if let Some(v) = self.gamma {
            s.gamma = v;
        }
        if let Some(v) = self.lambda_max {
            s.lambda_max = v;
        }
        if let Some(v) = self.warm_start_convex {
            s.warm_start_convex = v;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let cfg = self.solver.unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Machine-readable record of a (multi-start) solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance_id: String,
    pub seed: u64,
    pub starts: usize,
    /// Seed of the start that produced the reported result.
    pub best_seed: u64,
    pub hull_point: Value,
    pub rounded: Value,
    pub f_hull: f64,
    pub f_rounded: f64,
    pub feas_residual: f64,
    pub exact_flag: bool,
    pub converged: bool,
    pub stop: StopReason,
    pub lambda_final: f64,
    pub stage_trace: Vec<StageRecord>,
    /// `f_rounded` of every start, in seed order.
    pub start_values: Vec<f64>,
    pub schedule: HomotopySchedule,
    pub wall_time: f64,
}

impl RunReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        inst: &Instance,
        seed: u64,
        seeds: &[u64],
        results: &[SolveResult],
        best: usize,
        schedule: HomotopySchedule,
        feas_tol: f64,
        wall_time: f64,
    ) -> Self {
        let r = &results[best];
        RunReport {
            instance_id: inst.id.clone(),
            seed,
            starts: results.len(),
            best_seed: seeds[best],
            hull_point: point_to_json(&r.hull_point),
            rounded: point_to_json(&r.rounded),
            f_hull: r.f_hull,
            f_rounded: r.f_rounded,
            feas_residual: r.feas_residual,
            exact_flag: r.exact_flag,
            converged: r.converged(feas_tol),
            stop: r.stop,
            lambda_final: r.lambda_final,
            stage_trace: r.stage_trace.clone(),
            start_values: results.iter().map(|r| r.f_rounded).collect(),
            schedule,
            wall_time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIMO: &str = r#"{
        "schema": 1,
        "id": "mimo",
        "objective": {"kind": "quadratic", "y": [0.3, -0.2], "h": [[1, 0], [0, 1]]},
        "set": {"family": "binary", "n": 2}
    }"#;

    #[test]
    fn parse_roundtrip() {
        let inst = parse_instance(MIMO, "fallback").unwrap();
        assert_eq!(inst.id, "mimo");
        assert_eq!(inst.set, CmSetSpec::binary(2));
        let text = serde_json::to_string(&inst.to_file()).unwrap();
        assert_eq!(parse_instance(&text, "x").unwrap(), inst);
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let bad = MIMO.replace(r#""n": 2"#, r#""n": 3"#);
        assert!(matches!(parse_instance(&bad, "x"), Err(Error::InvalidObjective(_))));
        let ragged = MIMO.replace("[[1, 0], [0, 1]]", "[[1, 0], [0]]");
        assert!(parse_instance(&ragged, "x").is_err());
        let schema = MIMO.replace(r#""schema": 1"#, r#""schema": 2"#);
        assert!(parse_instance(&schema, "x").is_err());
    }

    #[test]
    fn points_roundtrip() {
        let spec = CmSetSpec::semi_orthogonal(3, 2);
        let v: Value = serde_json::from_str("[[1, 0], [0, 1], [0, 0]]").unwrap();
        let p = point_from_json(&v, &spec).unwrap();
        assert_eq!(p, DMatrix::identity(3, 2));
        assert_eq!(point_to_json(&p), serde_json::from_str::<Value>("[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]").unwrap());
        let flat: Value = serde_json::from_str("[1, 0, 0, 1, 0, 0]").unwrap();
        assert!(point_from_json(&flat, &spec).is_err());
        let b = point_from_json(&serde_json::from_str("[0.5, -2]").unwrap(), &CmSetSpec::binary(2)).unwrap();
        assert_eq!(b, DMatrix::from_column_slice(2, 1, &[0.5, -2.0]));
        assert!(point_from_json(&serde_json::from_str("[0.5]").unwrap(), &CmSetSpec::binary(2)).is_err());
    }

    #[test]
    fn run_config_overrides() {
        let inst = parse_instance(MIMO, "x").unwrap();
        let cfg: RunConfig = serde_json::from_str(r#"{"gamma": 2.0, "penalty": "squared_deficit"}"#).unwrap();
        let s = cfg.schedule(&inst).unwrap();
        assert_eq!(s.gamma, 2.0);
        assert_eq!(s.penalty, PenaltyKind::SquaredDeficit);
        let bad: RunConfig = serde_json::from_str(r#"{"gamma": 0.5}"#).unwrap();
        assert!(bad.schedule(&inst).is_err());
    }
}
