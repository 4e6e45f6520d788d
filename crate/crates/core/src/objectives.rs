//! Objective families with values, (sub)gradients and smoothness constants.
//!
//! Every objective acts on the column-major flattening of a point, so the
//! same matrix data works for vector, matrix, MPSK and product sets.
//! `TraceQuadratic` is the exception: it needs the `n × r` matrix shape.

use nalgebra::{DMatrix, DVector};

use crate::cm_sets::{CmSetSpec, Point};
use crate::error::{Error, Result};
use crate::linalg::estimate_spectral_norm;

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    /// `‖y − Hx‖²`.
    Quadratic { y: DVector<f64>, h: DMatrix<f64> },
    /// `sign · xᵀAx + bᵀx` with `A` symmetric and `sign = ±1`.
    QuadForm {
        a: DMatrix<f64>,
        b: DVector<f64>,
        sign: f64,
    },
    /// `max_i a_iᵀx + b_i`, pieces stored as the rows of `a`.
    MaxAffine { a: DMatrix<f64>, b: DVector<f64> },
    /// `tr(XᵀAXB) + ⟨C, X⟩` with `A`, `B` symmetric.
    TraceQuadratic {
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
    },
    Constant { value: f64 },
}

/// Value and (sub)gradient at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Eval {
    pub value: f64,
    pub grad: Point,
    /// `false` when `grad` is only a subgradient.
    pub smooth: bool,
}

/// Smoothness constants over the hull: gradient Lipschitz `L` (absent for
/// non-smooth objectives) and value Lipschitz `K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Descriptors {
    pub l: Option<f64>,
    pub k: f64,
}

fn flat(x: &Point) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

fn unflat(v: &DVector<f64>, shape: (usize, usize)) -> Point {
    DMatrix::from_column_slice(shape.0, shape.1, v.as_slice())
}

fn is_symmetric(a: &DMatrix<f64>) -> bool {
    let scale = a.amax().max(1.0);
    (a - a.transpose()).amax() <= 1e-12 * scale
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::QuadForm { .. } => "quad_form",
            ProblemSpec::MaxAffine { .. } => "max_affine",
            ProblemSpec::TraceQuadratic { .. } => "trace_quadratic",
            ProblemSpec::Constant { .. } => "constant",
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, ProblemSpec::MaxAffine { .. })
    }

    /// Checks internal consistency and compatibility with `spec`.
    pub fn validate(&self, spec: &CmSetSpec) -> Result<()> {
        spec.validate()?;
        let dim = spec.dim();
        let bad = |msg: String| Err(Error::InvalidObjective(format!("{}: {msg}", self.kind())));
        match self {
            ProblemSpec::Quadratic { y, h } => {
                if h.ncols() != dim {
                    return bad(format!("H has {} columns, the set has dimension {dim}", h.ncols()));
                }
                if h.nrows() != y.len() {
                    return bad(format!("H has {} rows but y has length {}", h.nrows(), y.len()));
                }
            }
            ProblemSpec::QuadForm { a, b, sign } => {
                if a.shape() != (dim, dim) || b.len() != dim {
                    return bad(format!("need A {dim}×{dim} and b of length {dim}"));
                }
                if !is_symmetric(a) {
                    return bad("A must be symmetric".into());
                }
                if *sign != 1.0 && *sign != -1.0 {
                    return bad(format!("sign must be ±1, got {sign}"));
                }
            }
            ProblemSpec::MaxAffine { a, b } => {
                if a.nrows() == 0 {
                    return bad("needs at least one affine piece".into());
                }
                if a.ncols() != dim || a.nrows() != b.len() {
                    return bad(format!(
                        "need {} pieces of dimension {dim}, got a {}×{} and b of length {}",
                        a.nrows(),
                        a.nrows(),
                        a.ncols(),
                        b.len()
                    ));
                }
            }
            ProblemSpec::TraceQuadratic { a, b, c } => {
                let (n, r) = spec.shape();
                if spec.family == crate::cm_sets::Family::Product || spec.family == crate::cm_sets::Family::Mpsk {
                    return bad(format!("needs a matrix-shaped set, got {}", spec.family));
                }
                if a.shape() != (n, n) || b.shape() != (r, r) || c.shape() != (n, r) {
                    return bad(format!("need A {n}×{n}, B {r}×{r} and C {n}×{r}"));
                }
                if !is_symmetric(a) || !is_symmetric(b) {
                    return bad("A and B must be symmetric".into());
                }
            }
            ProblemSpec::Constant { .. } => {}
        }
        let finite = match self {
            ProblemSpec::Quadratic { y, h } => y.iter().chain(h.iter()).all(|v| v.is_finite()),
            ProblemSpec::QuadForm { a, b, .. } => a.iter().chain(b.iter()).all(|v| v.is_finite()),
            ProblemSpec::MaxAffine { a, b } => a.iter().chain(b.iter()).all(|v| v.is_finite()),
            ProblemSpec::TraceQuadratic { a, b, c } => a.iter().chain(b.iter()).chain(c.iter()).all(|v| v.is_finite()),
            ProblemSpec::Constant { value } => value.is_finite(),
        };
        if !finite {
            return bad("data contains non-finite entries".into());
        }
        Ok(())
    }

    /// Objective value only.
    pub fn value(&self, x: &Point) -> Result<f64> {
        Ok(self.eval(x)?.value)
    }

    /// Value and gradient, or a subgradient for `MaxAffine` (lowest active
    /// piece on ties).
    pub fn eval(&self, x: &Point) -> Result<Eval> {
        let shape = x.shape();
        let mismatch = |expected: (usize, usize)| {
            Err(Error::DimensionMismatch {
                expected,
                got: shape,
            })
        };
        let out = match self {
            ProblemSpec::Quadratic { y, h } => {
                if h.ncols() != x.len() {
                    return mismatch((h.ncols(), 1));
                }
                let residual = h * flat(x) - y;
                Eval {
                    value: residual.norm_squared(),
                    grad: unflat(&(h.transpose() * residual * 2.0), shape),
                    smooth: true,
                }
            }
            ProblemSpec::QuadForm { a, b, sign } => {
                if a.ncols() != x.len() {
                    return mismatch((a.ncols(), 1));
                }
                let v = flat(x);
                let av = a * &v;
                Eval {
                    value: sign * v.dot(&av) + b.dot(&v),
                    grad: unflat(&(av * (2.0 * sign) + b), shape),
                    smooth: true,
                }
            }
            ProblemSpec::MaxAffine { a, b } => {
                if a.ncols() != x.len() {
                    return mismatch((a.ncols(), 1));
                }
                let values = a * flat(x) + b;
                let mut best = 0;
                for i in 1..values.len() {
                    if values[i] > values[best] {
                        best = i;
                    }
                }
                Eval {
                    value: values[best],
                    grad: unflat(&a.row(best).transpose(), shape),
                    smooth: false,
                }
            }
            ProblemSpec::TraceQuadratic { a, b, c } => {
                if x.shape() != c.shape() {
                    return mismatch(c.shape());
                }
                let axb = a * x * b;
                Eval {
                    value: x.dot(&axb) + c.dot(x),
                    grad: axb * 2.0 + c,
                    smooth: true,
                }
            }
            ProblemSpec::Constant { value } => Eval {
                value: *value,
                grad: DMatrix::zeros(shape.0, shape.1),
                smooth: true,
            },
        };
        if !out.value.is_finite() || out.grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(out)
    }

    /// Gradient Lipschitz constant (the spectral norm of the Hessian), or
    /// `None` for non-smooth objectives.
    pub fn lipschitz_gradient(&self) -> Option<f64> {
        match self {
            ProblemSpec::Quadratic { h, .. } => Some(2.0 * estimate_spectral_norm(h).powi(2)),
            ProblemSpec::QuadForm { a, .. } => Some(2.0 * estimate_spectral_norm(a)),
            ProblemSpec::MaxAffine { .. } => None,
            ProblemSpec::TraceQuadratic { a, b, .. } => {
                Some(2.0 * estimate_spectral_norm(a) * estimate_spectral_norm(b))
            }
            ProblemSpec::Constant { .. } => Some(0.0),
        }
    }

    /// `L` and a value Lipschitz constant `K` valid on the hull of `spec`,
    /// which lies inside the ball of radius `R = √C`.
    pub fn descriptors(&self, spec: &CmSetSpec) -> Descriptors {
        let radius = spec.modulus_sq().sqrt();
        match self {
            ProblemSpec::Quadratic { y, h } => {
                let s = estimate_spectral_norm(h);
                Descriptors {
                    l: Some(2.0 * s * s),
                    k: 2.0 * s * (s * radius + y.norm()),
                }
            }
            ProblemSpec::QuadForm { a, b, .. } => {
                let s = estimate_spectral_norm(a);
                Descriptors {
                    l: Some(2.0 * s),
                    k: 2.0 * s * radius + b.norm(),
                }
            }
            ProblemSpec::MaxAffine { a, .. } => Descriptors {
                l: None,
                k: a.row_iter().map(|row| row.norm()).fold(0.0, f64::max),
            },
            ProblemSpec::TraceQuadratic { a, b, c } => {
                let l = 2.0 * estimate_spectral_norm(a) * estimate_spectral_norm(b);
                Descriptors {
                    l: Some(l),
                    k: l * radius + c.norm(),
                }
            }
            ProblemSpec::Constant { .. } => Descriptors { l: Some(0.0), k: 0.0 },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(xs: &[f64]) -> Point {
        DMatrix::from_column_slice(xs.len(), 1, xs)
    }

    fn mimo() -> ProblemSpec {
        ProblemSpec::Quadratic {
            y: DVector::from_vec(vec![0.3, -0.2]),
            h: DMatrix::identity(2, 2),
        }
    }

    #[test]
    fn quadratic_example() {
        let e = mimo().eval(&col(&[1.0, -1.0])).unwrap();
        assert!((e.value - 1.13).abs() < 1e-14);
        assert!((&e.grad - col(&[1.4, -1.6])).norm() < 1e-14);
        assert!(e.smooth);
        // central differences
        let h = 1e-6;
        for i in 0..2 {
            let mut xp = col(&[1.0, -1.0]);
            let mut xm = xp.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (mimo().value(&xp).unwrap() - mimo().value(&xm).unwrap()) / (2.0 * h);
            assert!((fd - e.grad[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn max_affine_example() {
        let p = ProblemSpec::MaxAffine {
            a: DMatrix::identity(2, 2),
            b: DVector::zeros(2),
        };
        let e = p.eval(&col(&[2.0, 1.0])).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.grad, col(&[1.0, 0.0]));
        assert!(!e.smooth);
        // tie at a kink picks the first piece
        let e = p.eval(&col(&[1.0, 1.0])).unwrap();
        assert_eq!(e.grad, col(&[1.0, 0.0]));
    }

    #[test]
    fn constant_example() {
        let e = ProblemSpec::Constant { value: 2.5 }.eval(&col(&[0.1, 0.2])).unwrap();
        assert_eq!(e.value, 2.5);
        assert_eq!(e.grad, col(&[0.0, 0.0]));
        assert!(e.smooth);
    }

    #[test]
    fn descriptor_examples() {
        let d = mimo().descriptors(&CmSetSpec::binary(2));
        assert!((d.l.unwrap() - 2.0).abs() < 1e-10);
        let p = ProblemSpec::MaxAffine {
            a: DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 0.0, 1.0]),
            b: DVector::zeros(2),
        };
        let d = p.descriptors(&CmSetSpec::binary(2));
        assert_eq!(d.l, None);
        assert_eq!(d.k, 5.0);
        let d = ProblemSpec::Constant { value: 1.0 }.descriptors(&CmSetSpec::binary(2));
        assert_eq!(d, Descriptors { l: Some(0.0), k: 0.0 });
    }

    #[test]
    fn trace_quadratic_gradient() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, -0.3, 0.0, -0.3, 0.7]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, -0.5]);
        let c = DMatrix::from_row_slice(3, 2, &[0.1, -0.2, 0.3, 0.0, 0.4, 0.5]);
        let p = ProblemSpec::TraceQuadratic { a, b, c };
        p.validate(&CmSetSpec::semi_orthogonal(3, 2)).unwrap();
        let x = DMatrix::from_row_slice(3, 2, &[0.3, -0.1, 0.2, 0.4, -0.5, 0.1]);
        let e = p.eval(&x).unwrap();
        let h = 1e-6;
        for i in 0..6 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (p.value(&xp).unwrap() - p.value(&xm).unwrap()) / (2.0 * h);
            assert!((fd - e.grad[i]).abs() < 1e-7, "entry {i}: {fd} vs {}", e.grad[i]);
        }
    }

    #[test]
    fn validation_catches_dimension_errors() {
        let p = ProblemSpec::Quadratic {
            y: DVector::zeros(2),
            h: DMatrix::identity(2, 3),
        };
        assert!(p.validate(&CmSetSpec::binary(2)).is_err());
        let q = ProblemSpec::QuadForm {
            a: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]),
            b: DVector::zeros(2),
            sign: 1.0,
        };
        assert!(q.validate(&CmSetSpec::binary(2)).is_err());
        assert!(mimo().eval(&col(&[1.0, 2.0, 3.0])).is_err());
    }
}
