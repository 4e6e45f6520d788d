//! The catalog of constant-modulus sets.
//!
//! Every family carries its squared modulus `C`, a membership test, a
//! rounding map onto the set, the Euclidean distance to the set, a membership
//! test for its convex hull, the hull projection and the error-bound
//! functions that majorize the distance over the hull.
//!
//! Points are dense `nalgebra` matrices. Vector families use `n × 1`
//! columns, matrix families use `n × r`, MPSK vectors of `n` complex symbols
//! use a `2n × 1` column of interleaved `(re, im)` pairs, and products stack
//! the column-major flattening of every factor into one column.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::hull_projections::{self as hp, DykstraConfig, BISECTION_EPS};
use crate::linalg::{top_k_indices, top_k_sum, ThinSvd};

/// A point in the ambient space of a [`CmSetSpec`].
pub type Point = DMatrix<f64>;

/// Slack used when checking the hull precondition of the error-bound functions.
pub const PRECONDITION_TOL: f64 = 1e-6;

/// Largest search space (members or support labelings) for which
/// [`CmSetSpec::distance_to_set`] enumerates instead of returning a bound.
pub const BRUTE_FORCE_LIMIT: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[serde(alias = "Binary")]
    Binary,
    #[serde(alias = "MPSK", alias = "Mpsk")]
    Mpsk,
    #[serde(alias = "UnitSphere")]
    UnitSphere,
    #[serde(alias = "SemiOrthogonal")]
    SemiOrthogonal,
    #[serde(alias = "UnitVector")]
    UnitVector,
    #[serde(alias = "SelectionVector")]
    SelectionVector,
    #[serde(alias = "PartialPermutation")]
    PartialPermutation,
    #[serde(alias = "SizeAssignment")]
    SizeAssignment,
    #[serde(alias = "NonnegSemiOrthogonal")]
    NonnegSemiOrthogonal,
    #[serde(alias = "Product")]
    Product,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Binary,
        Family::Mpsk,
        Family::UnitSphere,
        Family::SemiOrthogonal,
        Family::UnitVector,
        Family::SelectionVector,
        Family::PartialPermutation,
        Family::SizeAssignment,
        Family::NonnegSemiOrthogonal,
        Family::Product,
    ];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Binary => "binary",
            Family::Mpsk => "mpsk",
            Family::UnitSphere => "unit_sphere",
            Family::SemiOrthogonal => "semi_orthogonal",
            Family::UnitVector => "unit_vector",
            Family::SelectionVector => "selection_vector",
            Family::PartialPermutation => "partial_permutation",
            Family::SizeAssignment => "size_assignment",
            Family::NonnegSemiOrthogonal => "nonneg_semi_orthogonal",
            Family::Product => "product",
        };
        f.write_str(name)
    }
}

/// Description of a CM set.
///
/// JSON form: `{"family": "...", "n": 4, "r": 2, "m": 8, "kappa": [1, 2], "factors": [...]}`.
/// `n` counts complex symbols for MPSK and is ignored for products.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmSetSpec {
    pub family: Family,
    #[serde(default)]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, deserialize_with = "scalar_or_vec", skip_serializing_if = "Vec::is_empty")]
    pub kappa: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<CmSetSpec>,
}

fn scalar_or_vec<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(k) => vec![k],
        OneOrMany::Many(v) => v,
    })
}

/// Distance to a CM set, flagged when only an upper bound could be computed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distance {
    pub value: f64,
    pub exact: bool,
}

fn base(family: Family, n: usize) -> CmSetSpec {
    CmSetSpec {
        family,
        n,
        r: None,
        m: None,
        kappa: Vec::new(),
        factors: Vec::new(),
    }
}

fn mpsk_nu(m: usize) -> f64 {
    if m == 3 {
        2.0
    } else {
        1.0 / (PI / m as f64).sin()
    }
}

/// Index of the nearest MPSK constellation point `e^{j(2πl+π)/m}`.
///
/// A point exactly halfway between two constellation points goes to the
/// lower index.
pub fn mpsk_nearest_index(z: Complex<f64>, m: usize) -> usize {
    let step = 2.0 * PI / m as f64;
    let t = (z.arg() - PI / m as f64) / step;
    let lo = t.floor();
    let frac = t - lo;
    let lo_idx = (lo as i64).rem_euclid(m as i64) as usize;
    let hi_idx = (lo as i64 + 1).rem_euclid(m as i64) as usize;
    if frac < 0.5 {
        lo_idx
    } else if frac > 0.5 {
        hi_idx
    } else {
        lo_idx.min(hi_idx)
    }
}

pub fn mpsk_point(l: usize, m: usize) -> Complex<f64> {
    Complex::from_polar(1.0, (2.0 * PI * l as f64 + PI) / m as f64)
}

fn symbols(x: &Point) -> impl Iterator<Item = Complex<f64>> + '_ {
    x.as_slice().chunks(2).map(|c| Complex::new(c[0], c[1]))
}

fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

impl CmSetSpec {
    pub fn binary(n: usize) -> Self {
        base(Family::Binary, n)
    }

    /// `n` symbols of `m`-ary PSK.
    pub fn mpsk(m: usize, n: usize) -> Self {
        CmSetSpec { m: Some(m), ..base(Family::Mpsk, n) }
    }

    pub fn unit_sphere(n: usize) -> Self {
        base(Family::UnitSphere, n)
    }

    pub fn semi_orthogonal(n: usize, r: usize) -> Self {
        CmSetSpec { r: Some(r), ..base(Family::SemiOrthogonal, n) }
    }

    pub fn unit_vector(n: usize) -> Self {
        base(Family::UnitVector, n)
    }

    pub fn selection(n: usize, kappa: usize) -> Self {
        CmSetSpec { kappa: vec![kappa], ..base(Family::SelectionVector, n) }
    }

    pub fn partial_permutation(n: usize, r: usize) -> Self {
        CmSetSpec { r: Some(r), ..base(Family::PartialPermutation, n) }
    }

    pub fn size_assignment(n: usize, kappa: Vec<usize>) -> Self {
        CmSetSpec { r: Some(kappa.len()), kappa, ..base(Family::SizeAssignment, n) }
    }

    pub fn nonneg_semi_orthogonal(n: usize, r: usize) -> Self {
        CmSetSpec { r: Some(r), ..base(Family::NonnegSemiOrthogonal, n) }
    }

    pub fn product(factors: Vec<CmSetSpec>) -> Self {
        CmSetSpec { factors, ..base(Family::Product, 0) }
    }

    /// Number of matrix columns (1 for vector families).
    pub fn cols(&self) -> usize {
        match self.family {
            Family::SemiOrthogonal | Family::PartialPermutation | Family::NonnegSemiOrthogonal => {
                self.r.unwrap_or(1)
            }
            Family::SizeAssignment => self.kappa.len(),
            _ => 1,
        }
    }

    /// MPSK order, 0 for other families.
    pub fn order(&self) -> usize {
        self.m.unwrap_or(0)
    }

    /// Selection size `κ` of a selection-vector set.
    pub fn kappa_scalar(&self) -> usize {
        self.kappa.first().copied().unwrap_or(0)
    }

    /// Column sizes of an assignment-type set (all ones for partial permutations).
    pub fn column_sizes(&self) -> Vec<usize> {
        match self.family {
            Family::PartialPermutation => vec![1; self.cols()],
            _ => self.kappa.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidSpec(format!("{}: {msg}", self.family)));
        if self.family != Family::Product && self.n == 0 {
            return fail("n must be positive".into());
        }
        match self.family {
            Family::Binary | Family::UnitSphere | Family::UnitVector => Ok(()),
            Family::Mpsk => match self.m {
                Some(m) if m >= 3 => Ok(()),
                other => fail(format!("order m must be >= 3, got {other:?}")),
            },
            Family::SemiOrthogonal | Family::PartialPermutation | Family::NonnegSemiOrthogonal => {
                match self.r {
                    Some(r) if r >= 1 && r <= self.n => Ok(()),
                    other => fail(format!("need 1 <= r <= n = {}, got r = {other:?}", self.n)),
                }
            }
            Family::SelectionVector => match self.kappa.as_slice() {
                [k] if *k >= 1 && *k <= self.n => Ok(()),
                other => fail(format!("need a single kappa in 1..={}, got {other:?}", self.n)),
            },
            Family::SizeAssignment => {
                let r = self.kappa.len();
                if r == 0 || r > self.n {
                    return fail(format!("need 1 <= r <= n, got r = {r}, n = {}", self.n));
                }
                if let Some(r_field) = self.r {
                    if r_field != r {
                        return fail(format!("r = {r_field} disagrees with {r} column sizes"));
                    }
                }
                if self.kappa.iter().any(|&k| k == 0 || k > self.n) {
                    return fail(format!("column sizes {:?} must lie in 1..={}", self.kappa, self.n));
                }
                if self.kappa.iter().sum::<usize>() > self.n {
                    return fail(format!("column sizes {:?} sum above n = {}", self.kappa, self.n));
                }
                Ok(())
            }
            Family::Product => {
                if self.factors.is_empty() {
                    return fail("needs at least one factor".into());
                }
                self.factors.iter().try_for_each(CmSetSpec::validate)
            }
        }
    }

    /// Squared modulus `C` shared by every member.
    pub fn modulus_sq(&self) -> f64 {
        match self.family {
            Family::Binary => self.n as f64,
            Family::Mpsk => self.n as f64,
            Family::UnitSphere | Family::UnitVector => 1.0,
            Family::SemiOrthogonal | Family::PartialPermutation | Family::NonnegSemiOrthogonal => {
                self.cols() as f64
            }
            Family::SelectionVector | Family::SizeAssignment => self.kappa.iter().sum::<usize>() as f64,
            Family::Product => self.factors.iter().map(CmSetSpec::modulus_sq).sum(),
        }
    }

    /// Shape `(rows, cols)` of points of this set.
    pub fn shape(&self) -> (usize, usize) {
        match self.family {
            Family::Mpsk => (2 * self.n, 1),
            Family::Product => (self.factors.iter().map(CmSetSpec::dim).sum(), 1),
            _ => (self.n, self.cols()),
        }
    }

    /// Ambient real dimension.
    pub fn dim(&self) -> usize {
        let (a, b) = self.shape();
        a * b
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.shape(),
                got: x.shape(),
            });
        }
        Ok(())
    }

    /// Splits a product point into factor points.
    pub fn split(&self, x: &Point) -> Vec<Point> {
        let mut offset = 0;
        self.factors
            .iter()
            .map(|f| {
                let (rows, cols) = f.shape();
                let len = rows * cols;
                let part = DMatrix::from_column_slice(rows, cols, &x.as_slice()[offset..offset + len]);
                offset += len;
                part
            })
            .collect()
    }

    /// Stacks factor points into a product point.
    pub fn join(&self, parts: &[Point]) -> Point {
        let data: Vec<f64> = parts.iter().flat_map(|p| p.as_slice().iter().copied()).collect();
        DMatrix::from_column_slice(data.len(), 1, &data)
    }

    /// Whether `x` satisfies every defining equation of the set within `tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.set_violation(x)? <= tol)
    }

    /// Largest violation of the set's defining equations at `x`.
    pub fn set_violation(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        let binary_gap = |v: f64, lo: f64, hi: f64| (v - lo).abs().min((v - hi).abs());
        Ok(match self.family {
            Family::Binary => x.iter().map(|&v| binary_gap(v, -1.0, 1.0)).fold(0.0, f64::max),
            Family::Mpsk => {
                let m = self.order();
                symbols(x)
                    .map(|z| (z - mpsk_point(mpsk_nearest_index(z, m), m)).norm())
                    .fold(0.0, f64::max)
            }
            Family::UnitSphere => (x.norm() - 1.0).abs(),
            Family::SemiOrthogonal => orthogonality_gap(x),
            Family::UnitVector | Family::SelectionVector => {
                let kappa = if self.family == Family::UnitVector { 1 } else { self.kappa_scalar() };
                let entries = x.iter().map(|&v| binary_gap(v, 0.0, 1.0)).fold(0.0, f64::max);
                entries.max((x.sum() - kappa as f64).abs())
            }
            Family::PartialPermutation | Family::SizeAssignment => {
                let entries = x.iter().map(|&v| binary_gap(v, 0.0, 1.0)).fold(0.0, f64::max);
                entries.max(assignment_sum_violation(x, &self.column_sizes()))
            }
            Family::NonnegSemiOrthogonal => {
                let negative = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
                negative.max(orthogonality_gap(x))
            }
            Family::Product => {
                let mut worst: f64 = 0.0;
                for (f, part) in self.factors.iter().zip(self.split(x)) {
                    worst = worst.max(f.set_violation(&part)?);
                }
                worst
            }
        })
    }

    /// Maps `x` to a member of the set.
    ///
    /// Exact Euclidean projection for binary, MPSK, sphere, semi-orthogonal,
    /// unit-vector and selection sets. Assignment sets use column-wise top-κ
    /// selection followed by a greedy repair of row conflicts; non-negative
    /// semi-orthogonal sets use support extraction plus column normalization.
    /// Both of those are feasible but not necessarily nearest.
    ///
    /// Ties: `0` rounds to `+1` in binary sets, the zero vector rounds to
    /// `e₁` on the sphere, equal top-κ candidates keep the lowest index, and
    /// an MPSK symbol on a decision boundary takes the lower constellation index.
    pub fn round_to_set(&self, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("cannot round a non-finite point".into()));
        }
        Ok(match self.family {
            Family::Binary => x.map(|v| if v >= 0.0 { 1.0 } else { -1.0 }),
            Family::Mpsk => {
                let m = self.order();
                let mut out = x.clone();
                for (k, z) in symbols(x).enumerate() {
                    let p = mpsk_point(mpsk_nearest_index(z, m), m);
                    out[2 * k] = p.re;
                    out[2 * k + 1] = p.im;
                }
                out
            }
            Family::UnitSphere => {
                let norm = x.norm();
                if norm == 0.0 {
                    let mut e1 = DMatrix::zeros(self.n, 1);
                    e1[0] = 1.0;
                    e1
                } else {
                    x / norm
                }
            }
            Family::SemiOrthogonal => {
                if x.iter().all(|v| *v == 0.0) {
                    DMatrix::identity(self.n, self.cols())
                } else {
                    ThinSvd::new(x)?.polar()
                }
            }
            Family::UnitVector => indicator(self.n, &top_k_indices(x.as_slice(), 1)),
            Family::SelectionVector => indicator(self.n, &top_k_indices(x.as_slice(), self.kappa_scalar())),
            Family::PartialPermutation | Family::SizeAssignment => greedy_assignment(x, &self.column_sizes()),
            Family::NonnegSemiOrthogonal => round_nonneg_orthogonal(x),
            Family::Product => {
                let parts = self
                    .factors
                    .iter()
                    .zip(self.split(x))
                    .map(|(f, p)| f.round_to_set(&p))
                    .collect::<Result<Vec<_>>>()?;
                self.join(&parts)
            }
        })
    }

    /// Euclidean distance from `x` to the set.
    ///
    /// Exact for every family except assignment and non-negative
    /// semi-orthogonal sets whose search space exceeds [`BRUTE_FORCE_LIMIT`];
    /// those fall back to the distance to [`round_to_set`](Self::round_to_set)
    /// with `exact = false`.
    pub fn distance_to_set(&self, x: &Point) -> Result<Distance> {
        self.check_point(x)?;
        let exact = |value: f64| Ok(Distance { value, exact: true });
        match self.family {
            Family::SemiOrthogonal => {
                let sigma = ThinSvd::new(x)?.sigma;
                exact(sigma.iter().map(|s| (s - 1.0).powi(2)).sum::<f64>().sqrt())
            }
            Family::UnitSphere => exact((x.norm() - 1.0).abs()),
            Family::Binary | Family::Mpsk | Family::UnitVector | Family::SelectionVector => {
                exact((x - self.round_to_set(x)?).norm())
            }
            Family::PartialPermutation | Family::SizeAssignment => {
                let sizes = self.column_sizes();
                match self.member_count() {
                    Some(count) if count <= BRUTE_FORCE_LIMIT => {
                        exact((x - best_assignment(x, &sizes)).norm())
                    }
                    _ => Ok(Distance {
                        value: (x - greedy_assignment(x, &sizes)).norm(),
                        exact: false,
                    }),
                }
            }
            Family::NonnegSemiOrthogonal => {
                let labelings = (self.cols() as u64 + 1).checked_pow(self.n as u32);
                match labelings {
                    Some(count) if count <= BRUTE_FORCE_LIMIT => exact((x - nearest_nonneg_orthogonal(x)).norm()),
                    _ => Ok(Distance {
                        value: (x - round_nonneg_orthogonal(x)).norm(),
                        exact: false,
                    }),
                }
            }
            Family::Product => {
                let mut sq = 0.0;
                let mut all_exact = true;
                for (f, part) in self.factors.iter().zip(self.split(x)) {
                    let d = f.distance_to_set(&part)?;
                    sq += d.value * d.value;
                    all_exact &= d.exact;
                }
                Ok(Distance {
                    value: sq.sqrt(),
                    exact: all_exact,
                })
            }
        }
    }

    /// Largest violation of the hull's defining inequalities at `x`.
    ///
    /// For non-negative semi-orthogonal sets this is the surrogate
    /// `B₊ = {X ≥ 0, σ₁(X) ≤ 1}`, not the (unknown) true hull.
    pub fn hull_violation(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        Ok(match self.family {
            Family::Binary => x.iter().map(|v| v.abs() - 1.0).fold(0.0, f64::max),
            Family::Mpsk => {
                let m = self.order();
                let c = (PI / m as f64).cos();
                let mut worst: f64 = 0.0;
                for z in symbols(x) {
                    for l in 0..m {
                        let rot = Complex::from_polar(1.0, 2.0 * PI * l as f64 / m as f64);
                        worst = worst.max((rot * z).re - c);
                    }
                }
                worst
            }
            Family::UnitSphere => (x.norm() - 1.0).max(0.0),
            Family::SemiOrthogonal => (ThinSvd::new(x)?.sigma.max() - 1.0).max(0.0),
            Family::UnitVector | Family::SelectionVector => {
                let kappa = if self.family == Family::UnitVector { 1 } else { self.kappa_scalar() };
                let upper = if self.family == Family::UnitVector { f64::INFINITY } else { 1.0 };
                let boxed = x.iter().map(|&v| (-v).max(v - upper)).fold(0.0, f64::max);
                boxed.max((x.sum() - kappa as f64).abs())
            }
            Family::PartialPermutation | Family::SizeAssignment => {
                let boxed = x.iter().map(|&v| (-v).max(v - 1.0)).fold(0.0, f64::max);
                boxed.max(assignment_sum_violation(x, &self.column_sizes()))
            }
            Family::NonnegSemiOrthogonal => {
                let negative = x.iter().map(|&v| -v).fold(0.0, f64::max);
                negative.max(ThinSvd::new(x)?.sigma.max() - 1.0)
            }
            Family::Product => {
                let mut worst: f64 = 0.0;
                for (f, part) in self.factors.iter().zip(self.split(x)) {
                    worst = worst.max(f.hull_violation(&part)?);
                }
                worst
            }
        })
    }

    pub fn hull_contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.hull_violation(x)? <= tol)
    }

    /// Euclidean projection onto the convex hull (onto `B₊` for the
    /// non-negative semi-orthogonal family).
    pub fn project_hull(&self, z: &Point) -> Result<Point> {
        self.project_hull_with(z, &DykstraConfig::default())
    }

    pub fn project_hull_with(&self, z: &Point, cfg: &DykstraConfig) -> Result<Point> {
        self.check_point(z)?;
        Ok(match self.family {
            Family::Binary => hp::clip_scalar(z, -1.0, 1.0),
            Family::Mpsk => {
                let m = self.order();
                let mut out = z.clone();
                for (k, s) in symbols(z).enumerate() {
                    let p = hp::project_mpsk_hull(s, m)?;
                    out[2 * k] = p.re;
                    out[2 * k + 1] = p.im;
                }
                out
            }
            Family::UnitSphere => hp::project_l2_ball(z),
            Family::SemiOrthogonal => hp::project_spectral_ball(z)?,
            Family::UnitVector => {
                let col = hp::project_simplex(&z.column(0).clone_owned());
                DMatrix::from_column_slice(self.n, 1, col.as_slice())
            }
            Family::SelectionVector => {
                let col = hp::project_capped_simplex(&z.column(0).clone_owned(), self.kappa_scalar(), BISECTION_EPS)?;
                DMatrix::from_column_slice(self.n, 1, col.as_slice())
            }
            Family::PartialPermutation | Family::SizeAssignment => {
                hp::project_assignment_hull_with(z, &self.column_sizes(), cfg)?
            }
            Family::NonnegSemiOrthogonal => hp::project_nonneg_spectral_ball(z, cfg)?,
            Family::Product => {
                let parts = self
                    .factors
                    .iter()
                    .zip(self.split(z))
                    .map(|(f, p)| f.project_hull_with(&p, cfg))
                    .collect::<Result<Vec<_>>>()?;
                self.join(&parts)
            }
        })
    }

    fn require_hull(&self, x: &Point) -> Result<()> {
        let violation = self.hull_violation(x)?;
        if violation > PRECONDITION_TOL {
            return Err(Error::OutsideHull { violation });
        }
        Ok(())
    }

    /// Constant `ν` of the error bound `dist(x, V) ≤ ν (C − ‖x‖²)`.
    ///
    /// `None` for the non-negative semi-orthogonal family (and products that
    /// contain it), whose only bound has square-root form. Products with
    /// mixed factors use the largest factor constant.
    pub fn nu(&self) -> Option<f64> {
        match self.family {
            Family::Binary | Family::UnitSphere | Family::SemiOrthogonal => Some(1.0),
            Family::Mpsk => Some(mpsk_nu(self.order())),
            Family::UnitVector | Family::SelectionVector => Some(2.0),
            Family::PartialPermutation => Some(3.0 * (self.cols() as f64).sqrt()),
            Family::SizeAssignment => Some(3.0 * self.modulus_sq().sqrt()),
            Family::NonnegSemiOrthogonal => None,
            Family::Product => self
                .factors
                .iter()
                .map(CmSetSpec::nu)
                .try_fold(0.0f64, |acc, nu| nu.map(|v| acc.max(v))),
        }
    }

    /// The sharpest catalogued error bound of each family.
    pub fn error_bound_tight(&self, x: &Point) -> Result<f64> {
        self.require_hull(x)?;
        Ok(match self.family {
            Family::Binary => self.n as f64 - x.lp_norm(1),
            Family::Mpsk => mpsk_nu(self.order()) * symbols(x).map(|z| 1.0 - z.norm_sqr()).sum::<f64>(),
            Family::UnitSphere => 1.0 - x.norm(),
            Family::SemiOrthogonal => self.cols() as f64 - ThinSvd::new(x)?.sigma.sum(),
            Family::UnitVector => 2.0 * (1.0 - x.max()),
            Family::SelectionVector => {
                let k = self.kappa_scalar();
                2.0 * (k as f64 - top_k_sum(x.as_slice(), k))
            }
            Family::PartialPermutation | Family::SizeAssignment => {
                let sizes = self.column_sizes();
                let deficit: f64 = sizes
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| k as f64 - top_k_sum(x.column(j).as_slice(), k))
                    .sum();
                3.0 * self.modulus_sq().sqrt() * deficit
            }
            Family::NonnegSemiOrthogonal => self.nonneg_sqrt_bound(x),
            Family::Product => {
                let mut total = 0.0;
                for (f, part) in self.factors.iter().zip(self.split(x)) {
                    total += f.error_bound_tight(&part)?;
                }
                total
            }
        })
    }

    /// The norm-form error bound `ν (C − ‖x‖²)`; square-root form
    /// `5 r^{3/4} √(C − ‖x‖²)` for the non-negative semi-orthogonal family.
    pub fn error_bound_norm(&self, x: &Point) -> Result<f64> {
        self.require_hull(x)?;
        if self.family == Family::NonnegSemiOrthogonal {
            return Ok(self.nonneg_sqrt_bound(x));
        }
        match self.nu() {
            Some(nu) => Ok(nu * (self.modulus_sq() - x.norm_squared())),
            None => {
                // Product with a square-root factor: add the factor bounds.
                let mut total = 0.0;
                for (f, part) in self.factors.iter().zip(self.split(x)) {
                    total += f.error_bound_norm(&part)?;
                }
                Ok(total)
            }
        }
    }

    fn nonneg_sqrt_bound(&self, x: &Point) -> f64 {
        let r = self.cols() as f64;
        5.0 * r.powf(0.75) * (self.modulus_sq() - x.norm_squared()).max(0.0).sqrt()
    }

    /// `√(C − ‖x‖²)`, valid over the hull of any CM set.
    pub fn universal_bound(&self, x: &Point) -> f64 {
        (self.modulus_sq() - x.norm_squared()).max(0.0).sqrt()
    }

    /// Number of members for finite families, saturating at `u64::MAX`.
    pub fn member_count(&self) -> Option<u64> {
        match self.family {
            Family::Binary => Some(2u64.checked_pow(self.n as u32).unwrap_or(u64::MAX)),
            Family::Mpsk => Some((self.order() as u64).checked_pow(self.n as u32).unwrap_or(u64::MAX)),
            Family::UnitVector => Some(self.n as u64),
            Family::SelectionVector => Some(binom(self.n, self.kappa_scalar())),
            Family::PartialPermutation | Family::SizeAssignment => {
                let mut free = self.n;
                let mut total: u64 = 1;
                for k in self.column_sizes() {
                    total = total.saturating_mul(binom(free, k));
                    free -= k.min(free);
                }
                Some(total)
            }
            Family::UnitSphere | Family::SemiOrthogonal | Family::NonnegSemiOrthogonal => None,
            Family::Product => self
                .factors
                .iter()
                .map(CmSetSpec::member_count)
                .try_fold(1u64, |acc, c| c.map(|c| acc.saturating_mul(c))),
        }
    }
}

fn indicator(n: usize, support: &[usize]) -> Point {
    let mut out = DMatrix::zeros(n, 1);
    for &i in support {
        out[i] = 1.0;
    }
    out
}

fn orthogonality_gap(x: &Point) -> f64 {
    let gram = x.transpose() * x;
    (gram - DMatrix::identity(x.ncols(), x.ncols())).norm()
}

fn assignment_sum_violation(x: &Point, sizes: &[usize]) -> f64 {
    let mut worst: f64 = 0.0;
    for (j, &k) in sizes.iter().enumerate() {
        worst = worst.max((x.column(j).sum() - k as f64).abs());
    }
    for i in 0..x.nrows() {
        worst = worst.max(x.row(i).sum() - 1.0);
    }
    worst
}

/// Column-wise top-κ selection with greedy repair of rows claimed twice.
///
/// A row claimed by several columns stays with the column holding its
/// largest value (lowest column on ties). Displaced slots are refilled in
/// column order from the free row with the largest value in that column.
fn greedy_assignment(x: &Point, sizes: &[usize]) -> Point {
    let (n, r) = x.shape();
    let mut claims: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, &k) in sizes.iter().enumerate() {
        for i in top_k_indices(x.column(j).as_slice(), k) {
            claims[i].push(j);
        }
    }
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut deficit = vec![0usize; r];
    for (i, cols) in claims.iter().enumerate() {
        if cols.is_empty() {
            continue;
        }
        let winner = *cols
            .iter()
            .max_by(|&&a, &&b| x[(i, a)].partial_cmp(&x[(i, b)]).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a)))
            .expect("non-empty");
        owner[i] = Some(winner);
        for &j in cols.iter().filter(|&&j| j != winner) {
            deficit[j] += 1;
        }
    }
    for j in 0..r {
        while deficit[j] > 0 {
            let best = (0..n)
                .filter(|&i| owner[i].is_none())
                .max_by(|&a, &b| x[(a, j)].partial_cmp(&x[(b, j)]).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a)))
                .expect("column sizes sum to at most n");
            owner[best] = Some(j);
            deficit[j] -= 1;
        }
    }
    let mut out = DMatrix::zeros(n, r);
    for (i, o) in owner.iter().enumerate() {
        if let Some(j) = o {
            out[(i, *j)] = 1.0;
        }
    }
    out
}

/// Member of the assignment set maximizing `⟨X, Z⟩`, i.e. the nearest member.
fn best_assignment(x: &Point, sizes: &[usize]) -> Point {
    struct Search<'a> {
        x: &'a Point,
        sizes: &'a [usize],
        used: Vec<bool>,
        chosen: Vec<Vec<usize>>,
        best_value: f64,
        best: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        fn column(&mut self, j: usize, value: f64) {
            if j == self.sizes.len() {
                if value > self.best_value {
                    self.best_value = value;
                    self.best = self.chosen.clone();
                }
                return;
            }
            self.subset(j, 0, self.sizes[j], value);
        }

        fn subset(&mut self, j: usize, start: usize, left: usize, value: f64) {
            if left == 0 {
                self.column(j + 1, value);
                return;
            }
            let n = self.x.nrows();
            for i in start..n {
                if self.used[i] {
                    continue;
                }
                self.used[i] = true;
                self.chosen[j].push(i);
                self.subset(j, i + 1, left - 1, value + self.x[(i, j)]);
                self.chosen[j].pop();
                self.used[i] = false;
            }
        }
    }

    let mut search = Search {
        x,
        sizes,
        used: vec![false; x.nrows()],
        chosen: vec![Vec::new(); sizes.len()],
        best_value: f64::NEG_INFINITY,
        best: Vec::new(),
    };
    search.column(0, 0.0);
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for (j, rows) in search.best.iter().enumerate() {
        for &i in rows {
            out[(i, j)] = 1.0;
        }
    }
    out
}

/// Best non-negative unit column supported inside `rows` for the column `x_j`:
/// the normalized positive part if it is non-zero, else the largest entry's unit vector.
fn best_nonneg_column(x: &Point, j: usize, rows: &[usize]) -> (f64, DVector<f64>) {
    let n = x.nrows();
    let pos_sq: f64 = rows.iter().map(|&i| x[(i, j)].max(0.0).powi(2)).sum();
    let mut col = DVector::zeros(n);
    if pos_sq > 0.0 {
        let norm = pos_sq.sqrt();
        for &i in rows {
            col[i] = x[(i, j)].max(0.0) / norm;
        }
        (norm, col)
    } else {
        let &best = rows
            .iter()
            .max_by(|&&a, &&b| x[(a, j)].partial_cmp(&x[(b, j)]).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a)))
            .expect("non-empty support");
        col[best] = 1.0;
        (x[(best, j)], col)
    }
}

/// Exact projection onto `S₊^{n,r}` by enumerating every assignment of rows
/// to columns (or to no column); columns of a non-negative orthonormal
/// matrix have disjoint supports, so this covers the whole set.
fn nearest_nonneg_orthogonal(x: &Point) -> Point {
    let (n, r) = x.shape();
    let base = r + 1;
    let total = base.pow(n as u32);
    let mut best_value = f64::NEG_INFINITY;
    let mut best_labels = vec![0usize; n];
    let mut labels = vec![0usize; n];
    let mut supports: Vec<Vec<usize>> = vec![Vec::new(); r];
    for code in 0..total {
        let mut c = code;
        for label in labels.iter_mut() {
            *label = c % base;
            c /= base;
        }
        for s in supports.iter_mut() {
            s.clear();
        }
        for (i, &label) in labels.iter().enumerate() {
            if label > 0 {
                supports[label - 1].push(i);
            }
        }
        if supports.iter().any(Vec::is_empty) {
            continue;
        }
        let value: f64 = (0..r).map(|j| best_nonneg_column(x, j, &supports[j]).0).sum();
        if value > best_value {
            best_value = value;
            best_labels.copy_from_slice(&labels);
        }
    }
    let mut out = DMatrix::zeros(n, r);
    for j in 0..r {
        let rows: Vec<usize> = (0..n).filter(|&i| best_labels[i] == j + 1).collect();
        out.set_column(j, &best_nonneg_column(x, j, &rows).1);
    }
    out
}

/// Feasible rounding onto `S₊^{n,r}`: anchor one distinct row per column by
/// greedy matching on the largest entries, give every other row to its
/// largest positive column, then normalize the positive part of each column.
fn round_nonneg_orthogonal(x: &Point) -> Point {
    let (n, r) = x.shape();
    let mut entries: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..r).map(move |j| (i, j))).collect();
    entries.sort_by(|&(i1, j1), &(i2, j2)| {
        x[(i2, j2)]
            .partial_cmp(&x[(i1, j1)])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then((j1, i1).cmp(&(j2, i2)))
    });
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut anchored = vec![false; r];
    for (i, j) in entries {
        if owner[i].is_none() && !anchored[j] {
            owner[i] = Some(j);
            anchored[j] = true;
        }
    }
    for i in 0..n {
        if owner[i].is_some() {
            continue;
        }
        let j = (0..r)
            .max_by(|&a, &b| x[(i, a)].partial_cmp(&x[(i, b)]).unwrap_or(std::cmp::Ordering::Equal).then(b.cmp(&a)))
            .expect("r >= 1");
        if x[(i, j)] > 0.0 {
            owner[i] = Some(j);
        }
    }
    let mut out = DMatrix::zeros(n, r);
    for j in 0..r {
        let rows: Vec<usize> = (0..n).filter(|&i| owner[i] == Some(j)).collect();
        out.set_column(j, &best_nonneg_column(x, j, &rows).1);
    }
    out
}
