//! Brute-force ground truth on desk-scale instances.

pub mod sampling;
pub mod suites;

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};

use crate::cm_sets::{mpsk_point, CmSetSpec, Family, Point};
use crate::error::{Error, Result};
use crate::objectives::ProblemSpec;

/// Cap on the number of members an enumeration may produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_points: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self { max_points: 1_000_000 }
    }
}

/// Every member of a finite set, each exactly once.
///
/// Order: binary vectors count up in binary with bit `i` of the counter
/// giving entry `i` (`0 → −1`); MPSK vectors count up in base `m`;
/// selection and assignment sets list supports lexicographically column by
/// column; products vary the last factor fastest.
pub fn enumerate_set(spec: &CmSetSpec, budget: EnumerationBudget) -> Result<Vec<Point>> {
    spec.validate()?;
    if budget.max_points == 0 {
        return Err(Error::InvalidArgument("enumeration budget must be positive".into()));
    }
    let count = spec
        .member_count()
        .ok_or_else(|| Error::InfiniteFamily(spec.family.to_string()))?;
    if count > budget.max_points {
        return Err(Error::BudgetExceeded {
            needed: count,
            budget: budget.max_points,
        });
    }
    Ok(enumerate_unchecked(spec))
}

fn enumerate_unchecked(spec: &CmSetSpec) -> Vec<Point> {
    let n = spec.n;
    match spec.family {
        Family::Binary => (0..1u64 << n)
            .map(|code| Point::from_fn(n, 1, |i, _| if code >> i & 1 == 1 { 1.0 } else { -1.0 }))
            .collect(),
        Family::Mpsk => {
            let m = spec.order();
            let total = (m as u64).pow(n as u32);
            (0..total)
                .map(|code| {
                    let mut x = Point::zeros(2 * n, 1);
                    let mut c = code;
                    for k in 0..n {
                        let p = mpsk_point((c % m as u64) as usize, m);
                        c /= m as u64;
                        x[2 * k] = p.re;
                        x[2 * k + 1] = p.im;
                    }
                    x
                })
                .collect()
        }
        Family::UnitVector | Family::SelectionVector => {
            let k = if spec.family == Family::UnitVector { 1 } else { spec.kappa_scalar() };
            combinations(n, k)
                .into_iter()
                .map(|support| {
                    let mut x = Point::zeros(n, 1);
                    for i in support {
                        x[i] = 1.0;
                    }
                    x
                })
                .collect()
        }
        Family::PartialPermutation | Family::SizeAssignment => {
            let sizes = spec.column_sizes();
            let mut out = Vec::new();
            let mut current = DMatrix::zeros(n, sizes.len());
            let mut used = vec![false; n];
            assign_columns(&sizes, 0, &mut used, &mut current, &mut out);
            out
        }
        Family::Product => {
            let parts: Vec<Vec<Point>> = spec.factors.iter().map(enumerate_unchecked).collect();
            let mut out = vec![Vec::new()];
            for members in &parts {
                let mut next = Vec::with_capacity(out.len() * members.len());
                for prefix in &out {
                    for m in members {
                        let mut p: Vec<Point> = prefix.clone();
                        p.push(m.clone());
                        next.push(p);
                    }
                }
                out = next;
            }
            out.iter().map(|p| spec.join(p)).collect()
        }
        Family::UnitSphere | Family::SemiOrthogonal | Family::NonnegSemiOrthogonal => {
            unreachable!("member_count is None for continuous families")
        }
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn assign_columns(sizes: &[usize], j: usize, used: &mut [bool], cur: &mut Point, out: &mut Vec<Point>) {
    if j == sizes.len() {
        out.push(cur.clone());
        return;
    }
    let free: Vec<usize> = (0..used.len()).filter(|&i| !used[i]).collect();
    for pick in combinations(free.len(), sizes[j]) {
        let rows: Vec<usize> = pick.iter().map(|&p| free[p]).collect();
        for &i in &rows {
            used[i] = true;
            cur[(i, j)] = 1.0;
        }
        assign_columns(sizes, j + 1, used, cur, out);
        for &i in &rows {
            used[i] = false;
            cur[(i, j)] = 0.0;
        }
    }
}

/// Exact minimizer of `f` over a finite set; the earliest enumerated member
/// wins ties.
pub fn brute_min(prob: &ProblemSpec, spec: &CmSetSpec, budget: EnumerationBudget) -> Result<(Point, f64)> {
    prob.validate(spec)?;
    let mut best: Option<(Point, f64)> = None;
    for v in enumerate_set(spec, budget)? {
        let f = prob.value(&v)?;
        if best.as_ref().is_none_or(|(_, b)| f < *b) {
            best = Some((v, f));
        }
    }
    best.ok_or_else(|| Error::InvariantViolated("empty enumeration".into()))
}

/// Exact distance from `x` to a finite set.
pub fn brute_dist(spec: &CmSetSpec, x: &Point, budget: EnumerationBudget) -> Result<f64> {
    spec.check_point(x)?;
    Ok(enumerate_set(spec, budget)?
        .iter()
        .map(|v| (x - v).norm())
        .fold(f64::INFINITY, f64::min))
}

/// Distance from `x` on the chord between `e^{−jφ}` and `e^{jφ}` to the two
/// endpoints, together with the lower bound `(1 − |x|²) / (2 sin φ)`.
///
/// The lower bound grows like `1/φ` relative to `1 − |x|²`, so no linear
/// error bound `ν (C − ‖x‖²)` holds with a constant uniform over all CM sets.
pub fn counterexample_gap(phi: f64, x: Complex<f64>) -> Result<(f64, f64)> {
    if !(phi > 0.0 && phi <= PI / 2.0) {
        return Err(Error::InvalidArgument(format!("phi must lie in (0, π/2], got {phi}")));
    }
    let (s, c) = phi.sin_cos();
    let tol = 1e-12;
    if (x.re - c).abs() > tol || x.im.abs() > s + tol {
        return Err(Error::InvalidArgument(format!("{x} is not on the chord for phi = {phi}")));
    }
    let upper = Complex::from_polar(1.0, phi);
    let dist = (x - upper).norm().min((x - upper.conj()).norm());
    let lower = (1.0 - x.norm_sqr()) / (2.0 * s);
    if dist < lower - 1e-12 {
        return Err(Error::InvariantViolated(format!(
            "distance {dist} below the lower bound {lower} at phi = {phi}, x = {x}"
        )));
    }
    Ok((dist, lower))
}

/// Largest deviation between the analytic gradient and central differences
/// with step `h`, relative to `max(1, ‖∇f‖_∞)`.
pub fn fd_gradient_check(prob: &ProblemSpec, x: &Point, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let grad = prob.eval(x)?.grad;
    let scale = grad.amax().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let fd = (prob.value(&xp)? - prob.value(&xm)?) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use std::collections::HashSet;

    fn col(xs: &[f64]) -> Point {
        DMatrix::from_column_slice(xs.len(), 1, xs)
    }

    fn key(p: &Point) -> Vec<i64> {
        p.iter().map(|v| (v * 1e9).round() as i64).collect()
    }

    #[test]
    fn enumeration_sizes() {
        let b = EnumerationBudget::default();
        assert_eq!(enumerate_set(&CmSetSpec::binary(3), b).unwrap().len(), 8);
        assert_eq!(enumerate_set(&CmSetSpec::selection(4, 2), b).unwrap().len(), 6);
        assert_eq!(enumerate_set(&CmSetSpec::partial_permutation(3, 2), b).unwrap().len(), 6);
        assert_eq!(enumerate_set(&CmSetSpec::size_assignment(5, vec![1, 2]), b).unwrap().len(), 30);
        assert_eq!(enumerate_set(&CmSetSpec::mpsk(3, 2), b).unwrap().len(), 9);
        let prod = CmSetSpec::product(vec![CmSetSpec::binary(2), CmSetSpec::unit_vector(3)]);
        assert_eq!(enumerate_set(&prod, b).unwrap().len(), 12);
    }

    #[test]
    fn enumeration_has_no_duplicates_and_members_only() {
        let b = EnumerationBudget::default();
        for spec in [
            CmSetSpec::size_assignment(5, vec![2, 1]),
            CmSetSpec::mpsk(4, 2),
            CmSetSpec::selection(6, 3),
        ] {
            let all = enumerate_set(&spec, b).unwrap();
            let keys: HashSet<Vec<i64>> = all.iter().map(key).collect();
            assert_eq!(keys.len(), all.len());
            assert!(all.iter().all(|v| spec.contains(v, 1e-12).unwrap()));
        }
    }

    #[test]
    fn enumeration_errors() {
        assert!(matches!(
            enumerate_set(&CmSetSpec::unit_sphere(2), EnumerationBudget::default()),
            Err(Error::InfiniteFamily(_))
        ));
        assert!(matches!(
            enumerate_set(&CmSetSpec::binary(5), EnumerationBudget { max_points: 31 }),
            Err(Error::BudgetExceeded { needed: 32, budget: 31 })
        ));
    }

    #[test]
    fn brute_min_examples() {
        let b = EnumerationBudget::default();
        let mimo = ProblemSpec::Quadratic {
            y: DVector::from_vec(vec![0.3, -0.2]),
            h: DMatrix::identity(2, 2),
        };
        let (x, f) = brute_min(&mimo, &CmSetSpec::binary(2), b).unwrap();
        assert_eq!(x, col(&[1.0, -1.0]));
        assert!((f - 1.13).abs() < 1e-14);
        let (x, _) = brute_min(&ProblemSpec::Constant { value: 1.0 }, &CmSetSpec::binary(2), b).unwrap();
        assert_eq!(x, col(&[-1.0, -1.0]));
        let lin = ProblemSpec::QuadForm {
            a: DMatrix::zeros(3, 3),
            b: DVector::from_vec(vec![-1.0, -2.0, -3.0]),
            sign: 1.0,
        };
        let (x, f) = brute_min(&lin, &CmSetSpec::unit_vector(3), b).unwrap();
        assert_eq!(x, col(&[0.0, 0.0, 1.0]));
        assert_eq!(f, -3.0);
    }

    #[test]
    fn brute_dist_examples() {
        let b = EnumerationBudget::default();
        let d = brute_dist(&CmSetSpec::binary(2), &col(&[0.0, 0.0]), b).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(brute_dist(&CmSetSpec::binary(2), &col(&[1.0, -1.0]), b).unwrap(), 0.0);
    }

    #[test]
    fn counterexample_examples() {
        let (d, l) = counterexample_gap(PI / 2.0, Complex::new(0.0, 0.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-15 && (l - 0.5).abs() < 1e-15);
        let phi = 0.7;
        let (d, l) = counterexample_gap(phi, Complex::from_polar(1.0, phi)).unwrap();
        assert!(d < 1e-15 && l.abs() < 1e-15);
        let (d, l) = counterexample_gap(0.1, Complex::new(0.1f64.cos(), 0.0)).unwrap();
        assert!((d - 0.1f64.sin()).abs() < 1e-15);
        assert!((l - 0.1f64.sin() / 2.0).abs() < 1e-15);
        assert!(counterexample_gap(0.1, Complex::new(0.0, 0.0)).is_err());
        assert!(counterexample_gap(0.0, Complex::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn fd_check_examples() {
        let quad = ProblemSpec::Quadratic {
            y: DVector::from_vec(vec![0.3, -0.2, 1.0]),
            h: DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -0.5, 0.3, 0.0, 1.5]),
        };
        assert!(fd_gradient_check(&quad, &col(&[0.4, -0.7]), 1e-5).unwrap() <= 1e-5);
        assert_eq!(fd_gradient_check(&ProblemSpec::Constant { value: 2.0 }, &col(&[0.1]), 1e-5).unwrap(), 0.0);
        let affine = ProblemSpec::QuadForm {
            a: DMatrix::zeros(2, 2),
            b: DVector::from_vec(vec![1.5, -2.0]),
            sign: 1.0,
        };
        assert!(fd_gradient_check(&affine, &col(&[0.3, 0.2]), 1e-5).unwrap() <= 1e-10);
    }
}
