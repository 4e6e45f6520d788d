//! Random members and hull points for property checks.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::cm_sets::{mpsk_point, CmSetSpec, Family, Point};
use crate::error::Result;
use crate::hull_projections::project_nonneg_spectral_ball;

fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Point {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// A uniformly random member for finite families; for continuous families
/// a member drawn from a rotation-invariant (or support-uniform) law.
pub fn sample_member<R: Rng + ?Sized>(spec: &CmSetSpec, rng: &mut R) -> Point {
    let n = spec.n;
    match spec.family {
        Family::Binary => DMatrix::from_fn(n, 1, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 }),
        Family::Mpsk => {
            let m = spec.order();
            let mut x = Point::zeros(2 * n, 1);
            for k in 0..n {
                let p = mpsk_point(rng.random_range(0..m), m);
                x[2 * k] = p.re;
                x[2 * k + 1] = p.im;
            }
            x
        }
        Family::UnitSphere => loop {
            let g = gaussian(n, 1, rng);
            let norm = g.norm();
            if norm > 1e-12 {
                break g / norm;
            }
        },
        Family::SemiOrthogonal => gaussian(n, spec.cols(), rng).qr().q(),
        Family::UnitVector | Family::SelectionVector => {
            let k = if spec.family == Family::UnitVector { 1 } else { spec.kappa_scalar() };
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            let mut x = Point::zeros(n, 1);
            for &i in &idx[..k] {
                x[i] = 1.0;
            }
            x
        }
        Family::PartialPermutation | Family::SizeAssignment => {
            let sizes = spec.column_sizes();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            let mut x = Point::zeros(n, sizes.len());
            let mut next = 0;
            for (j, &k) in sizes.iter().enumerate() {
                for &i in &idx[next..next + k] {
                    x[(i, j)] = 1.0;
                }
                next += k;
            }
            x
        }
        Family::NonnegSemiOrthogonal => {
            let r = spec.cols();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            // one guaranteed row per column, then the rest at random (possibly unused)
            let mut label = vec![None; n];
            for (j, &i) in idx.iter().take(r).enumerate() {
                label[i] = Some(j);
            }
            for &i in &idx[r..] {
                let pick = rng.random_range(0..=r);
                label[i] = if pick == r { None } else { Some(pick) };
            }
            let mut x = Point::zeros(n, r);
            for (i, l) in label.iter().enumerate() {
                if let Some(j) = l {
                    x[(i, *j)] = rng.random_range(0.05..1.0);
                }
            }
            for j in 0..r {
                let norm = x.column(j).norm();
                x.column_mut(j).unscale_mut(norm);
            }
            x
        }
        Family::Product => {
            let parts: Vec<Point> = spec.factors.iter().map(|f| sample_member(f, rng)).collect();
            spec.join(&parts)
        }
    }
}

fn convex_combination<R: Rng + ?Sized>(spec: &CmSetSpec, rng: &mut R) -> Point {
    let count = rng.random_range(1..=4);
    let weights: Vec<f64> = (0..count).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let (rows, cols) = spec.shape();
    let mut x = Point::zeros(rows, cols);
    for w in weights {
        x += sample_member(spec, rng) * (w / total);
    }
    x
}

/// A random point of the convex hull.
///
/// Draws from a mixture: convex combinations of one to four members (so
/// members and low-dimensional faces show up), hull projections of scaled
/// Gaussians (boundary-heavy), and a family-specific interior law. The
/// non-negative semi-orthogonal family only uses convex combinations, since
/// its exact hull has no other known description.
pub fn sample_hull<R: Rng + ?Sized>(spec: &CmSetSpec, rng: &mut R) -> Result<Point> {
    if spec.family == Family::Product {
        let parts = spec
            .factors
            .iter()
            .map(|f| sample_hull(f, rng))
            .collect::<Result<Vec<_>>>()?;
        return Ok(spec.join(&parts));
    }
    if spec.family == Family::NonnegSemiOrthogonal {
        return Ok(convex_combination(spec, rng));
    }
    let (rows, cols) = spec.shape();
    Ok(match rng.random_range(0..3) {
        0 => convex_combination(spec, rng),
        1 => {
            let scale = 10f64.powf(rng.random_range(-1.5..1.0));
            spec.project_hull(&(gaussian(rows, cols, rng) * scale))?
        }
        _ => match spec.family {
            Family::Binary => DMatrix::from_fn(rows, 1, |_, _| rng.random_range(-1.0..=1.0)),
            Family::UnitSphere => {
                let dir = sample_member(spec, rng);
                dir * rng.random::<f64>().powf(1.0 / rows as f64)
            }
            Family::SemiOrthogonal => {
                let svd = crate::linalg::ThinSvd::new(&gaussian(rows, cols, rng))?;
                svd.recompose_with(|_| rng.random::<f64>())
            }
            _ => convex_combination(spec, rng),
        },
    })
}

/// A random point of `B₊ = {X ≥ 0, σ₁(X) ≤ 1}`, the surrogate hull of the
/// non-negative semi-orthogonal family. Falls back to [`sample_hull`] for
/// other families.
pub fn sample_surrogate_hull<R: Rng + ?Sized>(spec: &CmSetSpec, rng: &mut R) -> Result<Point> {
    if spec.family != Family::NonnegSemiOrthogonal {
        return sample_hull(spec, rng);
    }
    let (rows, cols) = spec.shape();
    Ok(match rng.random_range(0..3) {
        0 => convex_combination(spec, rng),
        1 => {
            let scale = 10f64.powf(rng.random_range(-1.0..0.5));
            project_nonneg_spectral_ball(&(gaussian(rows, cols, rng) * scale), &Default::default())?
        }
        _ => {
            let z = DMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>());
            let top = crate::linalg::ThinSvd::new(&z)?.sigma[0];
            z * (rng.random::<f64>() / top)
        }
    })
}
