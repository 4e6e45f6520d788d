//! Euclidean projections onto the convex hulls of the CM sets.
//!
//! Closed-form or one-dimensional-search projections cover the box, the
//! simplex, the capped simplex, the `ℓ₂` ball, the spectral-norm ball and
//! the MPSK polygon. The assignment polytopes and the non-negative spectral
//! ball are intersections of two simple sets and go through [`dykstra`].

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::ThinSvd;

/// Default stopping accuracy of the capped-simplex bisection.
pub const BISECTION_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DykstraConfig {
    pub max_iter: usize,
    /// Threshold on the Frobenius norm of the change between rounds.
    pub tol: f64,
}

impl Default for DykstraConfig {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-10,
        }
    }
}

impl DykstraConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Dykstra needs max_iter >= 1 and tol > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Component-wise clip of `z` into `[a, b]`.
pub fn clip_box(z: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if z.len() != a.len() || z.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: (z.len(), 1),
            got: (a.len().min(b.len()), 1),
        });
    }
    if let Some(i) = (0..z.len()).find(|&i| a[i] > b[i]) {
        return Err(Error::InvalidArgument(format!(
            "empty box: lower bound {} exceeds upper bound {} at index {i}",
            a[i], b[i]
        )));
    }
    Ok(DVector::from_fn(z.len(), |i, _| z[i].max(a[i]).min(b[i])))
}

/// Clip every entry into `[lo, hi]`.
pub fn clip_scalar(z: &DMatrix<f64>, lo: f64, hi: f64) -> DMatrix<f64> {
    z.map(|v| v.max(lo).min(hi))
}

/// Projection onto the unit simplex `{x ≥ 0, 1ᵀx = 1}` by sorting.
pub fn project_simplex(z: &DVector<f64>) -> DVector<f64> {
    let n = z.len();
    if n == 0 {
        return z.clone();
    }
    let mut u: Vec<f64> = z.iter().copied().collect();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    z.map(|v| (v - theta).max(0.0))
}

fn capped_sum(z: &DVector<f64>, tau: f64) -> f64 {
    z.iter().map(|v| (v - tau).clamp(0.0, 1.0)).sum()
}

/// Projection onto the capped simplex `{x ∈ [0,1]ⁿ | 1ᵀx = κ}`.
///
/// Bisection on the shift `τ` in `x = clip(z − τ1, 0, 1)` over the bracket
/// `[min z − 1, max z]`, stopped once `|1ᵀx − κ| ≤ eps`. The final shift is
/// then recomputed in closed form on the detected free set, which makes the
/// result exact up to rounding whenever the free set is identified.
pub fn project_capped_simplex(z: &DVector<f64>, kappa: usize, eps: f64) -> Result<DVector<f64>> {
    let n = z.len();
    if kappa == 0 || kappa > n {
        return Err(Error::InvalidArgument(format!(
            "capped simplex needs 1 <= kappa <= n, got kappa={kappa}, n={n}"
        )));
    }
    if kappa == n {
        return Ok(DVector::from_element(n, 1.0));
    }
    let target = kappa as f64;
    let mut lo = z.min() - 1.0;
    let mut hi = z.max();
    let mut tau = 0.5 * (lo + hi);
    for _ in 0..200 {
        tau = 0.5 * (lo + hi);
        let s = capped_sum(z, tau);
        if (s - target).abs() <= eps {
            break;
        }
        if s > target {
            lo = tau;
        } else {
            hi = tau;
        }
        if hi - lo <= f64::EPSILON * (1.0 + tau.abs()) {
            break;
        }
    }

    // Closed-form refinement on the free set {0 < z − τ < 1}.
    let mut free_sum = 0.0;
    let mut free = 0usize;
    let mut upper = 0usize;
    for v in z.iter() {
        let shifted = v - tau;
        if shifted >= 1.0 {
            upper += 1;
        } else if shifted > 0.0 {
            free += 1;
            free_sum += v;
        }
    }
    if free > 0 {
        let refined = (free_sum + upper as f64 - target) / free as f64;
        let candidate = z.map(|v| (v - refined).clamp(0.0, 1.0));
        if (candidate.sum() - target).abs() <= (capped_sum(z, tau) - target).abs() {
            return Ok(candidate);
        }
    }
    Ok(z.map(|v| (v - tau).clamp(0.0, 1.0)))
}

/// Projection onto the unit `ℓ₂` ball.
pub fn project_l2_ball(z: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = z.norm();
    if norm > 1.0 {
        z / norm
    } else {
        z.clone()
    }
}

/// Projection onto the spectral-norm unit ball: clip singular values to `[0, 1]`.
pub fn project_spectral_ball(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, r) = z.shape();
    if n < r {
        return Err(Error::InvalidArgument(format!(
            "spectral ball projection expects n >= r, got {n}x{r}"
        )));
    }
    if ThinSvd::new(z)?.sigma.iter().all(|s| *s <= 1.0) {
        return Ok(z.clone());
    }
    Ok(ThinSvd::new(z)?.recompose_with(|s| s.clamp(0.0, 1.0)))
}

/// Sector index `k ∈ {0, …, m−1}` of `z` for the MPSK polygon.
pub fn mpsk_sector(z: Complex<f64>, m: usize) -> usize {
    let m_f = m as f64;
    let k = ((z.arg() + PI / m_f) / (2.0 * PI / m_f)).floor() as i64;
    k.rem_euclid(m as i64) as usize
}

/// Projection onto the regular polygon `conv(Θ_m)`.
///
/// `z` is rotated into its sector `k`, the real part is clipped to
/// `[0, cos(π/m)]` and the imaginary part to `[−sin(π/m), sin(π/m)]`,
/// then the point is rotated back.
pub fn project_mpsk_hull(z: Complex<f64>, m: usize) -> Result<Complex<f64>> {
    if m < 3 {
        return Err(Error::InvalidArgument(format!("MPSK order must be >= 3, got {m}")));
    }
    let m_f = m as f64;
    let k = mpsk_sector(z, m);
    let rot = Complex::from_polar(1.0, 2.0 * PI * k as f64 / m_f);
    let y = z * rot.conj();
    let (s, c) = (PI / m_f).sin_cos();
    let clipped = Complex::new(y.re.clamp(0.0, c), y.im.clamp(-s, s));
    Ok(clipped * rot)
}

/// Projection onto `{x ∈ [0,1]ʳ | 1ᵀx ≤ 1}`.
pub fn project_row_cap(z: &DVector<f64>) -> DVector<f64> {
    let clipped = z.map(|v| v.clamp(0.0, 1.0));
    if clipped.sum() <= 1.0 || z.is_empty() {
        return clipped;
    }
    project_capped_simplex(z, 1, BISECTION_EPS).expect("kappa = 1 is always valid for a non-empty vector")
}

/// Dykstra's alternating projections onto `A ∩ B`.
///
/// Stops when both the change between rounds and the gap between the
/// `A`-iterate and the `B`-iterate drop to `cfg.tol` (Frobenius norm). The
/// returned point is the `B`-iterate.
pub fn dykstra<A, B>(project_a: A, project_b: B, z: &DMatrix<f64>, cfg: &DykstraConfig) -> Result<DMatrix<f64>>
where
    A: Fn(&DMatrix<f64>) -> DMatrix<f64>,
    B: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    cfg.validate()?;
    let mut x = z.clone();
    let mut p = DMatrix::zeros(z.nrows(), z.ncols());
    let mut q = DMatrix::zeros(z.nrows(), z.ncols());
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let y = project_a(&(&x + &p));
        p += &x - &y;
        let next = project_b(&(&y + &q));
        q += &y - &next;
        let change = (&next - &x).norm();
        let gap = (&next - &y).norm();
        residual = change.max(gap);
        x = next;
        if residual <= cfg.tol {
            return Ok(x);
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        residual,
        last: Box::new(x),
    })
}

fn check_kappa(n: usize, kappa: &[usize]) -> Result<()> {
    if kappa.is_empty() || kappa.iter().any(|&k| k == 0 || k > n) || kappa.iter().sum::<usize>() > n {
        return Err(Error::InvalidArgument(format!(
            "column sizes {kappa:?} are invalid for n = {n}"
        )));
    }
    Ok(())
}

/// Projection onto `{X ∈ [0,1]^{n×r} | Xᵀ1 = κ, X1 ≤ 1}` with the default Dykstra settings.
pub fn project_assignment_hull(z: &DMatrix<f64>, kappa: &[usize]) -> Result<DMatrix<f64>> {
    project_assignment_hull_with(z, kappa, &DykstraConfig::default())
}

pub fn project_assignment_hull_with(
    z: &DMatrix<f64>,
    kappa: &[usize],
    cfg: &DykstraConfig,
) -> Result<DMatrix<f64>> {
    let (n, r) = z.shape();
    check_kappa(n, kappa)?;
    if kappa.len() != r {
        return Err(Error::DimensionMismatch {
            expected: (n, kappa.len()),
            got: (n, r),
        });
    }
    let columns = |x: &DMatrix<f64>| {
        let mut out = x.clone();
        for j in 0..r {
            let col = project_capped_simplex(&x.column(j).clone_owned(), kappa[j], BISECTION_EPS)
                .expect("column sizes validated above");
            out.set_column(j, &col);
        }
        out
    };
    let rows = |x: &DMatrix<f64>| {
        let mut out = x.clone();
        for i in 0..n {
            let row = project_row_cap(&x.row(i).transpose());
            out.set_row(i, &row.transpose());
        }
        out
    };
    dykstra(columns, rows, z, cfg)
}

/// Projection onto `B₊ = {X ≥ 0 | σ₁(X) ≤ 1}`.
///
/// Accelerated projected gradient ascent (with gradient restarts) on the
/// multiplier `Λ ≥ 0` of `X ≥ 0`, where `X(Λ) = Π_ball(Z + Λ)`. Plain
/// Dykstra between the ball and the orthant needs tens of thousands of
/// rounds on some inputs; this typically finishes in a few hundred.
/// `cfg.tol` bounds the final change of `Λ`.
pub fn project_nonneg_spectral_ball(z: &DMatrix<f64>, cfg: &DykstraConfig) -> Result<DMatrix<f64>> {
    let (n, r) = z.shape();
    if n < r {
        return Err(Error::InvalidArgument(format!(
            "non-negative spectral ball expects n >= r, got {n}x{r}"
        )));
    }
    cfg.validate()?;
    let primal = |lam: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        Ok(project_spectral_ball(&(z + lam))?.map(|v| v.max(0.0)))
    };
    let mut lam = z.map(|v| (-v).max(0.0));
    let mut y = lam.clone();
    let mut t: f64 = 1.0;
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let x = project_spectral_ball(&(z + &y))?;
        let next = (&y - &x).map(|v| v.max(0.0));
        if (&y - &next).dot(&(&next - &lam)) > 0.0 {
            t = 1.0;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = &next + (&next - &lam) * ((t - 1.0) / t_next);
        change = (&next - &lam).norm();
        lam = next;
        t = t_next;
        if change <= cfg.tol {
            return primal(&lam);
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        residual: change,
        last: Box::new(primal(&lam)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn assert_close(a: &DVector<f64>, b: &DVector<f64>, tol: f64) {
        assert!((a - b).norm() <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn clip_box_examples() {
        let lo = v(&[-1.0, -1.0]);
        let hi = v(&[1.0, 1.0]);
        assert_eq!(clip_box(&v(&[2.0, -3.0]), &lo, &hi).unwrap(), v(&[1.0, -1.0]));
        assert_eq!(clip_box(&v(&[0.2, -0.7]), &lo, &hi).unwrap(), v(&[0.2, -0.7]));
        assert_eq!(clip_box(&v(&[0.5]), &v(&[-1.0]), &v(&[1.0])).unwrap(), v(&[0.5]));
        assert!(clip_box(&v(&[0.0]), &v(&[1.0]), &v(&[0.0])).is_err());
    }

    #[test]
    fn simplex_examples() {
        let third = 1.0 / 3.0;
        assert_close(&project_simplex(&v(&[0.5, 0.5, 0.5])), &v(&[third, third, third]), 1e-15);
        assert_close(&project_simplex(&v(&[2.0, 0.0, 0.0])), &v(&[1.0, 0.0, 0.0]), 0.0);
        let p = project_simplex(&v(&[0.3, 0.3, 0.2]));
        assert_close(&p, &v(&[1.1 / 3.0, 1.1 / 3.0, 0.8 / 3.0]), 1e-12);
        assert!((p.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_matches_grid_minimization() {
        // Dense grid over Δ³ with spacing 1/600.
        let z = v(&[0.3, 0.3, 0.2]);
        let steps = 600;
        let mut best = (f64::INFINITY, v(&[0.0, 0.0, 0.0]));
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let a = i as f64 / steps as f64;
                let b = j as f64 / steps as f64;
                let x = v(&[a, b, 1.0 - a - b]);
                let d = (&x - &z).norm();
                if d < best.0 {
                    best = (d, x);
                }
            }
        }
        assert_close(&project_simplex(&z), &best.1, 2.0 / steps as f64);
    }

    #[test]
    fn capped_simplex_examples() {
        let z = v(&[1.0, 1.0, 0.0, 0.0]);
        assert_close(&project_capped_simplex(&z, 2, BISECTION_EPS).unwrap(), &z, 1e-12);
        let p = project_capped_simplex(&v(&[5.0, 5.0, 5.0, 5.0]), 2, BISECTION_EPS).unwrap();
        assert_close(&p, &v(&[0.5, 0.5, 0.5, 0.5]), 1e-12);
        assert!(project_capped_simplex(&z, 0, BISECTION_EPS).is_err());
        assert!(project_capped_simplex(&z, 5, BISECTION_EPS).is_err());
        assert_eq!(project_capped_simplex(&z, 4, BISECTION_EPS).unwrap(), v(&[1.0; 4]));
    }

    #[test]
    fn capped_simplex_matches_tau_scan() {
        // Scan τ on a fine grid, keep the τ whose clipped sum is closest to κ.
        let z = v(&[0.9, 0.1, 0.8, 0.2]);
        let mut best = (f64::INFINITY, 0.0);
        let (lo, hi) = (z.min() - 1.0, z.max());
        let steps = 2_000_000;
        for s in 0..=steps {
            let tau = lo + (hi - lo) * s as f64 / steps as f64;
            let gap = (capped_sum(&z, tau) - 2.0).abs();
            if gap < best.0 {
                best = (gap, tau);
            }
        }
        let oracle = z.map(|x| (x - best.1).clamp(0.0, 1.0));
        let p = project_capped_simplex(&z, 2, BISECTION_EPS).unwrap();
        assert_close(&p, &oracle, 1e-5);
        // Here the free set is everything: τ = (2.0 − 2)/4 = 0, so z is its own projection.
        assert_close(&p, &z, 1e-12);
    }

    #[test]
    fn l2_ball_examples() {
        let z = DMatrix::from_column_slice(2, 1, &[3.0, 4.0]);
        assert!((project_l2_ball(&z) - DMatrix::from_column_slice(2, 1, &[0.6, 0.8])).norm() < 1e-15);
        let inner = DMatrix::from_column_slice(2, 1, &[0.1, -0.2]);
        assert_eq!(project_l2_ball(&inner), inner);
        assert_eq!(project_l2_ball(&DMatrix::zeros(3, 1)), DMatrix::zeros(3, 1));
    }

    #[test]
    fn spectral_ball_examples() {
        let two_i = DMatrix::<f64>::identity(2, 2) * 2.0;
        assert!((project_spectral_ball(&two_i).unwrap() - DMatrix::identity(2, 2)).norm() < 1e-12);
        let inner = DMatrix::from_row_slice(3, 2, &[0.3, 0.1, -0.2, 0.4, 0.0, 0.1]);
        assert!((project_spectral_ball(&inner).unwrap() - &inner).norm() < 1e-10);
        let d = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.5]);
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.5]);
        assert!((project_spectral_ball(&d).unwrap() - expected).norm() < 1e-12);
        assert!(project_spectral_ball(&DMatrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn spectral_ball_variational_inequality_on_orthogonal_samples() {
        // Extreme points of the 2x2 spectral ball are the orthogonal matrices.
        let z = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 0.5]);
        let p = project_spectral_ball(&z).unwrap();
        for s in 0..720 {
            let t = s as f64 * PI / 360.0;
            let (sn, cs) = t.sin_cos();
            for a in [
                DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]),
                DMatrix::from_row_slice(2, 2, &[cs, sn, sn, -cs]),
            ] {
                assert!((&p - &z).dot(&(a - &p)) >= -1e-12);
            }
        }
    }

    #[test]
    fn mpsk_examples() {
        let h = 0.5f64.sqrt();
        let p = project_mpsk_hull(Complex::new(1.0, 1.0), 4).unwrap();
        assert!((p - Complex::new(h, h)).norm() < 1e-12);
        let inner = Complex::new(0.1, -0.2);
        assert!((project_mpsk_hull(inner, 8).unwrap() - inner).norm() < 1e-15);
        let p = project_mpsk_hull(Complex::new(10.0, 0.0), 8).unwrap();
        assert!((p - Complex::new((PI / 8.0).cos(), 0.0)).norm() < 1e-12);
        assert_eq!(project_mpsk_hull(Complex::new(0.0, 0.0), 5).unwrap(), Complex::new(0.0, 0.0));
        assert!(project_mpsk_hull(inner, 2).is_err());
    }

    #[test]
    fn mpsk_matches_grid_scan_for_m4() {
        // Θ₄ = {(±h, ±h)}, so P₄ is the box [−h, h]².
        let h = 0.5f64.sqrt();
        let z = Complex::new(1.0, 1.0);
        let steps = 1000;
        let mut best = (f64::INFINITY, Complex::new(0.0, 0.0));
        for i in 0..=steps {
            for j in 0..=steps {
                let x = Complex::new(-h + 2.0 * h * i as f64 / steps as f64, -h + 2.0 * h * j as f64 / steps as f64);
                let d = (x - z).norm();
                if d < best.0 {
                    best = (d, x);
                }
            }
        }
        let p = project_mpsk_hull(z, 4).unwrap();
        assert!((p - best.1).norm() <= 2.0 * h / steps as f64 * 2.0);
    }

    #[test]
    fn row_cap_examples() {
        assert_close(&project_row_cap(&v(&[0.2, 0.3])), &v(&[0.2, 0.3]), 0.0);
        assert_close(&project_row_cap(&v(&[1.0, 1.0])), &v(&[0.5, 0.5]), 1e-12);
        // With τ = 0.4 the clipped vector (0.5, 0.5, 0) sums to 1.
        let p = project_row_cap(&v(&[0.9, 0.9, 0.1]));
        assert_close(&p, &v(&[0.5, 0.5, 0.0]), 1e-12);
        assert!((p.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dykstra_fixed_point_and_box() {
        let cfg = DykstraConfig::default();
        let bx = |x: &DMatrix<f64>| clip_scalar(x, -1.0, 1.0);
        let z = DMatrix::from_column_slice(2, 1, &[0.3, -0.4]);
        assert_eq!(dykstra(bx, bx, &z, &cfg).unwrap(), z);
        let z = DMatrix::from_column_slice(3, 1, &[3.0, -0.4, -7.0]);
        assert_eq!(dykstra(bx, bx, &z, &cfg).unwrap(), clip_scalar(&z, -1.0, 1.0));
    }

    #[test]
    fn dykstra_halfplane_box_matches_grid() {
        // A = {x + y ≤ 1}, B = [0, 1]², z = (1.5, 0.9).
        let half = |x: &DMatrix<f64>| {
            let excess = (x[0] + x[1] - 1.0).max(0.0) / 2.0;
            DMatrix::from_column_slice(2, 1, &[x[0] - excess, x[1] - excess])
        };
        let bx = |x: &DMatrix<f64>| clip_scalar(x, 0.0, 1.0);
        let z = DMatrix::from_column_slice(2, 1, &[1.5, 0.9]);
        let p = dykstra(half, bx, &z, &DykstraConfig::default()).unwrap();
        let steps = 2000;
        let mut best = (f64::INFINITY, (0.0, 0.0));
        for i in 0..=steps {
            for j in 0..=steps {
                let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                if a + b <= 1.0 {
                    let d = (a - 1.5).hypot(b - 0.9);
                    if d < best.0 {
                        best = (d, (a, b));
                    }
                }
            }
        }
        assert!((p[0] - best.1 .0).hypot(p[1] - best.1 .1) <= 2.0 / steps as f64);
        // Exact answer: (0.8, 0.2).
        assert!((p[0] - 0.8).abs() < 1e-9 && (p[1] - 0.2).abs() < 1e-9);
    }

    #[test]
    fn dykstra_reports_non_convergence() {
        let half = |x: &DMatrix<f64>| {
            let excess = (x[0] + x[1] - 1.0).max(0.0) / 2.0;
            DMatrix::from_column_slice(2, 1, &[x[0] - excess, x[1] - excess])
        };
        let bx = |x: &DMatrix<f64>| clip_scalar(x, 0.0, 1.0);
        let z = DMatrix::from_column_slice(2, 1, &[1.5, 0.9]);
        let cfg = DykstraConfig { max_iter: 1, tol: 1e-14 };
        match dykstra(half, bx, &z, &cfg) {
            Err(Error::NotConverged { iterations, .. }) => assert_eq!(iterations, 1),
            other => panic!("expected NotConverged, got {other:?}"),
        }
        assert!(dykstra(half, bx, &z, &DykstraConfig { max_iter: 0, tol: 1.0 }).is_err());
    }

    #[test]
    fn assignment_hull_examples() {
        let feasible = DMatrix::from_row_slice(3, 2, &[0.5, 0.2, 0.5, 0.3, 0.0, 0.5]);
        let p = project_assignment_hull(&feasible, &[1, 1]).unwrap();
        assert!((p - &feasible).norm() < 1e-9);
        let ones = DMatrix::from_element(2, 2, 1.0);
        let p = project_assignment_hull(&ones, &[1, 1]).unwrap();
        assert!((p - DMatrix::from_element(2, 2, 0.5)).norm() < 1e-9);
        assert!(project_assignment_hull(&ones, &[2, 1]).is_err());
        assert!(project_assignment_hull(&ones, &[1]).is_err());
    }

    #[test]
    fn nonneg_spectral_ball_examples() {
        let cfg = DykstraConfig::default();
        let inner = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.2, 0.4]);
        assert!((project_nonneg_spectral_ball(&inner, &cfg).unwrap() - &inner).norm() < 1e-10);
        let neg = -DMatrix::<f64>::identity(2, 2);
        assert!(project_nonneg_spectral_ball(&neg, &cfg).unwrap().norm() < 1e-10);
        let two_i = DMatrix::<f64>::identity(2, 2) * 2.0;
        assert!((project_nonneg_spectral_ball(&two_i, &cfg).unwrap() - DMatrix::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn nonneg_spectral_ball_diagonal_grid_oracle() {
        // For diagonal Z the projection stays diagonal; scan diag(a, b) on a grid
        // of [0, 1]² (the diagonal slice of B₊).
        let z = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 1.7]);
        let p = project_nonneg_spectral_ball(&z, &DykstraConfig::default()).unwrap();
        let steps = 1000;
        let mut best = (f64::INFINITY, (0.0, 0.0));
        for i in 0..=steps {
            for j in 0..=steps {
                let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                let d = (a + 0.5).hypot(b - 1.7);
                if d < best.0 {
                    best = (d, (a, b));
                }
            }
        }
        let expected = DMatrix::from_row_slice(2, 2, &[best.1 .0, 0.0, 0.0, best.1 .1]);
        assert!((p - expected).norm() <= 2.0 / steps as f64);
    }
}
