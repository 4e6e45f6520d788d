//! Small dense linear-algebra helpers shared by the projections and the
//! smoothness estimates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Thin SVD `Z = U Diag(σ) Vᵀ` with `σ` sorted in decreasing order.
///
/// Singular vectors are sign-normalized so that the first entry of each
/// left singular vector with magnitude above `1e-12` is non-negative; the
/// matching right singular vector is flipped along with it.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl ThinSvd {
    pub fn new(z: &DMatrix<f64>) -> Result<Self> {
        let (n, r) = z.shape();
        if n == 0 || r == 0 {
            return Ok(Self {
                u: DMatrix::zeros(n, 0),
                sigma: DVector::zeros(0),
                v: DMatrix::zeros(r, 0),
            });
        }
        let (u, sigma, v) = if n >= r {
            jacobi_svd(z)?
        } else {
            let (v, sigma, u) = jacobi_svd(&z.transpose())?;
            (u, sigma, v)
        };
        let k = sigma.len();

        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));

        let mut su = DMatrix::zeros(n, k);
        let mut sv = DMatrix::zeros(r, k);
        let mut ss = DVector::zeros(k);
        for (dst, &src) in order.iter().enumerate() {
            let mut ucol = u.column(src).clone_owned();
            let mut vcol = v.column(src).clone_owned();
            if let Some(first) = ucol.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    ucol.neg_mut();
                    vcol.neg_mut();
                }
            }
            su.set_column(dst, &ucol);
            sv.set_column(dst, &vcol);
            ss[dst] = sigma[src];
        }
        let sigma = ss;
        Ok(Self { u: su, sigma, v: sv })
    }

    /// `U Diag(g(σ)) Vᵀ`.
    pub fn recompose_with(&self, mut g: impl FnMut(f64) -> f64) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(g(*s));
        }
        us * self.v.transpose()
    }

    /// Polar factor `U Vᵀ`.
    pub fn polar(&self) -> DMatrix<f64> {
        &self.u * self.v.transpose()
    }
}

/// One-sided Jacobi SVD of a tall matrix (`n ≥ r`), unsorted.
///
/// nalgebra's bidiagonal SVD returns inaccurate singular vectors when
/// singular values repeat, which is the common case after clipping to the
/// spectral ball, so the decomposition is done here instead.
fn jacobi_svd(z: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let (n, r) = z.shape();
    if z.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailed);
    }
    let mut a = z.clone();
    let mut v = DMatrix::<f64>::identity(r, r);
    // the computed inner products carry about n·ε relative error
    let tol = (n as f64) * f64::EPSILON;
    // columns below this are rounding noise with no meaningful direction
    let floor = (tol * z.norm()).powi(2);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..r {
            for q in (p + 1)..r {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || alpha <= floor || beta <= floor || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut a, &mut v] {
                    for i in 0..m.nrows() {
                        let (xp, xq) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * xp - s * xq;
                        m[(i, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdFailed);
    }

    let sigma = DVector::from_fn(r, |j, _| a.column(j).norm());
    let scale = sigma.max();
    let mut u = DMatrix::zeros(n, r);
    let mut missing = Vec::new();
    for j in 0..r {
        if sigma[j] > scale * 1e-14 && sigma[j] > 0.0 {
            u.set_column(j, &(a.column(j) / sigma[j]));
        } else {
            missing.push(j);
        }
    }
    // Complete the left basis for (numerically) zero singular values.
    let mut candidate = 0;
    for j in missing {
        loop {
            let mut e = DVector::<f64>::zeros(n);
            e[candidate % n] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for k in 0..r {
                    if k != j {
                        let col = u.column(k).clone_owned();
                        let proj = col.dot(&e);
                        e -= col * proj;
                    }
                }
            }
            let norm = e.norm();
            if norm > 1e-6 {
                u.set_column(j, &(e / norm));
                break;
            }
            if candidate > 2 * n {
                return Err(Error::SvdFailed);
            }
        }
    }
    Ok((u, sigma, v))
}

/// Singular values of `z`, decreasing.
pub fn singular_values(z: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(ThinSvd::new(z)?.sigma)
}

pub fn nuclear_norm(z: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(z)?.sum())
}

/// Largest singular value of `op` by power iteration on `opᵀ op`.
///
/// The start vector comes from a fixed-seed generator, so repeated calls on
/// the same matrix return the same bits. A zero matrix returns `0`.
pub fn estimate_spectral_norm(op: &DMatrix<f64>) -> f64 {
    let cols = op.ncols();
    if cols == 0 || op.nrows() == 0 || op.iter().all(|x| *x == 0.0) {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cafe);
    let mut v = DVector::from_fn(cols, |_, _| rng.random_range(0.5..1.5));
    v /= v.norm();

    let mut estimate = 0.0;
    for _ in 0..20_000 {
        let mv = op * &v;
        let current = mv.norm();
        let w = op.transpose() * mv;
        let w_norm = w.norm();
        if w_norm == 0.0 {
            return current;
        }
        v = w / w_norm;
        if (current - estimate).abs() <= 1e-15 * current {
            estimate = current;
            break;
        }
        estimate = current;
    }
    estimate.max((op * &v).norm())
}

/// Sum of the `k` largest entries of `x`.
pub fn top_k_sum(x: &[f64], k: usize) -> f64 {
    let mut v: Vec<f64> = x.to_vec();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v.iter().take(k).sum()
}

/// Indices of the `k` largest entries; ties go to the lower index.
pub fn top_k_indices(x: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| {
        x[b].partial_cmp(&x[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_simple_matrices() {
        assert!((estimate_spectral_norm(&DMatrix::identity(3, 3)) - 1.0).abs() < 1e-12);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]));
        assert!((estimate_spectral_norm(&d) - 3.0).abs() < 1e-12);
        assert_eq!(estimate_spectral_norm(&DMatrix::zeros(2, 3)), 0.0);
    }

    #[test]
    fn spectral_norm_matches_dense_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = DMatrix::from_fn(5, 3, |_, _| rng.random_range(-1.0..1.0));
            let sigma = m.clone().svd(false, false).singular_values.max();
            let est = estimate_spectral_norm(&m);
            assert!((est - sigma).abs() <= 1e-8 * sigma, "{est} vs {sigma}");
        }
    }

    #[test]
    fn svd_is_sorted_and_sign_normalized() {
        let z = DMatrix::from_row_slice(3, 2, &[0.5, -2.0, 0.0, 1.0, -3.0, 0.2]);
        let svd = ThinSvd::new(&z).unwrap();
        assert!(svd.sigma[0] >= svd.sigma[1]);
        for j in 0..2 {
            let first = svd.u.column(j).iter().copied().find(|x| x.abs() > 1e-12).unwrap();
            assert!(first >= 0.0);
        }
        assert!((svd.recompose_with(|s| s) - &z).norm() < 1e-12);
    }

    #[test]
    fn svd_handles_repeated_singular_values() {
        // Built with σ = (1, 1, 0.786); nalgebra's own SVD misreports this one.
        let z = DMatrix::from_row_slice(
            5,
            3,
            &[
                -0.05000323031203574, 0.009584791770797955, 0.6835434235119348,
                0.10237584826596471, 0.17383141579584788, -0.14627535015307686,
                0.7099928660398114, 0.6690585175419106, 0.11747580729992821,
                -0.18308013645138863, 0.2930107473468848, -0.3523144118308874,
                0.6620799637641218, -0.6602903742699697, -0.05244329023219094,
            ],
        );
        let svd = ThinSvd::new(&z).unwrap();
        assert!((svd.sigma[0] - 1.0).abs() < 1e-14);
        assert!((svd.sigma[1] - 1.0).abs() < 1e-14);
        assert!((svd.recompose_with(|s| s) - &z).norm() < 1e-13);
        assert!((svd.u.transpose() * &svd.u - DMatrix::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn svd_of_parallel_columns_terminates() {
        let z = DMatrix::from_column_slice(2, 2, &[0.0, 0.14190035099111156, 0.0, 0.19714941763916807]);
        let svd = ThinSvd::new(&z).unwrap();
        assert!(svd.sigma[1].abs() < 1e-15);
        assert!((svd.recompose_with(|s| s) - &z).norm() < 1e-15);
    }

    #[test]
    fn svd_of_rank_deficient_and_wide_matrices() {
        let z = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 0.0, 0.0]);
        let svd = ThinSvd::new(&z).unwrap();
        assert!(svd.sigma[1].abs() < 1e-14);
        assert!((svd.u.transpose() * &svd.u - DMatrix::identity(2, 2)).norm() < 1e-13);
        assert!((svd.recompose_with(|s| s) - &z).norm() < 1e-13);
        let w = z.transpose();
        let svd = ThinSvd::new(&w).unwrap();
        assert_eq!(svd.u.shape(), (2, 2));
        assert_eq!(svd.v.shape(), (3, 2));
        assert!((svd.recompose_with(|s| s) - &w).norm() < 1e-13);
        let zero = ThinSvd::new(&DMatrix::zeros(3, 2)).unwrap();
        assert!((zero.polar().transpose() * zero.polar() - DMatrix::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn top_k_ties_prefer_low_index() {
        assert_eq!(top_k_indices(&[0.5, 0.5, 0.5, 0.1], 2), vec![0, 1]);
        assert_eq!(top_k_sum(&[0.1, 0.9, 0.8], 2), 0.9 + 0.8);
    }
}
