//! Seeded verification suites behind `cmopt check`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::sampling::{sample_hull, sample_member, sample_surrogate_hull};
use super::{brute_min, counterexample_gap, enumerate_set, EnumerationBudget};
use crate::cm_sets::{CmSetSpec, Family, Point};
use crate::error::{Error, Result};
use crate::objectives::ProblemSpec;
use crate::penalties::{eval_penalized, exactness_threshold, PenaltyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    ErrorBounds,
    Penalization,
    Projections,
    Counterexample,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::ErrorBounds,
        Suite::Penalization,
        Suite::Projections,
        Suite::Counterexample,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::ErrorBounds => "error-bounds",
            Suite::Penalization => "penalization",
            Suite::Projections => "projections",
            Suite::Counterexample => "counterexample",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub property: String,
    pub trials: usize,
    pub passed: usize,
    /// Rows outside any guarantee; they never fail the suite.
    pub informational: bool,
}

impl CheckRow {
    pub fn ok(&self) -> bool {
        self.informational || self.passed == self.trials
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub rows: Vec<CheckRow>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(CheckRow::ok)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.property.len()).max().unwrap_or(8).max(8);
        writeln!(f, "suite {}", self.suite.name())?;
        for row in &self.rows {
            let status = match (row.informational, row.ok()) {
                (true, _) => "info",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            writeln!(f, "  {:<width$}  {:>6}/{:<6}  {status}", row.property, row.passed, row.trials)?;
        }
        Ok(())
    }
}

struct Tally {
    rows: Vec<CheckRow>,
}

impl Tally {
    fn new() -> Self {
        Self { rows: Vec::new() }
    }

    fn record(&mut self, property: impl Into<String>, ok: bool) {
        self.record_row(property.into(), ok, false);
    }

    fn info(&mut self, property: impl Into<String>, ok: bool) {
        self.record_row(property.into(), ok, true);
    }

    fn record_row(&mut self, property: String, ok: bool, informational: bool) {
        if let Some(row) = self.rows.iter_mut().find(|r| r.property == property) {
            row.trials += 1;
            row.passed += ok as usize;
        } else {
            self.rows.push(CheckRow {
                property,
                trials: 1,
                passed: ok as usize,
                informational,
            });
        }
    }
}

/// One representative desk-scale set per family.
pub fn standard_catalog() -> Vec<CmSetSpec> {
    vec![
        CmSetSpec::binary(6),
        CmSetSpec::mpsk(8, 2),
        CmSetSpec::unit_sphere(5),
        CmSetSpec::semi_orthogonal(5, 3),
        CmSetSpec::unit_vector(6),
        CmSetSpec::selection(7, 3),
        CmSetSpec::partial_permutation(5, 3),
        CmSetSpec::size_assignment(6, vec![1, 2]),
        CmSetSpec::nonneg_semi_orthogonal(5, 2),
        CmSetSpec::product(vec![CmSetSpec::binary(2), CmSetSpec::mpsk(3, 1), CmSetSpec::unit_vector(3)]),
    ]
}

pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = match suite {
        Suite::ErrorBounds => error_bounds(&mut rng, trials)?,
        Suite::Penalization => penalization(&mut rng, trials)?,
        Suite::Projections => projections(&mut rng, trials)?,
        Suite::Counterexample => counterexample(&mut rng, trials)?,
    };
    Ok(SuiteReport { suite, rows })
}

const SLACK: f64 = 1e-9;

fn error_bounds(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckRow>> {
    let mut t = Tally::new();
    for spec in standard_catalog() {
        let fam = spec.family;
        for _ in 0..trials {
            let x = sample_surrogate_hull(&spec, rng)?;
            let dist = spec.distance_to_set(&x)?.value;
            let tight = spec.error_bound_tight(&x)?;
            let norm = spec.error_bound_norm(&x)?;
            t.record(format!("{fam}: dist <= tight"), dist <= tight + SLACK);
            t.record(format!("{fam}: tight <= norm"), tight <= norm + SLACK);

            let h = sample_hull(&spec, rng)?;
            let dist_h = spec.distance_to_set(&h)?.value;
            t.record(format!("{fam}: dist <= universal"), dist_h <= spec.universal_bound(&h) + SLACK);

            let v = sample_member(&spec, rng);
            // square-root bounds turn O(eps) rounding into O(sqrt eps)
            let tol = if spec.nu().is_some() { 1e-9 } else { 1e-6 };
            let zero = spec.error_bound_tight(&v)?.abs() <= tol && spec.error_bound_norm(&v)?.abs() <= 1e-6;
            t.record(format!("{fam}: bounds vanish on the set"), zero);
        }
    }
    Ok(t.rows)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Whether the enumerated minimizer of `F_λ` over the set is the brute
/// minimizer of `f`, and (for two-dimensional boxes) whether a grid scan of
/// the box finds nothing below it.
fn penalty_agrees(prob: &ProblemSpec, spec: &CmSetSpec, lambda: f64, grid: usize) -> Result<(bool, bool)> {
    let budget = EnumerationBudget::default();
    let (x_star, _) = brute_min(prob, spec, budget)?;
    let pen = PenaltyConfig::neg_square(lambda);
    let mut best: Option<(Point, f64)> = None;
    for v in enumerate_set(spec, budget)? {
        let value = eval_penalized(prob, spec, &pen, &v)?.value;
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((v, value));
        }
    }
    let (v_best, f_best) = best.expect("non-empty");
    let vertex_ok = v_best == x_star;
    let mut grid_ok = true;
    if spec.family == Family::Binary && spec.n == 2 && grid > 1 {
        let step = 2.0 / (grid - 1) as f64;
        for i in 0..grid {
            for j in 0..grid {
                let x = DMatrix::from_column_slice(2, 1, &[-1.0 + i as f64 * step, -1.0 + j as f64 * step]);
                if eval_penalized(prob, spec, &pen, &x)?.value < f_best - 1e-9 * f_best.abs().max(1.0) {
                    grid_ok = false;
                }
            }
        }
    }
    Ok((vertex_ok, grid_ok))
}

fn penalization(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckRow>> {
    let mut t = Tally::new();
    for trial in 0..trials {
        let n = 2 + trial % 5;
        let spec = CmSetSpec::binary(n);

        let h = gaussian_matrix(n, n, rng);
        let y = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let quad = ProblemSpec::Quadratic { y, h: h.clone() };
        let sigma_sq = crate::linalg::estimate_spectral_norm(&h).powi(2);
        let (vertex, grid) = penalty_agrees(&quad, &spec, sigma_sq + 1.0, 51)?;
        t.record("quadratic, lambda > L/2: minimizers agree", vertex);
        if n == 2 {
            t.record("quadratic, lambda > L/2: no grid point below", grid);
        }
        let (vertex, grid) = penalty_agrees(&quad, &spec, 0.1 * sigma_sq, 51)?;
        t.info("quadratic, lambda < L/2: minimizers agree", vertex && grid);

        let pieces = rng.random_range(2..=5);
        let a = gaussian_matrix(pieces, n, rng);
        let b = DVector::from_fn(pieces, |_, _| StandardNormal.sample(rng));
        let maxaff = ProblemSpec::MaxAffine { a, b };
        let threshold = exactness_threshold(&maxaff, &spec)?;
        let (vertex, grid) = penalty_agrees(&maxaff, &spec, threshold + 1.0, 51)?;
        t.record("max-affine, lambda > K nu: minimizers agree", vertex);
        if n == 2 {
            t.record("max-affine, lambda > K nu: no grid point below", grid);
        }
    }
    Ok(t.rows)
}

fn projections(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckRow>> {
    let mut t = Tally::new();
    for spec in standard_catalog() {
        let fam = spec.family;
        let (rows, cols) = spec.shape();
        for _ in 0..trials {
            let scale = 10f64.powf(rng.random_range(-1.0..1.0));
            let z1 = gaussian_matrix(rows, cols, rng) * scale;
            let z2 = gaussian_matrix(rows, cols, rng) * scale;
            let p1 = spec.project_hull(&z1)?;
            let p2 = spec.project_hull(&z2)?;
            let pp = spec.project_hull(&p1)?;
            t.record(format!("{fam}: idempotent"), (&pp - &p1).norm() <= 1e-9);
            t.record(
                format!("{fam}: non-expansive"),
                (&p1 - &p2).norm() <= (&z1 - &z2).norm() + 1e-9,
            );
            let a = sample_member(&spec, rng);
            let vi = (&p1 - &z1).dot(&(a - &p1));
            t.record(format!("{fam}: variational inequality"), vi >= -1e-7);
            t.record(format!("{fam}: lands in hull"), spec.hull_contains(&p1, 1e-8)?);
        }
    }
    Ok(t.rows)
}

fn counterexample(rng: &mut ChaCha8Rng, trials: usize) -> Result<Vec<CheckRow>> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let phi = rng.random_range(1e-6..=PI / 2.0);
        let beta = rng.random_range(-1.0..=1.0);
        let x = Complex::new(phi.cos(), beta * phi.sin());
        let ok = match counterexample_gap(phi, x) {
            Ok((dist, lower)) => dist >= lower - 1e-12,
            Err(Error::InvariantViolated(_)) => false,
            Err(e) => return Err(e),
        };
        t.record("dist >= (1 - |x|^2) / (2 sin phi)", ok);
    }
    let phi: f64 = 1e-3;
    let mid = Complex::new(phi.cos(), 0.0);
    let (dist, _) = counterexample_gap(phi, mid)?;
    t.record("midpoint ratio at phi = 1e-3 exceeds 100", dist / (1.0 - mid.norm_sqr()) > 100.0);
    Ok(t.rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        for s in Suite::ALL {
            let report = run_suite(s, 11, 10).unwrap_or_else(|e| panic!("{s:?}: {e}"));
            assert!(report.all_passed(), "{report}");
        }
    }
}
