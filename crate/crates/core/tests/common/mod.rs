#![allow(dead_code)]

use cmopt::{CmSetSpec, Point};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Point {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Small sets of every family, sized so brute force stays cheap.
pub fn small_catalog() -> Vec<CmSetSpec> {
    vec![
        CmSetSpec::binary(5),
        CmSetSpec::mpsk(3, 2),
        CmSetSpec::mpsk(4, 2),
        CmSetSpec::mpsk(8, 2),
        CmSetSpec::unit_sphere(4),
        CmSetSpec::semi_orthogonal(4, 3),
        CmSetSpec::unit_vector(5),
        CmSetSpec::selection(6, 3),
        CmSetSpec::partial_permutation(5, 3),
        CmSetSpec::size_assignment(6, vec![1, 2, 3]),
        CmSetSpec::nonneg_semi_orthogonal(5, 3),
        CmSetSpec::product(vec![
            CmSetSpec::binary(2),
            CmSetSpec::mpsk(4, 1),
            CmSetSpec::selection(4, 2),
        ]),
    ]
}

/// Finite sets whose members can be enumerated quickly.
pub fn finite_catalog() -> Vec<CmSetSpec> {
    vec![
        CmSetSpec::binary(5),
        CmSetSpec::mpsk(3, 3),
        CmSetSpec::mpsk(8, 2),
        CmSetSpec::unit_vector(5),
        CmSetSpec::selection(6, 3),
        CmSetSpec::partial_permutation(5, 3),
        CmSetSpec::size_assignment(6, vec![1, 2, 3]),
        CmSetSpec::product(vec![CmSetSpec::binary(2), CmSetSpec::mpsk(4, 1)]),
    ]
}

pub fn col(xs: &[f64]) -> Point {
    DMatrix::from_column_slice(xs.len(), 1, xs)
}
