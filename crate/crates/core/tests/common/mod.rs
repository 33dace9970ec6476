#![allow(dead_code)]

use mimo_jscc::{Complex, ComplexMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

pub fn to_na(m: &ComplexMatrix) -> DMatrix<Complex> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<Complex>) -> ComplexMatrix {
    let rows: Vec<Vec<Complex>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).unwrap()
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn complex() -> impl Strategy<Value = Complex> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex::new(re, im))
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(complex(), rows * cols)
        .prop_map(move |v| ComplexMatrix::from_vec(rows, cols, v).unwrap())
}

pub fn any_matrix(max: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| matrix(r, c))
}

/// `A·Aᴴ + I`, well conditioned and Hermitian positive definite.
pub fn hpd(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n, n).prop_map(move |a| {
        let ah = mimo_jscc::numerics::hermitian(&a);
        mimo_jscc::numerics::matmul(&a, &ah)
            .unwrap()
            .add(&ComplexMatrix::identity(n))
            .unwrap()
    })
}
