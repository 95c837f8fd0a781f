//! Worked-example matrices shared by module unit tests.

use crate::matrix::{ComplexScalar, Matrix};

pub fn c(re: f64, im: f64) -> ComplexScalar {
    ComplexScalar::new(re, im)
}

pub fn r(re: f64) -> ComplexScalar {
    ComplexScalar::new(re, 0.0)
}

fn real_rows(rows: &[&[f64]]) -> Matrix {
    let rows: Vec<Vec<ComplexScalar>> = rows
        .iter()
        .map(|row| row.iter().map(|&v| r(v)).collect())
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

/// 3x3 normal matrix with spectrum {3+i, i, i}.
pub fn ex1_a() -> Matrix {
    Matrix::from_rows(&[
        vec![c(1.0, 1.0), r(1.0), r(1.0)],
        vec![r(1.0), c(1.0, 1.0), r(1.0)],
        vec![r(1.0), r(1.0), c(1.0, 1.0)],
    ])
    .unwrap()
}

/// 3x3 real matrix with spectrum {12, 2*sqrt(6), -2*sqrt(6)}; commutes with `ex1_a`.
pub fn ex1_b() -> Matrix {
    real_rows(&[&[7.0, 0.0, 5.0], &[2.0, 4.0, 6.0], &[3.0, 8.0, 1.0]])
}

/// 4x4 matrix with double eigenvalues 2 and -2.
pub fn ex2_a() -> Matrix {
    real_rows(&[
        &[0.0, 4.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 4.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

/// 4x4 permutation matrix with double eigenvalues 1 and -1; commutes with `ex2_a`.
pub fn ex2_b() -> Matrix {
    real_rows(&[
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
    ])
}

/// 6x6 real symmetric matrix with spectrum {10, 10, 0, -2, -4, -4}.
pub fn ex3_a() -> Matrix {
    real_rows(&[
        &[1.0, 0.0, 2.0, 3.0, 0.0, 4.0],
        &[0.0, 3.0, 0.0, 0.0, 7.0, 0.0],
        &[2.0, 0.0, 1.0, 4.0, 0.0, 3.0],
        &[3.0, 0.0, 4.0, 1.0, 0.0, 2.0],
        &[0.0, 7.0, 0.0, 0.0, 3.0, 0.0],
        &[4.0, 0.0, 3.0, 2.0, 0.0, 1.0],
    ])
}

/// 6x6 complex matrix built from 3x3 all-ones blocks; commutes and
/// star-commutes with `ex3_a`.
pub fn ex3_b() -> Matrix {
    Matrix::from_fn(6, 6, |i, j| {
        if (i < 3) == (j < 3) {
            c(0.0, 1.0)
        } else {
            r(1.0)
        }
    })
    .unwrap()
}

/// One-line image of the 6x6 permutation used with example 3:
/// column `i` of the matrix has its 1 in row `image[i]`.
pub fn ex3_p_image() -> Vec<usize> {
    vec![3, 0, 2, 4, 5, 1]
}
