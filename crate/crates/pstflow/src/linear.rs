//! Linear solve seam. Desk-scale systems go through a dense LU; swapping in a
//! sparse factorization only touches this function.

use nalgebra::{DMatrix, DVector};

pub(crate) fn solve_dense(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(&b)
}
