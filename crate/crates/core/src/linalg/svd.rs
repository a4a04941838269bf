use alloc::vec::Vec;

use super::{symmetric_eigen, DenseMatrix};
use crate::{Error, Result};

/// Singular values below `RANK_CUTOFF * largest` count as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Singular values and right singular vectors of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// `min(rows, cols)` singular values, non-increasing.
    pub singular_values: Vec<f64>,
    /// `cols x min(rows, cols)`; orthonormal columns paired with `singular_values`.
    pub right_vectors: DenseMatrix,
}

impl SvdResult {
    /// Number of singular values above the [`RANK_CUTOFF`].
    pub fn numerical_rank(&self) -> usize {
        let Some(&top) = self.singular_values.first() else {
            return 0;
        };
        if top == 0.0 {
            return 0;
        }
        self.singular_values
            .iter()
            .take_while(|&&s| s > RANK_CUTOFF * top)
            .count()
    }

    /// Left singular vectors `U = M V Σ⁺` for the matrix `m` this result was
    /// computed from. Columns belonging to zero singular values are zero.
    pub fn left_vectors(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        let mut u = m.matmul(&self.right_vectors)?;
        let r = self.singular_values.len();
        for i in 0..u.rows() {
            let row = u.row_mut(i);
            for (x, &s) in row.iter_mut().zip(&self.singular_values) {
                *x = if s > 0.0 { *x / s } else { 0.0 };
            }
        }
        debug_assert_eq!(u.cols(), r);
        Ok(u)
    }

    /// `U diag(s) Vᵀ` for the matrix `m` this result was computed from.
    pub fn reconstruct(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        let mut us = self.left_vectors(m)?;
        for i in 0..us.rows() {
            for (x, &s) in us.row_mut(i).iter_mut().zip(&self.singular_values) {
                *x *= s;
            }
        }
        us.matmul_transpose(&self.right_vectors)
    }
}

/// Thin SVD of `m`: singular values and right singular vectors.
///
/// The eigenvectors of the smaller Gram matrix (`mᵀm` or `m mᵀ`) fix the
/// singular directions. Singular values are then measured directly as
/// `‖m v‖` (or `‖mᵀ u‖`) rather than as square roots of Gram eigenvalues, so
/// they keep accuracy relative to the largest value down to round-off; that
/// is what lets the [`RANK_CUTOFF`] separate genuine null directions.
pub fn svd_thin(m: &DenseMatrix) -> Result<SvdResult> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("svd_thin needs at least one row and one column"));
    }
    m.check_finite()?;
    let no_conv = |_| Error::NoConvergence { rows, cols };

    let (mut values, mut right) = if cols <= rows {
        let gram = m.transpose_matmul(m)?;
        let eig = symmetric_eigen(&gram).map_err(no_conv)?;
        let projected = m.matmul(&eig.vectors)?;
        let values = column_norms(&projected);
        (values, eig.vectors)
    } else {
        let gram = m.matmul_transpose(m)?;
        let eig = symmetric_eigen(&gram).map_err(no_conv)?;
        let mut v = m.transpose_matmul(&eig.vectors)?;
        let values = column_norms(&v);
        for i in 0..v.rows() {
            for (x, &s) in v.row_mut(i).iter_mut().zip(&values) {
                if s > 0.0 {
                    *x /= s;
                }
            }
        }
        (values, v)
    };

    // Refined values can swap neighbours that were tied in the Gram spectrum.
    let r = values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    if order.iter().enumerate().any(|(a, &b)| a != b) {
        let mut permuted = DenseMatrix::zeros(right.rows(), r);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..right.rows() {
                permuted.set(i, dst, right.get(i, src));
            }
        }
        right = permuted;
        values = order.iter().map(|&i| values[i]).collect();
    }

    if cols > rows {
        // v = mᵀu/σ loses orthogonality as σ approaches zero; restore it.
        orthonormalize_columns(&mut right);
    }

    Ok(SvdResult {
        singular_values: values,
        right_vectors: right,
    })
}

fn column_norms(m: &DenseMatrix) -> Vec<f64> {
    let mut sq = alloc::vec![0.0; m.cols()];
    for row in m.row_iter() {
        for (acc, &x) in sq.iter_mut().zip(row) {
            *acc += x * x;
        }
    }
    sq.into_iter().map(libm::sqrt).collect()
}

/// Two-pass modified Gram–Schmidt over the columns, in place.
///
/// A column that collapses (its residual is tiny relative to its original
/// length) is replaced by the first standard basis vector that completes the
/// orthonormal set, so the output always has orthonormal columns.
pub fn orthonormalize_columns(m: &mut DenseMatrix) {
    let (rows, cols) = m.shape();
    assert!(cols <= rows, "cannot orthonormalize {cols} columns in dimension {rows}");
    let mut basis = m.transpose();
    for j in 0..cols {
        let (done, rest) = basis.as_mut_slice().split_at_mut(j * rows);
        let col = &mut rest[..rows];
        let original = libm::sqrt(col.iter().map(|x| x * x).sum());
        for _ in 0..2 {
            reorthogonalize(done, rows, col);
        }
        let mut len = libm::sqrt(col.iter().map(|x| x * x).sum::<f64>());
        if original == 0.0 || len <= 1e-8 * original {
            for e in 0..rows {
                col.iter_mut().for_each(|x| *x = 0.0);
                col[e] = 1.0;
                for _ in 0..2 {
                    reorthogonalize(done, rows, col);
                }
                len = libm::sqrt(col.iter().map(|x| x * x).sum::<f64>());
                if len > 0.5 {
                    break;
                }
            }
        }
        col.iter_mut().for_each(|x| *x /= len);
    }
    *m = basis.transpose();
}

fn reorthogonalize(done: &[f64], rows: usize, col: &mut [f64]) {
    for q in done.chunks_exact(rows) {
        let proj: f64 = q.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
        for (c, &qv) in col.iter_mut().zip(q) {
            *c -= proj * qv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_error;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_has_unit_singular_values() {
        let s = svd_thin(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(s.singular_values, alloc::vec![1.0, 1.0, 1.0]);
        assert_eq!(s.numerical_rank(), 3);
    }

    #[test]
    fn rank_one_outer_product() {
        // ‖a‖ = 2, ‖b‖ = 3.
        let a = [2.0 / 3.0 * 1.0, 2.0 / 3.0 * 2.0, 2.0 / 3.0 * 2.0];
        let b = [0.0, 3.0, 0.0, 0.0];
        let mut m = DenseMatrix::zeros(3, 4);
        for i in 0..3 {
            for j in 0..4 {
                m.set(i, j, a[i] * b[j]);
            }
        }
        let s = svd_thin(&m).unwrap();
        assert_abs_diff_eq!(s.singular_values[0], 6.0, epsilon = 1e-12);
        for &v in &s.singular_values[1..] {
            assert!(v <= RANK_CUTOFF * 6.0, "{v}");
        }
        assert_eq!(s.numerical_rank(), 1);
        assert!(orthonormality_error(&s.right_vectors) < 1e-12);
    }

    #[test]
    fn wide_matrix_reconstructs() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0, -1.0, 3.0], [0.5, -1.0, 2.0, 1.0, 0.0]])
            .unwrap();
        let s = svd_thin(&m).unwrap();
        assert_eq!(s.singular_values.len(), 2);
        assert_eq!(s.right_vectors.shape(), (5, 2));
        let back = s.reconstruct(&m).unwrap();
        for (x, y) in back.as_slice().iter().zip(m.as_slice()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(svd_thin(&DenseMatrix::zeros(0, 3)).is_err());
        let nan = DenseMatrix::from_vec(1, 2, alloc::vec![1.0, f64::NAN]).unwrap();
        assert!(matches!(svd_thin(&nan), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let s = svd_thin(&DenseMatrix::zeros(4, 3)).unwrap();
        assert_eq!(s.numerical_rank(), 0);
        let s = svd_thin(&DenseMatrix::zeros(2, 5)).unwrap();
        assert_eq!(s.numerical_rank(), 0);
        assert!(orthonormality_error(&s.right_vectors) < 1e-12);
    }
}
