use alloc::vec;
use alloc::vec::Vec;

use super::DenseMatrix;
use crate::{Error, Result};

/// Inner product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn check_width(x: &[f64], basis: &DenseMatrix) -> Result<()> {
    if x.len() != basis.rows() {
        return Err(Error::DimensionMismatch {
            context: "vector length vs basis rows",
            expected: basis.rows(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// `Bᵀx`: coordinates of the projection in the basis.
fn coefficients(x: &[f64], basis: &DenseMatrix) -> Vec<f64> {
    let mut c = vec![0.0; basis.cols()];
    for (row, &xi) in basis.row_iter().zip(x) {
        for (cj, &b) in c.iter_mut().zip(row) {
            *cj += xi * b;
        }
    }
    c
}

/// Orthogonal projection `B Bᵀ x` of `x` onto the span of the (orthonormal)
/// columns of `basis`. A basis with zero columns projects everything to 0.
pub fn project_onto(x: &[f64], basis: &DenseMatrix) -> Result<Vec<f64>> {
    check_width(x, basis)?;
    let c = coefficients(x, basis);
    Ok(basis.row_iter().map(|row| dot(row, &c)).collect())
}

/// Cosine of the angle between `x` and its projection onto `basis`, i.e.
/// `‖Bᵀx‖ / ‖x‖` clamped to `[0, 1]`. `None` when `x` is the zero vector.
pub fn projection_cosine(x: &[f64], basis: &DenseMatrix) -> Result<Option<f64>> {
    check_width(x, basis)?;
    let nx = norm(x);
    if nx == 0.0 {
        return Ok(None);
    }
    let np = norm(&coefficients(x, basis));
    Ok(Some((np / nx).clamp(0.0, 1.0)))
}

/// Angle in `[0, π/2]` between `x` and its projection onto the subspace
/// spanned by `basis`. It is `0` exactly on the subspace and `π/2` when the
/// projection vanishes, including for an empty basis.
///
/// `None` signals a zero `x`, for which no angle is defined.
///
/// Equal to `acos(‖Bᵀx‖ / ‖x‖)`, but evaluated as `atan2(‖x − p‖, ‖p‖)`:
/// `acos` loses half the digits next to 0, which would break the exact
/// scale invariance of small angles.
pub fn angle_to_subspace(x: &[f64], basis: &DenseMatrix) -> Result<Option<f64>> {
    check_width(x, basis)?;
    if norm(x) == 0.0 {
        return Ok(None);
    }
    let p = project_onto(x, basis)?;
    let residual: f64 = x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(Some(libm::atan2(libm::sqrt(residual), norm(&p))))
}

/// `max |BᵀB − I|` over all entries.
pub fn orthonormality_error(basis: &DenseMatrix) -> f64 {
    let k = basis.cols();
    let mut gram = vec![0.0; k * k];
    for row in basis.row_iter() {
        for a in 0..k {
            let ra = row[a];
            for b in 0..k {
                gram[a * k + b] += ra * row[b];
            }
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((gram[a * k + b] - target).abs());
        }
    }
    worst
}
