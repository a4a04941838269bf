//! Dense linear algebra: the matrix type, GEMM, a symmetric eigensolver, the
//! thin SVD built on it, and the projection/angle geometry used by MASC.

mod eigen;
mod geometry;
mod matrix;
mod svd;

pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use geometry::{
    angle_to_subspace, dot, norm, orthonormality_error, project_onto, projection_cosine,
};
pub use matrix::DenseMatrix;
pub use svd::{orthonormalize_columns, svd_thin, SvdResult, RANK_CUTOFF};

pub(crate) use matrix::gemm;
