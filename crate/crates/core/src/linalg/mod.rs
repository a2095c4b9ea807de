//! Sparse and dense linear algebra used by the models.

mod dense;
mod sparse;
mod svd;

pub use dense::{axpy, dot, norm, DenseMatrix};
pub use sparse::CsrMatrix;
pub use svd::{symmetric_eigen, truncated_svd, SvdParams, TruncatedSvd};
