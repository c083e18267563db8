//! Finite-difference and pointwise operator builders.
//!
//! All difference operators use forward differences with unit spacing and a
//! zero row at the last index along the differentiated axis, so constants
//! lie in the kernel of the gradient and `div = -grad^T` holds exactly.
//! Axis 0 is the fastest-varying axis of the vectorized layout; for images
//! stored row-major it is the horizontal (x) axis.

use crate::error::{Error, Result};
use crate::linalg::{GridDims, SparseOp};

/// Boundary handling of the difference stencils. Only one rule is built in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Forward difference, zero row at the trailing boundary.
    #[default]
    NeumannForward,
}

pub fn build_identity(n: usize) -> SparseOp {
    SparseOp::identity(n)
}

/// Square operator with `d` on its diagonal; zero entries are not stored.
pub fn build_diagonal(d: &[f64]) -> Result<SparseOp> {
    SparseOp::from_triplets(d.len(), d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, v)))
}

/// Forward difference along `axis`: `(D u)_p = u_{p + stride} - u_p`, zero
/// on the last slice of that axis.
pub fn build_partial(dims: &GridDims, axis: usize) -> Result<SparseOp> {
    if axis >= dims.ndim() {
        return Err(Error::Dimension(format!(
            "axis {axis} out of range for a {}-d grid",
            dims.ndim()
        )));
    }
    let n = dims.len();
    let stride = dims.stride(axis);
    let extent = dims.extents()[axis];
    let mut triplets = Vec::with_capacity(2 * n);
    for p in 0..n {
        if (p / stride) % extent + 1 < extent {
            triplets.push((p, p, -1.0));
            triplets.push((p, p + stride, 1.0));
        }
    }
    SparseOp::from_triplets(n, n, triplets)
}

/// One forward-difference block per axis, in axis order.
pub fn build_partials(dims: &GridDims) -> Result<Vec<SparseOp>> {
    (0..dims.ndim()).map(|axis| build_partial(dims, axis)).collect()
}

/// Discrete gradient, shape `(d N) x N`.
pub fn build_gradient(dims: &GridDims) -> Result<SparseOp> {
    let partials = build_partials(dims)?;
    SparseOp::vstack(&partials.iter().collect::<Vec<_>>())
}

/// Discrete divergence, the negative adjoint of [`build_gradient`].
pub fn build_divergence(dims: &GridDims) -> Result<SparseOp> {
    if dims.ndim() < 2 {
        return Err(Error::Unsupported(
            "divergence needs a grid with at least two axes".into(),
        ));
    }
    Ok(build_gradient(dims)?.transpose().scaled(-1.0))
}

/// Scalar curl of a planar field `(v1, v2)`: `∂x v2 - ∂y v1` with x = axis 0
/// and y = axis 1. Shape `N x 2N`, columns ordered `[v1, v2]`.
pub fn build_curl2d(dims: &GridDims) -> Result<SparseOp> {
    let [dx, dy] = curl_blocks(dims)?;
    SparseOp::hstack(&[&dx, &dy])
}

/// Column blocks of [`build_curl2d`]: `[-∂y, ∂x]`.
pub(crate) fn curl_blocks(dims: &GridDims) -> Result<[SparseOp; 2]> {
    if dims.ndim() != 2 {
        return Err(Error::Unsupported(format!(
            "curl is only built in for 2-d grids, got {} axes",
            dims.ndim()
        )));
    }
    Ok([build_partial(dims, 1)?.scaled(-1.0), build_partial(dims, 0)?])
}

/// Column blocks of [`build_divergence`]: `[-∂x^T, -∂y^T, ...]`.
pub(crate) fn divergence_blocks(dims: &GridDims) -> Result<Vec<SparseOp>> {
    if dims.ndim() < 2 {
        return Err(Error::Unsupported(
            "divergence needs a grid with at least two axes".into(),
        ));
    }
    Ok(build_partials(dims)?
        .iter()
        .map(|p| p.transpose().scaled(-1.0))
        .collect())
}
