//! Grid vectorization and the compressed sparse row kernel.
//!
//! Grid data is flattened with the first axis varying fastest, so element
//! `(i1, i2, i3)` of a grid with extents `(n1, n2, n3)` lands at index
//! `i1 + n1 * i2 + n1 * n2 * i3`. Every operator in the crate is a
//! [`SparseOp`] acting on vectors laid out this way.

use ndarray::{ArrayBase, ArrayD, Data, Dimension, IxDyn, ShapeBuilder};

use crate::error::{Error, Result};

/// Extents of a regular cartesian grid with one to three axes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridDims {
    extents: Vec<usize>,
}

impl GridDims {
    pub fn new(extents: &[usize]) -> Result<Self> {
        if extents.is_empty() || extents.len() > 3 {
            return Err(Error::Dimension(format!(
                "grids have 1 to 3 axes, got {}",
                extents.len()
            )));
        }
        if let Some(axis) = extents.iter().position(|&n| n == 0) {
            return Err(Error::Dimension(format!("extent of axis {axis} is zero")));
        }
        extents
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Capacity(format!("grid {extents:?} has too many elements")))?;
        Ok(Self {
            extents: extents.to_vec(),
        })
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn ndim(&self) -> usize {
        self.extents.len()
    }

    /// Number of grid points, the length of the vectorized representation.
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distance in the vectorized layout between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.extents[..axis].iter().product()
    }
}

/// Flattens `grid` into a vector with the first axis varying fastest.
pub fn vectorize<S, D>(grid: &ArrayBase<S, D>, dims: &GridDims) -> Result<Vec<f64>>
where
    S: Data<Elem = f64>,
    D: Dimension,
{
    if grid.shape() != dims.extents() {
        return Err(Error::Dimension(format!(
            "array of shape {:?} does not match grid {:?}",
            grid.shape(),
            dims.extents()
        )));
    }
    // Reversing the axes and walking in logical order visits axis 0 fastest.
    Ok(grid.t().iter().copied().collect())
}

/// Inverse of [`vectorize`].
pub fn devectorize(values: &[f64], dims: &GridDims) -> Result<ArrayD<f64>> {
    if values.len() != dims.len() {
        return Err(Error::Dimension(format!(
            "vector of length {} does not fit grid {:?}",
            values.len(),
            dims.extents()
        )));
    }
    ArrayD::from_shape_vec(IxDyn(dims.extents()).f(), values.to_vec())
        .map_err(|e| Error::Dimension(e.to_string()))
}

/// Euclidean scalar product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Real sparse matrix in CSR form with a materialized transpose.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored. Both orientations are kept so that `A x` and `A^T y`
/// are row-wise dot products with a fixed summation order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    t_offsets: Vec<usize>,
    t_indices: Vec<usize>,
    t_values: Vec<f64>,
}

impl SparseOp {
    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed in input order and entries that end up zero are dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(r, c, v) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::Dimension(format!(
                    "triplet ({r}, {c}) outside a {rows}x{cols} operator"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Data(format!("non-finite entry at ({r}, {c})")));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            i += 1;
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                v += entries[i].2;
                i += 1;
            }
            if v != 0.0 {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
            }
        }
        for r in 0..rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(Self::from_canonical(rows, cols, row_offsets, col_indices, values))
    }

    /// Dense row-major input, mostly for tests and small user operators.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged dense matrix".into()));
        }
        let triplets = rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(j, &v)| (i, j, v))
        });
        Self::from_triplets(rows.len(), cols, triplets)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_canonical(n, n, (0..=n).collect(), (0..n).collect(), vec![1.0; n])
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_canonical(rows, cols, vec![0; rows + 1], Vec::new(), Vec::new())
    }

    // Inputs must already satisfy the CSR invariants.
    fn from_canonical(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), rows + 1);
        debug_assert_eq!(*row_offsets.last().unwrap(), values.len());

        let nnz = values.len();
        let mut t_offsets = vec![0usize; cols + 1];
        for &c in &col_indices {
            t_offsets[c + 1] += 1;
        }
        for c in 0..cols {
            t_offsets[c + 1] += t_offsets[c];
        }
        let mut cursor = t_offsets.clone();
        let mut t_indices = vec![0usize; nnz];
        let mut t_values = vec![0.0; nnz];
        for r in 0..rows {
            for k in row_offsets[r]..row_offsets[r + 1] {
                let c = col_indices[k];
                let slot = cursor[c];
                t_indices[slot] = r;
                t_values[slot] = values[k];
                cursor[c] += 1;
            }
        }
        Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
            t_offsets,
            t_indices,
            t_values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_offsets[r]..self.row_offsets[r + 1])
                .map(move |k| (r, self.col_indices[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            dense[r][c] = v;
        }
        dense
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            row_offsets: self.t_offsets.clone(),
            col_indices: self.t_indices.clone(),
            values: self.t_values.clone(),
            t_offsets: self.row_offsets.clone(),
            t_indices: self.col_indices.clone(),
            t_values: self.values.clone(),
        }
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return Self::zeros(self.rows, self.cols);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.t_values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "operator with {} columns applied to vector of length {}",
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.rows];
        self.apply_acc(x, &mut out);
        Ok(out)
    }

    /// `A^T y`.
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::Dimension(format!(
                "adjoint of operator with {} rows applied to vector of length {}",
                self.rows,
                y.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        self.apply_adjoint_acc(y, &mut out);
        Ok(out)
    }

    /// `out += A x`, adding stored entries one at a time in column order.
    pub(crate) fn apply_acc(&self, x: &[f64], out: &mut [f64]) {
        for (r, acc) in out.iter_mut().enumerate() {
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                *acc += self.values[k] * x[self.col_indices[k]];
            }
        }
    }

    /// `out += A^T y`, adding stored entries one at a time in row order.
    pub(crate) fn apply_adjoint_acc(&self, y: &[f64], out: &mut [f64]) {
        for (c, acc) in out.iter_mut().enumerate() {
            for k in self.t_offsets[c]..self.t_offsets[c + 1] {
                *acc += self.t_values[k] * y[self.t_indices[k]];
            }
        }
    }

    /// `Σ_j |A_ij|` for every row `i`.
    pub fn row_abs_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                self.values[self.row_offsets[r]..self.row_offsets[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum()
            })
            .collect()
    }

    /// `Σ_i |A_ij|` for every column `j`.
    pub fn col_abs_sums(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|c| {
                self.t_values[self.t_offsets[c]..self.t_offsets[c + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum()
            })
            .collect()
    }

    /// Kronecker product `a ⊗ b`.
    pub fn kron(a: &SparseOp, b: &SparseOp) -> Result<Self> {
        let overflow = || Error::Capacity("Kronecker product exceeds the index range".into());
        let rows = a.rows.checked_mul(b.rows).ok_or_else(overflow)?;
        let cols = a.cols.checked_mul(b.cols).ok_or_else(overflow)?;
        let nnz = a.nnz().checked_mul(b.nnz()).ok_or_else(overflow)?;

        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_offsets.push(0);
        for ra in 0..a.rows {
            for rb in 0..b.rows {
                for ka in a.row_offsets[ra]..a.row_offsets[ra + 1] {
                    let base = a.col_indices[ka] * b.cols;
                    for kb in b.row_offsets[rb]..b.row_offsets[rb + 1] {
                        let v = a.values[ka] * b.values[kb];
                        if v != 0.0 {
                            col_indices.push(base + b.col_indices[kb]);
                            values.push(v);
                        }
                    }
                }
                row_offsets.push(values.len());
            }
        }
        Ok(Self::from_canonical(rows, cols, row_offsets, col_indices, values))
    }

    /// Stacks blocks on top of each other; all blocks need the same column count.
    pub fn vstack(blocks: &[&SparseOp]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Dimension("vstack of zero blocks".into()))?;
        let cols = first.cols;
        if let Some(b) = blocks.iter().find(|b| b.cols != cols) {
            return Err(Error::Dimension(format!(
                "vstack of blocks with {} and {} columns",
                cols, b.cols
            )));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for b in blocks {
            let base = values.len();
            col_indices.extend_from_slice(&b.col_indices);
            values.extend_from_slice(&b.values);
            row_offsets.extend(b.row_offsets[1..].iter().map(|&o| o + base));
        }
        Ok(Self::from_canonical(rows, cols, row_offsets, col_indices, values))
    }

    /// Places blocks side by side; all blocks need the same row count.
    pub fn hstack(blocks: &[&SparseOp]) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Dimension("hstack of zero blocks".into()))?;
        let rows = first.rows;
        if let Some(b) = blocks.iter().find(|b| b.rows != rows) {
            return Err(Error::Dimension(format!(
                "hstack of blocks with {} and {} rows",
                rows, b.rows
            )));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut row_offsets = Vec::with_capacity(rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for r in 0..rows {
            let mut shift = 0;
            for b in blocks {
                for k in b.row_offsets[r]..b.row_offsets[r + 1] {
                    col_indices.push(b.col_indices[k] + shift);
                    values.push(b.values[k]);
                }
                shift += b.cols;
            }
            row_offsets.push(values.len());
        }
        Ok(Self::from_canonical(rows, cols, row_offsets, col_indices, values))
    }
}
