//! Scalar fields on a uniform unit-spaced grid and the finite-difference
//! stencils the denoisers are built on.
//!
//! Index `i` is the row (first dimension, stored slowest) and `j` the column.
//! "East"/"west" neighbours differ in `i`, "north"/"south" neighbours differ
//! in `j`. Reads outside the grid go through a single layer of replicate
//! ghost cells, which is the discrete zero-flux (Neumann) boundary condition.

use crate::error::{Error, Result};

/// A finite real-valued `rows x cols` field stored in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Field2D {
    /// Wraps row-major `data`, validating the shape and finiteness invariants.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::TooSmall { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
                value: data[k],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::filled(rows, cols, 0.0)
    }

    /// Builds a field by evaluating `f(i, j)` at every pixel.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Constructor for values produced by arithmetic on already-valid fields
    /// with the same shape. Finiteness is checked only in debug builds.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false: a valid field holds at least 2x2 values.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Stores `value` at `(i, j)`; rejects non-finite values.
    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::NonFinite { row: i, col: j, value });
        }
        self.data[i * self.cols + j] = value;
        Ok(())
    }

    /// Reads `(i, j)` where each index may be at most one cell outside the
    /// grid; ghost cells replicate the nearest boundary value.
    pub fn sample_with_neumann(&self, i: isize, j: isize) -> Result<f64> {
        let (m, n) = (self.rows as isize, self.cols as isize);
        if i < -1 || i > m || j < -1 || j > n {
            return Err(Error::OutOfGhostRange {
                row: i,
                col: j,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self.ghost(i, j))
    }

    /// Unchecked ghost read used by the stencil kernels.
    #[inline]
    pub(crate) fn ghost(&self, i: isize, j: isize) -> f64 {
        let r = i.clamp(0, self.rows as isize - 1) as usize;
        let c = j.clamp(0, self.cols as isize - 1) as usize;
        self.data[r * self.cols + c]
    }

    pub fn ensure_same_shape(&self, other: &Field2D) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    /// Pointwise map. Errors if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field2D> {
        Field2D::new(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise binary combination of two equally shaped fields.
    pub fn zip_map(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Result<Field2D> {
        self.ensure_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field2D::new(self.rows, self.cols, data)
    }

    pub fn transpose(&self) -> Field2D {
        let mut data = Vec::with_capacity(self.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Field2D::from_parts(self.cols, self.rows, data)
    }

    /// Sum in storage order (deterministic).
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.sum_of_squares().sqrt()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }
}

/// `|grad w|` evaluated at the four stencil positions around every pixel.
///
/// With `i` the row and `j` the column:
///
/// ```text
/// east  (i+1,j): sqrt((w[i+1,j]   - w[i,j])^2   + (w[i,j+1]   - w[i,j])^2)
/// west  (i-1,j): sqrt((w[i,j]     - w[i-1,j])^2 + (w[i-1,j+1] - w[i-1,j])^2)
/// north (i,j+1): sqrt((w[i+1,j]   - w[i,j])^2   + (w[i,j+1]   - w[i,j])^2)
/// south (i,j-1): sqrt((w[i+1,j-1] - w[i,j-1])^2 + (w[i,j]     - w[i,j-1])^2)
/// ```
///
/// The north stencil intentionally repeats the east one; together the four
/// are the forward-difference magnitude at `(i,j)`, `(i-1,j)`, `(i,j)` and
/// `(i,j-1)` respectively.
#[derive(Debug, Clone, PartialEq)]
pub struct GradMagnitudes {
    pub east: Field2D,
    pub west: Field2D,
    pub north: Field2D,
    pub south: Field2D,
}

impl GradMagnitudes {
    /// Smallest value across all four maps.
    pub fn min(&self) -> f64 {
        [&self.east, &self.west, &self.north, &self.south]
            .iter()
            .flat_map(|f| f.as_slice().iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

#[inline]
pub(crate) fn east_magnitude(w: &Field2D, i: isize, j: isize) -> f64 {
    let c = w.ghost(i, j);
    let dx = w.ghost(i + 1, j) - c;
    let dy = w.ghost(i, j + 1) - c;
    (dx * dx + dy * dy).sqrt()
}

#[inline]
pub(crate) fn west_magnitude(w: &Field2D, i: isize, j: isize) -> f64 {
    let dx = w.ghost(i, j) - w.ghost(i - 1, j);
    let dy = w.ghost(i - 1, j + 1) - w.ghost(i - 1, j);
    (dx * dx + dy * dy).sqrt()
}

#[inline]
pub(crate) fn north_magnitude(w: &Field2D, i: isize, j: isize) -> f64 {
    let c = w.ghost(i, j);
    let dx = w.ghost(i + 1, j) - c;
    let dy = w.ghost(i, j + 1) - c;
    (dx * dx + dy * dy).sqrt()
}

#[inline]
pub(crate) fn south_magnitude(w: &Field2D, i: isize, j: isize) -> f64 {
    let dx = w.ghost(i + 1, j - 1) - w.ghost(i, j - 1);
    let dy = w.ghost(i, j) - w.ghost(i, j - 1);
    (dx * dx + dy * dy).sqrt()
}

pub fn grad_magnitudes(w: &Field2D) -> GradMagnitudes {
    let (m, n) = w.shape();
    let mut east = Vec::with_capacity(m * n);
    let mut west = Vec::with_capacity(m * n);
    let mut north = Vec::with_capacity(m * n);
    let mut south = Vec::with_capacity(m * n);
    for i in 0..m as isize {
        for j in 0..n as isize {
            east.push(east_magnitude(w, i, j));
            west.push(west_magnitude(w, i, j));
            north.push(north_magnitude(w, i, j));
            south.push(south_magnitude(w, i, j));
        }
    }
    GradMagnitudes {
        east: Field2D::from_parts(m, n, east),
        west: Field2D::from_parts(m, n, west),
        north: Field2D::from_parts(m, n, north),
        south: Field2D::from_parts(m, n, south),
    }
}

/// Discrete `div(grad w / sqrt(|grad w|^2 + beta))` using the four-flux
/// difference formula with the stencil magnitudes of [`grad_magnitudes`].
///
/// This is exactly the negative gradient of `sum sqrt(|D+ w|^2 + beta)` where
/// `D+` is the one-sided forward difference with replicate ghosts.
pub fn curvature(w: &Field2D, beta: f64) -> Result<Field2D> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let g = grad_magnitudes(w);
    let (m, n) = w.shape();
    let mut out = Vec::with_capacity(m * n);
    for i in 0..m as isize {
        for j in 0..n as isize {
            let k = i as usize * n + j as usize;
            let c = w.ghost(i, j);
            let e = g.east.data[k];
            let wm = g.west.data[k];
            let no = g.north.data[k];
            let s = g.south.data[k];
            let v = (w.ghost(i + 1, j) - c) / (e * e + beta).sqrt()
                - (c - w.ghost(i - 1, j)) / (wm * wm + beta).sqrt()
                + (w.ghost(i, j + 1) - c) / (no * no + beta).sqrt()
                - (c - w.ghost(i, j - 1)) / (s * s + beta).sqrt();
            out.push(v);
        }
    }
    Field2D::new(m, n, out)
}
