//! Periodic cell grids and the discrete operator calculus on them.
//!
//! A [`GridFunction`] holds one value per cell of a uniform periodic grid;
//! indices wrap modulo the number of cells. The operators mirror the usual
//! finite-volume toolbox:
//!
//! | operator            | stencil                                   |
//! |---------------------|-------------------------------------------|
//! | `shift(±1)`         | `v[j±1]`                                  |
//! | `d_plus`            | `(v[j+1] - v[j]) / dx`                    |
//! | `d_minus`           | `(v[j] - v[j-1]) / dx`                    |
//! | `d_center`          | `(v[j+1] - v[j-1]) / (2 dx)`              |
//! | `laplacian`         | `(v[j+1] - 2 v[j] + v[j-1]) / dx^2`       |
//!
//! and the weighted inner product `<v, w> = dx * sum_j v[j] w[j]`.
//! Sums are accumulated left to right over `j`, so every reduction is
//! deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Smallest grid the operators are defined on.
pub const MIN_CELLS: usize = 4;

/// A uniform periodic grid on `[origin, origin + length)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    origin: f64,
    length: f64,
    cells: usize,
    dx: f64,
}

impl Grid {
    /// Grid on `[0, length)` with `cells` cells.
    pub fn new(length: f64, cells: usize) -> Result<Self> {
        Self::with_origin(0.0, length, cells)
    }

    pub fn with_origin(origin: f64, length: f64, cells: usize) -> Result<Self> {
        if cells < MIN_CELLS {
            return Err(Error::InvalidGrid("at least 4 cells are required"));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid("domain length must be positive and finite"));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid("domain origin must be finite"));
        }
        Ok(Self {
            origin,
            length,
            cells,
            dx: length / cells as f64,
        })
    }

    /// Grid whose cell width is `dx`; `length / dx` must be an integer up to
    /// rounding.
    pub fn from_cell_width(origin: f64, length: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid("cell width must be positive"));
        }
        let ratio = length / dx;
        let cells = libm::round(ratio);
        if libm::fabs(ratio - cells) > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidGrid("domain length is not a multiple of the cell width"));
        }
        Self::with_origin(origin, length, cells as usize)
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.cells
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Left edge `x_j` of cell `j`.
    #[inline]
    pub fn cell_left(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.dx
    }

    #[inline]
    pub fn cell_center(&self, j: usize) -> f64 {
        self.origin + (j as f64 + 0.5) * self.dx
    }

    /// Centre of the domain.
    pub fn midpoint(&self) -> f64 {
        self.origin + 0.5 * self.length
    }

    /// Cell centres in increasing order.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|j| self.cell_center(j)).collect()
    }

    /// Wraps a displacement into `[-length/2, length/2)`.
    pub fn wrap_offset(&self, offset: f64) -> f64 {
        let half = 0.5 * self.length;
        let mut r = libm::fmod(offset + half, self.length);
        if r < 0.0 {
            r += self.length;
        }
        r - half
    }

    /// Same number of cells and the same geometry.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.cells == other.cells && self.dx == other.dx && self.origin == other.origin
    }
}

/// Cell values of a periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::InvalidGrid("value count does not match the number of cells"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.cells()],
        }
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        let values = (0..grid.cells()).map(|j| f(grid.cell_center(j))).collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at a periodic index.
    #[inline]
    pub fn at(&self, j: isize) -> f64 {
        let n = self.values.len() as isize;
        self.values[j.rem_euclid(n) as usize]
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn map_stencil(&self, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut out = vec![0.0; self.values.len()];
        stencil_into(&self.values, &mut out, f);
        Self {
            grid: self.grid,
            values: out,
        }
    }

    /// `result[j] = v[j + offset]` with periodic wrap.
    pub fn shift(&self, offset: isize) -> Self {
        let n = self.values.len();
        let start = offset.rem_euclid(n as isize) as usize;
        let mut values = Vec::with_capacity(n);
        values.extend_from_slice(&self.values[start..]);
        values.extend_from_slice(&self.values[..start]);
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Forward difference `D+`.
    pub fn d_plus(&self) -> Self {
        let dx = self.grid.dx;
        self.map_stencil(|_, c, r| (r - c) / dx)
    }

    /// Backward difference `D-`.
    pub fn d_minus(&self) -> Self {
        let dx = self.grid.dx;
        self.map_stencil(|l, c, _| (c - l) / dx)
    }

    /// Centred difference `D = (D+ + D-) / 2`.
    pub fn d_center(&self) -> Self {
        let mut out = vec![0.0; self.values.len()];
        d_center_into(&self.values, self.grid.dx, &mut out);
        Self {
            grid: self.grid,
            values: out,
        }
    }

    /// Second difference `D+ D-`.
    pub fn laplacian(&self) -> Self {
        let mut out = vec![0.0; self.values.len()];
        laplacian_into(&self.values, self.grid.dx, &mut out);
        Self {
            grid: self.grid,
            values: out,
        }
    }

    /// `<v, w> = dx * sum_j v[j] w[j]`.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.inner_unchecked(other))
    }

    fn inner_unchecked(&self, other: &GridFunction) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b;
        }
        self.grid.dx * acc
    }

    /// Squared weighted l2 norm.
    pub fn norm_sq(&self) -> f64 {
        self.inner_unchecked(self)
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| {
            let a = libm::fabs(*v);
            // NaN propagates so corruption stays visible
            if a > m || a.is_nan() {
                a
            } else {
                m
            }
        })
    }

    /// Arithmetic mean of the cell values.
    pub fn mean(&self) -> f64 {
        let mut acc = 0.0;
        for v in &self.values {
            acc += v;
        }
        acc / self.values.len() as f64
    }

    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn square(&self) -> Self {
        self.map(|v| v * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `alpha * self + beta * other`.
    pub fn lin_comb(&self, alpha: f64, other: &GridFunction, beta: f64) -> Result<Self> {
        self.zip_with(other, |a, b| alpha * a + beta * b)
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &GridFunction) -> Result<()> {
        self.check_grid(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
        Ok(())
    }
}

fn stencil_into(v: &[f64], out: &mut [f64], f: impl Fn(f64, f64, f64) -> f64) {
    let n = v.len();
    debug_assert_eq!(out.len(), n);
    out[0] = f(v[n - 1], v[0], v[1]);
    for j in 1..n - 1 {
        out[j] = f(v[j - 1], v[j], v[j + 1]);
    }
    out[n - 1] = f(v[n - 2], v[n - 1], v[0]);
}

/// In-place centred difference; bit-identical to [`GridFunction::d_center`].
pub fn d_center_into(v: &[f64], dx: f64, out: &mut [f64]) {
    let two_dx = 2.0 * dx;
    stencil_into(v, out, |l, _, r| (r - l) / two_dx);
}

/// In-place second difference; bit-identical to [`GridFunction::laplacian`].
pub fn laplacian_into(v: &[f64], dx: f64, out: &mut [f64]) {
    let dx2 = dx * dx;
    stencil_into(v, out, |l, c, r| (r - 2.0 * c + l) / dx2);
}
