//! Uniform-grid scalar and vector fields with second-order finite
//! differences and trapezoid quadrature.
//!
//! Values are stored row-major with `y` as the outer index, so the value at
//! `(x_i, y_j)` lives at `j * nx + i`.

mod io;
mod quadrature;
mod stencil;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use io::{read_wgl1, write_csv, write_wgl1};
pub use quadrature::{integrate, pairwise_sum, Integral, Mask};
pub use stencil::{divergence, gradient, hessian, laplacian_wide, Hessian};

/// Minimum points per axis for any stencil operation.
pub const MIN_POINTS: usize = 5;

/// How stencils treat the first and last rows/columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Index arithmetic wraps; the point `x0 + nx*h` is identified with `x0`.
    Periodic,
    /// Second-order one-sided differences on the outermost points.
    #[default]
    OneSided,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::OneSided => "one_sided",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "periodic" => Some(Boundary::Periodic),
            "one_sided" => Some(Boundary::OneSided),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub nx: usize,
    pub ny: usize,
    pub h: T,
    pub x0: T,
    pub y0: T,
    pub boundary: Boundary,
}

impl<T: Real> Grid<T> {
    pub fn new(nx: usize, ny: usize, h: T, x0: T, y0: T, boundary: Boundary) -> Result<Self> {
        if nx < MIN_POINTS || ny < MIN_POINTS {
            return Err(Error::GridTooSmall { nx, ny, min: MIN_POINTS });
        }
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive and finite, got {h}")));
        }
        if !x0.is_finite() || !y0.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { nx, ny, h, x0, y0, boundary })
    }

    /// Square window `[lo, hi]²` with one-sided boundaries. `hi - lo` must be
    /// an integer multiple of `h` up to rounding.
    pub fn square(lo: f64, hi: f64, h: f64) -> Result<Self> {
        let cells = ((hi - lo) / h).round();
        if cells < 1.0 || ((hi - lo) / h - cells).abs() > 1e-6 {
            return Err(Error::InvalidGrid(format!("window [{lo}, {hi}] is not a whole number of cells of size {h}")));
        }
        let n = cells as usize + 1;
        Self::new(n, n, T::lit(h), T::lit(lo), T::lit(lo), Boundary::OneSided)
    }

    /// Periodic square `[0, 2π)²` with `n` points per axis.
    pub fn periodic_torus(n: usize) -> Result<Self> {
        let h = T::lit(2.0 * std::f64::consts::PI / n as f64);
        Self::new(n, n, h, T::zero(), T::zero(), Boundary::Periodic)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x0 + self.h * T::from_usize_lossy(i)
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.y0 + self.h * T::from_usize_lossy(j)
    }

    pub fn x_max(&self) -> T {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> T {
        self.y(self.ny - 1)
    }

    /// Same shape and origin with the spacing halved (point count `2n - 1`).
    pub fn refined(&self) -> Result<Self> {
        match self.boundary {
            Boundary::OneSided => {
                Self::new(2 * self.nx - 1, 2 * self.ny - 1, self.h * T::half(), self.x0, self.y0, self.boundary)
            }
            Boundary::Periodic => {
                Self::new(2 * self.nx, 2 * self.ny, self.h * T::half(), self.x0, self.y0, self.boundary)
            }
        }
    }

    /// True when both grids describe the same lattice.
    pub fn same_as(&self, other: &Self) -> bool {
        self == other
    }

    pub fn require_min(&self, min: usize) -> Result<()> {
        if self.nx < min || self.ny < min {
            Err(Error::GridTooSmall { nx: self.nx, ny: self.ny, min })
        } else {
            Ok(())
        }
    }

    /// Distance from `(px, py)` to the nearest edge of the window shrunk by
    /// `margin` cells. Negative when the point lies outside.
    pub fn inner_distance(&self, px: T, py: T, margin: usize) -> T {
        let m = self.h * T::from_usize_lossy(margin);
        let dx = (px - (self.x0 + m)).min(self.x_max() - m - px);
        let dy = (py - (self.y0 + m)).min(self.y_max() - m - py);
        dx.min(dy)
    }

    /// Convert the grid to another scalar type.
    pub fn cast<S: Real>(&self) -> Grid<S> {
        Grid {
            nx: self.nx,
            ny: self.ny,
            h: S::lit(self.h.as_f64()),
            x0: S::lit(self.x0.as_f64()),
            y0: S::lit(self.y0.as_f64()),
            boundary: self.boundary,
        }
    }
}

/// Sampled scalar function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> Field<T> {
    pub fn new(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self { values: vec![c; grid.len()], grid }
    }

    /// Sample `f(x, y)` at every grid point.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                values.push(f(grid.x(i), y));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.grid.index(i, j);
        self.values[k] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// First non-finite value, if any.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite { i: k % self.grid.nx, j: k / self.grid.nx }),
        }
    }

    /// Largest absolute value over points at least `trim` cells from every
    /// edge. Periodic grids ignore `trim`.
    pub fn sup_norm(&self, trim: usize) -> T {
        let (lo_i, hi_i, lo_j, hi_j) = self.interior_bounds(trim);
        let mut m = T::zero();
        for j in lo_j..hi_j {
            for i in lo_i..hi_i {
                m = m.max(self.at(i, j).abs());
            }
        }
        m
    }

    /// Largest absolute value over the selected points.
    pub fn sup_norm_on(&self, mask: &Mask) -> T {
        let mut m = T::zero();
        for (k, &v) in self.values.iter().enumerate() {
            if mask.bits()[k] {
                m = m.max(v.abs());
            }
        }
        m
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Half-open index ranges `(i_lo, i_hi, j_lo, j_hi)` of the trimmed interior.
    pub fn interior_bounds(&self, trim: usize) -> (usize, usize, usize, usize) {
        interior_bounds(&self.grid, trim)
    }

    pub fn cast<S: Real>(&self) -> Field<S> {
        Field { grid: self.grid.cast(), values: self.values.iter().map(|v| S::lit(v.as_f64())).collect() }
    }
}

pub(crate) fn interior_bounds<T: Real>(grid: &Grid<T>, trim: usize) -> (usize, usize, usize, usize) {
    if grid.boundary == Boundary::Periodic {
        return (0, grid.nx, 0, grid.ny);
    }
    let ti = trim.min(grid.nx / 2);
    let tj = trim.min(grid.ny / 2);
    (ti, grid.nx - ti, tj, grid.ny - tj)
}

/// Two-component field, e.g. `Du = (u_x, u_y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub x: Field<T>,
    pub y: Field<T>,
}

impl<T: Real> VectorField<T> {
    pub fn new(x: Field<T>, y: Field<T>) -> Result<Self> {
        x.check_grid(&y)?;
        Ok(Self { x, y })
    }

    pub fn grid(&self) -> &Grid<T> {
        self.x.grid()
    }

    /// Pointwise Euclidean norm squared.
    pub fn norm_sq(&self) -> Field<T> {
        self.x.zip_with(&self.y, |a, b| a * a + b * b).expect("components share a grid")
    }

    pub fn scale_by(&self, s: &Field<T>) -> Result<Self> {
        Ok(Self { x: self.x.mul(s)?, y: self.y.mul(s)? })
    }
}
