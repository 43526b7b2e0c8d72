use rayon::prelude::*;

use super::{interior_bounds, Boundary, Field, Grid};
use crate::scalar::Real;

/// Selection of grid points that participate in an integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    nx: usize,
    ny: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn all<T: Real>(grid: &Grid<T>) -> Self {
        Self { nx: grid.nx, ny: grid.ny, bits: vec![true; grid.len()] }
    }

    /// Every point at least `margin` cells away from the window edge.
    /// Periodic grids have no edge and keep every point.
    pub fn trimmed<T: Real>(grid: &Grid<T>, margin: usize) -> Self {
        let (i0, i1, j0, j1) = interior_bounds(grid, margin);
        Self::from_indices(grid, |i, j| i >= i0 && i < i1 && j >= j0 && j < j1)
    }

    /// Points at least `distance` (in length units) inside every window
    /// edge. Refinement studies use this so that all grids compare errors on
    /// the same physical region.
    pub fn inset<T: Real>(grid: &Grid<T>, distance: T) -> Self {
        if grid.boundary == Boundary::Periodic {
            return Self::all(grid);
        }
        let slack = grid.h * T::lit(1e-9);
        Self::from_fn(grid, |x, y| grid.inner_distance(x, y, 0) + slack >= distance)
    }

    pub fn from_indices<T: Real>(grid: &Grid<T>, keep: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                bits.push(keep(i, j));
            }
        }
        Self { nx: grid.nx, ny: grid.ny, bits }
    }

    pub fn from_fn<T: Real>(grid: &Grid<T>, keep: impl Fn(T, T) -> bool) -> Self {
        Self::from_indices(grid, |i, j| keep(grid.x(i), grid.y(j)))
    }

    /// Points where `field` satisfies `keep`.
    pub fn from_field<T: Real>(field: &Field<T>, keep: impl Fn(T) -> bool) -> Self {
        let g = field.grid();
        Self { nx: g.nx, ny: g.ny, bits: field.values().iter().map(|&v| keep(v)).collect() }
    }

    pub fn and(&self, other: &Mask) -> Mask {
        assert_eq!((self.nx, self.ny), (other.nx, other.ny), "mask shapes differ");
        Mask { nx: self.nx, ny: self.ny, bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect() }
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.nx + i]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Result of a quadrature. `empty_mask` is set when no point was selected,
/// in which case `value` is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub empty_mask: bool,
}

/// Pairwise (tree) summation; the association order depends only on the
/// slice length.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::zero(), |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[inline]
fn weight<T: Real>(k: usize, n: usize, boundary: Boundary) -> T {
    match boundary {
        Boundary::Periodic => T::one(),
        Boundary::OneSided if k == 0 || k + 1 == n => T::half(),
        Boundary::OneSided => T::one(),
    }
}

/// Tensor-product trapezoid rule over the selected points.
pub fn integrate<T: Real>(f: &Field<T>, mask: Option<&Mask>) -> Integral<T> {
    let g = *f.grid();
    if let Some(m) = mask {
        assert_eq!((m.nx, m.ny), (g.nx, g.ny), "mask does not match grid");
        if m.is_empty() {
            return Integral { value: T::zero(), empty_mask: true };
        }
    }
    let vals = f.values();
    let rows: Vec<T> = (0..g.ny)
        .into_par_iter()
        .map(|j| {
            let wj: T = weight(j, g.ny, g.boundary);
            let terms: Vec<T> = (0..g.nx)
                .map(|i| {
                    if mask.is_some_and(|m| !m.contains(i, j)) {
                        T::zero()
                    } else {
                        weight::<T>(i, g.nx, g.boundary) * vals[j * g.nx + i]
                    }
                })
                .collect();
            wj * pairwise_sum(&terms)
        })
        .collect();
    Integral { value: pairwise_sum(&rows) * g.h * g.h, empty_mask: false }
}
