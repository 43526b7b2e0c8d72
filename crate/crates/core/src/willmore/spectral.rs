//! Fast solves of `(I + τ·s·L²) δ = τ g` on a Dirichlet interior block
//! (sine transform) or a periodic grid (Fourier transform).
//!
//! `L` is the wide Laplacian, central differences composed with themselves,
//! so that `½L²` is the Hessian of the discrete energy at a flat graph. On the
//! Dirichlet block the data is extended oddly across the zero row just
//! outside it.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Boundary, Field, Grid};
use crate::scalar::Real;

#[derive(Clone)]
struct Axis<T: Real> {
    /// Number of unknowns along the axis.
    m: usize,
    fft: Arc<dyn Fft<T>>,
    /// Symbol of the wide `−∂²` for each mode, `sin²θ / h²`.
    symbol: Vec<T>,
    periodic: bool,
}

impl<T: Real> Axis<T> {
    fn dirichlet(planner: &mut FftPlanner<T>, m: usize, h: T) -> Self {
        let n = 2 * (m + 1);
        let theta = |k: usize| T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(m + 1);
        let symbol = (1..=m).map(|k| theta(k).sin().powi(2) / (h * h)).collect();
        Self { m, fft: planner.plan_fft_forward(n), symbol, periodic: false }
    }

    fn periodic(planner: &mut FftPlanner<T>, m: usize, h: T) -> Self {
        let theta = |k: usize| T::lit(2.0) * T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(m);
        let symbol = (0..m).map(|k| theta(k).sin().powi(2) / (h * h)).collect();
        Self { m, fft: planner.plan_fft_forward(m), symbol, periodic: true }
    }

    /// Sine transform (Dirichlet) or DFT (periodic) of one line, in place.
    /// The sine transform is real; the DFT keeps complex coefficients.
    fn forward(&self, line: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>) {
        if self.periodic {
            self.fft.process(line);
            return;
        }
        let n = 2 * (self.m + 1);
        scratch.clear();
        scratch.resize(n, Complex::new(T::zero(), T::zero()));
        for (k, c) in line.iter().enumerate() {
            scratch[k + 1] = *c;
            scratch[n - k - 1] = -*c;
        }
        self.fft.process(scratch);
        // For odd data the transform is −2i·Σ a_n sin(πkn/(m+1)); real and
        // imaginary inputs are carried through independently.
        let minus_half = -T::half();
        for (k, c) in line.iter_mut().enumerate() {
            let z = scratch[k + 1];
            *c = Complex::new(z.im * minus_half, -z.re * minus_half);
        }
    }

    fn inverse(&self, line: &mut [Complex<T>], scratch: &mut Vec<Complex<T>>) {
        if self.periodic {
            // Inverse DFT through conjugation keeps a single forward plan.
            for c in line.iter_mut() {
                *c = c.conj();
            }
            self.fft.process(line);
            let inv = T::one() / T::from_usize_lossy(self.m);
            for c in line.iter_mut() {
                *c = c.conj() * inv;
            }
            return;
        }
        self.forward(line, scratch);
        let s = T::two() / T::from_usize_lossy(self.m + 1);
        for c in line.iter_mut() {
            *c = *c * s;
        }
    }
}

/// Shifted biharmonic solver bound to one grid and margin.
#[derive(Clone)]
pub(crate) struct StabilizedSolver<T: Real> {
    grid: Grid<T>,
    margin: usize,
    ax: Axis<T>,
    ay: Axis<T>,
    coeff: T,
}

impl<T: Real> StabilizedSolver<T> {
    /// `coeff` multiplies `L²`. One-sided grids solve on the block at least
    /// `margin` cells from every edge with zero data outside it.
    pub(crate) fn new(grid: &Grid<T>, margin: usize, coeff: T) -> Result<Self> {
        let mut planner = FftPlanner::new();
        let (ax, ay) = match grid.boundary {
            Boundary::Periodic => {
                (Axis::periodic(&mut planner, grid.nx, grid.h), Axis::periodic(&mut planner, grid.ny, grid.h))
            }
            Boundary::OneSided => {
                if grid.nx <= 2 * margin + 1 || grid.ny <= 2 * margin + 1 {
                    return Err(Error::GridTooSmall { nx: grid.nx, ny: grid.ny, min: 2 * margin + 2 });
                }
                (
                    Axis::dirichlet(&mut planner, grid.nx - 2 * margin, grid.h),
                    Axis::dirichlet(&mut planner, grid.ny - 2 * margin, grid.h),
                )
            }
        };
        Ok(Self { grid: *grid, margin, ax, ay, coeff })
    }

    fn offset(&self) -> usize {
        if self.ax.periodic {
            0
        } else {
            self.margin
        }
    }

    /// Returns `δ` with `(I + τ·coeff·L²) δ = τ g` on the solve block and
    /// `δ = 0` outside it.
    pub(crate) fn solve(&self, g: &Field<T>, tau: T) -> Result<Field<T>> {
        if !g.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let (mx, my, off) = (self.ax.m, self.ay.m, self.offset());
        let zero = Complex::new(T::zero(), T::zero());
        let mut rows: Vec<Complex<T>> = vec![zero; mx * my];
        rows.par_chunks_mut(mx).enumerate().for_each_init(Vec::new, |scratch, (j, row)| {
            for (i, c) in row.iter_mut().enumerate() {
                *c = Complex::new(g.at(i + off, j + off), T::zero());
            }
            self.ax.forward(row, scratch);
        });
        let mut cols = transpose(&rows, mx, my);
        cols.par_chunks_mut(my).enumerate().for_each_init(Vec::new, |scratch, (i, col)| {
            self.ay.forward(col, scratch);
            for (j, c) in col.iter_mut().enumerate() {
                let lam = self.ax.symbol[i] + self.ay.symbol[j];
                *c = *c * (tau / (T::one() + tau * self.coeff * lam * lam));
            }
            self.ay.inverse(col, scratch);
        });
        let mut rows = transpose(&cols, my, mx);
        rows.par_chunks_mut(mx).for_each_init(Vec::new, |scratch, row| self.ax.inverse(row, scratch));
        let mut out = Field::zeros(self.grid);
        for j in 0..my {
            for i in 0..mx {
                out.set(i + off, j + off, rows[j * mx + i].re);
            }
        }
        Ok(out)
    }
}

/// `src` is `rows × width` row-major; the result is `width × rows`.
fn transpose<T: Copy + Send + Sync>(src: &[T], width: usize, rows: usize) -> Vec<T> {
    (0..width * rows).map(|k| src[(k % rows) * width + k / rows]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Apply `(I + τ c L²)` with the wide Laplacian; outside the block the
    /// data is continued oddly about the row just beyond it.
    fn apply(delta: &Field<f64>, tau: f64, c: f64, lo: usize, hi_x: usize, hi_y: usize) -> Field<f64> {
        let g = *delta.grid();
        let periodic = g.boundary == Boundary::Periodic;
        let lap = |f: &Field<f64>| {
            let mut out = Field::zeros(g);
            for j in lo..hi_y {
                for i in lo..hi_x {
                    let at = |di: isize, dj: isize| {
                        let (ii, jj) = (i as isize + di, j as isize + dj);
                        if periodic {
                            let ii = ii.rem_euclid(g.nx as isize) as usize;
                            let jj = jj.rem_euclid(g.ny as isize) as usize;
                            f.at(ii, jj)
                        } else {
                            let reflect = |k: isize, lo: isize, hi: isize| -> (isize, f64) {
                                if k < lo {
                                    (2 * (lo - 1) - k, -1.0)
                                } else if k >= hi {
                                    (2 * hi - k, -1.0)
                                } else {
                                    (k, 1.0)
                                }
                            };
                            let (ri, si) = reflect(ii, lo as isize, hi_x as isize);
                            let (rj, sj) = reflect(jj, lo as isize, hi_y as isize);
                            if ri < lo as isize || rj < lo as isize || ri >= hi_x as isize || rj >= hi_y as isize {
                                0.0
                            } else {
                                si * sj * f.at(ri as usize, rj as usize)
                            }
                        }
                    };
                    let v = -(at(2, 0) + at(-2, 0) + at(0, 2) + at(0, -2) - 4.0 * at(0, 0)) / (4.0 * g.h * g.h);
                    out.set(i, j, v);
                }
            }
            out
        };
        let l2 = lap(&lap(delta));
        delta.zip_with(&l2, |d, l| d + tau * c * l).unwrap()
    }

    #[test]
    fn dirichlet_solve_inverts_operator() {
        let g = Grid::new(23, 19, 0.1, 0.0, 0.0, Boundary::OneSided).unwrap();
        let rhs = Field::from_fn(g, |x: f64, y| (3.0 * x).sin() + x * y);
        let margin = 4;
        let s = StabilizedSolver::new(&g, margin, 0.5).unwrap();
        let tau = 0.3;
        let d = s.solve(&rhs, tau).unwrap();
        let back = apply(&d, tau, 0.5, margin, g.nx - margin, g.ny - margin);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let inside = i >= margin && j >= margin && i < g.nx - margin && j < g.ny - margin;
                if inside {
                    assert!((back.at(i, j) - tau * rhs.at(i, j)).abs() < 1e-10, "{i} {j}");
                } else {
                    assert_eq!(d.at(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn periodic_solve_inverts_operator() {
        let g = Grid::<f64>::periodic_torus(16).unwrap();
        let rhs = Field::from_fn(g, |x, y| (2.0 * x).cos() * y.sin() + 0.3);
        let s = StabilizedSolver::new(&g, 4, 0.5).unwrap();
        let d = s.solve(&rhs, 2.0).unwrap();
        let back = apply(&d, 2.0, 0.5, 0, g.nx, g.ny);
        for (a, b) in back.values().iter().zip(rhs.values()) {
            assert!((a - 2.0 * b).abs() < 1e-10);
        }
    }
}
