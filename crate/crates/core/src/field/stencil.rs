use rayon::prelude::*;

use super::{Boundary, Field, Grid, VectorField, MIN_POINTS};
use crate::error::Result;
use crate::scalar::Real;

/// Second partial derivatives. `xy` is reported once, so the mixed
/// derivative is symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian<T> {
    pub xx: Field<T>,
    pub xy: Field<T>,
    pub yy: Field<T>,
}

#[inline]
fn first<T: Real>(f: impl Fn(usize) -> T, k: usize, n: usize, periodic: bool, inv_2h: T) -> T {
    if periodic {
        let up = if k + 1 == n { 0 } else { k + 1 };
        let dn = if k == 0 { n - 1 } else { k - 1 };
        return (f(up) - f(dn)) * inv_2h;
    }
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    if k == 0 {
        (-three * f(0) + four * f(1) - f(2)) * inv_2h
    } else if k == n - 1 {
        (three * f(n - 1) - four * f(n - 2) + f(n - 3)) * inv_2h
    } else {
        (f(k + 1) - f(k - 1)) * inv_2h
    }
}

#[inline]
fn second<T: Real>(f: impl Fn(usize) -> T, k: usize, n: usize, periodic: bool, inv_h2: T) -> T {
    let two = T::two();
    if periodic {
        let up = if k + 1 == n { 0 } else { k + 1 };
        let dn = if k == 0 { n - 1 } else { k - 1 };
        return (f(up) - two * f(k) + f(dn)) * inv_h2;
    }
    let four = T::lit(4.0);
    let five = T::lit(5.0);
    if k == 0 {
        (two * f(0) - five * f(1) + four * f(2) - f(3)) * inv_h2
    } else if k == n - 1 {
        (two * f(n - 1) - five * f(n - 2) + four * f(n - 3) - f(n - 4)) * inv_h2
    } else {
        (f(k + 1) - two * f(k) + f(k - 1)) * inv_h2
    }
}

/// Apply a per-point rule row by row; rows are independent so the result
/// does not depend on the thread count.
fn build<T: Real>(grid: &Grid<T>, rule: impl Fn(usize, usize) -> T + Sync) -> Field<T> {
    let nx = grid.nx;
    let mut out = vec![T::zero(); grid.len()];
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            *o = rule(i, j);
        }
    });
    Field::new(*grid, out).expect("length matches grid")
}

pub(crate) fn d_dx<T: Real>(f: &Field<T>) -> Field<T> {
    let g = *f.grid();
    let periodic = g.boundary == Boundary::Periodic;
    let inv_2h = (T::two() * g.h).recip();
    let v = f.values();
    build(&g, |i, j| {
        let row = &v[j * g.nx..(j + 1) * g.nx];
        first(|k| row[k], i, g.nx, periodic, inv_2h)
    })
}

pub(crate) fn d_dy<T: Real>(f: &Field<T>) -> Field<T> {
    let g = *f.grid();
    let periodic = g.boundary == Boundary::Periodic;
    let inv_2h = (T::two() * g.h).recip();
    let v = f.values();
    build(&g, |i, j| first(|k| v[k * g.nx + i], j, g.ny, periodic, inv_2h))
}

/// `Du = (∂x f, ∂y f)` with second-order central differences and the grid's
/// boundary treatment on the outermost points.
pub fn gradient<T: Real>(f: &Field<T>) -> Result<VectorField<T>> {
    f.grid().require_min(MIN_POINTS)?;
    Ok(VectorField { x: d_dx(f), y: d_dy(f) })
}

/// Compact three-point second derivatives and the cross derivative
/// `∂y(∂x f)` built from the gradient stencils.
pub fn hessian<T: Real>(f: &Field<T>) -> Result<Hessian<T>> {
    let g = *f.grid();
    g.require_min(MIN_POINTS)?;
    let periodic = g.boundary == Boundary::Periodic;
    let inv_h2 = (g.h * g.h).recip();
    let v = f.values();
    let xx = build(&g, |i, j| {
        let row = &v[j * g.nx..(j + 1) * g.nx];
        second(|k| row[k], i, g.nx, periodic, inv_h2)
    });
    let yy = build(&g, |i, j| second(|k| v[k * g.nx + i], j, g.ny, periodic, inv_h2));
    let xy = d_dy(&d_dx(f));
    Ok(Hessian { xx, xy, yy })
}

/// `∂x Vx + ∂y Vy` with the same stencils as [`gradient`].
pub fn divergence<T: Real>(field: &VectorField<T>) -> Result<Field<T>> {
    field.x.check_grid(&field.y)?;
    field.grid().require_min(MIN_POINTS)?;
    d_dx(&field.x).add(&d_dy(&field.y))
}

/// `divergence(gradient(f))`, which on the interior is the five-point
/// Laplacian with stride `2h`.
pub fn laplacian_wide<T: Real>(f: &Field<T>) -> Result<Field<T>> {
    divergence(&gradient(f)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, h: f64, x0: f64) -> Grid<f64> {
        Grid::new(n, n, h, x0, x0, Boundary::OneSided).unwrap()
    }

    #[test]
    fn constant_has_zero_gradient() {
        let f = Field::constant(grid(9, 0.1, 0.0), 3.5);
        let d = gradient(&f).unwrap();
        assert!(d.x.values().iter().chain(d.y.values()).all(|&v| v == 0.0));
    }

    #[test]
    fn linear_gradient_is_exact() {
        let f = Field::from_fn(grid(11, 0.125, -0.5), |x, y| 3.0 * x - 2.0 * y);
        let d = gradient(&f).unwrap();
        for (&a, &b) in d.x.values().iter().zip(d.y.values()) {
            assert!((a - 3.0).abs() < 1e-12 && (b + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_derivative_within_taylor_bound() {
        // Central difference of sin at 0: error is h²/6 |f'''(ξ)| ≤ h²/6.
        let h = 0.05;
        let g = grid(21, h, -0.5);
        let f = Field::from_fn(g, |x, _| x.sin());
        let d = gradient(&f).unwrap();
        let err = (d.x.at(10, 10) - 1.0).abs();
        assert!(err <= h * h / 6.0 + 1e-15, "err = {err}");
        assert!(err > 0.0);
    }

    #[test]
    fn quadratic_and_bilinear_hessians_are_exact() {
        let g = grid(9, 0.25, -1.0);
        let hq = hessian(&Field::from_fn(g, |x, _| 0.5 * x * x)).unwrap();
        let hb = hessian(&Field::from_fn(g, |x, y| x * y)).unwrap();
        for k in 0..g.len() {
            assert!((hq.xx.values()[k] - 1.0).abs() < 1e-12);
            assert!(hq.xy.values()[k].abs() < 1e-12);
            assert!(hq.yy.values()[k].abs() < 1e-12);
            assert!((hb.xy.values()[k] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_second_derivative_converges() {
        // Compact stencil error at 0 is h²/12 |f''''| ≈ h²/12.
        let mut errs = Vec::new();
        for &h in &[0.1, 0.05] {
            let g = grid(21, h, -10.0 * h);
            let hs = hessian(&Field::from_fn(g, |x, _| x.cos())).unwrap();
            errs.push((hs.xx.at(10, 10) + 1.0).abs());
        }
        assert!(errs[0] <= 0.1f64.powi(2) / 12.0 * 1.0001);
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.99, "order {order}");
    }

    #[test]
    fn divergence_examples() {
        let g = grid(9, 0.25, -1.0);
        let radial = VectorField::new(Field::from_fn(g, |x, _| x), Field::from_fn(g, |_, y| y)).unwrap();
        let rot = VectorField::new(Field::from_fn(g, |_, y| -y), Field::from_fn(g, |x, _| x)).unwrap();
        let dr = divergence(&radial).unwrap();
        let dt = divergence(&rot).unwrap();
        assert!(dr.values().iter().all(|&v| (v - 2.0).abs() < 1e-12));
        assert!(dt.values().iter().all(|&v| v.abs() < 1e-12));

        let h = 0.02;
        let g = grid(21, h, -10.0 * h);
        let s = VectorField::new(Field::from_fn(g, |x, _| x.sin()), Field::zeros(g)).unwrap();
        let d = divergence(&s).unwrap();
        assert!((d.at(10, 3) - 1.0).abs() <= h * h / 6.0 + 1e-14);
    }

    #[test]
    fn too_small_grid_is_rejected() {
        assert!(Grid::<f64>::new(4, 9, 0.1, 0.0, 0.0, Boundary::OneSided).is_err());
    }

    #[test]
    fn one_sided_boundary_is_second_order() {
        let errs: Vec<f64> = [0.1, 0.05]
            .iter()
            .map(|&h| {
                let g = grid(11, h, 0.3);
                let d = gradient(&Field::from_fn(g, |x, _| x.exp())).unwrap();
                (d.x.at(0, 0) - 0.3f64.exp()).abs()
            })
            .collect();
        assert!((errs[0] / errs[1]).log2() > 1.9);
    }
}
