//! First- and second-order geometry of a sampled graph `z = u(x, y)`.

use crate::error::Result;
use crate::field::{divergence, gradient, hessian, integrate, Field, Integral, Mask, VectorField};
use crate::scalar::Real;

/// Cells excluded from integrals of first/second-order quantities.
pub const TRIM_SECOND_ORDER: usize = 2;
/// Cells excluded for fourth-order compositions such as `Δ_g H`.
pub const TRIM_FOURTH_ORDER: usize = 4;

/// Derived fields of one surface on one grid.
///
/// The normal is oriented upward, `n = (−u_x, −u_y, 1)/v`, and the mean
/// curvature is `H = div(Du/v)` with its sign (a concave-down cap has
/// `H < 0`).
#[derive(Debug, Clone)]
pub struct GeometryBundle<T> {
    pub u: Field<T>,
    pub du: VectorField<T>,
    /// Slope factor `√(1 + |Du|²)`, also the area density `dμ = v dx dy`.
    pub v: Field<T>,
    pub mean: Field<T>,
    pub gauss: Field<T>,
    /// `|A|² = H² − 2K`
    pub a2: Field<T>,
    pub normal: [Field<T>; 3],
    /// `max(0, −min A2)`: how far the discrete `H² − 2K` dips below zero.
    pub tol_disc: T,
}

impl<T: Real> GeometryBundle<T> {
    pub fn build(u: &Field<T>) -> Result<Self> {
        u.check_finite()?;
        let du = gradient(u)?;
        let v = du.norm_sq().map(|s| (T::one() + s).sqrt());
        let inv_v = v.map(T::recip);
        let mean = divergence(&du.scale_by(&inv_v)?)?;
        let hs = hessian(u)?;
        let det = hs.xx.mul(&hs.yy)?.sub(&hs.xy.mul(&hs.xy)?)?;
        let gauss = det.zip_with(&v, |d, v| d / (v * v * v * v))?;
        let two = T::two();
        let a2 = mean.zip_with(&gauss, |h, k| h * h - two * k)?;
        let normal = [du.x.mul(&inv_v)?.map(|c| -c), du.y.mul(&inv_v)?.map(|c| -c), inv_v];
        let tol_disc = T::zero().max(-a2.min_value());
        Ok(Self { u: u.clone(), du, v, mean, gauss, a2, normal, tol_disc })
    }

    pub fn grid(&self) -> &crate::field::Grid<T> {
        self.u.grid()
    }

    pub fn area_density(&self) -> &Field<T> {
        &self.v
    }

    /// `Δ_g f = (1/v) div((vI − Du⊗Du/v) ∇f)`
    pub fn laplace_beltrami(&self, f: &Field<T>) -> Result<Field<T>> {
        self.u.check_grid(f)?;
        let df = gradient(f)?;
        let (ux, uy) = (self.du.x.values(), self.du.y.values());
        let (fx, fy, v) = (df.x.values(), df.y.values(), self.v.values());
        let n = v.len();
        let mut flux_x = Vec::with_capacity(n);
        let mut flux_y = Vec::with_capacity(n);
        for k in 0..n {
            let proj = (ux[k] * fx[k] + uy[k] * fy[k]) / v[k];
            flux_x.push(v[k] * fx[k] - ux[k] * proj);
            flux_y.push(v[k] * fy[k] - uy[k] * proj);
        }
        let g = *self.grid();
        let flux = VectorField::new(Field::new(g, flux_x)?, Field::new(g, flux_y)?)?;
        divergence(&flux)?.zip_with(&self.v, |d, v| d / v)
    }

    /// `∫ f dμ = ∫ f v dx dy` over `mask`, or over the interior trimmed by
    /// [`TRIM_SECOND_ORDER`] cells when no mask is given.
    pub fn surface_integral(&self, f: &Field<T>, mask: Option<&Mask>) -> Result<Integral<T>> {
        let weighted = f.mul(&self.v)?;
        let default_mask;
        let m = match mask {
            Some(m) => m,
            None => {
                default_mask = Mask::trimmed(self.grid(), TRIM_SECOND_ORDER);
                &default_mask
            }
        };
        Ok(integrate(&weighted, Some(m)))
    }

    /// Interior mask with the default second-order trim.
    pub fn interior(&self) -> Mask {
        Mask::trimmed(self.grid(), TRIM_SECOND_ORDER)
    }

    /// Squared surface gradient `|∇_g f|² = |Df|² − (Du·Df)²/v²`.
    pub fn tangential_gradient_sq(&self, f: &Field<T>) -> Result<Field<T>> {
        self.u.check_grid(f)?;
        let df = gradient(f)?;
        let (ux, uy) = (self.du.x.values(), self.du.y.values());
        let (fx, fy, v) = (df.x.values(), df.y.values(), self.v.values());
        let vals = (0..v.len())
            .map(|k| {
                let dot = ux[k] * fx[k] + uy[k] * fy[k];
                let flat = fx[k] * fx[k] + fy[k] * fy[k];
                (flat - dot * dot / (v[k] * v[k])).max(T::zero())
            })
            .collect();
        Field::new(*self.grid(), vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Boundary, Grid};
    use crate::surfaces::Surface;

    fn bundle(s: &Surface, lo: f64, hi: f64, h: f64) -> GeometryBundle<f64> {
        let g = Grid::square(lo, hi, h).unwrap();
        GeometryBundle::build(&s.sample(&g).unwrap()).unwrap()
    }

    #[test]
    fn plane_bundle() {
        let b = bundle(&Surface::flat(), -1.0, 1.0, 0.125);
        assert!(b.v.values().iter().all(|&v| v == 1.0));
        assert!(b.mean.values().iter().chain(b.gauss.values()).chain(b.a2.values()).all(|&v| v == 0.0));
        assert!(b.normal[2].values().iter().all(|&v| v == 1.0));
        assert_eq!(b.tol_disc, 0.0);
    }

    #[test]
    fn paraboloid_at_origin() {
        let b = bundle(&Surface::Paraboloid, -1.0, 1.0, 1.0 / 64.0);
        let c = b.grid().nx / 2;
        assert!((b.gauss.at(c, c) - 1.0).abs() < 1e-12);
        assert!((b.mean.at(c, c) - 2.0).abs() < 1e-3);
        assert!((b.a2.at(c, c) - 2.0).abs() < 5e-3);
    }

    #[test]
    fn sphere_cap_interior_values() {
        let b = bundle(&Surface::sphere_cap(2.0), -1.0, 1.0, 1.0 / 128.0);
        let (i, j) = (128 + 38, 128 + 51); // ≈ (0.3, 0.4)
        assert!((b.mean.at(i, j) + 1.0).abs() < 1e-3);
        assert!((b.gauss.at(i, j) - 0.25).abs() < 1e-3);
        assert!((b.a2.at(i, j) - 0.5).abs() < 2e-3);
    }

    #[test]
    fn normal_is_unit_and_upward() {
        let b = bundle(&Surface::TiltedBump { amplitude: 1.0, width: 0.7, a: 0.5, b: 0.3 }, -2.0, 2.0, 1.0 / 32.0);
        for k in 0..b.v.values().len() {
            let n = [b.normal[0].values()[k], b.normal[1].values()[k], b.normal[2].values()[k]];
            assert!(((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) - 1.0).abs() < 1e-14);
            assert!(n[2] > 0.0 && n[2] <= 1.0);
            assert!(b.v.values()[k] >= 1.0);
        }
    }

    #[test]
    fn laplace_beltrami_reduces_to_flat_laplacian_on_plane() {
        let g = Grid::<f64>::square(-1.0, 1.0, 1.0 / 16.0).unwrap();
        let b = GeometryBundle::build(&Field::zeros(g)).unwrap();
        let f = Field::from_fn(g, |x, y| (2.0 * x).sin() * y.cos());
        let lb = b.laplace_beltrami(&f).unwrap();
        let flat = divergence(&gradient(&f).unwrap()).unwrap();
        assert_eq!(lb, flat);
        let c = b.laplace_beltrami(&Field::constant(g, 4.0)).unwrap();
        assert!(c.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplace_beltrami_of_constant_mean_curvature_vanishes_on_sphere() {
        let mut sups = Vec::new();
        for &h in &[1.0 / 32.0, 1.0 / 64.0] {
            let b = bundle(&Surface::sphere_cap(2.0), -1.0, 1.0, h);
            let region = Mask::inset(b.grid(), 4.0 / 32.0);
            sups.push(b.laplace_beltrami(&b.mean).unwrap().sup_norm_on(&region));
        }
        assert!(sups[1] < 1e-2, "{sups:?}");
        assert!((sups[0] / sups[1]).log2() > 1.8, "{sups:?}");
    }

    #[test]
    fn surface_integral_examples() {
        let g = Grid::<f64>::square(0.0, 1.0, 1.0 / 32.0).unwrap();
        let flat = GeometryBundle::build(&Field::zeros(g)).unwrap();
        let tilt = GeometryBundle::build(&Field::from_fn(g, |x, _| x)).unwrap();
        let all = Mask::all(&g);
        let one = Field::constant(g, 1.0);
        assert!((flat.surface_integral(&one, Some(&all)).unwrap().value - 1.0).abs() < 1e-14);
        assert!((tilt.surface_integral(&one, Some(&all)).unwrap().value - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn spherical_zone_area() {
        // Area of the unit sphere over r ≤ 0.6 is 2π(1 − 0.8).
        let b = bundle(&Surface::sphere_cap(1.0), -0.65, 0.65, 1.0 / 400.0);
        let disk = Mask::from_fn(b.grid(), |x, y| x * x + y * y <= 0.36);
        let a = b.surface_integral(&Field::constant(*b.grid(), 1.0), Some(&disk)).unwrap().value;
        let exact = 2.0 * std::f64::consts::PI * 0.2;
        assert!((a - exact).abs() / exact < 5e-3, "{a} vs {exact}");
    }

    #[test]
    fn vertical_translation_changes_nothing() {
        let s = Surface::gaussian_bump(0.8);
        let g = Grid::<f64>::square(-2.0, 2.0, 1.0 / 16.0).unwrap();
        let u = s.sample(&g).unwrap();
        let b0 = GeometryBundle::build(&u).unwrap();
        let b1 = GeometryBundle::build(&u.map(|z| z + 3.0)).unwrap();
        for (a, b) in [(&b0.mean, &b1.mean), (&b0.gauss, &b1.gauss), (&b0.v, &b1.v)] {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn periodic_translation_shifts_fields() {
        let g = Grid::<f64>::periodic_torus(32).unwrap();
        let s = Surface::random_trig(5, 0.3);
        let u = s.sample(&g).unwrap();
        let shift = 3;
        let shifted = Field::new(g, (0..g.len()).map(|k| u.at((k % 32 + shift) % 32, k / 32)).collect()).unwrap();
        let (b0, b1) = (GeometryBundle::build(&u).unwrap(), GeometryBundle::build(&shifted).unwrap());
        for j in 0..32 {
            for i in 0..32 {
                assert!((b1.mean.at(i, j) - b0.mean.at((i + shift) % 32, j)).abs() < 1e-12);
                assert!((b1.gauss.at(i, j) - b0.gauss.at((i + shift) % 32, j)).abs() < 1e-12);
            }
        }
        assert_eq!(g.boundary, Boundary::Periodic);
    }
}
