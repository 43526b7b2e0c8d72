use super::dual::Dual2;
use super::Surface;
use crate::error::Result;

/// Closed-form geometry at one point, derived from the surface jet by
/// forward-mode differentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactGeometry {
    pub v: f64,
    /// `div(Du / v)`, no absolute value.
    pub h: f64,
    /// `det D²u / v⁴`
    pub k: f64,
    /// `Δ_g H`
    pub laplace_beltrami_h: f64,
    /// `Δ_g H + H³/2 − 2HK`
    pub el: f64,
    /// `div((1/v)((I − Du⊗Du/v²)∇(vH) − H²Du/2))`
    pub div_form: f64,
}

impl ExactGeometry {
    pub fn a2(&self) -> f64 {
        self.h * self.h - 2.0 * self.k
    }
}

/// `(H, K)` at `(x, y)`.
pub fn exact_curvatures(s: &Surface, x: f64, y: f64) -> Result<(f64, f64)> {
    let j = s.jet(x, y)?;
    let [p, q] = j.d1;
    let [r, sxy, t] = j.d2;
    let v2 = 1.0 + p * p + q * q;
    let v = v2.sqrt();
    let h = ((1.0 + q * q) * r - 2.0 * p * q * sxy + (1.0 + p * p) * t) / (v2 * v);
    let k = (r * t - sxy * sxy) / (v2 * v2);
    Ok((h, k))
}

/// Willmore energy density with respect to `dx dy`: `H² v / 4`.
pub fn exact_willmore_density(s: &Surface, x: f64, y: f64) -> Result<f64> {
    let (h, _) = exact_curvatures(s, x, y)?;
    let [p, q] = s.jet(x, y)?.d1;
    Ok(0.25 * h * h * (1.0 + p * p + q * q).sqrt())
}

impl Surface {
    /// Every quantity of the geometry and Willmore modules in closed form.
    pub fn exact_geometry(&self, x: f64, y: f64) -> Result<ExactGeometry> {
        let j = self.jet(x, y)?;
        let d = |a: usize, b: usize| {
            Dual2::new(
                j.partial(a, b),
                j.partial(a + 1, b),
                j.partial(a, b + 1),
                j.partial(a + 2, b),
                j.partial(a + 1, b + 1),
                j.partial(a, b + 2),
            )
        };
        let (p, q) = (d(1, 0), d(0, 1));
        let (r, s, t) = (d(2, 0), d(1, 1), d(0, 2));

        let v = (p * p + q * q + 1.0).sqrt();
        let v3 = v * v * v;
        let h = ((q * q + 1.0) * r - p * q * s * 2.0 + (p * p + 1.0) * t) / v3;
        let k = (r * t - s * s) / (v3 * v);

        // Δ_g H = (1/v) div((vI − Du⊗Du/v) ∇H)
        let (hx, hy) = (h.dx(), h.dy());
        let proj = (p * hx + q * hy) / v;
        let fx = v * hx - p * proj;
        let fy = v * hy - q * proj;
        let lb = (fx.x + fy.y) / v.v;

        let el = lb + 0.5 * h.v.powi(3) - 2.0 * h.v * k.v;

        let w = v * h;
        let (wx, wy) = (w.dx(), w.dy());
        let pw = (p * wx + q * wy) / (v * v);
        let h2 = h * h;
        let gx = (wx - p * pw - h2 * p * 0.5) / v;
        let gy = (wy - q * pw - h2 * q * 0.5) / v;
        let div_form = gx.x + gy.y;

        Ok(ExactGeometry { v: v.v, h: h.v, k: k.v, laplace_beltrami_h: lb, el, div_form })
    }
}
