//! Gauss-map pullback of the hemisphere primitive `α = (x dy − y dx)/(1 + z)`,
//! whose exterior derivative is the sphere's area form, and the Stokes
//! identity `∫ η² K dμ = −∫ 2η dη ∧ n*α` built on it.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{gradient, integrate, Boundary, Field, Mask, VectorField};
use crate::geometry::{GeometryBundle, TRIM_FOURTH_ORDER};
use crate::scalar::Real;

use super::{cutoff::eta_sigma, ConstantLedger, CutoffSpec, ReportRow};

/// Components `((n*α)_x, (n*α)_y)` in the coordinates `(x, y)`.
pub fn alpha_pullback<T: Real>(b: &GeometryBundle<T>) -> Result<VectorField<T>> {
    let [nx, ny, nz] = &b.normal;
    let (dnx, dny) = (gradient(nx)?, gradient(ny)?);
    let g = *b.grid();
    let (ax, ay): (Vec<T>, Vec<T>) = (0..g.len())
        .map(|k| {
            let (x, y, w) = (nx.values()[k], ny.values()[k], T::one() + nz.values()[k]);
            ((x * dny.x.values()[k] - y * dnx.x.values()[k]) / w, (x * dny.y.values()[k] - y * dnx.y.values()[k]) / w)
        })
        .unzip();
    VectorField::new(Field::new(g, ax)?, Field::new(g, ay)?)
}

/// `sup |n*α| / |dn|` over the trimmed interior, with `|dn|` the Frobenius
/// norm of the stencil Jacobian of the normal. Zero on a plane.
pub fn alpha_certification<T: Real>(b: &GeometryBundle<T>) -> Result<T> {
    let a = alpha_pullback(b)?;
    let dn: Vec<VectorField<T>> = b.normal.iter().map(gradient).collect::<Result<_>>()?;
    let interior = b.interior();
    let mut sup = T::zero();
    for k in 0..b.grid().len() {
        if !interior.bits()[k] {
            continue;
        }
        let jac: T = dn.iter().map(|d| d.x.values()[k].powi(2) + d.y.values()[k].powi(2)).sum();
        let pull = a.x.values()[k].powi(2) + a.y.values()[k].powi(2);
        if jac > T::zero() {
            sup = sup.max((pull / jac).sqrt());
        }
    }
    Ok(sup)
}

/// `d(n*α) / (dx ∧ dy)`, the signed area density of the Gauss map, zero
/// outside the four-cell trimmed interior. Approximates `K v`.
pub fn gauss_map_density<T: Real>(b: &GeometryBundle<T>) -> Result<Field<T>> {
    let a = alpha_pullback(b)?;
    let (day, dax) = (gradient(&a.y)?, gradient(&a.x)?);
    let curl = day.x.sub(&dax.y)?;
    let inner = Mask::trimmed(b.grid(), TRIM_FOURTH_ORDER);
    Field::new(
        *b.grid(),
        curl.values().iter().zip(inner.bits()).map(|(&c, &keep)| if keep { c } else { T::zero() }).collect(),
    )
}

/// `−∫ 2η (η_x a_y − η_y a_x) dx dy`.
fn stokes_form<T: Real>(b: &GeometryBundle<T>, a: &VectorField<T>, eta: &Field<T>) -> Result<T> {
    let de = gradient(eta)?;
    let (e, ex, ey) = (eta.values(), de.x.values(), de.y.values());
    let vals = (0..e.len()).map(|k| -T::two() * e[k] * (ex[k] * a.y.values()[k] - ey[k] * a.x.values()[k])).collect();
    Ok(integrate(&Field::new(*b.grid(), vals)?, Some(&b.interior())).value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StokesReport {
    /// `∫ η² K dμ`
    pub lhs: f64,
    /// `−∫ 2η dη ∧ n*α`
    pub rhs: f64,
    pub discrepancy: f64,
    /// `∫ η² |A|² dμ`
    pub a2_term: f64,
    /// `∫ |∇η|² dμ`
    pub grad_term: f64,
    /// `4 C_α (a2_term)^{1/2} (grad_term)^{1/2}`
    pub bound: f64,
    pub bound_holds: bool,
}

fn require_clear_margin<T: Real>(eta: &Field<T>) -> Result<()> {
    if eta.grid().boundary == Boundary::Periodic {
        return Ok(());
    }
    let inner = Mask::trimmed(eta.grid(), TRIM_FOURTH_ORDER);
    if eta.values().iter().zip(inner.bits()).any(|(&e, &keep)| !keep && e != T::zero()) {
        return Err(Error::SupportTouchesMargin);
    }
    Ok(())
}

pub fn stokes_check<T: Real>(b: &GeometryBundle<T>, eta: &Field<T>, c_alpha: f64) -> Result<StokesReport> {
    b.u.check_grid(eta)?;
    require_clear_margin(eta)?;
    let eta2 = eta.mul(eta)?;
    let lhs = b.surface_integral(&eta2.mul(&b.gauss)?, None)?.value.as_f64();
    let a = alpha_pullback(b)?;
    let rhs = stokes_form(b, &a, eta)?.as_f64();
    let a2_term = b.surface_integral(&eta2.mul(&b.a2)?, None)?.value.as_f64();
    let grad_term = b.surface_integral(&b.tangential_gradient_sq(eta)?, None)?.value.as_f64();
    let bound = 4.0 * c_alpha * a2_term.max(0.0).sqrt() * grad_term.sqrt();
    Ok(StokesReport {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).abs(),
        a2_term,
        grad_term,
        bound,
        bound_holds: lhs.abs() <= bound * (1.0 + super::BOUND_RTOL),
    })
}

/// Largest `x ≥ 0` with `x² ≤ p·x + c`, i.e. `(p + √(p² + 4c)) / 2`.
pub fn quadratic_bound(p: f64, c: f64) -> f64 {
    0.5 * (p + (p * p + 4.0 * c).sqrt())
}

/// The self-improving estimate for one cutoff.
///
/// With `D = ∫|∇η|² dμ`, `x = (∫ η²|A|² dμ)^{1/2}` satisfies
/// `x² ≤ C3 + 8C_α√D·x`, so `x ≤ quadratic_bound(8C_α√D, C3) ≤ 8C_α√D + √C3`,
/// and `|∫ η² K dμ| ≤ 4C_α (8C_α√D + √C3) √D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundChain {
    pub sigma: f64,
    pub grad_energy: f64,
    pub a2_root: f64,
    pub a2_root_exact_bound: f64,
    pub a2_root_bound: f64,
    pub k_integral: f64,
    pub k_bound: f64,
}

impl BoundChain {
    pub fn rows(&self) -> [ReportRow; 2] {
        [
            ReportRow::new(self.sigma, self.a2_root, self.a2_root_bound, true),
            ReportRow::new(self.sigma, self.k_integral.abs(), self.k_bound, true),
        ]
    }

    pub fn holds(&self) -> bool {
        self.rows().iter().all(|r| r.satisfied)
    }
}

pub fn bound_chain<T: Real>(
    b: &GeometryBundle<T>,
    spec: &CutoffSpec<T>,
    ledger: &ConstantLedger,
) -> Result<BoundChain> {
    let eta2 = spec.eta.mul(&spec.eta)?;
    let d = b.surface_integral(&spec.grad_eta_tangential_sq, None)?.value.as_f64();
    let a2 = b.surface_integral(&eta2.mul(&b.a2)?, None)?.value.as_f64();
    let k = b.surface_integral(&eta2.mul(&b.gauss)?, None)?.value.as_f64();
    let ca = ledger.c_alpha;
    let root_bound = 8.0 * ca * d.sqrt() + ledger.c3.sqrt();
    Ok(BoundChain {
        sigma: spec.sigma.as_f64(),
        grad_energy: d,
        a2_root: a2.max(0.0).sqrt(),
        a2_root_exact_bound: quadratic_bound(8.0 * ca * d.sqrt(), ledger.c3),
        a2_root_bound: root_bound,
        k_integral: k,
        k_bound: 4.0 * ca * root_bound * d.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalCurvatureRow {
    pub sigma: f64,
    /// `∫ η_σ² K dμ` evaluated as `−∫ 2η dη ∧ n*α`.
    pub measured: f64,
    /// `∫ η_σ² K dμ` by direct quadrature of the stencil `K`.
    pub direct: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotalCurvature {
    pub rows: Vec<TotalCurvatureRow>,
    /// Intercept `L` of the least-squares fit `measured ≈ L + c/√(log σ)`.
    pub limit: f64,
    pub slope: f64,
    /// `∫ K dμ` over the trimmed window.
    pub window_direct: f64,
    /// `∫ d(n*α)` over the trimmed window: the signed area of the Gauss image.
    pub gauss_image_area: f64,
}

impl TotalCurvature {
    pub fn report_rows(&self) -> Vec<ReportRow> {
        self.rows.iter().map(|r| ReportRow::new(r.sigma, r.measured.abs(), r.bound, true)).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].measured.abs() < w[0].measured.abs())
    }
}

pub fn total_curvature<T: Real>(
    b: &GeometryBundle<T>,
    sigmas: &[f64],
    ledger: &ConstantLedger,
) -> Result<TotalCurvature> {
    if sigmas.is_empty() {
        return Err(Error::InvalidArgument("no σ values".into()));
    }
    let a = alpha_pullback(b)?;
    let rows = sigmas
        .par_iter()
        .map(|&sigma| {
            let spec = eta_sigma(b, T::lit(sigma))?;
            if !spec.fits_window {
                return Err(Error::WindowTooSmall(format!("σ = {sigma} does not fit the window")));
            }
            let measured = stokes_form(b, &a, &spec.eta)?.as_f64();
            let chain = bound_chain(b, &spec, ledger)?;
            Ok(TotalCurvatureRow { sigma, measured, direct: chain.k_integral, bound: chain.k_bound })
        })
        .collect::<Result<Vec<_>>>()?;
    let (limit, slope) = fit_inverse_sqrt_log(&rows);
    let inner = Mask::trimmed(b.grid(), TRIM_FOURTH_ORDER);
    let window_direct = b.surface_integral(&b.gauss, Some(&inner))?.value.as_f64();
    let gauss_image_area = integrate(&gauss_map_density(b)?, Some(&inner)).value.as_f64();
    Ok(TotalCurvature { rows, limit, slope, window_direct, gauss_image_area })
}

fn fit_inverse_sqrt_log(rows: &[TotalCurvatureRow]) -> (f64, f64) {
    if rows.len() == 1 {
        return (rows[0].measured, 0.0);
    }
    let t: Vec<f64> = rows.iter().map(|r| 1.0 / r.sigma.ln().sqrt()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.measured).collect();
    let n = t.len() as f64;
    let (mt, my) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let stt: f64 = t.iter().map(|v| (v - mt).powi(2)).sum();
    let sty: f64 = t.iter().zip(&y).map(|(a, b)| (a - mt) * (b - my)).sum();
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    (my - slope * mt, slope)
}
