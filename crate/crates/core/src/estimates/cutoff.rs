use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{GeometryBundle, TRIM_FOURTH_ORDER};
use crate::scalar::Real;

use super::{ambient_radius, window_contains, ConstantLedger, ReportRow};

/// Logarithmic cutoff: `1` for `s ≤ √σ`, `2 − 2 log s / log σ` up to `σ`,
/// and `0` beyond.
pub fn eta_profile<T: Real>(s: T, sigma: T) -> T {
    if s <= sigma.sqrt() {
        T::one()
    } else if s <= sigma {
        (T::two() - T::two() * s.ln() / sigma.ln()).max(T::zero())
    } else {
        T::zero()
    }
}

/// `η_σ` sampled on a surface together with its squared surface gradient.
#[derive(Debug, Clone)]
pub struct CutoffSpec<T> {
    pub sigma: T,
    pub eta: Field<T>,
    /// `|∇_g η|²` from stencils on the sampled `η`.
    pub grad_eta_tangential_sq: Field<T>,
    /// `(2 / (|x| log σ))²` on the annulus `√σ < |x| < σ`, zero elsewhere.
    pub analytic_bound_sq: Field<T>,
    /// The disk `r ≤ σ` lies inside the window with a four-cell margin.
    pub fits_window: bool,
}

pub fn eta_sigma<T: Real>(b: &GeometryBundle<T>, sigma: T) -> Result<CutoffSpec<T>> {
    if !(sigma > T::one()) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("σ must exceed 1, got {sigma}")));
    }
    let rho = ambient_radius(b);
    let eta = rho.map(|s| eta_profile(s, sigma));
    let grad_eta_tangential_sq = b.tangential_gradient_sq(&eta)?;
    let (lo, log_sigma) = (sigma.sqrt(), sigma.ln());
    let analytic_bound_sq = rho.map(|s| {
        if s > lo && s < sigma {
            let g = T::two() / (s * log_sigma);
            g * g
        } else {
            T::zero()
        }
    });
    let fits_window = window_contains(b, sigma, TRIM_FOURTH_ORDER);
    Ok(CutoffSpec { sigma, eta, grad_eta_tangential_sq, analytic_bound_sq, fits_window })
}

/// `∫ |∇_g η_σ|² dμ` against `C5 / log σ`.
pub fn cutoff_energy<T: Real>(
    b: &GeometryBundle<T>,
    spec: &CutoffSpec<T>,
    ledger: &ConstantLedger,
) -> Result<ReportRow> {
    if !spec.fits_window {
        return Err(Error::WindowTooSmall(format!("σ = {} does not fit the window", spec.sigma)));
    }
    let measured = b.surface_integral(&spec.grad_eta_tangential_sq, None)?.value.as_f64();
    let sigma = spec.sigma.as_f64();
    Ok(ReportRow::new(sigma, measured, ledger.c5 / sigma.ln(), true))
}
