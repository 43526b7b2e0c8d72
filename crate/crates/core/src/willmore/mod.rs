//! Willmore energy `W = ¼∫H² dμ`, the two forms of its Euler–Lagrange
//! residual, and a descent flow for graphs.
//!
//! The geometric residual is `Δ_g H + ½H³ − 2HK`. The divergence residual is
//!
//! ```text
//! div( (1/v) ( (I − Du⊗Du/v²) ∇(vH) − ½ H² Du ) )
//! ```
//!
//! and the two agree pointwise ([`CONVERSION_FACTOR`] is one). On the grid,
//! the flat-pairing gradient of the trapezoid energy is exactly
//! [`GRADIENT_SCALE`] times the discrete divergence residual wherever the
//! perturbation stays clear of the trimmed margin, which is what the flow
//! descends along.

mod flow;
mod spectral;

pub use flow::{
    cfl_timestep, flow_step, run_flow, run_flow_with, zero_margin, FlowBc, FlowState, FlowSummary, Scheme, StopReason,
    StopRule, DEFAULT_C_CFL, ENERGY_RTOL, MAX_HALVINGS, STABILIZATION,
};

use crate::error::{Error, Result};
use crate::field::{divergence, gradient, integrate, Boundary, Field, Mask, VectorField};
use crate::geometry::{GeometryBundle, TRIM_FOURTH_ORDER};
use crate::scalar::Real;

/// Fourth-order residuals need at least this many points per axis.
pub const MIN_RESIDUAL_POINTS: usize = 17;

/// `div_residual = CONVERSION_FACTOR · el_residual` for smooth graphs.
pub const CONVERSION_FACTOR: f64 = 1.0;

/// Sign relating `div_residual` to the energy gradient, fixed by
/// [`gradient_check`].
pub const GRADIENT_SIGN: f64 = 1.0;

/// `∇W = GRADIENT_SIGN · GRADIENT_SCALE · div_residual` in the flat pairing.
pub const GRADIENT_SCALE: f64 = 0.5;

/// `¼ ∫ H² dμ` over `mask`, or over the default trimmed interior.
pub fn energy<T: Real>(b: &GeometryBundle<T>, mask: Option<&Mask>) -> Result<T> {
    let h2 = b.mean.map(|h| h * h);
    let r = b.surface_integral(&h2, mask)?;
    if r.empty_mask {
        return Err(Error::InvalidArgument("energy over an empty mask".into()));
    }
    Ok(r.value * T::lit(0.25))
}

fn residual_mask<T: Real>(b: &GeometryBundle<T>) -> Result<Mask> {
    b.grid().require_min(MIN_RESIDUAL_POINTS)?;
    Ok(Mask::trimmed(b.grid(), TRIM_FOURTH_ORDER))
}

fn restrict<T: Real>(f: Field<T>, mask: &Mask) -> Field<T> {
    let mut f = f;
    for (v, &keep) in f.values_mut().iter_mut().zip(mask.bits()) {
        if !keep {
            *v = T::zero();
        }
    }
    f
}

/// `Δ_g H + ½H³ − 2HK`, zero outside the four-cell trimmed interior.
pub fn el_residual<T: Real>(b: &GeometryBundle<T>) -> Result<Field<T>> {
    let mask = residual_mask(b)?;
    let lb = b.laplace_beltrami(&b.mean)?;
    let (h, k) = (b.mean.values(), b.gauss.values());
    let two = T::two();
    let vals = lb.values().iter().enumerate().map(|(n, &l)| l + T::half() * h[n] * h[n] * h[n] - two * h[n] * k[n]);
    Ok(restrict(Field::new(*b.grid(), vals.collect())?, &mask))
}

/// The divergence-form residual, zero outside the four-cell trimmed interior.
pub fn div_residual<T: Real>(b: &GeometryBundle<T>) -> Result<Field<T>> {
    let mask = residual_mask(b)?;
    let vh = b.v.mul(&b.mean)?;
    let dvh = gradient(&vh)?;
    let (ux, uy, v, h) = (b.du.x.values(), b.du.y.values(), b.v.values(), b.mean.values());
    let (wx, wy) = (dvh.x.values(), dvh.y.values());
    let n = v.len();
    let (mut fx, mut fy) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let proj = (ux[k] * wx[k] + uy[k] * wy[k]) / (v[k] * v[k]);
        let half_h2 = T::half() * h[k] * h[k];
        fx.push((wx[k] - ux[k] * proj - half_h2 * ux[k]) / v[k]);
        fy.push((wy[k] - uy[k] * proj - half_h2 * uy[k]) / v[k]);
    }
    let g = *b.grid();
    let flux = VectorField::new(Field::new(g, fx)?, Field::new(g, fy)?)?;
    Ok(restrict(divergence(&flux)?, &mask))
}

/// Both residual fields of one bundle.
#[derive(Debug, Clone)]
pub struct ResidualReport<T> {
    pub el: Field<T>,
    pub div_form: Field<T>,
    /// `div_form / el` where `|el|` exceeds [`ResidualReport::threshold`], zero elsewhere.
    pub ratio_field: Field<T>,
    pub threshold: T,
    pub sup_norm_el: T,
    pub sup_norm_div: T,
}

/// Points where both residuals are small, both large, or only one is small,
/// relative to the same threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroSetAgreement {
    pub both_small: usize,
    pub both_large: usize,
    pub disagree: usize,
}

#[derive(Debug, Clone)]
pub struct Equivalence<T> {
    pub report: ResidualReport<T>,
    /// Least-squares factor `c` minimising `Σ (div − c·el)²` over ratio points.
    pub fitted_factor: T,
    /// Largest `|ratio − fitted_factor|` over ratio points.
    pub factor_spread: T,
    pub ratio_points: usize,
    /// `sup |div − CONVERSION_FACTOR·el|` over the trimmed interior.
    pub sup_deviation: T,
    pub zero_set: ZeroSetAgreement,
}

/// Ratio points are those with `|el|` above this fraction of `sup |el|`.
pub const RATIO_THRESHOLD: f64 = 1e-2;

pub fn residual_report<T: Real>(b: &GeometryBundle<T>) -> Result<ResidualReport<T>> {
    let mask = residual_mask(b)?;
    report_from_fields(el_residual(b)?, div_residual(b)?, &mask)
}

fn report_from_fields<T: Real>(el: Field<T>, div_form: Field<T>, mask: &Mask) -> Result<ResidualReport<T>> {
    let sup_norm_el = el.sup_norm_on(mask);
    let sup_norm_div = div_form.sup_norm_on(mask);
    let threshold = sup_norm_el * T::lit(RATIO_THRESHOLD);
    let ratio_field =
        div_form.zip_with(&el, |d, e| if e.abs() > threshold && e != T::zero() { d / e } else { T::zero() })?;
    Ok(ResidualReport { el, div_form, ratio_field, threshold, sup_norm_el, sup_norm_div })
}

pub fn residual_equivalence<T: Real>(b: &GeometryBundle<T>) -> Result<Equivalence<T>> {
    compare_residuals(el_residual(b)?, div_residual(b)?, &residual_mask(b)?)
}

/// Equivalence statistics for an arbitrary pair of residual fields over
/// `mask`; [`residual_equivalence`] applies it to one bundle.
pub fn compare_residuals<T: Real>(el: Field<T>, div_form: Field<T>, mask: &Mask) -> Result<Equivalence<T>> {
    el.check_grid(&div_form)?;
    let report = report_from_fields(el, div_form, mask)?;
    let c = T::lit(CONVERSION_FACTOR);
    let (el, div, ratio) = (report.el.values(), report.div_form.values(), report.ratio_field.values());
    let (mut num, mut den) = (Vec::new(), Vec::new());
    let mut zero_set = ZeroSetAgreement { both_small: 0, both_large: 0, disagree: 0 };
    let mut sup_deviation = T::zero();
    for k in 0..el.len() {
        if !mask.bits()[k] {
            continue;
        }
        sup_deviation = sup_deviation.max((div[k] - c * el[k]).abs());
        let small = (el[k].abs() <= report.threshold, div[k].abs() <= report.threshold);
        match small {
            (true, true) => zero_set.both_small += 1,
            (false, false) => zero_set.both_large += 1,
            _ => zero_set.disagree += 1,
        }
        if el[k].abs() > report.threshold && el[k] != T::zero() {
            num.push(div[k] * el[k]);
            den.push(el[k] * el[k]);
        }
    }
    let ratio_points = den.len();
    let (fitted_factor, factor_spread) = if ratio_points == 0 {
        (T::nan(), T::zero())
    } else {
        let f = crate::field::pairwise_sum(&num) / crate::field::pairwise_sum(&den);
        let spread = (0..el.len())
            .filter(|&k| mask.bits()[k] && el[k].abs() > report.threshold && el[k] != T::zero())
            .fold(T::zero(), |m, k| m.max((ratio[k] - f).abs()));
        (f, spread)
    };
    Ok(Equivalence { report, fitted_factor, factor_spread, ratio_points, sup_deviation, zero_set })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck<T> {
    /// Central difference `[W(u+εφ) − W(u−εφ)]/(2ε)`.
    pub finite_difference: T,
    /// `GRADIENT_SCALE · ∫ div_residual(u)·φ dx dy`.
    pub pairing: T,
    /// Sign `s ∈ {+1, −1}` for which `s·pairing` best matches the difference.
    pub best_sign: T,
    /// Relative mismatch with the frozen [`GRADIENT_SIGN`].
    pub mismatch: T,
    /// The same mismatch with `10ε`.
    pub mismatch_10eps: T,
    /// Set when shrinking `ε` made the mismatch worse, i.e. rounding dominates.
    pub rounding_dominated: bool,
}

fn relative_mismatch<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}

/// Compare a central difference of [`energy`] along `φ` with the residual
/// pairing. `φ` must vanish within [`TRIM_FOURTH_ORDER`] cells of the edge.
pub fn gradient_check<T: Real>(u: &Field<T>, phi: &Field<T>, eps: T) -> Result<GradientCheck<T>> {
    u.check_grid(phi)?;
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
    }
    if u.grid().boundary == Boundary::OneSided {
        let inner = Mask::trimmed(u.grid(), TRIM_FOURTH_ORDER);
        if phi.values().iter().zip(inner.bits()).any(|(&p, &keep)| !keep && p != T::zero()) {
            return Err(Error::SupportTouchesMargin);
        }
    }
    let b = GeometryBundle::build(u)?;
    let res = div_residual(&b)?;
    let pairing = integrate(&res.mul(phi)?, None).value * T::lit(GRADIENT_SCALE);
    let central = |e: T| -> Result<T> {
        let plus = u.zip_with(phi, |a, p| a + e * p)?;
        let minus = u.zip_with(phi, |a, p| a - e * p)?;
        let wp = energy(&GeometryBundle::build(&plus)?, None)?;
        let wm = energy(&GeometryBundle::build(&minus)?, None)?;
        Ok((wp - wm) / (T::two() * e))
    };
    let fd = central(eps)?;
    let fd10 = central(eps * T::lit(10.0))?;
    let sign = T::lit(GRADIENT_SIGN);
    let best_sign =
        if relative_mismatch(fd, pairing) <= relative_mismatch(fd, -pairing) { T::one() } else { -T::one() };
    let mismatch = relative_mismatch(fd, sign * pairing);
    let mismatch_10eps = relative_mismatch(fd10, sign * pairing);
    let floor = T::epsilon().sqrt() * T::lit(1e-4);
    Ok(GradientCheck {
        finite_difference: fd,
        pairing,
        best_sign,
        mismatch,
        mismatch_10eps,
        rounding_dominated: mismatch > mismatch_10eps && mismatch > floor,
    })
}
