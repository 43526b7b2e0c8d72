use serde_json::{json, Value};

use wgl_core::estimates::{alpha_certification, stokes_check, ConstantLedger};
use wgl_core::field::{Boundary, Field, Grid, Mask};
use wgl_core::geometry::TRIM_FOURTH_ORDER;
use wgl_core::willmore::{
    compare_residuals, div_residual, el_residual, gradient_check, CONVERSION_FACTOR, GRADIENT_SIGN,
};

use super::{merge, orders, Context};
use crate::output::OutputDir;
use crate::{CliError, Status};

/// Errors below `ROUNDING_FACTOR · ε_mach · scale` count as rounding.
const ROUNDING_FACTOR: f64 = 1e2;
const GRADIENT_TOL: f64 = 1e-3;
const FACTOR_TOL: f64 = 2e-2;
const CERTIFICATION_TOL: f64 = 1.05;

struct Verdict {
    name: &'static str,
    passed: bool,
    detail: Value,
}

impl Verdict {
    fn json(&self) -> Value {
        merge(json!({ "name": self.name, "passed": self.passed }), self.detail.clone())
    }
}

/// A refinement sequence passes when every consecutive pair either converges
/// at `min_order` or has already reached its rounding floor.
fn refinement(name: &'static str, errors: Vec<f64>, floors: Vec<f64>, min_order: f64) -> Verdict {
    let ords = orders(&errors);
    let rounding: Vec<bool> = errors.iter().zip(&floors).map(|(e, f)| e <= f).collect();
    let passed = ords.iter().enumerate().all(|(k, &p)| rounding[k + 1] || p >= min_order);
    Verdict {
        name,
        passed,
        detail: json!({
            "errors": errors,
            "rounding_floor": floors,
            "at_rounding_floor": rounding,
            "orders": ords,
            "min_order": min_order,
        }),
    }
}

/// Smooth bump `(1 − r²/ρ²)⁴` used as cutoff and test function.
fn smooth_bump(g: &Grid<f64>, cx: f64, cy: f64, radius: f64) -> Field<f64> {
    Field::from_fn(*g, |x, y| {
        let q = ((x - cx).powi(2) + (y - cy).powi(2)) / (radius * radius);
        if q < 1.0 {
            (1.0 - q).powi(4)
        } else {
            0.0
        }
    })
}

/// Centre and radius of a bump that stays clear of the fourth-order margin
/// of `g` (and hence of every refinement of it).
fn bump_support(g: &Grid<f64>) -> (f64, f64, f64) {
    let (cx, cy) = (0.5 * (g.x0 + g.x_max()), 0.5 * (g.y0 + g.y_max()));
    if g.boundary == Boundary::Periodic {
        return (cx, cy, 0.45 * (g.x_max() - g.x0).min(g.y_max() - g.y0));
    }
    let half = 0.5 * (g.x_max() - g.x0).min(g.y_max() - g.y0);
    let at_origin = g.inner_distance(0.0, 0.0, TRIM_FOURTH_ORDER);
    let (cx, cy) = if at_origin > 0.25 * half { (0.0, 0.0) } else { (cx, cy) };
    (cx, cy, 0.9 * g.inner_distance(cx, cy, TRIM_FOURTH_ORDER))
}

fn nearest_index(g: &Grid<f64>, x: f64, y: f64) -> (usize, usize) {
    let clamp = |t: f64, n: usize| (t.round().max(0.0) as usize).min(n - 1);
    (clamp((x - g.x0) / g.h, g.nx), clamp((y - g.y0) / g.h, g.ny))
}

pub fn run(ctx: &Context, out: &mut OutputDir) -> Result<Status, CliError> {
    let opts = &ctx.cfg.verify;
    if opts.levels < 2 {
        return Err(CliError::Config("verify needs at least two refinement levels".into()));
    }
    if !(opts.epsilon > 0.0) {
        return Err(CliError::Config("verify.epsilon must be positive".into()));
    }
    let mut grids = vec![ctx.grid];
    for _ in 1..opts.levels {
        let next = grids.last().expect("non-empty").refined()?;
        grids.push(next);
    }
    let base = grids[0];
    let (cx, cy, radius) = bump_support(&base);
    if !(radius > 0.0) {
        return Err(CliError::Config("window too small for a cutoff clear of the margin".into()));
    }
    let region_inset = TRIM_FOURTH_ORDER as f64 * base.h;
    let width = (base.x_max() - base.x0) * (base.y_max() - base.y0);
    let eps = f64::EPSILON;

    let finest_floor = ROUNDING_FACTOR * eps / grids.last().expect("non-empty").h.powi(4);
    let corruption = 1e-2_f64.max(1e3 * finest_floor);

    let mut rows =
        String::from("h,sup_deviation,fitted_factor,sup_el,sup_div,stokes_discrepancy,alpha_certification\n");
    let mut deviations = Vec::new();
    let mut residual_floors = Vec::new();
    let mut discrepancies = Vec::new();
    let mut stokes_floors = Vec::new();
    let mut levels = Vec::new();
    let mut last = None;
    for g in &grids {
        let b = ctx.bundle(g)?;
        let el = el_residual(&b)?;
        let mut div = div_residual(&b)?;
        if ctx.cfg.test_hooks.corrupt_div_residual {
            let (i, j) = nearest_index(g, cx, cy);
            div.set(i, j, div.at(i, j) + corruption);
        }
        let region = Mask::inset(g, region_inset).and(&Mask::trimmed(g, TRIM_FOURTH_ORDER));
        let eq = compare_residuals(el, div, &region)?;
        let scale = 1.0 + b.u.sup_norm(0);
        let floor = ROUNDING_FACTOR * eps * scale / g.h.powi(4);

        let ledger = ConstantLedger::compute(&b)?;
        let eta = smooth_bump(g, cx, cy, radius);
        let stokes = stokes_check(&b, &eta, ledger.c_alpha)?;
        let cert = alpha_certification(&b)?;

        rows.push_str(&format!(
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            g.h,
            eq.sup_deviation,
            eq.fitted_factor,
            eq.report.sup_norm_el,
            eq.report.sup_norm_div,
            stokes.discrepancy,
            cert
        ));
        levels.push(json!({
            "h": g.h,
            "sup_deviation": eq.sup_deviation,
            "fitted_factor": eq.fitted_factor,
            "factor_spread": eq.factor_spread,
            "ratio_points": eq.ratio_points,
            "zero_set": {
                "both_small": eq.zero_set.both_small,
                "both_large": eq.zero_set.both_large,
                "disagree": eq.zero_set.disagree,
            },
            "sup_el": eq.report.sup_norm_el,
            "sup_div": eq.report.sup_norm_div,
            "stokes": stokes,
            "alpha_certification": cert,
        }));
        deviations.push(eq.sup_deviation);
        residual_floors.push(floor);
        discrepancies.push(stokes.discrepancy);
        stokes_floors.push(ROUNDING_FACTOR * eps * scale * width / (g.h * g.h));
        last = Some((eq, cert, floor));
    }
    let (eq, cert, floor) = last.expect("at least two levels");

    let mut verdicts = vec![refinement("residual_equivalence", deviations, residual_floors, opts.min_order)];
    let judged = eq.report.sup_norm_el > floor && eq.ratio_points > 0;
    verdicts.push(Verdict {
        name: "conversion_factor",
        passed: !judged || (eq.fitted_factor - CONVERSION_FACTOR).abs() <= FACTOR_TOL,
        detail: json!({
            "expected": CONVERSION_FACTOR,
            "fitted": eq.fitted_factor,
            "tolerance": FACTOR_TOL,
            "judged": judged,
        }),
    });

    let finest = *grids.last().expect("non-empty");
    let u = ctx.sample(&finest)?;
    let phi = smooth_bump(&finest, cx, cy, radius);
    let gc = gradient_check(&u, &phi, opts.epsilon)?;
    let abs_floor = 100.0 * opts.epsilon * opts.epsilon;
    let below_floor = (gc.finite_difference - gc.pairing).abs() <= abs_floor;
    verdicts.push(Verdict {
        name: "gradient_check",
        passed: below_floor || (gc.mismatch < GRADIENT_TOL && gc.best_sign == GRADIENT_SIGN),
        detail: json!({
            "h": finest.h,
            "epsilon": opts.epsilon,
            "finite_difference": gc.finite_difference,
            "pairing": gc.pairing,
            "best_sign": gc.best_sign,
            "frozen_sign": GRADIENT_SIGN,
            "mismatch": gc.mismatch,
            "mismatch_10eps": gc.mismatch_10eps,
            "rounding_dominated": gc.rounding_dominated,
            "absolute_floor": abs_floor,
            "tolerance": GRADIENT_TOL,
        }),
    });

    verdicts.push(refinement("stokes_discrepancy", discrepancies, stokes_floors, opts.min_order));
    verdicts.push(Verdict {
        name: "alpha_certification",
        passed: cert <= CERTIFICATION_TOL,
        detail: json!({ "measured": cert, "limit": CERTIFICATION_TOL }),
    });

    let status = if verdicts.iter().all(|v| v.passed) { Status::Ok } else { Status::Failed };
    out.csv("refinement.csv", &rows)?;
    let body = json!({
        "cutoff": { "center": [cx, cy], "radius": radius },
        "test_hooks": { "corrupt_div_residual": ctx.cfg.test_hooks.corrupt_div_residual },
        "levels": levels,
        "verdicts": verdicts.iter().map(Verdict::json).collect::<Vec<_>>(),
    });
    out.json("summary.json", status.as_str(), &merge(ctx.describe(), body))?;
    Ok(status)
}
