use serde_json::json;

use wgl_core::estimates::{
    alpha_certification, area_growth as area_rows, bound_chain, calibration_chain, cutoff_energy, disk_totals,
    eta_sigma, rows_csv, total_curvature as sweep, ConstantLedger,
};
use wgl_core::Error;

use super::{merge, Context};
use crate::output::OutputDir;
use crate::{CliError, Status};

pub fn area_growth(ctx: &Context, out: &mut OutputDir) -> Result<Status, CliError> {
    let b = ctx.bundle(&ctx.grid)?;
    let ledger = ConstantLedger::compute(&b)?;
    let mut warnings = Vec::new();

    let rows = area_rows(&b, &ctx.cfg.radii, &ledger)?;
    for r in rows.iter().filter(|r| !r.trusted) {
        warnings.push(format!("R = {}: ball reaches the window edge; row not trusted", r.parameter));
    }
    let mut chains = Vec::new();
    for &r in &ctx.cfg.radii {
        match calibration_chain(&b, r) {
            Ok(c) => chains.push(c),
            Err(Error::WindowTooSmall(m)) => warnings.push(m),
            Err(e) => return Err(e.into()),
        }
    }
    let passed = rows.iter().all(|r| !r.trusted || r.satisfied) && chains.iter().all(|c| c.holds());
    let status = if passed { Status::Ok } else { Status::Failed };

    out.csv("area_growth.csv", &rows_csv(&rows))?;
    let body = json!({
        "ledger": ledger,
        "rows": rows,
        "calibration_chains": chains,
        "warnings": warnings,
    });
    out.json("summary.json", status.as_str(), &merge(ctx.describe(), body))?;
    Ok(status)
}

pub fn total_curvature(ctx: &Context, out: &mut OutputDir) -> Result<Status, CliError> {
    let b = ctx.bundle(&ctx.grid)?;
    let ledger = ConstantLedger::compute(&b)?;
    let mut warnings = Vec::new();

    let mut fitting = Vec::new();
    let mut cutoff_rows = Vec::new();
    let mut chains = Vec::new();
    for &sigma in &ctx.cfg.sigmas {
        let spec = eta_sigma(&b, sigma)?;
        if !spec.fits_window {
            warnings.push(format!("σ = {sigma} does not fit the window; skipped"));
            continue;
        }
        fitting.push(sigma);
        cutoff_rows.push(cutoff_energy(&b, &spec, &ledger)?);
        chains.push(bound_chain(&b, &spec, &ledger)?);
    }
    let tc = if fitting.is_empty() { None } else { Some(sweep(&b, &fitting, &ledger)?) };

    let mut disks = Vec::new();
    let mut disk_csv = String::from("R,int_K,int_H2\n");
    for &r in &ctx.cfg.radii {
        match disk_totals(&b, r) {
            Ok((k, h2)) => {
                disk_csv.push_str(&format!("{r:e},{k:e},{h2:e}\n"));
                disks.push(json!({ "R": r, "int_K": k, "int_H2": h2 }));
            }
            Err(Error::WindowTooSmall(m)) => warnings.push(m),
            Err(e) => return Err(e.into()),
        }
    }

    let mut bound_rows = cutoff_rows.clone();
    bound_rows.extend(chains.iter().flat_map(|c| c.rows()));
    if let Some(tc) = &tc {
        bound_rows.extend(tc.report_rows());
    }
    let status = if bound_rows.iter().all(|r| r.satisfied) { Status::Ok } else { Status::Failed };

    let mut tc_csv = String::from("sigma,measured,direct,bound\n");
    if let Some(tc) = &tc {
        for r in &tc.rows {
            tc_csv.push_str(&format!("{:e},{:e},{:e},{:e}\n", r.sigma, r.measured, r.direct, r.bound));
        }
    }
    out.csv("total_curvature.csv", &tc_csv)?;
    out.csv("cutoff_energy.csv", &rows_csv(&cutoff_rows))?;
    out.csv("disk_totals.csv", &disk_csv)?;
    let body = json!({
        "ledger": ledger,
        "alpha_certification": alpha_certification(&b)?,
        "total_curvature": tc,
        "strictly_decreasing": tc.as_ref().map(|t| t.strictly_decreasing()),
        "cutoff_energy": cutoff_rows,
        "bound_chains": chains,
        "disk_totals": disks,
        "warnings": warnings,
    });
    out.json("summary.json", status.as_str(), &merge(ctx.describe(), body))?;
    Ok(status)
}
