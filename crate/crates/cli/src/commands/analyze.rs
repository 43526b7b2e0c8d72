use serde_json::json;

use wgl_core::field::Mask;
use wgl_core::willmore::energy;

use super::{merge, Context};
use crate::output::OutputDir;
use crate::{CliError, Status};

#[derive(Default)]
struct OracleErrors {
    h: f64,
    k: f64,
    a2: f64,
    v: f64,
    points: usize,
}

pub fn run(ctx: &Context, out: &mut OutputDir) -> Result<Status, CliError> {
    let b = ctx.bundle(&ctx.grid)?;
    out.field("H", &b.mean)?;
    out.field("K", &b.gauss)?;
    out.field("A2", &b.a2)?;
    out.field("v", &b.v)?;

    let interior = b.interior();
    let g = ctx.grid;
    let mut err = OracleErrors::default();
    for j in 0..g.ny {
        for i in 0..g.nx {
            if !interior.contains(i, j) {
                continue;
            }
            let e = ctx.surface.exact_geometry(g.x(i), g.y(j))?;
            err.h = err.h.max((b.mean.at(i, j) - e.h).abs());
            err.k = err.k.max((b.gauss.at(i, j) - e.k).abs());
            err.a2 = err.a2.max((b.a2.at(i, j) - e.a2()).abs());
            err.v = err.v.max((b.v.at(i, j) - e.v).abs());
            err.points += 1;
        }
    }

    let body = json!({
        "energy": energy(&b, None)?,
        "sup_norm": {
            "H": b.mean.sup_norm_on(&interior),
            "K": b.gauss.sup_norm_on(&interior),
            "A2": b.a2.sup_norm_on(&interior),
            "v": b.v.sup_norm_on(&interior),
        },
        "tol_disc": b.tol_disc,
        "interior_points": Mask::count(&interior),
        "oracle_max_error": {
            "H": err.h,
            "K": err.k,
            "A2": err.a2,
            "v": err.v,
            "points": err.points,
        },
    });
    out.json("summary.json", Status::Ok.as_str(), &merge(ctx.describe(), body))?;
    Ok(Status::Ok)
}
