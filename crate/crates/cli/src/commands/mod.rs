mod analyze;
mod flow;
mod sweeps;
mod verify;

use serde_json::{json, Value};

use wgl_core::field::{Field, Grid};
use wgl_core::geometry::GeometryBundle;
use wgl_core::surfaces::Surface;

use crate::config::RunConfig;
use crate::output::OutputDir;
use crate::{CliError, Command, Status};

pub fn dispatch(command: &Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<Status, CliError> {
    let ctx = Context::new(cfg)?;
    match command {
        Command::Analyze(_) => analyze::run(&ctx, out),
        Command::Verify(_) => verify::run(&ctx, out),
        Command::AreaGrowth(_) => sweeps::area_growth(&ctx, out),
        Command::TotalCurvature(_) => sweeps::total_curvature(&ctx, out),
        Command::Flow(_) => flow::run(&ctx, out),
    }
}

/// Validated config with the surface and base grid resolved.
pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub surface: Surface,
    pub grid: Grid<f64>,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        Ok(Self { cfg, surface: cfg.surface()?, grid: cfg.grid.build()? })
    }

    pub fn sample(&self, grid: &Grid<f64>) -> Result<Field<f64>, CliError> {
        Ok(self.surface.sample(grid)?)
    }

    pub fn bundle(&self, grid: &Grid<f64>) -> Result<GeometryBundle<f64>, CliError> {
        Ok(GeometryBundle::build(&self.sample(grid)?)?)
    }

    /// Header block shared by every summary.
    pub fn describe(&self) -> Value {
        json!({
            "surface": self.cfg.surface,
            "grid": grid_json(&self.grid),
        })
    }
}

pub fn grid_json(g: &Grid<f64>) -> Value {
    json!({
        "nx": g.nx,
        "ny": g.ny,
        "h": g.h,
        "x0": g.x0,
        "y0": g.y0,
        "boundary": g.boundary.as_str(),
    })
}

/// `log2(e_k / e_{k+1})` for consecutive errors of a halving sequence.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Insert `body` into the context header and return the merged object.
pub fn merge(mut head: Value, body: Value) -> Value {
    if let (Some(h), Value::Object(b)) = (head.as_object_mut(), body) {
        h.extend(b);
    }
    head
}
