use serde_json::json;

use wgl_core::field::Boundary;
use wgl_core::willmore::{
    cfl_timestep, run_flow_with, zero_margin, FlowBc, Scheme, StopReason, StopRule, STABILIZATION,
};
use wgl_core::Error;

use super::{merge, Context};
use crate::config::SchemeName;
use crate::output::OutputDir;
use crate::{CliError, Status};

pub fn run(ctx: &Context, out: &mut OutputDir) -> Result<Status, CliError> {
    let opts = &ctx.cfg.flow;
    let g = ctx.grid;
    let (bc, mut u0) = match g.boundary {
        Boundary::Periodic => (FlowBc::Periodic, ctx.sample(&g)?),
        Boundary::OneSided => (FlowBc::DirichletClamp, ctx.sample(&g)?),
    };
    if bc == FlowBc::DirichletClamp && opts.zero_margin {
        u0 = zero_margin(&u0);
    }
    let scheme = match opts.scheme {
        SchemeName::Explicit => Scheme::Explicit,
        SchemeName::Stabilized => Scheme::Stabilized,
    };
    let tau = opts.tau.unwrap_or(match scheme {
        Scheme::Explicit => cfl_timestep(g.h, opts.c_cfl),
        Scheme::Stabilized => 1.0,
    });
    let stop = StopRule { max_steps: opts.max_steps, grad_tol: opts.grad_tol };
    out.field("initial", &u0)?;

    let every = opts.checkpoint_every;
    let result = run_flow_with(&u0, bc, scheme, tau, stop, |s| {
        if every > 0 && s.step_count % every == 0 {
            out.field(&format!("checkpoint_{:08}", s.step_count), &s.u).map_err(|e| Error::Io(e.to_string()))?;
        }
        Ok(())
    });
    let head = merge(
        ctx.describe(),
        json!({
            "scheme": opts.scheme,
            "stabilization": if scheme == Scheme::Stabilized { Some(STABILIZATION) } else { None },
            "initial_tau": tau,
            "stop": { "max_steps": opts.max_steps, "grad_tol": opts.grad_tol },
        }),
    );
    let (state, summary) = match result {
        Ok(r) => r,
        Err(Error::FlowUnstable { halvings }) => {
            let body = json!({ "error": format!("energy kept increasing after {halvings} timestep halvings") });
            out.json("summary.json", Status::Failed.as_str(), &merge(head, body))?;
            return Ok(Status::Failed);
        }
        Err(e) => return Err(e.into()),
    };

    out.csv("energy_history.csv", &state.history_csv())?;
    out.field("final", &state.u)?;
    let status = if summary.monotone { Status::Ok } else { Status::Failed };
    let body = json!({
        "reason": match summary.reason {
            StopReason::Converged => "converged",
            StopReason::MaxSteps => "max_steps",
        },
        "steps": summary.steps,
        "time": state.time,
        "final_tau": state.tau,
        "halvings": summary.halvings,
        "initial_sup_u": summary.initial_sup_u,
        "final_sup_u": summary.final_sup_u,
        "sup_u_ratio": if summary.initial_sup_u > 0.0 { summary.final_sup_u / summary.initial_sup_u } else { 0.0 },
        "initial_energy": summary.initial_energy,
        "final_energy": summary.final_energy,
        "final_sup_residual": summary.final_sup_residual,
        "energy_nonincreasing": summary.monotone,
    });
    out.json("summary.json", status.as_str(), &merge(head, body))?;
    Ok(status)
}
