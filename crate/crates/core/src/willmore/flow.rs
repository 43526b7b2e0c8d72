//! Energy-descent flow `u_t = −∇W` on a clamped window or a torus.

use crate::error::{Error, Result};
use crate::field::{Boundary, Field, Mask};
use crate::geometry::{GeometryBundle, TRIM_FOURTH_ORDER};
use crate::scalar::Real;

use super::spectral::StabilizedSolver;
use super::{div_residual, energy, GRADIENT_SCALE, GRADIENT_SIGN};

pub const DEFAULT_C_CFL: f64 = 0.05;
/// Relative energy increase tolerated before a step is rejected.
pub const ENERGY_RTOL: f64 = 1e-12;
pub const MAX_HALVINGS: usize = 20;
/// Coefficient `s` of the `s·L²` term in the stabilized scheme. The energy
/// Hessian at a flat graph is `½L²`; smaller values let near-grid-scale
/// modes overshoot on fine grids.
pub const STABILIZATION: f64 = 4.0;

/// Largest explicit timestep `c_cfl · h⁴`.
pub fn cfl_timestep<T: Real>(h: T, c_cfl: T) -> T {
    c_cfl * h * h * h * h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowBc {
    /// `u` is held at its initial values on the four-cell margin.
    DirichletClamp,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// `u ← u − τ·g` with `g` the energy gradient. Stable for `τ ≲ h⁴/16`.
    Explicit,
    /// `u ← u − τ(I + τ·s·L²)⁻¹ g` with `L` the wide Laplacian on the
    /// updated block. Allows steps far above the explicit limit.
    Stabilized,
}

#[derive(Debug, Clone)]
pub struct FlowState<T> {
    pub u: Field<T>,
    pub time: T,
    pub step_count: usize,
    /// `(time, W)` after every accepted step, starting at time zero.
    pub energy_history: Vec<(T, T)>,
    /// `sup |div_residual|` at the same instants as `energy_history`.
    pub residual_history: Vec<T>,
    pub tau: T,
    /// Total number of timestep halvings so far.
    pub halvings: usize,
    residual: Field<T>,
}

impl<T: Real> FlowState<T> {
    pub fn new(u: Field<T>, tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("timestep must be positive, got {tau}")));
        }
        let b = GeometryBundle::build(&u)?;
        let residual = div_residual(&b)?;
        let w = energy(&b, None)?;
        let sup = residual.sup_norm(0);
        Ok(Self {
            u,
            time: T::zero(),
            step_count: 0,
            energy_history: vec![(T::zero(), w)],
            residual_history: vec![sup],
            tau,
            halvings: 0,
            residual,
        })
    }

    pub fn energy(&self) -> T {
        self.energy_history.last().expect("history starts non-empty").1
    }

    pub fn sup_residual(&self) -> T {
        *self.residual_history.last().expect("history starts non-empty")
    }

    /// `div_residual` of the current `u`.
    pub fn residual(&self) -> &Field<T> {
        &self.residual
    }

    /// `time,W,sup_residual` rows with a header line.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("time,W,sup_residual\n");
        for ((t, w), r) in self.energy_history.iter().zip(&self.residual_history) {
            s.push_str(&format!("{:e},{:e},{:e}\n", t.as_f64(), w.as_f64(), r.as_f64()));
        }
        s
    }
}

/// Zero `u` on the four-cell margin of a one-sided grid.
pub fn zero_margin<T: Real>(u: &Field<T>) -> Field<T> {
    let inner = Mask::trimmed(u.grid(), TRIM_FOURTH_ORDER);
    let mut out = u.clone();
    for (v, &keep) in out.values_mut().iter_mut().zip(inner.bits()) {
        if !keep {
            *v = T::zero();
        }
    }
    out
}

struct Stepper<T: Real> {
    scheme: Scheme,
    solver: Option<StabilizedSolver<T>>,
}

impl<T: Real> Stepper<T> {
    fn new(u: &Field<T>, bc: FlowBc, scheme: Scheme) -> Result<Self> {
        let g = u.grid();
        match (bc, g.boundary) {
            (FlowBc::Periodic, Boundary::Periodic) | (FlowBc::DirichletClamp, Boundary::OneSided) => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "boundary condition {bc:?} does not fit a {} grid",
                    g.boundary.as_str()
                )))
            }
        }
        let solver = match scheme {
            Scheme::Explicit => None,
            Scheme::Stabilized => Some(StabilizedSolver::new(g, TRIM_FOURTH_ORDER, T::lit(STABILIZATION))?),
        };
        Ok(Self { scheme, solver })
    }

    fn step(&self, state: &FlowState<T>) -> Result<FlowState<T>> {
        let grad = state.residual.scale(T::lit(GRADIENT_SIGN * GRADIENT_SCALE));
        let w0 = state.energy();
        let tol = T::lit(ENERGY_RTOL).max(T::epsilon() * T::lit(4.0));
        let mut tau = state.tau;
        for halvings in 0..=MAX_HALVINGS {
            let delta = match (&self.solver, self.scheme) {
                (Some(s), Scheme::Stabilized) => s.solve(&grad, tau)?,
                _ => grad.scale(tau),
            };
            let u = state.u.sub(&delta)?;
            let accepted = u.check_finite().is_ok() && {
                let b = GeometryBundle::build(&u)?;
                let w = energy(&b, None)?;
                if w <= w0 + tol * w0 {
                    let residual = div_residual(&b)?;
                    let mut next = FlowState {
                        u,
                        time: state.time + tau,
                        step_count: state.step_count + 1,
                        energy_history: state.energy_history.clone(),
                        residual_history: state.residual_history.clone(),
                        tau,
                        halvings: state.halvings + halvings,
                        residual,
                    };
                    next.energy_history.push((next.time, w));
                    let sup = next.residual.sup_norm(0);
                    next.residual_history.push(sup);
                    return Ok(next);
                }
                false
            };
            debug_assert!(!accepted);
            tau = tau * T::half();
        }
        Err(Error::FlowUnstable { halvings: MAX_HALVINGS })
    }
}

/// One descent step. Rejected steps halve `τ` and retry.
pub fn flow_step<T: Real>(state: &FlowState<T>, bc: FlowBc, scheme: Scheme) -> Result<FlowState<T>> {
    Stepper::new(&state.u, bc, scheme)?.step(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule<T> {
    pub max_steps: usize,
    /// Stop once `sup |div_residual|` falls below this.
    pub grad_tol: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSummary<T> {
    pub reason: StopReason,
    pub steps: usize,
    pub initial_sup_u: T,
    pub final_sup_u: T,
    pub initial_energy: T,
    pub final_energy: T,
    pub final_sup_residual: T,
    pub halvings: usize,
    /// Every recorded energy is at most its predecessor.
    pub monotone: bool,
}

pub fn run_flow<T: Real>(
    u0: &Field<T>,
    bc: FlowBc,
    scheme: Scheme,
    tau: T,
    stop: StopRule<T>,
) -> Result<(FlowState<T>, FlowSummary<T>)> {
    run_flow_with(u0, bc, scheme, tau, stop, |_| Ok(()))
}

/// [`run_flow`] calling `observe` after every accepted step.
pub fn run_flow_with<T: Real>(
    u0: &Field<T>,
    bc: FlowBc,
    scheme: Scheme,
    tau: T,
    stop: StopRule<T>,
    mut observe: impl FnMut(&FlowState<T>) -> Result<()>,
) -> Result<(FlowState<T>, FlowSummary<T>)> {
    let stepper = Stepper::new(u0, bc, scheme)?;
    let mut state = FlowState::new(u0.clone(), tau)?;
    let reason = loop {
        if state.sup_residual() < stop.grad_tol {
            break StopReason::Converged;
        }
        if state.step_count >= stop.max_steps {
            break StopReason::MaxSteps;
        }
        state = stepper.step(&state)?;
        observe(&state)?;
    };
    let e = &state.energy_history;
    let summary = FlowSummary {
        reason,
        steps: state.step_count,
        initial_sup_u: u0.sup_norm(0),
        final_sup_u: state.u.sup_norm(0),
        initial_energy: e[0].1,
        final_energy: state.energy(),
        final_sup_residual: state.sup_residual(),
        halvings: state.halvings,
        monotone: e.windows(2).all(|w| w[1].1 <= w[0].1),
    };
    Ok((state, summary))
}
