//! Adjoint state and optimality certificates for a computed minimal-time pair.
//!
//! The adjoint has terminal datum `φ(t*) = -y(t*)` and, the generator being
//! self-adjoint, `φ(τ) = D_{t*-τ} φ(t*)`. An optimal control is collinear
//! with `B φ(τ)` and saturates the bound.

use crate::error::{Error, Result};
use crate::min_time::{MinTimeSolution, Problem, Status};
use crate::spectral::Field;

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// `|‖u*‖ - M| / M`.
    pub bang_bang_residual: f64,
    /// `‖u* - M·w/‖w‖‖ / M` with `w = B φ(τ)`.
    pub collinearity_residual: f64,
    pub adjoint_at_tau: Field,
    pub terminal_state: Field,
}

impl Certificate {
    pub fn passes(&self, tol: f64) -> bool {
        self.bang_bang_residual <= tol && self.collinearity_residual <= tol
    }
}

/// `y(t*) = D_{t*} y0 + D_{t*-τ} B u*`.
pub fn terminal_state(problem: &Problem, sol: &MinTimeSolution) -> Result<Field> {
    check_solution(problem, sol)?;
    Ok(problem.terminal_map(sol.t_star)?.terminal(&sol.u_star))
}

/// `φ(τ) = -D_{t*-τ} y(t*)`.
pub fn adjoint_state(problem: &Problem, sol: &MinTimeSolution) -> Result<Field> {
    let y = terminal_state(problem, sol)?;
    adjoint_from_terminal(problem, sol.t_star, &y)
}

fn adjoint_from_terminal(problem: &Problem, t_star: f64, y: &Field) -> Result<Field> {
    let tau = problem.spec().tau;
    if t_star < tau {
        return Err(Error::TimeBeforeImpulse { t: t_star, tau });
    }
    Ok(-&problem.basis().semigroup_apply(y, t_star - tau)?)
}

pub fn verify(problem: &Problem, sol: &MinTimeSolution) -> Result<Certificate> {
    if sol.status != Status::Nontrivial {
        return Err(Error::NotApplicable(format!("solution status is {}", sol.status.name())));
    }
    let bound = problem.spec().bound;
    if bound <= 0.0 {
        return Err(Error::NotApplicable("control bound is zero".into()));
    }
    let y = terminal_state(problem, sol)?;
    let phi_tau = adjoint_from_terminal(problem, sol.t_star, &y)?;
    let w = problem.impulse().apply(&phi_tau);
    let wn = w.norm();
    if wn == 0.0 || !wn.is_finite() {
        return Err(Error::ZeroAdjoint);
    }
    let predicted = w.scale(bound / wn);
    Ok(Certificate {
        bang_bang_residual: (sol.u_star.norm() - bound).abs() / bound,
        collinearity_residual: (&sol.u_star - &predicted).norm() / bound,
        adjoint_at_tau: phi_tau,
        terminal_state: y,
    })
}

fn check_solution(problem: &Problem, sol: &MinTimeSolution) -> Result<()> {
    let n = problem.spec().n_modes;
    if sol.u_star.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sol.u_star.len() });
    }
    if !sol.u_star.is_finite() || !sol.t_star.is_finite() {
        return Err(Error::NonFinite("solution"));
    }
    Ok(())
}
