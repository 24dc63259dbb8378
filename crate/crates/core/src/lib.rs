//! Minimal-time impulse control of the Dirichlet heat equation on an interval.
//!
//! Given `y0`, an actuator interval `ω`, a target radius `r`, a bound `M` and
//! an impulse time `τ`, the controlled state is
//!
//! ```text
//! y' = Δy on (0,τ)∪(τ,T),   y(τ) = y(τ⁻) + χ_ω u,   ‖u‖ ≤ M,
//! ```
//!
//! and the task is the smallest `T ≥ τ` with `‖y(T)‖ ≤ r`. Everything is
//! computed in a truncated sine eigenbasis where the semigroup is diagonal.
//!
//! ```
//! use heat_impulse::{DomainSpec, Field, ProblemSpec, Status, solve_min_time};
//!
//! let spec = ProblemSpec::new(Field::unit(1, 1), DomainSpec::full(1.0).unwrap(), 0.1, 0.5, 0.0);
//! let sol = solve_min_time(&spec).unwrap();
//! assert_eq!(sol.status, Status::Nontrivial);
//! assert!((sol.t_star - 5f64.ln() / std::f64::consts::PI.powi(2)).abs() < 1e-6);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod min_time;
pub mod optimality;
pub mod presets;
pub mod spectral;
pub mod subproblem;
pub mod sweep;

pub use error::{Error, Result};
pub use min_time::{
    admissible_time_bound, check_nontrivial, oracle_min_time, solve_min_time, value_function,
    MinTimeSolution, Nontriviality, OracleGrid, OracleResult, Problem, ProblemSpec, Status,
    Tolerances,
};
pub use optimality::{adjoint_state, terminal_state, verify, Certificate};
pub use presets::InitialState;
pub use spectral::{
    build_basis, indicator_matrix, inner, l2_norm, semigroup_apply, ControlSpace, DomainSpec,
    Field, ImpulseOperator, IndicatorMatrix, SpectralBasis,
};
pub use subproblem::{
    assemble_terminal_map, solve_ball_fixed_point, solve_ball_least_norm, FixedPointOptions,
    SecularOptions, SubproblemSolution, TerminalMap,
};
pub use sweep::{
    check_continuity, check_control_convergence, check_monotone_in_m, robustness_margin,
    run_sweep, run_sweep_with_threads, ContinuityOptions, ContinuityReport, ConvergenceReport,
    MonotoneReport, RobustnessReport, SweepCell, SweepGrid, SweepResult,
};
